//! Virtual-dummy forward selection.
//!
//! Dummy predictors drawn from a rotationally invariant law are never stored
//! as `n x L` blocks. Only their projections onto the adaptively revealed
//! basis are kept, and a dummy is completed to a full vector only when a
//! selector picks it. On top of this sit LARS and OMP drivers and the T-Rex
//! FDR-controlled selector.

pub mod ambient;
pub mod chol;
pub mod design;
pub mod dummy;
pub mod error;
pub mod rng;
pub mod selectors;
pub mod trex;

pub use ambient::{AmbientSpace, CenteredVector, OrthonormalBasis};
pub use design::{ColumnProvider, DenseColumns, Stacked};
pub use dummy::{DummyLaw, DummyPool, PoolMode};
pub use error::{Result, VdError};
pub use selectors::{PathEvent, PathResult, SelectorKind, StoppingRule};
