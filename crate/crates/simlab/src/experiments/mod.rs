//! Monte Carlo drivers. Every driver is a deterministic function of its
//! parameter record: replicates draw from seeds derived from the master
//! seed and are collected in replicate order whatever the thread count.

mod equivalence;
mod fdr;
mod norm_inflation;
mod path_length;
mod universality;

use rayon::prelude::*;
use vdselect_core::rng::derive_seed;

use crate::error::{Result, SimError};

pub use equivalence::{equivalence_experiment, equivalence_ks, envelopes, Envelope, EquivalenceParams, EquivalenceRow, Method};
pub use fdr::{fdr_cells, fdr_experiment, FdrCell, FdrParams, FdrRow};
pub use norm_inflation::{
    inflation_deltas, norm_inflation_experiment, ratio_trials, InflationDelta, InflationRow, NormInflationOutput,
    NormInflationParams, RatioRow,
};
pub use path_length::{path_length_experiment, PathLengthParams, PathLengthRow};
pub use universality::{universality_experiment, universality_medians, UniversalityCell, UniversalityParams, UniversalityRow};

/// Seed for item `index` of the stream labelled `tag`.
pub(crate) fn sub_seed(seed: u64, tag: u64, index: u64) -> u64 {
    derive_seed(derive_seed(seed, tag), index)
}

/// Runs `f` on `0..count` in parallel and returns the results in order.
pub(crate) fn par_map<R: Send>(count: usize, f: impl Fn(usize) -> Result<R> + Sync + Send) -> Result<Vec<R>> {
    (0..count).into_par_iter().map(f).collect()
}

pub(crate) fn require(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(SimError::InvalidParameter(msg()))
    }
}
