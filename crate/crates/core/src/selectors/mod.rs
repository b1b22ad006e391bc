//! Forward selection over real columns plus dummies.
//!
//! Candidates carry a global index: real columns first, then explicit dummy
//! columns held by the provider (explicit augmentation), then the virtual
//! dummies of the pool. For a virtual run with `p` real columns dummy `l`
//! therefore has index `p + l`, exactly as it would in the explicitly
//! augmented design.

mod forward;
mod lars;
mod omp;

use std::time::Duration;

use serde::{Deserialize, Serialize};

pub use self::lars::{ad_lars_run, equiangular, run_path, Equiangular, LarsState};
pub use self::omp::{ad_omp_run, vd_omp_run, OmpState};

/// Relative window inside which two step sizes count as a tie.
pub const TOL_TIE: f64 = 1e-12;

/// When a forward path stops.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StoppingRule {
    /// After this many dummies have been selected.
    DummyCount(usize),
    /// Once this many candidates are active.
    ActiveLimit(usize),
    /// Before a step whose maximal absolute correlation is at most this.
    CorrelationFloor(f64),
}

/// Selection rule used inside T-Rex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectorKind {
    Lars,
    Omp,
}

impl std::str::FromStr for SelectorKind {
    type Err = crate::VdError;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "lars" => Ok(SelectorKind::Lars),
            "omp" => Ok(SelectorKind::Omp),
            other => Err(crate::VdError::InvalidParameter(format!("unknown selector '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathEvent {
    /// 1-based step counter.
    pub step: usize,
    /// Global index of the entrant.
    pub index: usize,
    pub is_dummy: bool,
    /// Step length taken along the previous equiangular direction before the
    /// entrant joined. Zero for the first LARS step and for OMP.
    pub gamma: f64,
    /// Maximal absolute correlation when the step started.
    pub c_before: f64,
    pub basis_size_after: usize,
}

#[derive(Debug, Clone, Default)]
pub struct PathResult {
    /// Number of real columns; indices at or above it are dummies.
    pub p: usize,
    pub events: Vec<PathEvent>,
    pub dummies_selected: usize,
    /// Full vectors of realized virtual dummies, keyed by dummy index.
    pub realized: Vec<(usize, Vec<f64>)>,
    /// Final least-squares step when the path ran out of candidates.
    pub terminal_gamma: Option<f64>,
    /// The path ended before its stopping rule was met.
    pub exhausted: bool,
    /// Step-size ties resolved by the index order.
    pub ties: usize,
    /// Time spent on dummy scores, slopes, projections and realizations.
    pub dummy_time: Duration,
}

impl PathResult {
    /// Total number of selection steps.
    pub fn kappa(&self) -> usize {
        self.events.len()
    }

    pub fn selected(&self) -> impl Iterator<Item = (usize, bool)> + '_ {
        self.events.iter().map(|e| (e.index, e.is_dummy))
    }

    /// Real indices selected before the `t`-th dummy, in selection order.
    /// If fewer than `t` dummies were selected, every real index is returned.
    pub fn candidates(&self, t: usize) -> Vec<usize> {
        let mut out = Vec::new();
        if t == 0 {
            return out;
        }
        let mut seen = 0;
        for e in &self.events {
            if e.is_dummy {
                seen += 1;
                if seen == t {
                    break;
                }
            } else {
                out.push(e.index);
            }
        }
        out
    }
}

/// Status after a step request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Step {
    /// A candidate joined the active set.
    Entered(PathEvent),
    /// The path ended; no further steps are possible.
    Finished,
}

impl Step {
    pub fn event(&self) -> Option<&PathEvent> {
        match self {
            Step::Entered(e) => Some(e),
            Step::Finished => None,
        }
    }
}

pub(crate) fn rule_met(rule: StoppingRule, dummies: usize, active: usize) -> bool {
    match rule {
        StoppingRule::DummyCount(t) => dummies >= t,
        StoppingRule::ActiveLimit(n) => active >= n,
        StoppingRule::CorrelationFloor(_) => false,
    }
}

pub(crate) fn floor_of(rule: StoppingRule) -> f64 {
    match rule {
        StoppingRule::CorrelationFloor(tol) => tol,
        _ => 0.0,
    }
}
