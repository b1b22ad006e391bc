//! The T-Rex selector: early-terminated random experiments, relative
//! occurrences, voting thresholds and FDP calibration.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ambient::AmbientSpace;
use crate::design::ColumnProvider;
use crate::dummy::{DummyLaw, DummyPool};
use crate::error::{Result, VdError};
use crate::rng::derive_seed;
use crate::selectors::{run_path, vd_omp_run, PathResult, SelectorKind, StoppingRule};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrexConfig {
    /// Dummies per experiment.
    pub l: usize,
    /// Number of random experiments.
    pub b: usize,
    /// Largest number of dummies a path is run to.
    pub t_max: usize,
    /// Target FDR level.
    pub alpha: f64,
    pub law: DummyLaw,
    pub selector: SelectorKind,
    pub master_seed: u64,
}

impl TrexConfig {
    pub fn validate(&self) -> Result<()> {
        if self.b == 0 {
            return Err(VdError::InvalidParameter("at least one random experiment is required".into()));
        }
        if self.t_max == 0 || self.t_max > self.l {
            return Err(VdError::InvalidParameter(format!(
                "t_max must lie in 1..=L (t_max = {}, L = {})",
                self.t_max, self.l
            )));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(VdError::InvalidParameter(format!("alpha must lie in (0, 1], got {}", self.alpha)));
        }
        Ok(())
    }

    /// Seed of experiment `b`.
    pub fn experiment_seed(&self, b: usize) -> u64 {
        derive_seed(self.master_seed, b as u64)
    }
}

/// Ordered selections of one random experiment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub experiment: usize,
    pub seed: u64,
    /// Global indices in selection order with their dummy flags.
    pub selections: Vec<(usize, bool)>,
    pub dummies: usize,
    /// The path ended before reaching `t_max` dummies.
    pub exhausted: bool,
}

impl CandidateRecord {
    pub fn from_path(experiment: usize, seed: u64, path: &PathResult) -> Self {
        Self {
            experiment,
            seed,
            selections: path.selected().collect(),
            dummies: path.dummies_selected,
            exhausted: path.exhausted,
        }
    }

    /// Real indices selected before the `t`-th dummy (all of them if the path
    /// ended first).
    pub fn candidates(&self, t: usize) -> Vec<usize> {
        let mut out = Vec::new();
        if t == 0 {
            return out;
        }
        let mut seen = 0;
        for &(j, dummy) in &self.selections {
            if dummy {
                seen += 1;
                if seen == t {
                    break;
                }
            } else {
                out.push(j);
            }
        }
        out
    }

    /// Number of selection steps.
    pub fn kappa(&self) -> usize {
        self.selections.len()
    }
}

/// Runs one forward path for experiment `b`.
pub fn run_experiment<P: ColumnProvider>(x: &P, y: &[f64], config: &TrexConfig, b: usize) -> Result<CandidateRecord> {
    let space = AmbientSpace::new(x.n())?;
    let seed = config.experiment_seed(b);
    let pool = DummyPool::sampled(config.l, config.law, space, seed);
    let stop = StoppingRule::DummyCount(config.t_max);
    let path = match config.selector {
        SelectorKind::Lars => run_path(x, y, pool, stop),
        SelectorKind::Omp => vd_omp_run(x, y, pool, stop),
    }
    .map_err(|e| VdError::Experiment {
        experiment: b,
        source: Box::new(e),
    })?;
    Ok(CandidateRecord::from_path(b, seed, &path))
}

/// Runs the `B` experiments in parallel; output is ordered by experiment.
pub fn run_random_experiments<P: ColumnProvider>(x: &P, y: &[f64], config: &TrexConfig) -> Result<Vec<CandidateRecord>> {
    config.validate()?;
    (0..config.b)
        .into_par_iter()
        .map(|b| run_experiment(x, y, config, b))
        .collect()
}

/// Counts of `j in C_b(T)` over experiments, for `T = 1..=t_max`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OccurrenceTable {
    p: usize,
    t_max: usize,
    b: usize,
    counts: Vec<u32>,
}

impl OccurrenceTable {
    pub fn from_counts(p: usize, t_max: usize, b: usize, counts: Vec<u32>) -> Result<Self> {
        if counts.len() != p * t_max {
            return Err(VdError::DimensionMismatch {
                expected: p * t_max,
                found: counts.len(),
            });
        }
        if b == 0 || counts.iter().any(|&c| c as usize > b) {
            return Err(VdError::InvalidParameter("occurrence counts exceed the experiment count".into()));
        }
        Ok(Self { p, t_max, b, counts })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn t_max(&self) -> usize {
        self.t_max
    }

    pub fn b(&self) -> usize {
        self.b
    }

    /// Number of experiments in which `j` was selected before the `t`-th dummy.
    pub fn count(&self, j: usize, t: usize) -> u32 {
        if t == 0 {
            0
        } else {
            self.counts[j * self.t_max + t - 1]
        }
    }

    /// Relative occurrence `Phi_T(j)`; zero at `T = 0`.
    pub fn phi(&self, j: usize, t: usize) -> f64 {
        self.count(j, t) as f64 / self.b as f64
    }

    /// Indices whose count strictly exceeds `B/2 + i`, i.e. `Phi > 0.5 + i/B`.
    fn selected_on_grid(&self, i: usize, t: usize) -> Vec<usize> {
        let bar = self.b + 2 * i;
        (0..self.p).filter(|&j| 2 * self.count(j, t) as usize > bar).collect()
    }
}

/// Builds the occurrence table of `records` over `p` real columns.
pub fn relative_occurrences(records: &[CandidateRecord], p: usize, t_max: usize) -> Result<OccurrenceTable> {
    if records.is_empty() {
        return Err(VdError::InvalidParameter("no random experiments to aggregate".into()));
    }
    let mut counts = vec![0u32; p * t_max];
    for rec in records {
        // First dummy count at which each real index appears.
        let mut seen = 0usize;
        for &(j, dummy) in &rec.selections {
            if dummy {
                seen += 1;
                if seen >= t_max {
                    break;
                }
            } else if j < p {
                for t in seen + 1..=t_max {
                    counts[j * t_max + t - 1] += 1;
                }
            }
        }
    }
    OccurrenceTable::from_counts(p, t_max, records.len(), counts)
}

/// Voting-threshold selection `{j : Phi_T(j) > v}`.
///
/// `Phi` is a multiple of `1/B`, so the comparison is made on counts against
/// `v B`, snapped to the nearest integer when within rounding of it. This keeps
/// grid thresholds such as `0.5 + 2/6` exact.
pub fn selected_set(table: &OccurrenceTable, v: f64, t: usize) -> Vec<usize> {
    let mut bar = v * table.b() as f64;
    if (bar - bar.round()).abs() < 1e-9 {
        bar = bar.round();
    }
    (0..table.p()).filter(|&j| table.count(j, t) as f64 > bar).collect()
}

/// Inputs available to an FDP estimator at one grid point.
#[derive(Debug, Clone, Copy)]
pub struct FdpQuery<'a> {
    pub table: &'a OccurrenceTable,
    pub l: usize,
    pub v: f64,
    pub t: usize,
    pub selected: usize,
}

/// Estimate of the false discovery proportion of a voting selection.
pub trait FdpEstimator: Sync {
    fn estimate(&self, q: &FdpQuery<'_>) -> f64;
}

/// Expected number of nulls entering before the `T`-th dummy, `p T / (L + 1)`,
/// divided by the selection size and clamped to `[0, 1]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct NhgEstimator;

impl FdpEstimator for NhgEstimator {
    fn estimate(&self, q: &FdpQuery<'_>) -> f64 {
        if q.t == 0 {
            return 0.0;
        }
        let v_hat = q.table.p() as f64 * q.t as f64 / (q.l as f64 + 1.0);
        (v_hat / (q.selected.max(1) as f64)).min(1.0)
    }
}

/// Default FDP estimate at `(v, T)`.
pub fn fdp_estimate(config: &TrexConfig, table: &OccurrenceTable, v: f64, t: usize) -> f64 {
    let selected = selected_set(table, v, t).len();
    NhgEstimator.estimate(&FdpQuery {
        table,
        l: config.l,
        v,
        t,
        selected,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub v_star: Option<f64>,
    pub t_star: Option<usize>,
    pub selected: Vec<usize>,
    pub fdp_estimate: Option<f64>,
    pub feasible: bool,
}

impl Calibration {
    fn infeasible() -> Self {
        Self {
            v_star: None,
            t_star: None,
            selected: Vec::new(),
            fdp_estimate: None,
            feasible: false,
        }
    }
}

/// Voting thresholds `0.5 + i/B` below one.
pub fn voting_grid(b: usize) -> Vec<f64> {
    (0..b.div_ceil(2)).map(|i| 0.5 + i as f64 / b as f64).collect()
}

/// Picks `(v, T)` maximizing the selection size subject to the default
/// estimate staying at or below `alpha`.
pub fn calibrate(table: &OccurrenceTable, config: &TrexConfig) -> Calibration {
    calibrate_with(table, config, &NhgEstimator, 1..=table.t_max())
}

/// Calibration with a given estimator over the dummy counts in `ts`.
/// Ties in selection size go to the smaller estimate, then the smaller `T`,
/// then the larger `v`.
pub fn calibrate_with(
    table: &OccurrenceTable,
    config: &TrexConfig,
    estimator: &dyn FdpEstimator,
    ts: impl IntoIterator<Item = usize>,
) -> Calibration {
    let b = table.b();
    let mut best: Option<(usize, f64, usize, usize, Vec<usize>)> = None;
    for t in ts {
        if t == 0 || t > table.t_max() {
            continue;
        }
        for i in 0..b.div_ceil(2) {
            let v = 0.5 + i as f64 / b as f64;
            let sel = table.selected_on_grid(i, t);
            let est = estimator.estimate(&FdpQuery {
                table,
                l: config.l,
                v,
                t,
                selected: sel.len(),
            });
            if est > config.alpha {
                continue;
            }
            let better = match &best {
                None => true,
                Some((n, e, bt, bi, _)) => {
                    (sel.len(), std::cmp::Reverse(OrdF64(est)), std::cmp::Reverse(t), i)
                        > (*n, std::cmp::Reverse(OrdF64(*e)), std::cmp::Reverse(*bt), *bi)
                }
            };
            if better {
                best = Some((sel.len(), est, t, i, sel));
            }
        }
    }
    match best {
        None => Calibration::infeasible(),
        Some((_, est, t, i, sel)) => Calibration {
            v_star: Some(0.5 + i as f64 / b as f64),
            t_star: Some(t),
            selected: sel,
            fdp_estimate: Some(est),
            feasible: true,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Outcome of an end-to-end T-Rex run.
#[derive(Debug, Clone)]
pub struct TrexResult {
    pub records: Vec<CandidateRecord>,
    pub table: OccurrenceTable,
    pub calibration: Calibration,
}

/// Random experiments, occurrence table and calibration.
pub fn trex_select<P: ColumnProvider>(x: &P, y: &[f64], config: &TrexConfig) -> Result<TrexResult> {
    let records = run_random_experiments(x, y, config)?;
    let table = relative_occurrences(&records, x.p(), config.t_max)?;
    let calibration = calibrate(&table, config);
    Ok(TrexResult {
        records,
        table,
        calibration,
    })
}
