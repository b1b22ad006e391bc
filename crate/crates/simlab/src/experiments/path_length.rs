//! Number of selection steps up to the `T`-th dummy.

use serde::{Deserialize, Serialize};
use vdselect_core::selectors::{run_path, vd_omp_run};
use vdselect_core::{AmbientSpace, DummyLaw, DummyPool, SelectorKind, StoppingRule};

use super::{par_map, require, sub_seed};
use crate::error::Result;
use crate::generate::gen_linear_model;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathLengthParams {
    pub n: usize,
    pub p: usize,
    pub s: usize,
    pub snr: f64,
    pub l: usize,
    pub t: usize,
    pub runs: usize,
    pub law: DummyLaw,
    pub selector: SelectorKind,
    pub seed: u64,
}

impl Default for PathLengthParams {
    fn default() -> Self {
        Self {
            n: 200,
            p: 500,
            s: 5,
            snr: 1.0,
            l: 2500,
            t: 10,
            runs: 500,
            law: DummyLaw::Spherical,
            selector: SelectorKind::Lars,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathLengthRow {
    pub replicate: usize,
    /// Steps taken, dummies included.
    pub kappa: usize,
    pub true_positives: usize,
    pub nulls: usize,
    pub dummies: usize,
}

/// One path per run on a fresh model, stopped at the `T`-th dummy.
pub fn path_length_experiment(params: &PathLengthParams) -> Result<Vec<PathLengthRow>> {
    require(params.t >= 1 && params.t <= params.l, || format!("T must lie in 1..={}", params.l))?;
    let space = AmbientSpace::new(params.n)?;
    par_map(params.runs, |run| {
        let model = gen_linear_model(params.n, params.p, params.s, params.snr, sub_seed(params.seed, 0, run as u64))?;
        let pool = DummyPool::sampled(params.l, params.law, space, sub_seed(params.seed, 1, run as u64));
        let stop = StoppingRule::DummyCount(params.t);
        let path = match params.selector {
            SelectorKind::Lars => run_path(&model.x, &model.y, pool, stop)?,
            SelectorKind::Omp => vd_omp_run(&model.x, &model.y, pool, stop)?,
        };
        let true_positives = path
            .events
            .iter()
            .filter(|e| !e.is_dummy && model.active.binary_search(&e.index).is_ok())
            .count();
        Ok(PathLengthRow {
            replicate: run,
            kappa: path.kappa(),
            true_positives,
            nulls: path.kappa() - true_positives - path.dummies_selected,
            dummies: path.dummies_selected,
        })
    })
}
