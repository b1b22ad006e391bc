//! FDP and TPP of T-Rex over a grid of target levels, dummy factors and
//! signal strengths.

use serde::{Deserialize, Serialize};
use vdselect_core::trex::{calibrate, relative_occurrences, run_random_experiments, TrexConfig};
use vdselect_core::{DummyLaw, SelectorKind};

use super::{par_map, require, sub_seed};
use crate::error::Result;
use crate::generate::gen_linear_model;
use crate::metrics::{fdp_tpp, mean_se};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdrParams {
    pub n: usize,
    pub p: usize,
    pub s: usize,
    pub snrs: Vec<f64>,
    pub alphas: Vec<f64>,
    /// `L = factor * p`.
    pub l_factors: Vec<usize>,
    pub b: usize,
    pub t_max: usize,
    pub replicates: usize,
    pub law: DummyLaw,
    pub selector: SelectorKind,
    pub seed: u64,
}

impl Default for FdrParams {
    fn default() -> Self {
        Self {
            n: 150,
            p: 300,
            s: 10,
            snrs: vec![1.0],
            alphas: vec![0.1],
            l_factors: vec![5],
            b: 20,
            t_max: 10,
            replicates: 200,
            law: DummyLaw::Spherical,
            selector: SelectorKind::Lars,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdrRow {
    pub alpha: f64,
    pub l_factor: usize,
    pub snr: f64,
    pub replicate: usize,
    pub fdp: f64,
    pub tpp: f64,
}

/// A fresh model per `(snr, replicate)`. The random experiments do not
/// depend on the target level, so they run once per dummy factor and are
/// calibrated for every level.
pub fn fdr_experiment(params: &FdrParams) -> Result<Vec<FdrRow>> {
    require(params.replicates > 0, || "replicates must be positive".into())?;
    require(!params.snrs.is_empty() && !params.alphas.is_empty() && !params.l_factors.is_empty(), || {
        "snr, alpha and L-factor lists must be nonempty".into()
    })?;
    let jobs: Vec<(usize, usize)> = (0..params.snrs.len())
        .flat_map(|si| (0..params.replicates).map(move |r| (si, r)))
        .collect();
    let per_job = par_map(jobs.len(), |k| {
        let (si, rep) = jobs[k];
        let snr = params.snrs[si];
        let model_seed = sub_seed(params.seed, si as u64, rep as u64);
        let model = gen_linear_model(params.n, params.p, params.s, snr, model_seed)?;
        let mut rows = Vec::new();
        for &lf in &params.l_factors {
            let mut config = TrexConfig {
                l: lf * params.p,
                b: params.b,
                t_max: params.t_max,
                alpha: params.alphas[0],
                law: params.law,
                selector: params.selector,
                master_seed: sub_seed(model_seed, 1, lf as u64),
            };
            config.validate()?;
            let records = run_random_experiments(&model.x, &model.y, &config)?;
            let table = relative_occurrences(&records, params.p, params.t_max)?;
            for &alpha in &params.alphas {
                config.alpha = alpha;
                config.validate()?;
                let cal = calibrate(&table, &config);
                let (fdp, tpp) = fdp_tpp(&cal.selected, &model.active);
                rows.push(FdrRow {
                    alpha,
                    l_factor: lf,
                    snr,
                    replicate: rep,
                    fdp,
                    tpp,
                });
            }
        }
        Ok(rows)
    })?;
    Ok(per_job.into_iter().flatten().collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FdrCell {
    pub alpha: f64,
    pub l_factor: usize,
    pub snr: f64,
    pub replicates: usize,
    pub mean_fdp: f64,
    pub se_fdp: f64,
    pub mean_tpp: f64,
}

/// Mean FDP and TPP per `(alpha, L factor, snr)` cell, in first-seen order.
pub fn fdr_cells(rows: &[FdrRow]) -> Result<Vec<FdrCell>> {
    let mut keys: Vec<(f64, usize, f64)> = Vec::new();
    for r in rows {
        let k = (r.alpha, r.l_factor, r.snr);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(alpha, l_factor, snr)| {
            let sel: Vec<&FdrRow> = rows
                .iter()
                .filter(|r| r.alpha == alpha && r.l_factor == l_factor && r.snr == snr)
                .collect();
            let fdp: Vec<f64> = sel.iter().map(|r| r.fdp).collect();
            let tpp: Vec<f64> = sel.iter().map(|r| r.tpp).collect();
            let (mean_fdp, se_fdp) = mean_se(&fdp)?;
            let (mean_tpp, _) = mean_se(&tpp)?;
            Ok(FdrCell {
                alpha,
                l_factor,
                snr,
                replicates: sel.len(),
                mean_fdp,
                se_fdp,
                mean_tpp,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> FdrParams {
        FdrParams {
            n: 40,
            p: 30,
            s: 3,
            snrs: vec![4.0],
            alphas: vec![0.1, 0.3],
            l_factors: vec![2],
            b: 8,
            t_max: 3,
            replicates: 4,
            law: DummyLaw::Spherical,
            selector: SelectorKind::Lars,
            seed: 3,
        }
    }

    #[test]
    fn grid_shape_and_bounds() {
        let rows = fdr_experiment(&small()).unwrap();
        assert_eq!(rows.len(), 8);
        assert!(rows.iter().all(|r| (0.0..=1.0).contains(&r.fdp) && (0.0..=1.0).contains(&r.tpp)));
        let cells = fdr_cells(&rows).unwrap();
        assert_eq!(cells.len(), 2);
        assert!(cells.iter().all(|c| c.replicates == 4));
        assert_eq!(rows, fdr_experiment(&small()).unwrap());
    }
}
