//! Gaussian dummies scaled to unit expected squared norm against spherical
//! dummies: effect on T-Rex and on the largest dummy correlation.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use vdselect_core::ambient::{dot, norm};
use vdselect_core::rng::seeded;
use vdselect_core::trex::{calibrate_with, relative_occurrences, run_random_experiments, NhgEstimator, TrexConfig};
use vdselect_core::{DummyLaw, SelectorKind};

use super::{par_map, require, sub_seed};
use crate::error::Result;
use crate::generate::gen_linear_model;
use crate::metrics::{eta_bound, fdp_tpp, mean_se};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormInflationParams {
    pub n: usize,
    pub p: usize,
    pub s: usize,
    pub snr: f64,
    pub alphas: Vec<f64>,
    /// Dummy counts at which T-Rex is calibrated over `v` alone.
    pub ts: Vec<usize>,
    pub l_factors: Vec<usize>,
    pub b: usize,
    pub replicates: usize,
    pub selector: SelectorKind,
    pub seed: u64,
    pub ratio_trials: usize,
    /// Dimension of `H` in the max-correlation check.
    pub ratio_m: usize,
    pub ratio_l: usize,
    pub delta: f64,
}

impl Default for NormInflationParams {
    fn default() -> Self {
        Self {
            n: 150,
            p: 300,
            s: 10,
            snr: 1.0,
            alphas: vec![0.05, 0.1, 0.2],
            ts: vec![1, 2, 5, 10],
            l_factors: vec![1, 5],
            b: 20,
            replicates: 50,
            selector: SelectorKind::Lars,
            seed: 1,
            ratio_trials: 2000,
            ratio_m: 300,
            ratio_l: 1000,
            delta: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InflationRow {
    pub law: DummyLaw,
    pub alpha: f64,
    pub t: usize,
    pub l_factor: usize,
    pub replicate: usize,
    pub fdp: f64,
    pub tpp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub replicate: usize,
    /// `M_G / M_S`.
    pub ratio: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormInflationOutput {
    pub rows: Vec<InflationRow>,
    pub ratios: Vec<RatioRow>,
}

const LAWS: [DummyLaw; 2] = [DummyLaw::Spherical, DummyLaw::GaussianUnitNorm];

pub fn norm_inflation_experiment(params: &NormInflationParams) -> Result<NormInflationOutput> {
    require(params.replicates > 0, || "replicates must be positive".into())?;
    require(!params.ts.is_empty() && params.ts.iter().all(|&t| t >= 1), || "dummy counts must be positive".into())?;
    require(!params.alphas.is_empty() && !params.l_factors.is_empty(), || {
        "alpha and L-factor lists must be nonempty".into()
    })?;
    let t_max = params.ts.iter().copied().max().unwrap_or(1);
    let per_rep = par_map(params.replicates, |rep| {
        let model_seed = sub_seed(params.seed, 0, rep as u64);
        let model = gen_linear_model(params.n, params.p, params.s, params.snr, model_seed)?;
        let mut rows = Vec::new();
        for law in LAWS {
            for &lf in &params.l_factors {
                let mut config = TrexConfig {
                    l: lf * params.p,
                    b: params.b,
                    t_max,
                    alpha: params.alphas[0],
                    law,
                    selector: params.selector,
                    master_seed: sub_seed(model_seed, 1, lf as u64),
                };
                config.validate()?;
                let records = run_random_experiments(&model.x, &model.y, &config)?;
                let table = relative_occurrences(&records, params.p, t_max)?;
                for &alpha in &params.alphas {
                    config.alpha = alpha;
                    config.validate()?;
                    for &t in &params.ts {
                        let cal = calibrate_with(&table, &config, &NhgEstimator, [t]);
                        let (fdp, tpp) = fdp_tpp(&cal.selected, &model.active);
                        rows.push(InflationRow {
                            law,
                            alpha,
                            t,
                            l_factor: lf,
                            replicate: rep,
                            fdp,
                            tpp,
                        });
                    }
                }
            }
        }
        Ok(rows)
    })?;
    Ok(NormInflationOutput {
        rows: per_rep.into_iter().flatten().collect(),
        ratios: ratio_trials(params.ratio_m, params.ratio_l, params.delta, params.ratio_trials, sub_seed(params.seed, 2, 0))?,
    })
}

/// Per trial, a fixed unit `r` in `H` (in `m` orthonormal coordinates) and
/// `L` draws `g ~ N(0, I_H / m)`: `M_G = max |<g, r>|` and
/// `M_S = max |<g / |g|, r>|`.
pub fn ratio_trials(m: usize, l: usize, delta: f64, trials: usize, seed: u64) -> Result<Vec<RatioRow>> {
    require(m >= 1 && l >= 1, || "m and L must be positive".into())?;
    let eta = eta_bound(l as f64, delta, m as f64)?;
    let root_m = (m as f64).sqrt();
    par_map(trials, |trial| {
        let mut rng = seeded(sub_seed(seed, 0, trial as u64));
        let mut r: Vec<f64> = (0..m).map(|_| StandardNormal.sample(&mut rng)).collect();
        let rn = norm(&r);
        r.iter_mut().for_each(|v| *v /= rn);
        let mut z = vec![0.0; m];
        let (mut mg, mut ms) = (0.0_f64, 0.0_f64);
        for _ in 0..l {
            z.iter_mut().for_each(|v| *v = StandardNormal.sample(&mut rng));
            let proj = dot(&z, &r).abs();
            mg = mg.max(proj / root_m);
            ms = ms.max(proj / norm(&z));
        }
        Ok(RatioRow {
            replicate: trial,
            ratio: mg / ms,
            eta,
        })
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InflationDelta {
    pub alpha: f64,
    pub t: usize,
    pub l_factor: usize,
    /// Mean FDP under Gaussian dummies minus mean FDP under spherical ones.
    pub delta_fdp: f64,
    pub delta_tpp: f64,
}

/// Gaussian-minus-spherical mean FDP and TPP per `(alpha, T, L factor)`.
pub fn inflation_deltas(rows: &[InflationRow]) -> Result<Vec<InflationDelta>> {
    let mut keys: Vec<(f64, usize, usize)> = Vec::new();
    for r in rows {
        let k = (r.alpha, r.t, r.l_factor);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    let mean_of = |law: DummyLaw, k: (f64, usize, usize), f: fn(&InflationRow) -> f64| -> Result<f64> {
        let v: Vec<f64> = rows
            .iter()
            .filter(|r| r.law == law && (r.alpha, r.t, r.l_factor) == k)
            .map(f)
            .collect();
        Ok(mean_se(&v)?.0)
    };
    keys.into_iter()
        .map(|k| {
            Ok(InflationDelta {
                alpha: k.0,
                t: k.1,
                l_factor: k.2,
                delta_fdp: mean_of(DummyLaw::GaussianUnitNorm, k, |r| r.fdp)? - mean_of(DummyLaw::Spherical, k, |r| r.fdp)?,
                delta_tpp: mean_of(DummyLaw::GaussianUnitNorm, k, |r| r.tpp)? - mean_of(DummyLaw::Spherical, k, |r| r.tpp)?,
            })
        })
        .collect()
}
