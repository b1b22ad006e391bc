//! Synthetic linear models and explicit dummy blocks.

use rand::seq::index::sample;
use rand::{Rng, RngCore};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, LogNormal, Pareto, StandardNormal, StudentT};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use vdselect_core::ambient::{center_project, norm};
use vdselect_core::rng::{seeded, StreamKey};
use vdselect_core::{AmbientSpace, DenseColumns, DummyLaw};

use crate::error::{Result, SimError};

/// Law of the raw i.i.d. coordinates of a non-Gaussian dummy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CoordinateLaw {
    Gaussian,
    Rademacher,
    Exponential,
    StudentT(f64),
    LogNormal(f64),
    /// Pareto with unit scale and the given shape.
    Pareto(f64),
}

impl CoordinateLaw {
    /// The six laws of the universality study.
    pub fn standard_set() -> Vec<CoordinateLaw> {
        vec![
            CoordinateLaw::Gaussian,
            CoordinateLaw::Rademacher,
            CoordinateLaw::Exponential,
            CoordinateLaw::StudentT(3.0),
            CoordinateLaw::LogNormal(1.0),
            CoordinateLaw::Pareto(3.0),
        ]
    }

    pub fn name(&self) -> String {
        match *self {
            CoordinateLaw::Gaussian => "gaussian".into(),
            CoordinateLaw::Rademacher => "rademacher".into(),
            CoordinateLaw::Exponential => "exponential".into(),
            CoordinateLaw::StudentT(nu) => format!("t{nu}"),
            CoordinateLaw::LogNormal(s) if s == 1.0 => "lognormal".into(),
            CoordinateLaw::LogNormal(s) => format!("lognormal:{s}"),
            CoordinateLaw::Pareto(a) if a == 3.0 => "pareto".into(),
            CoordinateLaw::Pareto(a) => format!("pareto:{a}"),
        }
    }

    /// Analytic mean and variance of the raw law.
    pub fn moments(&self) -> (f64, f64) {
        match *self {
            CoordinateLaw::Gaussian | CoordinateLaw::Rademacher => (0.0, 1.0),
            CoordinateLaw::Exponential => (1.0, 1.0),
            CoordinateLaw::StudentT(nu) => (0.0, nu / (nu - 2.0)),
            CoordinateLaw::LogNormal(s) => {
                let s2 = s * s;
                ((s2 / 2.0).exp(), (s2.exp() - 1.0) * s2.exp())
            }
            CoordinateLaw::Pareto(a) => (a / (a - 1.0), a / ((a - 1.0).powi(2) * (a - 2.0))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            CoordinateLaw::StudentT(nu) => nu > 2.0,
            CoordinateLaw::LogNormal(s) => s > 0.0 && s.is_finite(),
            CoordinateLaw::Pareto(a) => a > 2.0,
            _ => true,
        };
        if ok {
            Ok(())
        } else {
            Err(SimError::InvalidParameter(format!(
                "coordinate law {} has no finite variance",
                self.name()
            )))
        }
    }

    /// Fills `out` with raw draws standardized to mean 0 and variance 1.
    pub fn fill_standardized(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) -> Result<()> {
        self.validate()?;
        let (mean, var) = self.moments();
        let sd = var.sqrt();
        match *self {
            CoordinateLaw::Gaussian => out.iter_mut().for_each(|x| *x = StandardNormal.sample(rng)),
            CoordinateLaw::Rademacher => {
                // Coordinate i of each run of 64 is bit i of one word.
                for chunk in out.chunks_mut(64) {
                    let w = rng.next_u64();
                    for (i, x) in chunk.iter_mut().enumerate() {
                        *x = if (w >> i) & 1 == 1 { 1.0 } else { -1.0 };
                    }
                }
            }
            CoordinateLaw::Exponential => out.iter_mut().for_each(|x| *x = Exp1.sample(rng)),
            CoordinateLaw::StudentT(nu) => {
                let d = StudentT::new(nu).map_err(|e| SimError::InvalidParameter(e.to_string()))?;
                out.iter_mut().for_each(|x| *x = d.sample(rng));
            }
            CoordinateLaw::LogNormal(s) => {
                let d = LogNormal::new(0.0, s).map_err(|e| SimError::InvalidParameter(e.to_string()))?;
                out.iter_mut().for_each(|x| *x = d.sample(rng));
            }
            CoordinateLaw::Pareto(a) => {
                let d = Pareto::new(1.0, a).map_err(|e| SimError::InvalidParameter(e.to_string()))?;
                out.iter_mut().for_each(|x| *x = d.sample(rng));
            }
        }
        out.iter_mut().for_each(|x| *x = (*x - mean) / sd);
        Ok(())
    }
}

impl std::str::FromStr for CoordinateLaw {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || SimError::InvalidParameter(format!("unknown coordinate law '{s}'"));
        let param = |v: &str| v.parse::<f64>().map_err(|_| bad());
        let law = match s {
            "gaussian" => CoordinateLaw::Gaussian,
            "rademacher" => CoordinateLaw::Rademacher,
            "exponential" => CoordinateLaw::Exponential,
            "lognormal" => CoordinateLaw::LogNormal(1.0),
            "pareto" => CoordinateLaw::Pareto(3.0),
            _ => {
                if let Some(v) = s.strip_prefix("lognormal:") {
                    CoordinateLaw::LogNormal(param(v)?)
                } else if let Some(v) = s.strip_prefix("pareto:") {
                    CoordinateLaw::Pareto(param(v)?)
                } else if let Some(v) = s.strip_prefix('t') {
                    CoordinateLaw::StudentT(param(v)?)
                } else {
                    return Err(bad());
                }
            }
        };
        law.validate()?;
        Ok(law)
    }
}

/// Column scale of an i.i.d. dummy block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DummyScale {
    /// `I_H d / (|I_H d| / sqrt(n))`: norm `sqrt(n)`.
    RootN,
    /// Centered and scaled to unit norm, as real columns are.
    Unit,
}

/// A linear model `y = X beta + eps` with a standardized design.
#[derive(Debug, Clone)]
pub struct ModelInstance {
    pub x: DenseColumns,
    pub y: Vec<f64>,
    pub beta: Vec<f64>,
    /// True support, ascending.
    pub active: Vec<usize>,
    pub sigma: f64,
}

impl ModelInstance {
    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.beta.len()
    }
}

/// Gaussian design with standardized columns, `s` coefficients equal to
/// `+-1` on a uniformly drawn support, and noise scaled so that
/// `|X beta|^2 / (n sigma^2) = snr`.
pub fn gen_linear_model(n: usize, p: usize, s: usize, snr: f64, seed: u64) -> Result<ModelInstance> {
    if s > p {
        return Err(SimError::InvalidParameter(format!("support size {s} exceeds p = {p}")));
    }
    if !(snr > 0.0 && snr.is_finite()) {
        return Err(SimError::InvalidParameter(format!("snr must be positive, got {snr}")));
    }
    let space = AmbientSpace::new(n)?;
    let mut rng = seeded(seed);
    let raw: Vec<f64> = (0..n * p).map(|_| StandardNormal.sample(&mut rng)).collect();
    let x = DenseColumns::standardized(space, p, &raw)?;

    let mut active = sample(&mut rng, p, s).into_vec();
    active.sort_unstable();
    let mut beta = vec![0.0; p];
    for &j in &active {
        beta[j] = if rng.random::<bool>() { 1.0 } else { -1.0 };
    }
    let mut signal = vec![0.0; n];
    for &j in &active {
        let col = &x.as_slice()[j * n..(j + 1) * n];
        signal.iter_mut().zip(col).for_each(|(a, c)| *a += beta[j] * c);
    }
    let signal_norm = norm(&signal);
    let sigma = if signal_norm > 0.0 {
        signal_norm / (n as f64 * snr).sqrt()
    } else {
        1.0
    };
    let noisy: Vec<f64> = signal
        .iter()
        .map(|a| {
            let e: f64 = StandardNormal.sample(&mut rng);
            a + sigma * e
        })
        .collect();
    let y = center_project(&noisy, &space)?.into_vec();
    Ok(ModelInstance {
        x,
        y,
        beta,
        active,
        sigma,
    })
}

/// Columns whose centered norm falls below this multiple of `sqrt(n)` are
/// redrawn.
pub(crate) const TOL_CONSTANT: f64 = 1e-12;

/// Attempts per column before a constant draw is reported.
pub(crate) const MAX_ATTEMPTS: u64 = 16;

/// Redraws a column until centering leaves a nonzero vector. Attempt `a` of
/// column `c` reads substream `(c, a)`.
fn centered_column(key: &StreamKey, column: usize, fill: impl Fn(&mut ChaCha8Rng, &mut [f64]) -> Result<()>, out: &mut [f64]) -> Result<f64> {
    let n = out.len() as f64;
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = key.substream(column as u64, attempt);
        fill(&mut rng, out)?;
        let mean = out.iter().sum::<f64>() / n;
        out.iter_mut().for_each(|x| *x -= mean);
        let nrm = norm(out);
        if nrm > TOL_CONSTANT * n.sqrt() {
            return Ok(nrm);
        }
    }
    Err(SimError::InvalidParameter(format!("dummy column {column} is constant")))
}

/// Column `l` of the unit-scaled i.i.d. block for `(law, key)`, written
/// into `col`.
pub(crate) fn unit_iid_column(key: &StreamKey, l: usize, law: CoordinateLaw, col: &mut [f64]) -> Result<()> {
    let nrm = centered_column(key, l, |rng, buf| law.fill_standardized(rng, buf), col)?;
    col.iter_mut().for_each(|x| *x /= nrm);
    Ok(())
}

/// `n x L` column-major block of dummies with i.i.d. raw coordinates from
/// `law`, centered and scaled per `scale`. Column `l` depends only on
/// `(seed, l)`.
pub fn gen_iid_dummy_matrix(n: usize, l: usize, law: CoordinateLaw, seed: u64, scale: DummyScale) -> Result<Vec<f64>> {
    AmbientSpace::new(n)?;
    law.validate()?;
    let key = StreamKey::from_seed(seed);
    let mut out = vec![0.0; n * l];
    out.par_chunks_mut(n.max(1)).enumerate().try_for_each(|(c, col)| {
        let nrm = centered_column(&key, c, |rng, buf| law.fill_standardized(rng, buf), col)?;
        let target = match scale {
            DummyScale::RootN => (n as f64).sqrt(),
            DummyScale::Unit => 1.0,
        };
        col.iter_mut().for_each(|x| *x *= target / nrm);
        Ok::<(), SimError>(())
    })?;
    Ok(out)
}

/// `n x L` column-major block drawn from a dummy law, for explicitly
/// augmented runs: spherical columns have unit norm, `GaussianUnitProj`
/// columns are `I_H g` and `GaussianUnitNorm` columns `I_H g / sqrt(m)`.
pub fn gen_law_dummies(n: usize, l: usize, law: DummyLaw, seed: u64) -> Result<Vec<f64>> {
    let space = AmbientSpace::new(n)?;
    let key = StreamKey::from_seed(seed);
    let mut out = vec![0.0; n * l];
    let gaussian = |rng: &mut ChaCha8Rng, buf: &mut [f64]| {
        buf.iter_mut().for_each(|x| *x = StandardNormal.sample(rng));
        Ok(())
    };
    out.par_chunks_mut(n).enumerate().try_for_each(|(c, col)| {
        let nrm = centered_column(&key, c, gaussian, col)?;
        let factor = match law {
            DummyLaw::Spherical => 1.0 / nrm,
            DummyLaw::GaussianUnitProj => 1.0,
            DummyLaw::GaussianUnitNorm => 1.0 / (space.m() as f64).sqrt(),
        };
        col.iter_mut().for_each(|x| *x *= factor);
        Ok::<(), SimError>(())
    })?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use vdselect_core::ambient::dot;

    #[test]
    fn model_has_exact_snr_and_support() {
        let m = gen_linear_model(60, 25, 4, 2.5, 11).unwrap();
        assert_eq!(m.active.len(), 4);
        for (j, b) in m.beta.iter().enumerate() {
            assert_eq!(*b != 0.0, m.active.contains(&j));
            assert!(*b == 0.0 || b.abs() == 1.0);
        }
        let mut signal = vec![0.0; 60];
        for &j in &m.active {
            for i in 0..60 {
                signal[i] += m.beta[j] * m.x.as_slice()[j * 60 + i];
            }
        }
        let snr = dot(&signal, &signal) / (60.0 * m.sigma * m.sigma);
        assert_abs_diff_eq!(snr, 2.5, epsilon = 1e-12);
        assert!(m.y.iter().sum::<f64>().abs() < 1e-10);
    }

    #[test]
    fn null_model_and_determinism() {
        let m = gen_linear_model(30, 10, 0, 1.0, 4).unwrap();
        assert!(m.active.is_empty() && m.beta.iter().all(|b| *b == 0.0));
        assert!(norm(&m.y) > 0.0);
        let a = gen_linear_model(30, 10, 3, 1.0, 9).unwrap();
        let b = gen_linear_model(30, 10, 3, 1.0, 9).unwrap();
        assert_eq!(a.y, b.y);
        assert_eq!(a.x, b.x);
        assert!(gen_linear_model(30, 10, 11, 1.0, 9).is_err());
        assert!(gen_linear_model(2, 10, 1, 1.0, 9).is_err());
    }

    #[test]
    fn law_moments_and_parsing() {
        assert_eq!(CoordinateLaw::Pareto(3.0).moments(), (1.5, 0.75));
        let (mu, var) = CoordinateLaw::LogNormal(1.0).moments();
        assert_abs_diff_eq!(mu, 0.5_f64.exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(var, (1.0_f64.exp() - 1.0) * 1.0_f64.exp(), epsilon = 1e-15);
        assert_eq!(CoordinateLaw::StudentT(3.0).moments(), (0.0, 3.0));
        for law in CoordinateLaw::standard_set() {
            assert_eq!(law.name().parse::<CoordinateLaw>().unwrap(), law);
        }
        assert!("t2".parse::<CoordinateLaw>().is_err());
        assert!("cauchy".parse::<CoordinateLaw>().is_err());
    }

    #[test]
    fn standardized_draws_have_unit_moments() {
        for law in CoordinateLaw::standard_set() {
            let mut rng = seeded(5);
            let mut buf = vec![0.0; 400_000];
            law.fill_standardized(&mut rng, &mut buf).unwrap();
            let k = buf.len() as f64;
            let mean = buf.iter().sum::<f64>() / k;
            let var = buf.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / k;
            // Heavy tails make the variance estimate noisy for t3 and pareto.
            assert!(mean.abs() < 0.02, "{} mean {mean}", law.name());
            assert!((var - 1.0).abs() < 0.25, "{} var {var}", law.name());
        }
    }

    #[test]
    fn rademacher_columns_have_root_n_norm() {
        let n = 40;
        let d = gen_iid_dummy_matrix(n, 30, CoordinateLaw::Rademacher, 3, DummyScale::RootN).unwrap();
        for col in d.chunks(n) {
            assert_abs_diff_eq!(norm(col), (n as f64).sqrt(), epsilon = 1e-10);
            assert!(col.iter().sum::<f64>().abs() < 1e-10);
        }
        let u = gen_iid_dummy_matrix(n, 30, CoordinateLaw::Exponential, 3, DummyScale::Unit).unwrap();
        for col in u.chunks(n) {
            assert_abs_diff_eq!(norm(col), 1.0, epsilon = 1e-12);
        }
        let again = gen_iid_dummy_matrix(n, 30, CoordinateLaw::Rademacher, 3, DummyScale::RootN).unwrap();
        assert_eq!(d, again);
    }

    #[test]
    fn law_dummy_scales() {
        let n = 25;
        let s = gen_law_dummies(n, 10, DummyLaw::Spherical, 1).unwrap();
        s.chunks(n).for_each(|c| assert_abs_diff_eq!(norm(c), 1.0, epsilon = 1e-12));
        let g = gen_law_dummies(n, 10, DummyLaw::GaussianUnitProj, 1).unwrap();
        let h = gen_law_dummies(n, 10, DummyLaw::GaussianUnitNorm, 1).unwrap();
        for (a, b) in g.iter().zip(&h) {
            assert_abs_diff_eq!(a / 24.0_f64.sqrt(), *b, epsilon = 1e-15);
        }
        for (a, c) in g.chunks(n).zip(s.chunks(n)) {
            let r = norm(a);
            a.iter().zip(c).for_each(|(x, y)| assert_abs_diff_eq!(x / r, *y, epsilon = 1e-14));
        }
    }
}
