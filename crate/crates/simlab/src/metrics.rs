//! Distances between samples and distributions, order statistics and
//! selection scores.

use statrs::distribution::{Continuous, ContinuousCDF, Normal};
use vdselect_core::DummyPool;

use crate::error::{Result, SimError};

fn sorted(sample: &[f64]) -> Result<Vec<f64>> {
    if sample.is_empty() {
        return Err(SimError::EmptySample);
    }
    if sample.iter().any(|x| x.is_nan()) {
        return Err(SimError::InvalidParameter("sample contains NaN".into()));
    }
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    Ok(s)
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// Two-sample Kolmogorov-Smirnov statistic `sup |F_a - F_b|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    let a = sorted(a)?;
    let b = sorted(b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0_f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// One-sample Kolmogorov-Smirnov statistic against a continuous CDF.
pub fn ks_one_sample(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    let s = sorted(sample)?;
    let n = s.len() as f64;
    let mut d = 0.0_f64;
    for (i, &x) in s.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

/// One-sample KS statistic against `N(0, 1)`.
pub fn ks_to_normal(sample: &[f64]) -> Result<f64> {
    let z = std_normal();
    ks_one_sample(sample, |x| z.cdf(x))
}

/// Wasserstein-1 distance between two empirical distributions, computed
/// exactly as the integral of `|F_a - F_b|`. For equal sizes this is the
/// mean absolute difference of the sorted samples.
pub fn wasserstein1(a: &[f64], b: &[f64]) -> Result<f64> {
    let a = sorted(a)?;
    let b = sorted(b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut prev: Option<f64> = None;
    let mut total = 0.0;
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(&u), Some(&v)) => u.min(v),
            (Some(&u), None) => u,
            (None, Some(&v)) => v,
            (None, None) => unreachable!(),
        };
        if let Some(p) = prev {
            total += (i as f64 / na - j as f64 / nb).abs() * (x - p);
        }
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        prev = Some(x);
    }
    Ok(total)
}

/// Wasserstein-1 distance from an empirical distribution to `N(0, 1)`,
/// integrated in closed form between sample points.
pub fn wasserstein1_to_normal(sample: &[f64]) -> Result<f64> {
    let s = sorted(sample)?;
    let z = std_normal();
    // Antiderivative of the normal CDF.
    let g = |x: f64| x * z.cdf(x) + z.pdf(x);
    let n = s.len() as f64;
    let first = s[0];
    let last = s[s.len() - 1];
    let mut total = g(first) + z.pdf(last) - last * z.sf(last);
    for (i, w) in s.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let c = (i + 1) as f64 / n;
        let (fa, fb) = (z.cdf(a), z.cdf(b));
        total += if c <= fa {
            g(b) - g(a) - c * (b - a)
        } else if c >= fb {
            c * (b - a) - (g(b) - g(a))
        } else {
            let q = z.inverse_cdf(c).clamp(a, b);
            (c * (q - a) - (g(q) - g(a))) + (g(b) - g(q) - c * (b - q))
        };
    }
    Ok(total)
}

/// The `rank`-th largest entries of `values` (rank 1 is the maximum).
pub fn order_stats(values: &[f64], ranks: &[usize]) -> Result<Vec<f64>> {
    let mut buf = values.to_vec();
    ranks
        .iter()
        .map(|&rank| {
            if rank == 0 || rank > buf.len() {
                return Err(SimError::RankOutOfRange {
                    rank,
                    available: buf.len(),
                });
            }
            let (_, v, _) = buf.select_nth_unstable_by(rank - 1, |a, b| b.total_cmp(a));
            Ok(*v)
        })
        .collect()
}

/// Order statistics of `|<d_l, r>|` over the unselected dummies of `pool`,
/// where `t` holds the basis coefficients of the residual `r`.
pub fn dummy_corr_order_stats(pool: &DummyPool, t: &[f64], ranks: &[usize]) -> Result<Vec<f64>> {
    let scores: Vec<f64> = pool.dummy_scores(t)?.into_iter().map(|(_, s)| s.abs()).collect();
    order_stats(&scores, ranks)
}

/// False discovery and true positive proportions of `selected` against the
/// true support `active`.
pub fn fdp_tpp(selected: &[usize], active: &[usize]) -> (f64, f64) {
    let hits = selected.iter().filter(|j| active.contains(j)).count();
    let false_hits = selected.len() - hits;
    (
        false_hits as f64 / selected.len().max(1) as f64,
        hits as f64 / active.len().max(1) as f64,
    )
}

/// Norm-inflation margin `sqrt(2 log(L/delta) / m) + log(L/delta) / m`.
pub fn eta_bound(l: f64, delta: f64, m: f64) -> Result<f64> {
    if !(l >= 1.0) || !(delta > 0.0 && delta < 1.0) || !(m >= 1.0) {
        return Err(SimError::InvalidParameter(format!(
            "eta_bound needs L >= 1, delta in (0, 1), m >= 1 (got L = {l}, delta = {delta}, m = {m})"
        )));
    }
    let t = (l / delta).ln();
    Ok((2.0 * t / m).sqrt() + t / m)
}

/// Largest absolute coordinate of a direction.
pub fn deloc_proxy(e: &[f64]) -> f64 {
    e.iter().fold(0.0_f64, |a, x| a.max(x.abs()))
}

pub fn median(values: &[f64]) -> Result<f64> {
    let s = sorted(values)?;
    let k = s.len();
    Ok(if k % 2 == 1 { s[k / 2] } else { 0.5 * (s[k / 2 - 1] + s[k / 2]) })
}

/// Sample mean and its standard error.
pub fn mean_se(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(SimError::EmptySample);
    }
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return Ok((mean, 0.0));
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    Ok((mean, (var / k).sqrt()))
}
