//! Fresh projections of non-Gaussian dummies onto the directions revealed
//! by a forward path, compared with `N(0, 1)`.
//!
//! Dummies carry the `sqrt(n)` normalization, so a fresh projection
//! `<d_l, e_k>` is standard normal when the raw coordinates are Gaussian.

use serde::{Deserialize, Serialize};
use vdselect_core::ambient::{dot, norm};
use vdselect_core::rng::StreamKey;
use vdselect_core::selectors::{LarsState, Step};
use vdselect_core::{AmbientSpace, DenseColumns, DummyLaw, DummyPool};

use super::{par_map, require, sub_seed};
use crate::error::{Result, SimError};
use crate::generate::{gen_iid_dummy_matrix, gen_linear_model, unit_iid_column, CoordinateLaw, DummyScale, MAX_ATTEMPTS, TOL_CONSTANT};
use crate::metrics::{deloc_proxy, ks_to_normal, mean_se, median, wasserstein1_to_normal};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniversalityParams {
    pub laws: Vec<CoordinateLaw>,
    pub ns: Vec<usize>,
    /// Steps `k` whose fresh direction `e_k` is probed; `e_1 = y / |y|`.
    pub ks: Vec<usize>,
    pub p: usize,
    pub s: usize,
    pub snr: f64,
    pub l: usize,
    pub ensembles: usize,
    pub seed: u64,
}

impl Default for UniversalityParams {
    fn default() -> Self {
        Self {
            laws: CoordinateLaw::standard_set(),
            ns: vec![50, 500, 5000],
            ks: vec![1],
            p: 100,
            s: 5,
            snr: 1.0,
            l: 2500,
            ensembles: 2000,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniversalityRow {
    pub law: String,
    pub n: usize,
    pub k: usize,
    pub replicate: usize,
    pub ks: f64,
    pub w1: f64,
    pub deloc: f64,
}

/// Partial sums of `e` over every bit pattern of each run of 8 coordinates.
struct ByteTable {
    n: usize,
    sums: Vec<f64>,
    total: f64,
}

impl ByteTable {
    fn new(e: &[f64]) -> Self {
        let blocks = e.len().div_ceil(8);
        let mut sums = vec![0.0; blocks * 256];
        for b in 0..blocks {
            let t = &mut sums[b * 256..(b + 1) * 256];
            for byte in 1..256usize {
                let low = byte.trailing_zeros() as usize;
                let coord = 8 * b + low;
                let v = if coord < e.len() { e[coord] } else { 0.0 };
                t[byte] = t[byte & (byte - 1)] + v;
            }
        }
        Self {
            n: e.len(),
            sums,
            total: e.iter().sum(),
        }
    }

    /// `(<delta, e>, |I_H delta|)` for the Rademacher vector whose
    /// coordinate `i` is `+1` exactly when bit `i % 64` of word `i / 64` is
    /// set.
    fn project(&self, words: &[u64]) -> (f64, f64) {
        let n = self.n;
        let mut set = 0.0;
        let mut ones = 0u64;
        for (wi, &w) in words.iter().enumerate() {
            let valid = (n - 64 * wi).min(64);
            let w = if valid == 64 { w } else { w & ((1u64 << valid) - 1) };
            ones += u64::from(w.count_ones());
            for byte in 0..valid.div_ceil(8) {
                let b = 8 * wi + byte;
                set += self.sums[b * 256 + ((w >> (8 * byte)) & 0xff) as usize];
            }
        }
        let sum_delta = 2.0 * ones as f64 - n as f64;
        let centered = (n as f64 - sum_delta * sum_delta / n as f64).max(0.0).sqrt();
        (2.0 * set - self.total, centered)
    }
}

/// `sqrt(n) <d_l, e>` for `l < count`, streaming the dummies column by
/// column. `e` must be a centered unit vector.
fn step1_projections(e: &[f64], law: CoordinateLaw, count: usize, seed: u64) -> Result<Vec<f64>> {
    let n = e.len();
    let root_n = (n as f64).sqrt();
    let key = StreamKey::from_seed(seed);
    let mut out = Vec::with_capacity(count);
    if law == CoordinateLaw::Rademacher {
        let table = ByteTable::new(e);
        let mut words = vec![0u64; n.div_ceil(64)];
        for l in 0..count {
            let mut value = None;
            for attempt in 0..MAX_ATTEMPTS {
                let mut rng = key.substream(l as u64, attempt);
                words.iter_mut().for_each(|w| *w = rand::RngCore::next_u64(&mut rng));
                let (proj, centered) = table.project(&words);
                if centered > TOL_CONSTANT * root_n {
                    value = Some(root_n * proj / centered);
                    break;
                }
            }
            out.push(value.ok_or_else(|| SimError::InvalidParameter(format!("dummy column {l} is constant")))?);
        }
    } else {
        let mut col = vec![0.0; n];
        for l in 0..count {
            unit_iid_column(&key, l, law, &mut col)?;
            out.push(root_n * dot(&col, e));
        }
    }
    Ok(out)
}

/// Scaled fresh projections and delocalization for each requested step,
/// from an explicit unit-norm block driving a shadow-mode LARS path.
fn path_projections(
    x: &DenseColumns,
    y: &[f64],
    law: CoordinateLaw,
    l: usize,
    ks: &[usize],
    seed: u64,
) -> Result<Vec<Option<(Vec<f64>, f64)>>> {
    let n = y.len();
    let space = AmbientSpace::new(n)?;
    let d = gen_iid_dummy_matrix(n, l, law, seed, DummyScale::Unit)?;
    let pool = DummyPool::shadow(d, l, DummyLaw::Spherical, space)?;
    let mut st = LarsState::new(x, y, pool)?;
    let root_n = (n as f64).sqrt();
    let mut out = Vec::with_capacity(ks.len());
    for &k in ks {
        while st.basis().len() < k {
            if st.step()? == Step::Finished {
                break;
            }
        }
        if st.basis().len() < k {
            out.push(None);
            continue;
        }
        let row = st.pool().table().row(k - 1);
        let values: Vec<f64> = st.pool().unselected().map(|j| root_n * row[j]).collect();
        out.push(Some((values, deloc_proxy(st.basis().direction(k - 1)))));
    }
    Ok(out)
}

/// One row per `(law, n, k, ensemble)`. The model depends on `n` only, so
/// every law sees the same `(X, y)` at a given `n`.
pub fn universality_experiment(params: &UniversalityParams) -> Result<Vec<UniversalityRow>> {
    require(params.ensembles > 0 && params.l > 0, || "ensembles and L must be positive".into())?;
    require(params.ks.iter().all(|&k| k >= 1), || "steps are numbered from 1".into())?;
    for law in &params.laws {
        law.validate()?;
    }
    let mut ks = params.ks.clone();
    ks.sort_unstable();
    ks.dedup();
    let mut rows = Vec::new();
    for (ni, &n) in params.ns.iter().enumerate() {
        let model = gen_linear_model(n, params.p, params.s, params.snr, sub_seed(params.seed, 0, ni as u64))?;
        let e1: Vec<f64> = {
            let r = norm(&model.y);
            model.y.iter().map(|v| v / r).collect()
        };
        for (li, &law) in params.laws.iter().enumerate() {
            let law_seed = sub_seed(params.seed, 1 + li as u64, ni as u64);
            let per_ens = par_map(params.ensembles, |ens| {
                let seed = sub_seed(law_seed, 0, ens as u64);
                let probes = if ks == [1] {
                    vec![Some((step1_projections(&e1, law, params.l, seed)?, deloc_proxy(&e1)))]
                } else {
                    path_projections(&model.x, &model.y, law, params.l, &ks, seed)?
                };
                let mut out = Vec::new();
                for (&k, probe) in ks.iter().zip(probes) {
                    let Some((values, deloc)) = probe else { continue };
                    if values.is_empty() {
                        continue;
                    }
                    out.push(UniversalityRow {
                        law: law.name(),
                        n,
                        k,
                        replicate: ens,
                        ks: ks_to_normal(&values)?,
                        w1: wasserstein1_to_normal(&values)?,
                        deloc,
                    });
                }
                Ok(out)
            })?;
            rows.extend(per_ens.into_iter().flatten());
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniversalityCell {
    pub law: String,
    pub n: usize,
    pub k: usize,
    pub ensembles: usize,
    pub median_ks: f64,
    /// Normal-approximation standard error of the median KS distance.
    pub se_median_ks: f64,
    pub median_w1: f64,
    pub median_deloc: f64,
}

/// Medians per `(law, n, k)`, in first-seen order.
pub fn universality_medians(rows: &[UniversalityRow]) -> Result<Vec<UniversalityCell>> {
    let mut keys: Vec<(String, usize, usize)> = Vec::new();
    for r in rows {
        let key = (r.law.clone(), r.n, r.k);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(law, n, k)| {
            let sel: Vec<&UniversalityRow> = rows.iter().filter(|r| r.law == law && r.n == n && r.k == k).collect();
            let ks: Vec<f64> = sel.iter().map(|r| r.ks).collect();
            let w1: Vec<f64> = sel.iter().map(|r| r.w1).collect();
            let deloc: Vec<f64> = sel.iter().map(|r| r.deloc).collect();
            let (_, se_mean) = mean_se(&ks)?;
            Ok(UniversalityCell {
                ensembles: sel.len(),
                median_ks: median(&ks)?,
                se_median_ks: (std::f64::consts::PI / 2.0).sqrt() * se_mean,
                median_w1: median(&w1)?,
                median_deloc: median(&deloc)?,
                law,
                n,
                k,
            })
        })
        .collect()
}
