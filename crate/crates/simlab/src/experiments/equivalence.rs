//! Virtual against explicit dummies on a fixed `(X, y)`: only the dummy
//! ensemble is resampled across replicates.

use serde::{Deserialize, Serialize};
use vdselect_core::ambient::dot;
use vdselect_core::design::ColumnProvider;
use vdselect_core::selectors::{LarsState, Step};
use vdselect_core::{AmbientSpace, DummyLaw, DummyPool, Stacked};

use super::{par_map, require, sub_seed};
use crate::error::Result;
use crate::generate::{gen_law_dummies, gen_linear_model};
use crate::metrics::{ks_two_sample, order_stats};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceParams {
    pub n: usize,
    pub p: usize,
    pub s: usize,
    pub snr: f64,
    pub l: usize,
    /// Dummy counts at which the residual is inspected.
    pub ts: Vec<usize>,
    /// Order-statistic ranks; rank 0 records the lowest-index unselected
    /// dummy, a draw from the marginal law of `|<d_l, r_T>|`.
    pub ranks: Vec<usize>,
    pub replicates: usize,
    pub law: DummyLaw,
    /// Drive the virtual run from the explicit block of each replicate.
    pub shadow: bool,
    pub seed: u64,
}

impl Default for EquivalenceParams {
    fn default() -> Self {
        Self {
            n: 100,
            p: 200,
            s: 5,
            snr: 1.0,
            l: 1000,
            ts: vec![1, 5],
            ranks: vec![0, 1, 5, 20, 50],
            replicates: 2000,
            law: DummyLaw::Spherical,
            shadow: false,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Vd,
    Ad,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Vd => "vd",
            Method::Ad => "ad",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceRow {
    pub method: Method,
    pub t: usize,
    pub rank: usize,
    pub replicate: usize,
    pub value: f64,
}

/// `(dummy index, |score|)` of the unselected dummies each time the dummy
/// count reaches an entry of `ts`; `None` where the path ended first.
type Trace = Vec<Option<Vec<(usize, f64)>>>;

fn trace<P: ColumnProvider>(
    st: &mut LarsState<'_, P>,
    ts: &[usize],
    scores: impl Fn(&LarsState<'_, P>) -> Result<Vec<(usize, f64)>>,
) -> Result<Trace> {
    let mut out = vec![None; ts.len()];
    let target = ts.iter().copied().max().unwrap_or(0);
    while st.dummies_selected() < target {
        match st.step()? {
            Step::Finished => break,
            Step::Entered(e) if e.is_dummy => {
                for (slot, &t) in out.iter_mut().zip(ts) {
                    if t == st.dummies_selected() {
                        *slot = Some(scores(st)?);
                    }
                }
            }
            Step::Entered(_) => {}
        }
    }
    Ok(out)
}

fn vd_trace<P: ColumnProvider>(x: &P, y: &[f64], pool: DummyPool, ts: &[usize]) -> Result<Trace> {
    let mut st = LarsState::new(x, y, pool)?;
    trace(&mut st, ts, |st| {
        let t = st.residual_coeffs()?;
        Ok(st.pool().dummy_scores(&t)?.into_iter().map(|(l, s)| (l, s.abs())).collect())
    })
}

fn ad_trace<P: ColumnProvider>(x: &P, y: &[f64], d: &[f64], ts: &[usize]) -> Result<Trace> {
    let n = x.n();
    let p = x.p();
    let stacked = Stacked::new(x, d)?;
    let pool = DummyPool::sampled(0, DummyLaw::Spherical, AmbientSpace::new(n)?, 0);
    let mut st = LarsState::with_split(&stacked, p, y, pool)?;
    trace(&mut st, ts, |st| {
        let mut chosen = vec![false; d.len() / n];
        for &(g, _) in st.active() {
            if g >= p {
                chosen[g - p] = true;
            }
        }
        let r = st.residual();
        Ok(d.chunks(n)
            .enumerate()
            .filter(|(l, _)| !chosen[*l])
            .map(|(l, col)| (l, dot(col, r).abs()))
            .collect())
    })
}

fn rows_of(method: Method, replicate: usize, tr: &Trace, ts: &[usize], ranks: &[usize]) -> Result<Vec<EquivalenceRow>> {
    let mut rows = Vec::new();
    for (slot, &t) in tr.iter().zip(ts) {
        let Some(scores) = slot else { continue };
        let values: Vec<f64> = scores.iter().map(|(_, s)| *s).collect();
        for &rank in ranks {
            let value = if rank == 0 {
                match values.first() {
                    Some(v) => *v,
                    None => continue,
                }
            } else {
                order_stats(&values, &[rank])?[0]
            };
            rows.push(EquivalenceRow {
                method,
                t,
                rank,
                replicate,
                value,
            });
        }
    }
    Ok(rows)
}

/// Per replicate: one virtual and one explicit LARS run on the same
/// `(X, y)`, inspected each time the dummy count reaches an entry of `ts`.
pub fn equivalence_experiment(params: &EquivalenceParams) -> Result<Vec<EquivalenceRow>> {
    require(params.replicates > 0, || "replicates must be positive".into())?;
    require(params.l > 0, || "the dummy pool is empty".into())?;
    require(params.ts.iter().all(|&t| t >= 1 && t <= params.l), || {
        format!("dummy counts must lie in 1..={}", params.l)
    })?;
    let model = gen_linear_model(params.n, params.p, params.s, params.snr, sub_seed(params.seed, 0, 0))?;
    let space = AmbientSpace::new(params.n)?;
    let per_rep = par_map(params.replicates, |rep| {
        let d = gen_law_dummies(params.n, params.l, params.law, sub_seed(params.seed, 1, rep as u64))?;
        let pool = if params.shadow {
            DummyPool::shadow(d.clone(), params.l, params.law, space)?
        } else {
            DummyPool::sampled(params.l, params.law, space, sub_seed(params.seed, 2, rep as u64))
        };
        let vd = vd_trace(&model.x, &model.y, pool, &params.ts)?;
        let ad = ad_trace(&model.x, &model.y, &d, &params.ts)?;
        let mut rows = rows_of(Method::Vd, rep, &vd, &params.ts, &params.ranks)?;
        rows.extend(rows_of(Method::Ad, rep, &ad, &params.ts, &params.ranks)?);
        Ok(rows)
    })?;
    Ok(per_rep.into_iter().flatten().collect())
}

/// Values of one `(method, T, rank)` cell in replicate order.
fn cell(rows: &[EquivalenceRow], method: Method, t: usize, rank: usize) -> Vec<f64> {
    rows.iter()
        .filter(|r| r.method == method && r.t == t && r.rank == rank)
        .map(|r| r.value)
        .collect()
}

fn cells(rows: &[EquivalenceRow]) -> Vec<(usize, usize)> {
    let mut keys: Vec<(usize, usize)> = rows.iter().map(|r| (r.t, r.rank)).collect();
    keys.sort_unstable();
    keys.dedup();
    keys
}

/// Two-sample KS distance between the virtual and explicit samples of each
/// `(T, rank)` cell.
pub fn equivalence_ks(rows: &[EquivalenceRow]) -> Result<Vec<(usize, usize, f64)>> {
    cells(rows)
        .into_iter()
        .map(|(t, rank)| {
            let d = ks_two_sample(&cell(rows, Method::Vd, t, rank), &cell(rows, Method::Ad, t, rank))?;
            Ok((t, rank, d))
        })
        .collect()
}

/// Pointwise 1%, 50% and 99% quantiles of one cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Envelope {
    pub method: Method,
    pub t: usize,
    pub rank: usize,
    pub q01: f64,
    pub median: f64,
    pub q99: f64,
}

pub fn envelopes(rows: &[EquivalenceRow]) -> Vec<Envelope> {
    let mut out = Vec::new();
    for (t, rank) in cells(rows) {
        for method in [Method::Vd, Method::Ad] {
            let mut v = cell(rows, method, t, rank);
            if v.is_empty() {
                continue;
            }
            v.sort_by(f64::total_cmp);
            let q = |f: f64| v[((v.len() - 1) as f64 * f).round() as usize];
            out.push(Envelope {
                method,
                t,
                rank,
                q01: q(0.01),
                median: q(0.5),
                q99: q(0.99),
            });
        }
    }
    out
}
