//! The virtual dummy pool.
//!
//! A pool stands in for an `n x L` block of dummy predictors drawn i.i.d.
//! from a rotationally invariant law on `H`. Instead of the block it keeps,
//! for every dummy, its coefficients on the revealed basis (`alpha[i][l] =
//! <d_l, e_i>`). A new row is drawn whenever the basis grows, and a dummy is
//! only completed to a full vector once a selector picks it.
//!
//! For the spherical law the coefficients come from adaptive stick-breaking:
//! on coordinate `i < m` the squared coefficient takes a `Beta(1/2, (m-i)/2)`
//! share of the remaining squared radius, the last coordinate takes what is
//! left. Signs are fair coins drawn right after the magnitude.
//!
//! In shadow mode the pool holds an explicit block and computes the same
//! quantities from it. That mode couples a virtual run to an explicitly
//! augmented one draw for draw and is how the selector tests check the
//! bookkeeping.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::ambient::{axpy, dot, norm, AmbientSpace, OrthonormalBasis, TOL_NORM};
use crate::error::{Result, VdError};
use crate::rng::{StreamKey, REALIZE_SLOT};

/// Base law of the dummy columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DummyLaw {
    /// Uniform on the unit sphere of `H`.
    Spherical,
    /// `N(0, I_H)`: fresh projections are standard normal.
    #[serde(rename = "gaussian-proj")]
    GaussianUnitProj,
    /// `N(0, I_H / m)`: unit expected squared norm.
    #[serde(rename = "gaussian-norm")]
    GaussianUnitNorm,
}

impl DummyLaw {
    pub fn name(&self) -> &'static str {
        match self {
            DummyLaw::Spherical => "spherical",
            DummyLaw::GaussianUnitProj => "gaussian-proj",
            DummyLaw::GaussianUnitNorm => "gaussian-norm",
        }
    }
}

impl std::str::FromStr for DummyLaw {
    type Err = VdError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spherical" => Ok(DummyLaw::Spherical),
            "gaussian-proj" => Ok(DummyLaw::GaussianUnitProj),
            "gaussian-norm" => Ok(DummyLaw::GaussianUnitNorm),
            other => Err(VdError::InvalidParameter(format!("unknown dummy law '{other}'"))),
        }
    }
}

/// Remaining squared radius of one spherical dummy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StickState {
    pub r2: f64,
    pub revealed: usize,
}

impl Default for StickState {
    fn default() -> Self {
        Self { r2: 1.0, revealed: 0 }
    }
}

/// Revealed coefficients, one row per basis direction. Entries for dummies
/// that were already realized when a row was drawn are zero and unused.
#[derive(Debug, Clone, Default)]
pub struct ProjectionTable {
    rows: Vec<Vec<f64>>,
}

impl ProjectionTable {
    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, l: usize) -> f64 {
        self.rows[i][l]
    }

    /// Coefficients of dummy `l` on the first `rows()` directions.
    pub fn column(&self, l: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[l]).collect()
    }

    fn heap_bytes(&self) -> usize {
        self.rows.capacity() * std::mem::size_of::<Vec<f64>>()
            + self.rows.iter().map(|r| r.capacity() * 8).sum::<usize>()
    }
}

/// Selection times `tau_l` (`None` while unselected).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SelectionTimes {
    tau: Vec<Option<usize>>,
}

impl SelectionTimes {
    pub fn get(&self, l: usize) -> Option<usize> {
        self.tau[l]
    }

    pub fn is_selected(&self, l: usize) -> bool {
        self.tau[l].is_some()
    }

    pub fn as_slice(&self) -> &[Option<usize>] {
        &self.tau
    }
}

/// Where the coefficients come from.
#[derive(Debug, Clone)]
pub enum PoolMode {
    /// Exact sequential sampling; nothing of size `n x L` is ever stored.
    Sampled,
    /// Explicit columns (`n x L`, column-major) read through the same interface.
    Shadow(Vec<f64>),
}

impl PoolMode {
    pub fn is_shadow(&self) -> bool {
        matches!(self, PoolMode::Shadow(_))
    }
}

#[derive(Debug, Clone)]
pub struct DummyPool {
    space: AmbientSpace,
    law: DummyLaw,
    count: usize,
    table: ProjectionTable,
    sticks: Vec<StickState>,
    times: SelectionTimes,
    realized: BTreeMap<usize, Vec<f64>>,
    mode: PoolMode,
    key: StreamKey,
    seed: u64,
}

impl DummyPool {
    pub fn new(count: usize, law: DummyLaw, space: AmbientSpace, seed: u64, mode: PoolMode) -> Result<Self> {
        if let PoolMode::Shadow(cols) = &mode {
            let expected = space.n() * count;
            if cols.len() != expected {
                return Err(VdError::ShadowShapeMismatch {
                    expected,
                    found: cols.len(),
                });
            }
        }
        Ok(Self {
            space,
            law,
            count,
            table: ProjectionTable::default(),
            sticks: vec![StickState::default(); count],
            times: SelectionTimes {
                tau: vec![None; count],
            },
            realized: BTreeMap::new(),
            mode,
            key: StreamKey::from_seed(seed),
            seed,
        })
    }

    /// Pool in sampled mode.
    pub fn sampled(count: usize, law: DummyLaw, space: AmbientSpace, seed: u64) -> Self {
        Self::new(count, law, space, seed, PoolMode::Sampled).expect("sampled pools have no shape to check")
    }

    /// Pool reading an explicit column-major `n x L` block.
    pub fn shadow(columns: Vec<f64>, count: usize, law: DummyLaw, space: AmbientSpace) -> Result<Self> {
        Self::new(count, law, space, 0, PoolMode::Shadow(columns))
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn law(&self) -> DummyLaw {
        self.law
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn space(&self) -> AmbientSpace {
        self.space
    }

    pub fn mode(&self) -> &PoolMode {
        &self.mode
    }

    pub fn table(&self) -> &ProjectionTable {
        &self.table
    }

    pub fn sticks(&self) -> &[StickState] {
        &self.sticks
    }

    pub fn times(&self) -> &SelectionTimes {
        &self.times
    }

    pub fn is_selected(&self, l: usize) -> bool {
        self.times.is_selected(l)
    }

    pub fn unselected(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.count).filter(move |&l| !self.times.is_selected(l))
    }

    pub fn unselected_count(&self) -> usize {
        self.count - self.realized.len()
    }

    pub fn realized(&self, l: usize) -> Option<&[f64]> {
        self.realized.get(&l).map(|v| v.as_slice())
    }

    pub fn realized_iter(&self) -> impl Iterator<Item = (usize, &[f64])> {
        self.realized.iter().map(|(l, v)| (*l, v.as_slice()))
    }

    /// Explicit column `l` in shadow mode.
    pub fn shadow_column(&self, l: usize) -> Option<&[f64]> {
        match &self.mode {
            PoolMode::Shadow(cols) => {
                let n = self.space.n();
                Some(&cols[l * n..(l + 1) * n])
            }
            PoolMode::Sampled => None,
        }
    }

    /// Bytes of dummy state: projection rows, sticks, selection times and
    /// realized vectors. Shadow columns are not counted.
    pub fn state_bytes(&self) -> usize {
        self.table.heap_bytes()
            + self.sticks.capacity() * std::mem::size_of::<StickState>()
            + self.times.tau.capacity() * std::mem::size_of::<Option<usize>>()
            + self
                .realized
                .values()
                .map(|v| v.capacity() * 8 + std::mem::size_of::<(usize, Vec<f64>)>())
                .sum::<usize>()
    }

    /// Appends the row of coefficients along the newest basis direction for
    /// every unselected dummy.
    pub fn fresh_projections(&mut self, basis: &OrthonormalBasis) -> Result<&[f64]> {
        let rows = self.table.rows();
        if rows >= self.space.m() {
            return Err(VdError::BasisExhausted { m: self.space.m() });
        }
        if basis.len() != rows + 1 {
            return Err(VdError::OutOfOrder {
                rows,
                basis: basis.len(),
            });
        }
        let row = match &self.mode {
            PoolMode::Sampled => self.sample_row(),
            PoolMode::Shadow(cols) => {
                let e_new = basis.last().expect("basis has rows + 1 >= 1 directions");
                let n = self.space.n();
                (0..self.count)
                    .map(|l| {
                        if self.times.is_selected(l) {
                            0.0
                        } else {
                            dot(&cols[l * n..(l + 1) * n], e_new)
                        }
                    })
                    .collect()
            }
        };
        for (l, stick) in self.sticks.iter_mut().enumerate() {
            if !self.times.is_selected(l) {
                if self.mode.is_shadow() {
                    stick.r2 -= row[l] * row[l];
                }
                stick.revealed += 1;
            }
        }
        self.table.rows.push(row);
        Ok(self.table.rows.last().map(|r| r.as_slice()).unwrap_or(&[]))
    }

    /// Draws coordinate `i = rows + 1` for every unselected dummy.
    fn sample_row(&mut self) -> Vec<f64> {
        let m = self.space.m();
        let coord = self.table.rows() + 1;
        let mut row = vec![0.0; self.count];
        match self.law {
            DummyLaw::Spherical => {
                let breaker = StickBreaker::new(m, coord);
                for (l, (out, stick)) in row.iter_mut().zip(self.sticks.iter_mut()).enumerate() {
                    if self.times.is_selected(l) {
                        continue;
                    }
                    let mut rng = self.key.substream(l as u64, coord as u64);
                    let (alpha, r2) = breaker.step(&mut rng, stick.r2);
                    *out = alpha;
                    stick.r2 = r2;
                }
            }
            DummyLaw::GaussianUnitProj | DummyLaw::GaussianUnitNorm => {
                let scale = if self.law == DummyLaw::GaussianUnitNorm {
                    1.0 / (m as f64).sqrt()
                } else {
                    1.0
                };
                for (l, out) in row.iter_mut().enumerate() {
                    if self.times.is_selected(l) {
                        continue;
                    }
                    let mut rng = self.key.substream(l as u64, coord as u64);
                    let z: f64 = StandardNormal.sample(&mut rng);
                    *out = scale * z;
                }
            }
        }
        row
    }

    /// Completes dummy `l` to a full vector in `H` and marks it selected at
    /// `step`.
    pub fn realize(&mut self, l: usize, basis: &OrthonormalBasis, step: usize) -> Result<&[f64]> {
        if l >= self.count {
            return Err(VdError::InvalidParameter(format!(
                "dummy index {l} out of range for a pool of {}",
                self.count
            )));
        }
        if self.times.is_selected(l) {
            return Err(VdError::AlreadyRealized(l));
        }
        let k = self.table.rows();
        if basis.len() != k {
            return Err(VdError::OutOfOrder {
                rows: k,
                basis: basis.len(),
            });
        }
        let vector = match &self.mode {
            PoolMode::Shadow(cols) => {
                let n = self.space.n();
                cols[l * n..(l + 1) * n].to_vec()
            }
            PoolMode::Sampled => self.sample_completion(l, basis)?,
        };
        self.times.tau[l] = Some(step);
        self.realized.insert(l, vector);
        Ok(self.realized[&l].as_slice())
    }

    fn sample_completion(&self, l: usize, basis: &OrthonormalBasis) -> Result<Vec<f64>> {
        let k = basis.len();
        let mut d = vec![0.0; self.space.n()];
        for (i, e) in basis.directions().enumerate() {
            axpy(self.table.get(i, l), e, &mut d);
        }
        if k == self.space.m() {
            // Nothing left unrevealed.
            return Ok(d);
        }
        let perp = self
            .sample_complement(l, basis, 0)
            .or_else(|| self.sample_complement(l, basis, 1))
            .ok_or(VdError::DegenerateResidual(l))?;
        let perp_norm = norm(&perp);
        let target = match self.law {
            DummyLaw::Spherical => self.sticks[l].r2.max(0.0).sqrt(),
            DummyLaw::GaussianUnitProj => perp_norm,
            DummyLaw::GaussianUnitNorm => perp_norm / (self.space.m() as f64).sqrt(),
        };
        axpy(target / perp_norm, &perp, &mut d);
        Ok(d)
    }

    /// Standard normal vector projected onto `H` and away from the basis.
    fn sample_complement(&self, l: usize, basis: &OrthonormalBasis, attempt: u64) -> Option<Vec<f64>> {
        let n = self.space.n();
        let mut rng = self.key.substream(l as u64, REALIZE_SLOT + attempt);
        let mut g: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let mean = g.iter().sum::<f64>() / n as f64;
        g.iter_mut().for_each(|x| *x -= mean);
        let g_norm = norm(&g);
        basis.orthogonalize_in_place(&mut g);
        basis.orthogonalize_in_place(&mut g);
        let perp = norm(&g);
        (perp > TOL_NORM * g_norm).then_some(g)
    }

    /// Scores `sum_i alpha[i][l] t_i` for every dummy, written into `out`.
    /// Entries of selected dummies are meaningless.
    pub fn scores_into(&self, t: &[f64], out: &mut [f64]) -> Result<()> {
        if t.len() != self.table.rows() {
            return Err(VdError::DimensionMismatch {
                expected: self.table.rows(),
                found: t.len(),
            });
        }
        if out.len() != self.count {
            return Err(VdError::DimensionMismatch {
                expected: self.count,
                found: out.len(),
            });
        }
        out.iter_mut().for_each(|x| *x = 0.0);
        for (ti, row) in t.iter().zip(&self.table.rows) {
            axpy(*ti, row, out);
        }
        Ok(())
    }

    /// `(l, <d_l, s>)` for every unselected dummy, where `t` holds the basis
    /// coefficients of a score vector `s` in the revealed subspace.
    pub fn dummy_scores(&self, t: &[f64]) -> Result<Vec<(usize, f64)>> {
        let mut all = vec![0.0; self.count];
        self.scores_into(t, &mut all)?;
        Ok(self.unselected().map(|l| (l, all[l])).collect())
    }
}

/// One stick-breaking step on coordinate `coord` of an `m`-dimensional sphere.
struct StickBreaker {
    rest: Option<Gamma<f64>>,
}

impl StickBreaker {
    fn new(m: usize, coord: usize) -> Self {
        // U = Z^2 / (Z^2 + G) with G ~ chi^2_{m - coord} gives Beta(1/2, (m - coord)/2).
        let rest = (coord < m).then(|| Gamma::new((m - coord) as f64 / 2.0, 2.0).expect("positive shape"));
        Self { rest }
    }

    fn step(&self, rng: &mut ChaCha8Rng, r2: f64) -> (f64, f64) {
        match &self.rest {
            Some(gamma) => {
                let z: f64 = StandardNormal.sample(rng);
                let z2 = z * z;
                let g = gamma.sample(rng);
                let u = z2 / (z2 + g);
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                (sign * (r2 * u).sqrt(), r2 * (1.0 - u))
            }
            None => {
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                (sign * r2.max(0.0).sqrt(), 0.0)
            }
        }
    }
}

/// Runs the complete adaptive stick-breaking sequence for one spherical
/// dummy against a basis that spans `H`, returning its `m` coefficients.
pub fn full_stick_break(space: AmbientSpace, basis: &OrthonormalBasis, seed: u64) -> Result<Vec<f64>> {
    let m = space.m();
    if basis.len() != m || basis.space() != space {
        return Err(VdError::InvalidParameter(format!(
            "stick-breaking needs a basis of H with {m} directions, got {}",
            basis.len()
        )));
    }
    let key = StreamKey::from_seed(seed);
    let mut r2 = 1.0;
    let mut alphas = Vec::with_capacity(m);
    for coord in 1..=m {
        let mut rng = key.substream(0, coord as u64);
        let (alpha, rest) = StickBreaker::new(m, coord).step(&mut rng, r2);
        alphas.push(alpha);
        r2 = rest;
    }
    Ok(alphas)
}
