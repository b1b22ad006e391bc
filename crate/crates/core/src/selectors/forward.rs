//! State shared by every forward-selection rule: the design, the revealed
//! basis, the dummy pool and the event log.

use std::time::{Duration, Instant};

use crate::ambient::{norm, AmbientSpace, OrthonormalBasis, TOL_NORM};
use crate::design::ColumnProvider;
use crate::dummy::DummyPool;
use crate::error::{Result, VdError};

use super::{PathEvent, PathResult, TOL_TIE};

pub(crate) struct ForwardCore<'a, P: ColumnProvider> {
    pub design: &'a P,
    /// Provider columns below this index are real, the rest explicit dummies.
    pub p_real: usize,
    pub y: Vec<f64>,
    pub y_norm: f64,
    pub basis: OrthonormalBasis,
    pub pool: DummyPool,
    in_active: Vec<bool>,
    pub events: Vec<PathEvent>,
    pub dummies_selected: usize,
    pub ties: usize,
    pub dummy_time: Duration,
}

impl<'a, P: ColumnProvider> ForwardCore<'a, P> {
    pub fn new(design: &'a P, p_real: usize, y: &[f64], pool: DummyPool) -> Result<Self> {
        let n = design.n();
        let space = AmbientSpace::new(n)?;
        if y.len() != n {
            return Err(VdError::DimensionMismatch {
                expected: n,
                found: y.len(),
            });
        }
        if pool.space() != space {
            return Err(VdError::DimensionMismatch {
                expected: n,
                found: pool.space().n(),
            });
        }
        if p_real > design.p() {
            return Err(VdError::InvalidParameter(format!(
                "{p_real} real columns requested from a provider with {}",
                design.p()
            )));
        }
        let y_norm = norm(y);
        let scale = y.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        if y_norm <= TOL_NORM || y_norm <= TOL_NORM * scale * (n as f64).sqrt() {
            return Err(VdError::ZeroResponse);
        }
        let mut basis = OrthonormalBasis::new(space);
        basis.extend(y)?;
        let mut core = Self {
            design,
            p_real,
            y: y.to_vec(),
            y_norm,
            basis,
            pool,
            in_active: vec![false; design.p()],
            events: Vec::new(),
            dummies_selected: 0,
            ties: 0,
            dummy_time: Duration::ZERO,
        };
        let t0 = Instant::now();
        core.pool.fresh_projections(&core.basis)?;
        core.dummy_time += t0.elapsed();
        Ok(core)
    }

    pub fn space(&self) -> AmbientSpace {
        self.basis.space()
    }

    /// Number of provider columns.
    pub fn columns(&self) -> usize {
        self.in_active.len()
    }

    pub fn is_dummy(&self, g: usize) -> bool {
        g >= self.p_real
    }

    /// `real[j] = <x_j, v>` for provider columns and `dummy[l] = <d_l, v>`
    /// for pool dummies, `v` in the revealed subspace.
    pub fn products(&mut self, v: &[f64], real: &mut [f64], dummy: &mut [f64]) -> Result<()> {
        let (head, tail) = real.split_at_mut(self.p_real);
        self.design.inner_products_range(v, 0, head);
        let t0 = Instant::now();
        if !tail.is_empty() {
            self.design.inner_products_range(v, self.p_real, tail);
        }
        if !self.pool.is_empty() {
            let t = self.basis.coeffs(v)?;
            self.pool.scores_into(&t, dummy)?;
        }
        self.dummy_time += t0.elapsed();
        Ok(())
    }

    /// Visits every inactive candidate in ascending global index order with
    /// its entry of `real` or `dummy`.
    pub fn for_each_candidate(&self, real: &[f64], dummy: &[f64], mut f: impl FnMut(usize, f64)) {
        for (j, &v) in real.iter().enumerate() {
            if !self.in_active[j] {
                f(j, v);
            }
        }
        let offset = self.columns();
        for (l, &v) in dummy.iter().enumerate() {
            if !self.pool.is_selected(l) {
                f(offset + l, v);
            }
        }
    }

    pub fn has_candidates(&self) -> bool {
        self.in_active.iter().any(|a| !a) || self.pool.unselected_count() > 0
    }

    /// Adds candidate `g`: realizes it if it is a virtual dummy, extends the
    /// basis by its direction and reveals the next projection row. Returns
    /// the candidate's column.
    pub fn enter(&mut self, g: usize, step: usize) -> Result<Vec<f64>> {
        let cols = self.columns();
        let col = if g < cols {
            self.in_active[g] = true;
            self.design.column(g).into_owned()
        } else {
            let t0 = Instant::now();
            let d = self.pool.realize(g - cols, &self.basis, step)?.to_vec();
            self.dummy_time += t0.elapsed();
            d
        };
        if self.is_dummy(g) {
            self.dummies_selected += 1;
        }
        if !self.basis.is_full() {
            self.basis.extend(&col)?;
            let t0 = Instant::now();
            self.pool.fresh_projections(&self.basis)?;
            self.dummy_time += t0.elapsed();
        }
        Ok(col)
    }

    pub fn into_result(self, exhausted: bool, terminal_gamma: Option<f64>) -> PathResult {
        PathResult {
            p: self.p_real,
            events: self.events,
            dummies_selected: self.dummies_selected,
            realized: self.pool.realized_iter().map(|(l, v)| (l, v.to_vec())).collect(),
            terminal_gamma,
            exhausted,
            ties: self.ties,
            dummy_time: self.dummy_time,
        }
    }
}

/// Running minimum with the index tie-break: within a relative window of
/// `TOL_TIE` the earlier (smaller) index wins.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct ArgMin {
    pub best: Option<(usize, f64, f64)>,
    pub ties: usize,
}

impl ArgMin {
    /// Offers candidate `g` with value `v` and payload `sign`; candidates must
    /// arrive in ascending index order.
    pub fn offer(&mut self, g: usize, v: f64, sign: f64) {
        match self.best {
            None => self.best = Some((g, v, sign)),
            Some((_, b, _)) => {
                if v < b * (1.0 - TOL_TIE) {
                    self.best = Some((g, v, sign));
                } else if v <= b * (1.0 + TOL_TIE) {
                    self.ties += 1;
                }
            }
        }
    }
}

/// Running maximum of absolute values with the same tie-break.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct ArgMaxAbs {
    pub best: Option<(usize, f64)>,
    pub ties: usize,
}

impl ArgMaxAbs {
    pub fn offer(&mut self, g: usize, v: f64) {
        match self.best {
            None => self.best = Some((g, v)),
            Some((_, b)) => {
                let (a, b) = (v.abs(), b.abs());
                if a > b * (1.0 + TOL_TIE) {
                    self.best = Some((g, v));
                } else if a >= b * (1.0 - TOL_TIE) {
                    self.ties += 1;
                }
            }
        }
    }
}
