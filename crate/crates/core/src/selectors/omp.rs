//! Orthogonal matching pursuit over real columns and dummies.
//!
//! The residual is the least-squares residual of `y` on the selected
//! columns. Every selected column lies in the revealed subspace, so the fit
//! is solved in basis coordinates where `y = |y| e_1`.

use crate::ambient::{dot, norm, AmbientSpace, OrthonormalBasis, TOL_NORM};
use crate::chol::TOL_PIVOT;
use crate::design::{ColumnProvider, Stacked};
use crate::dummy::{DummyLaw, DummyPool};
use crate::error::{Result, VdError};

use super::forward::{ArgMaxAbs, ForwardCore};
use super::{floor_of, rule_met, PathEvent, PathResult, Step, StoppingRule};

pub struct OmpState<'a, P: ColumnProvider> {
    core: ForwardCore<'a, P>,
    residual: Vec<f64>,
    active: Vec<usize>,
    /// Orthonormal basis of the selected columns in basis coordinates.
    q: Vec<Vec<f64>>,
    floor: f64,
    finished: bool,
    floor_reached: bool,
    c_real: Vec<f64>,
    c_dummy: Vec<f64>,
}

impl<'a, P: ColumnProvider> OmpState<'a, P> {
    pub fn new(design: &'a P, y: &[f64], pool: DummyPool) -> Result<Self> {
        Self::with_split(design, design.p(), y, pool)
    }

    pub fn with_split(design: &'a P, p_real: usize, y: &[f64], pool: DummyPool) -> Result<Self> {
        let core = ForwardCore::new(design, p_real, y, pool)?;
        let cols = core.columns();
        let l = core.pool.len();
        Ok(Self {
            residual: core.y.clone(),
            core,
            active: Vec::new(),
            q: Vec::new(),
            floor: 0.0,
            finished: false,
            floor_reached: false,
            c_real: vec![0.0; cols],
            c_dummy: vec![0.0; l],
        })
    }

    pub fn residual(&self) -> &[f64] {
        &self.residual
    }

    pub fn basis(&self) -> &OrthonormalBasis {
        &self.core.basis
    }

    pub fn pool(&self) -> &DummyPool {
        &self.core.pool
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn events(&self) -> &[PathEvent] {
        &self.core.events
    }

    pub fn step(&mut self) -> Result<Step> {
        if self.finished {
            return Ok(Step::Finished);
        }
        let step = self.core.events.len() + 1;
        let residual = std::mem::take(&mut self.residual);
        let products = self.core.products(&residual, &mut self.c_real, &mut self.c_dummy);
        self.residual = residual;
        products?;
        let mut pick = ArgMaxAbs::default();
        self.core
            .for_each_candidate(&self.c_real, &self.c_dummy, |g, v| pick.offer(g, v));
        self.core.ties += pick.ties;
        let (entrant, c) = match pick.best {
            Some((g, v)) => (g, v.abs()),
            None => {
                self.finished = true;
                return Ok(Step::Finished);
            }
        };
        if c <= self.floor || c <= TOL_NORM * self.core.y_norm || self.active.len() >= self.core.space().m() {
            self.floor_reached = c <= self.floor;
            self.finished = true;
            return Ok(Step::Finished);
        }

        let col = self.core.enter(entrant, step)?;
        let k = self.core.basis.len();
        let coeffs = self.core.basis.coeffs(&col)?;
        for qi in &mut self.q {
            qi.resize(k, 0.0);
        }
        let scale = norm(&coeffs);
        let mut v = coeffs;
        for _ in 0..2 {
            for qi in &self.q {
                let h = dot(qi, &v);
                v.iter_mut().zip(qi).for_each(|(a, b)| *a -= h * b);
            }
        }
        let pivot = norm(&v);
        let tol = TOL_PIVOT * scale;
        if !(pivot > tol) {
            return Err(VdError::SingularGram { pivot, tol });
        }
        v.iter_mut().for_each(|a| *a /= pivot);
        self.q.push(v);
        self.active.push(entrant);

        let mut t = vec![0.0; k];
        t[0] = self.core.y_norm;
        for _ in 0..2 {
            for qi in &self.q {
                let h = dot(qi, &t);
                t.iter_mut().zip(qi).for_each(|(a, b)| *a -= h * b);
            }
        }
        self.residual = self.core.basis.combine(&t)?;

        let event = PathEvent {
            step,
            index: entrant,
            is_dummy: self.core.is_dummy(entrant),
            gamma: 0.0,
            c_before: c,
            basis_size_after: k,
        };
        self.core.events.push(event);
        Ok(Step::Entered(event))
    }

    pub fn run(mut self, stop: StoppingRule) -> Result<PathResult> {
        self.floor = self.floor.max(floor_of(stop));
        loop {
            if rule_met(stop, self.core.dummies_selected, self.active.len()) {
                return Ok(self.core.into_result(false, None));
            }
            if let Step::Finished = self.step()? {
                let exhausted = !self.floor_reached;
                return Ok(self.core.into_result(exhausted, None));
            }
        }
    }
}

/// OMP on real columns and the pool's virtual dummies.
pub fn vd_omp_run<P: ColumnProvider>(x: &P, y: &[f64], pool: DummyPool, stop: StoppingRule) -> Result<PathResult> {
    OmpState::new(x, y, pool)?.run(stop)
}

/// OMP on the explicitly augmented design `(X D)`.
pub fn ad_omp_run<P: ColumnProvider>(x: &P, y: &[f64], dummies: &[f64], stop: StoppingRule) -> Result<PathResult> {
    let stacked = Stacked::new(x, dummies)?;
    let space = AmbientSpace::new(x.n())?;
    let pool = DummyPool::sampled(0, DummyLaw::Spherical, space, 0);
    OmpState::with_split(&stacked, x.p(), y, pool)?.run(stop)
}
