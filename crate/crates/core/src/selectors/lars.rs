//! Least angle regression over real columns and dummies.

use crate::ambient::{axpy, dot, OrthonormalBasis, TOL_NORM};
use crate::chol::Cholesky;
use crate::design::{ColumnProvider, Stacked};
use crate::dummy::{DummyLaw, DummyPool};
use crate::error::{Result, VdError};

use super::forward::{ArgMaxAbs, ArgMin, ForwardCore};
use super::{floor_of, rule_met, PathEvent, PathResult, Step, StoppingRule};

/// Equiangular direction of the signed active columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Equiangular {
    /// Weights on the signed active columns.
    pub w: Vec<f64>,
    /// Unit direction `sum_i w_i s_i x_i`.
    pub u: Vec<f64>,
    /// Common inner product of `u` with every signed active column.
    pub a: f64,
}

/// Solves `G z = 1` through the factor, sets `A = (1' z)^(-1/2)` and
/// `w = A z`, and combines the signed columns.
pub fn equiangular(chol: &Cholesky, signed_columns: &[Vec<f64>]) -> Result<Equiangular> {
    let k = chol.len();
    if k == 0 || signed_columns.len() != k {
        return Err(VdError::DimensionMismatch {
            expected: k.max(1),
            found: signed_columns.len(),
        });
    }
    let z = chol.solve(&vec![1.0; k]);
    let total: f64 = z.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(VdError::SingularGram { pivot: total, tol: 0.0 });
    }
    let a = total.powf(-0.5);
    let w: Vec<f64> = z.iter().map(|zi| a * zi).collect();
    let mut u = vec![0.0; signed_columns[0].len()];
    for (wi, col) in w.iter().zip(signed_columns) {
        axpy(*wi, col, &mut u);
    }
    Ok(Equiangular { w, u, a })
}

/// One LARS path in progress.
pub struct LarsState<'a, P: ColumnProvider> {
    core: ForwardCore<'a, P>,
    residual: Vec<f64>,
    active: Vec<(usize, f64)>,
    signed: Vec<Vec<f64>>,
    chol: Cholesky,
    floor: f64,
    finished: bool,
    floor_reached: bool,
    terminal_gamma: Option<f64>,
    c_real: Vec<f64>,
    c_dummy: Vec<f64>,
    a_real: Vec<f64>,
    a_dummy: Vec<f64>,
}

impl<'a, P: ColumnProvider> LarsState<'a, P> {
    /// Starts a path with residual `y` and basis `{y / |y|}`, revealing the
    /// first projection row.
    pub fn new(design: &'a P, y: &[f64], pool: DummyPool) -> Result<Self> {
        Self::with_split(design, design.p(), y, pool)
    }

    /// As `new`, with provider columns from `p_real` on treated as explicit
    /// dummies.
    pub fn with_split(design: &'a P, p_real: usize, y: &[f64], pool: DummyPool) -> Result<Self> {
        let core = ForwardCore::new(design, p_real, y, pool)?;
        let cols = core.columns();
        let l = core.pool.len();
        Ok(Self {
            residual: core.y.clone(),
            core,
            active: Vec::new(),
            signed: Vec::new(),
            chol: Cholesky::new(),
            floor: 0.0,
            finished: false,
            floor_reached: false,
            terminal_gamma: None,
            c_real: vec![0.0; cols],
            c_dummy: vec![0.0; l],
            a_real: vec![0.0; cols],
            a_dummy: vec![0.0; l],
        })
    }

    /// Ends the path before any step whose maximal correlation is at most `tol`.
    pub fn set_floor(&mut self, tol: f64) {
        self.floor = tol;
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

    /// Active global indices with their signs, in entry order.
    pub fn active(&self) -> &[(usize, f64)] {
        &self.active
    }

    pub fn signed_columns(&self) -> &[Vec<f64>] {
        &self.signed
    }

    pub fn cholesky(&self) -> &Cholesky {
        &self.chol
    }

    pub fn events(&self) -> &[PathEvent] {
        &self.core.events
    }

    pub fn dummies_selected(&self) -> usize {
        self.core.dummies_selected
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    pub fn terminal_gamma(&self) -> Option<f64> {
        self.terminal_gamma
    }

    /// Basis coefficients of the current residual.
    pub fn residual_coeffs(&self) -> Result<Vec<f64>> {
        self.core.basis.coeffs(&self.residual)
    }

    /// Equiangular direction of the current active set.
    pub fn equiangular(&self) -> Result<Equiangular> {
        equiangular(&self.chol, &self.signed)
    }

    /// Largest absolute correlation among active columns and candidates.
    fn max_correlation(&self) -> f64 {
        let mut c = self
            .signed
            .iter()
            .map(|col| dot(col, &self.residual).abs())
            .fold(0.0_f64, f64::max);
        self.core
            .for_each_candidate(&self.c_real, &self.c_dummy, |_, v| c = c.max(v.abs()));
        c
    }

    /// Advances the path by one entrant, or ends it.
    pub fn step(&mut self) -> Result<Step> {
        if self.finished {
            return Ok(Step::Finished);
        }
        let step = self.core.events.len() + 1;
        let residual = std::mem::take(&mut self.residual);
        let products = self.core.products(&residual, &mut self.c_real, &mut self.c_dummy);
        self.residual = residual;
        products?;
        let c = self.max_correlation();
        if c <= self.floor || c <= TOL_NORM * self.core.y_norm {
            self.floor_reached = c <= self.floor;
            self.finished = true;
            return Ok(Step::Finished);
        }

        let (entrant, sign, gamma) = if self.active.is_empty() {
            let mut pick = ArgMaxAbs::default();
            self.core
                .for_each_candidate(&self.c_real, &self.c_dummy, |g, v| pick.offer(g, v));
            self.core.ties += pick.ties;
            match pick.best {
                Some((g, v)) => (g, if v >= 0.0 { 1.0 } else { -1.0 }, 0.0),
                None => {
                    self.finished = true;
                    return Ok(Step::Finished);
                }
            }
        } else {
            let eq = self.equiangular()?;
            let at_capacity = self.active.len() >= self.core.space().m();
            let mut pick = ArgMin::default();
            if !at_capacity && self.core.has_candidates() {
                self.core.products(&eq.u, &mut self.a_real, &mut self.a_dummy)?;
                let (a_real, a_dummy) = (&self.a_real, &self.a_dummy);
                let (c_real, c_dummy) = (&self.c_real, &self.c_dummy);
                let cols = self.core.columns();
                self.core.for_each_candidate(c_real, c_dummy, |g, cj| {
                    let aj = if g < cols { a_real[g] } else { a_dummy[g - cols] };
                    let plus = (c - cj) / (eq.a - aj);
                    let minus = (c + cj) / (eq.a + aj);
                    let plus_ok = plus > 0.0 && plus.is_finite();
                    let minus_ok = minus > 0.0 && minus.is_finite();
                    match (plus_ok, minus_ok) {
                        (true, true) if minus < plus => pick.offer(g, minus, -1.0),
                        (true, _) => pick.offer(g, plus, 1.0),
                        (false, true) => pick.offer(g, minus, -1.0),
                        (false, false) => {}
                    }
                });
                self.core.ties += pick.ties;
            }
            match pick.best {
                Some((g, gamma, sign)) => {
                    axpy(-gamma, &eq.u, &mut self.residual);
                    (g, sign, gamma)
                }
                None => {
                    let gamma = c / eq.a;
                    axpy(-gamma, &eq.u, &mut self.residual);
                    self.terminal_gamma = Some(gamma);
                    self.finished = true;
                    return Ok(Step::Finished);
                }
            }
        };

        let col = self.core.enter(entrant, step)?;
        let signed: Vec<f64> = col.iter().map(|v| sign * v).collect();
        let cross: Vec<f64> = self.signed.iter().map(|s| dot(s, &signed)).collect();
        self.chol.append(&cross, dot(&signed, &signed))?;
        self.signed.push(signed);
        self.active.push((entrant, sign));
        let event = PathEvent {
            step,
            index: entrant,
            is_dummy: self.core.is_dummy(entrant),
            gamma,
            c_before: c,
            basis_size_after: self.core.basis.len(),
        };
        self.core.events.push(event);
        Ok(Step::Entered(event))
    }

    /// Runs until `stop` holds or the path ends.
    pub fn run(mut self, stop: StoppingRule) -> Result<PathResult> {
        self.floor = self.floor.max(floor_of(stop));
        loop {
            if rule_met(stop, self.core.dummies_selected, self.active.len()) {
                return Ok(self.finish(false));
            }
            if let Step::Finished = self.step()? {
                let exhausted = !self.floor_reached;
                return Ok(self.finish(exhausted));
            }
        }
    }

    pub fn finish(self, exhausted: bool) -> PathResult {
        self.core.into_result(exhausted, self.terminal_gamma)
    }
}

/// LARS on real columns and the pool's virtual dummies.
pub fn run_path<P: ColumnProvider>(x: &P, y: &[f64], pool: DummyPool, stop: StoppingRule) -> Result<PathResult> {
    LarsState::new(x, y, pool)?.run(stop)
}

/// LARS on the explicitly augmented design `(X D)`, `D` column-major `n x L`.
pub fn ad_lars_run<P: ColumnProvider>(x: &P, y: &[f64], dummies: &[f64], stop: StoppingRule) -> Result<PathResult> {
    let stacked = Stacked::new(x, dummies)?;
    let space = crate::ambient::AmbientSpace::new(x.n())?;
    let pool = DummyPool::sampled(0, DummyLaw::Spherical, space, 0);
    LarsState::with_split(&stacked, x.p(), y, pool)?.run(stop)
}
