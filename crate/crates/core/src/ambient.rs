//! Geometry of the centered subspace `H = {x : 1'x = 0}` and the adaptively
//! grown orthonormal basis of the revealed subspace.
//!
//! Every vector the selectors touch (response, standardized predictors,
//! realized dummies, basis directions) lives in `H`, whose dimension is
//! `m = n - 1`. The basis is kept in ambient coordinates because realizing a
//! dummy needs an explicit orthogonal complement.

use crate::error::{Result, VdError};

/// Relative tolerance on `|sum(x)|` for a vector to count as centered.
pub const TOL_CENTER: f64 = 1e-12;
/// Tolerance on `|<e_i, e_j> - delta_ij|` for the basis.
pub const TOL_ORTHO: f64 = 1e-10;
/// Relative norm below which a column or direction is treated as zero.
pub const TOL_NORM: f64 = 1e-12;

/// The centered subspace of `R^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AmbientSpace {
    n: usize,
}

impl AmbientSpace {
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(VdError::InvalidParameter(format!(
                "sample count must be at least 3, got {n}"
            )));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Dimension of `H`.
    pub fn m(&self) -> usize {
        self.n - 1
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(VdError::DimensionMismatch {
                expected: self.n,
                found: len,
            });
        }
        Ok(())
    }
}

/// A vector of `R^n` whose coordinates sum to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredVector(Vec<f64>);

impl CenteredVector {
    /// Wraps `coords` after checking the centering invariant.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if !is_centered(&coords) {
            return Err(VdError::InvalidParameter(
                "coordinates do not sum to zero".into(),
            ));
        }
        Ok(Self(coords))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }
}

impl AsRef<[f64]> for CenteredVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

pub fn is_centered(coords: &[f64]) -> bool {
    let sum: f64 = coords.iter().sum();
    let scale = coords.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    sum.abs() <= TOL_CENTER * coords.len() as f64 * scale
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    // Four accumulators keep the loop vectorizable without fast-math.
    let mut acc = [0.0_f64; 4];
    let chunks_a = a.chunks_exact(4);
    let chunks_b = b.chunks_exact(4);
    let tail: f64 = chunks_a
        .remainder()
        .iter()
        .zip(chunks_b.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (ca, cb) in chunks_a.zip(chunks_b) {
        acc[0] += ca[0] * cb[0];
        acc[1] += ca[1] * cb[1];
        acc[2] += ca[2] * cb[2];
        acc[3] += ca[3] * cb[3];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn subtract_mean(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    for x in v.iter_mut() {
        *x -= mean;
    }
}

/// Applies `I - (1/n) 11'`.
pub fn center_project(v: &[f64], space: &AmbientSpace) -> Result<CenteredVector> {
    space.check_len(v.len())?;
    let mut out = v.to_vec();
    subtract_mean(&mut out);
    Ok(CenteredVector(out))
}

/// Centers `v` and scales it to unit Euclidean norm.
pub fn standardize_column(v: &[f64], space: &AmbientSpace) -> Result<CenteredVector> {
    let mut c = center_project(v, space)?;
    let scale = v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    let nrm = c.norm();
    if nrm <= TOL_NORM * scale * (v.len() as f64).sqrt() {
        return Err(VdError::DegenerateColumn { norm: nrm });
    }
    c.0.iter_mut().for_each(|x| *x /= nrm);
    Ok(c)
}

/// Orthonormal directions `e_1..e_k` spanning the revealed subspace `V_k`,
/// stored contiguously in ambient coordinates.
#[derive(Debug, Clone)]
pub struct OrthonormalBasis {
    space: AmbientSpace,
    data: Vec<f64>,
    k: usize,
}

impl OrthonormalBasis {
    pub fn new(space: AmbientSpace) -> Self {
        Self {
            space,
            data: Vec::new(),
            k: 0,
        }
    }

    pub fn space(&self) -> AmbientSpace {
        self.space
    }

    /// Current number of directions `k`.
    pub fn len(&self) -> usize {
        self.k
    }

    pub fn is_empty(&self) -> bool {
        self.k == 0
    }

    pub fn is_full(&self) -> bool {
        self.k == self.space.m()
    }

    pub fn direction(&self, i: usize) -> &[f64] {
        let n = self.space.n();
        &self.data[i * n..(i + 1) * n]
    }

    pub fn last(&self) -> Option<&[f64]> {
        (self.k > 0).then(|| self.direction(self.k - 1))
    }

    pub fn directions(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.space.n())
    }

    /// Heap bytes held by the stored directions.
    pub fn heap_bytes(&self) -> usize {
        self.data.capacity() * std::mem::size_of::<f64>()
    }

    /// Coefficients `t_i = <e_i, v>`.
    pub fn coeffs(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.space.check_len(v.len())?;
        Ok(self.directions().map(|e| dot(e, v)).collect())
    }

    /// Ambient vector `sum_i t_i e_i`.
    pub fn combine(&self, t: &[f64]) -> Result<Vec<f64>> {
        if t.len() != self.k {
            return Err(VdError::DimensionMismatch {
                expected: self.k,
                found: t.len(),
            });
        }
        let mut out = vec![0.0; self.space.n()];
        for (ti, e) in t.iter().zip(self.directions()) {
            axpy(*ti, e, &mut out);
        }
        Ok(out)
    }

    /// Removes the components of `v` along the current directions in place
    /// (modified Gram-Schmidt, one pass).
    pub fn orthogonalize_in_place(&self, v: &mut [f64]) {
        for e in self.directions() {
            let c = dot(e, v);
            axpy(-c, e, v);
        }
    }

    /// Orthonormalizes `v` against the basis and appends the result.
    ///
    /// A second Gram-Schmidt pass runs when more than half of `v` was
    /// removed by the first one.
    pub fn extend(&mut self, v: &[f64]) -> Result<&[f64]> {
        self.space.check_len(v.len())?;
        if self.k >= self.space.m() {
            return Err(VdError::BasisExhausted { m: self.space.m() });
        }
        let v_norm = norm(v);
        let mut w = v.to_vec();
        self.orthogonalize_in_place(&mut w);
        let mut w_norm = norm(&w);
        if w_norm < 0.5 * v_norm {
            self.orthogonalize_in_place(&mut w);
            w_norm = norm(&w);
        }
        if !(w_norm > TOL_NORM * v_norm) {
            return Err(VdError::DegenerateDirection {
                residual: w_norm,
                norm: v_norm,
            });
        }
        // Keep the direction exactly in H despite rounding drift.
        subtract_mean(&mut w);
        let w_norm = norm(&w);
        w.iter_mut().for_each(|x| *x /= w_norm);
        self.data.extend_from_slice(&w);
        self.k += 1;
        Ok(self.direction(self.k - 1))
    }
}

/// Free-function form of [`OrthonormalBasis::extend`].
pub fn basis_extend<'a>(basis: &'a mut OrthonormalBasis, v: &CenteredVector) -> Result<&'a [f64]> {
    basis.extend(v.as_slice())
}

/// Free-function form of [`OrthonormalBasis::coeffs`].
pub fn basis_coeffs(basis: &OrthonormalBasis, v: &CenteredVector) -> Result<Vec<f64>> {
    basis.coeffs(v.as_slice())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn space(n: usize) -> AmbientSpace {
        AmbientSpace::new(n).unwrap()
    }

    #[test]
    fn rejects_tiny_spaces() {
        assert!(AmbientSpace::new(2).is_err());
        assert_eq!(space(3).m(), 2);
    }

    #[test]
    fn center_project_examples() {
        let s = space(3);
        assert_eq!(center_project(&[1.0, 2.0, 3.0], &s).unwrap().as_slice(), &[-1.0, 0.0, 1.0]);
        let c = center_project(&[-1.0, 0.0, 1.0], &s).unwrap();
        assert_eq!(c.as_slice(), &[-1.0, 0.0, 1.0]);
        let z = center_project(&[4.2, 4.2, 4.2], &s).unwrap();
        assert!(z.as_slice().iter().all(|x| x.abs() < 1e-15));
        assert!(matches!(
            center_project(&[1.0, 2.0], &s),
            Err(VdError::DimensionMismatch { expected: 3, found: 2 })
        ));
    }

    #[test]
    fn standardize_examples() {
        let s = space(3);
        let c = standardize_column(&[1.0, 2.0, 3.0], &s).unwrap();
        let r = 1.0 / 2f64.sqrt();
        assert_abs_diff_eq!(c.as_slice()[0], -r, epsilon = 1e-15);
        assert_abs_diff_eq!(c.as_slice()[1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.as_slice()[2], r, epsilon = 1e-15);
        let again = standardize_column(c.as_slice(), &s).unwrap();
        for (a, b) in again.as_slice().iter().zip(c.as_slice()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
        assert!(matches!(
            standardize_column(&[5.0, 5.0, 5.0], &s),
            Err(VdError::DegenerateColumn { .. })
        ));
    }

    #[test]
    fn extend_examples() {
        let s = space(3);
        let mut b = OrthonormalBasis::new(s);
        let e1 = standardize_column(&[1.0, 2.0, 3.0], &s).unwrap();
        b.extend(e1.as_slice()).unwrap();
        let v: Vec<f64> = [1.0, -2.0, 1.0].iter().map(|x| x / 6f64.sqrt()).collect();
        let e2 = b.extend(&v).unwrap().to_vec();
        for (a, c) in e2.iter().zip(&v) {
            assert_abs_diff_eq!(a, c, epsilon = 1e-15);
        }
        // The basis now spans H.
        assert!(matches!(b.extend(&v), Err(VdError::BasisExhausted { m: 2 })));

        let mut b = OrthonormalBasis::new(s);
        b.extend(e1.as_slice()).unwrap();
        assert!(matches!(
            b.extend(e1.as_slice()),
            Err(VdError::DegenerateDirection { .. })
        ));
    }

    #[test]
    fn extend_recovers_orthogonal_part() {
        let s = space(5);
        let mut b = OrthonormalBasis::new(s);
        let e1 = standardize_column(&[1.0, 0.0, 0.0, 0.0, -1.0], &s).unwrap();
        let w = standardize_column(&[0.0, 1.0, -1.0, 0.0, 0.0], &s).unwrap();
        b.extend(e1.as_slice()).unwrap();
        let v: Vec<f64> = e1.as_slice().iter().zip(w.as_slice()).map(|(a, c)| a + c).collect();
        let got = b.extend(&v).unwrap();
        for (a, c) in got.iter().zip(w.as_slice()) {
            assert_abs_diff_eq!(a, c, epsilon = 1e-14);
        }
    }

    #[test]
    fn coeffs_examples() {
        let s = space(4);
        let mut b = OrthonormalBasis::new(s);
        b.extend(standardize_column(&[1.0, -1.0, 0.0, 0.0], &s).unwrap().as_slice()).unwrap();
        b.extend(standardize_column(&[0.0, 0.0, 1.0, -1.0], &s).unwrap().as_slice()).unwrap();
        let e2 = b.direction(1).to_vec();
        let t = b.coeffs(&e2).unwrap();
        assert_abs_diff_eq!(t[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t[1], 1.0, epsilon = 1e-15);
        // (1,1,-1,-1) is orthogonal to both directions.
        let t = b.coeffs(&[1.0, 1.0, -1.0, -1.0]).unwrap();
        assert!(t.iter().all(|x| x.abs() < 1e-15));
    }

    fn uniform_vector(seed: u64, n: usize) -> Vec<f64> {
        use rand::Rng;
        let mut rng = crate::rng::seeded(seed);
        (0..n).map(|_| rng.random::<f64>() - 0.5).collect()
    }

    #[test]
    fn coeffs_pythagoras_against_direct_recomputation() {
        let s = space(40);
        let mut b = OrthonormalBasis::new(s);
        for seed in 0..7 {
            let v = center_project(&uniform_vector(seed, 40), &s).unwrap();
            b.extend(v.as_slice()).unwrap();
        }
        let v = center_project(&uniform_vector(99, 40), &s).unwrap();
        let t = b.coeffs(v.as_slice()).unwrap();
        // Independent recomputation: build the parallel part coordinate by coordinate.
        let mut parallel = vec![0.0; 40];
        for (i, ti) in t.iter().enumerate() {
            for (p, e) in parallel.iter_mut().zip(b.direction(i)) {
                *p += ti * e;
            }
        }
        let resid: f64 = v.as_slice().iter().zip(&parallel).map(|(a, p)| (a - p).powi(2)).sum();
        let lhs: f64 = v.as_slice().iter().map(|x| x * x).sum();
        let rhs: f64 = t.iter().map(|x| x * x).sum::<f64>() + resid;
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-10);
    }

    proptest! {
        #[test]
        fn center_project_is_idempotent(v in prop::collection::vec(-1e3..1e3f64, 3..40)) {
            let s = space(v.len());
            let once = center_project(&v, &s).unwrap();
            let twice = center_project(once.as_slice(), &s).unwrap();
            let scale = v.iter().fold(1.0_f64, |a, x| a.max(x.abs()));
            for (a, b) in once.as_slice().iter().zip(twice.as_slice()) {
                prop_assert!((a - b).abs() <= 1e-15 * scale * 8.0);
            }
        }

        #[test]
        fn extended_bases_stay_orthonormal(seed in 0u64..10_000, n in 5usize..60, k in 1usize..5) {
            let s = space(n);
            let mut b = OrthonormalBasis::new(s);
            let k = k.min(s.m());
            let mut appended = Vec::new();
            for i in 0..k {
                let v = center_project(&uniform_vector(seed * 31 + i as u64, n), &s).unwrap();
                let before = b.coeffs(v.as_slice()).unwrap();
                let mut w = v.as_slice().to_vec();
                b.orthogonalize_in_place(&mut w);
                let perp = norm(&w);
                b.extend(v.as_slice()).unwrap();
                // Extending then reading back yields (<v,e_1>..<v,e_k>, |v_perp|).
                let after = b.coeffs(v.as_slice()).unwrap();
                for (x, y) in before.iter().zip(&after) {
                    prop_assert!((x - y).abs() <= TOL_ORTHO);
                }
                prop_assert!((after[i] - perp).abs() <= TOL_ORTHO);
                appended.push(i);
            }
            for i in 0..b.len() {
                prop_assert!((norm(b.direction(i)) - 1.0).abs() <= 1e-12);
                prop_assert!(is_centered(b.direction(i)));
                for j in 0..i {
                    prop_assert!(dot(b.direction(i), b.direction(j)).abs() <= 1e-10);
                }
            }
        }
    }
}
