//! Growing Cholesky factor of an active Gram matrix.

use crate::error::{Result, VdError};

/// Relative pivot floor: a new pivot must exceed this times the largest
/// pivot seen so far.
pub const TOL_PIVOT: f64 = 1e-10;

/// Lower-triangular `L` with `L L^T = G`, stored by rows.
#[derive(Debug, Clone, Default)]
pub struct Cholesky {
    rows: Vec<Vec<f64>>,
    max_pivot: f64,
}

impl Cholesky {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    /// Adds a variable whose Gram entries against the current ones are
    /// `cross` and whose squared norm is `diag`.
    pub fn append(&mut self, cross: &[f64], diag: f64) -> Result<()> {
        let k = self.rows.len();
        debug_assert_eq!(cross.len(), k);
        let mut row = Vec::with_capacity(k + 1);
        for i in 0..k {
            let li = &self.rows[i];
            let s: f64 = li[..i].iter().zip(&row).map(|(a, b)| a * b).sum();
            row.push((cross[i] - s) / li[i]);
        }
        let d = diag - row.iter().map(|x| x * x).sum::<f64>();
        let pivot = d.max(0.0).sqrt();
        let scale = self.max_pivot.max(diag.max(0.0).sqrt());
        let tol = TOL_PIVOT * scale;
        if !(pivot > tol) {
            return Err(VdError::SingularGram { pivot, tol });
        }
        self.max_pivot = self.max_pivot.max(pivot);
        row.push(pivot);
        self.rows.push(row);
        Ok(())
    }

    /// Solves `L L^T z = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let k = self.rows.len();
        debug_assert_eq!(b.len(), k);
        let mut z = b.to_vec();
        for i in 0..k {
            let li = &self.rows[i];
            let s: f64 = li[..i].iter().zip(&z[..i]).map(|(a, b)| a * b).sum();
            z[i] = (z[i] - s) / li[i];
        }
        for i in (0..k).rev() {
            let mut s = z[i];
            for j in i + 1..k {
                s -= self.rows[j][i] * z[j];
            }
            z[i] = s / self.rows[i][i];
        }
        z
    }

    pub fn heap_bytes(&self) -> usize {
        self.rows.iter().map(|r| r.capacity() * 8).sum::<usize>() + self.rows.capacity() * 24
    }
}
