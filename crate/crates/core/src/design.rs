//! Column access to the real design.

use std::borrow::Cow;

use crate::ambient::{dot, standardize_column, AmbientSpace};
use crate::error::{Result, VdError};

/// Read-only source of design columns. `column(j)` must return the same
/// values on every call.
pub trait ColumnProvider: Sync {
    fn n(&self) -> usize;
    fn p(&self) -> usize;
    fn column(&self, j: usize) -> Cow<'_, [f64]>;

    /// `out[j] = <x_j, r>` for every column.
    fn inner_products(&self, r: &[f64], out: &mut [f64]) {
        self.inner_products_range(r, 0, out);
    }

    /// `out[i] = <x_{start + i}, r>` for `i < out.len()`.
    fn inner_products_range(&self, r: &[f64], start: usize, out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(&self.column(start + i), r);
        }
    }
}

impl<P: ColumnProvider + ?Sized> ColumnProvider for &P {
    fn n(&self) -> usize {
        (**self).n()
    }
    fn p(&self) -> usize {
        (**self).p()
    }
    fn column(&self, j: usize) -> Cow<'_, [f64]> {
        (**self).column(j)
    }
    fn inner_products(&self, r: &[f64], out: &mut [f64]) {
        (**self).inner_products(r, out)
    }
    fn inner_products_range(&self, r: &[f64], start: usize, out: &mut [f64]) {
        (**self).inner_products_range(r, start, out)
    }
}

/// Dense column-major design held in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseColumns {
    n: usize,
    p: usize,
    data: Vec<f64>,
}

impl DenseColumns {
    pub fn new(n: usize, p: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * p {
            return Err(VdError::DimensionMismatch {
                expected: n * p,
                found: data.len(),
            });
        }
        Ok(Self { n, p, data })
    }

    /// Centers and unit-normalizes every column of a raw column-major block.
    pub fn standardized(space: AmbientSpace, p: usize, raw: &[f64]) -> Result<Self> {
        let n = space.n();
        if raw.len() != n * p {
            return Err(VdError::DimensionMismatch {
                expected: n * p,
                found: raw.len(),
            });
        }
        let mut data = Vec::with_capacity(n * p);
        for col in raw.chunks_exact(n) {
            data.extend_from_slice(standardize_column(col, &space)?.as_slice());
        }
        Ok(Self { n, p, data })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }
}

impl ColumnProvider for DenseColumns {
    fn n(&self) -> usize {
        self.n
    }

    fn p(&self) -> usize {
        self.p
    }

    fn column(&self, j: usize) -> Cow<'_, [f64]> {
        Cow::Borrowed(&self.data[j * self.n..(j + 1) * self.n])
    }

    fn inner_products_range(&self, r: &[f64], start: usize, out: &mut [f64]) {
        let cols = self.data[start * self.n..].chunks_exact(self.n);
        for (o, col) in out.iter_mut().zip(cols) {
            *o = dot(col, r);
        }
    }
}

/// Real columns followed by an explicit column-major dummy block, without
/// copying either.
#[derive(Debug, Clone, Copy)]
pub struct Stacked<'a, P> {
    x: &'a P,
    dummies: &'a [f64],
    l: usize,
}

impl<'a, P: ColumnProvider> Stacked<'a, P> {
    pub fn new(x: &'a P, dummies: &'a [f64]) -> Result<Self> {
        let n = x.n();
        if dummies.len() % n != 0 {
            return Err(VdError::ShadowShapeMismatch {
                expected: n * (dummies.len() / n),
                found: dummies.len(),
            });
        }
        Ok(Self {
            x,
            dummies,
            l: dummies.len() / n,
        })
    }

    pub fn dummy_count(&self) -> usize {
        self.l
    }
}

impl<P: ColumnProvider> ColumnProvider for Stacked<'_, P> {
    fn n(&self) -> usize {
        self.x.n()
    }

    fn p(&self) -> usize {
        self.x.p() + self.l
    }

    fn column(&self, j: usize) -> Cow<'_, [f64]> {
        let p = self.x.p();
        if j < p {
            self.x.column(j)
        } else {
            let n = self.n();
            Cow::Borrowed(&self.dummies[(j - p) * n..(j - p + 1) * n])
        }
    }

    fn inner_products_range(&self, r: &[f64], start: usize, out: &mut [f64]) {
        let p = self.x.p();
        let n = self.n();
        let split = p.saturating_sub(start).min(out.len());
        let (real, dummy) = out.split_at_mut(split);
        if !real.is_empty() {
            self.x.inner_products_range(r, start, real);
        }
        let first = start + split - p;
        for (o, col) in dummy.iter_mut().zip(self.dummies[first * n..].chunks_exact(n)) {
            *o = dot(col, r);
        }
    }
}
