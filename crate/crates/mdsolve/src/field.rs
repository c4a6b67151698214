//! Nodal solution storage.
//!
//! A [`NodalField`] holds the per-element tensor of nodal coefficients for
//! all variables, indexed as `(element, i, j, variable)` with `i, j` the
//! Gauss node indices in the two reference directions. The discrete
//! solution, its first time derivative `sigma` and the lifted gradients all
//! use this shape.

use ndarray::{Array4, ArrayView3, ArrayViewMut3};
use std::ops::{Deref, DerefMut};

/// Per-element tensor of nodal coefficients, shape
/// `(n_elements, n+1, n+1, n_var)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalField {
    pub data: Array4<f64>,
}

impl NodalField {
    pub fn zeros(n_elements: usize, n_nodes: usize, n_var: usize) -> Self {
        Self {
            data: Array4::zeros((n_elements, n_nodes, n_nodes, n_var)),
        }
    }

    pub fn zeros_like(other: &Self) -> Self {
        Self {
            data: Array4::zeros(other.data.raw_dim()),
        }
    }

    #[inline]
    pub fn n_elements(&self) -> usize {
        self.data.shape()[0]
    }

    #[inline]
    pub fn n_nodes(&self) -> usize {
        self.data.shape()[1]
    }

    #[inline]
    pub fn n_var(&self) -> usize {
        self.data.shape()[3]
    }

    /// Total number of scalar degrees of freedom.
    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// View of one element's nodal coefficients.
    #[inline]
    pub fn element(&self, e: usize) -> ArrayView3<'_, f64> {
        self.data.index_axis(ndarray::Axis(0), e)
    }

    #[inline]
    pub fn element_mut(&mut self, e: usize) -> ArrayViewMut3<'_, f64> {
        self.data.index_axis_mut(ndarray::Axis(0), e)
    }

    /// Flat slice over all entries (standard layout).
    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        self.data.as_slice().expect("nodal field is contiguous")
    }

    #[inline]
    pub fn as_slice_mut(&mut self) -> &mut [f64] {
        self.data.as_slice_mut().expect("nodal field is contiguous")
    }

    /// Euclidean norm over all entries.
    pub fn norm_l2(&self) -> f64 {
        self.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.as_slice().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|v| v.is_finite())
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &Self) {
        debug_assert_eq!(self.data.raw_dim(), other.data.raw_dim());
        let s = self.as_slice_mut();
        let o = other.as_slice();
        for (x, y) in s.iter_mut().zip(o) {
            *x += a * y;
        }
    }

    pub fn scale(&mut self, a: f64) {
        for x in self.as_slice_mut() {
            *x *= a;
        }
    }

    /// `self + a * other` without mutating either operand.
    pub fn add_scaled(&self, a: f64, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(a, other);
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add_scaled(-1.0, other)
    }
}

impl Deref for NodalField {
    type Target = Array4<f64>;
    fn deref(&self) -> &Self::Target {
        &self.data
    }
}

impl DerefMut for NodalField {
    fn deref_mut(&mut self) -> &mut Self::Target {
        &mut self.data
    }
}

/// The unknown of the extended implicit system: the state `w` paired with
/// the auxiliary variable `sigma` that is constrained to equal the discrete
/// first time derivative of `w`.
#[derive(Debug, Clone)]
pub struct ExtendedState {
    pub w: NodalField,
    pub sigma: NodalField,
}

impl ExtendedState {
    pub fn new(w: NodalField, sigma: NodalField) -> Self {
        debug_assert_eq!(w.data.raw_dim(), sigma.data.raw_dim());
        Self { w, sigma }
    }

    pub fn zeros_like(other: &Self) -> Self {
        Self {
            w: NodalField::zeros_like(&other.w),
            sigma: NodalField::zeros_like(&other.sigma),
        }
    }

    /// Flatten to `[w..., sigma...]`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * self.w.len());
        v.extend_from_slice(self.w.as_slice());
        v.extend_from_slice(self.sigma.as_slice());
        v
    }

    /// Rebuild from a flat `[w..., sigma...]` vector with the same shape as
    /// `template`.
    pub fn from_vec(template: &ExtendedState, v: &[f64]) -> Self {
        let n = template.w.len();
        assert_eq!(v.len(), 2 * n);
        let mut out = ExtendedState::zeros_like(template);
        out.w.as_slice_mut().copy_from_slice(&v[..n]);
        out.sigma.as_slice_mut().copy_from_slice(&v[n..]);
        out
    }

    pub fn norm_l2(&self) -> f64 {
        let ww: f64 = self.w.as_slice().iter().map(|v| v * v).sum();
        let ss: f64 = self.sigma.as_slice().iter().map(|v| v * v).sum();
        (ww + ss).sqrt()
    }

    pub fn axpy(&mut self, a: f64, other: &Self) {
        self.w.axpy(a, &other.w);
        self.sigma.axpy(a, &other.sigma);
    }

    pub fn is_finite(&self) -> bool {
        self.w.is_finite() && self.sigma.is_finite()
    }
}
