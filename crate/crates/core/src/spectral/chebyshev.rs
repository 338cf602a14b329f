//! Chebyshev expansion of spectral kernels and its application to delta
//! signals through sparse matrix-vector products.

use std::f64::consts::PI;

use super::SpectralError;
use crate::graph::Laplacian;
use crate::wavelet::{WaveletColumn, WaveletPath};

/// A degree-`order` Chebyshev expansion of a kernel on `[0, bound]`.
///
/// `coeffs[0]` already carries the usual one-half factor, so the expansion is
/// `Σ_k coeffs[k] T_k(2λ/bound - 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevFilter {
    pub order: usize,
    pub coeffs: Vec<f64>,
    pub bound: f64,
    pub scale: f64,
    /// Max absolute error against the kernel on a uniform grid of `[0, bound]`.
    pub max_error: f64,
}

impl ChebyshevFilter {
    /// Expansion of the heat kernel `λ ↦ e^{-sλ}`.
    pub fn heat(scale: f64, bound: f64, order: usize) -> Result<Self, SpectralError> {
        if !(scale >= 0.0) || !scale.is_finite() {
            return Err(SpectralError::InvalidFilter(format!("scale must be >= 0, got {scale}")));
        }
        Self::from_kernel(move |lam| (-scale * lam).exp(), bound, order, scale)
    }

    /// Expansion of an arbitrary kernel, computed by Gauss-Chebyshev
    /// quadrature at `max(order + 1, 64)` nodes.
    pub fn from_kernel(
        kernel: impl Fn(f64) -> f64,
        bound: f64,
        order: usize,
        scale: f64,
    ) -> Result<Self, SpectralError> {
        if !(bound > 0.0) || !bound.is_finite() {
            return Err(SpectralError::InvalidFilter(format!("bound must be > 0, got {bound}")));
        }
        if order < 1 {
            return Err(SpectralError::InvalidFilter("order must be >= 1".into()));
        }
        let nodes = (order + 1).max(64);
        let half = bound / 2.0;
        let samples: Vec<(f64, f64)> = (0..nodes)
            .map(|j| {
                let theta = PI * (j as f64 + 0.5) / nodes as f64;
                (theta, kernel(half * (theta.cos() + 1.0)))
            })
            .collect();
        let mut coeffs: Vec<f64> = (0..=order)
            .map(|k| {
                let sum: f64 = samples.iter().map(|&(th, f)| f * (k as f64 * th).cos()).sum();
                2.0 * sum / nodes as f64
            })
            .collect();
        coeffs[0] /= 2.0;

        let mut filter = Self {
            order,
            coeffs,
            bound,
            scale,
            max_error: 0.0,
        };
        let grid = (4 * order).max(2048);
        filter.max_error = (0..=grid)
            .map(|i| {
                let lam = bound * i as f64 / grid as f64;
                (filter.evaluate(lam) - kernel(lam)).abs()
            })
            .fold(0.0, f64::max);
        Ok(filter)
    }

    /// Evaluates the expansion at `lambda` by Clenshaw's recurrence.
    pub fn evaluate(&self, lambda: f64) -> f64 {
        let x = 2.0 * lambda / self.bound - 1.0;
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = c + 2.0 * x * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        self.coeffs[0] + x * b1 - b2
    }
}

/// Reusable buffers for [`ChebyshevWorkspace::apply`].
///
/// The recurrence only touches the growing hop-neighborhood of the source
/// node, so the cost per column is proportional to the edges inside the
/// `order`-hop ball rather than to the whole graph.
#[derive(Debug, Clone)]
pub struct ChebyshevWorkspace {
    prev: Vec<f64>,
    cur: Vec<f64>,
    next: Vec<f64>,
    acc: Vec<f64>,
    active: Vec<usize>,
    marked: Vec<bool>,
}

impl ChebyshevWorkspace {
    pub fn new(n: usize) -> Self {
        Self {
            prev: vec![0.0; n],
            cur: vec![0.0; n],
            next: vec![0.0; n],
            acc: vec![0.0; n],
            active: Vec::new(),
            marked: vec![false; n],
        }
    }

    /// Column `a` of the filtered operator, `P(L) δ_a`.
    ///
    /// With `truncate = Some(eps)` coefficients with `|Ψ| < eps` are dropped
    /// and the rest rescaled so the column keeps unit mass.
    pub fn apply(
        &mut self,
        lap: &Laplacian,
        filter: &ChebyshevFilter,
        a: usize,
        truncate: Option<f64>,
    ) -> Result<WaveletColumn, SpectralError> {
        let n = lap.dim();
        if a >= n {
            return Err(SpectralError::NodeOutOfRange { index: a, n });
        }
        if self.marked.len() != n {
            *self = Self::new(n);
        }
        let l = lap.matrix();
        let alpha = 2.0 / filter.bound;

        self.active.clear();
        self.active.push(a);
        self.marked[a] = true;
        self.cur[a] = 1.0;
        self.acc[a] = filter.coeffs[0];
        let mut frontier_start = 0;
        let mut violation = false;

        for k in 1..=filter.order {
            // Grow the support by one hop.
            let frontier_end = self.active.len();
            if frontier_end < n {
                for idx in frontier_start..frontier_end {
                    let u = self.active[idx];
                    for &v in l.row(u).0 {
                        if !self.marked[v] {
                            self.marked[v] = true;
                            self.active.push(v);
                        }
                    }
                }
            }
            frontier_start = frontier_end;

            // next = 2 L̃ cur - prev (T_1 = L̃ T_0), with L̃ = αL - I.
            let two = if k == 1 { 1.0 } else { 2.0 };
            let mut norm2 = 0.0;
            for &i in &self.active {
                let (cols, vals) = l.row(i);
                let lx: f64 = cols.iter().zip(vals).map(|(&j, &v)| v * self.cur[j]).sum();
                let scaled = alpha * lx - self.cur[i];
                let prev = if k == 1 { 0.0 } else { self.prev[i] };
                let value = two * scaled - prev;
                self.next[i] = value;
                norm2 += value * value;
                self.acc[i] += filter.coeffs[k] * value;
            }
            if norm2 > 1.0 + 1e-6 {
                violation = true;
                break;
            }
            std::mem::swap(&mut self.prev, &mut self.cur);
            std::mem::swap(&mut self.cur, &mut self.next);
        }

        let mut indices: Vec<usize> = Vec::with_capacity(self.active.len());
        let mut values: Vec<f64> = Vec::with_capacity(self.active.len());
        let mut sorted = std::mem::take(&mut self.active);
        sorted.sort_unstable();
        for &i in &sorted {
            let v = self.acc[i];
            if truncate.is_none_or(|eps| v.abs() >= eps) {
                indices.push(i);
                values.push(v);
            }
            self.prev[i] = 0.0;
            self.cur[i] = 0.0;
            self.next[i] = 0.0;
            self.acc[i] = 0.0;
            self.marked[i] = false;
        }
        sorted.clear();
        self.active = sorted;

        if violation {
            return Err(SpectralError::BoundViolation {
                bound: filter.bound,
                node: a,
            });
        }
        if truncate.is_some() {
            let mass: f64 = values.iter().sum();
            if mass != 0.0 {
                for v in values.iter_mut() {
                    *v /= mass;
                }
            }
        }
        Ok(WaveletColumn::sparse(
            a,
            filter.scale,
            n,
            indices,
            values,
            WaveletPath::Chebyshev,
        ))
    }
}

/// Allocating convenience wrapper around [`ChebyshevWorkspace::apply`]
/// without truncation.
pub fn apply_filter(
    lap: &Laplacian,
    filter: &ChebyshevFilter,
    a: usize,
) -> Result<WaveletColumn, SpectralError> {
    ChebyshevWorkspace::new(lap.dim()).apply(lap, filter, a, None)
}
