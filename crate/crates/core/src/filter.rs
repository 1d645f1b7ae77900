//! Graph filters used as the sensing operator `G`.
//!
//! A filter is a spectral response `zeta(lambda)` on `[0, lambda_max]`. It can
//! be applied exactly through the Laplacian eigenbasis, or as an order-`J`
//! Chebyshev polynomial in `L`, which only mixes values within `J` hops.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, DVector};

use crate::graph::{Graph, Spectrum};
use crate::{Error, Result};

/// Spectral response of a filter.
#[derive(Debug, Clone, Copy)]
pub enum SpectralResponse {
    /// `zeta(lambda) = 1`.
    Identity,
    /// `zeta(lambda) = cos(pi/2 * lambda / lambda_max)`.
    LowpassCosine,
    /// `zeta(lambda, lambda_max)`, evaluated by the supplied function.
    Custom(fn(f64, f64) -> f64),
}

impl PartialEq for SpectralResponse {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (SpectralResponse::Identity, SpectralResponse::Identity) => true,
            (SpectralResponse::LowpassCosine, SpectralResponse::LowpassCosine) => true,
            (SpectralResponse::Custom(a), SpectralResponse::Custom(b)) => core::ptr::fn_addr_eq(*a, *b),
            _ => false,
        }
    }
}

impl SpectralResponse {
    pub fn eval(&self, lambda: f64, lambda_max: f64) -> f64 {
        match self {
            SpectralResponse::Identity => 1.0,
            SpectralResponse::LowpassCosine => {
                if lambda_max <= 0.0 {
                    1.0
                } else {
                    libm::cos(FRAC_PI_2 * lambda / lambda_max)
                }
            }
            SpectralResponse::Custom(f) => f(lambda, lambda_max),
        }
    }
}

/// A spectral response plus the Chebyshev order used to apply it
/// (`0` = exact application).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    pub response: SpectralResponse,
    pub chebyshev_order: usize,
}

impl FilterSpec {
    pub fn exact(response: SpectralResponse) -> Self {
        FilterSpec { response, chebyshev_order: 0 }
    }

    pub fn chebyshev(response: SpectralResponse, order: usize) -> Self {
        FilterSpec { response, chebyshev_order: order }
    }
}

/// `U diag(zeta(lambda_i)) U^T`.
pub fn exact_filter_matrix(spectrum: &Spectrum, response: SpectralResponse) -> DMatrix<f64> {
    let lambda_max = spectrum.lambda_max();
    let u = spectrum.eigenvectors();
    let gains = spectrum.eigenvalues().map(|l| response.eval(l, lambda_max));
    let scaled = u * DMatrix::from_diagonal(&gains);
    let mut g = scaled * u.transpose();
    // symmetrise away rounding so downstream code can rely on G = G^T
    let gt = g.transpose();
    g += gt;
    g *= 0.5;
    g
}

/// Truncated Chebyshev expansion of a spectral response on `[0, lambda_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevFilter {
    coefficients: Vec<f64>,
    lambda_max: f64,
}

impl ChebyshevFilter {
    /// Fits `order + 1` coefficients by cosine quadrature at `order + 1`
    /// Chebyshev nodes.
    pub fn fit(response: SpectralResponse, order: usize, lambda_max: f64) -> Result<Self> {
        if order < 1 {
            return Err(Error::InvalidParameter("chebyshev order must be at least 1"));
        }
        if !(lambda_max > 0.0) || !lambda_max.is_finite() {
            return Err(Error::InvalidParameter("lambda_max must be positive"));
        }
        let points = order + 1;
        let half = lambda_max / 2.0;
        let samples: Vec<(f64, f64)> = (0..points)
            .map(|j| {
                let theta = PI * (j as f64 + 0.5) / points as f64;
                (theta, response.eval(half * (libm::cos(theta) + 1.0), lambda_max))
            })
            .collect();
        let coefficients = (0..=order)
            .map(|k| {
                let sum: f64 = samples.iter().map(|&(theta, f)| f * libm::cos(k as f64 * theta)).sum();
                2.0 * sum / points as f64
            })
            .collect();
        Ok(ChebyshevFilter { coefficients, lambda_max })
    }

    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    /// Value of the fitted polynomial at `lambda`.
    pub fn eval(&self, lambda: f64) -> f64 {
        let y = 2.0 * lambda / self.lambda_max - 1.0;
        let (mut prev, mut cur) = (1.0, y);
        let mut acc = 0.5 * self.coefficients[0] + self.coefficients[1] * y;
        for &c in &self.coefficients[2..] {
            let next = 2.0 * y * cur - prev;
            acc += c * next;
            prev = cur;
            cur = next;
        }
        acc
    }

    /// Applies the polynomial in `L` to `x` with the three-term recurrence
    /// on the shifted Laplacian `(2 / lambda_max) L - I`.
    pub fn apply(&self, graph: &Graph, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != graph.n_nodes() {
            return Err(Error::DimensionMismatch { expected: graph.n_nodes(), got: x.len() });
        }
        let scale = 2.0 / self.lambda_max;
        let shifted = |v: &DVector<f64>| {
            let mut out = graph.laplacian_apply(v);
            out *= scale;
            out -= v;
            out
        };
        let mut prev = x.clone();
        let mut cur = shifted(x);
        let mut acc = x * (0.5 * self.coefficients[0]);
        acc.axpy(self.coefficients[1], &cur, 1.0);
        for &c in &self.coefficients[2..] {
            let mut next = shifted(&cur);
            next *= 2.0;
            next -= &prev;
            acc.axpy(c, &next, 1.0);
            prev = cur;
            cur = next;
        }
        Ok(acc)
    }
}

/// Applies `spec` to `x`. An order of zero goes through the eigenbasis.
pub fn chebyshev_filter_apply(
    graph: &Graph,
    spectrum: &Spectrum,
    spec: &FilterSpec,
    x: &DVector<f64>,
) -> Result<DVector<f64>> {
    let filter = ChebyshevFilter::fit(spec.response, spec.chebyshev_order, spectrum.lambda_max())?;
    filter.apply(graph, x)
}

/// The sensing operator `G` in the form the pipeline applies it.
#[derive(Debug, Clone, PartialEq)]
pub enum SensingOperator {
    Identity,
    /// Explicit symmetric `N x N` matrix.
    Dense(DMatrix<f64>),
    /// Polynomial filter applied through sparse Laplacian products.
    Chebyshev { graph: Graph, filter: ChebyshevFilter },
}

impl SensingOperator {
    /// Builds the operator for `spec`: exact when the order is zero,
    /// otherwise a Chebyshev polynomial.
    pub fn build(graph: &Graph, spectrum: &Spectrum, spec: &FilterSpec) -> Result<Self> {
        if spec.response == SpectralResponse::Identity {
            return Ok(SensingOperator::Identity);
        }
        if spec.chebyshev_order == 0 {
            return Ok(SensingOperator::Dense(exact_filter_matrix(spectrum, spec.response)));
        }
        let filter = ChebyshevFilter::fit(spec.response, spec.chebyshev_order, spectrum.lambda_max())?;
        Ok(SensingOperator::Chebyshev { graph: graph.clone(), filter })
    }

    pub fn apply(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        match self {
            SensingOperator::Identity => Ok(x.clone()),
            SensingOperator::Dense(g) => {
                if g.ncols() != x.len() {
                    return Err(Error::DimensionMismatch { expected: g.ncols(), got: x.len() });
                }
                Ok(g * x)
            }
            SensingOperator::Chebyshev { graph, filter } => filter.apply(graph, x),
        }
    }

    /// `G A`, column by column.
    pub fn apply_columns(&self, a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        match self {
            SensingOperator::Identity => Ok(a.clone()),
            SensingOperator::Dense(g) => {
                if g.ncols() != a.nrows() {
                    return Err(Error::DimensionMismatch { expected: g.ncols(), got: a.nrows() });
                }
                Ok(g * a)
            }
            SensingOperator::Chebyshev { .. } => {
                let mut out = DMatrix::zeros(a.nrows(), a.ncols());
                for (j, col) in a.column_iter().enumerate() {
                    out.set_column(j, &self.apply(&col.into_owned())?);
                }
                Ok(out)
            }
        }
    }

    /// Dense `N x N` form.
    pub fn to_dense(&self, n: usize) -> Result<DMatrix<f64>> {
        match self {
            SensingOperator::Dense(g) => Ok(g.clone()),
            _ => self.apply_columns(&DMatrix::identity(n, n)),
        }
    }
}
