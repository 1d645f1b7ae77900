use nalgebra::{DMatrix, DVector};

use super::Graph;
use crate::linalg::sorted_symmetric_eigen;
use crate::{Error, Result};

/// Eigendecomposition `L = U diag(lambda) U^T` of a graph Laplacian.
///
/// Eigenvalues are ascending. Each eigenvector is signed so that its
/// largest-magnitude entry is positive; within a repeated eigenvalue the
/// solver's basis is kept as is.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

impl Spectrum {
    pub fn of(graph: &Graph) -> Result<Self> {
        let (eigenvalues, eigenvectors) = sorted_symmetric_eigen(&graph.laplacian())?;
        Ok(Spectrum { eigenvalues, eigenvectors })
    }

    pub fn n_nodes(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// The first `m` eigenvectors (lowest graph frequencies) as an `N x m`
    /// matrix.
    pub fn low_band(&self, m: usize) -> DMatrix<f64> {
        self.eigenvectors.columns(0, m.min(self.n_nodes())).into_owned()
    }

    /// Graph Fourier transform `U^T x`.
    pub fn gft(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_len(x.len())?;
        Ok(self.eigenvectors.tr_mul(x))
    }

    /// Inverse transform `U c`.
    pub fn igft(&self, coefficients: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_len(coefficients.len())?;
        Ok(&self.eigenvectors * coefficients)
    }

    /// `U diag(lambda) U^T`.
    pub fn reconstruct_laplacian(&self) -> DMatrix<f64> {
        let scaled = &self.eigenvectors * DMatrix::from_diagonal(&self.eigenvalues);
        scaled * self.eigenvectors.transpose()
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n_nodes() {
            return Err(Error::DimensionMismatch { expected: self.n_nodes(), got: len });
        }
        Ok(())
    }
}
