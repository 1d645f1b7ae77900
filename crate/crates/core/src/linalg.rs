//! Small dense linear-algebra helpers shared by the sampling, learning and
//! placement code.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::{Error, Result};

/// Relative singular-value cutoff used for pseudoinverses and range bases.
pub const PINV_CUTOFF: f64 = 1e-10;

const MAX_SWEEPS: usize = 100_000;

struct ThinSvd {
    u: DMatrix<f64>,
    singular_values: DVector<f64>,
    v: DMatrix<f64>,
}

// nalgebra's bidiagonal SVD can stop early on clustered singular values and
// return factors that do not reproduce the input; faer's does not.
fn svd(m: &DMatrix<f64>) -> Result<ThinSvd> {
    let (rows, cols) = m.shape();
    let fm = faer::Mat::<f64>::from_fn(rows, cols, |i, j| m[(i, j)]);
    let d = fm.thin_svd().map_err(|_| Error::EigenFailure)?;
    let (u, s, v) = (d.U(), d.S().column_vector(), d.V());
    let k = s.nrows();
    Ok(ThinSvd {
        u: DMatrix::from_fn(rows, k, |i, j| u[(i, j)]),
        singular_values: DVector::from_fn(k, |i, _| s[i]),
        v: DMatrix::from_fn(cols, k, |i, j| v[(i, j)]),
    })
}

/// Moore-Penrose pseudoinverse, dropping singular values below
/// `cutoff * sigma_max`.
///
/// Fails with [`Error::DegenerateSampling`] when nothing survives the cutoff
/// (in particular for the zero matrix).
pub fn pseudo_inverse(m: &DMatrix<f64>, cutoff: f64) -> Result<DMatrix<f64>> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(Error::DegenerateSampling);
    }
    let svd = svd(m)?;
    let sigma_max = svd.singular_values.max();
    if !(sigma_max > 0.0) {
        return Err(Error::DegenerateSampling);
    }
    let threshold = cutoff * sigma_max;
    let mut pinv = DMatrix::zeros(m.ncols(), m.nrows());
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > threshold {
            // pinv += v_i u_i^T / s
            pinv.ger(1.0 / s, &svd.v.column(i), &svd.u.column(i), 1.0);
        }
    }
    Ok(pinv)
}

/// Orthonormal basis of the column space of `m` (numerical rank from the
/// same relative cutoff as [`pseudo_inverse`]). Returns a matrix with zero
/// columns when `m` is empty or zero.
pub fn range_basis(m: &DMatrix<f64>, cutoff: f64) -> Result<DMatrix<f64>> {
    let rows = m.nrows();
    if m.ncols() == 0 || rows == 0 {
        return Ok(DMatrix::zeros(rows, 0));
    }
    let svd = svd(m)?;
    let sigma_max = svd.singular_values.max();
    if !(sigma_max > 0.0) {
        return Ok(DMatrix::zeros(rows, 0));
    }
    let threshold = cutoff * sigma_max;
    let mut order: alloc::vec::Vec<usize> = (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > threshold).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]).then(a.cmp(&b)));
    Ok(svd.u.select_columns(order.iter()))
}

/// The leading `width` left singular vectors of `x`, truncated further to the
/// numerical rank. Column signs follow [`fix_signs`].
pub fn leading_left_singular_vectors(x: &DMatrix<f64>, width: usize) -> Result<DMatrix<f64>> {
    let mut basis = range_basis(x, PINV_CUTOFF)?;
    if basis.ncols() > width {
        basis = basis.columns(0, width).into_owned();
    }
    fix_signs(&mut basis);
    Ok(basis)
}

/// Flip each column so that its largest-magnitude entry is positive (the
/// first one wins on exact magnitude ties).
pub fn fix_signs(m: &mut DMatrix<f64>) {
    for mut col in m.column_iter_mut() {
        let mut best = 0.0f64;
        let mut sign = 1.0;
        for &v in col.iter() {
            if v.abs() > best {
                best = v.abs();
                sign = if v < 0.0 { -1.0 } else { 1.0 };
            }
        }
        if sign < 0.0 {
            col.neg_mut();
        }
    }
}

/// Eigendecomposition of a symmetric matrix with eigenvalues sorted
/// ascending and eigenvector signs fixed by [`fix_signs`].
pub fn sorted_symmetric_eigen(m: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::NotSquare { rows: n, cols: m.ncols() });
    }
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, MAX_SWEEPS)
        .ok_or(Error::EigenFailure)?;
    let mut order: alloc::vec::Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = eig.eigenvectors.select_columns(order.iter());
    fix_signs(&mut vectors);
    Ok((values, vectors))
}

/// Largest eigenvalue of a symmetric positive semidefinite matrix.
pub fn lambda_max_psd(m: &DMatrix<f64>) -> Result<f64> {
    if m.nrows() == 0 {
        return Ok(0.0);
    }
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, MAX_SWEEPS)
        .ok_or(Error::EigenFailure)?;
    Ok(eig.eigenvalues.max().max(0.0))
}

/// Rows `rows` of `m`, in the given order.
pub fn select_rows(m: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), m.ncols(), |i, j| m[(rows[i], j)])
}

/// Sum of absolute values of all entries.
pub fn l1_norm(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|v| v.abs()).sum()
}
