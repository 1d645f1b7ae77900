//! Node-wise sampling `c = I_M G (x + m)`, subspace reconstruction and the
//! greedy determinant-maximising choice of the sampling set.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::filter::SensingOperator;
use crate::linalg::{pseudo_inverse, select_rows, PINV_CUTOFF};
use crate::signal::noise_vector;
use crate::{Error, Result};

/// Sensor nodes `M` together with the sensing filter `G`.
#[derive(Debug, Clone, Copy)]
pub struct SamplingOperator<'a> {
    nodes: &'a [usize],
    sensing: &'a SensingOperator,
}

impl<'a> SamplingOperator<'a> {
    pub fn new(nodes: &'a [usize], sensing: &'a SensingOperator, n_nodes: usize) -> Result<Self> {
        check_node_set(nodes, n_nodes)?;
        Ok(SamplingOperator { nodes, sensing })
    }

    pub fn nodes(&self) -> &[usize] {
        self.nodes
    }

    pub fn sensing(&self) -> &SensingOperator {
        self.sensing
    }

    /// `I_M G x`.
    pub fn apply(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let gx = self.sensing.apply(x)?;
        Ok(DVector::from_iterator(self.nodes.len(), self.nodes.iter().map(|&i| gx[i])))
    }

    /// `S^T A = I_M G A`.
    pub fn apply_to_dictionary(&self, a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        Ok(select_rows(&self.sensing.apply_columns(a)?, self.nodes))
    }
}

pub(crate) fn check_node_set(nodes: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for &v in nodes {
        if v >= n {
            return Err(Error::NodeOutOfRange { index: v, n });
        }
        if core::mem::replace(&mut seen[v], true) {
            return Err(Error::DuplicateNode(v));
        }
    }
    Ok(())
}

/// Noisy observation `I_M G (x + m)` with `m ~ N(0, noise_variance I)`.
pub fn sample<R: Rng + ?Sized>(
    op: &SamplingOperator<'_>,
    x: &DVector<f64>,
    noise_variance: f64,
    rng: &mut R,
) -> Result<DVector<f64>> {
    let noisy = x + noise_vector(x.len(), noise_variance, rng)?;
    op.apply(&noisy)
}

/// Best recovery `x~ = A (S^T A)^+ c`.
///
/// The pseudoinverse drops singular values below `1e-10 * sigma_max`, so
/// any number of samples relative to dictionary columns is accepted.
pub fn reconstruct(op: &SamplingOperator<'_>, dictionary: &DMatrix<f64>, c: &DVector<f64>) -> Result<DVector<f64>> {
    let sampled = op.apply_to_dictionary(dictionary)?;
    reconstruct_from_sampled(dictionary, &sampled, c)
}

/// [`reconstruct`] with `S^T A` already formed.
pub fn reconstruct_from_sampled(
    dictionary: &DMatrix<f64>,
    sampled_dictionary: &DMatrix<f64>,
    c: &DVector<f64>,
) -> Result<DVector<f64>> {
    if c.len() != sampled_dictionary.nrows() {
        return Err(Error::DimensionMismatch { expected: sampled_dictionary.nrows(), got: c.len() });
    }
    let pinv = pseudo_inverse(sampled_dictionary, PINV_CUTOFF)?;
    Ok(dictionary * (pinv * c))
}

/// `Z = G A A^T G`.
pub fn build_z(dictionary: &DMatrix<f64>, sensing: &SensingOperator) -> Result<DMatrix<f64>> {
    let ga = sensing.apply_columns(dictionary)?;
    let mut z = &ga * ga.transpose();
    let zt = z.transpose();
    z += zt;
    z *= 0.5;
    Ok(z)
}

/// Increments at or below `RANK_FLOOR * max_i Z_ii` count as zero.
pub const RANK_FLOOR: f64 = 1e-12;

/// Incremental greedy selection over a PSD matrix `Z`.
///
/// Keeps a pivoted Cholesky factor of `Z_M`: after each pick the Schur
/// complements `Z_yy - Z_yM Z_M^{-1} Z_My` of every remaining node are
/// updated with one rank-one downdate, so choosing `K` nodes costs
/// `O(N K^2)` beyond reading `K` columns of `Z`.
#[derive(Debug, Clone)]
pub struct SelectionState<'a> {
    z: &'a DMatrix<f64>,
    chosen: Vec<usize>,
    increments: Vec<f64>,
    /// Columns of the factor `L` with `Z_{:,M} = L L_M^T`.
    factor: Vec<DVector<f64>>,
    residual: DVector<f64>,
    taken: Vec<bool>,
    floor: f64,
}

impl<'a> SelectionState<'a> {
    pub fn new(z: &'a DMatrix<f64>) -> Result<Self> {
        let n = z.nrows();
        if n != z.ncols() {
            return Err(Error::NotSquare { rows: n, cols: z.ncols() });
        }
        let residual = z.diagonal();
        let max_diag = residual.iter().copied().fold(0.0, f64::max);
        Ok(SelectionState {
            z,
            chosen: Vec::new(),
            increments: Vec::new(),
            factor: Vec::new(),
            residual,
            taken: vec![false; n],
            floor: RANK_FLOOR * max_diag,
        })
    }

    pub fn chosen(&self) -> &[usize] {
        &self.chosen
    }

    /// Schur increment recorded for each pick, equal to
    /// `det(Z_{M+y}) / det(Z_M)` at the time of the pick.
    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    /// Current increment of every node (zero for chosen nodes).
    pub fn residuals(&self) -> &DVector<f64> {
        &self.residual
    }

    /// Best remaining node and its increment; lowest index on ties.
    pub fn best(&self) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (y, &r) in self.residual.iter().enumerate() {
            if self.taken[y] {
                continue;
            }
            if best.is_none_or(|(_, b)| r > b) {
                best = Some((y, r));
            }
        }
        best
    }

    /// Appends `y` and downdates every other node's increment.
    pub fn push(&mut self, y: usize) -> Result<f64> {
        let n = self.z.nrows();
        if y >= n {
            return Err(Error::NodeOutOfRange { index: y, n });
        }
        if self.taken[y] {
            return Err(Error::DuplicateNode(y));
        }
        let increment = self.residual[y];
        self.taken[y] = true;
        self.chosen.push(y);
        self.increments.push(increment);
        if increment > self.floor {
            let mut column = self.z.column(y).into_owned();
            for l in &self.factor {
                column.axpy(-l[y], l, 1.0);
            }
            column /= libm::sqrt(increment);
            for (r, l) in self.residual.iter_mut().zip(column.iter()) {
                *r -= l * l;
            }
            self.factor.push(column);
        }
        self.residual[y] = 0.0;
        Ok(increment)
    }

    /// Picks the best remaining node, failing once no increment exceeds the
    /// numerical floor.
    pub fn push_best(&mut self) -> Result<(usize, f64)> {
        match self.best() {
            Some((y, r)) if r > self.floor => {
                self.push(y)?;
                Ok((y, r))
            }
            _ => Err(Error::RankDeficient { chosen: self.chosen.len(), requested: self.chosen.len() + 1 }),
        }
    }
}

/// Greedy maximisation of `det(Z_M)` over `|M| = k`.
///
/// The first node maximises `Z_yy`; each later node maximises its Schur
/// increment. Ties go to the lowest index.
pub fn greedy_select(z: &DMatrix<f64>, k: usize) -> Result<Vec<usize>> {
    Ok(greedy_select_with_increments(z, k)?.0)
}

/// [`greedy_select`] also returning the increment of every pick.
pub fn greedy_select_with_increments(z: &DMatrix<f64>, k: usize) -> Result<(Vec<usize>, Vec<f64>)> {
    if k > z.nrows() {
        return Err(Error::InvalidParameter("cannot select more nodes than exist"));
    }
    let mut state = SelectionState::new(z)?;
    for _ in 0..k {
        state.push_best().map_err(|_| Error::RankDeficient { chosen: state.chosen().len(), requested: k })?;
    }
    Ok((state.chosen, state.increments))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn identity_sampling_selects_rows() {
        let g = SensingOperator::Identity;
        let nodes = [2, 5];
        let op = SamplingOperator::new(&nodes, &g, 6).unwrap();
        let x = DVector::from_fn(6, |i, _| i as f64 * 1.5);
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0);
        let c = sample(&op, &x, 0.0, &mut rng).unwrap();
        assert_eq!(c, DVector::from_vec(vec![3.0, 7.5]));
        let zero = sample(&op, &DVector::zeros(6), 0.0, &mut rng).unwrap();
        assert_eq!(zero, DVector::zeros(2));
    }

    #[test]
    fn rejects_duplicate_nodes() {
        let g = SensingOperator::Identity;
        assert_eq!(SamplingOperator::new(&[1, 1], &g, 3).err(), Some(Error::DuplicateNode(1)));
        assert!(SamplingOperator::new(&[3], &g, 3).is_err());
    }

    #[test]
    fn zero_observation_reconstructs_zero() {
        let g = SensingOperator::Identity;
        let nodes = [0, 2];
        let op = SamplingOperator::new(&nodes, &g, 4).unwrap();
        let a = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 0.5, 1.0, 0.0, 1.0, 1.0, 1.0]);
        let x = reconstruct(&op, &a, &DVector::zeros(2)).unwrap();
        assert_eq!(x, DVector::zeros(4));
    }

    #[test]
    fn degenerate_sampling_reported() {
        let g = SensingOperator::Identity;
        let nodes = [0];
        let op = SamplingOperator::new(&nodes, &g, 2).unwrap();
        let a = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
        assert_eq!(reconstruct(&op, &a, &DVector::from_vec(vec![1.0])), Err(Error::DegenerateSampling));
    }

    #[test]
    fn diagonal_z_picks_largest_entries() {
        let z = DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, 3.0, 1.0, 2.0]));
        assert_eq!(greedy_select(&z, 2).unwrap(), vec![1, 3]);
        assert_eq!(greedy_select(&z, 1).unwrap(), vec![1]);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let z = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 2.0]));
        assert_eq!(greedy_select(&z, 1).unwrap(), vec![1]);
    }

    #[test]
    fn rank_one_z_runs_out() {
        let a = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let z = &a * a.transpose();
        assert_eq!(greedy_select(&z, 2), Err(Error::RankDeficient { chosen: 1, requested: 2 }));
    }

    #[test]
    fn z_of_identity_is_identity() {
        let z = build_z(&DMatrix::identity(3, 3), &SensingOperator::Identity).unwrap();
        assert_eq!(z, DMatrix::identity(3, 3));
        let a = DMatrix::from_column_slice(3, 1, &[1.0, -1.0, 2.0]);
        let z = build_z(&a, &SensingOperator::Identity).unwrap();
        assert_relative_eq!(z, &a * a.transpose(), epsilon = 1e-15);
    }
}
