//! Online dictionary learning over a sliding window of reconstructed
//! signals.
//!
//! Each time step solves
//!
//! ```text
//! min_{A,C} ||X - A C||_F^2 + mu ||C||_1 + eta ||A - A_prev||_F^2
//! ```
//!
//! by one alternation: a closed-form dictionary update with the previous
//! coefficients held fixed, then ISTA on the coefficients.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::linalg::{l1_norm, lambda_max_psd};
use crate::{Error, Result};

/// Learning parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnerParams {
    /// Sparsity weight on the coefficients.
    pub mu: f64,
    /// Weight tying the dictionary to its previous value. Must be positive.
    pub eta: f64,
    /// Requested ISTA step; capped per call so that ISTA stays monotone.
    pub gamma: f64,
    /// Stop once `||C_{n+1} - C_n||_F^2 < epsilon`.
    pub epsilon: f64,
    pub max_iters: usize,
}

impl Default for LearnerParams {
    fn default() -> Self {
        LearnerParams { mu: 1.0, eta: 3.0, gamma: 1e-4, epsilon: 1e-8, max_iters: 1000 }
    }
}

impl LearnerParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0) {
            return Err(Error::InvalidParameter("eta must be positive"));
        }
        if !(self.mu >= 0.0) {
            return Err(Error::InvalidParameter("mu must be nonnegative"));
        }
        if !(self.gamma > 0.0) {
            return Err(Error::InvalidParameter("gamma must be positive"));
        }
        if !(self.epsilon > 0.0) || self.max_iters == 0 {
            return Err(Error::InvalidParameter("epsilon and max_iters must be positive"));
        }
        Ok(())
    }
}

/// The last `D` signals, oldest first.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalWindow {
    data: DMatrix<f64>,
}

impl SignalWindow {
    pub fn new(data: DMatrix<f64>) -> Result<Self> {
        if data.ncols() == 0 {
            return Err(Error::InvalidParameter("window needs at least one column"));
        }
        Ok(SignalWindow { data })
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.data.ncols() == 0
    }

    /// Drops the oldest column and appends `x` as the newest.
    pub fn push(&mut self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.data.nrows() {
            return Err(Error::DimensionMismatch { expected: self.data.nrows(), got: x.len() });
        }
        let d = self.data.ncols();
        for j in 1..d {
            let (mut left, right) = self.data.columns_range_pair_mut(j - 1, j);
            left.copy_from(&right);
        }
        self.data.set_column(d - 1, x);
        Ok(())
    }
}

/// Closed-form minimiser of `||X - A C||^2 + eta ||A - A_prev||^2` over `A`:
/// `(eta A_prev + X C^T)(eta I + C C^T)^{-1}`.
pub fn update_dictionary(
    previous: &DMatrix<f64>,
    window: &DMatrix<f64>,
    coefficients: &DMatrix<f64>,
    eta: f64,
) -> Result<DMatrix<f64>> {
    if !(eta > 0.0) {
        return Err(Error::InvalidParameter("eta must be positive"));
    }
    let (n, atoms) = previous.shape();
    if window.nrows() != n {
        return Err(Error::DimensionMismatch { expected: n, got: window.nrows() });
    }
    if coefficients.nrows() != atoms {
        return Err(Error::DimensionMismatch { expected: atoms, got: coefficients.nrows() });
    }
    if coefficients.ncols() != window.ncols() {
        return Err(Error::DimensionMismatch { expected: window.ncols(), got: coefficients.ncols() });
    }
    let rhs = previous * eta + window * coefficients.transpose();
    let mut system = coefficients * coefficients.transpose();
    for i in 0..atoms {
        system[(i, i)] += eta;
    }
    let chol = system.cholesky().ok_or(Error::SolveFailed("eta I + C C^T is not positive definite"))?;
    // A M = R with M symmetric  <=>  M A^T = R^T
    Ok(chol.solve(&rhs.transpose()).transpose())
}

/// Entrywise soft thresholding (the proximal map of `theta ||.||_1`).
pub fn soft_threshold(m: &DMatrix<f64>, theta: f64) -> DMatrix<f64> {
    m.map(|v| {
        if v >= theta {
            v - theta
        } else if v <= -theta {
            v + theta
        } else {
            0.0
        }
    })
}

/// `||X - A C||_F^2 + mu ||C||_1`.
pub fn sparse_coding_objective(dictionary: &DMatrix<f64>, window: &DMatrix<f64>, coefficients: &DMatrix<f64>, mu: f64) -> f64 {
    (window - dictionary * coefficients).norm_squared() + mu * l1_norm(coefficients)
}

/// Full online objective including the temporal term on the dictionary.
pub fn online_objective(
    dictionary: &DMatrix<f64>,
    coefficients: &DMatrix<f64>,
    window: &DMatrix<f64>,
    previous_dictionary: &DMatrix<f64>,
    params: &LearnerParams,
) -> f64 {
    sparse_coding_objective(dictionary, window, coefficients, params.mu)
        + params.eta * (dictionary - previous_dictionary).norm_squared()
}

/// Result of one ISTA run.
#[derive(Debug, Clone, PartialEq)]
pub struct IstaOutcome {
    pub coefficients: DMatrix<f64>,
    pub iterations: usize,
    /// False when `max_iters` was reached before the stopping rule fired.
    pub converged: bool,
    pub gamma_used: f64,
    /// `lambda_max(A^T A)` for the dictionary the run used.
    pub lambda_max: f64,
    /// Objective after each iterate (index 0 = starting point), when asked for.
    pub objective_trace: Option<Vec<f64>>,
}

/// Step actually used for a requested `gamma`: `min(gamma, 1 / (2 lambda_max(A^T A)))`.
///
/// The gradient of `||X - A C||^2` is `2 A^T (A C - X)`, whose Lipschitz
/// constant is `2 lambda_max`; a step no larger than its inverse makes every
/// ISTA iteration non-increasing in the objective.
pub fn safe_step(gamma: f64, lambda_max: f64) -> f64 {
    if lambda_max > 0.0 {
        gamma.min(1.0 / (2.0 * lambda_max))
    } else {
        gamma
    }
}

/// ISTA on `min_C ||X - A C||^2 + mu ||C||_1` from `start`:
/// `C <- S_{gamma mu}(C - 2 gamma A^T (A C - X))` until
/// `||C_{n+1} - C_n||^2 < epsilon` or `max_iters` iterations.
pub fn update_coefficients(
    dictionary: &DMatrix<f64>,
    window: &DMatrix<f64>,
    start: &DMatrix<f64>,
    params: &LearnerParams,
    trace: bool,
) -> Result<IstaOutcome> {
    let atoms = dictionary.ncols();
    if window.nrows() != dictionary.nrows() {
        return Err(Error::DimensionMismatch { expected: dictionary.nrows(), got: window.nrows() });
    }
    if start.nrows() != atoms || start.ncols() != window.ncols() {
        return Err(Error::DimensionMismatch { expected: atoms, got: start.nrows() });
    }
    let gram = dictionary.tr_mul(dictionary);
    let correlation = dictionary.tr_mul(window);
    let lambda_max = lambda_max_psd(&gram)?;
    let gamma = safe_step(params.gamma, lambda_max);
    let threshold = gamma * params.mu;
    let window_energy = window.norm_squared();

    // ||X - A C||^2 = ||X||^2 - 2 <C, A^T X> + <C, A^T A C>
    let objective = |c: &DMatrix<f64>| {
        let gc = &gram * c;
        (window_energy - 2.0 * c.dot(&correlation) + c.dot(&gc)).max(0.0) + params.mu * l1_norm(c)
    };
    let mut trace_values = trace.then(|| alloc::vec![objective(start)]);

    let mut current = start.clone();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < params.max_iters {
        let gradient = (&gram * &current - &correlation) * (2.0 * gamma);
        let next = soft_threshold(&(&current - gradient), threshold);
        let change = (&next - &current).norm_squared();
        current = next;
        iterations += 1;
        if let Some(values) = trace_values.as_mut() {
            values.push(objective(&current));
        }
        if change < params.epsilon {
            converged = true;
            break;
        }
    }
    Ok(IstaOutcome { coefficients: current, iterations, converged, gamma_used: gamma, lambda_max, objective_trace: trace_values })
}

/// What one call to [`OnlineDictionaryLearner::learn_step`] did.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnStep {
    pub t: usize,
    pub ista_iterations: usize,
    pub ista_converged: bool,
    pub gamma_used: f64,
}

/// Sliding-window dictionary learner.
#[derive(Debug, Clone)]
pub struct OnlineDictionaryLearner {
    params: LearnerParams,
    initial: DMatrix<f64>,
    dictionary: DMatrix<f64>,
    coefficients: DMatrix<f64>,
    window: SignalWindow,
}

impl OnlineDictionaryLearner {
    /// `initial_dictionary` is `N x r`, `initial_coefficients` `r x D` and
    /// `window` `N x D`.
    pub fn new(
        initial_dictionary: DMatrix<f64>,
        initial_coefficients: DMatrix<f64>,
        window: SignalWindow,
        params: LearnerParams,
    ) -> Result<Self> {
        params.validate()?;
        let (n, atoms) = initial_dictionary.shape();
        if window.as_matrix().nrows() != n {
            return Err(Error::DimensionMismatch { expected: n, got: window.as_matrix().nrows() });
        }
        if initial_coefficients.shape() != (atoms, window.len()) {
            return Err(Error::DimensionMismatch { expected: atoms, got: initial_coefficients.nrows() });
        }
        Ok(OnlineDictionaryLearner {
            params,
            dictionary: initial_dictionary.clone(),
            initial: initial_dictionary,
            coefficients: initial_coefficients,
            window,
        })
    }

    pub fn params(&self) -> &LearnerParams {
        &self.params
    }

    pub fn dictionary(&self) -> &DMatrix<f64> {
        &self.dictionary
    }

    pub fn coefficients(&self) -> &DMatrix<f64> {
        &self.coefficients
    }

    pub fn window(&self) -> &SignalWindow {
        &self.window
    }

    /// One step of the online learner for time index `t >= 1`.
    ///
    /// At `t = 1` the dictionary is the initial one; afterwards it is the
    /// closed-form update against the current window. The coefficients are
    /// then refined by ISTA starting from their previous value.
    pub fn learn_step(&mut self, t: usize) -> Result<LearnStep> {
        self.learn_step_traced(t, false).map(|(step, _)| step)
    }

    /// [`learn_step`](Self::learn_step) that also returns the ISTA objective
    /// trace when `trace` is set.
    pub fn learn_step_traced(&mut self, t: usize, trace: bool) -> Result<(LearnStep, Option<Vec<f64>>)> {
        if t == 0 {
            return Err(Error::InvalidParameter("time index starts at 1"));
        }
        let window = self.window.as_matrix();
        self.dictionary = if t == 1 {
            self.initial.clone()
        } else {
            update_dictionary(&self.dictionary, window, &self.coefficients, self.params.eta)?
        };
        let ista = update_coefficients(&self.dictionary, window, &self.coefficients, &self.params, trace)?;
        debug_assert!(ista.lambda_max == 0.0 || ista.gamma_used <= 1.0 / ista.lambda_max);
        self.coefficients = ista.coefficients;
        Ok((
            LearnStep { t, ista_iterations: ista.iterations, ista_converged: ista.converged, gamma_used: ista.gamma_used },
            ista.objective_trace,
        ))
    }

    /// Slides the window: `x` becomes the newest column.
    pub fn push_signal(&mut self, x: &DVector<f64>) -> Result<()> {
        self.window.push(x)
    }
}
