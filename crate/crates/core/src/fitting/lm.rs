//! Box-constrained Levenberg–Marquardt with a central-difference Jacobian.

use nalgebra::{DMatrix, DVector};

/// Relative step of the numerical Jacobian.
pub const JACOBIAN_STEP: f64 = 1e-6;

/// A least-squares problem `min Σ (y_i − f_i(θ))²` with `lower <= θ <= upper`.
pub trait LmProblem {
    fn n_params(&self) -> usize;
    /// Model values `f(θ)` at every observation.
    fn model(&self, theta: &[f64]) -> Vec<f64>;
    fn observations(&self) -> &[f64];
    fn lower(&self) -> &[f64];
    fn upper(&self) -> &[f64];
    /// Typical magnitude of each parameter, used for step sizes and
    /// convergence tests when the parameter itself is near zero.
    fn scale(&self) -> &[f64];
}

#[derive(Clone, Debug)]
pub struct LmSettings {
    pub max_iterations: usize,
    pub initial_damping: f64,
    /// Stop when every scaled parameter step is below this.
    pub step_tolerance: f64,
    /// Stop when the scaled gradient norm is below this.
    pub gradient_tolerance: f64,
    /// Stop after two accepted steps that each lower the objective by less
    /// than this fraction.
    pub reduction_tolerance: f64,
}

impl Default for LmSettings {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            initial_damping: 1e-3,
            step_tolerance: 1e-12,
            gradient_tolerance: 1e-15,
            reduction_tolerance: 1e-12,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LmOutcome {
    pub theta: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after the start and after every accepted step.
    pub history: Vec<f64>,
}

fn objective(y: &[f64], f: &[f64]) -> f64 {
    y.iter().zip(f).map(|(a, b)| (a - b) * (a - b)).sum()
}

fn clamp(theta: &mut [f64], lower: &[f64], upper: &[f64]) {
    for ((t, lo), hi) in theta.iter_mut().zip(lower).zip(upper) {
        *t = t.clamp(*lo, *hi);
    }
}

/// Jacobian of the model, `∂f_i/∂θ_j`, by central differences that stay
/// inside the box.
pub fn jacobian<P: LmProblem + ?Sized>(problem: &P, theta: &[f64]) -> DMatrix<f64> {
    let n = problem.observations().len();
    let k = problem.n_params();
    let (lower, upper, scale) = (problem.lower(), problem.upper(), problem.scale());
    let mut jac = DMatrix::zeros(n, k);
    let mut probe = theta.to_vec();
    for j in 0..k {
        let h = JACOBIAN_STEP * theta[j].abs().max(scale[j]);
        let hi = (theta[j] + h).min(upper[j]);
        let lo = (theta[j] - h).max(lower[j]);
        if hi <= lo {
            continue;
        }
        probe[j] = hi;
        let f_hi = problem.model(&probe);
        probe[j] = lo;
        let f_lo = problem.model(&probe);
        probe[j] = theta[j];
        let width = hi - lo;
        for i in 0..n {
            jac[(i, j)] = (f_hi[i] - f_lo[i]) / width;
        }
    }
    jac
}

/// Minimizes the problem from `start`. The objective recorded in `history`
/// never increases: a trial step is only accepted when it lowers it.
pub fn levenberg_marquardt<P: LmProblem + ?Sized>(
    problem: &P,
    start: &[f64],
    settings: &LmSettings,
) -> LmOutcome {
    let (lower, upper, scale) = (problem.lower(), problem.upper(), problem.scale());
    let y = problem.observations();
    let k = problem.n_params();
    let mut theta = start.to_vec();
    clamp(&mut theta, lower, upper);
    let mut f = problem.model(&theta);
    let mut obj = objective(y, &f);
    let mut history = vec![obj];
    let mut lambda = settings.initial_damping;
    let mut converged = false;
    let mut iterations = 0;
    let mut stalled = 0;

    if !obj.is_finite() {
        return LmOutcome { theta, objective: obj, iterations, converged, history };
    }

    'outer: while iterations < settings.max_iterations {
        iterations += 1;
        let jac = jacobian(problem, &theta);
        let resid = DVector::from_iterator(y.len(), y.iter().zip(&f).map(|(a, b)| a - b));
        let jtj = jac.transpose() * &jac;
        let grad = jac.transpose() * &resid;

        // gradient test, ignoring components pushing against an active bound
        let mut gnorm = 0.0_f64;
        for j in 0..k {
            let g = grad[j] * theta[j].abs().max(scale[j]);
            let blocked = (theta[j] <= lower[j] && grad[j] < 0.0) || (theta[j] >= upper[j] && grad[j] > 0.0);
            if !blocked {
                gnorm = gnorm.max(g.abs());
            }
        }
        if gnorm <= settings.gradient_tolerance * (1.0 + obj) || obj == 0.0 {
            converged = true;
            break;
        }

        loop {
            let mut a = jtj.clone();
            for j in 0..k {
                let d = jtj[(j, j)].max(1e-300);
                a[(j, j)] += lambda * d;
            }
            let step = match a.clone().cholesky() {
                Some(ch) => ch.solve(&grad),
                None => match a.lu().solve(&grad) {
                    Some(s) => s,
                    None => {
                        lambda *= 10.0;
                        if lambda > 1e20 {
                            break 'outer;
                        }
                        continue;
                    }
                },
            };
            let mut trial: Vec<f64> = theta.iter().zip(step.iter()).map(|(t, s)| t + s).collect();
            clamp(&mut trial, lower, upper);
            let f_trial = problem.model(&trial);
            let obj_trial = objective(y, &f_trial);
            if obj_trial.is_finite() && obj_trial < obj {
                let small = (0..k).all(|j| {
                    (trial[j] - theta[j]).abs() <= settings.step_tolerance * theta[j].abs().max(scale[j])
                });
                // two consecutive negligible improvements end the search
                if obj - obj_trial <= settings.reduction_tolerance * obj {
                    stalled += 1;
                } else {
                    stalled = 0;
                }
                theta = trial;
                f = f_trial;
                obj = obj_trial;
                history.push(obj);
                lambda = (lambda / 3.0).max(1e-15);
                if small || stalled >= 2 {
                    converged = true;
                    break 'outer;
                }
                break;
            }
            lambda *= 4.0;
            if lambda > 1e16 {
                // no descent left at any damping: a stationary point of the
                // projected problem
                converged = true;
                break 'outer;
            }
        }
    }
    LmOutcome { theta, objective: obj, iterations, converged, history }
}
