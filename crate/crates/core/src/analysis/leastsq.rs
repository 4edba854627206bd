//! Damped least squares (Gauss-Newton with adaptive Marquardt damping) for
//! the small dense fit problems of this crate. Steps are accepted only when
//! they lower the cost, so the objective is non-increasing by construction.

use nalgebra::{DMatrix, DVector};

pub(crate) struct Options {
    pub max_iter: usize,
    /// Converged when `||step|| <= rel_tol (||params|| + rel_tol)` on an
    /// accepted step.
    pub rel_tol: f64,
}

pub(crate) struct Solution {
    pub params: DVector<f64>,
    pub iterations: usize,
    pub residual_rms: f64,
    /// Diagonal of the parameter covariance in internal coordinates.
    pub covariance_diag: Vec<f64>,
    #[allow(dead_code)] // exercised by the objective-descent unit test
    pub cost_history: Vec<f64>,
}

pub(crate) enum SolveError {
    /// Normal equations singular at every damping level: some parameter has
    /// no effect on the residuals.
    Degenerate,
    NonConvergence {
        last_params: DVector<f64>,
        iterations: usize,
        residual_rms: f64,
    },
}

const LAMBDA_INIT: f64 = 1e-3;
const LAMBDA_MAX: f64 = 1e12;
const LAMBDA_SHRINK: f64 = 3.0;
const LAMBDA_GROW: f64 = 10.0;

/// `eval` fills the residual vector and, when given, the Jacobian
/// (d residual_i / d param_j) at `params`.
pub(crate) fn solve<E>(
    eval: E,
    n_residuals: usize,
    initial: DVector<f64>,
    opts: &Options,
) -> Result<Solution, SolveError>
where
    E: Fn(&DVector<f64>, &mut DVector<f64>, Option<&mut DMatrix<f64>>),
{
    let n_params = initial.len();
    let mut params = initial;
    let mut residuals = DVector::zeros(n_residuals);
    let mut trial_residuals = DVector::zeros(n_residuals);
    let mut jacobian = DMatrix::zeros(n_residuals, n_params);

    eval(&params, &mut residuals, Some(&mut jacobian));
    let mut cost = residuals.norm_squared();
    let mut cost_history = vec![cost];
    let mut lambda = LAMBDA_INIT;
    let mut iterations = 0;

    let converged = loop {
        if iterations >= opts.max_iter {
            break false;
        }
        iterations += 1;

        let jtj = jacobian.transpose() * &jacobian;
        let jtr = jacobian.transpose() * &residuals;

        let mut accepted_step_norm = None;
        loop {
            let mut damped = jtj.clone();
            for i in 0..n_params {
                damped[(i, i)] += lambda * jtj[(i, i)];
            }
            let step = match damped.cholesky() {
                Some(ch) => ch.solve(&(-&jtr)),
                None => {
                    lambda *= LAMBDA_GROW;
                    if lambda > LAMBDA_MAX {
                        return Err(SolveError::Degenerate);
                    }
                    continue;
                }
            };
            let trial = &params + &step;
            eval(&trial, &mut trial_residuals, None);
            let trial_cost = trial_residuals.norm_squared();
            if trial_cost.is_finite() && trial_cost <= cost {
                params = trial;
                std::mem::swap(&mut residuals, &mut trial_residuals);
                cost = trial_cost;
                cost_history.push(cost);
                lambda = (lambda / LAMBDA_SHRINK).max(1e-12);
                accepted_step_norm = Some(step.norm());
                break;
            }
            lambda *= LAMBDA_GROW;
            if lambda > LAMBDA_MAX {
                break;
            }
        }

        match accepted_step_norm {
            Some(step_norm) => {
                eval(&params, &mut residuals, Some(&mut jacobian));
                if step_norm <= opts.rel_tol * (params.norm() + opts.rel_tol) {
                    break true;
                }
            }
            None => {
                // no downhill step at any damping: accept as converged only
                // when the gradient has genuinely flattened out
                let grad_scale = jtr.amax();
                if grad_scale <= 1e-10 * (1.0 + cost) {
                    break true;
                }
                break false;
            }
        }
    };

    let residual_rms = (cost / n_residuals as f64).sqrt();
    if !converged {
        return Err(SolveError::NonConvergence {
            last_params: params,
            iterations,
            residual_rms,
        });
    }

    let covariance_diag = covariance(&jacobian, cost, n_residuals, n_params)
        .ok_or(SolveError::Degenerate)?;
    Ok(Solution {
        params,
        iterations,
        residual_rms,
        covariance_diag,
        cost_history,
    })
}

fn covariance(
    jacobian: &DMatrix<f64>,
    cost: f64,
    n_residuals: usize,
    n_params: usize,
) -> Option<Vec<f64>> {
    let jtj = jacobian.transpose() * jacobian;
    let inv = jtj.cholesky()?.inverse();
    let dof = n_residuals.saturating_sub(n_params).max(1) as f64;
    let sigma2 = cost / dof;
    Some((0..n_params).map(|i| sigma2 * inv[(i, i)]).collect())
}
