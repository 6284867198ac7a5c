use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::SolverOptions;
use crate::error::{Error, Result};
use crate::objective::Objective;

/// A nonlinear least-squares problem in a flat parameter vector.
pub trait LeastSquares {
    fn residuals(&self, x: &[f64]) -> Result<DVector<f64>>;
    fn residuals_and_jacobian(&self, x: &[f64]) -> Result<(DVector<f64>, DMatrix<f64>)>;
}

impl LeastSquares for Objective<'_> {
    fn residuals(&self, x: &[f64]) -> Result<DVector<f64>> {
        Objective::residuals(self, x)
    }

    fn residuals_and_jacobian(&self, x: &[f64]) -> Result<(DVector<f64>, DMatrix<f64>)> {
        Objective::residuals_and_jacobian(self, x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Gradient,
    Step,
    Objective,
    Plateau,
    MaxIter,
    Degenerate,
}

impl Termination {
    pub fn name(self) -> &'static str {
        match self {
            Termination::Gradient => "gradient",
            Termination::Step => "step",
            Termination::Objective => "objective",
            Termination::Plateau => "plateau",
            Termination::MaxIter => "max-iter",
            Termination::Degenerate => "degenerate",
        }
    }
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// How the objective is normalised and whether the plateau rule applies.
#[derive(Debug, Clone, Copy)]
pub struct StopMode {
    /// Divisor turning the objective into a per-point value.
    pub points: usize,
    pub plateau: bool,
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Trial steps taken, accepted or not.
    pub iterations: usize,
    pub termination: Termination,
    /// Objective at the start and after every accepted step.
    pub history: Vec<f64>,
}

/// Damping ceiling relative to the largest diagonal entry of `JᵀJ`; beyond it
/// the step is numerically zero and the run stops with [`Termination::Step`].
const MAX_DAMPING_RATIO: f64 = 1e16;

/// Levenberg–Marquardt with damping `μI` added to `JᵀJ`.
///
/// Steps are accepted only when they strictly lower the objective. A trial
/// point whose residuals cannot be evaluated (degenerate frequency solve,
/// non-finite values) counts as a rejected step. Failures at the starting
/// point are fatal: degenerate returns [`Termination::Degenerate`], anything
/// else is an error.
pub fn minimise(problem: &dyn LeastSquares, x0: Vec<f64>, options: &SolverOptions, mode: StopMode) -> Result<Minimum> {
    options.validate()?;
    let per_point = 1.0 / mode.points.max(1) as f64;
    let mut x = DVector::from_vec(x0);

    let (mut r, mut jac) = match problem.residuals_and_jacobian(x.as_slice()) {
        Ok(v) => v,
        Err(Error::DegenerateTorus { condition }) => {
            log::debug!("degenerate starting point (condition {condition:e})");
            return Ok(Minimum {
                x: x.as_slice().to_vec(),
                objective: f64::INFINITY,
                iterations: 0,
                termination: Termination::Degenerate,
                history: Vec::new(),
            });
        }
        Err(e) => return Err(e),
    };
    let mut f = r.norm_squared();
    let mut history = vec![f];
    let (mut normal, mut gradient) = normal_equations(&jac, &r);
    let mut mu = options.initial_damping * max_diagonal(&normal);
    let mut iterations = 0;

    let termination = loop {
        if f * per_point <= options.objective_tolerance {
            break Termination::Objective;
        }
        if gradient.norm() <= options.gradient_tolerance {
            break Termination::Gradient;
        }
        if iterations >= options.max_iterations {
            break Termination::MaxIter;
        }
        let scale = max_diagonal(&normal);
        if mu > MAX_DAMPING_RATIO * scale.max(f64::MIN_POSITIVE) {
            break Termination::Step;
        }
        if mu == 0.0 {
            mu = options.initial_damping * scale.max(1.0);
        }

        let mut damped = normal.clone();
        for i in 0..damped.nrows() {
            damped[(i, i)] += mu;
        }
        iterations += 1;
        let Some(chol) = damped.cholesky() else {
            mu *= options.damping_increase;
            continue;
        };
        let step = -chol.solve(&gradient);
        if step.norm() <= options.step_tolerance * (x.norm() + options.step_tolerance) {
            break Termination::Step;
        }

        let trial = &x + &step;
        let trial_f = match problem.residuals(trial.as_slice()) {
            Ok(rt) => rt.norm_squared(),
            Err(Error::DegenerateTorus { .. } | Error::NonFinite(_)) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        if !(trial_f < f) {
            mu *= options.damping_increase;
            continue;
        }
        match problem.residuals_and_jacobian(trial.as_slice()) {
            Ok((rt, jt)) => {
                r = rt;
                jac = jt;
            }
            Err(Error::DegenerateTorus { .. } | Error::NonFinite(_)) => {
                mu *= options.damping_increase;
                continue;
            }
            Err(e) => return Err(e),
        }
        x = trial;
        f = r.norm_squared();
        (normal, gradient) = normal_equations(&jac, &r);
        mu *= options.damping_decrease;
        history.push(f);
        log::trace!("iteration {iterations}: objective {f:e}, damping {mu:e}");

        if mode.plateau && plateau_reached(&history, f * per_point, options) {
            break Termination::Plateau;
        }
    };

    Ok(Minimum {
        x: x.as_slice().to_vec(),
        objective: f,
        iterations,
        termination,
        history,
    })
}

fn max_diagonal(m: &DMatrix<f64>) -> f64 {
    m.diagonal().iter().fold(0.0, |a: f64, &b| a.max(b))
}

/// `(JᵀJ, Jᵀr)`.
fn normal_equations(jac: &DMatrix<f64>, r: &DVector<f64>) -> (DMatrix<f64>, DVector<f64>) {
    let jt = jac.transpose();
    let normal = &jt * jac;
    let gradient = &jt * r;
    (normal, gradient)
}

fn plateau_reached(history: &[f64], per_point: f64, options: &SolverOptions) -> bool {
    let k = options.plateau_window;
    if history.len() <= k || per_point >= options.plateau_objective {
        return false;
    }
    let now = history[history.len() - 1];
    let before = history[history.len() - 1 - k];
    before > 0.0 && (before - now) / before < options.plateau_threshold
}
