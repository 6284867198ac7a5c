//! Levenberg–Marquardt fitting of torus models.

mod lm;

pub use lm::{minimise, LeastSquares, Minimum, StopMode, Termination};

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::dynamics::HamiltonianSystem;
use crate::error::{Error, Result};
use crate::model::{ModelDocument, ThetaGrid, TorusModel};
use crate::objective::{Label, Objective, ObjectiveSpec};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Initial damping as a fraction of the largest diagonal entry of `JᵀJ`.
    pub initial_damping: f64,
    pub damping_increase: f64,
    pub damping_decrease: f64,
    pub max_iterations: usize,
    /// Stop when `‖Jᵀr‖` falls below this.
    pub gradient_tolerance: f64,
    /// Stop when `‖δ‖ ≤ tol (‖x‖ + tol)`.
    pub step_tolerance: f64,
    /// Stop when the objective per grid point falls below this; 0 disables the rule.
    pub objective_tolerance: f64,
    /// Number of accepted steps the plateau rule looks back over.
    pub plateau_window: usize,
    /// Relative decrease over the window below which progress has stalled.
    pub plateau_threshold: f64,
    /// The plateau rule only fires below this objective per grid point.
    pub plateau_objective: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            initial_damping: 1e-3,
            damping_increase: 2.0,
            damping_decrease: 1.0 / 3.0,
            max_iterations: 500,
            gradient_tolerance: 1e-10,
            step_tolerance: 1e-13,
            objective_tolerance: 1e-8,
            plateau_window: 5,
            plateau_threshold: 1e-2,
            plateau_objective: 1e-4,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("initial_damping", self.initial_damping),
            ("gradient_tolerance", self.gradient_tolerance),
            ("step_tolerance", self.step_tolerance),
            ("plateau_threshold", self.plateau_threshold),
            ("plateau_objective", self.plateau_objective),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("solver option {name} must be > 0, got {v}")));
            }
        }
        if !(self.objective_tolerance.is_finite() && self.objective_tolerance >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "solver option objective_tolerance must be >= 0, got {}",
                self.objective_tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("solver option max_iterations must be >= 1".into()));
        }
        if !(self.damping_increase > 1.0) {
            return Err(Error::InvalidParameter("solver option damping_increase must be > 1".into()));
        }
        if !(self.damping_decrease > 0.0 && self.damping_decrease < 1.0) {
            return Err(Error::InvalidParameter(
                "solver option damping_decrease must be in (0, 1)".into(),
            ));
        }
        if self.plateau_window < 2 {
            return Err(Error::InvalidParameter("solver option plateau_window must be >= 2".into()));
        }
        Ok(())
    }
}

/// Outcome of one fit, with diagnostics recomputed from the final model.
#[derive(Debug, Clone)]
pub struct FitReport {
    pub model: TorusModel,
    pub objective: f64,
    pub sigma: f64,
    pub omega: Vec<f64>,
    /// Grid mean of the model actions.
    pub actions: Vec<f64>,
    pub mean_energy: f64,
    pub consistency: f64,
    pub iterations: usize,
    pub termination: Termination,
    pub spec: ObjectiveSpec,
    pub options: SolverOptions,
    pub grid: ThetaGrid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReportDocument {
    pub schema_version: u32,
    pub objective: f64,
    pub sigma: f64,
    pub omega: Vec<f64>,
    pub actions: Vec<f64>,
    pub mean_energy: f64,
    pub consistency: f64,
    pub iterations: usize,
    pub termination: Termination,
    pub spec: ObjectiveSpec,
    pub options: SolverOptions,
    pub grid: ThetaGrid,
    pub model: ModelDocument,
}

impl FitReport {
    pub fn objective_per_point(&self) -> f64 {
        self.objective / self.grid.len() as f64
    }

    pub fn to_document(&self) -> FitReportDocument {
        FitReportDocument {
            schema_version: REPORT_SCHEMA_VERSION,
            objective: self.objective,
            sigma: self.sigma,
            omega: self.omega.clone(),
            actions: self.actions.clone(),
            mean_energy: self.mean_energy,
            consistency: self.consistency,
            iterations: self.iterations,
            termination: self.termination,
            spec: self.spec.clone(),
            options: self.options.clone(),
            grid: self.grid.clone(),
            model: self.model.to_document(),
        }
    }

    pub fn from_document(doc: FitReportDocument) -> Result<Self> {
        if doc.schema_version != REPORT_SCHEMA_VERSION {
            return Err(Error::Schema {
                found: doc.schema_version,
                expected: REPORT_SCHEMA_VERSION,
            });
        }
        Ok(Self {
            model: TorusModel::try_from(doc.model)?,
            objective: doc.objective,
            sigma: doc.sigma,
            omega: doc.omega,
            actions: doc.actions,
            mean_energy: doc.mean_energy,
            consistency: doc.consistency,
            iterations: doc.iterations,
            termination: doc.termination,
            spec: doc.spec,
            options: doc.options,
            grid: doc.grid,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_document(serde_json::from_str(s)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Fit `init` to `system` on `grid`.
///
/// Runs to the labelled tolerances; with an unlabelled spec the plateau rule
/// is active as well.
pub fn fit(
    system: &dyn HamiltonianSystem,
    grid: &ThetaGrid,
    spec: &ObjectiveSpec,
    init: &TorusModel,
    options: &SolverOptions,
) -> Result<FitReport> {
    let objective = Objective::new(system, grid, spec.clone(), init.mask().clone())?;
    let mode = StopMode {
        points: grid.len(),
        plateau: spec.label == Label::Unlabelled,
    };
    let min = minimise(&objective, init.coefficients().to_vec(), options, mode)?;
    let model = TorusModel::with_coefficients(init.mask().clone(), min.x)?;
    report(&objective, model, min.iterations, min.termination, options)
}

/// Unlabelled fit with `E₁..E₄` at unit weight, stopping at the bottom of the
/// valley of tori.
pub fn fit_unlabelled(
    system: &dyn HamiltonianSystem,
    grid: &ThetaGrid,
    init: &TorusModel,
    options: &SolverOptions,
) -> Result<FitReport> {
    fit(system, grid, &ObjectiveSpec::unlabelled(), init, options)
}

fn report(
    objective: &Objective,
    model: TorusModel,
    iterations: usize,
    termination: Termination,
    options: &SolverOptions,
) -> Result<FitReport> {
    let (objective_value, sigma, omega, actions, mean_energy, consistency) =
        match objective.evaluate(model.coefficients()) {
            Ok(ev) => (ev.objective, ev.sigma, ev.omega, ev.mean_actions, ev.mean_energy, ev.consistency),
            Err(Error::DegenerateTorus { .. }) => {
                let n = model.dim();
                let nan = vec![f64::NAN; n];
                (f64::INFINITY, f64::NAN, nan.clone(), nan, f64::NAN, f64::NAN)
            }
            Err(e) => return Err(e),
        };
    Ok(FitReport {
        model,
        objective: objective_value,
        sigma,
        omega,
        actions,
        mean_energy,
        consistency,
        iterations,
        termination,
        spec: objective.spec().clone(),
        options: options.clone(),
        grid: objective.grid().clone(),
    })
}
