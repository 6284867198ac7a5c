//! Residual vector, frequency estimate and analytic Jacobian of the torus
//! fitting problem.
//!
//! Per grid point `θ_m` the residual block is, in order and only for active
//! terms (weight `λ_i > 0`), each scaled by `√λ_i`:
//!
//! ```text
//! E₁ = (∂p/∂θ) ω + ∂H/∂q                       n rows
//! E₂ = (∂q/∂θ) ω − ∂H/∂p                       n rows
//! E₃ = (∂H/∂q)(∂q/∂θ) + (∂H/∂p)(∂p/∂θ)         n rows
//! E₄ = H(θ) − H̄                                1 row
//! E₅ = J(θ) − J̄                                n rows
//! ```
//!
//! followed by `√ρ`-scaled consistency rows `½(a − (k·ω)d)` and
//! `½(b + (k·ω)c)` for every `(k, j)` with `k ∈ X ∩ Y`. The objective is the
//! squared norm of the whole vector.

mod evaluator;
mod frequency;

pub use evaluator::{Evaluation, Objective, PointState};
pub use frequency::{FrequencySolve, MAX_CONDITION};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dynamics::HamiltonianSystem;
use crate::error::{Error, Result};
use crate::model::{Mask, ThetaGrid, TorusModel};

/// Which quantity pins down the torus being fitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum Label {
    /// Frequencies from the least-squares solve; `J̄` (if used) is the grid mean.
    Unlabelled,
    /// Target actions `J̄`; requires `E₅`.
    Actions { actions: Vec<f64> },
    /// Fixed frequencies; no least-squares solve.
    Frequencies { frequencies: Vec<f64> },
}

/// Weights `λ₁..λ₅` of the error functions; zero disables a term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights(pub [f64; 5]);

impl Weights {
    pub fn flow_p(&self) -> f64 {
        self.0[0]
    }
    pub fn flow_q(&self) -> f64 {
        self.0[1]
    }
    pub fn energy_flow(&self) -> f64 {
        self.0[2]
    }
    pub fn energy(&self) -> f64 {
        self.0[3]
    }
    pub fn action(&self) -> f64 {
        self.0[4]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub weights: Weights,
    pub label: Label,
    /// Consistency weight `ρ`.
    #[serde(default)]
    pub consistency: f64,
    /// Fixed `H̄`; the grid mean is used when absent.
    #[serde(default)]
    pub energy_reference: Option<f64>,
}

impl ObjectiveSpec {
    /// `E₁..E₄` with unit weights; `H̄` is the grid mean.
    pub fn unlabelled() -> Self {
        Self {
            weights: Weights([1.0, 1.0, 1.0, 1.0, 0.0]),
            label: Label::Unlabelled,
            consistency: 0.0,
            energy_reference: None,
        }
    }

    /// `E₁..E₅` with unit weights and target actions.
    pub fn action_labelled(actions: &[f64]) -> Self {
        Self {
            weights: Weights([1.0; 5]),
            label: Label::Actions {
                actions: actions.to_vec(),
            },
            consistency: 0.0,
            energy_reference: None,
        }
    }

    /// `E₁, E₂` with unit weights at fixed frequencies.
    pub fn frequency_labelled(frequencies: &[f64]) -> Self {
        Self {
            weights: Weights([1.0, 1.0, 0.0, 0.0, 0.0]),
            label: Label::Frequencies {
                frequencies: frequencies.to_vec(),
            },
            consistency: 0.0,
            energy_reference: None,
        }
    }

    pub fn with_consistency(mut self, rho: f64) -> Self {
        self.consistency = rho;
        self
    }

    /// Action-labelled spec with `ρ = 0.01 / #C`.
    pub fn probing(actions: &[f64], mask: &Mask) -> Self {
        let shared = mask.shared_count().max(1) as f64;
        Self::action_labelled(actions).with_consistency(0.01 / shared)
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.weights.0.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidParameter(
                "objective weights must be finite and non-negative".into(),
            ));
        }
        if !(self.consistency.is_finite() && self.consistency >= 0.0) {
            return Err(Error::InvalidParameter("consistency weight must be >= 0".into()));
        }
        if self.weights.0.iter().all(|w| *w == 0.0) && self.consistency == 0.0 {
            return Err(Error::InvalidParameter("no active error function".into()));
        }
        match &self.label {
            Label::Unlabelled => {}
            Label::Actions { actions } => {
                if self.weights.action() <= 0.0 {
                    return Err(Error::InvalidParameter(
                        "action-labelled objective requires the action term (lambda5 > 0)".into(),
                    ));
                }
                if actions.len() != n || actions.iter().any(|j| !j.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "action label must have {n} finite entries"
                    )));
                }
            }
            Label::Frequencies { frequencies } => {
                if frequencies.len() != n || frequencies.iter().any(|w| !w.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "frequency label must have {n} finite entries"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Least-squares frequencies of `model` on `grid`.
pub fn solve_frequencies(model: &TorusModel, grid: &ThetaGrid, system: &dyn HamiltonianSystem) -> Result<FrequencySolve> {
    let objective = Objective::new(system, grid, ObjectiveSpec::unlabelled(), model.mask().clone())?;
    let states = objective.point_states(model.coefficients());
    objective.frequency_solve(&states)
}

pub fn residuals(
    model: &TorusModel,
    grid: &ThetaGrid,
    system: &dyn HamiltonianSystem,
    spec: &ObjectiveSpec,
) -> Result<DVector<f64>> {
    Objective::new(system, grid, spec.clone(), model.mask().clone())?.residuals(model.coefficients())
}

pub fn jacobian(
    model: &TorusModel,
    grid: &ThetaGrid,
    system: &dyn HamiltonianSystem,
    spec: &ObjectiveSpec,
) -> Result<DMatrix<f64>> {
    let objective = Objective::new(system, grid, spec.clone(), model.mask().clone())?;
    Ok(objective.residuals_and_jacobian(model.coefficients())?.1)
}

/// Population standard deviation of `H` over the grid.
pub fn sigma_h(model: &TorusModel, grid: &ThetaGrid, system: &dyn HamiltonianSystem) -> f64 {
    let energies: Vec<f64> = grid
        .iter()
        .map(|theta| {
            let pt = model.eval(theta);
            system.hamiltonian(&pt.q, &pt.p)
        })
        .collect();
    population_std(&energies)
}

pub(crate) fn population_std(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
}
