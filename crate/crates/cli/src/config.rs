use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use torus_core::dynamics::SystemConfig;
use torus_core::model::{Family, ThetaGrid, TorusModel};
use torus_core::objective::{ObjectiveSpec, Weights};
use torus_core::solver::SolverOptions;
use torus_core::verify::IntegratorOptions;

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub output: PathBuf,
    pub system: SystemConfig,
    pub model: ModelConfig,
    pub grid: GridConfig,
    pub objective: ObjectiveConfig,
    pub solver: SolverOptions,
    pub probe: ProbeConfig,
    pub sweep: SweepConfig,
    pub section: SectionConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            output: PathBuf::from("out"),
            system: SystemConfig::logarithmic_default(),
            model: ModelConfig::default(),
            grid: GridConfig::default(),
            objective: ObjectiveConfig::default(),
            solver: SolverOptions::default(),
            probe: ProbeConfig::default(),
            sweep: SweepConfig::default(),
            section: SectionConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub family: Family,
    /// Harmonic order `N`.
    pub order: u32,
    /// Multiplies every coefficient of the canned initial guess.
    pub init_scale: f64,
    /// Start from a saved model or fit report instead of the canned guess.
    pub init: Option<PathBuf>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            family: Family::Box,
            order: 16,
            init_scale: 1.0,
            init: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    /// Points per angle before symmetry reduction.
    pub points: usize,
    pub reduced: bool,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { points: 32, reduced: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelKind {
    Unlabelled,
    Actions,
    Frequencies,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObjectiveConfig {
    pub label: LabelKind,
    pub actions: Option<Vec<f64>>,
    pub frequencies: Option<Vec<f64>>,
    /// `λ₁..λ₅`; defaults depend on the label.
    pub weights: Option<[f64; 5]>,
    pub consistency: f64,
    pub energy_reference: Option<f64>,
}

impl Default for ObjectiveConfig {
    fn default() -> Self {
        Self {
            label: LabelKind::Unlabelled,
            actions: None,
            frequencies: None,
            weights: None,
            consistency: 0.0,
            energy_reference: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeConfig {
    /// Lattice spacing `ΔJ` on every axis.
    pub spacing: f64,
    /// Largest action on every axis.
    pub extent: f64,
    /// Largest accepted total objective.
    pub threshold: f64,
    /// Consistency weight `ρ`; `0.01 / #C` when absent.
    pub consistency: Option<f64>,
    /// Seed fit report; an unlabelled fit from the model settings otherwise.
    pub seed: Option<PathBuf>,
    /// Iteration cap of every lattice fit.
    pub max_iterations: usize,
    pub parallel: bool,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            spacing: 0.05,
            extent: 1.3,
            threshold: 1e-6,
            consistency: None,
            seed: None,
            max_iterations: 100,
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub orders: Vec<u32>,
    pub frequencies: Vec<f64>,
    /// Angle grid size `M` before symmetry reduction.
    pub points: usize,
    /// Radius of the initial circle in the `qp`-plane.
    pub radius: f64,
    /// Largest relative error of `H̄` against `H(ω)` counted as converged.
    pub energy_tolerance: f64,
    /// Objective-per-point stop for sweep fits.
    pub objective_tolerance: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            orders: vec![16, 64, 128],
            frequencies: vec![0.2, 0.4, 1.0, 2.0],
            points: 1024,
            radius: 1.0,
            energy_tolerance: 0.1,
            objective_tolerance: 1e-28,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SectionConfig {
    /// Fit report or model file to section.
    pub model: Option<PathBuf>,
    pub crossings: usize,
    pub theta0: Vec<f64>,
    pub tolerance: f64,
    pub max_time: f64,
    /// Also write sections after `fit`.
    pub after_fit: bool,
}

impl Default for SectionConfig {
    fn default() -> Self {
        Self {
            model: None,
            crossings: 200,
            theta0: vec![0.0, FRAC_PI_2],
            tolerance: IntegratorOptions::default().tolerance,
            max_time: 1e6,
            after_fit: false,
        }
    }
}

fn field(name: &str, ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(anyhow!("invalid config field `{name}`: {what}"))
    }
}

impl RunConfig {
    /// Read `path` (or start from defaults) and apply `key.path=value`
    /// overrides, then validate.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut doc = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
                text.parse::<toml::Table>().with_context(|| format!("parsing config {}", p.display()))?
            }
            None => toml::Table::new(),
        };
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let cfg: RunConfig = toml::Value::Table(doc).try_into().context("invalid config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(format!(
            "# schema_version = {CONFIG_SCHEMA_VERSION}\n{}",
            toml::to_string(self)?
        ))
    }

    pub fn validate(&self) -> Result<()> {
        let dim = self.system.dim();
        self.system.build().context("invalid config field `system`")?;
        field("model.order", self.model.order >= 1, "must be >= 1")?;
        field("model.init_scale", self.model.init_scale.is_finite() && self.model.init_scale > 0.0, "must be > 0")?;
        let family_dim = match self.model.family {
            Family::Box | Family::Loop => Some(2),
            Family::OddHarmonic1d => Some(1),
            Family::General => None,
        };
        field(
            "model.family",
            family_dim.map_or(true, |d| d == dim),
            &format!("`{}` does not fit a {dim}-dimensional system", self.model.family),
        )?;
        field("grid.points", self.grid.points >= 2, "must be >= 2")?;
        if let Some(w) = &self.objective.weights {
            field("objective.weights", w.iter().all(|x| x.is_finite() && *x >= 0.0), "must be finite and >= 0")?;
        }
        field(
            "objective.consistency",
            self.objective.consistency.is_finite() && self.objective.consistency >= 0.0,
            "must be >= 0",
        )?;
        match self.objective.label {
            LabelKind::Unlabelled => {}
            LabelKind::Actions => {
                let a = self.objective.actions.as_ref();
                field("objective.actions", a.is_some(), "required when label = \"actions\"")?;
                field(
                    "objective.actions",
                    a.is_some_and(|a| a.len() == dim && a.iter().all(|j| j.is_finite() && *j >= 0.0)),
                    &format!("needs {dim} finite non-negative entries"),
                )?;
                field(
                    "objective.weights",
                    self.spec()?.weights.action() > 0.0,
                    "an action label needs the action term (fifth weight > 0)",
                )?;
            }
            LabelKind::Frequencies => {
                let f = self.objective.frequencies.as_ref();
                field("objective.frequencies", f.is_some(), "required when label = \"frequencies\"")?;
                field(
                    "objective.frequencies",
                    f.is_some_and(|f| f.len() == dim && f.iter().all(|w| w.is_finite())),
                    &format!("needs {dim} finite entries"),
                )?;
            }
        }
        self.solver.validate().context("invalid config field `solver`")?;
        field("probe.spacing", self.probe.spacing.is_finite() && self.probe.spacing > 0.0, "must be > 0")?;
        field("probe.extent", self.probe.extent.is_finite() && self.probe.extent >= 0.0, "must be >= 0")?;
        field("probe.threshold", self.probe.threshold >= 0.0, "must be >= 0")?;
        if let Some(rho) = self.probe.consistency {
            field("probe.consistency", rho.is_finite() && rho >= 0.0, "must be >= 0")?;
        }
        field("probe.max_iterations", self.probe.max_iterations >= 1, "must be >= 1")?;
        field("sweep.orders", !self.sweep.orders.is_empty() && self.sweep.orders.iter().all(|&n| n >= 1), "needs orders >= 1")?;
        field(
            "sweep.frequencies",
            !self.sweep.frequencies.is_empty() && self.sweep.frequencies.iter().all(|w| w.is_finite() && *w > 0.0),
            "needs positive frequencies",
        )?;
        field("sweep.points", self.sweep.points >= 2, "must be >= 2")?;
        field("sweep.radius", self.sweep.radius.is_finite() && self.sweep.radius > 0.0, "must be > 0")?;
        field("sweep.energy_tolerance", self.sweep.energy_tolerance > 0.0, "must be > 0")?;
        field("sweep.objective_tolerance", self.sweep.objective_tolerance > 0.0, "must be > 0")?;
        field("section.crossings", self.section.crossings >= 1, "must be >= 1")?;
        field(
            "section.theta0",
            self.section.theta0.len() == 2 && self.section.theta0.iter().all(|t| t.is_finite()),
            "needs 2 finite angles",
        )?;
        field("section.tolerance", self.section.tolerance > 0.0, "must be > 0")?;
        field("section.max_time", self.section.max_time > 0.0, "must be > 0")?;
        Ok(())
    }

    pub fn theta_grid(&self) -> Result<ThetaGrid> {
        ThetaGrid::new(self.system.dim(), self.grid.points, self.grid.reduced).context("invalid config field `grid`")
    }

    pub fn spec(&self) -> Result<ObjectiveSpec> {
        let o = &self.objective;
        let mut spec = match o.label {
            LabelKind::Unlabelled => ObjectiveSpec::unlabelled(),
            LabelKind::Actions => ObjectiveSpec::action_labelled(o.actions.as_deref().unwrap_or_default()),
            LabelKind::Frequencies => ObjectiveSpec::frequency_labelled(o.frequencies.as_deref().unwrap_or_default()),
        };
        if let Some(w) = o.weights {
            spec.weights = Weights(w);
        }
        spec.consistency = o.consistency;
        spec.energy_reference = o.energy_reference;
        Ok(spec)
    }

    /// The starting model: a saved one if configured, else the family guess.
    pub fn initial_model(&self) -> Result<TorusModel> {
        match &self.model.init {
            Some(path) => load_model(path),
            None => TorusModel::initial_guess(self.model.family, self.model.order, self.model.init_scale)
                .context("invalid config field `model`"),
        }
    }
}

/// A model from either a model file or a fit report.
pub fn load_model(path: &Path) -> Result<TorusModel> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if let Ok(report) = torus_core::solver::FitReport::from_json(&text) {
        return Ok(report.model);
    }
    TorusModel::from_json(&text).with_context(|| format!("{} is neither a model nor a fit report", path.display()))
}

fn apply_override(doc: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| anyhow!("override `{assignment}` is not of the form key=value"))?;
    let key = key.trim();
    let value = parse_value(raw.trim());
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        bail!("override `{assignment}` has an empty key segment");
    }
    let mut table = doc;
    for p in &parts[..parts.len() - 1] {
        let entry = table
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| anyhow!("override `{key}`: `{p}` is not a table"))?;
    }
    table.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// A TOML literal if it parses as one, else a bare string.
fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}
