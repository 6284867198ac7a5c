use std::fmt::Write as _;
use std::path::Path;

use super::{Constructor, ProbeState};
use crate::dynamics::HamiltonianSystem;
use crate::error::Result;
use crate::model::ThetaGrid;
use crate::objective::ObjectiveSpec;
use crate::output::float;
use crate::solver::{fit, FitReport, SolverOptions};

pub const PROBE_SCHEMA_VERSION: u32 = 1;

/// Action-labelled torus fits with the consistency term switched on.
pub struct TorusConstructor<'a> {
    pub system: &'a dyn HamiltonianSystem,
    pub grid: &'a ThetaGrid,
    pub options: SolverOptions,
    /// Consistency weight; `None` means `0.01 / #C` of the seed's mask.
    pub consistency: Option<f64>,
}

impl<'a> TorusConstructor<'a> {
    pub fn new(system: &'a dyn HamiltonianSystem, grid: &'a ThetaGrid, options: SolverOptions) -> Self {
        Self {
            system,
            grid,
            options,
            consistency: None,
        }
    }

    /// Tighten the objective stop to a tenth of `threshold`, so a fit that
    /// stops on the objective rule is always accepted.
    pub fn stop_below(mut self, threshold: f64) -> Self {
        let per_point = 0.1 * threshold / self.grid.len() as f64;
        self.options.objective_tolerance = self.options.objective_tolerance.min(per_point);
        self
    }

    pub fn spec(&self, label: &[f64], seed: &FitReport) -> ObjectiveSpec {
        let spec = ObjectiveSpec::probing(label, seed.model.mask());
        match self.consistency {
            Some(rho) => spec.with_consistency(rho),
            None => spec,
        }
    }
}

impl Constructor for TorusConstructor<'_> {
    type Torus = FitReport;

    fn construct(&self, label: &[f64], seed: &FitReport) -> Result<FitReport> {
        fit(self.system, self.grid, &self.spec(label, seed), &seed.model, &self.options)
    }

    /// Total objective over the grid, consistency rows included; infinite
    /// when the consistency metric is not finite.
    fn goodness(&self, torus: &FitReport) -> f64 {
        if torus.consistency.is_finite() {
            torus.objective
        } else {
            f64::INFINITY
        }
    }
}

/// Write `summary.csv` and one `tori/m<i>_<j>.json` report per fitted index.
pub fn write_probe(dir: impl AsRef<Path>, state: &ProbeState<FitReport>) -> Result<()> {
    let dir = dir.as_ref();
    let tori = dir.join("tori");
    std::fs::create_dir_all(&tori)?;
    let n = state.grid.dim();
    let mut csv = format!("# schema_version={PROBE_SCHEMA_VERSION}\n");
    let names = |prefix: &str| (1..=n).map(|h| format!("{prefix}{h}")).collect::<Vec<_>>().join(",");
    let _ = writeln!(
        csv,
        "{},{},{},sigma,objective,accepted,generation,parent,termination,error",
        names("m"),
        names("J"),
        names("omega")
    );
    for r in state.records.values() {
        let key = r.index.iter().map(|m| m.to_string()).collect::<Vec<_>>();
        let mut row: Vec<String> = key.clone();
        row.extend(r.label.iter().map(|j| float(*j)));
        match &r.torus {
            Some(t) => {
                row.extend(t.omega.iter().map(|w| float(*w)));
                row.push(float(t.sigma));
                row.push(float(t.objective));
                t.save(tori.join(format!("m{}.json", key.join("_"))))?;
            }
            None => {
                row.extend(std::iter::repeat_n(String::from("NaN"), n + 2));
            }
        }
        row.push(r.accepted.to_string());
        row.push(r.generation.to_string());
        row.push(
            r.parent
                .as_ref()
                .map(|p| p.iter().map(|m| m.to_string()).collect::<Vec<_>>().join("_"))
                .unwrap_or_default(),
        );
        row.push(r.torus.as_ref().map(|t| t.termination.name().to_string()).unwrap_or_default());
        row.push(r.error.as_deref().unwrap_or("").replace([',', '\n'], ";"));
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    std::fs::write(dir.join("summary.csv"), csv)?;
    Ok(())
}
