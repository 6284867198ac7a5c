use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use torus_core::dynamics::{HamiltonianSystem, Isochrone, SystemConfig};
use torus_core::model::{Family, ThetaGrid, TorusModel};
use torus_core::objective::{solve_frequencies, ObjectiveSpec};
use torus_core::output::{float, Marker, ScatterPlot};
use torus_core::probe::{self, connected_components, ActionGrid, ProbeOptions, TorusConstructor};
use torus_core::solver::{self, FitReport, SolverOptions, Termination};
use torus_core::verify::{
    compare_sections, integrated_section, section_from_model, section_overlay_svg, write_sections_csv,
    IntegratorOptions,
};

use crate::config::{load_model, RunConfig};

/// Version tag written at the top of every CSV and SVG output.
pub const OUTPUT_SCHEMA_VERSION: u32 = 1;

fn prepare_output(cfg: &RunConfig) -> Result<&Path> {
    let dir = cfg.output.as_path();
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    std::fs::write(dir.join("config.toml"), cfg.to_toml()?)?;
    Ok(dir)
}

fn write_csv(path: &Path, header: &str, rows: &[Vec<String>]) -> Result<()> {
    let mut s = format!("# schema_version={OUTPUT_SCHEMA_VERSION}\n{header}\n");
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    std::fs::write(path, s).with_context(|| format!("writing {}", path.display()))
}

fn write_svg(path: &Path, svg: &str) -> Result<()> {
    let s = format!("<!-- schema_version={OUTPUT_SCHEMA_VERSION} -->\n{svg}");
    std::fs::write(path, s).with_context(|| format!("writing {}", path.display()))
}

fn floats(v: &[f64]) -> impl Iterator<Item = String> + '_ {
    v.iter().map(|x| float(*x))
}

fn names(prefix: &str, n: usize) -> String {
    (1..=n).map(|h| format!("{prefix}{h}")).collect::<Vec<_>>().join(",")
}

// ---------------------------------------------------------------- sweep

struct Cell {
    order: u32,
    omega: f64,
    exact_energy: f64,
    report: Result<FitReport, String>,
}

impl Cell {
    fn relative_energy_error(&self) -> f64 {
        match &self.report {
            Ok(r) => ((r.mean_energy - self.exact_energy) / self.exact_energy).abs(),
            Err(_) => f64::NAN,
        }
    }

    fn converged(&self, tolerance: f64) -> bool {
        match &self.report {
            Ok(r) => {
                !matches!(r.termination, Termination::MaxIter | Termination::Degenerate)
                    && self.relative_energy_error() <= tolerance
            }
            Err(_) => false,
        }
    }
}

pub fn sweep_isochrone(cfg: &RunConfig) -> Result<()> {
    let SystemConfig::Isochrone { c1, c2 } = cfg.system else {
        bail!("invalid config field `system.name`: sweep-isochrone needs the isochrone system");
    };
    let system = Isochrone::new(c1, c2)?;
    let grid = ThetaGrid::new(1, cfg.sweep.points, true).context("invalid config field `sweep.points`")?;
    let options = SolverOptions {
        objective_tolerance: cfg.sweep.objective_tolerance,
        ..cfg.solver.clone()
    };
    let dir = prepare_output(cfg)?;
    let jobs: Vec<(u32, f64)> = cfg
        .sweep
        .orders
        .iter()
        .flat_map(|&n| cfg.sweep.frequencies.iter().map(move |&w| (n, w)))
        .collect();
    let cells: Vec<Cell> = jobs
        .par_iter()
        .map(|&(order, omega)| {
            let report = TorusModel::initial_guess(Family::OddHarmonic1d, order, cfg.sweep.radius)
                .and_then(|init| solver::fit(&system, &grid, &ObjectiveSpec::frequency_labelled(&[omega]), &init, &options))
                .map_err(|e| e.to_string());
            Cell {
                order,
                omega,
                exact_energy: system.energy_for_frequency(omega),
                report,
            }
        })
        .collect();

    let tol = cfg.sweep.energy_tolerance;
    let mut rows = Vec::new();
    let (mut good, mut bad) = (Vec::new(), Vec::new());
    for c in &cells {
        let converged = c.converged(tol);
        let mut row = vec![c.order.to_string(), float(c.omega), float(cfg.sweep.radius)];
        match &c.report {
            Ok(r) => {
                row.extend([
                    float(r.sigma),
                    float(r.mean_energy),
                    float(c.exact_energy),
                    float(c.relative_energy_error()),
                    float(r.objective),
                    r.iterations.to_string(),
                    r.termination.name().to_string(),
                ]);
            }
            Err(_) => {
                row.extend(["NaN", "NaN"].map(String::from));
                row.push(float(c.exact_energy));
                row.extend(["NaN", "NaN", "0", ""].map(String::from));
            }
        }
        row.push(converged.to_string());
        row.push(c.report.as_ref().err().map(|e| e.replace([',', '\n'], ";")).unwrap_or_default());
        rows.push(row);
        (if converged { &mut good } else { &mut bad }).push([c.omega, c.order as f64]);
        log::info!(
            "N={} omega={}: {}",
            c.order,
            c.omega,
            match &c.report {
                Ok(r) => format!(
                    "sigma={:.3e} dH/H={:.3e} {} in {} iterations{}",
                    r.sigma,
                    c.relative_energy_error(),
                    r.termination,
                    r.iterations,
                    if converged { "" } else { " (not converged)" }
                ),
                Err(e) => format!("failed: {e}"),
            }
        );
    }
    write_csv(
        &dir.join("summary.csv"),
        "order,omega,radius,sigma,mean_energy,exact_energy,relative_energy_error,objective,iterations,termination,converged,error",
        &rows,
    )?;
    let mut plot = ScatterPlot::new("isochrone sweep", "omega", "N");
    plot.add("converged", "black", Marker::Circle, good);
    plot.add("not converged", "#d04010", Marker::Cross, bad);
    write_svg(&dir.join("sweep.svg"), &plot.to_svg())?;
    println!(
        "{} of {} cells converged; results in {}",
        cells.iter().filter(|c| c.converged(tol)).count(),
        cells.len(),
        dir.display()
    );
    Ok(())
}

// ------------------------------------------------------------------ fit

fn report_row(r: &FitReport) -> Vec<String> {
    let mut row = vec![r.model.family().to_string(), r.model.order().to_string()];
    row.extend(floats(&r.actions));
    row.extend(floats(&r.omega));
    row.extend([
        float(r.sigma),
        float(r.objective),
        float(r.objective_per_point()),
        float(r.mean_energy),
        float(r.consistency),
        r.iterations.to_string(),
        r.termination.name().to_string(),
    ]);
    row
}

fn report_header(n: usize) -> String {
    format!(
        "family,order,{},{},sigma,objective,objective_per_point,mean_energy,consistency,iterations,termination",
        names("J", n),
        names("omega", n)
    )
}

pub fn fit(cfg: &RunConfig) -> Result<()> {
    let system = cfg.system.build()?;
    let grid = cfg.theta_grid()?;
    let init = cfg.initial_model()?;
    let spec = cfg.spec()?;
    let dir = prepare_output(cfg)?;
    let report = solver::fit(system.as_ref(), &grid, &spec, &init, &cfg.solver)?;
    report.model.save(dir.join("model.json"))?;
    report.save(dir.join("report.json"))?;
    write_csv(&dir.join("summary.csv"), &report_header(system.dim()), &[report_row(&report)])?;
    println!(
        "J = {:?}, omega = {:?}, sigma = {:.3e}, objective = {:.3e} ({} after {} iterations)",
        report.actions, report.omega, report.sigma, report.objective, report.termination, report.iterations
    );
    if cfg.section.after_fit {
        sections(cfg, system.as_ref(), &report.model, &report.omega, dir)?;
    }
    Ok(())
}

// ---------------------------------------------------------------- probe

pub fn probe(cfg: &RunConfig) -> Result<()> {
    let system = cfg.system.build()?;
    let grid = cfg.theta_grid()?;
    let dir = prepare_output(cfg)?;
    let seed = match &cfg.probe.seed {
        Some(path) => FitReport::load(path).with_context(|| format!("loading seed report {}", path.display()))?,
        None => {
            let init = cfg.initial_model()?;
            let seed = solver::fit_unlabelled(system.as_ref(), &grid, &init, &cfg.solver)?;
            log::info!("seed fit: J = {:?}, objective {:.3e}", seed.actions, seed.objective);
            seed
        }
    };
    seed.save(dir.join("seed.json"))?;
    let actions = ActionGrid::uniform(system.dim(), cfg.probe.spacing, cfg.probe.extent)?;
    let mut constructor = TorusConstructor::new(
        system.as_ref(),
        &grid,
        SolverOptions {
            max_iterations: cfg.probe.max_iterations,
            ..cfg.solver.clone()
        },
    )
    .stop_below(cfg.probe.threshold);
    constructor.consistency = cfg.probe.consistency;
    let state = probe::probe(
        &constructor,
        &actions,
        &seed.actions,
        &seed,
        cfg.probe.threshold,
        ProbeOptions {
            parallel: cfg.probe.parallel,
        },
    )?;
    probe::write_probe(dir, &state)?;

    let accepted = state.accepted_indices();
    if state.generations.is_empty() {
        log::warn!(
            "seed fit at {:?} was rejected (objective above {:e}); seed report in {}",
            actions.nearest_point(&seed.actions)?,
            cfg.probe.threshold,
            dir.join("seed.json").display()
        );
    }
    if system.dim() == 2 {
        let mut j = ScatterPlot::new("probed action lattice", "J1", "J2");
        j.add("accepted", "black", Marker::Circle, state.accepted().map(|r| [r.label[0], r.label[1]]).collect());
        j.add("rejected", "#d04010", Marker::Cross, state.rejected().map(|r| [r.label[0], r.label[1]]).collect());
        write_svg(&dir.join("actions.svg"), &j.to_svg())?;
        let mut w = ScatterPlot::new("frequencies of accepted tori", "omega1", "omega2");
        w.add(
            "accepted",
            "black",
            Marker::Circle,
            state
                .accepted()
                .filter_map(|r| r.torus.as_ref())
                .map(|t| [t.omega[0], t.omega[1]])
                .collect(),
        );
        write_svg(&dir.join("frequencies.svg"), &w.to_svg())?;
    }
    println!(
        "{} fits, {} accepted in {} generations ({} connected region(s)); results in {}",
        state.fit_count(),
        accepted.len(),
        state.generations.len(),
        connected_components(&actions, &accepted),
        dir.display()
    );
    Ok(())
}

// -------------------------------------------------------------- section

pub fn section(cfg: &RunConfig) -> Result<()> {
    let Some(path) = &cfg.section.model else {
        bail!("invalid config field `section.model`: required for the section command");
    };
    let system = cfg.system.build()?;
    if system.dim() != 2 {
        bail!("invalid config field `system`: sections need a 2-dimensional system");
    }
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let (model, omega) = match FitReport::from_json(&text) {
        Ok(r) => (r.model, r.omega),
        Err(_) => {
            let model = load_model(path)?;
            let grid = cfg.theta_grid()?;
            let omega = solve_frequencies(&model, &grid, system.as_ref())?.omega.iter().copied().collect();
            (model, omega)
        }
    };
    let dir = prepare_output(cfg)?;
    sections(cfg, system.as_ref(), &model, &omega, dir)
}

fn sections(cfg: &RunConfig, system: &dyn HamiltonianSystem, model: &TorusModel, omega: &[f64], dir: &Path) -> Result<()> {
    let s = &cfg.section;
    let options = IntegratorOptions::with_tolerance(s.tolerance);
    let constructed = section_from_model(model, omega, &s.theta0, s.crossings)?;
    let start = model.eval(&s.theta0);
    let (trajectory, integrated) = integrated_section(system, &start.q, &start.p, s.crossings, s.max_time, &options)?;
    write_sections_csv(dir.join("sections.csv"), &[&integrated, &constructed])?;
    prepend_schema(&dir.join("sections.csv"))?;
    write_svg(&dir.join("sections.svg"), &section_overlay_svg("Poincaré section q2 = 0, p2 > 0", &[&integrated, &constructed]))?;

    // configuration-space overlay: the orbit against the torus followed along θ₀ + ωt
    let t_end = *trajectory.times.last().unwrap_or(&0.0);
    let slowest = omega.iter().fold(f64::INFINITY, |a, w| a.min(w.abs()));
    let span = t_end.min(50.0 * TAU / slowest);
    let samples = 4000;
    let torus_xy: Vec<[f64; 2]> = (0..samples)
        .map(|i| {
            let t = span * i as f64 / samples as f64;
            let theta: Vec<f64> = s.theta0.iter().zip(omega).map(|(a, w)| a + w * t).collect();
            let st = model.eval(&theta);
            [st.q[0], st.q[1]]
        })
        .collect();
    let orbit_xy: Vec<[f64; 2]> = trajectory
        .states
        .iter()
        .zip(&trajectory.times)
        .filter(|(_, &t)| t <= span)
        .map(|(y, _)| [y[0], y[1]])
        .collect();
    let mut plot = ScatterPlot::new("orbit in the configuration plane", "x", "y");
    plot.add("integrated", "#909090", Marker::Dot, orbit_xy);
    plot.add("constructed", "#d04010", Marker::Dot, torus_xy);
    write_svg(&dir.join("orbit.svg"), &plot.to_svg())?;

    let d = compare_sections(&constructed, &integrated)?;
    write_csv(
        &dir.join("section_summary.csv"),
        "crossings,hausdorff,mean_nearest,energy_sigma,t_end",
        &[vec![
            s.crossings.to_string(),
            float(d.hausdorff),
            float(d.mean_nearest),
            float(trajectory.energy_sigma()),
            float(t_end),
        ]],
    )?;
    println!(
        "sections: hausdorff = {:.3e}, mean nearest = {:.3e}, orbit energy sigma = {:.3e}",
        d.hausdorff,
        d.mean_nearest,
        trajectory.energy_sigma()
    );
    Ok(())
}

fn prepend_schema(path: &Path) -> Result<()> {
    let body = std::fs::read_to_string(path)?;
    let mut s = String::new();
    let _ = writeln!(s, "# schema_version={OUTPUT_SCHEMA_VERSION}");
    s.push_str(&body);
    std::fs::write(path, s)?;
    Ok(())
}
