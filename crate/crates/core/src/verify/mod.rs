//! Orbit integration, Poincaré sections and section comparison.
//!
//! Sections are taken at `q₂ = 0` with `p₂ > 0` and plotted in the
//! `(x, ẋ) = (q₁, p₁)` plane.

mod export;
mod gbs;

pub use export::{section_overlay_svg, write_sections_csv, write_trajectory_csv};

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::dynamics::HamiltonianSystem;
use crate::error::{Error, Result};
use crate::model::TorusModel;
use crate::objective::population_std;
use gbs::{propagate, Gbs, State};

/// `|q₂|` below which a refined crossing is accepted.
pub const CROSSING_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorOptions {
    /// Relative and absolute local error target per step.
    pub tolerance: f64,
    /// Number of extrapolation columns available (4 to 12).
    pub columns: usize,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-16,
            columns: 10,
            max_steps: 10_000_000,
        }
    }
}

impl IntegratorOptions {
    pub fn with_tolerance(tolerance: f64) -> Self {
        Self {
            tolerance,
            ..Self::default()
        }
    }
}

/// Accepted steps of an integrated orbit.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    n: usize,
    pub times: Vec<f64>,
    /// `(q, p)` per stored time, `2n` entries each.
    pub states: Vec<Vec<f64>>,
    pub energies: Vec<f64>,
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn q(&self, i: usize) -> &[f64] {
        &self.states[i][..self.n]
    }

    pub fn p(&self, i: usize) -> &[f64] {
        &self.states[i][self.n..]
    }

    pub fn last_state(&self) -> Option<&[f64]> {
        self.states.last().map(|s| s.as_slice())
    }

    /// Population standard deviation of `H` over the stored points.
    pub fn energy_sigma(&self) -> f64 {
        population_std(&self.energies)
    }

    fn push(&mut self, system: &dyn HamiltonianSystem, t: f64, y: Vec<f64>) {
        self.energies.push(system.hamiltonian(&y[..self.n], &y[self.n..]));
        self.times.push(t);
        self.states.push(y);
    }
}

fn check_start(system: &dyn HamiltonianSystem, q: &[f64], p: &[f64]) -> Result<Vec<f64>> {
    let n = system.dim();
    if q.len() != n || p.len() != n {
        return Err(Error::InvalidParameter(format!(
            "initial point must have {n} coordinates and {n} momenta"
        )));
    }
    let y: Vec<f64> = q.iter().chain(p).copied().collect();
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("initial phase point".into()));
    }
    Ok(y)
}

/// Integrate Hamilton's equations from `(q, p)` up to `t_end`, storing every
/// accepted step and ending exactly on `t_end`.
pub fn integrate_orbit(
    system: &dyn HamiltonianSystem,
    q: &[f64],
    p: &[f64],
    t_end: f64,
    options: &IntegratorOptions,
) -> Result<Trajectory> {
    if !(options.tolerance > 0.0) {
        return Err(Error::InvalidParameter("integrator tolerance must be > 0".into()));
    }
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(Error::InvalidParameter(format!("t_end must be finite and >= 0, got {t_end}")));
    }
    let y0 = check_start(system, q, p)?;
    let mut traj = Trajectory {
        n: system.dim(),
        ..Trajectory::default()
    };
    traj.push(system, 0.0, y0.clone());
    let mut gbs = Gbs::new(system, options.tolerance, options.columns);
    let mut h = initial_step(system, &y0).min(t_end.max(f64::MIN_POSITIVE));
    let mut state = State::new(y0);
    let mut t = 0.0;
    let mut steps = 0;
    while t < t_end {
        if t + h > t_end || (t_end - t - h) < 1e-12 * h {
            h = t_end - t;
        }
        let (taken, step) = gbs.step(&state.y, h)?;
        t = if taken == t_end - t { t_end } else { t + taken };
        state.advance(&step.delta);
        if state.y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Integration(format!("non-finite state at t = {t}")));
        }
        traj.push(system, t, state.y.clone());
        h = step.h_next;
        if h.abs() < 1e-14 * t.abs().max(1.0) {
            return Err(Error::Integration(format!("step size underflow at t = {t} (h = {h:e})")));
        }
        steps += 1;
        if steps >= options.max_steps {
            return Err(Error::Integration(format!("step budget exhausted at t = {t}")));
        }
    }
    Ok(traj)
}

fn initial_step(system: &dyn HamiltonianSystem, y: &[f64]) -> f64 {
    let n = system.dim();
    let g = system.potential_gradient(&y[..n]);
    let speed = y[n..].iter().chain(&g[..n]).map(|v| v * v).sum::<f64>().sqrt();
    let scale = y.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
    (0.05 * scale / speed.max(1e-12)).min(1.0)
}

/// Point where an orbit or torus pierces `q₂ = 0` upwards.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionPoint {
    pub t: f64,
    pub q: [f64; 2],
    pub p: [f64; 2],
}

impl SectionPoint {
    pub fn x(&self) -> f64 {
        self.q[0]
    }

    pub fn xdot(&self) -> f64 {
        self.p[0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SectionSource {
    Integrated,
    Constructed,
}

impl SectionSource {
    pub fn name(self) -> &'static str {
        match self {
            SectionSource::Integrated => "integrated",
            SectionSource::Constructed => "constructed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionSet {
    pub source: SectionSource,
    pub points: Vec<SectionPoint>,
}

impl SectionSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn xy(&self) -> impl Iterator<Item = [f64; 2]> + '_ {
        self.points.iter().map(|s| [s.x(), s.xdot()])
    }
}

fn require_planar(n: usize) -> Result<()> {
    if n != 2 {
        return Err(Error::InvalidParameter(format!(
            "sections need a two-dimensional system, got dimension {n}"
        )));
    }
    Ok(())
}

/// Cubic Hermite interpolant of `q₂` over one step, with `q̇₂ = p₂`.
fn hermite_root(y0: &[f64], y1: &[f64], h: f64) -> f64 {
    let (f0, f1) = (y0[1], y1[1]);
    let (d0, d1) = (y0[3] * h, y1[3] * h);
    let eval = |s: f64| {
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * f0 + (s3 - 2.0 * s2 + s) * d0 + (-2.0 * s3 + 3.0 * s2) * f1 + (s3 - s2) * d1
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if eval(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Crossing inside the step `y0 → y1` of length `h`: bisection on the cubic
/// Hermite interpolant for a first estimate, then Newton iterations on `q₂`
/// that re-integrate from `y0` (the derivative is `p₂`), falling back to
/// bisection on the bracket whenever Newton leaves it.
fn refine_crossing(
    system: &dyn HamiltonianSystem,
    y0: &[f64],
    y1: &[f64],
    h: f64,
    tolerance: f64,
) -> Result<(f64, Vec<f64>)> {
    let (mut lo, mut hi) = (0.0, h);
    let mut tau = hermite_root(y0, y1, h) * h;
    let mut y = propagate(system, y0, tau, tolerance)?;
    for _ in 0..50 {
        let g = y[1];
        if g.abs() < 0.01 * CROSSING_TOLERANCE {
            break;
        }
        if g < 0.0 {
            lo = tau;
        } else {
            hi = tau;
        }
        let mut next = tau - g / y[3];
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        tau = next;
        y = propagate(system, y0, tau, tolerance)?;
    }
    Ok((tau, y))
}

/// Upward `q₂ = 0` crossings of an integrated orbit, each refined to
/// `|q₂| < CROSSING_TOLERANCE`.
pub fn section_from_orbit(
    system: &dyn HamiltonianSystem,
    trajectory: &Trajectory,
    options: &IntegratorOptions,
) -> Result<SectionSet> {
    require_planar(trajectory.dim())?;
    let mut points = Vec::new();
    for i in 1..trajectory.len() {
        let (y0, y1) = (&trajectory.states[i - 1], &trajectory.states[i]);
        if !(y0[1] < 0.0 && y1[1] >= 0.0) {
            continue;
        }
        let h = trajectory.times[i] - trajectory.times[i - 1];
        let (tau, y) = refine_crossing(system, y0, y1, h, options.tolerance)?;
        if y[1].abs() < CROSSING_TOLERANCE && y[3] > 0.0 {
            points.push(SectionPoint {
                t: trajectory.times[i - 1] + tau,
                q: [y[0], y[1]],
                p: [y[2], y[3]],
            });
        }
    }
    Ok(SectionSet {
        source: SectionSource::Integrated,
        points,
    })
}

/// Integrate from `(q, p)` until `count` section crossings are collected.
/// Gives up when `max_time` passes without reaching the count.
pub fn integrated_section(
    system: &dyn HamiltonianSystem,
    q: &[f64],
    p: &[f64],
    count: usize,
    max_time: f64,
    options: &IntegratorOptions,
) -> Result<(Trajectory, SectionSet)> {
    require_planar(system.dim())?;
    let y0 = check_start(system, q, p)?;
    let mut traj = Trajectory {
        n: 2,
        ..Trajectory::default()
    };
    traj.push(system, 0.0, y0.clone());
    let mut gbs = Gbs::new(system, options.tolerance, options.columns);
    let mut h = initial_step(system, &y0);
    let mut state = State::new(y0);
    let mut t = 0.0;
    let mut points = Vec::new();
    let mut steps = 0;
    while points.len() < count {
        if t > max_time {
            return Err(Error::NoCrossing(format!(
                "only {} of {count} crossings within t = {max_time}",
                points.len()
            )));
        }
        let (taken, step) = gbs.step(&state.y, h)?;
        let before = state.y.clone();
        state.advance(&step.delta);
        let y = &state.y;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Integration(format!("non-finite state at t = {t}")));
        }
        if before[1] < 0.0 && y[1] >= 0.0 {
            let (tau, yc) = refine_crossing(system, &before, y, taken, options.tolerance)?;
            if yc[1].abs() < CROSSING_TOLERANCE && yc[3] > 0.0 {
                points.push(SectionPoint {
                    t: t + tau,
                    q: [yc[0], yc[1]],
                    p: [yc[2], yc[3]],
                });
            }
        }
        t += taken;
        traj.push(system, t, state.y.clone());
        h = step.h_next;
        steps += 1;
        if steps >= options.max_steps {
            return Err(Error::Integration(format!("step budget exhausted at t = {t}")));
        }
    }
    Ok((
        traj,
        SectionSet {
            source: SectionSource::Integrated,
            points,
        },
    ))
}

/// Section of a constructed torus followed along `θ(t) = θ₀ + ωt`.
///
/// The line is sampled finely enough to resolve the highest harmonic of the
/// model; each upward sign change of `q₂` is refined by safeguarded Newton
/// iterations with `dq₂/dt = Σ_i ω_i ∂q₂/∂θ_i`.
pub fn section_from_model(model: &TorusModel, omega: &[f64], theta0: &[f64], count: usize) -> Result<SectionSet> {
    require_planar(model.dim())?;
    if omega.len() != 2 || theta0.len() != 2 || omega.iter().chain(theta0).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("section needs finite ω and θ₀ of length 2".into()));
    }
    let fastest = model
        .mask()
        .slots()
        .iter()
        .map(|s| (s.k[0] as f64 * omega[0]).abs() + (s.k[1] as f64 * omega[1]).abs())
        .fold(0.0, f64::max);
    if fastest == 0.0 {
        return Err(Error::NoCrossing("model does not move along the torus".into()));
    }
    let slowest = omega.iter().map(|w| w.abs()).filter(|w| *w > 0.0).fold(f64::INFINITY, f64::min);
    let dt = 2.0 * PI / (32.0 * fastest);
    let budget = 50.0 * 2.0 * PI / slowest;

    let theta_at = |t: f64| [theta0[0] + omega[0] * t, theta0[1] + omega[1] * t];
    let q2 = |t: f64| model.eval(&theta_at(t)).q[1];
    let rate = |t: f64| {
        let d = model.eval_derivs(&theta_at(t));
        d.dq[(1, 0)] * omega[0] + d.dq[(1, 1)] * omega[1]
    };

    let mut points = Vec::with_capacity(count);
    let mut t = 0.0;
    let mut g = q2(t);
    let mut last_crossing = 0.0;
    while points.len() < count {
        let t1 = t + dt;
        let g1 = q2(t1);
        if g < 0.0 && g1 >= 0.0 {
            let (mut lo, mut hi) = (t, t1);
            let mut tc = t - g * dt / (g1 - g);
            for _ in 0..60 {
                let v = q2(tc);
                if v.abs() < 0.01 * CROSSING_TOLERANCE {
                    break;
                }
                if v < 0.0 {
                    lo = tc;
                } else {
                    hi = tc;
                }
                let mut next = tc - v / rate(tc);
                if !(next > lo && next < hi) {
                    next = 0.5 * (lo + hi);
                }
                tc = next;
            }
            let pt = model.eval(&theta_at(tc));
            if pt.q[1].abs() < CROSSING_TOLERANCE && rate(tc) > 0.0 {
                points.push(SectionPoint {
                    t: tc,
                    q: [pt.q[0], pt.q[1]],
                    p: [pt.p[0], pt.p[1]],
                });
                last_crossing = tc;
            }
        }
        if t1 - last_crossing > budget {
            return Err(Error::NoCrossing(format!(
                "no upward q2 = 0 crossing within t = {budget:.3} (after {} crossings)",
                points.len()
            )));
        }
        t = t1;
        g = g1;
    }
    Ok(SectionSet {
        source: SectionSource::Constructed,
        points,
    })
}

/// Distances between two sections in the `(x, ẋ)` plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionDistance {
    /// Symmetric Hausdorff distance.
    pub hausdorff: f64,
    /// Mean over both sets of the distance to the nearest point of the other.
    pub mean_nearest: f64,
}

pub fn compare_sections(a: &SectionSet, b: &SectionSet) -> Result<SectionDistance> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    let pa: Vec<[f64; 2]> = a.xy().collect();
    let pb: Vec<[f64; 2]> = b.xy().collect();
    let nearest = |from: &[[f64; 2]], to: &[[f64; 2]]| -> Vec<f64> {
        from.iter()
            .map(|u| {
                to.iter()
                    .map(|v| (u[0] - v[0]).hypot(u[1] - v[1]))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    };
    let ab = nearest(&pa, &pb);
    let ba = nearest(&pb, &pa);
    let hausdorff = ab.iter().chain(&ba).copied().fold(0.0, f64::max);
    let mean_nearest = (ab.iter().sum::<f64>() + ba.iter().sum::<f64>()) / (ab.len() + ba.len()) as f64;
    Ok(SectionDistance {
        hausdorff,
        mean_nearest,
    })
}
