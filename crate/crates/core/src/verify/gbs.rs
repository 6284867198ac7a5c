//! Gragg–Bulirsch–Stoer extrapolation integrator for `q̇ = p`, `ṗ = −∇Φ(q)`.

use crate::dynamics::HamiltonianSystem;
use crate::error::{Error, Result};

/// Substep counts of the modified-midpoint rows (the harmonic sequence).
const SEQUENCE: [usize; 12] = [2, 4, 6, 8, 10, 12, 14, 16, 18, 20, 22, 24];
const SAFETY: f64 = 0.94;
const SAFETY_ERR: f64 = 0.65;
const MAX_GROWTH: f64 = 4.0;
const MIN_SHRINK: f64 = 0.02;

pub(crate) struct Gbs<'a> {
    system: &'a dyn HamiltonianSystem,
    n: usize,
    tolerance: f64,
    columns: usize,
    /// Target column (0-based) of the extrapolation tableau.
    target: usize,
    /// Cumulative right-hand-side evaluations needed to build row `k`.
    cost: [f64; SEQUENCE.len()],
    pub evaluations: usize,
}

pub(crate) struct Step {
    /// Increment `y(t + h) − y(t)`.
    pub delta: Vec<f64>,
    pub h_next: f64,
}

/// Integrator state that adds step increments with Kahan compensation, so
/// round-off does not random-walk over long orbits.
pub(crate) struct State {
    pub y: Vec<f64>,
    carry: Vec<f64>,
}

impl State {
    pub fn new(y: Vec<f64>) -> Self {
        let carry = vec![0.0; y.len()];
        Self { y, carry }
    }

    pub fn advance(&mut self, delta: &[f64]) {
        for ((y, c), d) in self.y.iter_mut().zip(&mut self.carry).zip(delta) {
            let d = d + *c;
            let next = *y + d;
            *c = d - (next - *y);
            *y = next;
        }
    }
}

impl<'a> Gbs<'a> {
    pub fn new(system: &'a dyn HamiltonianSystem, tolerance: f64, columns: usize) -> Self {
        let columns = columns.clamp(4, SEQUENCE.len());
        let mut cost = [0.0; SEQUENCE.len()];
        let mut acc = 1.0;
        for (c, &s) in cost.iter_mut().zip(&SEQUENCE) {
            acc += s as f64;
            *c = acc;
        }
        Self {
            system,
            n: system.dim(),
            tolerance,
            columns,
            target: (columns / 2).max(2),
            cost,
            evaluations: 0,
        }
    }

    pub fn derivative(&mut self, y: &[f64], dy: &mut [f64]) {
        let n = self.n;
        self.evaluations += 1;
        let g = self.system.potential_gradient(&y[..n]);
        dy[..n].copy_from_slice(&y[n..2 * n]);
        for i in 0..n {
            dy[n + i] = -g[i];
        }
    }

    /// Gragg's modified midpoint rule over `h` with `steps` substeps,
    /// including the final smoothing step. Returns the increment `y(h) − y0`.
    fn midpoint(&mut self, y0: &[f64], f0: &[f64], h: f64, steps: usize) -> Vec<f64> {
        let m = y0.len();
        let hs = h / steps as f64;
        let mut d0 = vec![0.0; m];
        let mut d1: Vec<f64> = f0.iter().map(|f| hs * f).collect();
        let mut z = vec![0.0; m];
        let mut f = vec![0.0; m];
        for _ in 1..steps {
            for i in 0..m {
                z[i] = y0[i] + d1[i];
            }
            self.derivative(&z, &mut f);
            for i in 0..m {
                let d2 = d0[i] + 2.0 * hs * f[i];
                d0[i] = d1[i];
                d1[i] = d2;
            }
        }
        for i in 0..m {
            z[i] = y0[i] + d1[i];
        }
        self.derivative(&z, &mut f);
        (0..m).map(|i| 0.5 * (d0[i] + d1[i] + hs * f[i])).collect()
    }

    /// Largest component error in units of `tol·(1 + |y|)`.
    fn error_norm(&self, a: &[f64], b: &[f64], y: &[f64]) -> f64 {
        (0..a.len())
            .map(|i| {
                let scale = self.tolerance * (1.0 + y[i].abs().max((y[i] + a[i]).abs()));
                ((a[i] - b[i]) / scale).abs()
            })
            .fold(0.0, f64::max)
    }

    /// One accepted step from `y` starting with trial size `h`; `h` is shrunk
    /// on rejection and the size actually taken is returned.
    pub fn step(&mut self, y: &[f64], h: f64) -> Result<(f64, Step)> {
        let m = y.len();
        let mut f0 = vec![0.0; m];
        self.derivative(y, &mut f0);
        let mut h = h;
        loop {
            if !(h.abs() > 1e-300) || !h.is_finite() {
                return Err(Error::Integration(format!("step size underflow (h = {h:e})")));
            }
            let mut table: Vec<Vec<f64>> = Vec::with_capacity(self.columns);
            let mut step_factor = [0.0; SEQUENCE.len()];
            let mut work = [f64::INFINITY; SEQUENCE.len()];
            let last = (self.target + 1).min(self.columns - 1);
            let mut accepted = None;
            let mut reject_factor = 0.5;
            for k in 0..=last {
                let mut row = self.midpoint(y, &f0, h, SEQUENCE[k]);
                // Aitken–Neville in h²: row[k] is built from table[k−1]
                let mut prev = row.clone();
                let mut extrapolated = Vec::with_capacity(k + 1);
                extrapolated.push(row.clone());
                for j in 1..=k {
                    let ratio = (SEQUENCE[k] as f64 / SEQUENCE[k - j] as f64).powi(2) - 1.0;
                    let lower = &table[k - 1];
                    let lower_row = &lower[(j - 1) * m..j * m];
                    for i in 0..m {
                        row[i] = prev[i] + (prev[i] - lower_row[i]) / ratio;
                    }
                    extrapolated.push(row.clone());
                    prev.copy_from_slice(&row);
                }
                table.push(extrapolated.concat());
                if k == 0 {
                    continue;
                }
                let t = &table[k];
                let best = &t[k * m..(k + 1) * m];
                let second = &t[(k - 1) * m..k * m];
                let err = self.error_norm(best, second, y);
                let expo = 1.0 / (2 * k + 1) as f64;
                let fac = if err == 0.0 {
                    MAX_GROWTH
                } else {
                    (SAFETY * (SAFETY_ERR / err).powf(expo)).clamp(MIN_SHRINK, MAX_GROWTH)
                };
                step_factor[k] = fac;
                work[k] = self.cost[k] / fac;
                reject_factor = fac.min(0.5);
                if k + 1 >= self.target && err <= 1.0 {
                    accepted = Some((k, best.to_vec()));
                    break;
                }
            }
            match accepted {
                Some((k, delta)) => {
                    let (target, fac) = if k >= 2 && work[k - 1] < 0.8 * work[k] {
                        (k - 1, step_factor[k - 1])
                    } else if k + 1 < self.columns - 1 && work[k] < 0.9 * work[k - 1] {
                        (k + 1, step_factor[k] * self.cost[k + 1] / self.cost[k])
                    } else {
                        (k, step_factor[k])
                    };
                    self.target = target.clamp(2, self.columns - 2);
                    let fac = fac.clamp(MIN_SHRINK, MAX_GROWTH);
                    return Ok((h, Step { delta, h_next: h * fac }));
                }
                None => {
                    self.target = (self.target.saturating_sub(1)).max(2);
                    h *= reject_factor;
                }
            }
        }
    }
}

/// Integrate from `y` over exactly `span` (may be negative), with adaptive
/// steps that stop on the end point.
pub(crate) fn propagate(system: &dyn HamiltonianSystem, y: &[f64], span: f64, tolerance: f64) -> Result<Vec<f64>> {
    if span == 0.0 {
        return Ok(y.to_vec());
    }
    let mut gbs = Gbs::new(system, tolerance, 10);
    let mut state = State::new(y.to_vec());
    let mut t = 0.0;
    let mut h = span;
    let mut steps = 0;
    while (span - t).abs() > 1e-15 * span.abs() {
        let remaining = span - t;
        if h.abs() > remaining.abs() {
            h = remaining;
        }
        let (taken, step) = gbs.step(&state.y, h)?;
        t += taken;
        state.advance(&step.delta);
        h = step.h_next;
        steps += 1;
        if steps > 100_000 {
            return Err(Error::Integration("too many steps in propagation".into()));
        }
    }
    Ok(state.y)
}
