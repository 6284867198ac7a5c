//! Kinetic-plus-potential Hamiltonians `H(q, p) = ½ p·p + Φ(q)`.
//!
//! Every system here has `∂H/∂p = p` and `∂²H/∂p² = I`; only the potential,
//! its gradient and its Hessian vary.

pub mod jet;
mod pps;

pub use pps::{elliptic_coords, EllipticCoords, GradientMode, Pps};

use serde::{Deserialize, Serialize};
use std::fmt::Debug;

use crate::error::{Error, Result};
use crate::MAX_DIM;

/// Potential value, gradient and Hessian at one configuration point. Only
/// the leading `n` (resp. `n × n`) entries are meaningful.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PotentialDerivatives {
    pub value: f64,
    pub gradient: [f64; MAX_DIM],
    pub hessian: [[f64; MAX_DIM]; MAX_DIM],
}

pub trait HamiltonianSystem: Debug + Send + Sync {
    fn dim(&self) -> usize;

    fn potential(&self, q: &[f64]) -> f64;

    fn potential_gradient(&self, q: &[f64]) -> [f64; MAX_DIM] {
        self.potential_derivatives(q).gradient
    }

    fn potential_derivatives(&self, q: &[f64]) -> PotentialDerivatives;

    fn hamiltonian(&self, q: &[f64], p: &[f64]) -> f64 {
        0.5 * p.iter().map(|x| x * x).sum::<f64>() + self.potential(q)
    }

    /// `(∂H/∂q, ∂H/∂p)`.
    fn gradient(&self, q: &[f64], p: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let g = self.potential_gradient(q);
        (g[..self.dim()].to_vec(), p.to_vec())
    }
}

/// `Φ = ½ Σ ω_i² q_i²`.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicOscillator {
    frequencies: Vec<f64>,
}

impl HarmonicOscillator {
    pub fn new(frequencies: &[f64]) -> Result<Self> {
        if frequencies.is_empty() || frequencies.len() > MAX_DIM {
            return Err(Error::InvalidParameter("oscillator needs 1 or 2 frequencies".into()));
        }
        if frequencies.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::InvalidParameter("oscillator frequencies must be positive".into()));
        }
        Ok(Self {
            frequencies: frequencies.to_vec(),
        })
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }
}

impl HamiltonianSystem for HarmonicOscillator {
    fn dim(&self) -> usize {
        self.frequencies.len()
    }

    fn potential(&self, q: &[f64]) -> f64 {
        0.5 * self.frequencies.iter().zip(q).map(|(w, x)| w * w * x * x).sum::<f64>()
    }

    fn potential_derivatives(&self, q: &[f64]) -> PotentialDerivatives {
        let mut d = PotentialDerivatives {
            value: self.potential(q),
            ..Default::default()
        };
        for (i, w) in self.frequencies.iter().enumerate() {
            d.gradient[i] = w * w * q[i];
            d.hessian[i][i] = w * w;
        }
        d
    }
}

/// One-dimensional isochrone, `Φ = −c₁ / (c₂ + √(c₂² + q²))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Isochrone {
    c1: f64,
    c2: f64,
}

impl Isochrone {
    pub fn new(c1: f64, c2: f64) -> Result<Self> {
        if !(c1 > 0.0 && c2 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "isochrone needs c1 > 0 and c2 > 0, got c1={c1}, c2={c2}"
            )));
        }
        Ok(Self { c1, c2 })
    }

    /// Energy of the torus whose (one-dimensional) frequency is `omega`:
    /// `H = −(2 c₁ ω)^{2/3} / 2`.
    pub fn energy_for_frequency(&self, omega: f64) -> f64 {
        -0.5 * (2.0 * self.c1 * omega).powf(2.0 / 3.0)
    }
}

impl HamiltonianSystem for Isochrone {
    fn dim(&self) -> usize {
        1
    }

    fn potential(&self, q: &[f64]) -> f64 {
        let s = (self.c2 * self.c2 + q[0] * q[0]).sqrt();
        -self.c1 / (self.c2 + s)
    }

    fn potential_derivatives(&self, q: &[f64]) -> PotentialDerivatives {
        let x = q[0];
        let s = (self.c2 * self.c2 + x * x).sqrt();
        let w = self.c2 + s;
        let grad = self.c1 * x / (s * w * w);
        let x2 = x * x;
        let hess = self.c1 / (s * w * w) * (1.0 - x2 / (s * s) - 2.0 * x2 / (s * w));
        PotentialDerivatives {
            value: -self.c1 / w,
            gradient: [grad, 0.0],
            hessian: [[hess, 0.0], [0.0, 0.0]],
        }
    }
}

/// Planar logarithmic potential `Φ = ½ ln(q₁² + q₂²/c₁² + c₂²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Logarithmic {
    c1: f64,
    c2: f64,
}

impl Logarithmic {
    pub fn new(c1: f64, c2: f64) -> Result<Self> {
        if !(c1 > 0.0 && c2 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "logarithmic potential needs c1 > 0 and c2 > 0, got c1={c1}, c2={c2}"
            )));
        }
        Ok(Self { c1, c2 })
    }
}

impl HamiltonianSystem for Logarithmic {
    fn dim(&self) -> usize {
        2
    }

    fn potential(&self, q: &[f64]) -> f64 {
        let e = 1.0 / (self.c1 * self.c1);
        0.5 * (q[0] * q[0] + q[1] * q[1] * e + self.c2 * self.c2).ln()
    }

    fn potential_derivatives(&self, q: &[f64]) -> PotentialDerivatives {
        let e = 1.0 / (self.c1 * self.c1);
        let (x, y) = (q[0], q[1]);
        let d = x * x + y * y * e + self.c2 * self.c2;
        let inv = 1.0 / d;
        let gx = x * inv;
        let gy = y * e * inv;
        PotentialDerivatives {
            value: 0.5 * d.ln(),
            gradient: [gx, gy],
            hessian: [
                [inv - 2.0 * gx * gx, -2.0 * gx * gy],
                [-2.0 * gx * gy, e * inv - 2.0 * gy * gy],
            ],
        }
    }
}

/// Named system with its parameters, as selected from configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum SystemConfig {
    Isochrone { c1: f64, c2: f64 },
    Logarithmic { c1: f64, c2: f64 },
    Pps { c1: f64, c2: f64, c3: f64 },
    Harmonic { frequencies: Vec<f64> },
}

impl SystemConfig {
    pub fn build(&self) -> Result<Box<dyn HamiltonianSystem>> {
        Ok(match self {
            SystemConfig::Isochrone { c1, c2 } => Box::new(Isochrone::new(*c1, *c2)?),
            SystemConfig::Logarithmic { c1, c2 } => Box::new(Logarithmic::new(*c1, *c2)?),
            SystemConfig::Pps { c1, c2, c3 } => Box::new(Pps::new(*c1, *c2, *c3)?),
            SystemConfig::Harmonic { frequencies } => Box::new(HarmonicOscillator::new(frequencies)?),
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            SystemConfig::Isochrone { .. } => 1,
            SystemConfig::Logarithmic { .. } | SystemConfig::Pps { .. } => 2,
            SystemConfig::Harmonic { frequencies } => frequencies.len(),
        }
    }

    /// Parameter values used in the reference experiments.
    pub fn isochrone_default() -> Self {
        SystemConfig::Isochrone { c1: 1.0, c2: 0.15 }
    }

    pub fn logarithmic_default() -> Self {
        SystemConfig::Logarithmic { c1: 0.9, c2: 1.0 }
    }

    pub fn pps_default() -> Self {
        SystemConfig::Pps {
            c1: -1.0,
            c2: -0.25,
            c3: 1.0,
        }
    }
}

/// Centered-difference derivatives of the potential, for checks.
pub fn finite_difference_derivatives(system: &dyn HamiltonianSystem, q: &[f64], step: f64) -> PotentialDerivatives {
    let n = system.dim();
    let mut d = PotentialDerivatives {
        value: system.potential(q),
        ..Default::default()
    };
    for i in 0..n {
        let h = step * (1.0 + q[i].abs());
        let mut qp = q.to_vec();
        let mut qm = q.to_vec();
        qp[i] += h;
        qm[i] -= h;
        d.gradient[i] = (system.potential(&qp) - system.potential(&qm)) / (2.0 * h);
        let gp = system.potential_gradient(&qp);
        let gm = system.potential_gradient(&qm);
        for j in 0..n {
            d.hessian[j][i] = (gp[j] - gm[j]) / (2.0 * h);
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};

    fn check_derivatives(system: &dyn HamiltonianSystem, q: &[f64], tol: f64) {
        let exact = system.potential_derivatives(q);
        let fd = finite_difference_derivatives(system, q, 1e-6);
        let n = system.dim();
        let scale = |v: f64| v.abs().max(1.0);
        for i in 0..n {
            assert!(
                (exact.gradient[i] - fd.gradient[i]).abs() <= tol * scale(fd.gradient[i]),
                "gradient {i} at {q:?}: {} vs {}",
                exact.gradient[i],
                fd.gradient[i]
            );
            for j in 0..n {
                assert!(
                    (exact.hessian[i][j] - fd.hessian[i][j]).abs() <= 1e-5 * scale(fd.hessian[i][j]),
                    "hessian {i}{j} at {q:?}: {} vs {}",
                    exact.hessian[i][j],
                    fd.hessian[i][j]
                );
            }
        }
        assert_abs_diff_eq!(exact.value, system.potential(q), epsilon = 1e-15);
    }

    #[test]
    fn isochrone_values() {
        let iso = Isochrone::new(1.0, 0.15).unwrap();
        assert_relative_eq!(iso.hamiltonian(&[0.0], &[0.0]), -10.0 / 3.0, max_relative = 1e-15);
        assert_eq!(iso.potential_gradient(&[0.0])[0], 0.0);
        assert_relative_eq!(iso.energy_for_frequency(1.0), -0.793700525984, max_relative = 1e-11);
    }

    #[test]
    fn logarithmic_values() {
        let log = Logarithmic::new(0.9, 1.0).unwrap();
        assert_eq!(log.potential(&[0.0, 0.0]), 0.0);
        assert_relative_eq!(log.potential(&[1.0, 0.0]), 0.5 * 2f64.ln(), max_relative = 1e-15);
        let exact = log.potential_derivatives(&[1.0, 0.9]);
        let fd = finite_difference_derivatives(&log, &[1.0, 0.9], 1e-5);
        for i in 0..2 {
            assert_abs_diff_eq!(exact.gradient[i], fd.gradient[i], epsilon = 1e-8);
        }
    }

    #[test]
    fn random_gradient_checks() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        let systems: Vec<Box<dyn HamiltonianSystem>> = vec![
            Box::new(Isochrone::new(1.0, 0.15).unwrap()),
            Box::new(Logarithmic::new(0.9, 1.0).unwrap()),
            Box::new(HarmonicOscillator::new(&[1.0, 1.3]).unwrap()),
        ];
        for sys in &systems {
            for _ in 0..100 {
                let q: Vec<f64> = (0..sys.dim()).map(|_| rng.gen_range(-2.0..2.0)).collect();
                check_derivatives(sys.as_ref(), &q, 1e-6);
            }
        }
    }

    #[test]
    fn hamiltonian_symmetries() {
        let log = Logarithmic::new(0.9, 1.0).unwrap();
        let h = |q: [f64; 2], p: [f64; 2]| log.hamiltonian(&q, &p);
        let (q, p) = ([0.3, -0.8], [0.2, 0.5]);
        assert_eq!(h(q, p), h([-q[0], q[1]], p));
        assert_eq!(h(q, p), h([q[0], -q[1]], p));
        assert_eq!(h(q, p), h(q, [-p[0], -p[1]]));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Isochrone::new(-1.0, 0.15).is_err());
        assert!(Logarithmic::new(0.9, 0.0).is_err());
        assert!(HarmonicOscillator::new(&[]).is_err());
    }

    #[test]
    fn config_dispatch() {
        let cfg: SystemConfig = serde_json::from_str(r#"{"name":"pps","c1":-1,"c2":-0.25,"c3":1}"#).unwrap();
        assert_eq!(cfg, SystemConfig::pps_default());
        assert_eq!(cfg.build().unwrap().dim(), 2);
    }
}
