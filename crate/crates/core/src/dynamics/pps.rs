//! Perfect prolate spheroid: a Stäckel potential in elliptic coordinates.
//!
//! `Φ(u) = −(f(u₁) − f(u₂)) / (u₁ − u₂)` with `u₁ ≥ −c₁ ≥ u₂ ≥ −c₂` the
//! roots of `t² − (q₁² + q₂² − c₁ − c₂) t + (c₁c₂ − c₂q₁² − c₁q₂²) = 0`, and
//!
//! ```text
//! f(u) = K x F(x / a),  x = u + c₁,  a = −c₁,  K = −2π c₂ c₃,
//! F(z) = arctan(√z)/√z        (z > 0, the u₁ branch)
//!      = artanh(√−z)/√−z      (z < 0, the u₂ branch)
//!      = Σ (−z)ⁿ / (2n + 1)    (series, |z| < 1)
//! ```
//!
//! `f` vanishes linearly at `u = −c₁`, which the closed forms only reach as
//! `0·∞`; small `|z|` goes through the series instead. Near the focal points
//! `u₁ − u₂ → 0` the quotient is replaced by the exact divided difference of
//! the power series of `f`, written through the symmetric functions
//! `x₁ + x₂` and `x₁x₂`, which are polynomials in `q` and keep the result
//! smooth without any square root.

use super::jet::Jet;
use super::{HamiltonianSystem, PotentialDerivatives};
use crate::error::{Error, Result};
use std::f64::consts::PI;

const DISCRIMINANT_CLAMP: f64 = 1e-14;
/// Below this `|z|` the single-variable `F(z)` uses its power series.
const SERIES_Z: f64 = 0.05;
const SERIES_Z_TERMS: usize = 20;
/// Below this `(u₁ − u₂)/a` the quotient uses the divided-difference series.
const FOCAL_RATIO: f64 = 0.1;
const FOCAL_TERMS: usize = 26;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticCoords {
    pub u1: f64,
    pub u2: f64,
}

/// Elliptic coordinates of `q` for parameters `c₁ < c₂ < 0`.
pub fn elliptic_coords(q: &[f64], c1: f64, c2: f64) -> Result<EllipticCoords> {
    if !(c1 < c2 && c2 < 0.0) {
        return Err(Error::InvalidParameter(format!(
            "elliptic coordinates need c1 < c2 < 0, got c1={c1}, c2={c2}"
        )));
    }
    let (x2, y2) = (q[0] * q[0], q[1] * q[1]);
    let sum = -c1 - c2 + x2 + y2;
    let product = c1 * c2 - c2 * x2 - c1 * y2;
    let mut disc = sum * sum - 4.0 * product;
    if disc.abs() < DISCRIMINANT_CLAMP {
        disc = 0.0;
    }
    if disc < 0.0 {
        return Err(Error::EllipticCoordinates(format!(
            "negative discriminant {disc:e} at q={q:?}"
        )));
    }
    let r = disc.sqrt();
    let u1 = 0.5 * (sum + r);
    let u2 = 0.5 * (sum - r);
    let tol = 1e-12 * (1.0 + sum.abs());
    if u2 < -c2 - tol || u2 > -c1 + tol || u1 < -c1 - tol {
        return Err(Error::EllipticCoordinates(format!(
            "u=({u1}, {u2}) outside the band [{}, {}] / [{}, inf)",
            -c2, -c1, -c1
        )));
    }
    Ok(EllipticCoords { u1, u2 })
}

/// How [`Pps`] produces gradients and Hessians.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GradientMode {
    #[default]
    Analytic,
    /// Centered differences of the potential value; only meant for tests.
    FiniteDifference,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pps {
    c1: f64,
    c2: f64,
    c3: f64,
    mode: GradientMode,
}

impl Pps {
    pub fn new(c1: f64, c2: f64, c3: f64) -> Result<Self> {
        if !(c1 < c2 && c2 < 0.0 && c3 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "PPS needs c1 < c2 < 0 and c3 > 0, got c1={c1}, c2={c2}, c3={c3}"
            )));
        }
        Ok(Self {
            c1,
            c2,
            c3,
            mode: GradientMode::Analytic,
        })
    }

    pub fn with_gradient_mode(mut self, mode: GradientMode) -> Self {
        self.mode = mode;
        self
    }

    /// `f(u)` for a scalar argument.
    pub fn f(&self, u: f64) -> f64 {
        self.f_jet(Jet::constant(u)).v
    }

    /// Potential with validation of the elliptic coordinates.
    pub fn try_potential(&self, q: &[f64]) -> Result<f64> {
        elliptic_coords(q, self.c1, self.c2)?;
        Ok(self.potential(q))
    }

    fn scale(&self) -> f64 {
        -2.0 * PI * self.c2 * self.c3
    }

    fn f_jet(&self, u: Jet) -> Jet {
        let a = -self.c1;
        let x = u + self.c1;
        let z = x.scale(1.0 / a);
        let shape = if z.v.abs() < SERIES_Z {
            // Horner on Σ (−z)ⁿ/(2n+1)
            let mut acc = Jet::constant(1.0 / (2 * SERIES_Z_TERMS + 1) as f64);
            for n in (0..SERIES_Z_TERMS).rev() {
                acc = (-z) * acc + 1.0 / (2 * n + 1) as f64;
            }
            acc
        } else if z.v > 0.0 {
            let s = z.sqrt();
            s.atan() / s
        } else {
            let s = (-z).sqrt();
            s.atanh() / s
        };
        (x * shape).scale(self.scale())
    }

    fn potential_jet(&self, q: &[f64]) -> Jet {
        let (c1, c2) = (self.c1, self.c2);
        let x = Jet::variable(q[0], 0);
        let y = Jet::variable(q[1], 1);
        let (x2, y2) = (x * x, y * y);
        let sum = x2 + y2 - (c1 + c2);
        let product = (x2.scale(-c2) - y2.scale(c1)) + c1 * c2;
        let mut disc = sum * sum - product.scale(4.0);
        let a = -c1;
        if disc.v < (FOCAL_RATIO * a).powi(2) {
            // divided difference of f's series through e₁ = x₁+x₂, e₂ = x₁x₂
            let e1 = sum + 2.0 * c1;
            let e2 = product + sum.scale(c1) + c1 * c1;
            let mut h_prev = Jet::constant(1.0);
            let mut h = e1;
            let mut total = h_prev;
            let mut coef = 1.0;
            for n in 1..FOCAL_TERMS {
                coef *= -1.0 / a;
                total = total + h.scale(coef / (2 * n + 1) as f64);
                let next = e1 * h - e2 * h_prev;
                h_prev = h;
                h = next;
            }
            return total.scale(-self.scale());
        }
        if disc.v.abs() < DISCRIMINANT_CLAMP {
            disc.v = 0.0;
        }
        let r = disc.sqrt();
        let u1 = (sum + r).scale(0.5);
        let u2 = (sum - r).scale(0.5);
        -((self.f_jet(u1) - self.f_jet(u2)) / r)
    }
}

impl HamiltonianSystem for Pps {
    fn dim(&self) -> usize {
        2
    }

    fn potential(&self, q: &[f64]) -> f64 {
        self.potential_jet(q).v
    }

    fn potential_derivatives(&self, q: &[f64]) -> PotentialDerivatives {
        match self.mode {
            GradientMode::Analytic => {
                let j = self.potential_jet(q);
                PotentialDerivatives {
                    value: j.v,
                    gradient: j.g,
                    hessian: j.hessian(),
                }
            }
            GradientMode::FiniteDifference => {
                let value = self.potential(q);
                let mut d = PotentialDerivatives {
                    value,
                    ..Default::default()
                };
                let h = 1e-4;
                let f = |dx: f64, dy: f64| self.potential(&[q[0] + dx, q[1] + dy]);
                d.gradient = [
                    (f(h, 0.0) - f(-h, 0.0)) / (2.0 * h),
                    (f(0.0, h) - f(0.0, -h)) / (2.0 * h),
                ];
                let hxx = (f(h, 0.0) - 2.0 * value + f(-h, 0.0)) / (h * h);
                let hyy = (f(0.0, h) - 2.0 * value + f(0.0, -h)) / (h * h);
                let hxy = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4.0 * h * h);
                d.hessian = [[hxx, hxy], [hxy, hyy]];
                d
            }
        }
    }
}
