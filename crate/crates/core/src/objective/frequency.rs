use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Condition number of `AᵀA` above which the torus is treated as degenerate.
pub const MAX_CONDITION: f64 = 1e12;

/// Least-squares frequencies from the stacked flow equations
/// `(∂p/∂θ) ω = −∂H/∂q`, `(∂q/∂θ) ω = ∂H/∂p` over the whole grid.
#[derive(Debug, Clone)]
pub struct FrequencySolve {
    /// `2nM × n`; per grid point the `∂p/∂θ` rows then the `∂q/∂θ` rows.
    pub a: DMatrix<f64>,
    /// `−∂H/∂q` then `+∂H/∂p` per grid point.
    pub b: DVector<f64>,
    pub omega: DVector<f64>,
    /// `(AᵀA)⁻¹`.
    pub normal_inverse: DMatrix<f64>,
    /// Condition number of `AᵀA`.
    pub condition: f64,
}

impl FrequencySolve {
    /// Solve through a QR factorisation of `A`.
    pub fn solve(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        let n = a.ncols();
        let qr = a.clone().qr();
        let r = qr.r();
        let sv = r.singular_values();
        let smax = sv.max();
        let smin = sv.min();
        let condition = if smin > 0.0 { (smax / smin).powi(2) } else { f64::INFINITY };
        if !(condition <= MAX_CONDITION) || !smax.is_finite() || smax == 0.0 {
            return Err(Error::DegenerateTorus { condition });
        }
        let mut qtb = b.clone();
        qr.q_tr_mul(&mut qtb);
        let rhs = qtb.rows(0, n).into_owned();
        let omega = r
            .solve_upper_triangular(&rhs)
            .ok_or(Error::DegenerateTorus { condition })?;
        let r_inv = r
            .clone()
            .try_inverse()
            .ok_or(Error::DegenerateTorus { condition })?;
        let normal_inverse = &r_inv * r_inv.transpose();
        Ok(Self {
            a,
            b,
            omega,
            normal_inverse,
            condition,
        })
    }

    /// `Aω − b`, the stacked flow residuals.
    pub fn residual(&self) -> DVector<f64> {
        &self.a * &self.omega - &self.b
    }
}
