//! Trigonometric Fourier torus model.
//!
//! A model maps angles `θ ∈ [0, 2π)ⁿ` to a phase-space point through
//!
//! ```text
//! p_j(θ) = Σ_{k∈X} a_{j,k} cos(k·θ) + b_{j,k} sin(k·θ)
//! q_j(θ) = Σ_{l∈Y} c_{j,l} cos(l·θ) + d_{j,l} sin(l·θ)
//! ```
//!
//! Only the slots allowed by the orbit family are stored; the coefficient
//! vector is their dense flattening in [`index::family_slots`] order and is
//! the parameter vector seen by the least-squares solver.

mod actions;
mod grid;
pub mod index;
mod io;

pub use actions::{ActionPair, PairTrig};
pub use grid::ThetaGrid;
pub use index::{Family, FourierIndexSet, Harmonic, Slot, Table};
pub use io::{ModelDocument, MODEL_SCHEMA_VERSION};

use nalgebra::DMatrix;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::MAX_DIM;

/// Slots of one `(k, j)` term of the consistency sum `Σ |α_k − i(k·ω)β_k|²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyTerm {
    pub k: Harmonic,
    pub component: usize,
    pub a: Option<usize>,
    pub b: Option<usize>,
    pub c: Option<usize>,
    pub d: Option<usize>,
}

/// The immutable layout shared by every model of one `(family, n, N)`.
#[derive(Debug)]
pub struct Mask {
    n: usize,
    order: u32,
    family: Family,
    slots: Vec<Slot>,
    lookup: HashMap<Slot, usize>,
    momentum_indices: FourierIndexSet,
    coordinate_indices: FourierIndexSet,
    action_pairs: Vec<Vec<ActionPair>>,
    consistency: Vec<ConsistencyTerm>,
    shared_count: usize,
}

fn distinct_indices<'a>(slots: impl Iterator<Item = &'a Slot>, n: usize, order: u32, with_zero: bool) -> FourierIndexSet {
    let present: std::collections::HashSet<Harmonic> = slots.map(|s| s.k).collect();
    FourierIndexSet::new(
        index::half_lattice(n, order, with_zero)
            .into_iter()
            .filter(|k| present.contains(k))
            .collect(),
    )
}

impl Mask {
    pub fn new(family: Family, n: usize, order: u32) -> Result<Self> {
        let slots = index::family_slots(family, n, order)?;
        let lookup = slots.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        let with_zero = family == Family::General;
        let momentum_indices =
            distinct_indices(slots.iter().filter(|s| s.table.is_momentum()), n, order, with_zero);
        let coordinate_indices =
            distinct_indices(slots.iter().filter(|s| !s.table.is_momentum()), n, order, with_zero);
        let shared = momentum_indices.intersection(&coordinate_indices);
        let action_pairs = actions::action_pairs(&slots, n);

        let mut mask = Self {
            n,
            order,
            family,
            slots,
            lookup,
            momentum_indices,
            coordinate_indices,
            action_pairs,
            consistency: Vec::new(),
            shared_count: shared.len(),
        };
        let mut consistency = Vec::new();
        for k in shared.indices() {
            for component in 0..n {
                let term = ConsistencyTerm {
                    k: *k,
                    component,
                    a: mask.slot_index(Table::A, component, k),
                    b: mask.slot_index(Table::B, component, k),
                    c: mask.slot_index(Table::C, component, k),
                    d: mask.slot_index(Table::D, component, k),
                };
                if term.a.is_some() || term.b.is_some() || term.c.is_some() || term.d.is_some() {
                    consistency.push(term);
                }
            }
        }
        mask.consistency = consistency;
        Ok(mask)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn slot_index(&self, table: Table, component: usize, k: &Harmonic) -> Option<usize> {
        self.lookup
            .get(&Slot {
                table,
                component,
                k: *k,
            })
            .copied()
    }

    /// Index set `X` of the momentum series.
    pub fn momentum_indices(&self) -> &FourierIndexSet {
        &self.momentum_indices
    }

    /// Index set `Y` of the coordinate series.
    pub fn coordinate_indices(&self) -> &FourierIndexSet {
        &self.coordinate_indices
    }

    /// `#C` for `C = X ∩ Y`.
    pub fn shared_count(&self) -> usize {
        self.shared_count
    }

    pub fn action_pairs(&self, h: usize) -> &[ActionPair] {
        &self.action_pairs[h]
    }

    pub fn consistency_terms(&self) -> &[ConsistencyTerm] {
        &self.consistency
    }
}

/// Value and first angle-derivative of one slot's basis function.
#[inline]
pub(crate) fn basis_value(table: Table, cos: f64, sin: f64) -> f64 {
    if table.is_cosine() {
        cos
    } else {
        sin
    }
}

#[inline]
pub(crate) fn basis_derivative(table: Table, k: &Harmonic, i: usize, cos: f64, sin: f64) -> f64 {
    let ki = k[i] as f64;
    if table.is_cosine() {
        -ki * sin
    } else {
        ki * cos
    }
}

/// A phase-space point `(q, p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

/// Angle derivatives: `dq[(j, i)] = ∂q_j/∂θ_i`, `dp[(j, i)] = ∂p_j/∂θ_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDerivatives {
    pub dq: DMatrix<f64>,
    pub dp: DMatrix<f64>,
}

/// Model actions evaluated at one angle tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionValue {
    pub actions: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct TorusModel {
    mask: Arc<Mask>,
    coeffs: Vec<f64>,
}

impl PartialEq for TorusModel {
    fn eq(&self, other: &Self) -> bool {
        self.family() == other.family()
            && self.dim() == other.dim()
            && self.order() == other.order()
            && self.coeffs == other.coeffs
    }
}

impl TorusModel {
    pub fn zeros(family: Family, n: usize, order: u32) -> Result<Self> {
        let mask = Arc::new(Mask::new(family, n, order)?);
        Ok(Self::from_mask(mask))
    }

    pub fn from_mask(mask: Arc<Mask>) -> Self {
        let coeffs = vec![0.0; mask.len()];
        Self { mask, coeffs }
    }

    pub fn with_coefficients(mask: Arc<Mask>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != mask.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} coefficients, got {}",
                mask.len(),
                coeffs.len()
            )));
        }
        Ok(Self { mask, coeffs })
    }

    pub fn mask(&self) -> &Arc<Mask> {
        &self.mask
    }

    pub fn dim(&self) -> usize {
        self.mask.n
    }

    pub fn order(&self) -> u32 {
        self.mask.order
    }

    pub fn family(&self) -> Family {
        self.mask.family
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coefficients_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coefficients(self) -> Vec<f64> {
        self.coeffs
    }

    /// Amplitude of a slot; zero for slots outside the mask.
    pub fn coefficient(&self, table: Table, component: usize, k: &Harmonic) -> f64 {
        self.mask
            .slot_index(table, component, k)
            .map_or(0.0, |i| self.coeffs[i])
    }

    pub fn set_coefficient(&mut self, table: Table, component: usize, k: &Harmonic, value: f64) -> Result<()> {
        match self.mask.slot_index(table, component, k) {
            Some(i) => {
                self.coeffs[i] = value;
                Ok(())
            }
            None if value == 0.0 => Ok(()),
            None => Err(Error::OutsideMask(format!(
                "{:?}[{}]{:?} for family {}",
                table,
                component + 1,
                &k[..self.dim()],
                self.family()
            ))),
        }
    }

    fn trig(&self, theta: &[f64]) -> impl Iterator<Item = (&Slot, f64, f64, f64)> + '_ {
        let theta: [f64; MAX_DIM] = {
            let mut t = [0.0; MAX_DIM];
            t[..theta.len()].copy_from_slice(theta);
            t
        };
        self.mask
            .slots
            .iter()
            .zip(&self.coeffs)
            .map(move |(s, &x)| {
                let (sin, cos) = index::phase(&s.k, &theta).sin_cos();
                (s, x, cos, sin)
            })
    }

    pub fn eval(&self, theta: &[f64]) -> PhasePoint {
        let n = self.dim();
        let mut q = vec![0.0; n];
        let mut p = vec![0.0; n];
        for (s, x, cos, sin) in self.trig(theta) {
            let v = x * basis_value(s.table, cos, sin);
            if s.table.is_momentum() {
                p[s.component] += v;
            } else {
                q[s.component] += v;
            }
        }
        PhasePoint { q, p }
    }

    pub fn eval_derivs(&self, theta: &[f64]) -> PhaseDerivatives {
        let n = self.dim();
        let mut dq = DMatrix::zeros(n, n);
        let mut dp = DMatrix::zeros(n, n);
        for (s, x, cos, sin) in self.trig(theta) {
            let target = if s.table.is_momentum() { &mut dp } else { &mut dq };
            for i in 0..n {
                target[(s.component, i)] += x * basis_derivative(s.table, &s.k, i, cos, sin);
            }
        }
        PhaseDerivatives { dq, dp }
    }

    /// Model actions `J_h(θ)`; `J_h` is independent of `θ_h` by construction.
    pub fn model_actions(&self, theta: &[f64]) -> ActionValue {
        let trig: Vec<(f64, f64)> = self.trig(theta).map(|(_, _, c, s)| (c, s)).collect();
        let actions = (0..self.dim())
            .map(|h| {
                self.mask
                    .action_pairs(h)
                    .iter()
                    .map(|pair| {
                        let (cs, ss) = trig[pair.momentum];
                        let (ct, st) = trig[pair.coordinate];
                        pair.weight(cs, ss, ct, st) * self.coeffs[pair.momentum] * self.coeffs[pair.coordinate]
                    })
                    .sum()
            })
            .collect();
        ActionValue { actions }
    }

    /// `Σ_{k∈X∩Y} |α_k − i(k·ω)β_k|²` with `α = (a − ib)/2`, `β = (c − id)/2`.
    pub fn consistency_metric(&self, omega: &[f64]) -> f64 {
        let x = |slot: Option<usize>| slot.map_or(0.0, |i| self.coeffs[i]);
        self.mask
            .consistency
            .iter()
            .map(|t| {
                let kw = index::phase(&t.k, omega);
                let re = 0.5 * (x(t.a) - kw * x(t.d));
                let im = 0.5 * (x(t.b) + kw * x(t.c));
                re * re + im * im
            })
            .sum()
    }

    /// Replace the momentum series by the time derivative of the coordinate
    /// series under the linear flow `θ̇ = ω`, i.e. `p = (∂q/∂θ) ω`.
    pub fn set_momenta_from_coordinates(&mut self, omega: &[f64]) -> Result<()> {
        let mut updates = Vec::new();
        for (s, &x) in self.mask.slots.iter().zip(&self.coeffs) {
            if s.table.is_momentum() {
                continue;
            }
            let kw = index::phase(&s.k, omega);
            let (table, value) = match s.table {
                Table::C => (Table::B, -x * kw),
                _ => (Table::A, x * kw),
            };
            updates.push((table, s.component, s.k, value));
        }
        for (s, x) in self.mask.slots.iter().zip(self.coeffs.iter_mut()) {
            if s.table.is_momentum() {
                *x = 0.0;
            }
        }
        for (table, component, k, value) in updates {
            if value != 0.0 {
                let current = self.coefficient(table, component, &k);
                self.set_coefficient(table, component, &k, current + value)?;
            }
        }
        Ok(())
    }

    /// Canned starting tori.
    ///
    /// * `box`: independent unit oscillators `q = (sin θ₁, sin θ₂)`,
    ///   `p = (cos θ₁, cos θ₂)`, i.e. `ω = (1, 1)`.
    /// * `loop`: a tilted ellipse with its momenta generated for `ω = (½, ½)`.
    /// * `1d-odd`: the circle `q = r sin θ`, `p = r cos θ` with `r = scale`.
    ///
    /// `scale` multiplies every coefficient.
    pub fn initial_guess(family: Family, order: u32, scale: f64) -> Result<Self> {
        let mut m = match family {
            Family::Box => {
                let mut m = TorusModel::zeros(family, 2, order)?;
                m.set_coefficient(Table::A, 0, &[1, 0], 1.0)?;
                m.set_coefficient(Table::A, 1, &[0, 1], 1.0)?;
                m.set_coefficient(Table::D, 0, &[1, 0], 1.0)?;
                m.set_coefficient(Table::D, 1, &[0, 1], 1.0)?;
                m
            }
            Family::Loop => {
                if order < 2 {
                    return Err(Error::InvalidParameter(
                        "loop initial guess needs harmonic order >= 2".into(),
                    ));
                }
                let mut m = TorusModel::zeros(family, 2, order)?;
                // q₁ = cos θ₂ + cos(2θ₁+θ₂)/20 − cos(−2θ₁+θ₂)/2
                m.set_coefficient(Table::C, 0, &[0, 1], 1.0)?;
                m.set_coefficient(Table::C, 0, &[2, 1], 0.05)?;
                m.set_coefficient(Table::C, 0, &[2, -1], -0.5)?;
                // q₂ = 3/2 sin θ₂ + sin(2θ₁+θ₂)/10 − sin(−2θ₁+θ₂)/2
                m.set_coefficient(Table::D, 1, &[0, 1], 1.5)?;
                m.set_coefficient(Table::D, 1, &[2, 1], 0.1)?;
                m.set_coefficient(Table::D, 1, &[2, -1], 0.5)?;
                m.set_momenta_from_coordinates(&[0.5, 0.5])?;
                m
            }
            Family::OddHarmonic1d => {
                let mut m = TorusModel::zeros(family, 1, order)?;
                m.set_coefficient(Table::A, 0, &[1, 0], 1.0)?;
                m.set_coefficient(Table::D, 0, &[1, 0], 1.0)?;
                m
            }
            Family::General => {
                return Err(Error::InvalidParameter(
                    "no canned initial guess for the general family".into(),
                ))
            }
        };
        if scale != 1.0 {
            m.coeffs.iter_mut().for_each(|x| *x *= scale);
        }
        Ok(m)
    }

    /// Same coefficients re-expressed on another harmonic order; slots that do
    /// not exist in the target are dropped.
    pub fn resized(&self, order: u32) -> Result<Self> {
        let mut out = TorusModel::zeros(self.family(), self.dim(), order)?;
        for (s, &x) in self.mask.slots.iter().zip(&self.coeffs) {
            if let Some(i) = out.mask.slot_index(s.table, s.component, &s.k) {
                out.coeffs[i] = x;
            }
        }
        Ok(out)
    }
}

/// Trapezoid-rule contour integral `(1/2π) Σ_j ∮ p_j ∂q_j/∂θ_h dθ_h` starting
/// from `theta`, using `samples` points. Exact for band-limited integrands
/// once `samples` exceeds twice the highest harmonic in the product.
pub fn contour_action(model: &TorusModel, theta: &[f64], h: usize, samples: usize) -> f64 {
    let mut t = theta.to_vec();
    let mut sum = 0.0;
    for m in 0..samples {
        t[h] = theta[h] + 2.0 * PI * m as f64 / samples as f64;
        let point = model.eval(&t);
        let d = model.eval_derivs(&t);
        sum += (0..model.dim()).map(|j| point.p[j] * d.dq[(j, h)]).sum::<f64>();
    }
    sum / samples as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    fn unit_circle() -> TorusModel {
        TorusModel::initial_guess(Family::OddHarmonic1d, 4, 1.0).unwrap()
    }

    #[test]
    fn box_guess_at_origin() {
        let m = TorusModel::initial_guess(Family::Box, 16, 1.0).unwrap();
        let pt = m.eval(&[0.0, 0.0]);
        assert_eq!(pt.q, vec![0.0, 0.0]);
        assert_eq!(pt.p, vec![1.0, 1.0]);
        let d = m.eval_derivs(&[FRAC_PI_2, FRAC_PI_2]);
        assert_abs_diff_eq!(d.dq, DMatrix::zeros(2, 2), epsilon = 1e-15);
        assert_abs_diff_eq!(d.dp, -DMatrix::identity(2, 2), epsilon = 1e-15);
    }

    #[test]
    fn circle_values_and_slopes() {
        let m = unit_circle();
        let pt = m.eval(&[FRAC_PI_2]);
        assert_abs_diff_eq!(pt.q[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(pt.p[0], 0.0, epsilon = 1e-15);
        let d = m.eval_derivs(&[0.0]);
        assert_eq!(d.dq[(0, 0)], 1.0);
        assert_eq!(d.dp[(0, 0)], 0.0);
    }

    #[test]
    fn loop_guess_at_origin() {
        let m = TorusModel::initial_guess(Family::Loop, 16, 1.0).unwrap();
        let pt = m.eval(&[0.0, 0.0]);
        assert_abs_diff_eq!(pt.q[0], 0.55, epsilon = 1e-15);
        assert_abs_diff_eq!(pt.q[1], 0.0, epsilon = 1e-15);
        // p must be the flow derivative for ω = (½, ½)
        for theta in [[0.3, 1.1], [2.0, -0.4]] {
            let p = m.eval(&theta).p;
            let d = m.eval_derivs(&theta);
            for j in 0..2 {
                let v = 0.5 * (d.dq[(j, 0)] + d.dq[(j, 1)]);
                assert_abs_diff_eq!(p[j], v, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn radius_two_guess() {
        let m = TorusModel::initial_guess(Family::OddHarmonic1d, 16, 2.0).unwrap();
        for t in [0.1, 0.7, 2.5] {
            let pt = m.eval(&[t]);
            assert_abs_diff_eq!(pt.q[0], 2.0 * f64::sin(t), epsilon = 1e-14);
            assert_abs_diff_eq!(pt.p[0], 2.0 * f64::cos(t), epsilon = 1e-14);
        }
    }

    #[test]
    fn circle_action_is_half() {
        let m = unit_circle();
        assert_abs_diff_eq!(m.model_actions(&[0.3]).actions[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(contour_action(&m, &[0.3], 0, 4096), 0.5, epsilon = 1e-12);
        let zero = TorusModel::zeros(Family::Box, 2, 3).unwrap();
        assert_eq!(zero.model_actions(&[0.4, 0.1]).actions, vec![0.0, 0.0]);
    }

    #[test]
    fn loop_guess_action_matches_contour() {
        let m = TorusModel::initial_guess(Family::Loop, 16, 1.0).unwrap();
        for theta in [[0.0, 0.0], [0.7, 2.1]] {
            let j = m.model_actions(&theta).actions;
            for h in 0..2 {
                let oracle = contour_action(&m, &theta, h, 4096);
                assert_abs_diff_eq!(j[h], oracle, epsilon = 1e-10);
            }
        }
        assert!(m.model_actions(&[0.0, 0.0]).actions[0] > 0.0);
    }

    #[test]
    fn consistency_examples() {
        let m = unit_circle();
        assert_abs_diff_eq!(m.consistency_metric(&[1.0]), 0.0, epsilon = 1e-16);
        let mut m2 = m.clone();
        m2.set_coefficient(Table::D, 0, &[1, 0], 0.0).unwrap();
        assert_abs_diff_eq!(m2.consistency_metric(&[1.0]), 0.25, epsilon = 1e-16);
        // loop guess is consistent by construction at ω = (½, ½)
        let lp = TorusModel::initial_guess(Family::Loop, 8, 1.0).unwrap();
        assert_abs_diff_eq!(lp.consistency_metric(&[0.5, 0.5]), 0.0, epsilon = 1e-16);
    }

    #[test]
    fn outside_mask_rejected() {
        let mut m = TorusModel::zeros(Family::Box, 2, 4).unwrap();
        assert!(m.set_coefficient(Table::B, 0, &[1, 0], 1.0).is_err());
        assert!(m.set_coefficient(Table::B, 0, &[1, 0], 0.0).is_ok());
        assert!(m.set_coefficient(Table::A, 0, &[2, 0], 1.0).is_err());
    }

    #[test]
    fn resize_keeps_low_harmonics() {
        let m = TorusModel::initial_guess(Family::Loop, 4, 1.0).unwrap();
        let big = m.resized(8).unwrap();
        let theta = [0.4, 1.3];
        assert_eq!(m.eval(&theta), big.eval(&theta));
    }
}
