use nalgebra::{DMatrix, DVector};
use std::sync::Arc;

use super::frequency::FrequencySolve;
use super::{population_std, Label, ObjectiveSpec};
use crate::dynamics::{HamiltonianSystem, PotentialDerivatives};
use crate::error::{Error, Result};
use crate::model::{basis_derivative, basis_value, index, Mask, ThetaGrid};
use crate::MAX_DIM;

/// Model and Hamiltonian quantities at one grid point.
#[derive(Debug, Clone, Copy, Default)]
pub struct PointState {
    pub q: [f64; MAX_DIM],
    pub p: [f64; MAX_DIM],
    /// `dq[j][i] = ∂q_j/∂θ_i`
    pub dq: [[f64; MAX_DIM]; MAX_DIM],
    pub dp: [[f64; MAX_DIM]; MAX_DIM],
    pub potential: PotentialDerivatives,
    pub energy: f64,
    pub actions: [f64; MAX_DIM],
}

#[derive(Debug, Clone, Copy)]
enum ConsistencyRow {
    Real(usize),
    Imag(usize),
}

#[derive(Debug, Clone)]
struct Layout {
    e1: Option<usize>,
    e2: Option<usize>,
    e3: Option<usize>,
    e4: Option<usize>,
    e5: Option<usize>,
    per_point: usize,
    consistency: Vec<ConsistencyRow>,
}

/// Summary of an objective evaluation at one coefficient vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    /// Squared norm of the full residual vector.
    pub objective: f64,
    pub omega: Vec<f64>,
    pub mean_energy: f64,
    pub sigma: f64,
    pub mean_actions: Vec<f64>,
    /// Unweighted consistency sum at the current frequencies.
    pub consistency: f64,
}

/// Residual/Jacobian evaluator for a fixed system, grid, spec and mask.
///
/// The `cos`/`sin` of every slot phase at every grid point are tabulated once
/// at construction; evaluations only combine them with the coefficients.
pub struct Objective<'a> {
    system: &'a dyn HamiltonianSystem,
    grid: &'a ThetaGrid,
    spec: ObjectiveSpec,
    mask: Arc<Mask>,
    n: usize,
    cos: Vec<f64>,
    sin: Vec<f64>,
    layout: Layout,
}

impl<'a> Objective<'a> {
    pub fn new(system: &'a dyn HamiltonianSystem, grid: &'a ThetaGrid, spec: ObjectiveSpec, mask: Arc<Mask>) -> Result<Self> {
        let n = mask.dim();
        if system.dim() != n || grid.dim() != n {
            return Err(Error::InvalidParameter(format!(
                "dimension mismatch: model {n}, system {}, grid {}",
                system.dim(),
                grid.dim()
            )));
        }
        spec.validate(n)?;

        let slots = mask.slots();
        let mut cos = Vec::with_capacity(grid.len() * slots.len());
        let mut sin = Vec::with_capacity(grid.len() * slots.len());
        for theta in grid.iter() {
            for s in slots {
                let (sn, cs) = index::phase(&s.k, theta).sin_cos();
                cos.push(cs);
                sin.push(sn);
            }
        }

        let w = spec.weights;
        let mut offset = 0;
        let mut take = |active: bool, width: usize| {
            active.then(|| {
                let o = offset;
                offset += width;
                o
            })
        };
        let e1 = take(w.flow_p() > 0.0, n);
        let e2 = take(w.flow_q() > 0.0, n);
        let e3 = take(w.energy_flow() > 0.0, n);
        let e4 = take(w.energy() > 0.0, 1);
        let e5 = take(w.action() > 0.0, n);
        let per_point = offset;

        let mut consistency = Vec::new();
        if spec.consistency > 0.0 {
            for (i, t) in mask.consistency_terms().iter().enumerate() {
                if t.a.is_some() || t.d.is_some() {
                    consistency.push(ConsistencyRow::Real(i));
                }
                if t.b.is_some() || t.c.is_some() {
                    consistency.push(ConsistencyRow::Imag(i));
                }
            }
        }

        Ok(Self {
            system,
            grid,
            spec,
            mask,
            n,
            cos,
            sin,
            layout: Layout {
                e1,
                e2,
                e3,
                e4,
                e5,
                per_point,
                consistency,
            },
        })
    }

    pub fn spec(&self) -> &ObjectiveSpec {
        &self.spec
    }

    pub fn mask(&self) -> &Arc<Mask> {
        &self.mask
    }

    pub fn grid(&self) -> &ThetaGrid {
        self.grid
    }

    pub fn system(&self) -> &dyn HamiltonianSystem {
        self.system
    }

    pub fn residual_count(&self) -> usize {
        self.grid.len() * self.layout.per_point + self.layout.consistency.len()
    }

    pub fn parameter_count(&self) -> usize {
        self.mask.len()
    }

    #[inline]
    fn trig(&self, m: usize, s: usize) -> (f64, f64) {
        let i = m * self.mask.len() + s;
        (self.cos[i], self.sin[i])
    }

    fn needs_actions(&self) -> bool {
        self.layout.e5.is_some()
    }

    fn actions_at(&self, m: usize, coeffs: &[f64], h: usize) -> f64 {
        self.mask
            .action_pairs(h)
            .iter()
            .map(|pair| {
                let (cs, ss) = self.trig(m, pair.momentum);
                let (ct, st) = self.trig(m, pair.coordinate);
                pair.weight(cs, ss, ct, st) * coeffs[pair.momentum] * coeffs[pair.coordinate]
            })
            .sum()
    }

    fn point_states_with(&self, coeffs: &[f64], with_actions: bool) -> Vec<PointState> {
        let n = self.n;
        let slots = self.mask.slots();
        (0..self.grid.len())
            .map(|m| {
                let mut st = PointState::default();
                for (s, (slot, &x)) in slots.iter().zip(coeffs).enumerate() {
                    if x == 0.0 {
                        continue;
                    }
                    let (c, sn) = self.trig(m, s);
                    let v = x * basis_value(slot.table, c, sn);
                    let (val, der) = if slot.table.is_momentum() {
                        (&mut st.p, &mut st.dp)
                    } else {
                        (&mut st.q, &mut st.dq)
                    };
                    val[slot.component] += v;
                    for i in 0..n {
                        der[slot.component][i] += x * basis_derivative(slot.table, &slot.k, i, c, sn);
                    }
                }
                st.potential = self.system.potential_derivatives(&st.q[..n]);
                st.energy = 0.5 * st.p[..n].iter().map(|v| v * v).sum::<f64>() + st.potential.value;
                if with_actions {
                    for h in 0..n {
                        st.actions[h] = self.actions_at(m, coeffs, h);
                    }
                }
                st
            })
            .collect()
    }

    pub fn point_states(&self, coeffs: &[f64]) -> Vec<PointState> {
        self.point_states_with(coeffs, self.needs_actions())
    }

    pub fn frequency_solve(&self, states: &[PointState]) -> Result<FrequencySolve> {
        let n = self.n;
        let rows = 2 * n * states.len();
        let mut a = DMatrix::zeros(rows, n);
        let mut b = DVector::zeros(rows);
        for (m, st) in states.iter().enumerate() {
            let base = 2 * n * m;
            for j in 0..n {
                for i in 0..n {
                    a[(base + j, i)] = st.dp[j][i];
                    a[(base + n + j, i)] = st.dq[j][i];
                }
                b[base + j] = -st.potential.gradient[j];
                b[base + n + j] = st.p[j];
            }
        }
        FrequencySolve::solve(a, b)
    }

    fn frequencies(&self, states: &[PointState]) -> Result<(Vec<f64>, Option<FrequencySolve>)> {
        match &self.spec.label {
            Label::Frequencies { frequencies } => Ok((frequencies.clone(), None)),
            _ => {
                let solve = self.frequency_solve(states)?;
                Ok((solve.omega.iter().copied().collect(), Some(solve)))
            }
        }
    }

    fn energy_reference(&self, states: &[PointState]) -> f64 {
        self.spec
            .energy_reference
            .unwrap_or_else(|| states.iter().map(|s| s.energy).sum::<f64>() / states.len() as f64)
    }

    fn action_reference(&self, states: &[PointState]) -> [f64; MAX_DIM] {
        let mut out = [0.0; MAX_DIM];
        match &self.spec.label {
            Label::Actions { actions } => out[..self.n].copy_from_slice(actions),
            _ => {
                for st in states {
                    for h in 0..self.n {
                        out[h] += st.actions[h];
                    }
                }
                out.iter_mut().for_each(|v| *v /= states.len() as f64);
            }
        }
        out
    }

    fn fill_residuals(&self, coeffs: &[f64], states: &[PointState], omega: &[f64]) -> Result<DVector<f64>> {
        let n = self.n;
        let l = &self.layout;
        let w = self.spec.weights;
        let h_bar = self.energy_reference(states);
        let j_bar = self.action_reference(states);
        let mut r = DVector::zeros(self.residual_count());
        for (m, st) in states.iter().enumerate() {
            let base = m * l.per_point;
            let g = &st.potential.gradient;
            if let Some(o) = l.e1 {
                let s = w.flow_p().sqrt();
                for j in 0..n {
                    let flow: f64 = (0..n).map(|i| st.dp[j][i] * omega[i]).sum();
                    r[base + o + j] = s * (flow + g[j]);
                }
            }
            if let Some(o) = l.e2 {
                let s = w.flow_q().sqrt();
                for j in 0..n {
                    let flow: f64 = (0..n).map(|i| st.dq[j][i] * omega[i]).sum();
                    r[base + o + j] = s * (flow - st.p[j]);
                }
            }
            if let Some(o) = l.e3 {
                let s = w.energy_flow().sqrt();
                for i in 0..n {
                    let v: f64 = (0..n).map(|j| g[j] * st.dq[j][i] + st.p[j] * st.dp[j][i]).sum();
                    r[base + o + i] = s * v;
                }
            }
            if let Some(o) = l.e4 {
                r[base + o] = w.energy().sqrt() * (st.energy - h_bar);
            }
            if let Some(o) = l.e5 {
                let s = w.action().sqrt();
                for h in 0..n {
                    r[base + o + h] = s * (st.actions[h] - j_bar[h]);
                }
            }
        }
        let offset = self.grid.len() * l.per_point;
        let sr = self.spec.consistency.sqrt();
        let terms = self.mask.consistency_terms();
        let x = |slot: Option<usize>| slot.map_or(0.0, |i| coeffs[i]);
        for (row, c) in l.consistency.iter().enumerate() {
            r[offset + row] = match *c {
                ConsistencyRow::Real(t) => {
                    let t = &terms[t];
                    let kw = index::phase(&t.k, omega);
                    0.5 * sr * (x(t.a) - kw * x(t.d))
                }
                ConsistencyRow::Imag(t) => {
                    let t = &terms[t];
                    let kw = index::phase(&t.k, omega);
                    0.5 * sr * (x(t.b) + kw * x(t.c))
                }
            };
        }
        if let Some(bad) = r.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("residual row {bad}")));
        }
        Ok(r)
    }

    pub fn residuals(&self, coeffs: &[f64]) -> Result<DVector<f64>> {
        let states = self.point_states(coeffs);
        let (omega, _) = self.frequencies(&states)?;
        self.fill_residuals(coeffs, &states, &omega)
    }

    /// Residuals and the exact Jacobian with respect to the coefficients,
    /// including the dependence of the least-squares `ω` and of the grid
    /// means `H̄`, `J̄` on the coefficients.
    pub fn residuals_and_jacobian(&self, coeffs: &[f64]) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let n = self.n;
        let l = &self.layout;
        let w = self.spec.weights;
        let slots = self.mask.slots();
        let ns = slots.len();
        let nm = self.grid.len();
        let inv_m = 1.0 / nm as f64;

        let states = self.point_states(coeffs);
        let (omega, solve) = self.frequencies(&states)?;
        let r = self.fill_residuals(coeffs, &states, &omega)?;

        // dJ_h(θ_m)/dx_s
        let mut djac = vec![vec![0.0; if l.e5.is_some() { nm * ns } else { 0 }]; n];
        if l.e5.is_some() {
            for (h, dj) in djac.iter_mut().enumerate() {
                for pair in self.mask.action_pairs(h) {
                    for m in 0..nm {
                        let (cs, ss) = self.trig(m, pair.momentum);
                        let (ct, st) = self.trig(m, pair.coordinate);
                        let wgt = pair.weight(cs, ss, ct, st);
                        dj[m * ns + pair.momentum] += wgt * coeffs[pair.coordinate];
                        dj[m * ns + pair.coordinate] += wgt * coeffs[pair.momentum];
                    }
                }
            }
        }
        let mean_energy = self.spec.energy_reference.is_none();
        let mean_actions = !matches!(self.spec.label, Label::Actions { .. });

        // unweighted flow residuals f = Aω − b per point, for the ω coupling
        let flow_res: Vec<[[f64; MAX_DIM]; 2]> = states
            .iter()
            .map(|st| {
                let mut f = [[0.0; MAX_DIM]; 2];
                for j in 0..n {
                    let fp: f64 = (0..n).map(|i| st.dp[j][i] * omega[i]).sum();
                    let fq: f64 = (0..n).map(|i| st.dq[j][i] * omega[i]).sum();
                    f[0][j] = fp + st.potential.gradient[j];
                    f[1][j] = fq - st.p[j];
                }
                f
            })
            .collect();

        let rows = self.residual_count();
        let mut jac = DMatrix::zeros(rows, ns);
        let mut domega = DMatrix::zeros(n, ns);
        let (s1, s2, s3, s4, s5) = (
            w.flow_p().sqrt(),
            w.flow_q().sqrt(),
            w.energy_flow().sqrt(),
            w.energy().sqrt(),
            w.action().sqrt(),
        );

        let mut d_energy = vec![0.0; nm];
        for (s, slot) in slots.iter().enumerate() {
            let j = slot.component;
            let momentum = slot.table.is_momentum();
            // Σ_m (∂A/∂x)ᵀ f + Aᵀ (∂f/∂x)|_ω
            let mut coupling = [0.0; MAX_DIM];
            let mut col = jac.column_mut(s);
            for (m, st) in states.iter().enumerate() {
                let (c, sn) = self.trig(m, s);
                let val = basis_value(slot.table, c, sn);
                let mut dval = [0.0; MAX_DIM];
                for (i, d) in dval.iter_mut().enumerate().take(n) {
                    *d = basis_derivative(slot.table, &slot.k, i, c, sn);
                }
                let dflow: f64 = (0..n).map(|i| dval[i] * omega[i]).sum();
                let hess = &st.potential.hessian;
                let g = &st.potential.gradient;

                // ∂E₁, ∂E₂ with ω fixed (unweighted)
                let mut de1 = [0.0; MAX_DIM];
                let mut de2 = [0.0; MAX_DIM];
                let mut de3 = [0.0; MAX_DIM];
                let de_h;
                if momentum {
                    de1[j] = dflow;
                    de2[j] = -val;
                    for i in 0..n {
                        de3[i] = val * st.dp[j][i] + st.p[j] * dval[i];
                    }
                    de_h = st.p[j] * val;
                    for i in 0..n {
                        coupling[i] += dval[i] * flow_res[m][0][j];
                    }
                } else {
                    for (l_, d) in de1.iter_mut().enumerate().take(n) {
                        *d = hess[l_][j] * val;
                    }
                    de2[j] = dflow;
                    for i in 0..n {
                        let curv: f64 = (0..n).map(|l_| hess[l_][j] * val * st.dq[l_][i]).sum();
                        de3[i] = curv + g[j] * dval[i];
                    }
                    de_h = g[j] * val;
                    for i in 0..n {
                        coupling[i] += dval[i] * flow_res[m][1][j];
                    }
                }
                for i in 0..n {
                    coupling[i] += (0..n)
                        .map(|jj| st.dp[jj][i] * de1[jj] + st.dq[jj][i] * de2[jj])
                        .sum::<f64>();
                }

                let base = m * l.per_point;
                if let Some(o) = l.e1 {
                    for jj in 0..n {
                        col[base + o + jj] = s1 * de1[jj];
                    }
                }
                if let Some(o) = l.e2 {
                    for jj in 0..n {
                        col[base + o + jj] = s2 * de2[jj];
                    }
                }
                if let Some(o) = l.e3 {
                    for i in 0..n {
                        col[base + o + i] = s3 * de3[i];
                    }
                }
                d_energy[m] = de_h;
                if let Some(o) = l.e5 {
                    for (h, dj) in djac.iter().enumerate() {
                        col[base + o + h] = s5 * dj[m * ns + s];
                    }
                }
            }
            if let Some(o) = l.e4 {
                let mean = if mean_energy { d_energy.iter().sum::<f64>() * inv_m } else { 0.0 };
                for (m, de) in d_energy.iter().enumerate() {
                    col[m * l.per_point + o] = s4 * (de - mean);
                }
            }
            if let (Some(o), true) = (l.e5, mean_actions) {
                for (h, dj) in djac.iter().enumerate() {
                    let mean = (0..nm).map(|m| dj[m * ns + s]).sum::<f64>() * inv_m;
                    for m in 0..nm {
                        col[m * l.per_point + o + h] -= s5 * mean;
                    }
                }
            }
            if let Some(solve) = &solve {
                let v = DVector::from_iterator(n, coupling.iter().take(n).copied());
                let dw = -(&solve.normal_inverse * v);
                domega.set_column(s, &dw);
            }
        }

        // consistency rows, ω held fixed
        let offset = nm * l.per_point;
        let sr = self.spec.consistency.sqrt();
        let terms = self.mask.consistency_terms();
        let mut consistency_dw = DMatrix::zeros(l.consistency.len(), n);
        for (row, c) in l.consistency.iter().enumerate() {
            match *c {
                ConsistencyRow::Real(t) => {
                    let t = &terms[t];
                    let kw = index::phase(&t.k, &omega);
                    if let Some(i) = t.a {
                        jac[(offset + row, i)] += 0.5 * sr;
                    }
                    if let Some(i) = t.d {
                        jac[(offset + row, i)] -= 0.5 * sr * kw;
                        for h in 0..n {
                            consistency_dw[(row, h)] = -0.5 * sr * t.k[h] as f64 * coeffs[i];
                        }
                    }
                }
                ConsistencyRow::Imag(t) => {
                    let t = &terms[t];
                    let kw = index::phase(&t.k, &omega);
                    if let Some(i) = t.b {
                        jac[(offset + row, i)] += 0.5 * sr;
                    }
                    if let Some(i) = t.c {
                        jac[(offset + row, i)] += 0.5 * sr * kw;
                        for h in 0..n {
                            consistency_dw[(row, h)] = 0.5 * sr * t.k[h] as f64 * coeffs[i];
                        }
                    }
                }
            }
        }

        // chain rule through the least-squares ω: rows that depend on ω
        if solve.is_some() {
            let mut dr_dw = DMatrix::zeros(rows, n);
            for (m, st) in states.iter().enumerate() {
                let base = m * l.per_point;
                for jj in 0..n {
                    for i in 0..n {
                        if let Some(o) = l.e1 {
                            dr_dw[(base + o + jj, i)] = s1 * st.dp[jj][i];
                        }
                        if let Some(o) = l.e2 {
                            dr_dw[(base + o + jj, i)] = s2 * st.dq[jj][i];
                        }
                    }
                }
            }
            dr_dw.rows_mut(offset, l.consistency.len()).copy_from(&consistency_dw);
            jac.gemm(1.0, &dr_dw, &domega, 1.0);
        }

        if let Some(bad) = jac.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("jacobian entry {bad}")));
        }
        Ok((r, jac))
    }

    /// Diagnostics of the current coefficients.
    pub fn evaluate(&self, coeffs: &[f64]) -> Result<Evaluation> {
        let states = self.point_states_with(coeffs, true);
        let (omega, _) = self.frequencies(&states)?;
        let r = self.fill_residuals(coeffs, &states, &omega)?;
        let energies: Vec<f64> = states.iter().map(|s| s.energy).collect();
        let nm = states.len() as f64;
        let mean_actions = (0..self.n)
            .map(|h| states.iter().map(|s| s.actions[h]).sum::<f64>() / nm)
            .collect();
        let model = crate::model::TorusModel::with_coefficients(self.mask.clone(), coeffs.to_vec())?;
        Ok(Evaluation {
            objective: r.norm_squared(),
            consistency: model.consistency_metric(&omega),
            mean_energy: energies.iter().sum::<f64>() / nm,
            sigma: population_std(&energies),
            mean_actions,
            omega,
        })
    }
}
