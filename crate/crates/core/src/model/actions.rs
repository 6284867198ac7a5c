//! Model actions as a bilinear form in the momentum and coordinate amplitudes.
//!
//! `J_h = (1/2π) Σ_j ∮ p_j ∂q_j/∂θ_h dθ_h`. Averaging a product of two
//! trigonometric terms over `θ_h` keeps the sum phase `(k + l)·θ` when
//! `k_h + l_h = 0` and the difference phase `(k − l)·θ` when `k_h = l_h`.
//! Each surviving (momentum slot, coordinate slot) combination is stored as an
//! [`ActionPair`] whose weight is a single trigonometric value of the two
//! phases, so the action at any `θ` needs only the per-slot `cos`, `sin`.

use super::index::{Slot, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairTrig {
    SinSum,
    CosSum,
    SinDiff,
    CosDiff,
}

/// One term `coef · trig(φ_s, φ_t) · x_s · x_t` of the action `J_h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionPair {
    /// Momentum slot (table `a` or `b`).
    pub momentum: usize,
    /// Coordinate slot (table `c` or `d`).
    pub coordinate: usize,
    pub coef: f64,
    pub trig: PairTrig,
}

impl ActionPair {
    /// Weight of the pair given `(cos φ, sin φ)` of the two slots.
    #[inline]
    pub fn weight(&self, cs: f64, ss: f64, ct: f64, st: f64) -> f64 {
        let t = match self.trig {
            PairTrig::SinSum => ss * ct + cs * st,
            PairTrig::CosSum => cs * ct - ss * st,
            PairTrig::SinDiff => ss * ct - cs * st,
            PairTrig::CosDiff => cs * ct + ss * st,
        };
        self.coef * t
    }
}

/// Pairs contributing to `J_h` for each `h < n`.
pub fn action_pairs(slots: &[Slot], n: usize) -> Vec<Vec<ActionPair>> {
    let mut out = vec![Vec::new(); n];
    for (h, pairs) in out.iter_mut().enumerate() {
        for (s, ms) in slots.iter().enumerate() {
            if !ms.table.is_momentum() {
                continue;
            }
            for (t, cs) in slots.iter().enumerate() {
                if cs.table.is_momentum() || cs.component != ms.component {
                    continue;
                }
                let kh = ms.k[h];
                let lh = cs.k[h];
                if lh == 0 {
                    continue;
                }
                let half = 0.5 * lh as f64;
                // k_h + l_h = 0 keeps the sum phase, k_h = l_h the difference phase
                if kh + lh == 0 {
                    let (coef, trig) = match (ms.table, cs.table) {
                        (Table::A, Table::C) => (-half, PairTrig::SinSum),
                        (Table::A, Table::D) => (half, PairTrig::CosSum),
                        (Table::B, Table::C) => (half, PairTrig::CosSum),
                        (Table::B, Table::D) => (half, PairTrig::SinSum),
                        _ => unreachable!(),
                    };
                    pairs.push(ActionPair { momentum: s, coordinate: t, coef, trig });
                }
                if kh == lh {
                    let (coef, trig) = match (ms.table, cs.table) {
                        (Table::A, Table::C) => (half, PairTrig::SinDiff),
                        (Table::A, Table::D) => (half, PairTrig::CosDiff),
                        (Table::B, Table::C) => (-half, PairTrig::CosDiff),
                        (Table::B, Table::D) => (half, PairTrig::SinDiff),
                        _ => unreachable!(),
                    };
                    pairs.push(ActionPair { momentum: s, coordinate: t, coef, trig });
                }
            }
        }
    }
    out
}
