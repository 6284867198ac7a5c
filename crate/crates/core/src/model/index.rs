//! Multi-indices of retained harmonics and the family coefficient masks.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::MAX_DIM;

/// A Fourier multi-index `k`. For one-dimensional models only `k[0]` is used
/// and `k[1]` is always zero.
pub type Harmonic = [i32; MAX_DIM];

/// Phase `k·θ` of a harmonic over the first `n` angle components.
#[inline]
pub fn phase(k: &Harmonic, theta: &[f64]) -> f64 {
    k.iter().zip(theta).map(|(&ki, &t)| ki as f64 * t).sum()
}

/// Orbit family a model is built for. The family fixes which coefficient
/// slots are free; all others are identically zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Planar box orbits: `a₁, d₁` on (odd, even) and `a₂, d₂` on (even, odd).
    Box,
    /// Planar loop orbits: `b₁, a₂, c₁, d₂` on (even, odd).
    Loop,
    /// One degree of freedom, `p = Σ a_k cos kθ`, `q = Σ d_k sin kθ`, odd `k`.
    #[serde(rename = "1d-odd")]
    OddHarmonic1d,
    /// All four tables, no parity restriction.
    General,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Box => "box",
            Family::Loop => "loop",
            Family::OddHarmonic1d => "1d-odd",
            Family::General => "general",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "box" => Ok(Family::Box),
            "loop" => Ok(Family::Loop),
            "1d-odd" => Ok(Family::OddHarmonic1d),
            "general" => Ok(Family::General),
            other => Err(Error::UnknownFamily(other.to_string())),
        }
    }
}

/// The four amplitude tables of the trigonometric model
/// `p = Σ a cos(k·θ) + b sin(k·θ)`, `q = Σ c cos(l·θ) + d sin(l·θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Table {
    A,
    B,
    C,
    D,
}

impl Table {
    pub const ALL: [Table; 4] = [Table::A, Table::B, Table::C, Table::D];

    /// True for the momentum tables `a`, `b`.
    #[inline]
    pub fn is_momentum(self) -> bool {
        matches!(self, Table::A | Table::B)
    }

    /// True for the cosine tables `a`, `c`.
    #[inline]
    pub fn is_cosine(self) -> bool {
        matches!(self, Table::A | Table::C)
    }
}

/// One free coefficient: table, phase-space component and harmonic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Slot {
    pub table: Table,
    pub component: usize,
    pub k: Harmonic,
}

/// An ordered set of multi-indices containing no pair `k`, `−k`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FourierIndexSet {
    indices: Vec<Harmonic>,
}

impl FourierIndexSet {
    pub fn new(indices: Vec<Harmonic>) -> Self {
        Self { indices }
    }

    pub fn indices(&self) -> &[Harmonic] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, k: &Harmonic) -> bool {
        self.indices.contains(k)
    }

    pub fn position(&self, k: &Harmonic) -> Option<usize> {
        self.indices.iter().position(|x| x == k)
    }

    /// True when no stored index is the negation of another stored index.
    pub fn has_no_opposites(&self) -> bool {
        self.indices.iter().enumerate().all(|(i, k)| {
            let neg = [-k[0], -k[1]];
            self.indices
                .iter()
                .enumerate()
                .all(|(j, other)| j == i || *other != neg)
        })
    }

    pub fn intersection(&self, other: &FourierIndexSet) -> FourierIndexSet {
        FourierIndexSet::new(
            self.indices
                .iter()
                .filter(|k| other.contains(k))
                .copied()
                .collect(),
        )
    }
}

/// Canonical enumeration of the half-lattice `|k_i| ≤ order`.
///
/// One dimension: `k = 1, 2, …, order`.
/// Two dimensions: `k₁ = 0, 1, …, order` (outer), `k₂ = −order, …, order`
/// (inner), keeping only `k₁ > 0` or `k₁ = 0, k₂ > 0`. The zero index is
/// prepended when `with_zero` is set.
pub fn half_lattice(n: usize, order: u32, with_zero: bool) -> Vec<Harmonic> {
    let order = order as i32;
    let mut out = Vec::new();
    if with_zero {
        out.push([0, 0]);
    }
    match n {
        1 => out.extend((1..=order).map(|k| [k, 0])),
        _ => {
            for k1 in 0..=order {
                for k2 in -order..=order {
                    if k1 > 0 || k2 > 0 {
                        out.push([k1, k2]);
                    }
                }
            }
        }
    }
    out
}

#[inline]
fn is_odd(k: i32) -> bool {
    k.rem_euclid(2) == 1
}

fn odd_even(k: &Harmonic) -> bool {
    is_odd(k[0]) && !is_odd(k[1])
}

fn even_odd(k: &Harmonic) -> bool {
    !is_odd(k[0]) && is_odd(k[1])
}

/// Free coefficient slots of a family, in parameter-vector order: tables
/// `a, b, c, d`; within a table by component; within a component by the
/// [`half_lattice`] enumeration.
pub fn family_slots(family: Family, n: usize, order: u32) -> Result<Vec<Slot>> {
    if order < 1 {
        return Err(Error::InvalidParameter("harmonic order must be at least 1".into()));
    }
    let expected_dim = match family {
        Family::Box | Family::Loop => Some(2),
        Family::OddHarmonic1d => Some(1),
        Family::General => None,
    };
    if let Some(d) = expected_dim {
        if n != d {
            return Err(Error::DimensionMismatch {
                family: family.to_string(),
                dim: n,
            });
        }
    }
    if n == 0 || n > MAX_DIM {
        return Err(Error::DimensionMismatch {
            family: family.to_string(),
            dim: n,
        });
    }

    let rule = |table: Table, component: usize, k: &Harmonic| -> bool {
        match family {
            Family::Box => match (table, component) {
                (Table::A, 0) | (Table::D, 0) => odd_even(k),
                (Table::A, 1) | (Table::D, 1) => even_odd(k),
                _ => false,
            },
            Family::Loop => match (table, component) {
                (Table::B, 0) | (Table::A, 1) | (Table::C, 0) | (Table::D, 1) => even_odd(k),
                _ => false,
            },
            Family::OddHarmonic1d => {
                matches!(table, Table::A | Table::D) && is_odd(k[0])
            }
            Family::General => {
                // constant terms only exist for the cosine tables
                table.is_cosine() || *k != [0, 0]
            }
        }
    };

    let lattice = half_lattice(n, order, family == Family::General);
    let mut slots = Vec::new();
    for table in Table::ALL {
        for component in 0..n {
            for k in &lattice {
                if rule(table, component, k) {
                    slots.push(Slot {
                        table,
                        component,
                        k: *k,
                    });
                }
            }
        }
    }
    Ok(slots)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_lattice_has_no_opposites() {
        let set = FourierIndexSet::new(half_lattice(2, 5, true));
        assert!(set.has_no_opposites());
        assert_eq!(set.len(), 1 + (11 * 11 - 1) / 2);
    }

    #[test]
    fn box_order_one_is_minimal() {
        let slots = family_slots(Family::Box, 2, 1).unwrap();
        let expected = vec![
            Slot { table: Table::A, component: 0, k: [1, 0] },
            Slot { table: Table::A, component: 1, k: [0, 1] },
            Slot { table: Table::D, component: 0, k: [1, 0] },
            Slot { table: Table::D, component: 1, k: [0, 1] },
        ];
        assert_eq!(slots, expected);
    }

    #[test]
    fn odd_1d_mask() {
        let slots = family_slots(Family::OddHarmonic1d, 1, 16).unwrap();
        let ks: Vec<i32> = slots.iter().filter(|s| s.table == Table::A).map(|s| s.k[0]).collect();
        assert_eq!(ks, vec![1, 3, 5, 7, 9, 11, 13, 15]);
        assert_eq!(slots.len(), 16);
    }

    #[test]
    fn family_dimension_mismatch() {
        assert!(matches!(
            family_slots(Family::Box, 1, 4),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            family_slots(Family::OddHarmonic1d, 2, 4),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!("banana".parse::<Family>().is_err());
    }

    #[test]
    fn box_and_loop_have_544_slots_at_16() {
        assert_eq!(family_slots(Family::Box, 2, 16).unwrap().len(), 544);
        assert_eq!(family_slots(Family::Loop, 2, 16).unwrap().len(), 544);
    }

    #[test]
    fn negative_parity_is_handled() {
        assert!(is_odd(-3));
        assert!(!is_odd(-2));
        assert!(even_odd(&[-2, 1]));
    }
}
