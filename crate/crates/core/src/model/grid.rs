use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::MAX_DIM;

/// Equally spaced lattice of angle tuples on which the objective is sampled.
///
/// With `reduced` set only the tuples in `[0, π)ⁿ` are kept, which is exact
/// for family-masked models whose harmonics make a half-period shift in any
/// angle a phase-space reflection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "GridSpec", try_from = "GridSpec")]
pub struct ThetaGrid {
    n: usize,
    points_per_dim: usize,
    reduced: bool,
    points: Vec<[f64; MAX_DIM]>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct GridSpec {
    n: usize,
    points_per_dim: usize,
    reduced: bool,
}

impl From<ThetaGrid> for GridSpec {
    fn from(g: ThetaGrid) -> Self {
        GridSpec {
            n: g.n,
            points_per_dim: g.points_per_dim,
            reduced: g.reduced,
        }
    }
}

impl TryFrom<GridSpec> for ThetaGrid {
    type Error = Error;

    fn try_from(s: GridSpec) -> Result<Self> {
        ThetaGrid::new(s.n, s.points_per_dim, s.reduced)
    }
}

impl ThetaGrid {
    pub fn new(n: usize, points_per_dim: usize, reduced: bool) -> Result<Self> {
        if n == 0 || n > MAX_DIM {
            return Err(Error::InvalidParameter(format!("grid dimension {n} not in 1..=2")));
        }
        if points_per_dim < 2 || (reduced && !points_per_dim.is_multiple_of(2)) {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 2 points per dimension (even when reduced), got {points_per_dim}"
            )));
        }
        let kept = if reduced { points_per_dim / 2 } else { points_per_dim };
        let step = 2.0 * PI / points_per_dim as f64;
        let mut points = Vec::with_capacity(kept.pow(n as u32));
        match n {
            1 => points.extend((0..kept).map(|m| [m as f64 * step, 0.0])),
            _ => {
                for m1 in 0..kept {
                    for m2 in 0..kept {
                        points.push([m1 as f64 * step, m2 as f64 * step]);
                    }
                }
            }
        }
        Ok(Self {
            n,
            points_per_dim,
            reduced,
            points,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn points_per_dim(&self) -> usize {
        self.points_per_dim
    }

    pub fn is_reduced(&self) -> bool {
        self.reduced
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Angle tuple `m`; only the first `dim()` entries are meaningful.
    pub fn point(&self, m: usize) -> &[f64] {
        &self.points[m][..self.n]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.points.iter().map(move |p| &p[..self.n])
    }

    /// Number of full-lattice points each kept point stands for.
    pub fn multiplicity(&self) -> usize {
        if self.reduced {
            1 << self.n
        } else {
            1
        }
    }
}
