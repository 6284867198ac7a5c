use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Multi-index `m` of a lattice point `J = (m_h ΔJ_h)`.
pub type Index = Vec<usize>;

/// Rectangular lattice of action labels `J_h = m_h ΔJ_h`, `0 ≤ m_h ≤ max_h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionGrid {
    spacing: Vec<f64>,
    max_index: Vec<usize>,
}

impl ActionGrid {
    pub fn new(spacing: &[f64], max_index: &[usize]) -> Result<Self> {
        if spacing.is_empty() || spacing.len() != max_index.len() {
            return Err(Error::InvalidParameter(format!(
                "action grid needs one spacing and one max index per dimension, got {} and {}",
                spacing.len(),
                max_index.len()
            )));
        }
        if spacing.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
            return Err(Error::InvalidParameter(format!("action grid spacing must be positive, got {spacing:?}")));
        }
        Ok(Self {
            spacing: spacing.to_vec(),
            max_index: max_index.to_vec(),
        })
    }

    /// `dim` axes `0, Δ, 2Δ, …` up to the last multiple not exceeding `extent`.
    pub fn uniform(dim: usize, spacing: f64, extent: f64) -> Result<Self> {
        if !(extent.is_finite() && extent >= 0.0) {
            return Err(Error::InvalidParameter(format!("action grid extent must be >= 0, got {extent}")));
        }
        let max = (extent / spacing + 1e-9).floor();
        if !max.is_finite() {
            return Err(Error::InvalidParameter(format!("action grid spacing must be positive, got {spacing}")));
        }
        Self::new(&vec![spacing; dim], &vec![max as usize; dim])
    }

    pub fn dim(&self) -> usize {
        self.spacing.len()
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn max_index(&self) -> &[usize] {
        &self.max_index
    }

    pub fn len(&self) -> usize {
        self.max_index.iter().map(|m| m + 1).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, index: &[usize]) -> bool {
        index.len() == self.dim() && index.iter().zip(&self.max_index).all(|(m, max)| m <= max)
    }

    pub fn point(&self, index: &[usize]) -> Vec<f64> {
        index.iter().zip(&self.spacing).map(|(&m, d)| m as f64 * d).collect()
    }

    /// All indices in lexicographic order.
    pub fn indices(&self) -> Vec<Index> {
        let mut out = vec![Vec::new()];
        for &max in &self.max_index {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..=max).map(move |m| {
                        let mut i = prefix.clone();
                        i.push(m);
                        i
                    })
                })
                .collect();
        }
        out
    }

    /// Lattice point closest to `actions`, clamped to the lattice. Exact ties
    /// go to the smaller index.
    pub fn nearest_point(&self, actions: &[f64]) -> Result<Index> {
        if actions.len() != self.dim() || actions.iter().any(|j| !j.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "nearest lattice point needs {} finite actions, got {actions:?}",
                self.dim()
            )));
        }
        // the Euclidean distance separates, so each axis is rounded on its own
        Ok(actions
            .iter()
            .zip(&self.spacing)
            .zip(&self.max_index)
            .map(|((&j, &d), &max)| {
                let lower = (j / d).floor().clamp(0.0, max as f64);
                let upper = (lower + 1.0).min(max as f64);
                let below = (j - lower * d).abs();
                let above = (upper * d - j).abs();
                let tie = 1e-12 * d;
                if above < below - tie {
                    upper as usize
                } else {
                    lower as usize
                }
            })
            .collect())
    }

    /// Moore neighbourhood of `index` clipped to the lattice, in lexicographic
    /// order.
    pub fn adjacent_points(&self, index: &[usize]) -> Vec<Index> {
        let mut out = vec![Vec::new()];
        for (&m, &max) in index.iter().zip(&self.max_index) {
            let range = m.saturating_sub(1)..=(m + 1).min(max);
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    range.clone().map(move |k| {
                        let mut i = prefix.clone();
                        i.push(k);
                        i
                    })
                })
                .collect();
        }
        out.retain(|i| i.as_slice() != index);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_point_examples() {
        let g = ActionGrid::uniform(2, 0.05, 1.3).unwrap();
        assert_eq!(g.max_index(), &[26, 26]);
        assert_eq!(g.nearest_point(&[0.19, 0.34]).unwrap(), vec![4, 7]);
        assert_eq!(g.nearest_point(&[0.2, 0.35]).unwrap(), vec![4, 7]);
        assert_eq!(g.nearest_point(&[0.125, 0.0]).unwrap(), vec![2, 0]);
        assert_eq!(g.nearest_point(&[-0.3, 7.0]).unwrap(), vec![0, 26]);
        assert!(g.nearest_point(&[f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn neighbourhood_sizes() {
        let g = ActionGrid::uniform(2, 0.1, 1.0).unwrap();
        assert_eq!(g.adjacent_points(&[5, 5]).len(), 8);
        assert_eq!(g.adjacent_points(&[0, 0]), vec![vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(g.adjacent_points(&[0, 4]).len(), 5);
        assert_eq!(g.adjacent_points(&[10, 10]).len(), 3);
        let single = ActionGrid::new(&[1.0, 1.0], &[0, 0]).unwrap();
        assert!(single.adjacent_points(&[0, 0]).is_empty());
    }

    #[test]
    fn indices_are_lexicographic_and_complete() {
        let g = ActionGrid::new(&[0.5, 1.0], &[2, 1]).unwrap();
        let all = g.indices();
        assert_eq!(all.len(), g.len());
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(g.point(&[2, 1]), vec![1.0, 1.0]);
    }

    #[test]
    fn rejects_bad_spacing() {
        assert!(ActionGrid::new(&[0.0, 1.0], &[1, 1]).is_err());
        assert!(ActionGrid::new(&[1.0], &[1, 1]).is_err());
        assert!(ActionGrid::uniform(2, 0.1, -1.0).is_err());
    }
}
