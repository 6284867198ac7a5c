//! Action-grid probing: starting from one fitted torus, fit the lattice
//! labels next to every accepted torus, seeding each fit from an accepted
//! neighbour, until a wavefront produces nothing new.

mod grid;
mod torus;

pub use grid::{ActionGrid, Index};
pub use torus::{write_probe, TorusConstructor, PROBE_SCHEMA_VERSION};

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Builds a torus for an action label from a seed torus and scores it.
pub trait Constructor: Sync {
    type Torus: Send + Sync;

    fn construct(&self, label: &[f64], seed: &Self::Torus) -> Result<Self::Torus>;

    /// Smaller is better; a torus is good when this is at most the threshold.
    /// Non-finite values are never good.
    fn goodness(&self, torus: &Self::Torus) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ProbeOptions {
    /// Fit the members of a wavefront on the rayon pool.
    pub parallel: bool,
}

/// One fitted lattice point.
#[derive(Debug, Clone)]
pub struct ProbeRecord<T> {
    pub index: Index,
    pub label: Vec<f64>,
    /// Wavefront the fit belongs to (`0` for the seed fit).
    pub generation: usize,
    pub parent: Option<Index>,
    pub goodness: f64,
    pub accepted: bool,
    /// `None` when construction itself failed; see `error`.
    pub torus: Option<T>,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct ProbeState<T> {
    pub grid: ActionGrid,
    pub threshold: f64,
    /// Accepted wavefronts `S₀, S₁, …`; the empty terminating one is not
    /// stored.
    pub generations: Vec<Vec<Index>>,
    /// Every fitted index, accepted or not.
    pub records: BTreeMap<Index, ProbeRecord<T>>,
}

impl<T> ProbeState<T> {
    pub fn accepted(&self) -> impl Iterator<Item = &ProbeRecord<T>> {
        self.records.values().filter(|r| r.accepted)
    }

    pub fn rejected(&self) -> impl Iterator<Item = &ProbeRecord<T>> {
        self.records.values().filter(|r| !r.accepted)
    }

    pub fn accepted_indices(&self) -> BTreeSet<Index> {
        self.accepted().map(|r| r.index.clone()).collect()
    }

    pub fn fit_count(&self) -> usize {
        self.records.len()
    }
}

/// Number of 8-connected components of `set` on `grid`.
pub fn connected_components(grid: &ActionGrid, set: &BTreeSet<Index>) -> usize {
    let mut seen = BTreeSet::new();
    let mut count = 0;
    for start in set {
        if !seen.insert(start.clone()) {
            continue;
        }
        count += 1;
        let mut stack = vec![start.clone()];
        while let Some(i) = stack.pop() {
            for j in grid.adjacent_points(&i) {
                if set.contains(&j) && seen.insert(j.clone()) {
                    stack.push(j);
                }
            }
        }
    }
    count
}

/// Run the wavefront expansion from `seed` (a torus with actions near
/// `seed_actions`).
///
/// The seed torus is refitted at the lattice point nearest `seed_actions`;
/// if that is rejected the probe ends with no generations. Afterwards every
/// unvisited neighbour of wavefront `i` is fitted once, seeded by its
/// adjacent wavefront-`i` torus of lowest goodness (ties to the smallest
/// index), and the accepted ones form wavefront `i + 1`.
pub fn probe<C: Constructor>(
    constructor: &C,
    grid: &ActionGrid,
    seed_actions: &[f64],
    seed: &C::Torus,
    threshold: f64,
    options: ProbeOptions,
) -> Result<ProbeState<C::Torus>> {
    if !(threshold >= 0.0) {
        return Err(Error::InvalidParameter(format!("probe threshold must be >= 0, got {threshold}")));
    }
    let mut state = ProbeState {
        grid: grid.clone(),
        threshold,
        generations: Vec::new(),
        records: BTreeMap::new(),
    };
    let start = grid.nearest_point(seed_actions)?;
    let record = fit_one(constructor, grid, threshold, &start, seed, None, 0);
    let accepted = record.accepted;
    state.records.insert(start.clone(), record);
    if !accepted {
        log::warn!("seed fit at {start:?} was rejected; nothing to expand");
        return Ok(state);
    }
    state.generations.push(vec![start]);

    loop {
        let generation = state.generations.len();
        let front = state.generations.last().expect("nonempty");
        let mut parents: BTreeMap<Index, Index> = BTreeMap::new();
        for p in front {
            for q in grid.adjacent_points(p) {
                if state.records.contains_key(&q) {
                    continue;
                }
                let better = match parents.get(&q) {
                    None => true,
                    Some(current) => {
                        let (a, b) = (state.records[p].goodness, state.records[current].goodness);
                        a < b || (a == b && p < current)
                    }
                };
                if better {
                    parents.insert(q, p.clone());
                }
            }
        }
        let jobs: Vec<(Index, Index)> = parents.into_iter().collect();
        let fit = |(index, parent): &(Index, Index)| {
            let seed = state.records[parent].torus.as_ref().expect("accepted records hold a torus");
            fit_one(constructor, grid, threshold, index, seed, Some(parent.clone()), generation)
        };
        let fitted: Vec<ProbeRecord<C::Torus>> = if options.parallel {
            jobs.par_iter().map(fit).collect()
        } else {
            jobs.iter().map(fit).collect()
        };
        let next: Vec<Index> = fitted.iter().filter(|r| r.accepted).map(|r| r.index.clone()).collect();
        log::info!(
            "generation {generation}: {} fitted, {} accepted",
            fitted.len(),
            next.len()
        );
        for r in fitted {
            state.records.insert(r.index.clone(), r);
        }
        if next.is_empty() {
            return Ok(state);
        }
        state.generations.push(next);
    }
}

fn fit_one<C: Constructor>(
    constructor: &C,
    grid: &ActionGrid,
    threshold: f64,
    index: &[usize],
    seed: &C::Torus,
    parent: Option<Index>,
    generation: usize,
) -> ProbeRecord<C::Torus> {
    let label = grid.point(index);
    let (torus, error) = match constructor.construct(&label, seed) {
        Ok(t) => (Some(t), None),
        Err(e) => {
            log::debug!("fit at {index:?} failed: {e}");
            (None, Some(e.to_string()))
        }
    };
    let goodness = torus.as_ref().map_or(f64::INFINITY, |t| constructor.goodness(t));
    ProbeRecord {
        index: index.to_vec(),
        label,
        generation,
        parent,
        goodness,
        accepted: goodness.is_finite() && goodness <= threshold,
        torus,
        error,
    }
}
