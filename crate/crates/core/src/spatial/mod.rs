//! Exact k-nearest-neighbour queries on the unit torus.
//!
//! Results are ordered by squared toroidal distance, then by label. Two
//! backends answer the same queries: a k-d tree for low dimensions and a
//! linear scan for high ones. [`brute_force_k_nearest`] is the reference the
//! tests hold both against.

mod kdtree;

use std::cmp::Ordering;

use thiserror::Error;

use crate::formula::Var;
use crate::torus::{squared_distance_slices, torus_distance_squared, TorusPoint};

use kdtree::KdTree;

/// From this dimension on, [`BackendPolicy::Auto`] picks the linear scan.
pub const D_FALLBACK: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpatialError {
    #[error("cannot index an empty point set")]
    Empty,
    #[error("point has dimension {got}, index dimension is {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("label {0} appears more than once")]
    DuplicateLabel(u32),
    #[error("asked for {k} neighbours but only {available} points are indexed")]
    NotEnoughPoints { k: usize, available: usize },
    #[error("k must be positive")]
    ZeroK,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPoint {
    pub label: Var,
    pub point: TorusPoint,
}

impl LabeledPoint {
    pub fn new(label: Var, point: TorusPoint) -> Self {
        LabeledPoint { label, point }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BackendPolicy {
    #[default]
    Auto,
    KdTree,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    KdTree,
    LinearScan,
}

/// A static index over labelled torus points.
#[derive(Debug, Clone)]
pub struct SpatialIndex {
    dim: usize,
    // flat, point-major: coords[i * dim + axis]
    coords: Vec<f64>,
    labels: Vec<u32>,
    tree: Option<KdTree>,
}

impl SpatialIndex {
    pub fn build(points: &[LabeledPoint], dim: usize, policy: BackendPolicy) -> Result<Self, SpatialError> {
        let mut coords = Vec::with_capacity(points.len() * dim);
        let mut labels = Vec::with_capacity(points.len());
        for p in points {
            if p.point.dimension() != dim {
                return Err(SpatialError::DimensionMismatch { expected: dim, got: p.point.dimension() });
            }
            coords.extend_from_slice(p.point.coords());
            labels.push(p.label);
        }
        Self::from_flat(coords, labels, dim, policy)
    }

    /// Builds from point-major coordinates; `coords.len()` must equal
    /// `labels.len() * dim` and every coordinate must lie in `[0, 1)`.
    pub(crate) fn from_flat(
        coords: Vec<f64>,
        labels: Vec<Var>,
        dim: usize,
        policy: BackendPolicy,
    ) -> Result<Self, SpatialError> {
        if labels.is_empty() {
            return Err(SpatialError::Empty);
        }
        debug_assert_eq!(coords.len(), labels.len() * dim);
        let mut sorted: Vec<u32> = labels.iter().map(|v| v.index()).collect();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(SpatialError::DuplicateLabel(w[0]));
        }
        let use_tree = match policy {
            BackendPolicy::Auto => dim < D_FALLBACK,
            BackendPolicy::KdTree => true,
            BackendPolicy::Linear => false,
        };
        let labels: Vec<u32> = labels.iter().map(|v| v.index()).collect();
        let (coords, labels, tree) = if use_tree {
            let (tree, coords, labels) = KdTree::build(coords, labels, dim);
            (coords, labels, Some(tree))
        } else {
            (coords, labels, None)
        };
        Ok(SpatialIndex { dim, coords, labels, tree })
    }

    pub fn backend(&self) -> Backend {
        if self.tree.is_some() {
            Backend::KdTree
        } else {
            Backend::LinearScan
        }
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// The `k` labels nearest to `query`, by (distance, label).
    pub fn k_nearest(&self, query: &TorusPoint, k: usize) -> Result<Vec<Var>, SpatialError> {
        if query.dimension() != self.dim {
            return Err(SpatialError::DimensionMismatch { expected: self.dim, got: query.dimension() });
        }
        let mut nearest = Nearest::new(k);
        self.k_nearest_into(query.coords(), k, &mut nearest)?;
        Ok(nearest.labels().collect())
    }

    pub(crate) fn k_nearest_into(&self, query: &[f64], k: usize, out: &mut Nearest) -> Result<(), SpatialError> {
        check_k(k, self.len())?;
        out.reset(k);
        match &self.tree {
            Some(tree) => tree.search(&self.coords, &self.labels, self.dim, query, out),
            None => {
                for (label, p) in self.labels.iter().zip(self.coords.chunks_exact(self.dim)) {
                    out.offer(squared_distance_slices(p, query), *label);
                }
            }
        }
        Ok(())
    }
}

fn check_k(k: usize, available: usize) -> Result<(), SpatialError> {
    if k == 0 {
        return Err(SpatialError::ZeroK);
    }
    if k > available {
        return Err(SpatialError::NotEnoughPoints { k, available });
    }
    Ok(())
}

#[inline]
fn candidate_cmp(a: &(f64, u32), b: &(f64, u32)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

/// Bounded candidate list, kept sorted by (squared distance, label).
#[derive(Debug, Clone, Default)]
pub(crate) struct Nearest {
    k: usize,
    best: Vec<(f64, u32)>,
}

impl Nearest {
    pub(crate) fn new(k: usize) -> Self {
        Nearest { k, best: Vec::with_capacity(k + 1) }
    }

    fn reset(&mut self, k: usize) {
        self.k = k;
        self.best.clear();
    }

    #[inline]
    fn is_full(&self) -> bool {
        self.best.len() == self.k
    }

    /// Squared distance of the current k-th candidate, if the list is full.
    #[inline]
    fn worst(&self) -> Option<f64> {
        if self.is_full() {
            self.best.last().map(|c| c.0)
        } else {
            None
        }
    }

    #[inline]
    fn offer(&mut self, dist2: f64, label: u32) {
        let cand = (dist2, label);
        if self.is_full() {
            match self.best.last() {
                Some(last) if candidate_cmp(&cand, last) == Ordering::Less => {
                    self.best.pop();
                }
                _ => return,
            }
        }
        let pos = self
            .best
            .partition_point(|c| candidate_cmp(c, &cand) == Ordering::Less);
        self.best.insert(pos, cand);
    }

    pub(crate) fn labels(&self) -> impl Iterator<Item = Var> + '_ {
        self.best.iter().map(|&(_, l)| Var::new(l).expect("labels are valid variables"))
    }
}

/// Reference k-nearest: compute every distance, sort, take the first `k`.
pub fn brute_force_k_nearest(
    points: &[LabeledPoint],
    query: &TorusPoint,
    k: usize,
) -> Result<Vec<Var>, SpatialError> {
    check_k(k, points.len())?;
    let mut all = Vec::with_capacity(points.len());
    for p in points {
        let d2 = torus_distance_squared(&p.point, query).map_err(|_| SpatialError::DimensionMismatch {
            expected: query.dimension(),
            got: p.point.dimension(),
        })?;
        all.push((d2, p.label));
    }
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(all.into_iter().take(k).map(|(_, l)| l).collect())
}
