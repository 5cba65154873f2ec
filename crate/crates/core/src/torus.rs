//! Points and distances on the unit torus `[0,1)^d`.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TorusError {
    #[error("coordinate {0} is outside [0, 1)")]
    OutOfRange(f64),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("a torus point needs at least one coordinate")]
    Empty,
}

/// A point on the d-dimensional unit torus.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusPoint {
    coords: Vec<f64>,
}

impl TorusPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self, TorusError> {
        if coords.is_empty() {
            return Err(TorusError::Empty);
        }
        if let Some(&bad) = coords.iter().find(|c| !(0.0..1.0).contains(*c)) {
            return Err(TorusError::OutOfRange(bad));
        }
        Ok(TorusPoint { coords })
    }

    pub(crate) fn from_slice_unchecked(coords: &[f64]) -> Self {
        TorusPoint { coords: coords.to_vec() }
    }

    #[inline]
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    #[inline]
    pub fn dimension(&self) -> usize {
        self.coords.len()
    }

    /// Shifts every coordinate by `offset` modulo 1.
    pub fn translated(&self, offset: &[f64]) -> Self {
        let coords = self
            .coords
            .iter()
            .zip(offset)
            .map(|(&c, &o)| {
                let x = (c + o).rem_euclid(1.0);
                // rem_euclid can round up to exactly 1.0
                if x >= 1.0 {
                    0.0
                } else {
                    x
                }
            })
            .collect();
        TorusPoint { coords }
    }
}

/// Circular difference `min(|a-b|, 1-|a-b|)` between two coordinates.
pub fn circular_diff(a: f64, b: f64) -> Result<f64, TorusError> {
    for x in [a, b] {
        if !(0.0..1.0).contains(&x) {
            return Err(TorusError::OutOfRange(x));
        }
    }
    Ok(circular_diff_unchecked(a, b))
}

#[inline]
pub(crate) fn circular_diff_unchecked(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    d.min(1.0 - d)
}

/// Squared toroidal distance over raw coordinate slices of equal length.
///
/// Axes are summed in index order; callers comparing against bounds rely on
/// that order being fixed.
#[inline]
pub(crate) fn squared_distance_slices(p: &[f64], q: &[f64]) -> f64 {
    let mut sum = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        let d = circular_diff_unchecked(a, b);
        sum += d * d;
    }
    sum
}

/// Squared toroidal Euclidean distance. Orders pairs exactly like
/// [`torus_distance`] and avoids the square root.
pub fn torus_distance_squared(p: &TorusPoint, q: &TorusPoint) -> Result<f64, TorusError> {
    if p.dimension() != q.dimension() {
        return Err(TorusError::DimensionMismatch(p.dimension(), q.dimension()));
    }
    Ok(squared_distance_slices(&p.coords, &q.coords))
}

/// Toroidal Euclidean distance; at most `sqrt(d)/2`.
pub fn torus_distance(p: &TorusPoint, q: &TorusPoint) -> Result<f64, TorusError> {
    torus_distance_squared(p, q).map(f64::sqrt)
}
