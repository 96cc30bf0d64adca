use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid with `M` intervals on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    intervals: usize,
}

impl Grid {
    pub fn new(intervals: usize) -> Result<Self> {
        if intervals < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 intervals, got {intervals}"
            )));
        }
        Ok(Self { intervals })
    }

    /// Number of intervals `M`.
    pub fn intervals(&self) -> usize {
        self.intervals
    }

    /// Number of nodes, `M + 1`.
    pub fn nodes(&self) -> usize {
        self.intervals + 1
    }

    pub fn h(&self) -> f64 {
        1.0 / self.intervals as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 / self.intervals as f64
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.nodes()).map(|i| self.x(i)).collect()
    }

    /// Control-volume length of node `i` (`h/2` at the ends, `h` inside).
    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 || i == self.intervals {
            0.5 * self.h()
        } else {
            self.h()
        }
    }

    pub(crate) fn check(&self, field: &[f64]) -> Result<()> {
        if field.len() != self.nodes() {
            return Err(Error::SizeMismatch {
                expected: self.nodes(),
                got: field.len(),
            });
        }
        Ok(())
    }
}

/// Nodal values of a density or of the potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Field(Vec<f64>);

impl Field {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn constant(grid: &Grid, value: f64) -> Self {
        Self(vec![value; grid.nodes()])
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> f64) -> Self {
        Self((0..grid.nodes()).map(|i| f(grid.x(i))).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl Deref for Field {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Field {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for Field {
    fn from(values: Vec<f64>) -> Self {
        Self(values)
    }
}
