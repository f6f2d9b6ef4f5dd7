//! Complex radial profile u(r) sampled on a grid.

use crate::error::{CglError, Result};
use crate::grid::RadialGrid;
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexRadialField {
    pub values: Vec<Complex64>,
}

impl ComplexRadialField {
    pub fn zeros(grid: &RadialGrid) -> Self {
        ComplexRadialField {
            values: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn from_fn(grid: &RadialGrid, f: impl Fn(f64) -> Complex64) -> Self {
        ComplexRadialField {
            values: grid.nodes.iter().map(|&r| f(r)).collect(),
        }
    }

    pub fn from_real_fn(grid: &RadialGrid, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |r| Complex64::new(f(r), 0.0))
    }

    pub fn gaussian(grid: &RadialGrid, amplitude: f64, sigma: f64) -> Self {
        Self::from_real_fn(grid, |r| amplitude * (-(r * r) / (sigma * sigma)).exp())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn linf(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Magnitude of the last sample, recorded for the truncation audit.
    pub fn tail_mag(&self) -> f64 {
        self.values.last().map(|z| z.norm()).unwrap_or(0.0)
    }

    /// Index and radius of the first non-finite entry, if any.
    pub fn first_non_finite(&self, grid: &RadialGrid) -> Option<(usize, f64)> {
        self.values
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
            .map(|j| (j, grid.nodes[j]))
    }

    pub fn ensure_finite(&self, grid: &RadialGrid) -> Result<()> {
        if let Some((index, radius)) = self.first_non_finite(grid) {
            return Err(CglError::NonFinite { index, radius });
        }
        Ok(())
    }
}
