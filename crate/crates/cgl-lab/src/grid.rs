//! Radially symmetric discretization of R^N.
//!
//! A uniform grid on [0, r_max] with a node at the origin, composite Simpson
//! quadrature carrying the full surface measure `omega_N r^{N-1}`, and
//! second-order radial derivative / Laplacian stencils. The grid is immutable
//! after construction and safe to share across threads.

use crate::error::{CglError, Result};
use crate::field::ComplexRadialField;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Area of the unit sphere in R^N: 2 pi^{N/2} / Gamma(N/2).
pub fn unit_sphere_area(dim: usize) -> f64 {
    // Gamma(N/2) by upward recursion from Gamma(1/2) = sqrt(pi), Gamma(1) = 1.
    let mut g = if dim % 2 == 0 { 1.0 } else { PI.sqrt() };
    let mut x = if dim % 2 == 0 { 1.0 } else { 0.5 };
    while x < dim as f64 / 2.0 - 0.25 {
        g *= x;
        x += 1.0;
    }
    2.0 * PI.powf(dim as f64 / 2.0) / g
}

#[derive(Debug, Clone)]
pub struct RadialGrid {
    pub dim: usize,
    pub r_max: f64,
    /// Number of intervals; there are m+1 nodes r_j = j * dr.
    pub m: usize,
    pub dr: f64,
    pub nodes: Vec<f64>,
    /// Simpson weights times omega_N r^{N-1}; integrate() is a single dot product.
    pub quad_weights: Vec<f64>,
}

impl RadialGrid {
    /// Build a uniform radial grid with composite Simpson quadrature.
    ///
    /// `m` must be even (Simpson) and at least 16; `dim >= 1`; `r_max > 0`.
    pub fn new(dim: usize, r_max: f64, m: usize) -> Result<Self> {
        if dim < 1 {
            return Err(CglError::Grid(format!("dim must be >= 1, got {dim}")));
        }
        if !(r_max > 0.0) {
            return Err(CglError::Grid(format!("r_max must be > 0, got {r_max}")));
        }
        if m < 16 {
            return Err(CglError::Grid(format!("m must be >= 16, got {m}")));
        }
        if m % 2 != 0 {
            return Err(CglError::Grid(format!("m must be even for Simpson, got {m}")));
        }
        let dr = r_max / m as f64;
        let nodes: Vec<f64> = (0..=m).map(|j| j as f64 * dr).collect();
        let omega = unit_sphere_area(dim);
        let quad_weights: Vec<f64> = (0..=m)
            .map(|j| {
                let simpson = if j == 0 || j == m {
                    1.0
                } else if j % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                simpson * dr / 3.0 * omega * nodes[j].powi(dim as i32 - 1)
            })
            .collect();
        Ok(RadialGrid {
            dim,
            r_max,
            m,
            dr,
            nodes,
            quad_weights,
        })
    }

    pub fn len(&self) -> usize {
        self.m + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn omega(&self) -> f64 {
        unit_sphere_area(self.dim)
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n != self.len() {
            return Err(CglError::LengthMismatch {
                field_len: n,
                grid_len: self.len(),
            });
        }
        Ok(())
    }

    /// Integral over R^N of a radial function given by samples g(r_j).
    pub fn integrate(&self, g: &[f64]) -> Result<f64> {
        self.check_len(g.len())?;
        Ok(self
            .quad_weights
            .iter()
            .zip(g)
            .map(|(w, v)| w * v)
            .sum())
    }

    /// Same integral without the length check, for hot loops on trusted data.
    pub(crate) fn integrate_unchecked(&self, g: &[f64]) -> f64 {
        self.quad_weights.iter().zip(g).map(|(w, v)| w * v).sum()
    }

    /// Radial Laplacian u'' + (N-1)/r u' of an even profile.
    ///
    /// At r = 0 the even-symmetry limit N u''(0) is used with the ghost value
    /// u(-dr) = u(dr); at r = r_max a homogeneous Dirichlet ghost closes the
    /// stencil. Runs are expected to keep |u(r_max)| negligible.
    pub fn laplacian(&self, u: &ComplexRadialField) -> Result<ComplexRadialField> {
        self.check_len(u.values.len())?;
        let m = self.m;
        let dr2 = self.dr * self.dr;
        let n1 = self.dim as f64 - 1.0;
        let v = &u.values;
        let mut out = vec![Complex64::default(); m + 1];
        out[0] = 2.0 * self.dim as f64 * (v[1] - v[0]) / dr2;
        for j in 1..m {
            let c = n1 / (2.0 * j as f64);
            out[j] = ((1.0 - c) * v[j - 1] - 2.0 * v[j] + (1.0 + c) * v[j + 1]) / dr2;
        }
        let c = n1 / (2.0 * m as f64);
        out[m] = ((1.0 - c) * v[m - 1] - 2.0 * v[m]) / dr2;
        Ok(ComplexRadialField { values: out })
    }

    /// Radial derivative by centered differences.
    ///
    /// du/dr(0) = 0 by symmetry; second-order one-sided stencil at r_max.
    pub fn ddr(&self, u: &ComplexRadialField) -> Result<ComplexRadialField> {
        self.check_len(u.values.len())?;
        let m = self.m;
        let v = &u.values;
        let mut out = vec![Complex64::default(); m + 1];
        for j in 1..m {
            out[j] = (v[j + 1] - v[j - 1]) / (2.0 * self.dr);
        }
        out[m] = (3.0 * v[m] - 4.0 * v[m - 1] + v[m - 2]) / (2.0 * self.dr);
        Ok(ComplexRadialField { values: out })
    }
}
