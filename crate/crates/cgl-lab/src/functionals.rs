//! Scalar functionals of a field: mass, energy, I, L^p powers, variance,
//! weighted masses, and the Gagliardo-Nirenberg check.

use crate::error::Result;
use crate::field::ComplexRadialField;
use crate::grid::RadialGrid;

/// All per-state functionals, computed in one pass over the field.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FunctionalReport {
    /// int |u|^2
    pub mass: f64,
    /// E(u) = 1/2 int |grad u|^2 - 1/(alpha+2) int |u|^{alpha+2}
    pub energy: f64,
    /// I(u) = int |grad u|^2 - int |u|^{alpha+2}
    pub i_val: f64,
    pub linf: f64,
    /// int |x|^2 |u|^2
    pub variance: f64,
    /// int |u|^{alpha+2}
    pub lp_alpha2: f64,
    /// int |grad u|^2 (the part the energy and I are assembled from)
    pub grad_sq: f64,
}

/// Evaluate mass, energy, I, L^infinity, variance and the nonlinear power.
///
/// The gradient term goes through the centered radial derivative; |u| is the
/// complex modulus throughout.
pub fn report(grid: &RadialGrid, u: &ComplexRadialField, alpha: f64) -> Result<FunctionalReport> {
    u.ensure_finite(grid)?;
    let du = grid.ddr(u)?;
    let n = grid.len();
    let mut abs2 = vec![0.0; n];
    let mut grad2 = vec![0.0; n];
    let mut pow_a2 = vec![0.0; n];
    let mut var = vec![0.0; n];
    for j in 0..n {
        let a2 = u.values[j].norm_sqr();
        abs2[j] = a2;
        grad2[j] = du.values[j].norm_sqr();
        pow_a2[j] = a2.powf(1.0 + alpha / 2.0);
        var[j] = grid.nodes[j] * grid.nodes[j] * a2;
    }
    let mass = grid.integrate_unchecked(&abs2);
    let grad_sq = grid.integrate_unchecked(&grad2);
    let lp_alpha2 = grid.integrate_unchecked(&pow_a2);
    let variance = grid.integrate_unchecked(&var);
    Ok(FunctionalReport {
        mass,
        energy: 0.5 * grad_sq - lp_alpha2 / (alpha + 2.0),
        i_val: grad_sq - lp_alpha2,
        linf: u.linf(),
        variance,
        lp_alpha2,
        grad_sq,
    })
}

/// Outcome of testing int |u|^{2+4/N} <= c int |grad u|^2 (int |u|^2)^{2/N}.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct GnCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Test a candidate Gagliardo-Nirenberg constant c on one field.
///
/// The constant is configuration, not a computed sharp value; this check lets
/// a corpus falsify a candidate.
pub fn gn_check(grid: &RadialGrid, u: &ComplexRadialField, c: f64) -> Result<GnCheck> {
    u.ensure_finite(grid)?;
    let n_dim = grid.dim as f64;
    let du = grid.ddr(u)?;
    let p = 2.0 + 4.0 / n_dim;
    let lhs_samples: Vec<f64> = u.values.iter().map(|z| z.norm().powf(p)).collect();
    let grad2: Vec<f64> = du.values.iter().map(|z| z.norm_sqr()).collect();
    let abs2: Vec<f64> = u.values.iter().map(|z| z.norm_sqr()).collect();
    let lhs = grid.integrate_unchecked(&lhs_samples);
    let grad = grid.integrate_unchecked(&grad2);
    let mass = grid.integrate_unchecked(&abs2);
    let rhs = c * grad * mass.powf(2.0 / n_dim);
    Ok(GnCheck {
        lhs,
        rhs,
        holds: lhs <= rhs,
    })
}

/// int w |u|^2 for nonnegative radial weight samples w.
pub fn weighted_mass(grid: &RadialGrid, u: &ComplexRadialField, w: &[f64]) -> Result<f64> {
    let samples: Vec<f64> = u
        .values
        .iter()
        .zip(w)
        .map(|(z, wj)| wj * z.norm_sqr())
        .collect();
    if samples.len() != grid.len() || w.len() != grid.len() {
        return Err(crate::error::CglError::LengthMismatch {
            field_len: w.len(),
            grid_len: grid.len(),
        });
    }
    grid.integrate(&samples)
}
