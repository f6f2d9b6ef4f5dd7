//! Closed-form blow-up time bounds and the constants they use.
//!
//! Inapplicable hypotheses yield +infinity sentinels rather than errors so
//! that sweeps can tabulate them.

use crate::error::{CglError, Result};
use crate::serde_util::maybe_inf;

/// Every theoretical constant and bound evaluated for one datum.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct BoundsReport {
    /// Upper bound on the blow-up time; finite iff E0 < 0 and |theta| < pi/2.
    #[serde(with = "maybe_inf")]
    pub thm1_upper: f64,
    /// eta = (-E0) ||u0||^{-(alpha+2)}
    pub eta: f64,
    /// K = [1 - ((alpha+4)/(2 alpha+4))^{1/2}]^{-1}
    pub k_const: f64,
    /// The configured Gagliardo-Nirenberg constant c, echoed into every report.
    pub c_gn_input: f64,
    /// C_GN = (N c)^{N alpha} (2 ||u0||^2)^{4-(N-2) alpha}
    #[serde(with = "maybe_inf")]
    pub cgn: f64,
    /// Lower bound with the positive-part energy term; +inf when alpha >= 4/N.
    #[serde(with = "maybe_inf")]
    pub thm2_lower: f64,
    /// Lower bound specialization valid when E0 <= 0; +inf otherwise.
    #[serde(with = "maybe_inf")]
    pub loweru: f64,
    /// (C(u0) fit coefficient, 4 - N alpha) for the envelope
    /// T <= C(u0) (1 + (4 - N alpha)/cos theta).
    pub remark_envelope_coeff: (f64, f64),
}

/// T_max <= ||u0||^2 / (alpha (alpha+2) (-E0) cos theta), when E0 < 0.
pub fn thm1_upper(mass0: f64, e0: f64, alpha: f64, theta: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(CglError::Parameter(format!("alpha must be > 0, got {alpha}")));
    }
    let c = theta.cos();
    if c <= 1e-14 {
        return Err(CglError::Parameter(format!(
            "thm1_upper needs |theta| < pi/2 (cos theta > 0), got theta = {theta}"
        )));
    }
    if e0 < 0.0 {
        Ok(mass0 / (alpha * (alpha + 2.0) * (-e0) * c))
    } else {
        Ok(f64::INFINITY)
    }
}

/// Both lower-bound forms for 0 < alpha < 4/N.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct LowerBounds {
    pub cgn: f64,
    /// ||u0||^2 / (2 ((alpha+4) max(E0, 0) + 2(alpha+2) C_GN^{1/(4-N alpha)}) cos theta)
    pub with_energy_part: f64,
    /// ||u0||^2 / (4 (alpha+2) C_GN^{1/(4-N alpha)} cos theta), valid for E0 <= 0.
    pub negative_energy_form: Option<f64>,
}

pub fn thm2_lower(
    dim: usize,
    alpha: f64,
    mass0: f64,
    e0: f64,
    c: f64,
    theta: f64,
) -> Result<LowerBounds> {
    let n = dim as f64;
    if !(alpha > 0.0) || alpha >= 4.0 / n {
        return Err(CglError::Parameter(format!(
            "lower bound requires 0 < alpha < 4/N, got alpha = {alpha}, N = {dim}"
        )));
    }
    if !(c > 0.0) {
        return Err(CglError::Parameter(format!("c must be > 0, got {c}")));
    }
    let cos = theta.cos();
    if cos <= 1e-14 {
        return Err(CglError::Parameter(format!(
            "lower bound needs cos theta > 0, got theta = {theta}"
        )));
    }
    let cgn = (n * c).powf(n * alpha) * (2.0 * mass0).powf(4.0 - (n - 2.0) * alpha);
    let root = cgn.powf(1.0 / (4.0 - n * alpha));
    let e_plus = e0.max(0.0);
    let with_energy_part =
        mass0 / (2.0 * ((alpha + 4.0) * e_plus + 2.0 * (alpha + 2.0) * root) * cos);
    let negative_energy_form = if e0 <= 0.0 {
        Some(mass0 / (4.0 * (alpha + 2.0) * root * cos))
    } else {
        None
    };
    Ok(LowerBounds {
        cgn,
        with_energy_part,
        negative_energy_form,
    })
}

/// K(alpha) = [1 - ((alpha+4)/(2 alpha+4))^{1/2}]^{-1} > 1.
pub fn k_const(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(CglError::Parameter(format!("alpha must be > 0, got {alpha}")));
    }
    Ok(1.0 / (1.0 - ((alpha + 4.0) / (2.0 * alpha + 4.0)).sqrt()))
}

/// T_max <= (alpha+4)/alpha * tau, for E0 <= 0.
pub fn tau_to_tmax(tau: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(CglError::Parameter(format!("alpha must be > 0, got {alpha}")));
    }
    if tau < 0.0 {
        return Err(CglError::Parameter(format!("tau must be >= 0, got {tau}")));
    }
    Ok((alpha + 4.0) / alpha * tau)
}

/// Envelope value c_fit (1 + (4 - N alpha)/cos theta).
pub fn remark_envelope(theta: f64, alpha: f64, dim: usize, c_fit: f64) -> f64 {
    c_fit * (1.0 + (4.0 - dim as f64 * alpha) / theta.cos())
}

/// Assemble the full report for one datum.
#[allow(clippy::too_many_arguments)]
pub fn bounds_report(
    dim: usize,
    alpha: f64,
    theta: f64,
    mass0: f64,
    e0: f64,
    c_gn: f64,
    c_fit: f64,
) -> Result<BoundsReport> {
    let upper = thm1_upper(mass0, e0, alpha, theta)?;
    let eta = (-e0) * mass0.powf(-(alpha + 2.0) / 2.0);
    let k = k_const(alpha)?;
    let (cgn, lower, loweru) = if alpha < 4.0 / dim as f64 {
        let lb = thm2_lower(dim, alpha, mass0, e0, c_gn, theta)?;
        (
            lb.cgn,
            lb.with_energy_part,
            lb.negative_energy_form.unwrap_or(f64::INFINITY),
        )
    } else {
        (f64::INFINITY, f64::INFINITY, f64::INFINITY)
    };
    Ok(BoundsReport {
        thm1_upper: upper,
        eta,
        k_const: k,
        c_gn_input: c_gn,
        cgn,
        thm2_lower: lower,
        loweru,
        remark_envelope_coeff: (c_fit, 4.0 - dim as f64 * alpha),
    })
}
