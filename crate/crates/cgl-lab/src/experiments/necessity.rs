//! Scaling-family scans and the weighted nonlinear inequality search.
//!
//! The scans fit power laws in the concentration parameter lambda for the two
//! families and compare against the predicted exponents; the predicted gap
//! between the weighted nonlinear term and the allowed right-hand side is
//! positive exactly when N alpha > 4. The inequality search finds the
//! smallest constant C for which
//!
//!   int |x|^2 |u|^{a+2} <= int |x|^2 |grad u|^2 + C int |u|^{a+2} + C
//!
//! holds corpus-wide, together with the pointwise bound
//! || |x|^N |u|^2 ||_inf <= 2 ||u|| * || |x| grad u ||, field by field.

use super::corpus::{scaled_family_moments, CorpusSpec, FieldMoments};
use crate::error::{CglError, Result};
use crate::integrator::linear_fit;
use crate::weights::ZetaProfile;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanFamily {
    /// Concentrating bump at fixed offset from the origin.
    ScaledBump,
    /// Thin annulus at fixed radius.
    AnnularBump,
}

/// One scanned quantity: its per-lambda values and the fitted exponent.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ScanLine {
    pub quantity: String,
    pub values: Vec<f64>,
    pub fitted_exponent: f64,
    pub predicted_exponent: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ScanReport {
    pub family: ScanFamily,
    pub dim: usize,
    pub alpha: f64,
    /// Offset radius (scaled family) or annulus radius (annular family).
    pub radius: f64,
    pub lambdas: Vec<f64>,
    pub lines: Vec<ScanLine>,
    /// Fitted exponent of int g|u|^{a+2} minus that of int g|grad u|^2 for
    /// g = |x|^2; positive iff the weighted inequality must fail (N alpha > 4
    /// for the scaled family).
    pub nonlinear_minus_gradient_gap: f64,
}

/// Fit lambda-power laws of the family functionals.
pub fn necessity_scan(
    family: ScanFamily,
    dim: usize,
    alpha: f64,
    lambdas: &[f64],
    radius: f64,
    r_max: f64,
    zeta: &Arc<ZetaProfile>,
) -> Result<ScanReport> {
    if lambdas.len() < 3 {
        return Err(CglError::TooFewSamples {
            what: "lambda grid",
            have: lambdas.len(),
            need: 3,
        });
    }
    let moments: Vec<FieldMoments> = lambdas
        .iter()
        .map(|&lambda| match family {
            ScanFamily::ScaledBump => {
                let spec = CorpusSpec::ScaledBump {
                    lambda,
                    offset: radius,
                };
                spec.validate(r_max)?;
                Ok(scaled_family_moments(dim, alpha, lambda, radius, zeta))
            }
            ScanFamily::AnnularBump => {
                let spec = CorpusSpec::AnnularBump { lambda, r0: radius };
                spec.validate(r_max)?;
                Ok(spec.exact_moments(dim, alpha, zeta))
            }
        })
        .collect::<Result<_>>()?;

    let na = dim as f64 * alpha;
    let predictions = match family {
        ScanFamily::ScaledBump => [0.0, 2.0, na / 2.0, na / 2.0, 2.0],
        ScanFamily::AnnularBump => [0.0, 2.0, alpha / 2.0, alpha / 2.0, 2.0],
    };
    let names = ["mass", "grad_sq", "lp_alpha2", "r2_lp_alpha2", "r2_grad_sq"];
    let extract = |m: &FieldMoments, i: usize| match i {
        0 => m.mass,
        1 => m.grad,
        2 => m.lp,
        3 => m.r2_lp,
        _ => m.r2_grad,
    };

    let log_l: Vec<f64> = lambdas.iter().map(|l| l.ln()).collect();
    let mut lines = Vec::new();
    for i in 0..5 {
        let values: Vec<f64> = moments.iter().map(|m| extract(m, i)).collect();
        let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
        let (slope, _, _) = linear_fit(&log_l, &logs).ok_or_else(|| {
            CglError::Precondition("degenerate lambda grid for the exponent fit".into())
        })?;
        lines.push(ScanLine {
            quantity: names[i].to_string(),
            values,
            fitted_exponent: slope,
            predicted_exponent: predictions[i],
        });
    }
    let gap = lines[3].fitted_exponent - lines[4].fitted_exponent;
    Ok(ScanReport {
        family,
        dim,
        alpha,
        radius,
        lambdas: lambdas.to_vec(),
        lines,
        nonlinear_minus_gradient_gap: gap,
    })
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct Lemma71Field {
    pub spec: CorpusSpec,
    pub mass: f64,
    /// Smallest C making the inequality hold for this field.
    pub c_needed: f64,
    /// 2 ||u|| |||x| grad u|| - || |x|^N |u|^2 ||_inf (nonnegative expected).
    pub pointwise_margin: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct Lemma71Report {
    pub dim: usize,
    pub alpha: f64,
    pub mass_bound: f64,
    /// Smallest grid value of C covering the whole corpus.
    pub c_min_found: f64,
    /// Exact corpus-wide requirement the grid value covers.
    pub c_needed: f64,
    pub fields: Vec<Lemma71Field>,
    pub hypotheses_hold: bool,
}

/// Search the C grid for the weighted nonlinear inequality over a corpus of
/// family members with mass at most m_bound^2.
///
/// The legal window is N >= 2, 4/N <= alpha <= 4; `allow_outside` admits
/// other alpha for the necessity demonstrations, flagged in the report.
pub fn lemma71_check(
    corpus: &[CorpusSpec],
    alpha: f64,
    dim: usize,
    m_bound: f64,
    c_grid: &[f64],
    allow_outside: bool,
    r_max: f64,
    zeta: &Arc<ZetaProfile>,
) -> Result<Lemma71Report> {
    let hypotheses_hold = dim >= 2 && alpha >= 4.0 / dim as f64 && alpha <= 4.0;
    if !hypotheses_hold && !allow_outside {
        let which = if dim < 2 {
            format!("N >= 2 (got N = {dim})")
        } else if alpha < 4.0 / dim as f64 {
            format!("alpha >= 4/N (got alpha = {alpha}, 4/N = {})", 4.0 / dim as f64)
        } else {
            format!("alpha <= 4 (got alpha = {alpha})")
        };
        return Err(CglError::Precondition(format!(
            "inequality hypotheses violated: {which}"
        )));
    }
    if c_grid.is_empty() {
        return Err(CglError::Precondition("empty C search grid".into()));
    }
    let mut fields = Vec::with_capacity(corpus.len());
    let mut c_needed = 0.0f64;
    for spec in corpus {
        spec.validate(r_max)?;
        let m = spec.exact_moments(dim, alpha, zeta);
        if m.mass > m_bound * m_bound * (1.0 + 1e-12) {
            return Err(CglError::Precondition(format!(
                "corpus field {spec:?} has mass {} > M^2 = {}",
                m.mass,
                m_bound * m_bound
            )));
        }
        // int |x|^2 |u|^{a+2} <= int |x|^2 |grad u|^2 + C (int |u|^{a+2} + 1)
        let need = ((m.r2_lp - m.r2_grad) / (m.lp + 1.0)).max(0.0);
        c_needed = c_needed.max(need);
        let pointwise_margin = 2.0 * m.mass.sqrt() * m.r2_grad.sqrt() - m.sup_rn_u2;
        fields.push(Lemma71Field {
            spec: spec.clone(),
            mass: m.mass,
            c_needed: need,
            pointwise_margin,
        });
    }
    let c_min_found = c_grid
        .iter()
        .copied()
        .filter(|&c| c >= c_needed)
        .fold(f64::INFINITY, f64::min);
    if !c_min_found.is_finite() {
        return Err(CglError::Precondition(format!(
            "no C in the search grid (max {}) covers the corpus requirement {c_needed}",
            c_grid.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        )));
    }
    Ok(Lemma71Report {
        dim,
        alpha,
        mass_bound: m_bound,
        c_min_found,
        c_needed,
        fields,
        hypotheses_hold,
    })
}

/// Geometric C grid for the inequality search.
pub fn geometric_c_grid(min: f64, max: f64, points: usize) -> Vec<f64> {
    let mut out = vec![0.0];
    if points < 2 || !(max > min) || !(min > 0.0) {
        return out;
    }
    let ratio = (max / min).powf(1.0 / (points - 1) as f64);
    out.extend((0..points).map(|i| min * ratio.powi(i as i32)));
    out
}

/// The paired (lambda, r0) corpus that exhibits unbounded C along the grid
/// when alpha > 4: joint growth is required since the weighted term is capped
/// by the support radius squared.
pub fn divergence_demo_corpus(r0_values: &[f64], growth_power: f64) -> Vec<CorpusSpec> {
    r0_values
        .iter()
        .map(|&r0| CorpusSpec::AnnularBump {
            lambda: 2.0 * r0.powf(growth_power),
            r0,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{make_zeta, HShape};

    fn zeta() -> Arc<ZetaProfile> {
        make_zeta(HShape::StandardMollifier)
    }

    fn lambdas() -> Vec<f64> {
        vec![4.0, 8.0, 16.0, 32.0, 64.0]
    }

    #[test]
    fn scaled_family_exponents() {
        let rep = necessity_scan(
            ScanFamily::ScaledBump,
            2,
            2.0,
            &lambdas(),
            3.0,
            30.0,
            &zeta(),
        )
        .unwrap();
        let by_name = |n: &str| {
            rep.lines
                .iter()
                .find(|l| l.quantity == n)
                .unwrap()
                .fitted_exponent
        };
        assert!(by_name("mass").abs() < 0.05);
        assert!((by_name("grad_sq") - 2.0).abs() < 0.05);
        assert!((by_name("lp_alpha2") - 2.0).abs() < 0.05, "N alpha/2 = 2");
        assert!((by_name("r2_lp_alpha2") - 2.0).abs() < 0.05);
        assert!((by_name("r2_grad_sq") - 2.0).abs() < 0.05);
    }

    #[test]
    fn annular_family_exponents() {
        // lambda r0 >> 1 so the (1 + sigma/(lambda r0))^{N-1} correction is
        // below the exponent tolerance
        let rep = necessity_scan(
            ScanFamily::AnnularBump,
            2,
            2.0,
            &[16.0, 32.0, 64.0, 128.0, 256.0],
            2.0,
            30.0,
            &zeta(),
        )
        .unwrap();
        let by_name = |n: &str| {
            rep.lines
                .iter()
                .find(|l| l.quantity == n)
                .unwrap()
                .fitted_exponent
        };
        assert!(by_name("mass").abs() < 0.05);
        assert!((by_name("grad_sq") - 2.0).abs() < 0.05);
        assert!((by_name("lp_alpha2") - 1.0).abs() < 0.05, "alpha/2 = 1");
    }

    #[test]
    fn gap_sign_tracks_criticality() {
        // scaled family: gap = N alpha/2 - 2 > 0 iff N alpha > 4
        for (dim, alpha, positive) in [(2usize, 2.0, false), (2, 3.0, true), (3, 2.0, true), (1, 2.0, false)]
        {
            let rep = necessity_scan(
                ScanFamily::ScaledBump,
                dim,
                alpha,
                &lambdas(),
                3.0,
                40.0,
                &zeta(),
            )
            .unwrap();
            assert_eq!(
                rep.nonlinear_minus_gradient_gap > 0.05,
                positive,
                "dim={dim} alpha={alpha}: gap={}",
                rep.nonlinear_minus_gradient_gap
            );
        }
    }

    #[test]
    fn lemma_holds_with_finite_c_on_legal_window() {
        let corpus = vec![
            CorpusSpec::Gaussian {
                amplitude: 1.0,
                sigma: 1.0,
            },
            CorpusSpec::Gaussian {
                amplitude: 2.0,
                sigma: 0.7,
            },
            CorpusSpec::Ring {
                amplitude: 1.0,
                r0: 2.0,
                width: 0.5,
            },
            CorpusSpec::AnnularBump { lambda: 8.0, r0: 2.0 },
        ];
        let grid = geometric_c_grid(1e-3, 1e6, 121);
        for alpha in [2.0, 4.0] {
            let rep = lemma71_check(&corpus, alpha, 2, 4.0, &grid, false, 50.0, &zeta()).unwrap();
            assert!(rep.c_min_found.is_finite());
            assert!(rep.hypotheses_hold);
            for f in &rep.fields {
                assert!(
                    f.pointwise_margin >= 0.0,
                    "{:?}: margin {}",
                    f.spec,
                    f.pointwise_margin
                );
            }
        }
    }

    #[test]
    fn zero_like_corpus_needs_no_c() {
        // a tiny field needs essentially no constant
        let corpus = vec![CorpusSpec::Gaussian {
            amplitude: 1e-8,
            sigma: 1.0,
        }];
        let rep = lemma71_check(
            &corpus,
            2.0,
            2,
            1.0,
            &geometric_c_grid(1e-3, 10.0, 20),
            false,
            40.0,
            &zeta(),
        )
        .unwrap();
        assert_eq!(rep.c_min_found, 0.0);
    }

    #[test]
    fn hypothesis_violations_are_named() {
        let corpus = vec![CorpusSpec::Gaussian {
            amplitude: 1.0,
            sigma: 1.0,
        }];
        let grid = geometric_c_grid(1e-3, 1e6, 61);
        let err = lemma71_check(&corpus, 5.0, 2, 3.0, &grid, false, 40.0, &zeta()).unwrap_err();
        assert!(err.to_string().contains("alpha <= 4"), "{err}");
        let err = lemma71_check(&corpus, 1.0, 1, 3.0, &grid, false, 40.0, &zeta()).unwrap_err();
        assert!(err.to_string().contains("N >= 2"), "{err}");
        let err = lemma71_check(&corpus, 0.5, 2, 3.0, &grid, false, 40.0, &zeta()).unwrap_err();
        assert!(err.to_string().contains("alpha >= 4/N"), "{err}");
    }

    #[test]
    fn c_grows_without_bound_for_alpha_above_four() {
        // paired (lambda, r0) growth: C_needed tracks r0^2
        let corpus = divergence_demo_corpus(&[2.0, 2.8, 4.0, 5.6, 8.0, 11.2], 6.0);
        let grid = geometric_c_grid(1e-3, 1e9, 241);
        let rep = lemma71_check(&corpus, 5.0, 2, 1e6, &grid, true, 1e6, &zeta()).unwrap();
        assert!(!rep.hypotheses_hold);
        let needs: Vec<f64> = rep.fields.iter().map(|f| f.c_needed).collect();
        for w in needs.windows(2) {
            assert!(w[1] > w[0], "C_needed not increasing: {needs:?}");
        }
        assert!(
            needs.last().unwrap() / needs.first().unwrap() > 4.0,
            "growth too weak: {needs:?}"
        );
        // same pairing at alpha = 4 stays bounded (gradient term dominates)
        let rep4 = lemma71_check(&corpus, 4.0, 2, 1e6, &grid, false, 1e6, &zeta()).unwrap();
        let needs4: Vec<f64> = rep4.fields.iter().map(|f| f.c_needed).collect();
        assert!(
            needs4.iter().all(|&c| c <= needs4[0].max(1e-9) * 2.0 + 1.0),
            "alpha=4 should not diverge: {needs4:?}"
        );
    }
}
