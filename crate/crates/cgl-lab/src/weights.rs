//! Truncated-variance weight construction.
//!
//! From a smooth bump h supported in \[1,2\] with unit integral, build
//!
//!   zeta(t) = t - int_0^t (t-s) h(s) ds,
//!   Phi(x)  = zeta(|x|^2),
//!   Psi_eps(x) = eps^{-2} Phi(eps x),
//!
//! together with the ray derivatives, the radial Laplacian and bi-Laplacian of
//! Psi_eps, and gamma_eps(r) = xi((eps r)^2) with
//! xi(t) = sqrt(2(1 - zeta'(t)) - 4 t zeta''(t)). The functional
//!
//!   I_eps(u) = -2 int (2 - Psi_eps'') |u_r|^2
//!              + alpha/(alpha+2) int (2N - Lap Psi_eps) |u|^{alpha+2}
//!              - 1/2 int Lap^2 Psi_eps |u|^2
//!
//! is the quantity certified small on a bounded-mass corpus by
//! [`find_epsilon`].
//!
//! zeta' = 1 - H and the plateau use dense cumulative-quadrature tables of h
//! with cubic Hermite interpolation; the t <= 1 and t >= 2 regimes are exact
//! closed forms. zeta'' and higher derivatives are analytic in h.

use crate::error::{CglError, Result};
use crate::field::ComplexRadialField;
use crate::functionals;
use crate::grid::RadialGrid;
use std::sync::Arc;

const TABLE_PANELS: usize = 4096;

/// Shape of the mollifier behind the profile. Only the canonical smooth bump
/// is provided.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HShape {
    StandardMollifier,
}

/// Unnormalized bump exp(-1/(1-z^2)) with z = 2s - 3, supported on (1, 2),
/// with first and second derivatives in s.
fn raw_bump(s: f64) -> (f64, f64, f64) {
    let z = 2.0 * s - 3.0;
    let w = 1.0 - z * z;
    // Below this width the value underflows; cut before the pole factors blow up.
    if w <= 1.2e-3 {
        return (0.0, 0.0, 0.0);
    }
    let f = -1.0 / w;
    let fp = -2.0 * z / (w * w);
    let fpp = -2.0 / (w * w) - 8.0 * z * z / (w * w * w);
    let e = f.exp();
    let d0 = e;
    let d1 = 2.0 * fp * e;
    let d2 = 4.0 * (fpp + fp * fp) * e;
    (d0, d1, d2)
}

/// Smooth profile zeta with plateau, plus its derivative tables.
#[derive(Debug)]
pub struct ZetaProfile {
    /// Normalization making int h = 1.
    norm: f64,
    /// Plateau value M = int_0^2 s h(s) ds.
    plateau: f64,
    /// Panel nodes on [1, 2].
    t_nodes: Vec<f64>,
    /// H(t) = int_0^t h at the nodes.
    h_cum: Vec<f64>,
    /// S(t) = int_0^t s h(s) ds at the nodes.
    sh_cum: Vec<f64>,
}

pub fn make_zeta(shape: HShape) -> Arc<ZetaProfile> {
    match shape {
        HShape::StandardMollifier => Arc::new(ZetaProfile::standard()),
    }
}

impl ZetaProfile {
    pub fn standard() -> Self {
        let n = TABLE_PANELS;
        let dt = 1.0 / n as f64;
        let t_nodes: Vec<f64> = (0..=n).map(|i| 1.0 + i as f64 * dt).collect();
        // Corrected trapezoid (order 4) cumulative integrals of the raw bump
        // and of s * bump(s), using the analytic first derivatives.
        let mut h_cum = vec![0.0; n + 1];
        let mut sh_cum = vec![0.0; n + 1];
        for i in 0..n {
            let (a0, a1, _) = raw_bump(t_nodes[i]);
            let (b0, b1, _) = raw_bump(t_nodes[i + 1]);
            h_cum[i + 1] =
                h_cum[i] + dt / 2.0 * (a0 + b0) + dt * dt / 12.0 * (a1 - b1);
            let qa = t_nodes[i] * a0;
            let qb = t_nodes[i + 1] * b0;
            let qa1 = a0 + t_nodes[i] * a1;
            let qb1 = b0 + t_nodes[i + 1] * b1;
            sh_cum[i + 1] = sh_cum[i] + dt / 2.0 * (qa + qb) + dt * dt / 12.0 * (qa1 - qb1);
        }
        let norm = 1.0 / h_cum[n];
        for v in h_cum.iter_mut() {
            *v *= norm;
        }
        for v in sh_cum.iter_mut() {
            *v *= norm;
        }
        let plateau = sh_cum[n];
        ZetaProfile {
            norm,
            plateau,
            t_nodes,
            h_cum,
            sh_cum,
        }
    }

    /// The normalized mollifier h(t).
    pub fn h(&self, t: f64) -> f64 {
        if !(1.0..=2.0).contains(&t) {
            return 0.0;
        }
        self.norm * raw_bump(t).0
    }

    pub fn h1(&self, t: f64) -> f64 {
        if !(1.0..=2.0).contains(&t) {
            return 0.0;
        }
        self.norm * raw_bump(t).1
    }

    pub fn h2(&self, t: f64) -> f64 {
        if !(1.0..=2.0).contains(&t) {
            return 0.0;
        }
        self.norm * raw_bump(t).2
    }

    /// Cubic Hermite interpolation of a cumulative table whose exact
    /// derivative at the nodes is known.
    fn interp(&self, table: &[f64], deriv: impl Fn(f64) -> f64, t: f64) -> f64 {
        let n = TABLE_PANELS;
        let dt = 1.0 / n as f64;
        let pos = (t - 1.0) / dt;
        let i = (pos.floor() as usize).min(n - 1);
        let th = pos - i as f64;
        let (t0, t1) = (self.t_nodes[i], self.t_nodes[i + 1]);
        let (y0, y1) = (table[i], table[i + 1]);
        let (d0, d1) = (deriv(t0), deriv(t1));
        let h00 = (2.0 * th - 3.0) * th * th + 1.0;
        let h10 = ((th - 2.0) * th + 1.0) * th;
        let h01 = (3.0 - 2.0 * th) * th * th;
        let h11 = (th - 1.0) * th * th;
        y0 * h00 + dt * d0 * h10 + y1 * h01 + dt * d1 * h11
    }

    /// H(t) = int_0^t h.
    pub fn h_cumulative(&self, t: f64) -> f64 {
        if t <= 1.0 {
            0.0
        } else if t >= 2.0 {
            1.0
        } else {
            self.interp(&self.h_cum, |s| self.h(s), t)
        }
    }

    /// int_0^t s h(s) ds.
    fn sh_cumulative(&self, t: f64) -> f64 {
        if t <= 1.0 {
            0.0
        } else if t >= 2.0 {
            self.plateau
        } else {
            self.interp(&self.sh_cum, |s| s * self.h(s), t)
        }
    }

    /// zeta(t) = t - int_0^t (t - s) h(s) ds; identity below 1, constant above 2.
    pub fn zeta(&self, t: f64) -> f64 {
        if t <= 1.0 {
            t
        } else if t >= 2.0 {
            self.plateau
        } else {
            t - t * self.h_cumulative(t) + self.sh_cumulative(t)
        }
    }

    /// zeta'(t) = 1 - H(t), in [0, 1].
    pub fn zeta1(&self, t: f64) -> f64 {
        1.0 - self.h_cumulative(t)
    }

    /// zeta''(t) = -h(t) <= 0.
    pub fn zeta2(&self, t: f64) -> f64 {
        -self.h(t)
    }

    pub fn zeta3(&self, t: f64) -> f64 {
        -self.h1(t)
    }

    pub fn zeta4(&self, t: f64) -> f64 {
        -self.h2(t)
    }

    /// xi(t) = sqrt(2(1 - zeta') - 4 t zeta'') = sqrt(2 H(t) + 4 t h(t)).
    pub fn xi(&self, t: f64) -> f64 {
        (2.0 * self.h_cumulative(t) + 4.0 * t * self.h(t)).max(0.0).sqrt()
    }

    /// Plateau constant M = int_0^2 s h(s) ds, in [1, 2].
    pub fn plateau_m(&self) -> f64 {
        self.plateau
    }
}

/// The rescaled weight family Psi_eps and companions, evaluable at any radius.
#[derive(Debug, Clone)]
pub struct WeightFamily {
    pub epsilon: f64,
    pub dim: usize,
    zeta: Arc<ZetaProfile>,
}

pub fn make_weight(zeta: Arc<ZetaProfile>, epsilon: f64, dim: usize) -> Result<WeightFamily> {
    if !(epsilon > 0.0) {
        return Err(CglError::Parameter(format!(
            "epsilon must be > 0, got {epsilon}"
        )));
    }
    if dim < 1 {
        return Err(CglError::Parameter(format!("dim must be >= 1, got {dim}")));
    }
    Ok(WeightFamily { epsilon, dim, zeta })
}

impl WeightFamily {
    fn s(&self, r: f64) -> f64 {
        let er = self.epsilon * r;
        er * er
    }

    pub fn zeta(&self) -> &ZetaProfile {
        &self.zeta
    }

    /// Psi_eps(r) = eps^{-2} zeta(eps^2 r^2); equals r^2 where eps r <= 1,
    /// constant eps^{-2} M where eps^2 r^2 >= 2.
    pub fn psi(&self, r: f64) -> f64 {
        self.zeta.zeta(self.s(r)) / (self.epsilon * self.epsilon)
    }

    /// d Psi_eps / dr = 2 r zeta'(s).
    pub fn psi1(&self, r: f64) -> f64 {
        2.0 * r * self.zeta.zeta1(self.s(r))
    }

    /// d^2 Psi_eps / dr^2 = 2 zeta'(s) + 4 s zeta''(s).
    pub fn psi2(&self, r: f64) -> f64 {
        let s = self.s(r);
        2.0 * self.zeta.zeta1(s) + 4.0 * s * self.zeta.zeta2(s)
    }

    /// Lap Psi_eps = Psi'' + (N-1)/r Psi' = 2N zeta'(s) + 4 s zeta''(s),
    /// with the r -> 0 limit 2N.
    pub fn lap_psi(&self, r: f64) -> f64 {
        let s = self.s(r);
        2.0 * self.dim as f64 * self.zeta.zeta1(s) + 4.0 * s * self.zeta.zeta2(s)
    }

    /// Lap^2 Psi_eps by analytic differentiation of Lap Psi_eps.
    pub fn bilap_psi(&self, r: f64) -> f64 {
        let s = self.s(r);
        let e2 = self.epsilon * self.epsilon;
        let n = self.dim as f64;
        let dg = (2.0 * n + 4.0) * self.zeta.zeta2(s) + 4.0 * s * self.zeta.zeta3(s);
        let d2g = (2.0 * n + 8.0) * self.zeta.zeta3(s) + 4.0 * s * self.zeta.zeta4(s);
        2.0 * e2 * n * dg + 4.0 * e2 * s * d2g
    }

    /// gamma_eps(r) = xi((eps r)^2); vanishes on [0, 1/eps).
    pub fn gamma_eps(&self, r: f64) -> f64 {
        self.zeta.xi(self.s(r))
    }

    /// sup |Lap^2 Psi_eps| over the support, by dense sampling in s.
    pub fn bilap_sup(&self) -> f64 {
        let n = 16384;
        (0..=n)
            .map(|i| {
                let s = 1.0 + i as f64 / n as f64;
                let r = s.sqrt() / self.epsilon;
                self.bilap_psi(r).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Samples of (psi, psi1, psi2, lap, bilap, gamma^2) on a grid, for
    /// per-step trajectory recording.
    pub fn sample_on(&self, grid: &RadialGrid) -> WeightOnGrid {
        WeightOnGrid {
            psi: grid.nodes.iter().map(|&r| self.psi(r)).collect(),
            psi1: grid.nodes.iter().map(|&r| self.psi1(r)).collect(),
            psi2: grid.nodes.iter().map(|&r| self.psi2(r)).collect(),
            lap: grid.nodes.iter().map(|&r| self.lap_psi(r)).collect(),
            bilap: grid.nodes.iter().map(|&r| self.bilap_psi(r)).collect(),
        }
    }
}

/// A weight and its derivatives sampled on grid nodes. Also used for the pure
/// quadratic weight |x|^2 (psi2 = 2, lap = 2N, bilap = 0).
#[derive(Debug, Clone)]
pub struct WeightOnGrid {
    pub psi: Vec<f64>,
    pub psi1: Vec<f64>,
    pub psi2: Vec<f64>,
    pub lap: Vec<f64>,
    pub bilap: Vec<f64>,
}

impl WeightOnGrid {
    pub fn quadratic(grid: &RadialGrid) -> Self {
        let two_n = 2.0 * grid.dim as f64;
        WeightOnGrid {
            psi: grid.nodes.iter().map(|&r| r * r).collect(),
            psi1: grid.nodes.iter().map(|&r| 2.0 * r).collect(),
            psi2: vec![2.0; grid.len()],
            lap: vec![two_n; grid.len()],
            bilap: vec![0.0; grid.len()],
        }
    }
}

/// I_eps(u): the three quadratures with their stated signs.
pub fn i_eps(
    grid: &RadialGrid,
    u: &ComplexRadialField,
    w: &WeightFamily,
    alpha: f64,
) -> Result<f64> {
    if w.dim != grid.dim {
        return Err(CglError::Parameter(format!(
            "weight family dim {} does not match grid dim {}",
            w.dim, grid.dim
        )));
    }
    let du = grid.ddr(u)?;
    let two_n = 2.0 * grid.dim as f64;
    let n = grid.len();
    let mut t1 = vec![0.0; n];
    let mut t2 = vec![0.0; n];
    let mut t3 = vec![0.0; n];
    for j in 0..n {
        let r = grid.nodes[j];
        let a2 = u.values[j].norm_sqr();
        t1[j] = (2.0 - w.psi2(r)) * du.values[j].norm_sqr();
        t2[j] = (two_n - w.lap_psi(r)) * a2.powf(1.0 + alpha / 2.0);
        t3[j] = w.bilap_psi(r) * a2;
    }
    Ok(-2.0 * grid.integrate_unchecked(&t1)
        + alpha / (alpha + 2.0) * grid.integrate_unchecked(&t2)
        - 0.5 * grid.integrate_unchecked(&t3))
}

/// Certificate returned by [`find_epsilon`].
#[derive(Debug, Clone, serde::Serialize)]
pub struct EpsilonCertificate {
    pub epsilon: f64,
    /// max over the corpus of I_eps at the certified epsilon
    pub max_i_eps: f64,
    pub target_a: f64,
    pub mass_bound_a_sq: f64,
    pub per_field_i_eps: Vec<f64>,
}

/// Largest eps in the geometric grid {2^-k, k = 0..=40} such that
/// max over the corpus of I_eps(u) <= a, for fields of mass at most A^2.
pub fn find_epsilon(
    grid: &RadialGrid,
    a: f64,
    big_a: f64,
    corpus: &[ComplexRadialField],
    zeta: &Arc<ZetaProfile>,
    alpha: f64,
    dim: usize,
) -> Result<EpsilonCertificate> {
    if !(a > 0.0) || !(big_a > 0.0) {
        return Err(CglError::Precondition(format!(
            "find_epsilon needs a > 0 and A > 0, got a = {a}, A = {big_a}"
        )));
    }
    for (i, u) in corpus.iter().enumerate() {
        let mass = functionals::report(grid, u, alpha)?.mass;
        if mass > big_a * big_a * (1.0 + 1e-12) {
            return Err(CglError::Precondition(format!(
                "corpus field {i} has mass {mass} > A^2 = {}",
                big_a * big_a
            )));
        }
    }
    let mut best: Option<(f64, f64)> = None;
    for k in 0..=40u32 {
        let eps = 0.5f64.powi(k as i32);
        let w = make_weight(zeta.clone(), eps, dim)?;
        let mut per_field = Vec::with_capacity(corpus.len());
        for u in corpus {
            per_field.push(i_eps(grid, u, &w, alpha)?);
        }
        let max_i = per_field.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let max_i = if corpus.is_empty() { 0.0 } else { max_i };
        if max_i <= a {
            return Ok(EpsilonCertificate {
                epsilon: eps,
                max_i_eps: max_i,
                target_a: a,
                mass_bound_a_sq: big_a * big_a,
                per_field_i_eps: per_field,
            });
        }
        if best.map_or(true, |(_, b)| max_i < b) {
            best = Some((eps, max_i));
        }
    }
    let (best_eps, best_i_eps) = best.unwrap_or((1.0, f64::INFINITY));
    Err(CglError::NoEpsilon {
        best_eps,
        best_i_eps,
        target: a,
    })
}
