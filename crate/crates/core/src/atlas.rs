//! Parameter regions: the overshoot region in `(τ, p)`, necessary conditions
//! for non-monotone waves, the boundary curves `τ(c)` and `T(c)` of the
//! `(τ, c)` regions `D_s` and `D_m`, and numerical sweeps of the inclusion
//! `D_m ⊂ D_s`.

use std::f64::consts::E;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::characteristic::{has_positive_zero_root, mu_root, negative_roots_at_kappa};
use crate::dirichlet::{qbar2_closed, zeta};
use crate::error::{Error, Result};
use crate::heteroclinic::j_upper;
use crate::model::ModelParams;
use crate::numerics::{solve_bracketed, Bracket};

/// Half-width of the band around `τ = T(c)` where the two `D_m` tests may
/// disagree.
pub const BOUNDARY_BAND: f64 = 1e-6;

/// `c`, `ε = c^{-2}` and the roots `λ = c(c - √(c²+4))/2 < 0 < ν = c(c + √(c²+4))/2`
/// of `εz² - z - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedFrame {
    pub c: f64,
    pub eps: f64,
    pub lambda: f64,
    pub nu: f64,
}

impl SpeedFrame {
    pub fn new(c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::Domain(format!("speed must be positive, got {c}")));
        }
        let r = (c * c + 4.0).sqrt();
        // c(c - r)/2 without the cancellation
        let lambda = -2.0 * c / (c + r);
        Ok(SpeedFrame { c, eps: 1.0 / (c * c), lambda, nu: c * (c + r) / 2.0 })
    }
}

/// `Φ(τ, c) = (ν - λ)/(ν e^{-λτ} - λ e^{-ντ})`, evaluated as
/// `(ν - λ)e^{λτ} / (ν - λ e^{-(ν-λ)τ})`.
pub fn phi(tau: f64, frame: &SpeedFrame) -> f64 {
    let (l, n) = (frame.lambda, frame.nu);
    (n - l) * (l * tau).exp() / (n - l * (-(n - l) * tau).exp())
}

/// `1 - Φ(τ, c)` without cancelling the leading terms.
pub fn one_minus_phi(tau: f64, frame: &SpeedFrame) -> f64 {
    let (l, n) = (frame.lambda, frame.nu);
    let den = n - l * (-(n - l) * tau).exp();
    let num = -n * (l * tau).exp_m1() - l * (l * tau).exp() * (-n * tau).exp_m1();
    num / den
}

/// `τ̂ = ln(P/(P-1))`, the limit of `τ(c)` as `c → ∞`.
pub fn tau_hat(big_p: f64) -> Result<f64> {
    if !(big_p > 1.0) {
        return Err(Error::Domain(format!("tau_hat needs P > 1, got {big_p}")));
    }
    Ok((big_p / (big_p - 1.0)).ln())
}

/// The unique root `τ(c)` of `Φ(τ, c) = 1 - 1/P`.
pub fn tau_of_c(big_p: f64, c: f64) -> Result<f64> {
    if !(big_p > 1.0) {
        return Err(Error::Domain(format!("tau(c) needs P > 1, got {big_p}")));
    }
    let frame = SpeedFrame::new(c)?;
    let target = 1.0 - 1.0 / big_p;
    let g = |t: f64| phi(t, &frame) - target;
    let hi = grow(|t| g(t) < 0.0)?;
    solve_bracketed(g, Bracket::new(0.0, hi)?, 1e-14)
}

/// First of `1, 2, 4, ...` at which `done` holds.
fn grow(done: impl Fn(f64) -> bool) -> Result<f64> {
    let mut hi = 1.0;
    for _ in 0..1100 {
        if done(hi) {
            return Ok(hi);
        }
        hi *= 2.0;
    }
    Err(Error::NonBracketing("boundary curve root beyond 2^1100".into()))
}

/// `ln` of `e c²τ²/(2+S) · exp((S - c²τ)/2)`, `S = √(c⁴τ² + 4c²τ² + 4)`,
/// written in `h = cτ` as `1 + 2 ln h - ln(2+S) + 2(h²+1)/(S+ch)`.
pub fn ln_boundary_lhs(tau: f64, c: f64) -> f64 {
    let h = c * tau;
    let s = (h * h * (c * c + 4.0) + 4.0).sqrt();
    1.0 + 2.0 * h.ln() - (2.0 + s).ln() + 2.0 * (h * h + 1.0) / (s + c * h)
}

/// The unique positive root `T(c)` of `lhs(τ, c) = 1/P`; `+∞` when `P <= 0`
/// (the right side is then never reached and `D_m` is the whole quadrant).
pub fn t_of_c(big_p: f64, c: f64) -> Result<f64> {
    SpeedFrame::new(c)?;
    if big_p <= 0.0 {
        return Ok(f64::INFINITY);
    }
    let g = |t: f64| ln_boundary_lhs(t, c) + big_p.ln();
    let hi = grow(|t| g(t) > 0.0)?;
    solve_bracketed(g, Bracket::new(0.0, hi)?, 1e-15)
}

/// `T_*` with `P e T_* e^{T_*} = 1`, the limit of `T(c)` as `c → ∞`.
pub fn t_star(big_p: f64) -> Result<f64> {
    if !(big_p > 0.0) {
        return Err(Error::Domain(format!("T_* needs P > 0, got {big_p}")));
    }
    let g = |t: f64| big_p.ln() + 1.0 + t.ln() + t;
    let hi = grow(|t| g(t) > 0.0)?;
    solve_bracketed(g, Bracket::new(0.0, hi)?, 1e-15)
}

/// `τ_*` with `τ e^{1+τ} = 1`.
pub fn tau_star() -> f64 {
    solve_bracketed(|t| t.ln() + 1.0 + t, Bracket::new(0.0, 1.0).expect("fixed bracket"), 1e-15)
        .expect("τ e^{1+τ} - 1 changes sign on (0, 1)")
}

/// Necessary conditions for a non-monotone wave.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NmNecessary {
    pub p_above_e2: bool,
    /// `P τ e^{1+τ}`, must be `< 1`.
    pub delay_product: f64,
    /// `p τ e^{τ-1}`, must be `> 1`.
    pub growth_product: f64,
    /// `e^{-μτ}`, below `1/2` at admissible parameters.
    pub e_mu_tau: f64,
    pub qbar2: f64,
    pub e_mu_tau_below_half: bool,
    pub qbar2_in_unit: bool,
    /// Conjunction of the first three.
    pub holds: bool,
}

pub fn nm_necessary(params: &ModelParams) -> Result<NmNecessary> {
    let (p, tau) = (params.p(), params.tau());
    if !(tau > 0.0) {
        return Err(Error::Domain("necessary conditions need tau > 0".into()));
    }
    let delay_product = params.big_p() * tau * (1.0 + tau).exp();
    let growth_product = p * tau * (tau - 1.0).exp();
    let mu = mu_root(params)?;
    let e_mu_tau = (-mu * tau).exp();
    let qbar2 = qbar2_closed(params, mu)?;
    let p_above_e2 = p > E * E;
    Ok(NmNecessary {
        p_above_e2,
        delay_product,
        growth_product,
        e_mu_tau,
        qbar2,
        e_mu_tau_below_half: e_mu_tau < 0.5,
        qbar2_in_unit: qbar2 > -1.0 && qbar2 < 0.0,
        holds: p_above_e2 && delay_product < 1.0 && growth_product > 1.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Membership {
    pub in_dm: bool,
    pub in_ds: bool,
    pub t_of_c: f64,
    /// `None` when `P <= 1`, where `D_s` is taken to be everything.
    pub tau_of_c: Option<f64>,
    pub near_boundary: bool,
}

/// `D_m` (negative root of the profile characteristic function at `ln p`,
/// cross-checked against `τ <= T(c)`) and `D_s` (`Φ(τ, c) >= 1 - 1/P`).
pub fn membership(params: &ModelParams, c: f64) -> Result<Membership> {
    let tau = params.tau();
    let big_p = params.big_p();
    let t = t_of_c(big_p, c)?;
    let by_boundary = tau <= t;
    let by_roots = !negative_roots_at_kappa(params, c)?.is_empty();
    let near_boundary = (tau - t).abs() <= BOUNDARY_BAND * t.max(1.0);
    if by_roots != by_boundary && !near_boundary {
        return Err(Error::Inconsistency { tau, c, t_of_c: t, by_roots, by_boundary });
    }
    let frame = SpeedFrame::new(c)?;
    let (in_ds, tau_c) = if big_p > 1.0 {
        (phi(tau, &frame) >= 1.0 - 1.0 / big_p, Some(tau_of_c(big_p, c)?))
    } else {
        (true, None)
    };
    Ok(Membership { in_dm: by_boundary, in_ds, t_of_c: t, tau_of_c: tau_c, near_boundary })
}

/// Hypotheses of the eventual-monotonicity criterion at speed `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MainHypotheses {
    pub positive_root: bool,
    pub phi: f64,
    /// `(P² - P)/(P² + 1)`.
    pub ce_rhs: f64,
    pub ce_holds: bool,
    pub feedback: bool,
    /// `1 - 1/P`, which always exceeds `ce_rhs` for `P > 1`.
    pub ds_threshold: f64,
}

pub fn proposition_main_hypotheses(params: &ModelParams, c: f64) -> Result<MainHypotheses> {
    let frame = SpeedFrame::new(c)?;
    let big_p = params.big_p();
    let phi = phi(params.tau(), &frame);
    let ce_rhs = ce_rhs(big_p);
    Ok(MainHypotheses {
        positive_root: has_positive_zero_root(params, c)?,
        phi,
        ce_rhs,
        ce_holds: phi >= ce_rhs,
        feedback: params.feedback_holds(),
        ds_threshold: 1.0 - 1.0 / big_p,
    })
}

pub fn ce_rhs(big_p: f64) -> f64 {
    (big_p * big_p - big_p) / (big_p * big_p + 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionReport {
    pub params: ModelParams,
    pub c: Option<f64>,
    pub in_frak_i: bool,
    pub zeta: f64,
    pub zeta_gt_lnp: bool,
    pub nm_necessary: NmNecessary,
    pub gsc: bool,
    pub in_dm: Option<bool>,
    pub in_ds: Option<bool>,
    pub t_c: Option<f64>,
    pub tau_c: Option<f64>,
    pub tau_hat: Option<f64>,
    pub t_star: Option<f64>,
    pub tau_star: f64,
    /// `D_s` taken as everything because `P <= 1`.
    pub ds_by_convention: bool,
}

pub fn region_report(params: &ModelParams, c: Option<f64>) -> Result<RegionReport> {
    let big_p = params.big_p();
    let z = zeta(params)?;
    let m = c.map(|c| membership(params, c)).transpose()?;
    Ok(RegionReport {
        params: *params,
        c,
        in_frak_i: params.p() > E * E && params.p() < j_upper(params.tau()),
        zeta: z,
        zeta_gt_lnp: z > params.kappa(),
        nm_necessary: nm_necessary(params)?,
        gsc: params.gsc_holds(),
        in_dm: m.map(|m| m.in_dm),
        in_ds: m.map(|m| m.in_ds),
        t_c: m.map(|m| m.t_of_c),
        tau_c: m.and_then(|m| m.tau_of_c),
        tau_hat: tau_hat(big_p).ok(),
        t_star: t_star(big_p).ok(),
        tau_star: tau_star(),
        ds_by_convention: c.is_some() && big_p <= 1.0,
    })
}

/// `n` log-spaced points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// `n` evenly spaced points on `[lo, hi]`.
pub fn lin_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Margin of the inclusion inequality: `lhs(τ, c) - (1 - Φ(τ, c))`.
/// It does not depend on `P`.
pub fn inclusion_margin(tau: f64, c: f64) -> Result<f64> {
    let frame = SpeedFrame::new(c)?;
    Ok(ln_boundary_lhs(tau, c).exp() - one_minus_phi(tau, &frame))
}

/// `A_k(w)` of the series `A(w, σ) = w Σ_{k>=2} A_k(w) σ^k / k!`.
pub fn a_k(k: u32, w: f64) -> f64 {
    if k == 2 {
        return 2.0 * (E - 2.0) * (w - 1.0);
    }
    let kf = k as f64;
    let ekk = E * kf * (kf - 1.0);
    -w.powi(k as i32 - 1) * (kf + 4.0) + ekk * w.powi(k as i32 - 2) - ekk * w.powi(k as i32 - 3)
        + 4.0
        + kf * w
}

/// `A(w, σ) = e^{wσ}(eσ²(w-1) - (4+wσ)) + eσ²(w-1)² + (4+wσ)(1 + w(e^σ - 1))`.
pub fn a_w_sigma(w: f64, s: f64) -> f64 {
    let q = 4.0 + w * s;
    (w * s).exp() * (E * s * s * (w - 1.0) - q) + E * s * s * (w - 1.0).powi(2) + q * (1.0 + w * s.exp_m1())
}

/// `D(w) = 16 (w-1)² ((6e - 7w - 4)² + 24(e-2)(2w² + (2-3e)w + 1))`.
pub fn discriminant(w: f64) -> f64 {
    16.0 * (w - 1.0).powi(2)
        * ((6.0 * E - 7.0 * w - 4.0).powi(2) + 24.0 * (E - 2.0) * (2.0 * w * w + (2.0 - 3.0 * E) * w + 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryViolation {
    pub big_p: f64,
    pub c: f64,
    pub t_of_c: f64,
    pub tau_of_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Asymptotes {
    pub big_p: f64,
    pub c: f64,
    pub tau_of_c: f64,
    pub tau_hat: f64,
    pub t_of_c: f64,
    pub t_star: f64,
}

impl Asymptotes {
    pub fn within(&self, tol: f64) -> bool {
        (self.tau_of_c - self.tau_hat).abs() <= tol && (self.t_of_c - self.t_star).abs() <= tol
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InclusionReport {
    pub boundary_points: usize,
    pub boundary_violations: Vec<BoundaryViolation>,
    pub margin_points: usize,
    pub min_margin: f64,
    /// `(τ, c)` of the smallest margin.
    pub min_margin_at: (f64, f64),
    /// Smallest `margin / lhs`.
    pub min_relative_margin: f64,
    pub asymptotes: Vec<Asymptotes>,
    /// `A_k > 0` on the sampled `w` (for `k = 3` only up to `w = 1.75`).
    pub a_k_positive: bool,
    pub discriminant_negative: bool,
    pub min_a_w_sigma: f64,
    /// Largest relative gap between the closed form of `A(w, σ)` and its
    /// power series, for `σ <= 1`.
    pub a_series_gap: f64,
}

impl InclusionReport {
    pub fn passed(&self) -> bool {
        self.boundary_violations.is_empty()
            && self.min_margin > 0.0
            && self.asymptotes.iter().all(|a| a.within(1e-3))
            && self.a_k_positive
            && self.discriminant_negative
            && self.min_a_w_sigma > 0.0
            && self.a_series_gap < 1e-8
    }
}

/// Numerical sweep of `T(c) < τ(c)` on `P × c`, of the inclusion inequality
/// on a `τ × c` grid, and of the polynomial reduction behind it.
pub fn verify_inclusion(p_grid: &[f64], c_grid: &[f64], tau_grid: &[f64], margin_c: &[f64]) -> Result<InclusionReport> {
    let pairs: Vec<(f64, f64)> = p_grid.iter().flat_map(|&bp| c_grid.iter().map(move |&c| (bp, c))).collect();
    let boundary: Vec<(f64, f64, f64, f64)> = pairs
        .par_iter()
        .map(|&(bp, c)| Ok((bp, c, t_of_c(bp, c)?, tau_of_c(bp, c)?)))
        .collect::<Result<_>>()?;
    let boundary_violations = boundary
        .iter()
        .filter(|(_, _, t, tc)| !(t < tc))
        .map(|&(big_p, c, t_of_c, tau_of_c)| BoundaryViolation { big_p, c, t_of_c, tau_of_c })
        .collect();

    let cells: Vec<(f64, f64, f64, f64)> = tau_grid
        .par_iter()
        .flat_map_iter(|&tau| margin_c.iter().map(move |&c| (tau, c)))
        .map(|(tau, c)| {
            let m = inclusion_margin(tau, c)?;
            Ok((tau, c, m, m / ln_boundary_lhs(tau, c).exp()))
        })
        .collect::<Result<_>>()?;
    let (mut min_margin, mut min_at, mut min_rel) = (f64::INFINITY, (f64::NAN, f64::NAN), f64::INFINITY);
    for &(tau, c, m, rel) in &cells {
        if m < min_margin || m.is_nan() {
            min_margin = m;
            min_at = (tau, c);
        }
        min_rel = min_rel.min(rel);
    }

    let asymptotes = p_grid
        .iter()
        .map(|&bp| {
            let c = 1e3;
            Ok(Asymptotes {
                big_p: bp,
                c,
                tau_of_c: tau_of_c(bp, c)?,
                tau_hat: tau_hat(bp)?,
                t_of_c: t_of_c(bp, c)?,
                t_star: t_star(bp)?,
            })
        })
        .collect::<Result<_>>()?;

    let ws: Vec<f64> = (1..=400).map(|i| 1.0 + i as f64 / 400.0).collect();
    let a_k_positive = (2..=12u32)
        .all(|k| ws.iter().filter(|&&w| k != 3 || w <= 1.75).all(|&w| a_k(k, w) > 0.0));
    let discriminant_negative = ws.iter().all(|&w| discriminant(w) < 0.0);
    let sigmas = log_grid(1e-2, 30.0, 200);
    let min_a_w_sigma = ws
        .par_iter()
        .map(|&w| sigmas.iter().map(|&s| a_w_sigma(w, s)).fold(f64::INFINITY, f64::min))
        .collect::<Vec<_>>()
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let mut a_series_gap: f64 = 0.0;
    for &w in ws.iter().step_by(20) {
        for &s in sigmas.iter().filter(|&&s| s <= 1.0) {
            let series = a_series(w, s, 40);
            a_series_gap = a_series_gap.max((a_w_sigma(w, s) - series).abs() / series.abs());
        }
    }

    Ok(InclusionReport {
        boundary_points: pairs.len(),
        boundary_violations,
        margin_points: cells.len(),
        min_margin,
        min_margin_at: min_at,
        min_relative_margin: min_rel,
        asymptotes,
        a_k_positive,
        discriminant_negative,
        min_a_w_sigma,
        a_series_gap,
    })
}

/// `w Σ_{k=2}^{n} A_k(w) σ^k / k!`.
pub fn a_series(w: f64, s: f64, n: u32) -> f64 {
    let mut term = s; // σ^k / k! built up incrementally
    let mut sum = 0.0;
    for k in 2..=n {
        term *= s / k as f64;
        sum += a_k(k, w) * term;
    }
    w * sum
}

/// One cell of the overshoot-region map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionCell {
    pub tau: f64,
    pub ln_ln_p: f64,
    pub p: f64,
    pub in_frak_i: bool,
    pub zeta_gt_lnp: bool,
    pub flag: bool,
}

/// `(τ, ln ln p)` map of `p ∈ 𝔍` and `ζ > ln p`, row-major in `τ`;
/// `ln ln p` is evenly spaced between the ends of `p_range`.
pub fn figure2_grid(tau_range: (f64, f64), p_range: (f64, f64), resolution: (usize, usize)) -> Result<Vec<RegionCell>> {
    let ok = |r: (f64, f64)| r.0 > 0.0 && r.1 >= r.0 && r.1.is_finite();
    if !ok(tau_range) || !ok(p_range) || p_range.0 <= 1.0 || resolution.0 == 0 || resolution.1 == 0 {
        return Err(Error::InvalidConfig(format!(
            "region map needs positive ranges and p > 1, got tau {tau_range:?}, p {p_range:?}"
        )));
    }
    let taus = lin_grid(tau_range.0, tau_range.1, resolution.0);
    let llp = lin_grid(p_range.0.ln().ln(), p_range.1.ln().ln(), resolution.1);
    let pts: Vec<(f64, f64)> = taus.iter().flat_map(|&t| llp.iter().map(move |&l| (t, l))).collect();
    pts.par_iter()
        .map(|&(tau, ln_ln_p)| {
            let p = ln_ln_p.exp().exp();
            let params = ModelParams::new(p, tau)?;
            let in_frak_i = p > E * E && p < j_upper(tau);
            let zeta_gt_lnp = zeta(&params)? > params.kappa();
            Ok(RegionCell { tau, ln_ln_p, p, in_frak_i, zeta_gt_lnp, flag: in_frak_i && zeta_gt_lnp })
        })
        .collect()
}
