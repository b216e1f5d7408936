//! Method-of-steps continuation of the heteroclinic connection `u*` of
//! `u' = -u + f(u(t-τ))` past the series horizon, and the crossing analysis
//! of `u* = ln p`.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::dirichlet::{zeta, DirichletExpansion, DEFAULT_TERMS};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::numerics::{hermite, hermite_derivative, solve_bracketed, Bracket};

/// Default number of steps per delay interval.
pub const DEFAULT_STEPS_PER_DELAY: usize = 64;

/// `|u|` beyond which integration is abandoned.
pub const BLOW_UP: f64 = 1e6;

/// Uniform samples `(t, u, u')` with step `h = τ/K`.
///
/// The first `K + 1` samples are the series history on `[t0 - τ, t0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    pub h: f64,
    pub steps_per_delay: usize,
    pub t0: f64,
    pub provenance: SeriesMeta,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesMeta {
    pub mu: f64,
    pub n_terms: usize,
    pub eps: f64,
    pub horizon: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn t_end(&self) -> f64 {
        *self.t.last().expect("trajectory holds its history")
    }

    /// Dense output on the cubic Hermite interpolant.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        let (i, s) = self.locate(t)?;
        Some(hermite(self.u[i], self.u[i + 1], self.du[i], self.du[i + 1], self.h, s))
    }

    fn locate(&self, t: f64) -> Option<(usize, f64)> {
        let first = self.t[0];
        if !(t >= first && t <= self.t_end()) || self.len() < 2 {
            return None;
        }
        let x = (t - first) / self.h;
        let i = (x.floor() as usize).min(self.len() - 2);
        Some((i, x - i as f64))
    }
}

/// Default end time `t0 + max(10, 20τ)`.
pub fn default_t_end(expansion: &DirichletExpansion) -> f64 {
    expansion.handoff_time() + 10f64.max(20.0 * expansion.params.tau())
}

/// Classical four-stage integration with step `τ/K`, seeded on
/// `[t0 - τ, t0]` by the series. `t_end` is rounded to the step grid.
pub fn integrate(expansion: &DirichletExpansion, t_end: f64, k: usize) -> Result<Trajectory> {
    let params = expansion.params;
    let tau = params.tau();
    if !(tau > 0.0) {
        return Err(Error::Domain("method of steps needs tau > 0".into()));
    }
    if k < 20 {
        return Err(Error::Domain(format!("need at least 20 steps per delay, got {k}")));
    }
    let t0 = expansion.handoff_time();
    if !(t_end > t0) {
        return Err(Error::Domain(format!("t_end = {t_end} must exceed the handoff time {t0}")));
    }
    let h = tau / k as f64;
    let n_steps = (((t_end - t0) / h).round() as usize).max(1);
    let total = k + 1 + n_steps;
    let mut t = Vec::with_capacity(total);
    let mut u = Vec::with_capacity(total);
    let mut du = Vec::with_capacity(total);
    let start = t0 - tau;
    for i in 0..=k {
        let ti = start + i as f64 * h;
        t.push(ti);
        u.push(expansion.evaluate(ti)?.value);
        du.push(expansion.derivative(ti)?.value);
    }

    let rhs = |x: f64, delayed: f64| -x + params.f(delayed);
    for j in k..k + n_steps {
        let d0 = u[j - k];
        let d1 = u[j - k + 1];
        let dm = hermite(d0, d1, du[j - k], du[j - k + 1], h, 0.5);
        let y = u[j];
        let k1 = rhs(y, d0);
        let k2 = rhs(y + 0.5 * h * k1, dm);
        let k3 = rhs(y + 0.5 * h * k2, dm);
        let k4 = rhs(y + h * k3, d1);
        let next = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        let tn = start + (j + 1) as f64 * h;
        if !next.is_finite() || next.abs() > BLOW_UP {
            return Err(Error::BlowUp { t: tn, value: next });
        }
        t.push(tn);
        u.push(next);
        du.push(rhs(next, d1));
    }

    Ok(Trajectory {
        t,
        u,
        du,
        h,
        steps_per_delay: k,
        t0,
        provenance: SeriesMeta {
            mu: expansion.mu,
            n_terms: expansion.n_terms(),
            eps: expansion.eps,
            horizon: expansion.horizon,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TailShape {
    MonotoneTail,
    Oscillating,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub t: f64,
    /// `u'` at the crossing; its sign is the crossing direction.
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingReport {
    pub level: f64,
    pub crossings: Vec<Crossing>,
    pub gaps: Vec<f64>,
    /// Indices `j` with `t_{j+1} - t_j <= τ`, or with a zero or
    /// non-alternating slope at `t_{j}`.
    pub anomalies: Vec<usize>,
    /// First local maximum `(M, u(M))`; `None` when `u` increases throughout
    /// the run (`M = +∞`).
    pub first_max: Option<(f64, f64)>,
    pub global_max: f64,
    pub tail_class: TailShape,
}

impl CrossingReport {
    pub fn count(&self) -> usize {
        self.crossings.len()
    }
}

/// Crossings of `level` (default `ln p`) and the tail classification.
pub fn crossings(traj: &Trajectory, level: f64, tau: f64) -> Result<CrossingReport> {
    let n = traj.len();
    if n < 3 {
        return Err(Error::InsufficientPoints { needed: 3, got: n });
    }
    let mut found = Vec::new();
    let mut last_index = None;
    for i in 0..n - 1 {
        let a = traj.u[i] - level;
        let b = traj.u[i + 1] - level;
        if !(a < 0.0 && b >= 0.0 || a > 0.0 && b <= 0.0) {
            continue;
        }
        let g = |s: f64| {
            hermite(traj.u[i], traj.u[i + 1], traj.du[i], traj.du[i + 1], traj.h, s) - level
        };
        let s = if b == 0.0 { 1.0 } else { solve_bracketed(g, Bracket::new(0.0, 1.0)?, 1e-14)? };
        let slope = hermite_derivative(traj.u[i], traj.u[i + 1], traj.du[i], traj.du[i + 1], traj.h, s);
        found.push(Crossing { t: traj.t[i] + s * traj.h, slope });
        last_index = Some(i + 1);
    }

    let gaps: Vec<f64> = found.windows(2).map(|w| w[1].t - w[0].t).collect();
    let mut anomalies = Vec::new();
    for (j, c) in found.iter().enumerate() {
        let expected_up = j % 2 == 0;
        let bad_slope = c.slope == 0.0 || (c.slope > 0.0) != expected_up;
        let bad_gap = gaps.get(j).is_some_and(|&g| g <= tau);
        if bad_slope || bad_gap {
            anomalies.push(j);
        }
    }

    let first_max = (1..n - 1)
        .find(|&i| traj.du[i - 1] > 0.0 && traj.du[i] <= 0.0)
        .map(|i| {
            let j = if traj.u[i - 1] > traj.u[i] { i - 1 } else { i };
            (traj.t[j], traj.u[j])
        });
    let global_max = traj.u.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let tail_class = classify_tail(traj, level, tau, &found, last_index.unwrap_or(0))?;
    Ok(CrossingReport { level, crossings: found, gaps, anomalies, first_max, global_max, tail_class })
}

fn classify_tail(
    traj: &Trajectory,
    level: f64,
    tau: f64,
    found: &[Crossing],
    since: usize,
) -> Result<TailShape> {
    let n = traj.len();
    let t_end = traj.t_end();
    let half = traj.t[0] + 0.5 * (t_end - traj.t[0]);
    if found.iter().filter(|c| c.t >= half).count() >= 2 {
        return Ok(TailShape::Oscillating);
    }
    let window = ((2.0 * tau / traj.h).round() as usize).min(n - 1);
    let tail = &traj.u[n - 1 - window..];
    let tol = 1e-12 * (1.0 + level.abs());
    let rising = tail.windows(2).all(|w| w[1] - w[0] >= -tol);
    let falling = tail.windows(2).all(|w| w[1] - w[0] <= tol);
    let peak = traj.u[since..].iter().map(|u| (u - level).abs()).fold(0.0, f64::max);
    let last = (traj.u[n - 1] - level).abs();
    if (rising || falling) && last * 1e3 <= peak {
        Ok(TailShape::MonotoneTail)
    } else {
        Err(Error::InconclusiveTail { t_end })
    }
}

/// Extra doublings of `t_end - t0` tried by [`integrate_classified`].
pub const MAX_DOUBLINGS: usize = 4;

/// [`integrate`] then [`crossings`] of `ln p`, doubling the run length while
/// the tail is inconclusive. Returns the number of doublings used.
pub fn integrate_classified(
    expansion: &DirichletExpansion,
    t_end: f64,
    k: usize,
) -> Result<(Trajectory, CrossingReport, usize)> {
    let params = expansion.params;
    let mut t_end = t_end;
    for doublings in 0..=MAX_DOUBLINGS {
        let traj = integrate(expansion, t_end, k)?;
        match crossings(&traj, params.kappa(), params.tau()) {
            Ok(r) => return Ok((traj, r, doublings)),
            Err(Error::InconclusiveTail { .. }) if doublings < MAX_DOUBLINGS => {
                t_end = traj.t0 + 2.0 * (t_end - traj.t0);
            }
            Err(e) => return Err(e),
        }
    }
    unreachable!("the last pass returns")
}

/// Sign changes `sc` of a window `u(t+s) - κ`, `s ∈ [-τ, 0]`, followed by
/// the derivative slot `u'(t)` (which is not shifted by `κ`). Zeros are
/// skipped; a single-signed window has `sc = 0`.
pub fn sign_change_count(window: &[f64], kappa: f64) -> usize {
    let n = window.len();
    let mut prev = 0.0f64;
    let mut count = 0;
    for (i, &w) in window.iter().enumerate() {
        let v = if i + 1 == n { w } else { w - kappa };
        if v == 0.0 || v.is_nan() {
            continue;
        }
        if prev != 0.0 && (v > 0.0) != (prev > 0.0) {
            count += 1;
        }
        prev = v;
    }
    count
}

/// The sign-change window of `traj` ending at sample `i >= K`.
pub fn window_at(traj: &Trajectory, i: usize) -> Option<Vec<f64>> {
    let k = traj.steps_per_delay;
    if i < k || i >= traj.len() {
        return None;
    }
    let mut w = traj.u[i - k..=i].to_vec();
    w.push(traj.du[i]);
    Some(w)
}

/// Upper end of `𝔍 = (e², exp(1 + e^{-1-τ}/τ))`.
pub fn j_upper(tau: f64) -> f64 {
    (1.0 + (-1.0 - tau).exp() / tau).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Verdict {
    pub in_j: bool,
    pub j_upper: f64,
    pub zeta: f64,
    pub zeta_exceeds_kappa: bool,
    pub verdict: bool,
    /// From a default run when one was requested and succeeded.
    pub max_u: Option<f64>,
    pub tail: Option<TailShape>,
}

/// `p ∈ 𝔍` and `ζ > ln p`; with `run`, also the observed maximum and tail.
pub fn theorem1_verdict(params: &ModelParams, run: bool) -> Result<Theorem1Verdict> {
    let tau = params.tau();
    if !(tau > 0.0) {
        return Err(Error::Domain("the overshoot criterion needs tau > 0".into()));
    }
    let upper = j_upper(tau);
    let in_j = params.p() > E * E && params.p() < upper;
    let z = zeta(params)?;
    let zeta_exceeds_kappa = z > params.kappa();
    let (mut max_u, mut tail) = (None, None);
    if run {
        let s = DirichletExpansion::new(*params, DEFAULT_TERMS)?;
        match integrate_classified(&s, default_t_end(&s), DEFAULT_STEPS_PER_DELAY) {
            Ok((traj, r, _)) => {
                max_u = Some(traj.u.iter().copied().fold(f64::NEG_INFINITY, f64::max));
                tail = Some(r.tail_class);
            }
            Err(Error::InconclusiveTail { .. }) => {
                let traj = integrate(&s, default_t_end(&s), DEFAULT_STEPS_PER_DELAY)?;
                max_u = Some(traj.u.iter().copied().fold(f64::NEG_INFINITY, f64::max));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Theorem1Verdict {
        in_j,
        j_upper: upper,
        zeta: z,
        zeta_exceeds_kappa,
        verdict: in_j && zeta_exceeds_kappa,
        max_u,
        tail,
    })
}
