//! Dirichlet-series expansion of the heteroclinic connection at `-∞`,
//! `u*(t) = Σ q̄_n e^{nμt}` with `q̄_1 = 1`, its certified horizon and the
//! overshoot bound `ζ`.

use serde::{Deserialize, Serialize};

use crate::characteristic::{char_value, mu_root, CharKind};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::numerics::{integrate_adaptive, lower_incomplete_gamma, PowerSeries};

/// Default number of coefficients.
pub const DEFAULT_TERMS: usize = 40;

/// Coefficients beyond this magnitude abort the recurrence.
pub const OVERFLOW_GUARD: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletExpansion {
    pub params: ModelParams,
    pub mu: f64,
    /// `q̄_1 ..= q̄_N`; index 0 holds `q̄_1 = 1`.
    pub coeffs: Vec<f64>,
    /// Series parameter of the convergence estimate (not the `c^{-2}` of the
    /// profile equation).
    pub eps: f64,
    pub horizon: f64,
}

/// Value of a truncated series together with the magnitude of its last kept
/// term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: f64,
    pub tail_estimate: f64,
}

/// `q̄_1 ..= q̄_N` from the coefficient recurrence.
///
/// With `v_j = q̄_j e^{-jμτ}` and `w = Σ v_j x^j`, matching powers of
/// `x = e^{μt}` gives `χ(nμ) q̄_n = [p w (e^{-w} - 1)]_n`, whose right side only
/// involves `q̄_1 .. q̄_{n-1}`.
pub fn coefficients(params: &ModelParams, n_terms: usize) -> Result<(f64, Vec<f64>)> {
    if n_terms < 2 {
        return Err(Error::Domain(format!("need at least 2 coefficients, got {n_terms}")));
    }
    let mu = mu_root(params)?;
    let p = params.p();
    let tau = params.tau();
    let mut q = vec![0.0, 1.0];
    for n in 2..=n_terms {
        let w = PowerSeries::new(
            (0..=n)
                .map(|j| if (1..n).contains(&j) { q[j] * (-(j as f64) * mu * tau).exp() } else { 0.0 })
                .collect(),
        )?;
        let mut e = w.scale(-1.0).exp()?;
        let mut ec = e.coeffs().to_vec();
        ec[0] -= 1.0;
        e = PowerSeries::new(ec)?;
        let rhs = p * w.mul(&e)?.coeff(n);
        let chi = char_value(CharKind::AtZeroDde, n as f64 * mu, params, None)?;
        let qn = rhs / chi;
        if !qn.is_finite() || qn.abs() > OVERFLOW_GUARD {
            return Err(Error::CoefficientOverflow { n, value: qn });
        }
        q.push(qn);
    }
    q.remove(0);
    Ok((mu, q))
}

/// `q̄_2 = -p e^{-2μτ} / χ(2μ)`.
pub fn qbar2_closed(params: &ModelParams, mu: f64) -> Result<f64> {
    let chi2 = char_value(CharKind::AtZeroDde, 2.0 * mu, params, None)?;
    Ok(-params.p() * (-2.0 * mu * params.tau()).exp() / chi2)
}

/// `q̄_3 = p (1/2 - 2 q̄_2) e^{-3μτ} / χ(3μ)`.
pub fn qbar3_closed(params: &ModelParams, mu: f64) -> Result<f64> {
    let q2 = qbar2_closed(params, mu)?;
    let chi3 = char_value(CharKind::AtZeroDde, 3.0 * mu, params, None)?;
    Ok(params.p() * (0.5 - 2.0 * q2) * (-3.0 * mu * params.tau()).exp() / chi3)
}

/// Upper end of the admissible series parameter, `e^{μτ} - 1`.
pub fn eps_max(params: &ModelParams, mu: f64) -> f64 {
    (mu * params.tau()).exp_m1()
}

/// `T(ε) = τ + μ^{-1} ln[ ε/(1+ε) · ln(1 + 1/(|q̄_2|(1+ε))) ]`.
pub fn horizon_for(params: &ModelParams, mu: f64, qbar2: f64, eps: f64) -> Result<f64> {
    let max = eps_max(params, mu);
    if !(eps > 0.0 && eps < max) {
        return Err(Error::EpsOutOfRange { eps, max });
    }
    Ok(params.tau() + (eps / (1.0 + eps) * (1.0 / (qbar2.abs() * (1.0 + eps))).ln_1p()).ln() / mu)
}

/// `ε` maximising the horizon: 200-point log grid, then golden section.
pub fn optimal_eps(params: &ModelParams, mu: f64, qbar2: f64) -> Result<f64> {
    let max = eps_max(params, mu);
    if !(max > 0.0) {
        return Err(Error::Domain(format!("no admissible eps: e^(mu tau) - 1 = {max}")));
    }
    let t = |e: f64| horizon_for(params, mu, qbar2, e).unwrap_or(f64::NEG_INFINITY);
    let lo = (max * 1e-9).ln();
    let hi = (max * (1.0 - 1e-9)).ln();
    const N: usize = 200;
    let grid: Vec<f64> = (0..N).map(|i| (lo + (hi - lo) * i as f64 / (N - 1) as f64).exp()).collect();
    let best = (0..N).max_by(|&i, &j| t(grid[i]).total_cmp(&t(grid[j]))).unwrap_or(0);
    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(N - 1)];
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (t(x1), t(x2));
    for _ in 0..200 {
        if b - a <= 1e-13 * b {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = t(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = t(x1);
        }
    }
    let mid = 0.5 * (a + b);
    Ok(if t(mid) >= t(grid[best]) { mid } else { grid[best] })
}

impl DirichletExpansion {
    /// `n_terms` coefficients with the horizon-maximising `ε`.
    pub fn new(params: ModelParams, n_terms: usize) -> Result<Self> {
        let (mu, coeffs) = coefficients(&params, n_terms)?;
        let eps = optimal_eps(&params, mu, coeffs[1])?;
        Self::assemble(params, mu, coeffs, eps)
    }

    pub fn with_eps(params: ModelParams, n_terms: usize, eps: f64) -> Result<Self> {
        let (mu, coeffs) = coefficients(&params, n_terms)?;
        Self::assemble(params, mu, coeffs, eps)
    }

    fn assemble(params: ModelParams, mu: f64, coeffs: Vec<f64>, eps: f64) -> Result<Self> {
        let horizon = horizon_for(&params, mu, coeffs[1], eps)?;
        Ok(DirichletExpansion { params, mu, coeffs, eps, horizon })
    }

    pub fn qbar2(&self) -> f64 {
        self.coeffs[1]
    }

    pub fn n_terms(&self) -> usize {
        self.coeffs.len()
    }

    /// Horizon for a different `ε` with the same coefficients.
    pub fn horizon(&self, eps: f64) -> Result<f64> {
        horizon_for(&self.params, self.mu, self.qbar2(), eps)
    }

    /// Series-to-integrator handoff time `min(0, T - 0.5/μ)`.
    pub fn handoff_time(&self) -> f64 {
        (self.horizon - 0.5 / self.mu).min(0.0)
    }

    /// Coefficients of the unshifted series, `q_n = q̄_n σ^n` with
    /// `σ = ε ln(1 + 1/(|q̄_2|(1+ε)))`; the convergence estimate bounds
    /// every `|q_n|` by `σ`.
    pub fn unnormalized(&self) -> (f64, Vec<f64>) {
        let sigma = self.eps * (1.0 / (self.qbar2().abs() * (1.0 + self.eps))).ln_1p();
        let q = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| c * sigma.powi(i as i32 + 1))
            .collect();
        (sigma, q)
    }

    fn check(&self, t: f64) -> Result<()> {
        if !(t < self.horizon) {
            return Err(Error::BeyondHorizon { t, horizon: self.horizon });
        }
        Ok(())
    }

    /// Partial sum `Σ q̄_n e^{nμt}` for `t` below the horizon.
    pub fn evaluate(&self, t: f64) -> Result<SeriesValue> {
        self.check(t)?;
        Ok(self.sum(t, |_| 1.0))
    }

    /// Term-by-term derivative `Σ nμ q̄_n e^{nμt}`.
    pub fn derivative(&self, t: f64) -> Result<SeriesValue> {
        self.check(t)?;
        Ok(self.sum(t, |n| n as f64 * self.mu))
    }

    fn sum(&self, t: f64, weight: impl Fn(usize) -> f64) -> SeriesValue {
        let x = (self.mu * t).exp();
        let mut xn = 1.0;
        let mut value = 0.0;
        let mut last = 0.0;
        for (i, &q) in self.coeffs.iter().enumerate() {
            xn *= x;
            last = weight(i + 1) * q * xn;
            value += last;
        }
        SeriesValue { value, tail_estimate: last.abs() }
    }

    /// Upper bound `u₁(t) = e^{μt}`.
    pub fn u1(&self, t: f64) -> f64 {
        (self.mu * t).exp()
    }

    /// Lower bound `u₂(t) = e^{μt} + q̄_2 e^{2μt}`.
    pub fn u2(&self, t: f64) -> f64 {
        let x = (self.mu * t).exp();
        x + self.qbar2() * x * x
    }
}

/// `ζ = (1+q̄_2)e^{-τ} + pm(Γ(1,m+1) - Γ(e^{-μτ},m+1) + q̄_2Γ(1,m+2) - q̄_2Γ(e^{-μτ},m+2))`,
/// `m = 1/μ`, with `Γ` the lower incomplete gamma function.
pub fn zeta(params: &ModelParams) -> Result<f64> {
    let mu = mu_root(params)?;
    let q2 = qbar2_closed(params, mu)?;
    let m = 1.0 / mu;
    let e = (-mu * params.tau()).exp();
    let g = |z: f64, s: f64| lower_incomplete_gamma(z, s);
    let bracket = g(1.0, m + 1.0)? - g(e, m + 1.0)? + q2 * (g(1.0, m + 2.0)? - g(e, m + 2.0)?);
    Ok((1.0 + q2) * (-params.tau()).exp() + params.p() * m * bracket)
}

/// `ζ` from its integral form
/// `(1+q̄_2)e^{-τ} + p ∫_{-τ}^0 e^{μs} e^{s} (1 + q̄_2 e^{μs}) exp(-e^{μs}) ds`.
pub fn zeta_quadrature(params: &ModelParams, tol: f64) -> Result<f64> {
    let mu = mu_root(params)?;
    let q2 = qbar2_closed(params, mu)?;
    let integrand = |s: f64| {
        let x = (mu * s).exp();
        x * s.exp() * (1.0 + q2 * x) * (-x).exp()
    };
    let integral = integrate_adaptive(integrand, -params.tau(), 0.0, tol)?;
    Ok((1.0 + q2) * (-params.tau()).exp() + params.p() * integral)
}
