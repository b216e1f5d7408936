//! The blowflies birth function `f(u) = p u e^{-u}` and the structural
//! hypotheses evaluated on it.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Birth amplitude `p > 1` and delay `tau >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct ModelParams {
    p: f64,
    tau: f64,
}

#[derive(Deserialize)]
struct RawParams {
    p: f64,
    tau: f64,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        ModelParams::new(raw.p, raw.tau)
    }
}

impl ModelParams {
    pub fn new(p: f64, tau: f64) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::Domain(format!("birth amplitude must satisfy p > 1, got {p}")));
        }
        if !(tau >= 0.0) || !tau.is_finite() {
            return Err(Error::Domain(format!("delay must satisfy tau >= 0, got {tau}")));
        }
        Ok(ModelParams { p, tau })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn with_tau(&self, tau: f64) -> Result<Self> {
        ModelParams::new(self.p, tau)
    }

    /// Positive equilibrium `κ = ln p`.
    pub fn kappa(&self) -> f64 {
        self.p.ln()
    }

    /// `P = ln p - 1`, so that `f'(κ) = -P`.
    pub fn big_p(&self) -> f64 {
        self.p.ln() - 1.0
    }

    /// Critical point of `f` (its unique maximum).
    pub fn x_max(&self) -> f64 {
        1.0
    }

    pub fn f_max(&self) -> f64 {
        self.p / E
    }

    #[inline]
    pub fn f(&self, u: f64) -> f64 {
        self.p * u * (-u).exp()
    }

    #[inline]
    pub fn df(&self, u: f64) -> f64 {
        self.p * (1.0 - u) * (-u).exp()
    }

    #[inline]
    pub fn d2f(&self, u: f64) -> f64 {
        self.p * (u - 2.0) * (-u).exp()
    }

    #[inline]
    pub fn d3f(&self, u: f64) -> f64 {
        self.p * (3.0 - u) * (-u).exp()
    }

    /// `f` or one of its first three derivatives at `u >= 0`.
    pub fn birth(&self, u: f64, order: u8) -> Result<f64> {
        if !(u >= 0.0) {
            return Err(Error::Domain(format!("birth function needs u >= 0, got {u}")));
        }
        match order {
            0 => Ok(self.f(u)),
            1 => Ok(self.df(u)),
            2 => Ok(self.d2f(u)),
            3 => Ok(self.d3f(u)),
            _ => Err(Error::Domain(format!("derivative order must be 0..=3, got {order}"))),
        }
    }

    /// Schwarz derivative `f'''/f' - 3/2 (f''/f')^2`.
    ///
    /// Built from the derivatives themselves; `p` cancels up to rounding.
    pub fn schwarz(&self, u: f64) -> Result<f64> {
        if !(u > 0.0) {
            return Err(Error::Domain(format!("Schwarz derivative needs u > 0, got {u}")));
        }
        let d1 = self.df(u);
        if u == 1.0 || d1 == 0.0 {
            return Err(Error::Singular(u));
        }
        let r2 = self.d2f(u) / d1;
        Ok(self.d3f(u) / d1 - 1.5 * r2 * r2)
    }

    /// Feedback condition `(f(x) - κ)(x - κ) < 0` on
    /// `(f(f(x_M)), f(x_M)) \ {κ}`.
    ///
    /// Evaluated twice: on a dense grid, and through the unimodal structure
    /// of `f` (on each side of `κ` the extreme of `f` sits at an end point or
    /// at `κ` itself). Holds only if both agree that it holds.
    pub fn feedback_holds(&self) -> bool {
        let kappa = self.kappa();
        let b = self.f(self.x_max());
        let a = self.f(b);
        if b - a <= 1e-12 * b.abs().max(1.0) {
            return true;
        }
        const N: usize = 10_000;
        let grid_ok = (1..N).all(|i| {
            let x = a + (b - a) * i as f64 / N as f64;
            let d = x - kappa;
            if d.abs() <= 1e-12 * kappa {
                return true;
            }
            (self.f(x) - kappa) * d < 0.0
        });
        grid_ok && self.feedback_structural(a, b, kappa)
    }

    fn feedback_structural(&self, a: f64, b: f64, kappa: f64) -> bool {
        let left_nonempty = a < kappa;
        let right_nonempty = kappa < b;
        if !left_nonempty || !right_nonempty {
            // κ outside the interval: one sign of x - κ throughout
            return if a >= kappa { kappa > 1.0 } else { self.f(a).min(self.f(b)) >= kappa };
        }
        // near κ the condition needs f decreasing through κ
        if kappa <= self.x_max() {
            return false;
        }
        // left of κ: inf f over (a, κ) is min(f(a), κ) by unimodality
        // right of κ: f decreasing on (κ, b), so sup is f(κ) = κ, never reached
        self.f(a) >= kappa
    }

    /// The `u*(+∞) = ln p` criterion `e^{-τ} > P ln((P²+P)/(P²+1))`,
    /// taken as satisfied whenever `p <= e²`.
    pub fn gsc_holds(&self) -> bool {
        if self.p <= E * E {
            return true;
        }
        let big_p = self.big_p();
        (-self.tau).exp() > big_p * ((big_p * big_p + big_p) / (big_p * big_p + 1.0)).ln()
    }
}
