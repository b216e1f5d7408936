use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard cap on solver iterations.
pub const MAX_ITERATIONS: usize = 200;

/// A closed interval `[lo, hi]` with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    lo: f64,
    hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
            return Err(Error::Domain(format!("bracket needs finite lo < hi, got [{lo}, {hi}]")));
        }
        Ok(Bracket { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Finds a root of `f` inside `bracket`, stopping once the bracket is no
/// wider than `tol`.
///
/// Secant steps alternate with bisection steps, so the bracket at least
/// halves every two iterations. Infinite function values are accepted (only
/// their sign is used); NaN is a domain error.
pub fn solve_bracketed<F>(mut f: F, bracket: Bracket, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let (mut a, mut b) = (bracket.lo, bracket.hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa.is_nan() || fb.is_nan() {
        return Err(Error::Domain(format!("function is NaN at a bracket end [{a}, {b}]")));
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if sign(fa) == sign(fb) {
        return Err(Error::NoSignChange { lo: a, hi: b, f_lo: fa, f_hi: fb });
    }

    for iter in 0..MAX_ITERATIONS {
        let width = b - a;
        if width <= tol || width <= 4.0 * f64::EPSILON * a.abs().max(b.abs()) {
            return Ok(if fa.abs() < fb.abs() { a } else { b });
        }

        let mid = a + 0.5 * width;
        let x = if iter % 2 == 1 || !fa.is_finite() || !fb.is_finite() {
            mid
        } else {
            let s = b - fb * (b - a) / (fb - fa);
            // keep the trial strictly inside, at least tol/2 from either end
            let margin = 0.5 * tol.min(0.25 * width);
            if s.is_finite() {
                s.clamp(a + margin, b - margin)
            } else {
                mid
            }
        };

        let fx = f(x);
        if fx.is_nan() {
            return Err(Error::Domain(format!("function is NaN at {x}")));
        }
        if fx == 0.0 {
            return Ok(x);
        }
        if sign(fx) == sign(fa) {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
    }
    Err(Error::MaxIterations { estimate: 0.5 * (a + b) })
}
