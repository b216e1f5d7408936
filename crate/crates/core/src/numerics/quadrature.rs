use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 50;

struct Simpson<'a, F: FnMut(f64) -> f64> {
    f: &'a mut F,
    converged: bool,
}

impl<F: FnMut(f64) -> f64> Simpson<'_, F> {
    #[allow(clippy::too_many_arguments)]
    fn refine(&mut self, a: f64, fa: f64, m: f64, fm: f64, b: f64, fb: f64, whole: f64, eps: f64, depth: u32) -> f64 {
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = (self.f)(lm);
        let frm = (self.f)(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * eps {
            return left + right + delta / 15.0;
        }
        if depth >= MAX_DEPTH || !delta.is_finite() {
            self.converged = false;
            return left + right + delta / 15.0;
        }
        self.refine(a, fa, lm, flm, m, fm, left, 0.5 * eps, depth + 1)
            + self.refine(m, fm, rm, frm, b, fb, right, 0.5 * eps, depth + 1)
    }
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
///
/// Targets `|result - exact| <= tol * (1 + |result|)`. `b < a` integrates
/// backwards. Exceeding the refinement depth returns
/// [`Error::QuadratureNonConvergence`] carrying the best estimate.
pub fn integrate_adaptive<F>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if !(tol > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!("bad quadrature input: [{a}, {b}], tol {tol}")));
    }
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let eps = tol * (1.0 + whole.abs());
    let mut s = Simpson { f: &mut f, converged: true };
    let result = s.refine(a, fa, m, fm, b, fb, whole, eps, 0);
    if s.converged && result.is_finite() {
        Ok(result)
    } else {
        Err(Error::QuadratureNonConvergence { estimate: result })
    }
}
