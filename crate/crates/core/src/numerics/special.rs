use crate::error::{Error, Result};

/// Lower incomplete gamma function `Γ(z, s) = ∫_0^z t^{s-1} e^{-t} dt`.
///
/// Argument order follows the integral: the upper limit comes first, the
/// exponent second. Evaluated with the series
/// `z^s e^{-z} Σ_k z^k / (s (s+1) ... (s+k))`, which has only positive terms
/// and converges for every `z >= 0`.
pub fn lower_incomplete_gamma(z: f64, s: f64) -> Result<f64> {
    if !(z >= 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!("incomplete gamma needs z >= 0, got {z}")));
    }
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Domain(format!("incomplete gamma needs s > 0, got {s}")));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    let mut term = 1.0 / s;
    let mut sum = term;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= z / (s + k);
        sum += term;
        if term <= sum * 1e-17 || k > 1e6 {
            break;
        }
    }
    Ok((s * z.ln() - z).exp() * sum)
}
