/// Cubic Hermite interpolant on a cell of width `h` with end values `u0, u1`
/// and end slopes `d0, d1`, evaluated at the fraction `s ∈ [0, 1]`.
#[inline]
pub fn hermite(u0: f64, u1: f64, d0: f64, d1: f64, h: f64, s: f64) -> f64 {
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * u0 + h10 * h * d0 + h01 * u1 + h11 * h * d1
}

/// Time derivative of [`hermite`] at the same fraction.
#[inline]
pub fn hermite_derivative(u0: f64, u1: f64, d0: f64, d1: f64, h: f64, s: f64) -> f64 {
    let s2 = s * s;
    let g00 = 6.0 * s2 - 6.0 * s;
    let g10 = 3.0 * s2 - 4.0 * s + 1.0;
    let g01 = -6.0 * s2 + 6.0 * s;
    let g11 = 3.0 * s2 - 2.0 * s;
    (g00 * u0 + g01 * u1) / h + g10 * d0 + g11 * d1
}
