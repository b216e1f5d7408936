//! Characteristic functions of the linearised equations, their real roots,
//! the minimal wave speed and the tail-shape test.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::numerics::{solve_bracketed, Bracket, DEFAULT_TOL};

/// Which linearisation.
///
/// | kind | formula | speed argument |
/// |---|---|---|
/// | `AtZeroDde` | `z + 1 - p e^{-zτ}` | none |
/// | `AtKappaDde` | `z + 1 + P e^{-zτ}` | none |
/// | `AtZeroProfile` | `εz² - z - 1 + p e^{-zτ}` | `ε` |
/// | `AtKappaProfileEps` | `εz² - z - 1 - P e^{-zτ}` | `ε` |
/// | `AtKappaProfileC` | `z² - cz - 1 - P e^{-zcτ}` | `c` |
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CharKind {
    AtZeroDde,
    AtKappaDde,
    AtZeroProfile,
    AtKappaProfileEps,
    AtKappaProfileC,
}

/// `a z² + b z + c0 + k e^{-s z}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadExp {
    pub a: f64,
    pub b: f64,
    pub c0: f64,
    pub k: f64,
    pub s: f64,
}

impl QuadExp {
    #[inline]
    fn expo(&self, z: f64) -> f64 {
        if self.k == 0.0 {
            0.0
        } else {
            self.k * (-self.s * z).exp()
        }
    }

    #[inline]
    pub fn value(&self, z: f64) -> f64 {
        (self.a * z + self.b) * z + self.c0 + self.expo(z)
    }

    #[inline]
    pub fn d1(&self, z: f64) -> f64 {
        2.0 * self.a * z + self.b - self.s * self.expo(z)
    }

    #[inline]
    pub fn d2(&self, z: f64) -> f64 {
        2.0 * self.a + self.s * self.s * self.expo(z)
    }
}

impl CharKind {
    /// Coefficients of this characteristic function.
    pub fn form(self, params: &ModelParams, speed: Option<f64>) -> Result<QuadExp> {
        let p = params.p();
        let tau = params.tau();
        let big_p = params.big_p();
        let need = |s: Option<f64>| s.ok_or(Error::MissingSpeed(self));
        Ok(match self {
            CharKind::AtZeroDde => QuadExp { a: 0.0, b: 1.0, c0: 1.0, k: -p, s: tau },
            CharKind::AtKappaDde => QuadExp { a: 0.0, b: 1.0, c0: 1.0, k: big_p, s: tau },
            CharKind::AtZeroProfile => QuadExp { a: need(speed)?, b: -1.0, c0: -1.0, k: p, s: tau },
            CharKind::AtKappaProfileEps => {
                QuadExp { a: need(speed)?, b: -1.0, c0: -1.0, k: -big_p, s: tau }
            }
            CharKind::AtKappaProfileC => {
                let c = need(speed)?;
                QuadExp { a: 1.0, b: -c, c0: -1.0, k: -big_p, s: c * tau }
            }
        })
    }
}

/// Evaluates the characteristic function `kind` at `z`.
///
/// `speed` is `ε` for the two `ε`-kinds, `c` for [`CharKind::AtKappaProfileC`]
/// and ignored otherwise.
pub fn char_value(kind: CharKind, z: f64, params: &ModelParams, speed: Option<f64>) -> Result<f64> {
    Ok(kind.form(params, speed)?.value(z))
}

/// `z`-derivative of [`char_value`].
pub fn char_derivative(kind: CharKind, z: f64, params: &ModelParams, speed: Option<f64>) -> Result<f64> {
    Ok(kind.form(params, speed)?.d1(z))
}

/// A real root and its multiplicity (1, or 2 for a detected tangency).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealRoot {
    pub z: f64,
    pub multiplicity: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootReport {
    pub kind: CharKind,
    /// Sorted ascending.
    pub real_roots: Vec<RealRoot>,
    pub search_window: (f64, f64),
}

impl RootReport {
    pub fn is_empty(&self) -> bool {
        self.real_roots.is_empty()
    }

    /// Number of roots counted with multiplicity.
    pub fn count(&self) -> usize {
        self.real_roots.iter().map(|r| r.multiplicity as usize).sum()
    }
}

/// Residual below which a critical point counts as a double root.
pub const TANGENCY_TOL: f64 = 1e-9;

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Zeros of a function on `[lo, hi]` that is monotone between consecutive
/// entries of `breaks` (which must include both ends).
fn zeros_on_monotone_pieces<F: Fn(f64) -> f64>(f: F, breaks: &[f64], tol: f64) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let (fa, fb) = (f(a), f(b));
        if sign(fa) != 0 && sign(fb) != 0 && sign(fa) != sign(fb) {
            out.push(solve_bracketed(&f, Bracket::new(a, b)?, tol)?);
        }
    }
    Ok(out)
}

/// All real roots of `form` on the closed window `[lo, hi]`.
///
/// The second derivative `2a + k s² e^{-sz}` is monotone in `z`, so it has at
/// most one zero; the first derivative then has at most two and the function
/// is monotone between them. Each monotone piece is bracketed exactly, which
/// finds every simple root; critical points with `|value| <= TANGENCY_TOL` are
/// reported once as double roots.
pub fn real_roots_in(form: &QuadExp, lo: f64, hi: f64) -> Result<Vec<RealRoot>> {
    let tol = DEFAULT_TOL * 1e-2;
    let inflections = zeros_on_monotone_pieces(|z| form.d2(z), &[lo, hi], tol)?;
    let mut breaks1 = vec![lo];
    breaks1.extend(inflections);
    breaks1.push(hi);
    let crits = zeros_on_monotone_pieces(|z| form.d1(z), &breaks1, tol)?;

    let mut roots = Vec::new();
    let mut breaks2 = vec![lo];
    for &c in &crits {
        breaks2.push(c);
        if form.value(c).abs() <= TANGENCY_TOL {
            roots.push(RealRoot { z: c, multiplicity: 2 });
        }
    }
    breaks2.push(hi);

    // tangent critical points read as zero so adjacent pieces do not
    // report the same double root twice
    let tangent: Vec<f64> = roots.iter().map(|r| r.z).collect();
    let snapped = |z: f64| {
        if tangent.contains(&z) {
            0.0
        } else {
            form.value(z)
        }
    };
    for w in breaks2.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let (fa, fb) = (snapped(a), snapped(b));
        if sign(fa) != 0 && sign(fb) != 0 && sign(fa) != sign(fb) {
            let z = solve_bracketed(|z| form.value(z), Bracket::new(a, b)?, tol)?;
            roots.push(RealRoot { z, multiplicity: 1 });
        } else if sign(fa) == 0 && !tangent.contains(&a) {
            roots.push(RealRoot { z: a, multiplicity: 1 });
        }
    }
    if sign(snapped(hi)) == 0 && !tangent.contains(&hi) {
        roots.push(RealRoot { z: hi, multiplicity: 1 });
    }
    roots.sort_by(|x, y| x.z.total_cmp(&y.z));
    roots.dedup_by(|x, y| (x.z - y.z).abs() <= tol);
    Ok(roots)
}

/// The unique positive root `μ` of `χ(z) = z + 1 - p e^{-zτ}`.
///
/// `χ' = 1 + pτ e^{-zτ} > 0`, `χ(0) = 1 - p < 0` and `χ(p) > 0`.
pub fn mu_root(params: &ModelParams) -> Result<f64> {
    let form = CharKind::AtZeroDde.form(params, None)?;
    solve_bracketed(|z| form.value(z), Bracket::new(0.0, params.p())?, DEFAULT_TOL)
}

/// Left end of the negative-root window, `-(1 + |P| + c²) · 10`.
pub fn negative_window(params: &ModelParams, c: f64) -> f64 {
    -(1.0 + params.big_p().abs() + c * c) * 10.0
}

/// Real negative roots of `z² - cz - 1 - P e^{-zcτ}`.
pub fn negative_roots_at_kappa(params: &ModelParams, c: f64) -> Result<RootReport> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::Domain(format!("speed must be positive, got {c}")));
    }
    let kind = CharKind::AtKappaProfileC;
    let form = kind.form(params, Some(c))?;
    let lo = negative_window(params, c);
    // χ₊(0) = -1 - P < 0, so 0 itself is never a root; stay just left of it
    let hi = -f64::MIN_POSITIVE;
    let real_roots = real_roots_in(&form, lo, hi)?;
    Ok(RootReport { kind, real_roots, search_window: (lo, 0.0) })
}

/// `z² - cz - 1 + p e^{-zcτ}`, the profile linearisation at zero in the
/// speed-scaled variable.
fn zero_profile_c(params: &ModelParams, c: f64) -> QuadExp {
    QuadExp { a: 1.0, b: -c, c0: -1.0, k: params.p(), s: c * params.tau() }
}

/// `min_{z > 0}` of the zero-profile characteristic function at speed `c`.
///
/// The function is convex with negative slope at `0`, so the minimiser is the
/// unique zero of the derivative. Returns `(minimum, minimiser)`.
pub fn zero_profile_minimum(params: &ModelParams, c: f64) -> Result<(f64, f64)> {
    let g = zero_profile_c(params, c);
    let hi = 0.5 * (c + params.p() * c * params.tau()) + 1.0;
    let z = solve_bracketed(|z| g.d1(z), Bracket::new(0.0, hi)?, 1e-14)?;
    Ok((g.value(z), z))
}

/// Whether `εz² - z - 1 + p e^{-zτ}` (with `ε = c^{-2}`) has a positive root.
pub fn has_positive_zero_root(params: &ModelParams, c: f64) -> Result<bool> {
    if !(c > 0.0) {
        return Err(Error::Domain(format!("speed must be positive, got {c}")));
    }
    Ok(zero_profile_minimum(params, c)?.0 <= TANGENCY_TOL)
}

/// Minimal wave speed `c_*`: the smallest `c` at which the zero-profile
/// characteristic function gains a positive root.
///
/// The minimum over `z > 0` decreases strictly in `c`, so `c_*` is found by
/// bisection on it, with an inner solve for the tangency point.
pub fn minimal_speed(params: &ModelParams) -> Result<f64> {
    let m = |c: f64| zero_profile_minimum(params, c).map(|(v, _)| v);
    let lo = 1e-9;
    if m(lo)? <= 0.0 {
        return Err(Error::NonBracketing(format!("minimum already non-positive at c = {lo}")));
    }
    let mut hi = 1.0;
    let mut doublings = 0;
    while m(hi)? > 0.0 {
        hi *= 2.0;
        doublings += 1;
        if doublings > 60 {
            return Err(Error::NonBracketing(format!(
                "zero-profile minimum stays positive up to c = {hi:e} (p = {}, tau = {})",
                params.p(),
                params.tau()
            )));
        }
    }
    let mut failure = None;
    let r = solve_bracketed(
        |c| match m(c) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        Bracket::new(lo, hi)?,
        DEFAULT_TOL,
    );
    match failure {
        Some(e) => Err(e),
        None => r,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TailClass {
    EventuallyMonotone,
    OscillatoryTail,
}

/// Eventually monotone at `+∞` iff the positive-equilibrium characteristic
/// function has a negative zero.
pub fn classify_tail(params: &ModelParams, c: f64) -> Result<TailClass> {
    let report = negative_roots_at_kappa(params, c)?;
    Ok(if report.is_empty() { TailClass::OscillatoryTail } else { TailClass::EventuallyMonotone })
}

/// The speed `c` whose leading-edge decay rate is `beta`: the root in `c`
/// of `β² - cβ - 1 + p e^{-βcτ}`, which decreases strictly in `c`.
pub fn linear_spreading_speed(params: &ModelParams, beta: f64) -> Result<f64> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::Domain(format!("decay rate must be positive, got {beta}")));
    }
    let p = params.p();
    let tau = params.tau();
    let g = |c: f64| beta * beta - c * beta - 1.0 + p * (-beta * c * tau).exp();
    let mut hi = 1.0;
    let mut n = 0;
    while g(hi) > 0.0 {
        hi *= 2.0;
        n += 1;
        if n > 80 {
            return Err(Error::NonBracketing(format!("no spreading speed for beta = {beta}")));
        }
    }
    solve_bracketed(g, Bracket::new(0.0, hi)?, DEFAULT_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex12() -> ModelParams {
        ModelParams::new(365.0, 0.07).unwrap()
    }

    #[test]
    fn value_examples() {
        let p2 = ModelParams::new(2.0, 0.3).unwrap();
        assert_eq!(char_value(CharKind::AtZeroDde, 0.0, &p2, None).unwrap(), -1.0);
        let v = char_value(CharKind::AtKappaDde, 0.0, &ex12(), None).unwrap();
        assert!((v - 365f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn missing_speed() {
        let e = char_value(CharKind::AtKappaProfileC, 0.0, &ex12(), None);
        assert_eq!(e, Err(Error::MissingSpeed(CharKind::AtKappaProfileC)));
    }

    #[test]
    fn mu_examples() {
        assert!((mu_root(&ex12()).unwrap() - 33.64).abs() < 0.01);
        let lin = ModelParams::new(2.0, 0.0).unwrap();
        assert!((mu_root(&lin).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn p_below_e_gives_one_negative_root() {
        let m = ModelParams::new(2.0, 0.2).unwrap();
        for &c in &[0.5, 3.0, 40.0] {
            let r = negative_roots_at_kappa(&m, c).unwrap();
            assert_eq!(r.count(), 1, "c = {c}: {r:?}");
        }
    }

    #[test]
    fn roots_satisfy_residual_bound() {
        let r = negative_roots_at_kappa(&ex12(), 50.0).unwrap();
        assert!(!r.is_empty());
        for root in &r.real_roots {
            let v = char_value(CharKind::AtKappaProfileC, root.z, &ex12(), Some(50.0)).unwrap();
            assert!(v.abs() <= 1e-9 * (1.0 + root.z * root.z));
        }
    }

    #[test]
    fn dde_kappa_roots_match_closed_criterion() {
        for &(p, tau) in &[(365.0, 0.07), (365.0, 0.08), (20.0, 0.2), (20.0, 0.3)] {
            let m = ModelParams::new(p, tau).unwrap();
            let form = CharKind::AtKappaDde.form(&m, None).unwrap();
            let roots = real_roots_in(&form, -1e4, -f64::MIN_POSITIVE).unwrap();
            let crit = m.big_p() * tau * (1.0 + tau).exp() < 1.0;
            assert_eq!(roots.len() == 2, crit, "p={p} tau={tau} {roots:?}");
        }
    }

    #[test]
    fn speeds() {
        assert!((minimal_speed(&ex12()).unwrap() - 7.89).abs() < 0.01);
        for &p in &[2.0, 5.0, 10.0] {
            let m = ModelParams::new(p, 0.0).unwrap();
            assert!((minimal_speed(&m).unwrap() - 2.0 * (p - 1.0f64).sqrt()).abs() < 1e-9);
        }
        assert!((linear_spreading_speed(&ex12(), 0.7).unwrap() - 48.26).abs() < 0.05);
        let m2 = ModelParams::new(2.0, 0.0).unwrap();
        assert!((linear_spreading_speed(&m2, 1.0).unwrap() - 2.0).abs() < 1e-12);
        let m10 = ModelParams::new(10.0, 0.0).unwrap();
        assert!((linear_spreading_speed(&m10, 3.0).unwrap() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn tail_examples() {
        assert_eq!(classify_tail(&ex12(), 50.0).unwrap(), TailClass::EventuallyMonotone);
        let m2 = ModelParams::new(2.0, 0.5).unwrap();
        assert_eq!(classify_tail(&m2, 3.0).unwrap(), TailClass::EventuallyMonotone);
        let m = ModelParams::new(365.0, 0.25).unwrap();
        assert_eq!(classify_tail(&m, 10.0).unwrap(), TailClass::OscillatoryTail);
    }
}
