//! Checks against independently computed references.

use std::f64::consts::E;

use nw_core::atlas::{figure2_grid, log_grid, nm_necessary, t_of_c, t_star};
use nw_core::characteristic::{
    linear_spreading_speed, minimal_speed, mu_root, negative_roots_at_kappa, real_roots_in, CharKind,
};
use nw_core::dirichlet::{coefficients, zeta, zeta_quadrature, DirichletExpansion};
use nw_core::front::{diagnose, front_position, leading_edge_increasing};
use nw_core::heteroclinic::{crossings, integrate, TailShape};
use nw_core::numerics::{integrate_adaptive, lower_incomplete_gamma};
use nw_core::pde::{preset, simulate, Scheme, SimConfig};
use nw_core::ModelParams;

fn example() -> ModelParams {
    ModelParams::new(365.0, 0.07).unwrap()
}

/// All compositions of `n` into `k` positive parts.
fn compositions(n: usize, k: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if k == 0 {
        if n == 0 {
            out.push(prefix.clone());
        }
        return;
    }
    for first in 1..=n.saturating_sub(k - 1) {
        prefix.push(first);
        compositions(n - first, k - 1, prefix, out);
        prefix.pop();
    }
}

#[test]
fn coefficients_match_the_multinomial_sum() {
    // χ(nμ) q̄_n = p Σ_{k>=2} (-1)^{k-1}/(k-1)! Σ_{i_1+..+i_k = n} v_{i_1}..v_{i_k},
    // v_j = q̄_j e^{-jμτ}: [v e^{-v} - v]_n expanded term by term
    let m = example();
    let (mu, q) = coefficients(&m, 6).unwrap();
    let v = |j: usize| q[j - 1] * (-(j as f64) * mu * m.tau()).exp();
    for n in 2..=6 {
        let mut rhs = 0.0;
        let mut fact = 1.0;
        for k in 2..=n {
            fact *= (k - 1) as f64;
            let mut comps = Vec::new();
            compositions(n, k, &mut Vec::new(), &mut comps);
            let s: f64 = comps.iter().map(|c| c.iter().map(|&j| v(j)).product::<f64>()).sum();
            rhs += (-1f64).powi(k as i32 - 1) / fact * s;
        }
        let chi = n as f64 * mu + 1.0 - m.p() * (-(n as f64) * mu * m.tau()).exp();
        let want = m.p() * rhs / chi;
        assert!((q[n - 1] - want).abs() <= 1e-13 * want.abs().max(1e-300), "n = {n}: {} vs {want}", q[n - 1]);
    }
}

#[test]
fn series_agrees_with_forward_integration() {
    // Heun with grid-aligned delays from t = -0.4 to -0.2, history from the
    // series on [-0.4 - τ, -0.4]; Richardson-extrapolated
    let s = DirichletExpansion::new(example(), 40).unwrap();
    let tau = s.params.tau();
    let run = |k: usize| {
        let h = tau / k as f64;
        let t0 = -0.4;
        let n = (0.2 / h).round() as usize;
        let mut u: Vec<f64> = (0..=k).map(|i| s.evaluate(t0 - tau + i as f64 * h).unwrap().value).collect();
        for j in 0..n {
            let y = u[k + j];
            let (d0, d1) = (u[j], u[j + 1]);
            let f0 = -y + s.params.f(d0);
            let pred = y + h * f0;
            let f1 = -pred + s.params.f(d1);
            u.push(y + 0.5 * h * (f0 + f1));
        }
        *u.last().unwrap()
    };
    let (a, b) = (run(3500), run(7000));
    let extrapolated = b + (b - a) / 3.0;
    let series = s.evaluate(-0.2).unwrap().value;
    assert!((extrapolated - series).abs() < 1e-8, "{extrapolated} vs {series}");
}

#[test]
fn series_defect_is_below_the_truncation() {
    let s = DirichletExpansion::new(example(), 40).unwrap();
    let tau = s.params.tau();
    let t_hi = s.horizon - 0.5 / s.mu;
    for i in 0..200 {
        let t = -1.0 + (t_hi + 1.0) * i as f64 / 199.0;
        let u = s.evaluate(t).unwrap();
        let du = s.derivative(t).unwrap();
        let delayed = s.evaluate(t - tau).unwrap();
        let residual = (du.value + u.value - s.params.f(delayed.value)).abs();
        let floor = 64.0 * f64::EPSILON * (du.value.abs() + u.value.abs() + s.params.f(delayed.value).abs());
        assert!(residual <= 10.0 * (u.tail_estimate + du.tail_estimate) + floor, "t = {t}: {residual:e}");
    }
}

#[test]
fn unnormalized_coefficients_respect_the_contour_bound() {
    for (p, tau) in [(365.0, 0.07), (50.0, 0.1), (20.0, 0.2), (1000.0, 0.05)] {
        let s = DirichletExpansion::new(ModelParams::new(p, tau).unwrap(), 40).unwrap();
        let (sigma, q) = s.unnormalized();
        assert!(q.iter().all(|v| v.abs() <= sigma * (1.0 + 1e-12)), "p = {p}, tau = {tau}");
    }
}

#[test]
fn signs_alternate_on_admissible_parameters() {
    for p in [10.0, 30.0, 100.0, 365.0, 1000.0] {
        for tau in [0.02, 0.05, 0.1, 0.2] {
            let m = ModelParams::new(p, tau).unwrap();
            let n = nm_necessary(&m).unwrap();
            if !(n.p_above_e2 && n.delay_product < 1.0) {
                continue;
            }
            let (_, q) = coefficients(&m, 30).unwrap();
            for (i, v) in q.iter().enumerate() {
                assert!(if i % 2 == 0 { *v > 0.0 } else { *v < 0.0 }, "p = {p}, tau = {tau}, n = {}", i + 1);
            }
        }
    }
}

#[test]
fn zeta_two_routes_on_the_overshoot_region() {
    for (p, tau) in [(365.0, 0.07), (200.0, 0.08), (1000.0, 0.06), (100.0, 0.1), (50.0, 0.12)] {
        let m = ModelParams::new(p, tau).unwrap();
        let a = zeta(&m).unwrap();
        let b = zeta_quadrature(&m, 1e-13).unwrap();
        assert!((a - b).abs() < 1e-10, "p = {p}, tau = {tau}: {a} vs {b}");
    }
}

#[test]
fn incomplete_gamma_by_substituted_quadrature() {
    // γ(s, z) = ∫_0^z t^{s-1} e^{-t} dt; with t = u^m, m = 4/s, the integrand
    // becomes m u³ e^{-u^m}, which is C³ at the origin
    for (z, s) in [(1.0, 1.03), (0.1, 1.03), (1.0, 2.03), (0.5, 2.5), (3.0, 1.5)] {
        let m = 4.0 / s;
        let q = integrate_adaptive(|u: f64| m * u.powi(3) * (-u.powf(m)).exp(), 0.0, f64::powf(z, 1.0 / m), 1e-14)
            .unwrap();
        let g = lower_incomplete_gamma(z, s).unwrap();
        assert!((q - g).abs() < 1e-11, "z = {z}, s = {s}: {q} vs {g}");
    }
}

#[test]
fn t_star_by_fixed_point() {
    for bp in [0.5, 1.1, 4.8999, 10.0] {
        let mut t: f64 = 0.1;
        for _ in 0..200 {
            t = (-t).exp() / (bp * E);
        }
        assert!((t_star(bp).unwrap() - t).abs() < 1e-12);
    }
}

#[test]
fn minimal_speed_by_scanning() {
    let m = example();
    let scan_min = |c: f64| {
        (1..200_000)
            .map(|i| i as f64 * 1e-4)
            .map(|z| z * z - c * z - 1.0 + m.p() * (-z * c * m.tau()).exp())
            .fold(f64::INFINITY, f64::min)
    };
    let c = minimal_speed(&m).unwrap();
    assert!(scan_min(c - 1e-3) > 0.0);
    assert!(scan_min(c + 1e-3) < 0.0);
}

#[test]
fn spreading_speed_closed_form() {
    // β² - cβ - 1 + p e^{-βcτ} = 0 at the returned c
    let m = example();
    let c = linear_spreading_speed(&m, 0.7).unwrap();
    let g = 0.49 - 0.7 * c - 1.0 + m.p() * (-0.7 * c * m.tau()).exp();
    assert!(g.abs() < 1e-10 && (c - 48.26).abs() < 0.05);
}

#[test]
fn negative_roots_by_sign_scan() {
    // χ₊ → -∞ at both ends of z < 0 (χ₊(0) = -1 - P), so real negative roots
    // exist iff its maximum there is >= 0: scan, then golden-section refine
    let m = ModelParams::new(365.0, 0.07).unwrap();
    for c in log_grid(0.2, 200.0, 40) {
        let t = t_of_c(m.big_p(), c).unwrap();
        if (t - m.tau()).abs() < 1e-6 * t {
            continue;
        }
        let form = CharKind::AtKappaProfileC.form(&m, Some(c)).unwrap();
        let lo = -(1.0 + c * c) * 3.0;
        let n = 20_000;
        let z_at = |i: usize| lo + (0.0 - lo) * i as f64 / n as f64;
        let best = (0..=n).max_by(|&i, &j| form.value(z_at(i)).total_cmp(&form.value(z_at(j)))).unwrap();
        let (mut a, mut b) = (z_at(best.saturating_sub(1)), z_at((best + 1).min(n)));
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..200 {
            let (x1, x2) = (b - g * (b - a), a + g * (b - a));
            if form.value(x1) < form.value(x2) {
                a = x1;
            } else {
                b = x2;
            }
        }
        let peak = form.value(0.5 * (a + b));
        let found = negative_roots_at_kappa(&m, c).unwrap().count();
        assert_eq!(peak >= 0.0, found > 0, "c = {c}: peak {peak:e}, structured {found}");
    }
}

#[test]
fn root_finder_on_a_known_cubic_like_form() {
    // z² - 3z + 2 (k = 0): roots 1 and 2
    let form = CharKind::AtKappaProfileC.form(&ModelParams::new(E, 0.1).unwrap(), Some(3.0)).unwrap();
    let roots = real_roots_in(&form, -10.0, 10.0).unwrap();
    let zs: Vec<f64> = roots.iter().map(|r| r.z).collect();
    // P = 0 here: z² - 3z - 1 has roots (3 ± √13)/2
    let want = [(3.0 - 13f64.sqrt()) / 2.0, (3.0 + 13f64.sqrt()) / 2.0];
    assert_eq!(zs.len(), 2);
    for (a, b) in zs.iter().zip(want) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn mu_grows_with_p() {
    let a = mu_root(&ModelParams::new(100.0, 0.07).unwrap()).unwrap();
    let b = mu_root(&example()).unwrap();
    assert!(a < b);
}

#[test]
fn monotone_connection_below_e() {
    let m = ModelParams::new(2.0, 0.1).unwrap();
    let s = DirichletExpansion::new(m, 40).unwrap();
    let traj = integrate(&s, 20.0, 64).unwrap();
    let rep = crossings(&traj, m.kappa(), m.tau()).unwrap();
    assert_eq!(rep.count(), 0);
    assert_eq!(rep.first_max, None);
    assert_eq!(rep.tail_class, TailShape::MonotoneTail);
    assert!(traj.du.iter().skip(1).all(|&d| d > 0.0));
}

#[test]
fn overshoot_connection_shape() {
    let m = example();
    let s = DirichletExpansion::new(m, 40).unwrap();
    let traj = integrate(&s, 2.0, 64).unwrap();
    assert!(traj.u.iter().all(|&u| u > 0.0));
    let rep = crossings(&traj, m.kappa(), m.tau()).unwrap();
    let c0 = rep.crossings[0];
    assert!(c0.slope > 0.0);
    let (t_max, u_max) = rep.first_max.unwrap();
    assert!(t_max > c0.t && u_max > zeta(&m).unwrap());
    // value at τ exceeds ζ in the series time frame
    assert!(traj.value_at(m.tau()).unwrap() > zeta(&m).unwrap());
    // below the pure exponential wherever that is still representable
    for (t, u) in traj.t.iter().zip(&traj.u) {
        let bound = (s.mu * t).exp();
        if bound < 1e6 {
            assert!(*u < bound, "t = {t}");
        }
    }
}

#[test]
fn region_map_is_nonempty_and_inside_the_necessary_region() {
    let cells = figure2_grid((0.05, 0.08), (E * E * 1.0001, 5000.0), (100, 100)).unwrap();
    assert!(cells.iter().any(|c| c.flag));
    for c in cells.iter().filter(|c| c.flag) {
        let n = nm_necessary(&ModelParams::new(c.p, c.tau).unwrap()).unwrap();
        assert!(n.p_above_e2 && n.delay_product < 1.0, "{c:?}");
    }
}

#[test]
fn fast_front_moves_left_at_the_expected_rate() {
    let rec = simulate(&preset("fig4").unwrap()).unwrap();
    let level = rec.config.front_level();
    let at = |t: f64| {
        let s = rec.snapshots.iter().find(|s| (s.t - t).abs() < 1e-9).unwrap();
        front_position(&rec.x, &s.u, level).unwrap()
    };
    let shift = at(2.0) - at(1.0);
    assert!((-54.0..=-46.0).contains(&shift), "{shift}");
    let upper = 365.0 / E + 0.1;
    for s in &rec.snapshots {
        assert!(s.u.iter().all(|&u| (-1e-8..=upper).contains(&u)));
    }
}

#[test]
fn schemes_agree_on_the_fast_front() {
    let cn = diagnose(&simulate(&preset("fig4").unwrap()).unwrap(), None).unwrap().speed.speed;
    let mol_cfg = SimConfig { scheme: Scheme::MethodOfLines, dt: 0.001, ..preset("fig4").unwrap() };
    let mol = diagnose(&simulate(&mol_cfg).unwrap(), None).unwrap().speed.speed;
    assert!((cn - mol).abs() <= 0.01 * cn, "CN {cn} vs MoL {mol}");
}

#[test]
fn minimal_front_leading_edge_rises_to_its_first_crossing() {
    let cfg = SimConfig { domain: [-200.0, 200.0], ..preset("fig3").unwrap() };
    let rec = simulate(&cfg).unwrap();
    let d = diagnose(&rec, None).unwrap();
    // from where the front has actually arrived (above roundoff), strictly increasing
    let start = d.profile.iter().position(|p| p.1 > 1e-8).unwrap();
    assert!(leading_edge_increasing(&d.profile[start..], rec.config.params.kappa()));
    for s in &rec.snapshots {
        assert!(s.u.iter().all(|&u| (-1e-8..=365.0 / E + 0.1).contains(&u)));
    }
}
