//! `verify` suites: each produces named margins with a pass threshold.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use nw_core::atlas::{lin_grid, log_grid, verify_inclusion};
use nw_core::characteristic::{minimal_speed, zero_profile_minimum};
use nw_core::dirichlet::{coefficients, qbar2_closed, qbar3_closed, zeta, zeta_quadrature, DirichletExpansion};
use nw_core::heteroclinic::j_upper;
use nw_core::{ModelParams, Result};

use crate::args::Suite;
use crate::commands::mu_residual;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">")]
    Above,
    #[serde(rename = ">=")]
    AtLeast,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub check: String,
    pub value: f64,
    pub relation: Relation,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    fn new(check: impl Into<String>, value: f64, relation: Relation, threshold: f64) -> Self {
        let passed = match relation {
            Relation::AtMost => value <= threshold,
            Relation::Above => value > threshold,
            Relation::AtLeast => value >= threshold,
        };
        Check { check: check.into(), value, relation, threshold, passed }
    }

    fn flag(check: impl Into<String>, ok: bool) -> Self {
        Check::new(check, if ok { 1.0 } else { 0.0 }, Relation::AtLeast, 1.0)
    }
}

pub fn default_grid(suite: Suite) -> usize {
    match suite {
        Suite::Appendix => 200,
        Suite::Series | Suite::Model => 12,
    }
}

pub fn run(suite: Suite, grid: usize) -> Result<Vec<Check>> {
    match suite {
        Suite::Appendix => inclusion(grid),
        Suite::Series => series(grid),
        Suite::Model => model(grid),
    }
}

fn inclusion(n: usize) -> Result<Vec<Check>> {
    let ps = [1.1, 2.0, 4.8999, 10.0];
    let r = verify_inclusion(&ps, &log_grid(0.01, 1e3, n), &log_grid(1e-3, 10.0, n), &log_grid(0.01, 1e3, n))?;
    let mut out = vec![
        Check::new("boundary_points", r.boundary_points as f64, Relation::AtLeast, 1.0),
        Check::new("boundary_violations", r.boundary_violations.len() as f64, Relation::AtMost, 0.0),
        Check::new("min_inclusion_margin", r.min_margin, Relation::Above, 0.0),
        Check::new("min_relative_inclusion_margin", r.min_relative_margin, Relation::Above, 0.0),
    ];
    for a in &r.asymptotes {
        let gap = (a.tau_of_c - a.tau_hat).abs().max((a.t_of_c - a.t_star).abs());
        out.push(Check::new(format!("asymptote_gap_P={}", a.big_p), gap, Relation::AtMost, 1e-3));
    }
    out.push(Check::flag("a_k_positive", r.a_k_positive));
    out.push(Check::flag("discriminant_negative", r.discriminant_negative));
    out.push(Check::new("min_a_w_sigma", r.min_a_w_sigma, Relation::Above, 0.0));
    out.push(Check::new("a_series_gap", r.a_series_gap, Relation::AtMost, 1e-8));
    Ok(out)
}

/// Parameters with `p > e²` and `Pτe^{1+τ} < 1`.
fn admissible(n: usize) -> Result<Vec<ModelParams>> {
    let mut out = Vec::new();
    for p in log_grid(10.0, 2000.0, n) {
        for tau in lin_grid(0.01, 0.25, n) {
            let m = ModelParams::new(p, tau)?;
            if m.big_p() * tau * (1.0 + tau).exp() < 1.0 {
                out.push(m);
            }
        }
    }
    Ok(out)
}

#[derive(Default)]
struct SeriesMargins {
    qbar2_gap: f64,
    qbar3_gap: f64,
    zeta_gap: f64,
    sign_failures: usize,
    bound_margin: f64,
}

fn series(n: usize) -> Result<Vec<Check>> {
    let cells = admissible(n)?;
    let per_cell = cells
        .par_iter()
        .map(|m| {
            let (mu, q) = coefficients(m, 30)?;
            let q2 = qbar2_closed(m, mu)?;
            let q3 = qbar3_closed(m, mu)?;
            let z = zeta(m)?;
            let zq = zeta_quadrature(m, 1e-12)?;
            let sign_failures =
                q.iter().enumerate().filter(|&(i, v)| if i % 2 == 0 { *v <= 0.0 } else { *v >= 0.0 }).count();
            let e = DirichletExpansion::new(*m, 30)?;
            let mut bound_margin = f64::INFINITY;
            for i in 0..=20 {
                let t = e.handoff_time() - 5.0 / mu * i as f64 / 20.0;
                let v = e.evaluate(t)?.value;
                let hi = e.u1(t);
                bound_margin = bound_margin.min((v - e.u2(t)).min(hi - v) / hi);
            }
            Ok(SeriesMargins {
                qbar2_gap: (q[1] - q2).abs() / q2.abs(),
                qbar3_gap: (q[2] - q3).abs() / q3.abs(),
                zeta_gap: (z - zq).abs() / z.abs(),
                sign_failures,
                bound_margin,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max = |f: fn(&SeriesMargins) -> f64| per_cell.iter().map(f).fold(0.0, f64::max);
    Ok(vec![
        Check::new("admissible_cells", cells.len() as f64, Relation::AtLeast, 1.0),
        Check::new("qbar2_relative_gap", max(|s| s.qbar2_gap), Relation::AtMost, 1e-12),
        Check::new("qbar3_relative_gap", max(|s| s.qbar3_gap), Relation::AtMost, 1e-11),
        Check::new("zeta_route_relative_gap", max(|s| s.zeta_gap), Relation::AtMost, 1e-8),
        Check::new(
            "sign_alternation_failures",
            per_cell.iter().map(|s| s.sign_failures).sum::<usize>() as f64,
            Relation::AtMost,
            0.0,
        ),
        Check::new(
            "min_relative_bound_margin",
            per_cell.iter().map(|s| s.bound_margin).fold(f64::INFINITY, f64::min),
            Relation::AtLeast,
            -1e-14,
        ),
    ])
}

fn model(n: usize) -> Result<Vec<Check>> {
    let ps = log_grid(1.5, 1e4, n);
    let taus = lin_grid(0.01, 1.0, n);
    let us: Vec<f64> = log_grid(1e-3, 30.0, 4 * n).into_iter().filter(|u| (u - 1.0).abs() > 1e-6).collect();
    let mut schwarz_max = f64::NEG_INFINITY;
    for &p in &ps {
        let m = ModelParams::new(p, 0.1)?;
        for &u in &us {
            schwarz_max = schwarz_max.max(m.schwarz(u)?);
        }
    }
    let cells: Vec<ModelParams> =
        ps.iter().flat_map(|&p| taus.iter().map(move |&t| ModelParams::new(p, t))).collect::<Result<_>>()?;
    let per_cell = cells
        .par_iter()
        .map(|m| {
            let res = mu_residual(m)?;
            // the zero-profile minimum changes sign at c_*
            let c = minimal_speed(m)?;
            let below = zero_profile_minimum(m, c * (1.0 - 1e-6))?.0;
            let above = zero_profile_minimum(m, c * (1.0 + 1e-6))?.0;
            Ok((res, !(below > 0.0 && above <= 0.0)))
        })
        .collect::<Result<Vec<_>>>()?;
    let j_residual = taus
        .iter()
        .map(|&t| ((j_upper(t).ln() - 1.0) * t * (1.0 + t).exp() - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(vec![
        Check::new("schwarz_max", schwarz_max, Relation::AtMost, 0.0),
        Check::new("mu_relative_residual", per_cell.iter().map(|r| r.0).fold(0.0, f64::max), Relation::AtMost, 1e-12),
        Check::new(
            "c_star_bracket_failures",
            per_cell.iter().filter(|r| r.1).count() as f64,
            Relation::AtMost,
            0.0,
        ),
        Check::new("j_bound_residual", j_residual, Relation::AtMost, 1e-12),
    ])
}

pub fn write_margins<W: Write>(w: W, checks: &[Check]) -> std::io::Result<()> {
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    out.write_record(["check", "value", "relation", "threshold", "passed"])?;
    for c in checks {
        let rel = match c.relation {
            Relation::AtMost => "<=",
            Relation::Above => ">",
            Relation::AtLeast => ">=",
        };
        out.write_record([
            c.check.clone(),
            c.value.to_string(),
            rel.to_string(),
            c.threshold.to_string(),
            c.passed.to_string(),
        ])?;
    }
    out.flush()
}
