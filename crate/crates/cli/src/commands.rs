use std::fs::File;
use std::io::{BufReader, Write};

use serde_json::{json, Value};

use nw_core::atlas::{figure2_grid, log_grid, proposition_main_hypotheses, region_report, t_of_c, t_star, tau_hat, tau_of_c};
use nw_core::characteristic::{classify_tail, minimal_speed, mu_root};
use nw_core::dirichlet::{qbar3_closed, DirichletExpansion, DEFAULT_TERMS};
use nw_core::front::{diagnose, diagnose_parts, front_position, FrontDiagnostics};
use nw_core::heteroclinic::{default_t_end, integrate_classified, theorem1_verdict, TailShape};
use nw_core::pde::{preset, simulate as run_simulation};
use nw_core::{io, Error, ModelParams, SimConfig};

use crate::args;
use crate::output::{create, out_path, sibling, to_json, with_units, write_json, CliResult, Manifest};

fn params(p: &args::Params) -> CliResult<ModelParams> {
    Ok(ModelParams::new(p.p, p.tau)?)
}

fn tail_label(t: Option<TailShape>) -> &'static str {
    match t {
        Some(TailShape::MonotoneTail) => "monotone",
        Some(TailShape::Oscillating) => "oscillating",
        None => "inconclusive",
    }
}

fn finish(manifest: &mut Manifest, outs: &[std::path::PathBuf]) -> CliResult<()> {
    manifest.write(&sibling(&outs[0], "manifest.json"))
}

pub fn analyze(a: &args::Analyze) -> CliResult<()> {
    let mut manifest = Manifest::start("analyze");
    let m = params(&a.params)?;
    manifest.config = json!({ "p": m.p(), "tau": m.tau(), "c": a.c });
    let series = DirichletExpansion::new(m, DEFAULT_TERMS)?;
    let region = region_report(&m, a.c)?;
    let (verdict, tail_error) = match theorem1_verdict(&m, true) {
        Ok(v) => (v, None),
        Err(e) => (theorem1_verdict(&m, false)?, Some(e.to_string())),
    };
    let mut r = json!({
        "p": m.p(),
        "tau": m.tau(),
        "lnp": m.kappa(),
        "big_p": m.big_p(),
        "mu": series.mu,
        "qbar2": series.qbar2(),
        "qbar3": qbar3_closed(&m, series.mu)?,
        "series_eps": series.eps,
        "series_horizon": series.horizon,
        "handoff_time": series.handoff_time(),
        "zeta": verdict.zeta,
        "zeta_gt_lnp": verdict.zeta_exceeds_kappa,
        "in_j": verdict.in_j,
        "j_upper": verdict.j_upper,
        "theorem1": verdict.verdict,
        "tail": tail_label(verdict.tail),
        "max_u": verdict.max_u,
        "c_star": minimal_speed(&m)?,
        "nm_necessary": region.nm_necessary,
        "gsc": region.gsc,
        "feedback": m.feedback_holds(),
        "tau_star": region.tau_star,
        "tau_hat": region.tau_hat,
        "t_star": region.t_star,
    });
    if let Some(e) = tail_error {
        r["tail_error"] = json!(e);
    }
    if let Some(c) = a.c {
        r["c"] = json!(c);
        r["classify_tail"] = json!(classify_tail(&m, c)?);
        r["membership"] = json!({
            "in_dm": region.in_dm,
            "in_ds": region.in_ds,
            "t_of_c": region.t_c,
            "tau_of_c": region.tau_c,
            "ds_by_convention": region.ds_by_convention,
        });
        r["hypotheses"] = serde_json::to_value(proposition_main_hypotheses(&m, c)?)?;
    }
    let units = json!({
        "p": "dimensionless", "tau": "time", "lnp": "population", "big_p": "dimensionless",
        "mu": "1/time", "qbar2": "dimensionless", "qbar3": "dimensionless", "series_eps": "dimensionless",
        "series_horizon": "time (normalised clock, u ~ e^{mu t} as t -> -inf)",
        "handoff_time": "time (normalised clock)", "zeta": "population", "j_upper": "dimensionless (bound on p)",
        "max_u": "population", "c_star": "space/time", "c": "space/time",
        "tau_star": "time", "tau_hat": "time", "t_star": "time",
        "membership.t_of_c": "time", "membership.tau_of_c": "time",
    });
    let text = to_json(&with_units(r, units))?;
    print!("{text}");
    if let Some(path) = a.out.first() {
        create(path)?.write_all(text.as_bytes())?;
        manifest.record(path);
        finish(&mut manifest, &a.out)?;
    }
    Ok(())
}

pub fn series(s: &args::Series) -> CliResult<()> {
    let mut manifest = Manifest::start("series");
    let m = params(&s.params)?;
    let e = match s.eps {
        Some(eps) => DirichletExpansion::with_eps(m, s.n, eps)?,
        None => DirichletExpansion::new(m, s.n)?,
    };
    manifest.config = json!({ "p": m.p(), "tau": m.tau(), "n": s.n, "eps": e.eps });
    let coeffs = out_path(&s.out, 0, "coeffs.csv");
    io::write_coefficients(create(&coeffs)?, &e)?;
    manifest.record(&coeffs);
    // 401 points over ten e-folds of e^{μt}, ending just short of the horizon
    let hi = e.horizon - 1e-9 * (1.0 + e.horizon.abs());
    let ts: Vec<f64> = (0..=400).map(|i| hi - 10.0 / e.mu * (1.0 - i as f64 / 400.0)).collect();
    let profile = out_path(&s.out, 1, "profile.csv");
    io::write_series_profile(create(&profile)?, &e, &ts)?;
    manifest.record(&profile);
    let summary = json!({
        "mu": e.mu, "eps": e.eps, "horizon": e.horizon, "handoff_time": e.handoff_time(),
        "n_terms": e.n_terms(), "qbar2": e.qbar2(),
    });
    print!("{}", to_json(&summary)?);
    manifest.extra = Some(summary);
    finish(&mut manifest, &s.out)
}

pub fn heteroclinic(h: &args::Heteroclinic) -> CliResult<()> {
    let mut manifest = Manifest::start("heteroclinic");
    let m = params(&h.params)?;
    let e = DirichletExpansion::new(m, DEFAULT_TERMS)?;
    let requested = h.t_end.unwrap_or_else(|| default_t_end(&e));
    let (traj, report, doublings) = integrate_classified(&e, requested, h.k)?;
    let t_end = traj.t_end();
    manifest.config = json!({ "p": m.p(), "tau": m.tau(), "k": h.k, "t_end": t_end, "n_terms": DEFAULT_TERMS });
    let traj_path = out_path(&h.out, 0, "traj.csv");
    io::write_trajectory(create(&traj_path)?, &traj)?;
    manifest.record(&traj_path);

    let mut r = serde_json::to_value(&report)?;
    r["count"] = json!(report.count());
    r["t0"] = json!(traj.t0);
    r["t_end"] = json!(t_end);
    r["doublings"] = json!(doublings);
    r["steps_per_delay"] = json!(h.k);
    r["series"] = serde_json::to_value(traj.provenance)?;
    let units = json!({
        "level": "population", "crossings.t": "time (normalised clock)", "crossings.slope": "population/time",
        "gaps": "time", "first_max": "[time, population]", "global_max": "population",
        "t0": "time", "t_end": "time", "series.mu": "1/time", "series.horizon": "time",
    });
    let cross_path = out_path(&h.out, 1, "crossings.json");
    let v = with_units(r, units);
    write_json(&cross_path, &v)?;
    manifest.record(&cross_path);
    print!("{}", to_json(&json!({
        "crossings": report.count(), "tail": tail_label(Some(report.tail_class)),
        "global_max": report.global_max, "t_end": t_end,
    }))?);
    finish(&mut manifest, &h.out)
}

pub fn atlas(a: &args::Atlas) -> CliResult<()> {
    let mut manifest = Manifest::start("atlas");
    manifest.config = json!({
        "tau": [a.tau.lo, a.tau.hi, a.tau.n], "p": [a.p.lo, a.p.hi, a.p.n],
    });
    let cells = figure2_grid((a.tau.lo, a.tau.hi), (a.p.lo, a.p.hi), (a.tau.n, a.p.n))?;
    let path = out_path(&a.out, 0, "fig2.csv");
    io::write_region_map(create(&path)?, &cells)?;
    manifest.record(&path);
    let flagged = cells.iter().filter(|c| c.flag).count();
    print!("{}", to_json(&json!({ "cells": cells.len(), "flagged": flagged }))?);
    finish(&mut manifest, &a.out)
}

pub fn boundaries(b: &args::Boundaries) -> CliResult<()> {
    let mut manifest = Manifest::start("boundaries");
    manifest.config = json!({ "big_p": b.big_p, "c": [b.c.lo, b.c.hi, b.c.n] });
    if !(b.c.lo > 0.0) {
        return Err(Error::Domain(format!("speeds must be positive, got {}", b.c.lo)).into());
    }
    let th = tau_hat(b.big_p).unwrap_or(f64::NAN);
    let ts = t_star(b.big_p).unwrap_or(f64::NAN);
    let rows = log_grid(b.c.lo, b.c.hi, b.c.n)
        .into_iter()
        .map(|c| {
            let t = t_of_c(b.big_p, c)?;
            let tc = if b.big_p > 1.0 { tau_of_c(b.big_p, c)? } else { f64::NAN };
            Ok(vec![c, t, tc, th, ts])
        })
        .collect::<nw_core::Result<Vec<_>>>()?;
    let path = out_path(&b.out, 0, "curves.csv");
    io::write_table(create(&path)?, &["c", "T_c", "tau_c", "tau_hat", "T_star"], rows)?;
    manifest.record(&path);
    print!("{}", to_json(&json!({ "tau_hat": th, "t_star": ts, "rows": b.c.n }))?);
    finish(&mut manifest, &b.out)
}

fn diagnostics_json(d: &FrontDiagnostics) -> Value {
    json!({
        "speed": d.speed.speed,
        "speed_stderr": d.speed.stderr,
        "direction": d.speed.direction,
        "fit_points": d.speed.points,
        "level": d.level,
        "profile_time": d.profile_time,
        "profile_points": d.profile.len(),
        "shape": d.shape,
        "overshoot": d.overshoot,
        "crossings_of_kappa": d.crossings_of_kappa,
    })
}

fn diagnostics_units() -> Value {
    json!({
        "speed": "space/time", "speed_stderr": "space/time", "level": "population",
        "profile_time": "time", "overshoot": "population (max u - ln p)",
    })
}

pub fn simulate(s: &args::Simulate) -> CliResult<()> {
    let mut manifest = Manifest::start("simulate");
    let config: SimConfig = match (&s.preset, &s.config) {
        (Some(name), _) => preset(name)?,
        (None, Some(path)) => {
            let cfg: SimConfig = serde_json::from_reader(BufReader::new(File::open(path)?))
                .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
            cfg.normalized()?
        }
        (None, None) => unreachable!("clap requires one source"),
    };
    manifest.config = serde_json::to_value(&config)?;
    let record = run_simulation(&config)?;
    let snaps = out_path(&s.out, 0, "snaps.csv");
    io::write_snapshots(create(&snaps)?, &record.x, &record.snapshots)?;
    manifest.record(&snaps);
    let front = out_path(&s.out, 1, "front.csv");
    io::write_front_track(create(&front)?, &record.front_track)?;
    manifest.record(&front);
    let results = match diagnose(&record, None) {
        Ok(d) => with_units(diagnostics_json(&d), diagnostics_units()),
        Err(e) => json!({ "diagnostics_error": e.to_string() }),
    };
    print!("{}", to_json(&results)?);
    manifest.extra = Some(results);
    let meta = out_path(&s.out, 2, "meta.json");
    manifest.write(&meta)
}

pub fn diagnose_file(d: &args::Diagnose) -> CliResult<()> {
    let mut manifest = Manifest::start("diagnose");
    let m = params(&d.params)?;
    let level = d.level.unwrap_or(0.5 * m.kappa());
    manifest.config = json!({ "in": d.input.display().to_string(), "p": m.p(), "tau": m.tau(), "level": level });
    let (x, snaps) = io::read_snapshots(BufReader::new(File::open(&d.input)?))?;
    let last = snaps.last().ok_or(Error::InsufficientPoints { needed: 1, got: 0 })?;
    let track: Vec<(f64, f64)> =
        snaps.iter().filter_map(|s| front_position(&x, &s.u, level).ok().map(|p| (s.t, p))).collect();
    let diag = diagnose_parts(&x, &last.u, last.t, &track, &m, level)?;
    let v = with_units(diagnostics_json(&diag), diagnostics_units());
    let path = out_path(&d.out, 0, "diag.json");
    write_json(&path, &v)?;
    manifest.record(&path);
    if let Some(profile) = d.out.get(1) {
        io::write_profile(create(profile)?, &diag.profile)?;
        manifest.record(profile);
    }
    print!("{}", to_json(&v)?);
    finish(&mut manifest, &d.out)
}

/// Positive-root residual of `μ + 1 - p e^{-μτ}`, relative to `p`.
pub fn mu_residual(m: &ModelParams) -> nw_core::Result<f64> {
    let mu = mu_root(m)?;
    Ok((mu + 1.0 - m.p() * (-mu * m.tau()).exp()).abs() / m.p())
}
