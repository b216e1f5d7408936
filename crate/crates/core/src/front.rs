//! Front position, speed and profile shape of simulated or integrated
//! solutions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::numerics::linear_fit;
use crate::pde::SpacetimeRecord;

/// First crossing of `level`, scanning in from the low end of the profile,
/// by linear interpolation between grid points.
pub fn front_position(x: &[f64], u: &[f64], level: f64) -> Result<f64> {
    let n = x.len().min(u.len());
    if n < 2 {
        return Err(Error::InsufficientPoints { needed: 2, got: n });
    }
    let from_left = u[0] <= u[n - 1];
    let order: Box<dyn Iterator<Item = usize>> =
        if from_left { Box::new(0..n - 1) } else { Box::new((0..n - 1).rev()) };
    for i in order {
        let (a, b) = (u[i] - level, u[i + 1] - level);
        if a == 0.0 && b == 0.0 {
            continue;
        }
        if (a <= 0.0 && b >= 0.0) || (a >= 0.0 && b <= 0.0) {
            let s = a / (a - b);
            return Ok(x[i] + s * (x[i + 1] - x[i]));
        }
    }
    Err(Error::NoCrossing { level })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Left,
    Right,
    Stationary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedEstimate {
    /// `|dX/dt|`.
    pub speed: f64,
    pub stderr: f64,
    pub direction: Direction,
    pub points: usize,
}

/// Least-squares slope of `X(t)` over the last half of the tracked run.
pub fn estimate_speed(track: &[(f64, f64)]) -> Result<SpeedEstimate> {
    const NEEDED: usize = 5;
    let (Some(first), Some(last)) = (track.first(), track.last()) else {
        return Err(Error::InsufficientPoints { needed: NEEDED, got: 0 });
    };
    let mid = first.0 + 0.5 * (last.0 - first.0);
    let (ts, xs): (Vec<f64>, Vec<f64>) = track.iter().filter(|(t, _)| *t >= mid).copied().unzip();
    if ts.len() < NEEDED {
        return Err(Error::InsufficientPoints { needed: NEEDED, got: ts.len() });
    }
    let fit = linear_fit(&ts, &xs)?;
    let direction = if fit.slope < 0.0 {
        Direction::Left
    } else if fit.slope > 0.0 {
        Direction::Right
    } else {
        Direction::Stationary
    };
    Ok(SpeedEstimate { speed: fit.slope.abs(), stderr: fit.slope_stderr, direction, points: ts.len() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProfileShape {
    Monotone,
    NonMonotoneNonOscillating,
    Oscillating,
    Inconclusive,
}

/// Crossings of `kappa` with a hysteresis band: a new crossing is counted
/// only once the profile has left the band on the other side. Returns the
/// abscissae (interpolated) of the crossings.
pub fn kappa_crossings(profile: &[(f64, f64)], kappa: f64, band: f64) -> Vec<f64> {
    let mut side = 0i8;
    let mut last_outside: Option<usize> = None;
    let mut out = Vec::new();
    for (i, &(_, u)) in profile.iter().enumerate() {
        let s = if u > kappa + band {
            1
        } else if u < kappa - band {
            -1
        } else {
            continue;
        };
        if side != 0 && s != side {
            // locate the actual crossing between the last outside point and i
            let j0 = last_outside.unwrap_or(i.saturating_sub(1));
            let at = (j0..i)
                .find(|&j| (profile[j].1 - kappa) * (profile[j + 1].1 - kappa) <= 0.0)
                .map(|j| {
                    let (x0, u0) = profile[j];
                    let (x1, u1) = profile[j + 1];
                    if u1 == u0 {
                        x0
                    } else {
                        x0 + (kappa - u0) / (u1 - u0) * (x1 - x0)
                    }
                })
                .unwrap_or(profile[i].0);
            out.push(at);
        }
        side = s;
        last_outside = Some(i);
    }
    out
}

fn monotone(values: impl Iterator<Item = f64> + Clone, tol: f64) -> bool {
    let diffs = || {
        let mut prev = None;
        values.clone().filter_map(move |u| {
            let d = prev.map(|p| u - p);
            prev = Some(u);
            d
        })
    };
    diffs().all(|d| d >= -tol) || diffs().all(|d| d <= tol)
}

/// Shape of a profile `(ξ, u)` sorted by `ξ` against `ln p`.
///
/// `crossing_gap` is the minimum admissible separation of consecutive
/// `ln p` crossings (`τ c` in the comoving coordinate, `τ` in time).
pub fn classify_profile(profile: &[(f64, f64)], params: &ModelParams, crossing_gap: f64) -> ProfileShape {
    let n = profile.len();
    if n < 3 {
        return ProfileShape::Inconclusive;
    }
    let kappa = params.kappa();
    let scale = profile.iter().map(|p| p.1.abs()).fold(kappa.abs(), f64::max);
    let tol = 1e-9 * scale;
    if monotone(profile.iter().map(|p| p.1), tol) {
        return ProfileShape::Monotone;
    }
    let crossings = kappa_crossings(profile, kappa, 1e-6 * scale);
    let x_lo = profile[0].0;
    let x_hi = profile[n - 1].0;
    let last_quarter = x_lo + 0.75 * (x_hi - x_lo);
    if crossings.iter().filter(|&&x| x >= last_quarter).count() >= 2 {
        return ProfileShape::Oscillating;
    }
    let peak_above = (1..n - 1).any(|i| {
        let u = profile[i].1;
        u > kappa + tol && u >= profile[i - 1].1 && u >= profile[i + 1].1
    });
    let tail_start = n - 1 - (n - 1) / 4;
    let tail_monotone = monotone(profile[tail_start..].iter().map(|p| p.1), tol);
    let gaps_ok = crossings.windows(2).all(|w| w[1] - w[0] > crossing_gap);
    if peak_above && tail_monotone && gaps_ok {
        ProfileShape::NonMonotoneNonOscillating
    } else {
        ProfileShape::Inconclusive
    }
}

/// Whether `u` increases strictly from the low end up to its first crossing
/// of `kappa`.
pub fn leading_edge_increasing(profile: &[(f64, f64)], kappa: f64) -> bool {
    let end = profile.iter().position(|p| p.1 >= kappa).unwrap_or(profile.len());
    profile[..end].windows(2).all(|w| w[1].1 > w[0].1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontDiagnostics {
    pub speed: SpeedEstimate,
    pub level: f64,
    /// `(ξ, u)` with `ξ = x - X(t)` at the last snapshot.
    pub profile: Vec<(f64, f64)>,
    pub profile_time: f64,
    pub shape: ProfileShape,
    /// `max u - ln p` over the profile.
    pub overshoot: f64,
    pub crossings_of_kappa: usize,
}

/// Diagnostics from a record's per-step front track (or, failing that, from
/// its snapshots) and its last snapshot.
pub fn diagnose(record: &SpacetimeRecord, level: Option<f64>) -> Result<FrontDiagnostics> {
    let cfg = &record.config;
    let level = level.unwrap_or_else(|| cfg.front_level());
    let track: Vec<(f64, f64)> = if level == cfg.front_level() && record.front_track.len() >= 5 {
        record.front_track.clone()
    } else {
        record
            .snapshots
            .iter()
            .filter_map(|s| front_position(&record.x, &s.u, level).ok().map(|x| (s.t, x)))
            .collect()
    };
    let (t, u) = match record.snapshots.last() {
        Some(s) => (s.t, s.u.as_slice()),
        None => (cfg.t_end, record.last()),
    };
    diagnose_parts(&record.x, u, t, &track, &cfg.params, level)
}

/// [`diagnose`] from bare arrays: grid, final state at time `t`, and the
/// front track.
pub fn diagnose_parts(
    x: &[f64],
    u: &[f64],
    t: f64,
    track: &[(f64, f64)],
    params: &ModelParams,
    level: f64,
) -> Result<FrontDiagnostics> {
    let speed = estimate_speed(track)?;
    let pos = front_position(x, u, level)?;
    let mut profile: Vec<(f64, f64)> = x.iter().zip(u).map(|(&xi, &ui)| (xi - pos, ui)).collect();
    if u.first() > u.last() {
        // orient low side first
        profile.reverse();
        for p in &mut profile {
            p.0 = -p.0;
        }
    }
    let kappa = params.kappa();
    let shape = classify_profile(&profile, params, params.tau() * speed.speed);
    let max_u = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scale = max_u.abs().max(kappa);
    let crossings = kappa_crossings(&profile, kappa, 1e-6 * scale).len();
    Ok(FrontDiagnostics {
        speed,
        level,
        profile,
        profile_time: t,
        shape,
        overshoot: max_u - kappa,
        crossings_of_kappa: crossings,
    })
}
