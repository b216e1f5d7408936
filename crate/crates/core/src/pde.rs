//! `u_t = u_xx - u + p u(t-τ,x) e^{-u(t-τ,x)}` on an interval with Dirichlet
//! ends: an explicit method-of-lines scheme and a Crank–Nicolson scheme with
//! a lagged delay term.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::front::front_position;
use crate::model::ModelParams;

/// Safety factor on the explicit diffusion limit `dx²/2`.
pub const CFL_SAFETY: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    /// Central differences in space, explicit midpoint in time.
    MethodOfLines,
    /// Trapezoidal in `u_xx - u`, delayed birth term averaged over the two
    /// stored levels it needs.
    CrankNicolson,
}

/// Initial state, held constant on `[-τ, 0]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum InitialCondition {
    /// `level` for `x >= 0`, `0` otherwise; `level` defaults to `ln p`.
    Heaviside { level: Option<f64> },
    /// `e^{βx}` for `x < 0`, `cap` (default `ln p`) for `x >= 0`.
    ExpTail { beta: f64, cap: Option<f64> },
    /// `level / (1 + e^{-x/width})`.
    Logistic { level: f64, width: f64 },
    Constant { value: f64 },
}

impl InitialCondition {
    pub fn eval(&self, x: f64, params: &ModelParams) -> f64 {
        match *self {
            InitialCondition::Heaviside { level } => {
                if x >= 0.0 {
                    level.unwrap_or_else(|| params.kappa())
                } else {
                    0.0
                }
            }
            InitialCondition::ExpTail { beta, cap } => {
                if x < 0.0 {
                    (beta * x).exp()
                } else {
                    cap.unwrap_or_else(|| params.kappa())
                }
            }
            InitialCondition::Logistic { level, width } => level / (1.0 + (-x / width).exp()),
            InitialCondition::Constant { value } => value,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum BoundaryCondition {
    Dirichlet { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub params: ModelParams,
    pub domain: [f64; 2],
    pub dx: f64,
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub ic: InitialCondition,
    pub bc: BoundaryCondition,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    /// Level tracked by the front position; defaults to `ln p / 2`.
    #[serde(default)]
    pub front_level: Option<f64>,
}

impl SimConfig {
    pub fn front_level(&self) -> f64 {
        self.front_level.unwrap_or_else(|| 0.5 * self.params.kappa())
    }

    /// Delay in time steps, `k = τ/dt`, after [`SimConfig::normalized`].
    pub fn delay_steps(&self) -> usize {
        (self.params.tau() / self.dt).round() as usize
    }

    pub fn n_points(&self) -> usize {
        ((self.domain[1] - self.domain[0]) / self.dx).round() as usize + 1
    }

    /// Checks the configuration and lowers `dt` so that `τ/dt` is an integer.
    pub fn normalized(&self) -> Result<SimConfig> {
        let tau = self.params.tau();
        let [lo, hi] = self.domain;
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return bad(format!("domain must be a finite interval, got [{lo}, {hi}]"));
        }
        if !(self.dx > 0.0) || self.dx > hi - lo {
            return bad(format!("dx = {} does not fit the domain", self.dx));
        }
        let cells = (hi - lo) / self.dx;
        if (cells - cells.round()).abs() > 1e-9 * cells.max(1.0) || cells.round() < 2.0 {
            return bad(format!("dx = {} must divide the domain into at least 2 cells", self.dx));
        }
        if !(self.dt > 0.0) || !(self.t_end > 0.0) {
            return bad(format!("dt and t_end must be positive, got {} and {}", self.dt, self.t_end));
        }
        if !(tau >= self.dt) {
            return Err(Error::HistoryUnderflow { tau, dt: self.dt });
        }
        let k = (tau / self.dt * (1.0 - 1e-12)).ceil();
        let dt = tau / k;
        if self.scheme == Scheme::MethodOfLines {
            let limit = CFL_SAFETY * self.dx * self.dx / 2.0;
            if dt > limit {
                return Err(Error::Cfl { dt, limit });
            }
        }
        Ok(SimConfig { dt, ..self.clone() })
    }
}

/// Named configurations of the two reference runs.
pub fn preset(name: &str) -> Result<SimConfig> {
    let params = ModelParams::new(365.0, 0.07)?;
    let kappa = params.kappa();
    match name {
        "fig3" => {
            let dx: f64 = 0.25;
            SimConfig {
                params,
                domain: [-500.0, 500.0],
                dx,
                dt: CFL_SAFETY * dx * dx / 2.0,
                t_end: 5.0,
                scheme: Scheme::MethodOfLines,
                ic: InitialCondition::Heaviside { level: Some(kappa) },
                bc: BoundaryCondition::Dirichlet { lo: 0.0, hi: kappa },
                snapshot_times: (0..=10).map(|i| 0.5 * i as f64).collect(),
                front_level: None,
            }
            .normalized()
        }
        "fig4" => SimConfig {
            params,
            domain: [-150.0, 150.0],
            dx: 0.05,
            dt: 0.01,
            t_end: 2.0,
            scheme: Scheme::CrankNicolson,
            ic: InitialCondition::ExpTail { beta: 0.7, cap: Some(kappa) },
            bc: BoundaryCondition::Dirichlet { lo: 0.0, hi: kappa },
            snapshot_times: (0..=20).map(|i| 0.1 * i as f64).collect(),
            front_level: None,
        }
        .normalized(),
        other => Err(Error::UnknownPreset(other.to_string())),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub u: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacetimeRecord {
    /// The configuration actually run (after normalisation).
    pub config: SimConfig,
    pub x: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    /// The last `τ/dt + 1` levels, oldest first.
    pub history: Vec<Vec<f64>>,
    /// `(t, X(t))` at every step where the front level is crossed.
    pub front_track: Vec<(f64, f64)>,
}

impl SpacetimeRecord {
    pub fn last(&self) -> &[f64] {
        self.history.last().expect("history holds the current level")
    }
}

/// Constant-coefficient tridiagonal system `-a u_{i-1} + d u_i - a u_{i+1}`,
/// factored once (Thomas algorithm).
struct Tridiagonal {
    off: f64,
    /// Negated super-diagonal of the factorisation.
    c_prime: Vec<f64>,
    inv_den: Vec<f64>,
}

impl Tridiagonal {
    fn new(n: usize, diag: f64, off: f64) -> Self {
        let mut c_prime = vec![0.0; n];
        let mut inv_den = vec![0.0; n];
        let mut prev = 0.0;
        for i in 0..n {
            let den = diag - off * prev;
            inv_den[i] = 1.0 / den;
            prev = off * inv_den[i];
            c_prime[i] = prev;
        }
        Tridiagonal { off, c_prime, inv_den }
    }

    fn solve(&self, rhs: &mut [f64]) {
        let n = rhs.len();
        let mut prev = 0.0;
        for (r, inv) in rhs.iter_mut().zip(&self.inv_den) {
            prev = (*r + self.off * prev) * inv;
            *r = prev;
        }
        for i in (0..n.saturating_sub(1)).rev() {
            rhs[i] += self.c_prime[i] * rhs[i + 1];
        }
    }
}

/// Runs `config` (normalised first).
pub fn simulate(config: &SimConfig) -> Result<SpacetimeRecord> {
    let cfg = config.normalized()?;
    let params = cfg.params;
    let n = cfg.n_points();
    let k = cfg.delay_steps();
    let dt = cfg.dt;
    let dx = cfg.dx;
    let x: Vec<f64> = (0..n).map(|i| cfg.domain[0] + i as f64 * dx).collect();
    let BoundaryCondition::Dirichlet { lo: b_lo, hi: b_hi } = cfg.bc;
    let mut u: Vec<f64> = x.iter().map(|&xi| cfg.ic.eval(xi, &params)).collect();
    u[0] = b_lo;
    u[n - 1] = b_hi;

    // ring of f(u) at levels n-k ..= n; slot (m mod (k+1)) holds level m
    let fu0: Vec<f64> = u.iter().map(|&v| params.f(v)).collect();
    let mut births = vec![fu0; k + 1];
    let mut levels = vec![u.clone(); k + 1];

    let n_steps = (cfg.t_end / dt).round() as usize;
    let level = cfg.front_level();
    let mut snaps_pending: Vec<f64> = cfg.snapshot_times.clone();
    snaps_pending.sort_by(f64::total_cmp);
    let mut snapshots = Vec::new();
    let mut front_track = Vec::new();
    let mut take_snapshot = |t: f64, u: &[f64], pending: &mut Vec<f64>| {
        while let Some(&ts) = pending.first() {
            if ts <= t + 0.5 * dt {
                if ts >= t - 0.5 * dt {
                    snapshots.push(Snapshot { t, u: u.to_vec() });
                }
                pending.remove(0);
            } else {
                break;
            }
        }
    };
    take_snapshot(0.0, &u, &mut snaps_pending);
    if let Ok(pos) = front_position(&x, &u, level) {
        front_track.push((0.0, pos));
    }

    let r = dt / (dx * dx);
    let inner = n - 2;
    let cn = Tridiagonal::new(inner, 1.0 + r + 0.5 * dt, 0.5 * r);
    let mut work = vec![0.0; n];
    let mut delayed = vec![0.0; n];

    for step in 0..n_steps {
        let old = &births[step % (k + 1)]; // level step - k
        let newer = &births[(step + 1) % (k + 1)]; // level step + 1 - k
        for i in 0..n {
            delayed[i] = 0.5 * (old[i] + newer[i]);
        }
        match cfg.scheme {
            Scheme::CrankNicolson => {
                for i in 1..n - 1 {
                    let lap = u[i - 1] - 2.0 * u[i] + u[i + 1];
                    work[i - 1] = u[i] + 0.5 * r * lap - 0.5 * dt * u[i] + dt * delayed[i];
                }
                work[0] += 0.5 * r * b_lo;
                work[inner - 1] += 0.5 * r * b_hi;
                cn.solve(&mut work[..inner]);
                u[1..n - 1].copy_from_slice(&work[..inner]);
            }
            Scheme::MethodOfLines => {
                let inv = 1.0 / (dx * dx);
                work[0] = b_lo;
                work[n - 1] = b_hi;
                for i in 1..n - 1 {
                    let lap = (u[i - 1] - 2.0 * u[i] + u[i + 1]) * inv;
                    work[i] = u[i] + 0.5 * dt * (lap - u[i] + old[i]);
                }
                for i in 1..n - 1 {
                    let lap = (work[i - 1] - 2.0 * work[i] + work[i + 1]) * inv;
                    u[i] += dt * (lap - work[i] + delayed[i]);
                }
            }
        }
        let t = (step + 1) as f64 * dt;
        if let Some(bad) = u.iter().find(|v| !v.is_finite() || v.abs() > 1e6) {
            return Err(Error::BlowUp { t, value: *bad });
        }
        // level step + 1 replaces level step - k
        let slot = step % (k + 1);
        for (b, &v) in births[slot].iter_mut().zip(&u) {
            *b = params.f(v);
        }
        levels[slot].copy_from_slice(&u);
        take_snapshot(t, &u, &mut snaps_pending);
        if let Ok(pos) = front_position(&x, &u, level) {
            front_track.push((t, pos));
        }
    }

    let oldest = n_steps % (k + 1);
    let history = (0..=k).map(|j| levels[(oldest + j) % (k + 1)].clone()).collect();
    Ok(SpacetimeRecord { config: cfg, x, snapshots, history, front_track })
}
