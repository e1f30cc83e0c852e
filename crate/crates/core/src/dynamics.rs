//! Hamiltonian flow of `p = xi^2 + V(x)`: `x' = 2 xi`, `xi' = -V'(x)`.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::potential::PotentialFn;

pub const DEFAULT_DT: f64 = 2e-5;
pub const DRIFT_BOUND: f64 = 1e-8;
/// Trajectories keep at most this many states.
pub const MAX_RECORDED: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("relative energy drift {drift:e} exceeds {bound:e} at t = {t}")]
    DriftExceeded { drift: f64, bound: f64, t: f64 },
    #[error("time step must be nonzero and finite, got {0}")]
    InvalidStep(f64),
    #[error("i/o: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowState {
    pub x: f64,
    pub xi: f64,
    pub t: f64,
    pub energy: f64,
}

impl FlowState {
    pub fn new(v: &PotentialFn, x: f64, xi: f64) -> Self {
        FlowState {
            x,
            xi,
            t: 0.0,
            energy: xi * xi + v.value(x),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Recorded states, always including the first and last.
    pub states: Vec<FlowState>,
    pub max_drift: f64,
}

impl Trajectory {
    pub fn last(&self) -> &FlowState {
        self.states.last().expect("trajectory holds its initial state")
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), DynamicsError> {
        let io = |e: csv::Error| DynamicsError::Io(e.to_string());
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "x", "xi", "energy"]).map_err(io)?;
        for s in &self.states {
            w.write_record([s.t.to_string(), s.x.to_string(), s.xi.to_string(), s.energy.to_string()])
                .map_err(io)?;
        }
        w.flush().map_err(|e| DynamicsError::Io(e.to_string()))
    }
}

/// Kick-drift-kick integration of `steps` steps of size `dt` (negative for
/// backward flow). `visit` sees every new state and may stop the run by
/// returning `false`. Returns the final state and the largest relative
/// energy drift seen.
pub fn integrate<F>(v: &PotentialFn, start: FlowState, dt: f64, steps: u64, mut visit: F) -> (FlowState, f64)
where
    F: FnMut(&FlowState) -> bool,
{
    let e0 = start.xi * start.xi + v.value(start.x);
    let scale = e0.abs().max(f64::MIN_POSITIVE);
    let (mut x, mut xi) = (start.x, start.xi);
    let mut dv = v.derivative(x);
    let mut drift = 0.0f64;
    let mut state = start;
    for i in 1..=steps {
        xi -= 0.5 * dt * dv;
        x += 2.0 * dt * xi;
        let j = v.jet(x);
        dv = j.d1;
        xi -= 0.5 * dt * dv;
        let e = xi * xi + j.value;
        drift = drift.max((e - e0).abs() / scale);
        state = FlowState {
            x,
            xi,
            t: start.t + dt * i as f64,
            energy: e,
        };
        if !visit(&state) {
            break;
        }
    }
    (state, drift)
}

/// Störmer-Verlet flow up to time `t_final` (which may be negative).
pub fn flow(v: &PotentialFn, state: FlowState, t_final: f64, dt: f64) -> Result<Trajectory, DynamicsError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(DynamicsError::InvalidStep(dt));
    }
    let span = t_final - state.t;
    let steps = (span.abs() / dt).ceil() as u64;
    let h = if steps == 0 { 0.0 } else { span / steps as f64 };
    let stride = (steps as usize / MAX_RECORDED).max(1) as u64;
    let mut states = vec![state];
    let mut count = 0u64;
    let (last, drift) = integrate(v, state, h, steps, |s| {
        count += 1;
        if count.is_multiple_of(stride) {
            states.push(*s);
        }
        true
    });
    if states.last() != Some(&last) {
        states.push(last);
    }
    if drift > DRIFT_BOUND {
        return Err(DynamicsError::DriftExceeded {
            drift,
            bound: DRIFT_BOUND,
            t: last.t,
        });
    }
    Ok(Trajectory { states, max_drift: drift })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Escape {
    /// `|x| > radius` reached at time `t` (negative when found backward).
    Escaped { t: f64, drift: f64 },
    NotEscaped { drift: f64 },
}

impl Escape {
    pub fn escaped(&self) -> bool {
        matches!(self, Escape::Escaped { .. })
    }

    pub fn drift(&self) -> f64 {
        match *self {
            Escape::Escaped { drift, .. } | Escape::NotEscaped { drift } => drift,
        }
    }
}

/// First time with `|x(t)| > radius`, searching forward and then backward.
pub fn escape_time(v: &PotentialFn, state: FlowState, radius: f64, t_max: f64, dt: f64) -> Escape {
    let steps = (t_max / dt).ceil() as u64;
    let mut drift = 0.0f64;
    for sign in [1.0, -1.0] {
        let mut hit = None;
        let (_, d) = integrate(v, state, sign * dt, steps, |s| {
            if s.x.abs() > radius {
                hit = Some(s.t);
                false
            } else {
                true
            }
        });
        drift = drift.max(d);
        if let Some(t) = hit {
            return Escape::Escaped { t, drift };
        }
    }
    Escape::NotEscaped { drift }
}

/// `(x, 0)` for every critical point of `V`.
pub fn hamiltonian_critical_points(v: &PotentialFn) -> Vec<(f64, f64)> {
    v.critical_points().into_iter().map(|x| (x, 0.0)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditConfig {
    pub samples: usize,
    pub radius: f64,
    pub t_max: f64,
    pub exclusion_radius: f64,
    pub dt: f64,
    /// Sampling rectangle `|x|, |xi| <= box_half_width`.
    pub box_half_width: f64,
    /// Energy band `[energy_low, energy_high]`.
    pub energy_low: f64,
    pub energy_high: f64,
    /// Number of samples seeded on `xi = 0`.
    pub zero_momentum_samples: usize,
    pub seed: u64,
}

impl AuditConfig {
    pub fn for_potential(v: &PotentialFn, samples: usize, seed: u64) -> Self {
        let apex = v.value(0.0);
        let m = v.trapping_radius();
        AuditConfig {
            samples,
            radius: 3.0 * m,
            t_max: 1e3,
            exclusion_radius: 1e-3,
            dt: DEFAULT_DT,
            box_half_width: m,
            energy_low: 1.0 - 0.05,
            energy_high: apex + 0.05,
            zero_momentum_samples: samples / 4,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleOutcome {
    pub x0: f64,
    pub xi0: f64,
    pub escape: Escape,
    /// Phase-space distance after flowing to `t` and back.
    pub reversal_error: f64,
    /// `Some(ok)` when the start lies on the descending side with `xi0 > 0`.
    pub lower_bound_holds: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NontrappingReport {
    pub config: AuditConfig,
    pub samples: Vec<SampleOutcome>,
    pub escaped_fraction: f64,
    pub max_drift: f64,
    pub max_reversal_error: f64,
    pub lower_bound_checked: usize,
    pub lower_bound_violations: usize,
    /// `(lower, upper, count)` over `|t_escape|` in decades.
    pub escape_time_histogram: Vec<(f64, f64, usize)>,
    pub pass: bool,
}

/// Draws phase points uniformly from the rectangle, restricted to the
/// energy band and kept away from the critical points.
pub fn sample_phase_points(v: &PotentialFn, cfg: &AuditConfig) -> Vec<(f64, f64)> {
    let crit = hamiltonian_critical_points(v);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let b = cfg.box_half_width;
    let excluded = |x: f64, xi: f64| {
        crit.iter()
            .any(|&(cx, cxi)| ((x - cx).powi(2) + (xi - cxi).powi(2)).sqrt() < cfg.exclusion_radius)
    };
    let mut out = Vec::with_capacity(cfg.samples);
    let mut attempts = 0usize;
    while out.len() < cfg.samples && attempts < 1000 * cfg.samples.max(1) {
        attempts += 1;
        let x = rng.gen_range(-b..=b);
        let xi = if out.len() < cfg.zero_momentum_samples {
            0.0
        } else {
            rng.gen_range(-b..=b)
        };
        let e = xi * xi + v.value(x);
        if e < cfg.energy_low || e > cfg.energy_high || excluded(x, xi) {
            continue;
        }
        out.push((x, xi));
    }
    out
}

fn check_sample(v: &PotentialFn, cfg: &AuditConfig, x0: f64, xi0: f64) -> SampleOutcome {
    let start = FlowState::new(v, x0, xi0);
    let escape = escape_time(v, start, cfg.radius, cfg.t_max, cfg.dt);
    // flow out to the escape time (or a fixed horizon) and back
    let horizon = match escape {
        Escape::Escaped { t, .. } => t,
        Escape::NotEscaped { .. } => 10.0,
    };
    let steps = (horizon.abs() / cfg.dt).round() as u64;
    let dt = cfg.dt * horizon.signum();
    let (there, _) = integrate(v, start, dt, steps, |_| true);
    let (back, _) = integrate(v, there, -dt, steps, |_| true);
    let reversal_error = ((back.x - x0).powi(2) + (back.xi - xi0).powi(2)).sqrt();
    let lower_bound_holds = (x0 >= 0.0 && xi0 > 0.0).then(|| {
        let mut ok = true;
        let steps = (cfg.t_max / cfg.dt).ceil() as u64;
        integrate(v, start, cfg.dt, steps, |s| {
            if s.x < x0 + 2.0 * xi0 * s.t - 1e-12 * (1.0 + s.x.abs()) {
                ok = false;
            }
            ok && s.x.abs() <= cfg.radius
        });
        ok
    });
    SampleOutcome {
        x0,
        xi0,
        escape,
        reversal_error,
        lower_bound_holds,
    }
}

pub fn nontrapping_audit(v: &PotentialFn, cfg: &AuditConfig) -> NontrappingReport {
    let points = sample_phase_points(v, cfg);
    let samples: Vec<SampleOutcome> = points.par_iter().map(|&(x, xi)| check_sample(v, cfg, x, xi)).collect();
    let n = samples.len();
    let escaped = samples.iter().filter(|s| s.escape.escaped()).count();
    let max_drift = samples.iter().map(|s| s.escape.drift()).fold(0.0, f64::max);
    let max_reversal_error = samples.iter().map(|s| s.reversal_error).fold(0.0, f64::max);
    let checked: Vec<bool> = samples.iter().filter_map(|s| s.lower_bound_holds).collect();
    let violations = checked.iter().filter(|ok| !**ok).count();
    let times: Vec<f64> = samples
        .iter()
        .filter_map(|s| match s.escape {
            Escape::Escaped { t, .. } => Some(t.abs()),
            _ => None,
        })
        .collect();
    let escaped_fraction = if n == 0 { 0.0 } else { escaped as f64 / n as f64 };
    NontrappingReport {
        config: *cfg,
        escaped_fraction,
        max_drift,
        max_reversal_error,
        lower_bound_checked: checked.len(),
        lower_bound_violations: violations,
        escape_time_histogram: decade_histogram(&times),
        pass: n > 0 && escaped == n && violations == 0,
        samples,
    }
}

fn decade_histogram(times: &[f64]) -> Vec<(f64, f64, usize)> {
    let mut bins: Vec<(f64, f64, usize)> = (-3..4).map(|e| (10f64.powi(e), 10f64.powi(e + 1), 0)).collect();
    for &t in times {
        if let Some(b) = bins.iter_mut().find(|b| t >= b.0 && t < b.1) {
            b.2 += 1;
        }
    }
    bins
}
