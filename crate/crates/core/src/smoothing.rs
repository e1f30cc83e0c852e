//! Single angular modes `P_k = -d^2/dx^2 + k^2 V0 + V1` evolved by
//! Crank-Nicolson, and the local smoothing functional
//! `Q(k) = k^2 int_0^T ||chi u_k(t)||^2 dt`.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::operator::{Grid, OperatorError, TridiagSolver};
use crate::potential::PotentialFn;
use crate::resolvent::{fit_points, FitError};
use crate::step::smooth_step;

/// Total relative drift of `||u||^2` tolerated over one evolution.
pub const NORM_DRIFT_BOUND: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SmoothingError {
    #[error("grid does not resolve wavelength 1/k: dx = {dx:e} > 1/(8k) = {limit:e}")]
    UnderResolved { dx: f64, limit: f64 },
    #[error("k must be at least 1")]
    InvalidK,
    #[error("norm drift {drift:e} after {steps} steps exceeds {bound:e}")]
    NormDrift { drift: f64, steps: usize, bound: f64 },
    #[error("time step must be positive, got {0}")]
    InvalidStep(f64),
    #[error("initial data has zero norm")]
    ZeroData,
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Fit(#[from] FitError),
}

/// `V1 = -(1/4) A^-2 A'^2 + (1/2) A^-1 A''` with `A = V0^{-1/2}`, written in
/// terms of `V0`: `(5/16) V0'^2 / V0^2 - (1/4) V0'' / V0`.
pub fn v1(v: &PotentialFn, x: f64) -> f64 {
    let j = v.jet(x);
    let r = j.d1 / j.value;
    5.0 / 16.0 * r * r - 0.25 * j.d2 / j.value
}

/// Real symmetric tridiagonal `P_k` with Dirichlet ends.
#[derive(Debug, Clone)]
pub struct ModeOperator {
    pub k: u32,
    pub grid: Grid,
    pub diag: Vec<f64>,
    pub off: f64,
    pub v1: Vec<f64>,
}

pub fn assemble_mode(v: &PotentialFn, k: u32, grid: &Grid) -> Result<ModeOperator, SmoothingError> {
    if k == 0 {
        return Err(SmoothingError::InvalidK);
    }
    let dx = grid.dx();
    let limit = 1.0 / (8.0 * k as f64);
    if dx > limit * (1.0 + 1e-12) {
        return Err(SmoothingError::UnderResolved { dx, limit });
    }
    let k2 = (k as f64).powi(2);
    let inv = 1.0 / (dx * dx);
    let xs = grid.points();
    let v1: Vec<f64> = xs.iter().map(|&x| v1(v, x)).collect();
    let diag = xs.iter().zip(&v1).map(|(&x, &w)| 2.0 * inv + k2 * v.value(x) + w).collect();
    Ok(ModeOperator {
        k,
        grid: *grid,
        diag,
        off: -inv,
        v1,
    })
}

impl ModeOperator {
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn apply(&self, u: &[C64], out: &mut [C64]) {
        let n = self.n();
        for i in 0..n {
            let mut acc = u[i] * self.diag[i];
            if i > 0 {
                acc += u[i - 1] * self.off;
            }
            if i + 1 < n {
                acc += u[i + 1] * self.off;
            }
            out[i] = acc;
        }
    }

    /// `<u, P u>` and `||(P - <P>) u||` for normalized `u`.
    pub fn energy_stats(&self, u: &[C64]) -> (f64, f64) {
        let dx = self.grid.dx();
        let mut pu = vec![C64::default(); u.len()];
        self.apply(u, &mut pu);
        let mass: f64 = u.iter().map(|c| c.norm_sqr()).sum::<f64>() * dx;
        let e = u.iter().zip(&pu).map(|(a, b)| (a.conj() * b).re).sum::<f64>() * dx / mass;
        let spread = pu.iter().zip(u).map(|(b, a)| (b - a * e).norm_sqr()).sum::<f64>() * dx / mass;
        (e, spread.sqrt())
    }
}

/// Discrete `L^2` mass `sum |u|^2 dx`.
pub fn mass(u: &[C64], dx: f64) -> f64 {
    u.iter().map(|c| c.norm_sqr()).sum::<f64>() * dx
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionSummary {
    pub steps: usize,
    pub dt: f64,
    pub norm_drift: f64,
}

/// Crank-Nicolson with the gauge shift `E`: each step solves
/// `(1 + i dt/2 (P - E)) u' = (1 - i dt/2 (P - E)) u`. `observe` is called
/// with `(t, u)` at `t = 0` and after every step.
pub fn evolve<F>(op: &ModeOperator, u0: &[C64], t_final: f64, dt: f64, shift: f64, mut observe: F) -> Result<(Vec<C64>, EvolutionSummary), SmoothingError>
where
    F: FnMut(f64, &[C64]),
{
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(SmoothingError::InvalidStep(dt));
    }
    let n = op.n();
    let dx = op.grid.dx();
    let m0 = mass(u0, dx);
    if m0 == 0.0 {
        return Err(SmoothingError::ZeroData);
    }
    let steps = (t_final / dt).round().max(1.0) as usize;
    let dt = t_final / steps as f64;
    let a = C64::new(0.0, 0.5 * dt);
    let off = a * op.off;
    let lhs_diag: Vec<C64> = op.diag.iter().map(|&d| C64::new(1.0, 0.0) + a * (d - shift)).collect();
    let rhs_diag: Vec<C64> = op.diag.iter().map(|&d| C64::new(1.0, 0.0) - a * (d - shift)).collect();
    let solver = TridiagSolver::from_bands(vec![off; n - 1], lhs_diag, vec![off; n - 1])?;
    let mut u = u0.to_vec();
    let mut rhs = vec![C64::default(); n];
    observe(0.0, &u);
    let mut drift = 0.0f64;
    for s in 1..=steps {
        for i in 0..n {
            let mut acc = rhs_diag[i] * u[i];
            if i > 0 {
                acc -= off * u[i - 1];
            }
            if i + 1 < n {
                acc -= off * u[i + 1];
            }
            rhs[i] = acc;
        }
        if s == 1 {
            solver.solve_in_place(&mut rhs)?;
        } else {
            solver.solve_unchecked_in_place(&mut rhs)?;
        }
        std::mem::swap(&mut u, &mut rhs);
        drift = (mass(&u, dx) / m0 - 1.0).abs();
        if drift > NORM_DRIFT_BOUND {
            return Err(SmoothingError::NormDrift {
                drift,
                steps: s,
                bound: NORM_DRIFT_BOUND,
            });
        }
        observe(s as f64 * dt, &u);
    }
    Ok((
        u,
        EvolutionSummary {
            steps,
            dt,
            norm_drift: drift,
        },
    ))
}

/// Spatial cutoff: 1 on `[inner.0, inner.1]`, 0 outside `(outer.0, outer.1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cutoff {
    pub inner: (f64, f64),
    pub outer: (f64, f64),
}

impl Default for Cutoff {
    fn default() -> Self {
        Cutoff {
            inner: (-0.2, 1.2),
            outer: (-0.5, 1.5),
        }
    }
}

impl Cutoff {
    pub fn value(&self, x: f64) -> f64 {
        if x <= self.outer.0 || x >= self.outer.1 {
            0.0
        } else if x < self.inner.0 {
            smooth_step(0.25 + 0.5 * (self.inner.0 - x) / (self.inner.0 - self.outer.0)).value
        } else if x > self.inner.1 {
            smooth_step(0.25 + 0.5 * (x - self.inner.1) / (self.outer.1 - self.inner.1)).value
        } else {
            1.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum DataPolicy {
    /// Gaussian of width `k^{-1/2}` at `center` with zero mean momentum.
    Trapped { center: f64 },
    /// Same Gaussian carrying semiclassical momentum `xi0`, i.e. `exp(i k xi0 x)`.
    Outgoing { center: f64, xi0: f64 },
}

impl DataPolicy {
    pub fn center(&self) -> f64 {
        match *self {
            DataPolicy::Trapped { center } | DataPolicy::Outgoing { center, .. } => center,
        }
    }

    pub fn momentum(&self) -> f64 {
        match *self {
            DataPolicy::Trapped { .. } => 0.0,
            DataPolicy::Outgoing { xi0, .. } => xi0,
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            DataPolicy::Trapped { center } => format!("trapped(center={center})"),
            DataPolicy::Outgoing { center, xi0 } => format!("outgoing(center={center},xi0={xi0})"),
        }
    }

    /// Normalized samples on `grid`.
    pub fn data(&self, k: u32, grid: &Grid) -> Vec<C64> {
        let kf = k as f64;
        let w = kf.powf(-0.5);
        let (c, xi0) = (self.center(), self.momentum());
        let mut u: Vec<C64> = grid
            .points()
            .iter()
            .map(|&x| {
                let amp = (-(x - c).powi(2) / (4.0 * w * w)).exp();
                C64::from_polar(amp, kf * xi0 * x)
            })
            .collect();
        let m = mass(&u, grid.dx()).sqrt();
        if m > 0.0 {
            for c in u.iter_mut() {
                *c /= m;
            }
        }
        u
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothingConfig {
    pub t_final: f64,
    pub cutoff: Cutoff,
    pub policy: DataPolicy,
    pub x_min: f64,
    pub x_max: f64,
    /// Grid points per unit `1/k`; at least 8.
    pub points_per_wavelength: f64,
    /// `dt = theta / spread`, where `spread = ||(P - E) u0||`.
    pub theta: f64,
    /// Extend `x_max` so an outgoing packet never reaches the right end.
    pub extend_for_outgoing: bool,
}

impl SmoothingConfig {
    pub fn new(policy: DataPolicy) -> Self {
        SmoothingConfig {
            t_final: 1.0,
            cutoff: Cutoff::default(),
            policy,
            x_min: -8.0,
            x_max: 12.0,
            points_per_wavelength: 8.0,
            theta: 0.05,
            extend_for_outgoing: true,
        }
    }

    pub fn grid_for(&self, k: u32) -> Result<Grid, SmoothingError> {
        let kf = k as f64;
        let mut x_max = self.x_max;
        if self.extend_for_outgoing {
            let xi0 = self.policy.momentum().abs();
            let t = self.t_final;
            let reach = self.policy.center() + 2.0 * kf * xi0 * t + 6.0 * t * kf.sqrt() + 5.0;
            x_max = x_max.max(reach);
        }
        let cells = ((x_max - self.x_min) * kf * self.points_per_wavelength).ceil() as usize;
        Ok(Grid::new(self.x_min, x_max, cells + 1)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothingSample {
    pub k: u32,
    pub q: f64,
    pub t_final: f64,
    pub steps: usize,
    pub dt: f64,
    pub n: usize,
    pub norm_drift: f64,
    pub data: String,
}

/// `Q(k)` for one mode by trapezoidal quadrature over every time step.
pub fn smoothing_sample(v: &PotentialFn, k: u32, cfg: &SmoothingConfig) -> Result<SmoothingSample, SmoothingError> {
    let grid = cfg.grid_for(k)?;
    let op = assemble_mode(v, k, &grid)?;
    let u0 = cfg.policy.data(k, &grid);
    let (e, spread) = op.energy_stats(&u0);
    let dt = cfg.theta / spread.max(1.0);
    let dx = grid.dx();
    let chi2: Vec<f64> = grid.points().iter().map(|&x| cfg.cutoff.value(x).powi(2)).collect();
    let mut prev: Option<(f64, f64)> = None;
    let mut integral = 0.0;
    let (_, summary) = evolve(&op, &u0, cfg.t_final, dt, e, |t, u| {
        let m = chi2.iter().zip(u).map(|(c, z)| c * z.norm_sqr()).sum::<f64>() * dx;
        if let Some((tp, mp)) = prev {
            integral += 0.5 * (t - tp) * (m + mp);
        }
        prev = Some((t, m));
    })?;
    Ok(SmoothingSample {
        k,
        q: (k as f64).powi(2) * integral,
        t_final: cfg.t_final,
        steps: summary.steps,
        dt: summary.dt,
        n: grid.n,
        norm_drift: summary.norm_drift,
        data: cfg.policy.describe(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothingSweep {
    pub samples: Vec<SmoothingSample>,
    /// `sigma` in `Q(k) ~ k^(2 sigma)`.
    pub sigma: f64,
    pub stderr: f64,
    pub r_squared: f64,
}

pub fn smoothing_sweep(v: &PotentialFn, k_list: &[u32], cfg: &SmoothingConfig) -> Result<SmoothingSweep, SmoothingError> {
    let mut ks = k_list.to_vec();
    ks.sort_unstable();
    ks.dedup();
    let samples = ks
        .par_iter()
        .map(|&k| smoothing_sample(v, k, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    let pts: Vec<(f64, f64)> = samples.iter().map(|s| (1.0 / s.k as f64, s.q)).collect();
    let fit = fit_points(&pts, false)?;
    Ok(SmoothingSweep {
        sigma: 0.5 * fit.slope,
        stderr: 0.5 * fit.stderr,
        r_squared: fit.r_squared,
        samples,
    })
}
