//! Weighted resolvent norms `||rho_-s (P - z - iW)^-1 rho_-s||` and their
//! scaling in `h`.

mod fit;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::operator::{discretize, weight_profile, CapConfig, DiscretizedOperator, Grid, OperatorError, WeightProfile};
use crate::potential::PotentialFn;

pub use fit::{compare_in_band, compare_with_prediction, fit_exponent, fit_points, Band, FitError, ScalingFit, Verdict, EPSILON_ALLOWANCE};

pub const DEFAULT_SEED: u64 = 0xC0FFEE;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ResolventError {
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error("power iteration did not converge in {iterations} steps (last Rayleigh quotient {rayleigh:e})")]
    NotConverged { iterations: usize, rayleigh: f64 },
    #[error("weights have length {got}, operator has {expected}")]
    WeightMismatch { expected: usize, got: usize },
    #[error("h list must be geometric with at least 5 points: {0}")]
    BadHList(String),
    #[error("potential construction failed at h = {h}: {message}")]
    Potential { h: f64, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerIteration {
    /// Stop once `||N v - lambda v|| <= tol * lambda`, or once the Rayleigh
    /// quotient stalls to within `tol / 1000` relative (clustered top spectrum).
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for PowerIteration {
    fn default() -> Self {
        PowerIteration {
            tol: 1e-6,
            max_iter: 2000,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingSample {
    pub h: f64,
    pub z_used: f64,
    pub norm: f64,
    pub n: usize,
    pub dx: f64,
    pub cap: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Largest singular value of `D T^-1 D` by power iteration on its normal
/// operator.
pub fn weighted_norm(op: &DiscretizedOperator, weights: &WeightProfile, power: &PowerIteration) -> Result<ScalingSample, ResolventError> {
    let n = op.n();
    if weights.values.len() != n {
        return Err(ResolventError::WeightMismatch {
            expected: n,
            got: weights.values.len(),
        });
    }
    let solver = op.solver()?;
    let d = &weights.values;
    let mut rng = ChaCha8Rng::seed_from_u64(power.seed);
    let mut v: Vec<C64> = (0..n)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    normalize(&mut v);
    let mut work = vec![C64::default(); n];
    let mut lambda = 0.0;
    let mut prev = f64::NAN;
    for it in 1..=power.max_iter {
        for j in 0..n {
            work[j] = v[j] * d[j];
        }
        solver.solve_in_place(&mut work)?;
        // T is complex symmetric, so T^-H b = conj(T^-1 conj(b))
        for j in 0..n {
            work[j] = (work[j] * d[j] * d[j]).conj();
        }
        solver.solve_in_place(&mut work)?;
        for j in 0..n {
            work[j] = work[j].conj() * d[j];
        }
        lambda = v.iter().zip(&work).map(|(a, b)| (a.conj() * b).re).sum::<f64>();
        let resid = v
            .iter()
            .zip(&work)
            .map(|(a, b)| (b - a * lambda).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let stalled = (lambda - prev).abs() <= 1e-3 * power.tol * lambda;
        prev = lambda;
        let wn = work.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        for j in 0..n {
            v[j] = work[j] / wn;
        }
        if resid <= power.tol * lambda || stalled {
            return Ok(ScalingSample {
                h: op.h,
                z_used: op.z,
                norm: lambda.sqrt(),
                n,
                dx: op.grid.dx(),
                cap: op.cap_strength,
                converged: true,
                iterations: it,
            });
        }
    }
    Err(ResolventError::NotConverged {
        iterations: power.max_iter,
        rayleigh: lambda,
    })
}

fn normalize(v: &mut [C64]) {
    let n = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    for c in v.iter_mut() {
        *c /= n;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum ZPolicy {
    Fixed { z: f64 },
    /// Maximum over `points` equally spaced energies in `[z - half_width, z + half_width]`.
    WindowMax { center: f64, half_width: f64, points: usize },
}

impl ZPolicy {
    pub fn window(center: f64) -> Self {
        ZPolicy::WindowMax {
            center,
            half_width: 0.02,
            points: 21,
        }
    }

    pub fn energies(&self) -> Vec<f64> {
        match *self {
            ZPolicy::Fixed { z } => vec![z],
            ZPolicy::WindowMax {
                center,
                half_width,
                points,
            } => {
                if points < 2 {
                    return vec![center];
                }
                (0..points)
                    .map(|i| center - half_width + 2.0 * half_width * i as f64 / (points - 1) as f64)
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub x_min: f64,
    pub x_max: f64,
    /// Grid points per unit `h`; at least 4.
    pub points_per_h: f64,
    pub cap: CapConfig,
    pub s: f64,
    /// Plateau half-radius `M` of the weight; the potential's trapping radius if unset.
    pub plateau_m: Option<f64>,
    pub z_policy: ZPolicy,
    pub power: PowerIteration,
}

impl SweepConfig {
    pub fn new(z_policy: ZPolicy) -> Self {
        SweepConfig {
            x_min: -8.0,
            x_max: 12.0,
            points_per_h: 4.0,
            cap: CapConfig::default(),
            s: 1.0,
            plateau_m: None,
            z_policy,
            power: PowerIteration::default(),
        }
    }
}

/// Norm at one `h` under the configured energy policy.
pub fn sample_at(v: &PotentialFn, h: f64, config: &SweepConfig) -> Result<ScalingSample, ResolventError> {
    let grid = Grid::for_h(config.x_min, config.x_max, h, config.points_per_h)?;
    let m = config.plateau_m.unwrap_or_else(|| v.trapping_radius());
    let weights = weight_profile(&grid, config.s, m)?;
    let mut best: Option<ScalingSample> = None;
    for z in config.z_policy.energies() {
        let op = discretize(v, &grid, h, z, &config.cap)?;
        let s = weighted_norm(&op, &weights, &config.power)?;
        if best.as_ref().is_none_or(|b| s.norm > b.norm) {
            best = Some(s);
        }
    }
    Ok(best.expect("at least one energy"))
}

/// `h_max, h_max r, ..., h_min` with `count` points.
pub fn geometric_h_list(h_max: f64, h_min: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![h_max];
    }
    let r = (h_min / h_max).ln() / (count - 1) as f64;
    (0..count).map(|i| h_max * (r * i as f64).exp()).collect()
}

pub fn check_h_list(h_list: &[f64]) -> Result<(), ResolventError> {
    if h_list.len() < 5 {
        return Err(ResolventError::BadHList(format!("{} points", h_list.len())));
    }
    if h_list.iter().any(|&h| !(h > 0.0 && h < 1.0)) {
        return Err(ResolventError::BadHList("entries must lie in (0, 1)".into()));
    }
    let r0 = h_list[1] / h_list[0];
    if (r0 - 1.0).abs() < 1e-12 {
        return Err(ResolventError::BadHList("repeated entries".into()));
    }
    for w in h_list.windows(2) {
        if ((w[1] / w[0]) / r0 - 1.0).abs() > 1e-9 {
            return Err(ResolventError::BadHList("ratios are not constant".into()));
        }
    }
    Ok(())
}

/// Samples in decreasing `h`, plus the failure that stopped the sweep.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub samples: Vec<ScalingSample>,
    pub failure: Option<ResolventError>,
}

impl SweepOutcome {
    pub fn complete(&self) -> bool {
        self.failure.is_none()
    }
}

/// Runs one sample per `h` in parallel. The potential is rebuilt per `h` so
/// surgery can be re-planned. Samples are returned in decreasing `h` up to
/// the first failure.
pub fn h_sweep<F>(builder: F, config: &SweepConfig, h_list: &[f64]) -> Result<SweepOutcome, ResolventError>
where
    F: Fn(f64) -> Result<PotentialFn, String> + Sync,
{
    check_h_list(h_list)?;
    let mut hs = h_list.to_vec();
    hs.sort_by(|a, b| b.total_cmp(a));
    let results: Vec<Result<ScalingSample, ResolventError>> = hs
        .par_iter()
        .map(|&h| {
            let v = builder(h).map_err(|message| ResolventError::Potential { h, message })?;
            sample_at(&v, h, config)
        })
        .collect();
    let mut samples = Vec::with_capacity(results.len());
    for r in results {
        match r {
            Ok(s) => samples.push(s),
            Err(e) => {
                return Ok(SweepOutcome {
                    samples,
                    failure: Some(e),
                })
            }
        }
    }
    Ok(SweepOutcome { samples, failure: None })
}
