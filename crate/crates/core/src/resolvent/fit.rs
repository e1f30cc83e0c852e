use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ScalingSample;
use crate::catalog::{fraction_string, ExponentPrediction};

/// Extra room above the prediction when it carries an `h^-eps` loss.
pub const EPSILON_ALLOWANCE: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("need at least 5 samples, got {0}")]
    TooFewSamples(usize),
    #[error("non-positive norm or h in sample at h = {0}")]
    InvalidSample(f64),
    #[error("degenerate design matrix")]
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    /// Estimated `rho` in `norm ~ C h^-rho`.
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of `log log(1/h)` when log-corrected.
    pub log_coefficient: Option<f64>,
    pub stderr: f64,
    pub r_squared: f64,
    pub log_corrected: bool,
    pub samples: usize,
    pub warning: Option<String>,
}

/// Least squares for `log norm = rho log(1/h) [+ c1 log log(1/h)] + c0`.
pub fn fit_exponent(samples: &[ScalingSample], log_corrected: bool) -> Result<ScalingFit, FitError> {
    let pts: Vec<(f64, f64)> = samples.iter().map(|s| (s.h, s.norm)).collect();
    fit_points(&pts, log_corrected)
}

pub fn fit_points(pts: &[(f64, f64)], log_corrected: bool) -> Result<ScalingFit, FitError> {
    let n = pts.len();
    if n < 5 {
        return Err(FitError::TooFewSamples(n));
    }
    if let Some(&(h, _)) = pts.iter().find(|(h, v)| !(*h > 0.0 && *h < 1.0 && *v > 0.0)) {
        return Err(FitError::InvalidSample(h));
    }
    let p = if log_corrected { 3 } else { 2 };
    let x = DMatrix::from_fn(n, p, |i, j| {
        let l = (1.0 / pts[i].0).ln();
        match j {
            0 => 1.0,
            1 => l,
            _ => l.ln(),
        }
    });
    let y = DVector::from_iterator(n, pts.iter().map(|&(_, v)| v.ln()));
    let beta = x.clone().svd(true, true).solve(&y, 1e-14).map_err(|_| FitError::Degenerate)?;
    let resid = &y - &x * &beta;
    let rss = resid.norm_squared();
    let mean = y.mean();
    let tss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let r_squared = if tss > 0.0 { 1.0 - rss / tss } else { 1.0 };
    let xtx_inv = (x.transpose() * &x).try_inverse().ok_or(FitError::Degenerate)?;
    let dof = (n - p) as f64;
    let sigma2 = if dof > 0.0 { rss / dof } else { 0.0 };
    let stderr = (sigma2 * xtx_inv[(1, 1)]).max(0.0).sqrt();
    Ok(ScalingFit {
        slope: beta[1],
        intercept: beta[0],
        log_coefficient: log_corrected.then(|| beta[2]),
        stderr,
        r_squared,
        log_corrected,
        samples: n,
        warning: (r_squared < 0.98).then(|| format!("r^2 = {r_squared:.4} below 0.98")),
    })
}

/// Accepted interval `[prediction - below, prediction + above]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub below: f64,
    pub above: f64,
}

impl Band {
    pub fn symmetric(tol: f64) -> Self {
        Band { below: tol, above: tol }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub slope: f64,
    pub predicted: String,
    pub predicted_value: f64,
    pub lower: f64,
    pub upper: f64,
    pub pass: bool,
}

/// `|slope - rho| <= tolerance`, with [`EPSILON_ALLOWANCE`] added above when
/// the prediction carries the `eps` flag.
pub fn compare_with_prediction(fit: &ScalingFit, prediction: &ExponentPrediction, tolerance: f64) -> Verdict {
    let mut band = Band::symmetric(tolerance);
    if prediction.epsilon {
        band.above += EPSILON_ALLOWANCE;
    }
    compare_in_band(fit.slope, prediction, band)
}

pub fn compare_in_band(slope: f64, prediction: &ExponentPrediction, band: Band) -> Verdict {
    let rho = prediction.resolvent_loss_f64();
    let lower = rho - band.below;
    let upper = rho + band.above;
    Verdict {
        slope,
        predicted: fraction_string(&prediction.resolvent_loss),
        predicted_value: rho,
        lower,
        upper,
        pass: slope >= lower && slope <= upper,
    }
}
