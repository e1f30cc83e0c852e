//! `h`-dependent replacement of the accumulating tail by `1 - (x - 1)^m`.
//!
//! The cutoff `chi` equals 1 for `|x - 1| <= C/2` and vanishes for
//! `|x - 1| >= C`, with `C = c' h^{2m/((m-1)(m+2)) + eps0/m}`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jet::Jet;
use crate::potential::{FamilyVariant, PotentialFn, TildeModel};
use crate::step::smooth_step;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurgeryError {
    #[error("h = {0} outside (0, 1]")]
    InvalidH(f64),
    #[error("epsilon0 = {0} must be positive")]
    InvalidEpsilon(f64),
    #[error("c_prime = {0} must be positive")]
    InvalidScaleConstant(f64),
    #[error("cutoff scale underflows at h = {0}")]
    Underflow(f64),
    #[error("surgery is defined for the dyadic and alternating families, not {0}")]
    UnsupportedFamily(&'static str),
    #[error("window ({lo}, {hi}) extends past the tail junction at {junction}")]
    WindowTooWide { lo: f64, hi: f64, junction: f64 },
    #[error("surgery requires a family potential")]
    NotAFamily,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurgeryPlan {
    pub h: f64,
    pub m: u32,
    pub epsilon0: f64,
    pub c_prime: f64,
    /// Constant in front of the threshold.
    pub c: f64,
    pub cutoff_scale: f64,
    pub window: (f64, f64),
    #[serde(rename = "N")]
    pub n_retained: u32,
    pub threshold: f64,
}

impl SurgeryPlan {
    /// `C = c' * cutoff_scale`, the half-width of the window.
    pub fn half_width(&self) -> f64 {
        self.c_prime * self.cutoff_scale
    }

    /// `2m/((m-1)(m+2)) + eps0/m`.
    pub fn scale_exponent(&self) -> f64 {
        scale_exponent(self.m, self.epsilon0)
    }

    /// `2m^2/((m-1)(m+2)) + eps0`.
    pub fn threshold_exponent(&self) -> f64 {
        threshold_exponent(self.m, self.epsilon0)
    }

    /// Cutoff and its derivatives at `x`.
    pub fn chi(&self, x: f64) -> Jet {
        let c = self.half_width();
        let y = x - 1.0;
        let j = smooth_step(y.abs() / c - 0.25);
        let sgn = if y < 0.0 { -1.0 } else { 1.0 };
        Jet::new(j.value, sgn * j.d1 / c, j.d2 / (c * c))
    }

    pub fn in_window(&self, x: f64) -> bool {
        x > self.window.0 && x < self.window.1
    }
}

pub fn scale_exponent(m: u32, epsilon0: f64) -> f64 {
    let mf = m as f64;
    2.0 * mf / ((mf - 1.0) * (mf + 2.0)) + epsilon0 / mf
}

pub fn threshold_exponent(m: u32, epsilon0: f64) -> f64 {
    let mf = m as f64;
    2.0 * mf * mf / ((mf - 1.0) * (mf + 2.0)) + epsilon0
}

/// `#{n >= 1 : 2^-n > bound}`.
pub fn retained_count(bound: f64) -> u32 {
    if !(bound < 0.5) {
        return 0;
    }
    let mut n = ((1.0 / bound).log2().ceil() - 1.0).max(0.0) as i64;
    // log2 can land one off near exact powers of two
    while n > 0 && 0.5f64.powi(n as i32) <= bound {
        n -= 1;
    }
    while 0.5f64.powi(n as i32 + 1) > bound {
        n += 1;
    }
    n as u32
}

/// Plans the surgery for a dyadic (order `m`) or alternating (order 5) family.
pub fn plan_surgery(variant: &FamilyVariant, h: f64, epsilon0: f64, c_prime: f64) -> Result<SurgeryPlan, SurgeryError> {
    let m = match *variant {
        FamilyVariant::Dyadic { m } => m,
        FamilyVariant::Alternating => 5,
        FamilyVariant::PowerLaw { .. } => return Err(SurgeryError::UnsupportedFamily("powerlaw")),
    };
    plan_surgery_with_order(m, h, epsilon0, c_prime)
}

pub fn plan_surgery_with_order(m: u32, h: f64, epsilon0: f64, c_prime: f64) -> Result<SurgeryPlan, SurgeryError> {
    if !(h > 0.0 && h <= 1.0) {
        return Err(SurgeryError::InvalidH(h));
    }
    if !(epsilon0 > 0.0) || !epsilon0.is_finite() {
        return Err(SurgeryError::InvalidEpsilon(epsilon0));
    }
    if !(c_prime > 0.0) || !c_prime.is_finite() {
        return Err(SurgeryError::InvalidScaleConstant(c_prime));
    }
    let cutoff_scale = h.powf(scale_exponent(m, epsilon0));
    let threshold = h.powf(threshold_exponent(m, epsilon0));
    if !(cutoff_scale > f64::MIN_POSITIVE) || !(threshold > 0.0) {
        return Err(SurgeryError::Underflow(h));
    }
    let half = c_prime * cutoff_scale;
    Ok(SurgeryPlan {
        h,
        m,
        epsilon0,
        c_prime,
        c: 1.0,
        cutoff_scale,
        window: (1.0 - half, 1.0 + half),
        n_retained: retained_count(half),
        threshold,
    })
}

/// `V_h = chi Vtilde + (1 - chi) V0`.
#[derive(Debug, Clone)]
pub struct SurgeredPotential {
    base: PotentialFn,
    tilde: TildeModel,
    plan: SurgeryPlan,
}

impl SurgeredPotential {
    pub fn base(&self) -> &PotentialFn {
        &self.base
    }

    pub fn plan(&self) -> &SurgeryPlan {
        &self.plan
    }

    pub fn jet(&self, x: f64) -> Jet {
        let v0 = self.base.jet(x);
        if !self.plan.in_window(x) {
            return v0;
        }
        let chi = self.plan.chi(x);
        let vt = self.tilde.jet(x);
        Jet::blend(chi, vt, v0, vt.value - v0.value)
    }

    pub fn critical_points(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self
            .base
            .critical_points()
            .into_iter()
            .filter(|&x| !self.plan.in_window(x))
            .collect();
        pts.push(1.0);
        pts
    }
}

/// Builds `V_h` from a family potential. Surgering an already surgered
/// potential with the same plan returns it unchanged.
pub fn surgered_potential(v0: &PotentialFn, vtilde: &TildeModel, plan: &SurgeryPlan) -> Result<PotentialFn, SurgeryError> {
    if let PotentialFn::Surgered(s) = v0 {
        if s.plan == *plan && s.tilde == *vtilde {
            return Ok(v0.clone());
        }
    }
    let fam = v0.family().ok_or(SurgeryError::NotAFamily)?;
    let junction = fam.tail.tilde_region_end();
    if plan.window.1 > junction {
        return Err(SurgeryError::WindowTooWide {
            lo: plan.window.0,
            hi: plan.window.1,
            junction,
        });
    }
    Ok(PotentialFn::Surgered(Arc::new(SurgeredPotential {
        base: v0.clone(),
        tilde: *vtilde,
        plan: plan.clone(),
    })))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproximationReport {
    pub sup_diff: f64,
    pub argmax: f64,
    pub samples_in_window: usize,
    pub pass: bool,
}

/// `sup |V_h - V0|` over `grid`; passes iff it does not exceed the threshold.
pub fn approximation_error(v0: &PotentialFn, vh: &PotentialFn, plan: &SurgeryPlan, grid: &[f64]) -> ApproximationReport {
    let mut sup = 0.0f64;
    let mut argmax = 1.0;
    let mut inside = 0;
    for &x in grid {
        if plan.in_window(x) {
            inside += 1;
        }
        let d = (vh.value(x) - v0.value(x)).abs();
        if d > sup {
            sup = d;
            argmax = x;
        }
    }
    ApproximationReport {
        sup_diff: sup,
        argmax,
        samples_in_window: inside,
        pass: sup <= plan.c * plan.threshold,
    }
}

/// Uniform samples across the window with `n` points inside it and a margin
/// of one half-width on either side.
pub fn window_grid(plan: &SurgeryPlan, n: usize) -> Vec<f64> {
    let c = plan.half_width();
    let (a, b) = (1.0 - 2.0 * c, 1.0 + 2.0 * c);
    (0..2 * n).map(|i| a + (b - a) * i as f64 / (2 * n - 1) as f64).collect()
}
