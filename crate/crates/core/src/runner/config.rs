use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::potential::{FamilyDocument, DEFAULT_APEX, DEFAULT_N_MAX};
use crate::resolvent::DEFAULT_SEED;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Predict,
    Feasibility,
    ResolventSweep,
    SurgeryAudit,
    DynamicsAudit,
    SmoothingSweep,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Predict => "predict",
            Experiment::Feasibility => "feasibility",
            Experiment::ResolventSweep => "resolvent_sweep",
            Experiment::SurgeryAudit => "surgery_audit",
            Experiment::DynamicsAudit => "dynamics_audit",
            Experiment::SmoothingSweep => "smoothing_sweep",
        }
    }
}

/// What the numerical experiments run on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    /// The configured family (surgered per `h` when `surgery` is set).
    Family,
    /// `1 / (1 + x^4)`.
    QuarticMax,
    /// `1 - tanh(x)^3`.
    CubicInflection,
    /// `1 / (1 + x^2)`.
    NondegenerateMax,
    /// `V0 = 1`.
    FlatCylinder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZChoice {
    Fixed,
    Window,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataChoice {
    Trapped,
    Outgoing,
}

/// Every tunable of every experiment. Unset options are filled in by
/// [`super::resolve`] and written back out as `resolved-config.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub family: FamilyDocument,
    pub target: Target,
    pub surgery: bool,
    pub eps0: f64,
    pub c_prime: f64,
    pub threshold_c: f64,

    pub h_max: f64,
    pub h_min: f64,
    pub h_count: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub points_per_h: f64,
    pub cap: f64,
    pub cap_layer: f64,
    pub s: f64,
    pub plateau_m: Option<f64>,
    pub z_policy: ZChoice,
    pub z: Option<f64>,
    pub window_half_width: f64,
    pub window_points: usize,
    pub power_tol: f64,
    pub power_max_iter: usize,
    pub log_corrected: Option<bool>,
    pub band_below: Option<f64>,
    pub band_above: Option<f64>,
    pub surgery_samples: usize,

    pub samples: usize,
    pub t_max: f64,
    pub exclusion_radius: f64,
    pub dt: f64,
    pub escape_radius: Option<f64>,

    pub k_list: Vec<u32>,
    pub smoothing_t: f64,
    pub theta: f64,
    pub data: Option<DataChoice>,
    pub data_center: Option<f64>,
    pub xi0: f64,
    pub sigma_tolerance: f64,
    pub free_sigma_band: (f64, f64),

    pub out: PathBuf,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: Experiment::Predict,
            family: FamilyDocument {
                variant: "dyadic".into(),
                m: Some(3),
                k: None,
                n_max: DEFAULT_N_MAX,
                apex_value: DEFAULT_APEX,
            },
            target: Target::Family,
            surgery: true,
            eps0: 0.05,
            c_prime: 1.0,
            threshold_c: 1.0,
            h_max: 0.5f64.powi(5),
            h_min: 0.5f64.powi(9),
            h_count: 5,
            x_min: -8.0,
            x_max: 12.0,
            points_per_h: 4.0,
            cap: 0.5,
            cap_layer: 0.2,
            s: 1.0,
            plateau_m: None,
            z_policy: ZChoice::Fixed,
            z: None,
            window_half_width: 0.02,
            window_points: 21,
            power_tol: 1e-6,
            power_max_iter: 2000,
            log_corrected: None,
            band_below: None,
            band_above: None,
            surgery_samples: 4000,
            samples: 200,
            t_max: 1e3,
            exclusion_radius: 1e-3,
            dt: crate::dynamics::DEFAULT_DT,
            escape_radius: None,
            k_list: vec![8, 16, 32, 64, 128, 256],
            smoothing_t: 1.0,
            theta: 0.05,
            data: None,
            data_center: None,
            xi0: 0.5,
            sigma_tolerance: 0.3,
            free_sigma_band: (0.4, 0.6),
            out: PathBuf::from("results"),
            seed: DEFAULT_SEED,
        }
    }
}
