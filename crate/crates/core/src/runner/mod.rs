//! Experiment harness: resolves a configuration, runs one experiment and
//! writes its artifacts into the output directory.
//!
//! Every run writes `resolved-config.json` and `verdict.json` plus the
//! experiment's own CSV/JSON/SVG files (column orders are fixed by
//! [`SCHEMA`]). Exit codes: [`EXIT_PASS`], [`EXIT_FAIL`], [`EXIT_SCHEMA`],
//! [`EXIT_NUMERICAL`].

mod artifacts;
mod config;
mod plot;
mod report;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{
    alternating_prediction, dyadic_prediction, fraction_string, glue_exponent, powerlaw_prediction,
    ExponentPrediction, PointCountGrowth, TrapKind, Q,
};
use crate::dynamics::{flow, nontrapping_audit, AuditConfig, Escape, FlowState};
use crate::operator::CapConfig;
use crate::potential::{
    build_potential, feasibility_audit, FamilyDocument, FamilySpec, FamilyVariant, ModelPotential, PotentialFn,
    TildeModel,
};
use crate::resolvent::{
    check_h_list, compare_in_band, fit_exponent, geometric_h_list, h_sweep, Band, PowerIteration, ScalingSample,
    SweepConfig, ZPolicy,
};
use crate::smoothing::{smoothing_sample, DataPolicy, SmoothingConfig, SmoothingSample};
use crate::surgery::{approximation_error, plan_surgery, surgered_potential, window_grid, ApproximationReport, SurgeryPlan};

pub use artifacts::{
    write_csv, write_json, DYNAMICS_CSV, FEASIBILITY_CSV, SAMPLES_CSV, SCHEMA, SCHEMA_VERSION, SMOOTHING_CSV,
    SURGERY_CSV, TRAJECTORY_CSV,
};
pub use config::{DataChoice, Experiment, ExperimentConfig, Target, ZChoice};
pub use plot::{loglog_svg, verdict_svg};
pub use report::{report, ReportOutcome, ReportRow};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RunError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => EXIT_SCHEMA,
            RunError::Numerical(_) | RunError::Io(_) => EXIT_NUMERICAL,
        }
    }
}

fn config_err(e: impl std::fmt::Display) -> RunError {
    RunError::Config(e.to_string())
}

fn numerical(e: impl std::fmt::Display) -> RunError {
    RunError::Numerical(e.to_string())
}

/// Contents of `verdict.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub experiment: String,
    pub pass: bool,
    pub measured: Option<f64>,
    pub predicted: Option<String>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub details: serde_json::Value,
}

impl Verdict {
    pub fn new(experiment: &str, pass: bool) -> Self {
        Verdict {
            experiment: experiment.to_string(),
            pass,
            measured: None,
            predicted: None,
            lower: None,
            upper: None,
            details: serde_json::Value::Null,
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.pass {
            EXIT_PASS
        } else {
            EXIT_FAIL
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub verdict: Verdict,
    /// Human-readable summary for stdout.
    pub summary: String,
    pub out: PathBuf,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        self.verdict.exit_code()
    }
}

/// Parses a JSON config; unknown fields and type errors are schema errors.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, RunError> {
    let text = std::fs::read_to_string(path).map_err(|e| artifacts::io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))
}

fn target_label(cfg: &ExperimentConfig) -> String {
    match cfg.target {
        Target::Family => cfg.family.variant.clone(),
        Target::QuarticMax => "quartic_max".into(),
        Target::CubicInflection => "cubic_inflection".into(),
        Target::NondegenerateMax => "nondegenerate_max".into(),
        Target::FlatCylinder => "flat_cylinder".into(),
    }
}

fn model_of(target: Target) -> Option<(ModelPotential, TrapKind)> {
    match target {
        Target::QuarticMax => Some((
            ModelPotential::DegenerateTop {
                height: 1.0,
                half_order: 2,
            },
            TrapKind::DegenerateMax { half_order: 2 },
        )),
        Target::CubicInflection => Some((
            ModelPotential::InflectionStep { level: 1.0, order: 3 },
            TrapKind::Inflection { order: 3 },
        )),
        Target::NondegenerateMax => Some((ModelPotential::BarrierTop { height: 1.0 }, TrapKind::NondegenerateMax)),
        _ => None,
    }
}

fn family_spec(cfg: &ExperimentConfig) -> Result<FamilySpec, RunError> {
    cfg.family.to_spec().map_err(config_err)
}

/// The unsurgered potential the experiment acts on.
fn base_potential(cfg: &ExperimentConfig) -> Result<PotentialFn, RunError> {
    match cfg.target {
        Target::Family => build_potential(&family_spec(cfg)?).map_err(config_err),
        Target::FlatCylinder => Ok(PotentialFn::Constant(1.0)),
        t => Ok(PotentialFn::Model(model_of(t).expect("model target").0)),
    }
}

fn needs_surgery(cfg: &ExperimentConfig) -> bool {
    match cfg.experiment {
        Experiment::SurgeryAudit => true,
        Experiment::ResolventSweep => cfg.target == Target::Family && cfg.surgery,
        _ => false,
    }
}

fn family_prediction(cfg: &ExperimentConfig) -> Result<ExponentPrediction, RunError> {
    let variant = cfg.family.variant().map_err(config_err)?;
    match variant {
        FamilyVariant::Dyadic { m } => dyadic_prediction(m, cfg.eps0).map_err(config_err),
        FamilyVariant::PowerLaw { m, k } => powerlaw_prediction(m, k as u64).map_err(config_err),
        FamilyVariant::Alternating => Ok(alternating_prediction()),
    }
}

/// Catalog prediction for the resolvent loss of the target.
fn target_prediction(cfg: &ExperimentConfig) -> Result<Option<ExponentPrediction>, RunError> {
    Ok(match cfg.target {
        Target::Family => Some(family_prediction(cfg)?),
        Target::FlatCylinder => None,
        t => {
            let kind = model_of(t).expect("model target").1;
            Some(glue_exponent(Q::from_integer(0), &[kind], PointCountGrowth::Logarithmic).map_err(config_err)?)
        }
    })
}

/// Checks the configuration and fills every option left unset.
pub fn resolve(cfg: &ExperimentConfig) -> Result<ExperimentConfig, RunError> {
    let mut r = cfg.clone();
    let variant = r.family.variant().map_err(config_err)?;
    let spec = family_spec(&r)?;
    r.family = FamilyDocument::from_spec(&spec);

    let positive = |name: &str, v: f64| {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(RunError::Config(format!("{name} must be positive and finite, got {v}")))
        }
    };
    positive("eps0", r.eps0)?;
    positive("c_prime", r.c_prime)?;
    positive("threshold_c", r.threshold_c)?;
    positive("s", r.s)?;
    positive("t_max", r.t_max)?;
    positive("dt", r.dt)?;
    positive("smoothing_t", r.smoothing_t)?;
    positive("theta", r.theta)?;
    positive("power_tol", r.power_tol)?;
    if r.cap < 0.0 || !(r.cap_layer > 0.0 && r.cap_layer < 0.5) {
        return Err(RunError::Config(format!(
            "cap = {} must be >= 0 and cap_layer = {} in (0, 0.5)",
            r.cap, r.cap_layer
        )));
    }
    if r.points_per_h < 4.0 {
        return Err(RunError::Config(format!("points_per_h = {} is below 4", r.points_per_h)));
    }
    if !(r.x_min < 0.0 && r.x_max > 1.0) {
        return Err(RunError::Config("the box [x_min, x_max] must contain [0, 1]".into()));
    }

    let uses_h = matches!(r.experiment, Experiment::ResolventSweep | Experiment::SurgeryAudit);
    if uses_h {
        if r.h_count < 5 {
            return Err(RunError::Config(format!("h_count = {} (at least 5 required)", r.h_count)));
        }
        if !(r.h_min > 0.0 && r.h_min < r.h_max && r.h_max < 1.0) {
            return Err(RunError::Config(format!(
                "need 0 < h_min < h_max < 1, got h_min = {}, h_max = {}",
                r.h_min, r.h_max
            )));
        }
        check_h_list(&geometric_h_list(r.h_max, r.h_min, r.h_count)).map_err(config_err)?;
    }
    if needs_surgery(&r) && matches!(variant, FamilyVariant::PowerLaw { .. }) {
        return Err(RunError::Config("surgery is only defined for the dyadic and alternating families".into()));
    }
    if r.experiment == Experiment::SurgeryAudit && r.target != Target::Family {
        return Err(RunError::Config("surgery_audit acts on the family target".into()));
    }
    if r.experiment == Experiment::SmoothingSweep {
        let mut ks = r.k_list.clone();
        ks.sort_unstable();
        ks.dedup();
        if ks.len() < 5 || ks[0] == 0 {
            return Err(RunError::Config("k_list needs at least five distinct positive entries".into()));
        }
    }
    if r.experiment == Experiment::DynamicsAudit && r.samples == 0 {
        return Err(RunError::Config("samples must be positive".into()));
    }
    if r.free_sigma_band.0 > r.free_sigma_band.1 {
        return Err(RunError::Config("free_sigma_band is reversed".into()));
    }

    // predictions and feasibility never evaluate the potential
    let v = match r.experiment {
        Experiment::Predict | Experiment::Feasibility => PotentialFn::Constant(1.0),
        _ => base_potential(&r)?,
    };
    if r.z.is_none() {
        r.z = Some(match r.target {
            Target::Family => 1.0,
            Target::FlatCylinder => 2.0,
            t => model_of(t).expect("model target").0.critical_value(),
        });
    }
    if r.log_corrected.is_none() {
        r.log_corrected = Some(r.target == Target::NondegenerateMax);
    }
    if r.band_below.is_none() {
        r.band_below = Some(if r.target == Target::Family { 0.15 } else { 0.1 });
    }
    if r.band_above.is_none() {
        r.band_above = Some(0.1);
    }
    if r.plateau_m.is_none() {
        r.plateau_m = Some(v.trapping_radius());
    }
    if r.escape_radius.is_none() {
        r.escape_radius = Some(3.0 * v.trapping_radius());
    }
    if r.data.is_none() {
        r.data = Some(if r.target == Target::FlatCylinder {
            DataChoice::Outgoing
        } else {
            DataChoice::Trapped
        });
    }
    if r.data_center.is_none() {
        r.data_center = Some(match (r.data, r.target) {
            (Some(DataChoice::Outgoing), _) => 0.5,
            (_, Target::Family) => spec.points.get(1).map_or(spec.first().location, |p| p.location),
            _ => 0.0,
        });
    }
    Ok(r)
}

fn sweep_config(r: &ExperimentConfig) -> SweepConfig {
    let z = r.z.expect("resolved");
    let z_policy = match r.z_policy {
        ZChoice::Fixed => ZPolicy::Fixed { z },
        ZChoice::Window => ZPolicy::WindowMax {
            center: z,
            half_width: r.window_half_width,
            points: r.window_points,
        },
    };
    SweepConfig {
        x_min: r.x_min,
        x_max: r.x_max,
        points_per_h: r.points_per_h,
        cap: CapConfig {
            strength: r.cap,
            layer_fraction: r.cap_layer,
        },
        s: r.s,
        plateau_m: r.plateau_m,
        z_policy,
        power: PowerIteration {
            tol: r.power_tol,
            max_iter: r.power_max_iter,
            seed: r.seed,
        },
    }
}

fn surgery_plan(r: &ExperimentConfig, h: f64) -> Result<SurgeryPlan, String> {
    let variant = r.family.variant().map_err(|e| e.to_string())?;
    let mut plan = plan_surgery(&variant, h, r.eps0, r.c_prime).map_err(|e| e.to_string())?;
    plan.c = r.threshold_c;
    Ok(plan)
}

fn surgered(r: &ExperimentConfig, v0: &PotentialFn, h: f64) -> Result<(PotentialFn, SurgeryPlan), String> {
    let plan = surgery_plan(r, h)?;
    let m = r.family.variant().map_err(|e| e.to_string())?.tilde_order();
    let vh = surgered_potential(v0, &TildeModel { m }, &plan).map_err(|e| e.to_string())?;
    Ok((vh, plan))
}

fn fmt_opt(v: Option<u32>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `p/q`, plus `(= P/den)` when the reduced denominator divides `den` strictly.
fn fraction_over(q: &Q, den: i128) -> String {
    let base = fraction_string(q);
    let d = *q.denom();
    if d != den && den % d == 0 {
        format!("{base} (= {}/{den})", q.numer() * (den / d))
    } else {
        base
    }
}

/// The line printed by `predict`.
pub fn prediction_line(variant: &FamilyVariant, p: &ExponentPrediction) -> String {
    let rho = match variant {
        FamilyVariant::Alternating => fraction_over(&p.resolvent_loss, 28),
        _ => fraction_string(&p.resolvent_loss),
    };
    let eps = if p.epsilon { " (+ε)" } else { "" };
    format!("resolvent_loss = {rho}, smoothing_loss = {}{eps}", fraction_string(&p.smoothing_loss))
}

fn prepare_out(dir: &Path) -> Result<(), RunError> {
    std::fs::create_dir_all(dir).map_err(|e| artifacts::io_err(dir, e))
}

/// Resolves `cfg`, runs the experiment and writes all artifacts.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutcome, RunError> {
    let r = resolve(cfg)?;
    prepare_out(&r.out)?;
    write_json(&r.out.join("resolved-config.json"), &r)?;
    let (verdict, summary) = match r.experiment {
        Experiment::Predict => run_predict(&r)?,
        Experiment::Feasibility => run_feasibility(&r)?,
        Experiment::ResolventSweep => run_resolvent(&r)?,
        Experiment::SurgeryAudit => run_surgery(&r)?,
        Experiment::DynamicsAudit => run_dynamics(&r)?,
        Experiment::SmoothingSweep => run_smoothing(&r)?,
    };
    write_json(&r.out.join("verdict.json"), &verdict)?;
    Ok(RunOutcome {
        verdict,
        summary,
        out: r.out.clone(),
    })
}

fn run_predict(r: &ExperimentConfig) -> Result<(Verdict, String), RunError> {
    let variant = r.family.variant().map_err(config_err)?;
    let p = family_prediction(r)?;
    write_json(&r.out.join("prediction.json"), &p)?;
    write_json(&r.out.join("family.json"), &r.family)?;
    let mut line = prediction_line(&variant, &p);
    for v in p.validity.iter().filter(|v| !v.holds) {
        line.push_str(&format!("\n  predicate `{}` fails", v.name));
    }
    let mut verdict = Verdict::new(r.experiment.name(), p.valid());
    verdict.measured = Some(p.resolvent_loss_f64());
    verdict.predicted = Some(fraction_string(&p.resolvent_loss));
    verdict.details = serde_json::to_value(&p).map_err(numerical)?;
    Ok((verdict, line))
}

fn run_feasibility(r: &ExperimentConfig) -> Result<(Verdict, String), RunError> {
    let spec = family_spec(r)?;
    let report = feasibility_audit(&spec);
    let rows: Vec<Vec<String>> = report
        .intervals
        .iter()
        .map(|m| {
            vec![
                m.n.to_string(),
                m.gap.to_string(),
                m.drop.to_string(),
                m.required_drop.to_string(),
                m.margin.to_string(),
            ]
        })
        .collect();
    write_csv(&r.out.join("feasibility.csv"), &FEASIBILITY_CSV, &rows)?;
    write_json(&r.out.join("family.json"), &r.family)?;
    let mut verdict = Verdict::new(r.experiment.name(), report.pass);
    verdict.measured = Some(report.min_relative_margin);
    verdict.lower = Some(0.0);
    verdict.details = serde_json::json!({ "intervals": report.intervals.len() });
    let summary = format!(
        "{} intervals, minimum relative margin {:.4e}: {}",
        report.intervals.len(),
        report.min_relative_margin,
        pass_word(report.pass)
    );
    Ok((verdict, summary))
}

fn pass_word(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn sample_rows(r: &ExperimentConfig, samples: &[ScalingSample]) -> Vec<Vec<String>> {
    let label = target_label(r);
    let (m, k) = if r.target == Target::Family {
        (fmt_opt(r.family.m), fmt_opt(r.family.k))
    } else {
        (String::new(), String::new())
    };
    samples
        .iter()
        .map(|s| {
            vec![
                label.clone(),
                m.clone(),
                k.clone(),
                s.h.to_string(),
                s.z_used.to_string(),
                s.n.to_string(),
                s.dx.to_string(),
                s.cap.to_string(),
                s.norm.to_string(),
                s.converged.to_string(),
            ]
        })
        .collect()
}

fn surgery_rows(reports: &[(SurgeryPlan, ApproximationReport)]) -> Vec<Vec<String>> {
    reports
        .iter()
        .map(|(p, a)| {
            vec![
                p.h.to_string(),
                p.m.to_string(),
                p.epsilon0.to_string(),
                p.c_prime.to_string(),
                p.n_retained.to_string(),
                p.cutoff_scale.to_string(),
                p.threshold.to_string(),
                a.sup_diff.to_string(),
                a.pass.to_string(),
            ]
        })
        .collect()
}

fn surgery_reports(r: &ExperimentConfig, v0: &PotentialFn, hs: &[f64]) -> Result<Vec<(SurgeryPlan, ApproximationReport)>, RunError> {
    let mut out = Vec::with_capacity(hs.len());
    for &h in hs {
        let (vh, plan) = surgered(r, v0, h).map_err(numerical)?;
        let a = approximation_error(v0, &vh, &plan, &window_grid(&plan, r.surgery_samples));
        out.push((plan, a));
    }
    Ok(out)
}

fn run_resolvent(r: &ExperimentConfig) -> Result<(Verdict, String), RunError> {
    let v0 = base_potential(r)?;
    let mut hs = geometric_h_list(r.h_max, r.h_min, r.h_count);
    hs.sort_by(|a, b| b.total_cmp(a));
    let cfg = sweep_config(r);
    let surgery = needs_surgery(r);
    let gates = if surgery {
        let g = surgery_reports(r, &v0, &hs)?;
        write_csv(&r.out.join("surgery.csv"), &SURGERY_CSV, &surgery_rows(&g))?;
        g
    } else {
        Vec::new()
    };
    let outcome = h_sweep(
        |h| {
            if surgery {
                surgered(r, &v0, h).map(|(vh, _)| vh)
            } else {
                Ok(v0.clone())
            }
        },
        &cfg,
        &hs,
    )
    .map_err(config_err)?;
    write_csv(&r.out.join("samples.csv"), &SAMPLES_CSV, &sample_rows(r, &outcome.samples))?;
    if let Some(e) = outcome.failure {
        return Err(RunError::Numerical(format!(
            "{e} ({} of {} samples written)",
            outcome.samples.len(),
            hs.len()
        )));
    }
    let log_corrected = r.log_corrected.expect("resolved");
    let fit = fit_exponent(&outcome.samples, log_corrected).map_err(numerical)?;
    write_json(&r.out.join("fit.json"), &fit)?;

    let band = Band {
        below: r.band_below.expect("resolved"),
        above: r.band_above.expect("resolved"),
    };
    let (predicted, value, lower, upper, band_pass) = match target_prediction(r)? {
        Some(p) => {
            let v = compare_in_band(fit.slope, &p, band);
            (v.predicted, v.predicted_value, v.lower, v.upper, v.pass)
        }
        None => {
            let (lo, hi) = (1.0 - band.below, 1.0 + band.above);
            ("1".to_string(), 1.0, lo, hi, fit.slope >= lo && fit.slope <= hi)
        }
    };
    let pts: Vec<(f64, f64)> = outcome.samples.iter().map(|s| (1.0 / s.h, s.norm)).collect();
    let svg = loglog_svg(
        &format!("{} resolvent norm", target_label(r)),
        "1/h",
        "weighted norm",
        &pts,
        Some(value),
    );
    artifacts::write_text(&r.out.join("plot.svg"), &svg)?;

    let converged = outcome.samples.iter().all(|s| s.converged);
    let gates_pass = gates.iter().all(|(_, a)| a.pass);
    let pass = band_pass && converged && gates_pass;
    let mut verdict = Verdict::new(r.experiment.name(), pass);
    verdict.measured = Some(fit.slope);
    verdict.predicted = Some(predicted.clone());
    verdict.lower = Some(lower);
    verdict.upper = Some(upper);
    verdict.details = serde_json::json!({
        "target": target_label(r),
        "surgered": surgery,
        "stderr": fit.stderr,
        "r_squared": fit.r_squared,
        "in_band": band_pass,
        "all_converged": converged,
        "surgery_gates_pass": gates_pass,
    });
    let summary = format!(
        "{}: slope {:.4} (+/- {:.4}), predicted {predicted}, band [{lower:.3}, {upper:.3}]: {}",
        target_label(r),
        fit.slope,
        fit.stderr,
        pass_word(pass)
    );
    Ok((verdict, summary))
}

fn run_surgery(r: &ExperimentConfig) -> Result<(Verdict, String), RunError> {
    let v0 = base_potential(r)?;
    let mut hs = geometric_h_list(r.h_max, r.h_min, r.h_count);
    hs.sort_by(|a, b| b.total_cmp(a));
    let reports = surgery_reports(r, &v0, &hs)?;
    write_csv(&r.out.join("surgery.csv"), &SURGERY_CSV, &surgery_rows(&reports))?;
    let pass = reports.iter().all(|(_, a)| a.pass);
    let worst = reports
        .iter()
        .map(|(p, a)| a.sup_diff / (p.c * p.threshold))
        .fold(0.0, f64::max);
    let mut verdict = Verdict::new(r.experiment.name(), pass);
    verdict.measured = Some(worst);
    verdict.upper = Some(1.0);
    verdict.details = serde_json::json!({ "h_points": reports.len() });
    let summary = format!(
        "{} h values, worst sup|V_h - V0| / threshold = {worst:.4e}: {}",
        reports.len(),
        pass_word(pass)
    );
    Ok((verdict, summary))
}

fn run_dynamics(r: &ExperimentConfig) -> Result<(Verdict, String), RunError> {
    let v = base_potential(r)?;
    let mut cfg = AuditConfig::for_potential(&v, r.samples, r.seed);
    cfg.t_max = r.t_max;
    cfg.exclusion_radius = r.exclusion_radius;
    cfg.dt = r.dt;
    cfg.radius = r.escape_radius.expect("resolved");
    let report = nontrapping_audit(&v, &cfg);
    let rows: Vec<Vec<String>> = report
        .samples
        .iter()
        .map(|s| {
            let (escaped, t) = match s.escape {
                Escape::Escaped { t, .. } => (true, t.to_string()),
                Escape::NotEscaped { .. } => (false, String::new()),
            };
            vec![
                s.x0.to_string(),
                s.xi0.to_string(),
                escaped.to_string(),
                t,
                s.escape.drift().to_string(),
                s.reversal_error.to_string(),
                s.lower_bound_holds.map(|b| b.to_string()).unwrap_or_default(),
            ]
        })
        .collect();
    write_csv(&r.out.join("dynamics.csv"), &DYNAMICS_CSV, &rows)?;

    if let Some(s) = report.samples.first() {
        let t_final = match s.escape {
            Escape::Escaped { t, .. } => t.signum() * t.abs().min(r.t_max),
            Escape::NotEscaped { .. } => r.t_max,
        };
        let tr = flow(&v, FlowState::new(&v, s.x0, s.xi0), t_final, r.dt).map_err(numerical)?;
        let traj: Vec<Vec<String>> = tr
            .states
            .iter()
            .map(|q| vec![q.t.to_string(), q.x.to_string(), q.xi.to_string(), q.energy.to_string()])
            .collect();
        write_csv(&r.out.join("trajectory.csv"), &TRAJECTORY_CSV, &traj)?;
    }

    let drift_ok = report.max_drift <= crate::dynamics::DRIFT_BOUND;
    let reversal_ok = report.max_reversal_error <= 1e-8;
    let pass = report.pass && drift_ok && reversal_ok;
    let mut verdict = Verdict::new(r.experiment.name(), pass);
    verdict.measured = Some(report.escaped_fraction);
    verdict.lower = Some(1.0);
    verdict.details = serde_json::json!({
        "samples": report.samples.len(),
        "max_drift": report.max_drift,
        "max_reversal_error": report.max_reversal_error,
        "lower_bound_checked": report.lower_bound_checked,
        "lower_bound_violations": report.lower_bound_violations,
        "escape_time_histogram": report.escape_time_histogram,
    });
    let summary = format!(
        "{} samples, escaped {:.1}%, max drift {:.2e}, max reversal error {:.2e}, lower bound {}/{}: {}",
        report.samples.len(),
        100.0 * report.escaped_fraction,
        report.max_drift,
        report.max_reversal_error,
        report.lower_bound_checked - report.lower_bound_violations,
        report.lower_bound_checked,
        pass_word(pass)
    );
    Ok((verdict, summary))
}

fn run_smoothing(r: &ExperimentConfig) -> Result<(Verdict, String), RunError> {
    use rayon::prelude::*;

    let v = base_potential(r)?;
    let center = r.data_center.expect("resolved");
    let policy = match r.data.expect("resolved") {
        DataChoice::Trapped => DataPolicy::Trapped { center },
        DataChoice::Outgoing => DataPolicy::Outgoing { center, xi0: r.xi0 },
    };
    let mut cfg = SmoothingConfig::new(policy);
    cfg.t_final = r.smoothing_t;
    cfg.theta = r.theta;
    let mut ks = r.k_list.clone();
    ks.sort_unstable();
    ks.dedup();
    let results: Vec<Result<SmoothingSample, String>> = ks
        .par_iter()
        .map(|&k| smoothing_sample(&v, k, &cfg).map_err(|e| format!("k = {k}: {e}")))
        .collect();
    let mut samples = Vec::new();
    let mut failure = None;
    for res in results {
        match res {
            Ok(s) => samples.push(s),
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }
    let rows: Vec<Vec<String>> = samples
        .iter()
        .map(|s| vec![s.k.to_string(), s.q.to_string(), s.t_final.to_string(), s.norm_drift.to_string()])
        .collect();
    write_csv(&r.out.join("smoothing.csv"), &SMOOTHING_CSV, &rows)?;
    if let Some(e) = failure {
        return Err(RunError::Numerical(format!("{e} ({} of {} samples written)", samples.len(), ks.len())));
    }
    let pts: Vec<(f64, f64)> = samples.iter().map(|s| (1.0 / s.k as f64, s.q)).collect();
    let fit = crate::resolvent::fit_points(&pts, false).map_err(numerical)?;
    write_json(&r.out.join("fit.json"), &fit)?;
    let sigma = 0.5 * fit.slope;

    let (predicted, reference, lower, upper) = match policy {
        DataPolicy::Outgoing { .. } => {
            let (lo, hi) = r.free_sigma_band;
            ("1/2".to_string(), 0.5, Some(lo), hi)
        }
        DataPolicy::Trapped { .. } => match target_prediction(r)? {
            Some(p) => {
                let beta = p.smoothing_loss_f64();
                (fraction_string(&p.smoothing_loss), beta, None, beta + r.sigma_tolerance)
            }
            None => ("1/2".to_string(), 0.5, None, 0.5 + r.sigma_tolerance),
        },
    };
    let pass = sigma <= upper && lower.is_none_or(|lo| sigma >= lo);
    let qk: Vec<(f64, f64)> = samples.iter().map(|s| (s.k as f64, s.q)).collect();
    let svg = loglog_svg(
        &format!("{} local smoothing, {}", target_label(r), policy.describe()),
        "k",
        "Q(k)",
        &qk,
        Some(2.0 * reference),
    );
    artifacts::write_text(&r.out.join("plot.svg"), &svg)?;
    let mut verdict = Verdict::new(r.experiment.name(), pass);
    verdict.measured = Some(sigma);
    verdict.predicted = Some(predicted.clone());
    verdict.lower = lower;
    verdict.upper = Some(upper);
    verdict.details = serde_json::json!({
        "target": target_label(r),
        "data": policy.describe(),
        "stderr": 0.5 * fit.stderr,
        "r_squared": fit.r_squared,
        "max_norm_drift": samples.iter().map(|s| s.norm_drift).fold(0.0, f64::max),
    });
    let bounds = match lower {
        Some(lo) => format!("[{lo:.3}, {upper:.3}]"),
        None => format!("<= {upper:.3}"),
    };
    let summary = format!(
        "{}: sigma {sigma:.4} (+/- {:.4}), reference {predicted}, accepted {bounds}: {}",
        target_label(r),
        0.5 * fit.stderr,
        pass_word(pass)
    );
    Ok((verdict, summary))
}
