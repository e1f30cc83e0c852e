//! Plans the h-dependent surgery on the dyadic cubic family, checks the
//! approximation gate at every h and fits the resolvent exponent of the
//! surgered potentials.
//!
//! ```text
//! cargo run --release --example surgery_composite
//! ```

use traplab::catalog::dyadic_prediction;
use traplab::potential::{build_potential, make_family, FamilyVariant, PotentialFn, TildeModel, DEFAULT_APEX, DEFAULT_N_MAX};
use traplab::resolvent::{compare_in_band, fit_exponent, geometric_h_list, h_sweep, Band, SweepConfig, ZPolicy};
use traplab::surgery::{approximation_error, plan_surgery, surgered_potential, window_grid};

pub struct Composite {
    pub gates_pass: bool,
    pub slope: f64,
    pub in_band: bool,
}

pub fn run_example(h_max: f64, h_min: f64, count: usize) -> anyhow::Result<Composite> {
    let variant = FamilyVariant::Dyadic { m: 3 };
    let v0 = build_potential(&make_family(variant, DEFAULT_N_MAX, DEFAULT_APEX)?)?;
    let tilde = TildeModel { m: 3 };
    let eps0 = 0.05;
    let surgered = |h: f64| -> Result<PotentialFn, String> {
        let plan = plan_surgery(&variant, h, eps0, 1.0).map_err(|e| e.to_string())?;
        surgered_potential(&v0, &tilde, &plan).map_err(|e| e.to_string())
    };
    let hs = geometric_h_list(h_max, h_min, count);
    let mut gates_pass = true;
    for &h in &hs {
        let plan = plan_surgery(&variant, h, eps0, 1.0)?;
        let vh = surgered(h).map_err(anyhow::Error::msg)?;
        let rep = approximation_error(&v0, &vh, &plan, &window_grid(&plan, 2000));
        println!(
            "h = {h:.3e}  window half-width {:.3e}  N = {}  sup|V_h - V0| = {:.3e} <= {:.3e}: {}",
            plan.half_width(),
            plan.n_retained,
            rep.sup_diff,
            plan.threshold,
            rep.pass
        );
        gates_pass &= rep.pass;
    }
    let sweep = h_sweep(surgered, &SweepConfig::new(ZPolicy::Fixed { z: 1.0 }), &hs)?;
    if let Some(e) = sweep.failure {
        anyhow::bail!("{e}");
    }
    for s in &sweep.samples {
        println!("h = {:.3e}  norm = {:.4e}", s.h, s.norm);
    }
    let fit = fit_exponent(&sweep.samples, false)?;
    let verdict = compare_in_band(fit.slope, &dyadic_prediction(3, eps0)?, Band { below: 0.15, above: 0.1 });
    println!(
        "slope {:.3} (+/- {:.3}), predicted {} band [{:.3}, {:.3}]",
        fit.slope, fit.stderr, verdict.predicted, verdict.lower, verdict.upper
    );
    Ok(Composite {
        gates_pass,
        slope: fit.slope,
        in_band: verdict.pass,
    })
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example(0.5f64.powi(5), 0.5f64.powi(9), 5)?;
    Ok(())
}
