//! Samples phase points for the dyadic cubic family and checks that every
//! non-stationary trajectory leaves a fixed ball.
//!
//! ```text
//! cargo run --release --example escape_audit
//! ```

use traplab::dynamics::{nontrapping_audit, AuditConfig, NontrappingReport};
use traplab::potential::{build_potential, make_family, FamilyVariant, DEFAULT_APEX, DEFAULT_N_MAX};

pub fn run_example(samples: usize, t_max: f64) -> anyhow::Result<NontrappingReport> {
    let v = build_potential(&make_family(FamilyVariant::Dyadic { m: 3 }, DEFAULT_N_MAX, DEFAULT_APEX)?)?;
    let mut cfg = AuditConfig::for_potential(&v, samples, 7);
    cfg.t_max = t_max;
    let report = nontrapping_audit(&v, &cfg);
    println!(
        "{} samples: {:.1}% escaped, max drift {:.2e}, max reversal error {:.2e}",
        report.samples.len(),
        100.0 * report.escaped_fraction,
        report.max_drift,
        report.max_reversal_error
    );
    println!(
        "lower bound x(t) >= x0 + 2 xi0 t checked on {} trajectories, {} violations",
        report.lower_bound_checked, report.lower_bound_violations
    );
    for (lo, hi, n) in &report.escape_time_histogram {
        if *n > 0 {
            println!("  |t| in [{lo:.0e}, {hi:.0e}): {n}");
        }
    }
    Ok(report)
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example(200, 1e3)?;
    Ok(())
}
