//! Fits the resolvent-norm exponent of three single-critical-point
//! potentials and compares each with its catalog entry.
//!
//! ```text
//! cargo run --release --example catalog_fits
//! ```

use traplab::catalog::{glue_exponent, microlocal_gap, PointCountGrowth, Q};
use traplab::potential::{ModelPotential, PotentialFn};
use traplab::resolvent::{compare_with_prediction, fit_exponent, geometric_h_list, h_sweep, SweepConfig, ZPolicy};
use traplab::TrapKind;

pub struct CatalogFit {
    pub name: &'static str,
    pub predicted: f64,
    pub slope: f64,
    pub pass: bool,
}

pub fn run_example(h_max: f64, h_min: f64, count: usize) -> anyhow::Result<Vec<CatalogFit>> {
    let cases = [
        (
            "quartic maximum",
            ModelPotential::DegenerateTop { height: 1.0, half_order: 2 },
            TrapKind::DegenerateMax { half_order: 2 },
        ),
        (
            "cubic inflection",
            ModelPotential::InflectionStep { level: 1.0, order: 3 },
            TrapKind::Inflection { order: 3 },
        ),
        (
            "nondegenerate maximum",
            ModelPotential::BarrierTop { height: 1.0 },
            TrapKind::NondegenerateMax,
        ),
    ];
    let hs = geometric_h_list(h_max, h_min, count);
    let mut out = Vec::new();
    for (name, model, kind) in cases {
        let v = PotentialFn::Model(model);
        let cfg = SweepConfig::new(ZPolicy::Fixed { z: model.critical_value() });
        let sweep = h_sweep(|_| Ok(v.clone()), &cfg, &hs)?;
        if let Some(e) = sweep.failure {
            anyhow::bail!("{name}: {e}");
        }
        let gap = microlocal_gap(kind)?;
        let fit = fit_exponent(&sweep.samples, gap.log_correction)?;
        let prediction = glue_exponent(Q::from_integer(0), &[kind], PointCountGrowth::Logarithmic)?;
        let verdict = compare_with_prediction(&fit, &prediction, 0.1);
        println!(
            "{name:<22} slope {:.3} (+/- {:.3})  predicted {}  {}",
            fit.slope,
            fit.stderr,
            verdict.predicted,
            if verdict.pass { "ok" } else { "outside band" }
        );
        out.push(CatalogFit {
            name,
            predicted: verdict.predicted_value,
            slope: fit.slope,
            pass: verdict.pass,
        });
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example(0.5f64.powi(5), 0.5f64.powi(9), 5)?;
    Ok(())
}
