//! Builds the three shipped families, audits their interval inequalities and
//! the warping-function bounds, and prints a few values near the accumulation
//! point.
//!
//! ```text
//! cargo run --release --example family_feasibility
//! ```

use traplab::potential::{
    build_potential, feasibility_audit, make_family, short_range_audit, FamilyVariant, DEFAULT_APEX,
};

pub struct FamilyAudit {
    pub name: &'static str,
    pub intervals: usize,
    pub min_margin: f64,
    pub feasible: bool,
    pub short_range: bool,
}

pub fn run_example(n_max: u32) -> anyhow::Result<Vec<FamilyAudit>> {
    let variants = [
        FamilyVariant::Dyadic { m: 3 },
        FamilyVariant::PowerLaw { m: 5, k: 7 },
        FamilyVariant::Alternating,
    ];
    let xs: Vec<f64> = (0..=2000).map(|i| 2.0 + 98.0 * i as f64 / 2000.0).collect();
    let mut out = Vec::new();
    for variant in variants {
        let spec = make_family(variant, n_max, DEFAULT_APEX)?;
        let feas = feasibility_audit(&spec);
        let v = build_potential(&spec)?;
        let sr = short_range_audit(&v, &xs, 1.5);
        println!(
            "{:<12} {} intervals, min relative margin {:.3e}, A' <= {:.3} on [2, 100]",
            variant.name(),
            feas.intervals.len(),
            feas.min_relative_margin,
            sr.sup_a_prime
        );
        for p in spec.points.iter().take(4) {
            println!("    x_{} = {:<10} V = {:.12}  order {}", p.index, p.location, v.value(p.location), p.order);
        }
        out.push(FamilyAudit {
            name: variant.name(),
            intervals: feas.intervals.len(),
            min_margin: feas.min_relative_margin,
            feasible: feas.pass,
            short_range: sr.pass,
        });
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example(40)?;
    Ok(())
}
