//! Discretizes the operator for one family and one h, then compares the
//! power-iteration norm with a dense singular value decomposition.
//!
//! ```text
//! cargo run --release --example operator_oracle
//! ```

use traplab::operator::{discretize, weight_profile, CapConfig, Grid};
use traplab::potential::{build_potential, make_family, FamilyVariant, DEFAULT_APEX, DEFAULT_N_MAX};
use traplab::resolvent::{weighted_norm, PowerIteration};

/// Returns `(power iteration, dense SVD)`.
pub fn run_example(n: usize, h: f64) -> anyhow::Result<(f64, f64)> {
    let v = build_potential(&make_family(FamilyVariant::Dyadic { m: 3 }, DEFAULT_N_MAX, DEFAULT_APEX)?)?;
    let grid = Grid::new(-4.0, 5.0, n)?;
    let op = discretize(&v, &grid, h, 1.0, &CapConfig::default())?;
    let w = weight_profile(&grid, 1.0, 1.0)?;
    let power = weighted_norm(
        &op,
        &w,
        &PowerIteration {
            tol: 1e-10,
            ..Default::default()
        },
    )?;

    let inv = op
        .to_dense()
        .try_inverse()
        .ok_or_else(|| anyhow::anyhow!("dense operator is singular"))?;
    let scaled = nalgebra::DMatrix::from_fn(n, n, |i, j| inv[(i, j)] * w.values[i] * w.values[j]);
    let dense = scaled.singular_values().max();
    println!(
        "n = {n}, h = {h}: power iteration {:.10e} ({} iterations), dense {:.10e}, relative gap {:.2e}",
        power.norm,
        power.iterations,
        dense,
        (power.norm - dense).abs() / dense
    );
    Ok((power.norm, dense))
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example(300, 0.15)?;
    Ok(())
}
