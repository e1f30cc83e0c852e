//! Local smoothing probe: `Q(k)` for single angular modes on the dyadic
//! cubic family and on the flat cylinder `V0 = 1`.
//!
//! ```text
//! cargo run --release --example smoothing_probe
//! ```

use traplab::catalog::dyadic_prediction;
use traplab::potential::{build_potential, make_family, FamilyVariant, PotentialFn, DEFAULT_APEX, DEFAULT_N_MAX};
use traplab::smoothing::{smoothing_sweep, DataPolicy, SmoothingConfig, SmoothingSweep};

pub struct Probe {
    pub trapped: SmoothingSweep,
    pub free: SmoothingSweep,
}

pub fn run_example(trapped_ks: &[u32], free_ks: &[u32]) -> anyhow::Result<Probe> {
    let spec = make_family(FamilyVariant::Dyadic { m: 3 }, DEFAULT_N_MAX, DEFAULT_APEX)?;
    let v = build_potential(&spec)?;
    let x2 = spec.point(2).expect("second point retained").location;
    let trapped = smoothing_sweep(&v, trapped_ks, &SmoothingConfig::new(DataPolicy::Trapped { center: x2 }))?;
    let beta = dyadic_prediction(3, 0.05)?;
    println!("dyadic m=3, packet at x_2 = {x2}");
    for s in &trapped.samples {
        println!("  k = {:>4}  Q = {:.5e}  steps {}", s.k, s.q, s.steps);
    }
    println!(
        "  sigma = {:.3} (+/- {:.3}), upper bound beta = {} ",
        trapped.sigma, trapped.stderr, beta.smoothing_loss
    );

    let flat = PotentialFn::Constant(1.0);
    let free = smoothing_sweep(&flat, free_ks, &SmoothingConfig::new(DataPolicy::Outgoing { center: 0.5, xi0: 0.5 }))?;
    println!("flat cylinder, outgoing packet");
    for s in &free.samples {
        println!("  k = {:>4}  Q = {:.5e}  steps {}", s.k, s.q, s.steps);
    }
    println!("  sigma = {:.3} (+/- {:.3}), nontrapping value 1/2", free.sigma, free.stderr);
    Ok(Probe { trapped, free })
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example(&[8, 16, 32, 64, 128, 256], &[8, 16, 32, 64, 128])?;
    Ok(())
}
