//! Drives the experiment harness from code: a prediction, a feasibility
//! audit and a quartic-maximum sweep written into one results directory,
//! followed by the consolidated report.
//!
//! ```text
//! cargo run --release --example experiment_runner -- results
//! ```

use std::path::Path;

use traplab::runner::{report, run, Experiment, ExperimentConfig, ReportOutcome, Target};

pub fn run_example(root: &Path, h_count: usize) -> anyhow::Result<ReportOutcome> {
    let runs = [
        ("predict", Experiment::Predict, Target::Family),
        ("feasibility", Experiment::Feasibility, Target::Family),
        ("quartic", Experiment::ResolventSweep, Target::QuarticMax),
    ];
    for (name, experiment, target) in runs {
        let cfg = ExperimentConfig {
            experiment,
            target,
            h_count,
            out: root.join(name),
            ..ExperimentConfig::default()
        };
        let outcome = run(&cfg)?;
        println!("{name}: {}", outcome.summary);
    }
    let rep = report(root)?;
    print!("{}", rep.markdown);
    Ok(rep)
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    let root = std::env::args().nth(1).unwrap_or_else(|| "results".into());
    run_example(Path::new(&root), 5)?;
    Ok(())
}
