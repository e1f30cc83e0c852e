use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use traplab::runner::{self, Experiment, ExperimentConfig};

#[derive(Parser)]
#[command(name = "traplab", version, about = "Resolvent and local smoothing experiments for accumulating trapping")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the catalog exponents for a family.
    Predict(Common),
    /// Audit the wiggle-room inequalities of a family.
    Feasibility(Common),
    /// Fit the h-exponent of the weighted resolvent norm.
    ResolventSweep(Common),
    /// Check the surgered potential against the approximation threshold.
    SurgeryAudit(Common),
    /// Sample phase points and check that every trajectory escapes.
    DynamicsAudit(Common),
    /// Fit the k-exponent of the local smoothing quantity.
    SmoothingSweep(Common),
    /// Consolidate result directories into report.md and report.svg.
    Report {
        /// Directory holding one or more result sets.
        dir: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Dyadic,
    Powerlaw,
    Alternating,
}

#[derive(Args)]
struct Common {
    /// JSON config; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    family: Option<FamilyArg>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    eps0: Option<f64>,
    #[arg(long)]
    h_min: Option<f64>,
    #[arg(long)]
    h_max: Option<f64>,
    #[arg(long)]
    h_count: Option<usize>,
    #[arg(long)]
    s: Option<f64>,
    /// Absorbing layer strength.
    #[arg(long)]
    cap: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// family, quartic-max, cubic-inflection, nondegenerate-max or flat-cylinder.
    #[arg(long)]
    target: Option<String>,
}

impl Common {
    fn into_config(self, experiment: Experiment) -> Result<ExperimentConfig, runner::RunError> {
        let mut c = match &self.config {
            Some(p) => runner::load_config(p)?,
            None => ExperimentConfig::default(),
        };
        c.experiment = experiment;
        if let Some(f) = self.family {
            c.family.variant = match f {
                FamilyArg::Dyadic => "dyadic",
                FamilyArg::Powerlaw => "powerlaw",
                FamilyArg::Alternating => "alternating",
            }
            .into();
            if !matches!(f, FamilyArg::Powerlaw) {
                c.family.k = None;
            }
            if matches!(f, FamilyArg::Alternating) {
                c.family.m = None;
            }
        }
        if self.m.is_some() {
            c.family.m = self.m;
        }
        if self.k.is_some() {
            c.family.k = self.k;
        }
        set(&mut c.eps0, self.eps0);
        set(&mut c.h_min, self.h_min);
        set(&mut c.h_max, self.h_max);
        set(&mut c.h_count, self.h_count);
        set(&mut c.s, self.s);
        set(&mut c.cap, self.cap);
        set(&mut c.out, self.out);
        set(&mut c.seed, self.seed);
        if let Some(t) = self.target {
            c.target = serde_json::from_value(serde_json::Value::String(t.replace('-', "_")))
                .map_err(|_| runner::RunError::Config(format!("unknown target `{t}`")))?;
        }
        Ok(c)
    }
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn init_threads() {
    if let Some(n) = std::env::var("TRAPLAB_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn main() -> ExitCode {
    init_threads();
    let cli = Cli::parse();
    let (common, experiment) = match cli.command {
        Command::Report { dir } => {
            return match runner::report(&dir) {
                Ok(r) => {
                    print!("{}", r.markdown);
                    ExitCode::from(r.exit_code() as u8)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            };
        }
        Command::Predict(c) => (c, Experiment::Predict),
        Command::Feasibility(c) => (c, Experiment::Feasibility),
        Command::ResolventSweep(c) => (c, Experiment::ResolventSweep),
        Command::SurgeryAudit(c) => (c, Experiment::SurgeryAudit),
        Command::DynamicsAudit(c) => (c, Experiment::DynamicsAudit),
        Command::SmoothingSweep(c) => (c, Experiment::SmoothingSweep),
    };
    let result = common.into_config(experiment).and_then(|c| runner::run(&c));
    match result {
        Ok(out) => {
            println!("{}", out.summary);
            ExitCode::from(out.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
