use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sparsrec::harness::{self, ConfigFile, Experiment, ExperimentSpec, Overrides};

#[derive(Parser)]
#[command(name = "sparsrec", version, about = "Weighted l1 sparse-source recovery experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write CSV/PNG artifacts under <out>/<experiment>.
    #[command(allow_negative_numbers = true)]
    Run {
        /// example1 | example2 | example3 | example4 | figure1 | figure2 | weights
        experiment: Experiment,
        /// TOML file with keys mirroring the experiment specification.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        beta: Option<f64>,
        /// Relative noise level p in [0, 1).
        #[arg(long)]
        noise: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let Command::Run {
        experiment,
        config,
        alpha,
        k,
        beta,
        noise,
        seed,
        out,
    } = match Cli::try_parse() {
        Ok(cli) => cli.command,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let overrides = Overrides {
        alpha,
        k,
        beta,
        noise,
        seed,
        output_dir: out,
    };
    let result = config
        .as_deref()
        .map(ConfigFile::load)
        .unwrap_or_else(|| Ok(ConfigFile::default()))
        .and_then(|file| ExperimentSpec::resolve(experiment, &file, &overrides))
        .and_then(|spec| harness::run(&spec).map(|r| (spec, r)));
    let (spec, report) = match result {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    for c in &report.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if !report.all_converged {
        println!("FAIL solver: at least one solve did not converge");
    }
    println!("artifacts: {}", spec.artifact_dir().display());
    if report.passed() && report.all_converged {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}
