use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use weyl_lab::config::{Experiment, ExperimentConfig};
use weyl_lab::experiments::run;

#[derive(Parser)]
#[command(name = "weyl-lab", version, about = "Spectral counting experiments on flat tori")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output` in the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Free or Galerkin counting function along a λ ladder.
    Count(Common),
    /// Diagonalize the truncated operator and list its spectrum.
    Spectrum(Common),
    /// Kato functional of the potential for several radii.
    Kato(Common),
    /// Compare both sides of the divided-difference trace identity.
    DuhamelCheck(Common),
    /// Remainder series with a log-log exponent fit.
    WeylFit(Common),
    /// Band counts for a width rule.
    Band(Common),
    /// Heat, inverse-power, resolvent and dyadic projector samples.
    Kernels(Common),
    /// Iterate an exponent recurrence to its fixed point.
    Bootstrap(Common),
}

impl Command {
    fn split(self) -> (Experiment, Common) {
        match self {
            Command::Count(c) => (Experiment::Count, c),
            Command::Spectrum(c) => (Experiment::Spectrum, c),
            Command::Kato(c) => (Experiment::Kato, c),
            Command::DuhamelCheck(c) => (Experiment::DuhamelCheck, c),
            Command::WeylFit(c) => (Experiment::WeylFit, c),
            Command::Band(c) => (Experiment::Band, c),
            Command::Kernels(c) => (Experiment::Kernels, c),
            Command::Bootstrap(c) => (Experiment::Bootstrap, c),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let (experiment, common) = Cli::parse().command.split();
    let config = match ExperimentConfig::load(&common.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", common.config.display());
            return ExitCode::from(2);
        }
    };
    if config.experiment != experiment {
        eprintln!(
            "error: configuration is for experiment `{}`, not `{}`",
            config.experiment.as_str(),
            experiment.as_str()
        );
        return ExitCode::from(2);
    }
    let out = common.out.or_else(|| config.output.clone()).unwrap_or_else(|| PathBuf::from("out"));
    match run(&config, &out) {
        Ok(summary) => {
            for f in &summary.files {
                println!("{}", f.display());
            }
            match summary.pass {
                Some(false) => {
                    eprintln!("check FAILED");
                    ExitCode::from(1)
                }
                _ => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
