use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use varpot::cli::{
    output_dir, run, CheckSpec, ExperimentConfig, Problem, ReportBundle, Space, EXIT_CONFIG, EXIT_FAIL,
};
use varpot::solvers::{Arm, DataFamily, EstimateId};
use varpot::Error;

#[derive(Parser)]
#[command(name = "varpot", version, about = "Variable-exponent norms and Poisson/Stokes potentials")]
struct Cli {
    /// Directory for tables, binaries and summary.json.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every check listed in a config file.
    Run { config: PathBuf },
    /// Luxemburg norms of the seeded fields on the config grid.
    Norm {
        #[arg(long)]
        config: PathBuf,
    },
    /// Kernel cancellation and identity checks; prints a CSV table.
    KernelCheck {
        #[arg(long, default_value_t = 100)]
        points: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Solve on the config box with the built-in bump data.
    Solve {
        #[arg(value_enum)]
        problem: ProblemArg,
        #[arg(long, value_enum, default_value = "whole")]
        space: SpaceArg,
        #[arg(long)]
        config: PathBuf,
    },
    /// Empirical constant of one estimate over a data family.
    Verify {
        #[arg(long)]
        estimate: EstimateId,
        #[arg(long, value_enum, default_value = "weak")]
        arm: ArmArg,
        #[arg(long)]
        config: PathBuf,
        /// TOML file with a data family replacing the config's.
        #[arg(long)]
        family: Option<PathBuf>,
    },
    /// The full acceptance suite, or selected criteria.
    Accept {
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<u8>,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ProblemArg {
    Poisson,
    Stokes,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum SpaceArg {
    Whole,
    Half,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ArmArg {
    Weak,
    Strong,
}

fn with_checks(path: &PathBuf, checks: Vec<CheckSpec>) -> varpot::Result<ExperimentConfig> {
    let mut config = ExperimentConfig::from_file(path)?;
    config.checks = checks;
    Ok(config)
}

fn load_family(path: &PathBuf) -> varpot::Result<DataFamily> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(vec![format!("cannot read {}: {e}", path.display())]))?;
    toml::from_str(&text).map_err(|e| Error::Config(vec![format!("family: {}", e.message())]))
}

fn build(cli: &Cli) -> varpot::Result<ExperimentConfig> {
    match &cli.command {
        Command::Run { config } => ExperimentConfig::from_file(config),
        Command::Norm { config } => with_checks(config, vec![CheckSpec::Norm]),
        Command::KernelCheck { points, seed } => {
            let mut config = ExperimentConfig::acceptance_preset();
            config.name = "kernel-check".into();
            config.family.seed = *seed;
            config.checks = vec![CheckSpec::KernelCheck { points: *points }];
            Ok(config)
        }
        Command::Solve { problem, space, config } => {
            let problem = match problem {
                ProblemArg::Poisson => Problem::Poisson,
                ProblemArg::Stokes => Problem::Stokes,
            };
            let space = match space {
                SpaceArg::Whole => Space::Whole,
                SpaceArg::Half => Space::Half,
            };
            with_checks(config, vec![CheckSpec::Solve { problem, space }])
        }
        Command::Verify {
            estimate,
            arm,
            config,
            family,
        } => {
            let arm = match arm {
                ArmArg::Weak => Arm::Weak,
                ArmArg::Strong => Arm::Strong,
            };
            let mut c = with_checks(config, vec![CheckSpec::Estimate { estimate: *estimate, arm }])?;
            if let Some(f) = family {
                c.family = load_family(f)?;
            }
            c.validate()?;
            Ok(c)
        }
        Command::Accept { criteria } => {
            let mut config = ExperimentConfig::acceptance_preset();
            config.checks = vec![CheckSpec::Acceptance {
                criteria: criteria.clone(),
            }];
            config.validate()?;
            Ok(config)
        }
    }
}

fn report(cli: &Cli, config: &ExperimentConfig, bundle: &ReportBundle) -> varpot::Result<()> {
    match &cli.command {
        Command::KernelCheck { .. } => print!("{}", bundle.tables.get("kernels.csv").cloned().unwrap_or_default()),
        Command::Accept { .. } => {
            for c in &bundle.summary.criteria {
                let status = serde_json::to_value(c.status).unwrap_or_default();
                println!("criterion {:>2} {:<25} {}  {}", c.id, c.name, status.as_str().unwrap_or("?"), c.detail);
            }
        }
        _ => {
            for c in &bundle.summary.checks {
                let status = if c.passed { "pass" } else { "fail" };
                println!("{:<40} {status}  {}", c.check, c.detail);
            }
        }
    }
    if let Some(dir) = output_dir(config, cli.output.clone()) {
        bundle.write_to(&dir)?;
        eprintln!("wrote {}", dir.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match build(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    let bundle = match run(&config) {
        Ok(b) => b,
        Err(e @ Error::Config(_)) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_FAIL as u8);
        }
    };
    if let Err(e) = report(&cli, &config, &bundle) {
        eprintln!("{e}");
        return ExitCode::from(EXIT_FAIL as u8);
    }
    ExitCode::from(bundle.exit_code() as u8)
}
