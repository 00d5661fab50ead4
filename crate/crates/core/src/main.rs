//! `conrad` command-line front-end.
//!
//! Exit codes: 0 ok, 2 config error, 3 numerical failure, 4 IO error.
//! Errors print one machine-parsable line to stderr.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use conrad::config::{RunConfig, ScenarioConfig};
use conrad::runner::{run, Command};
use conrad::Error;

#[derive(Parser)]
#[command(name = "conrad", version, about = "Conical Radon transform toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON run configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed feeding all randomness (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads, 0 = available parallelism (overrides the config).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone)]
enum Sub {
    /// Rasterize the configured phantom and write a field file.
    Phantom(Common),
    /// Forward-project the phantom onto the cone lattice (sinogram CSV).
    Project(Common),
    /// Write per-vertex hemisphere/disk samples of the ray transform.
    Hemifield(Common),
    /// Run the verification battery and write a CSV report.
    Verify(Common),
    /// Assemble a restricted operator and analyze its null space.
    Nullspace {
        #[command(flatten)]
        common: Common,
        /// Scenario selector: full | theorem2 | theorem3 | theorem4.
        #[arg(long)]
        scenario: Option<String>,
        /// Angle count for the theorem2 scenario.
        #[arg(long)]
        angles: Option<usize>,
        /// Degree bound for the direction-set rank check.
        #[arg(long)]
        degree: Option<usize>,
    },
    /// Invert a sinogram CSV back to a field.
    Reconstruct {
        #[command(flatten)]
        common: Common,
        /// Input sinogram CSV (overrides the config).
        #[arg(long)]
        sinogram: Option<PathBuf>,
        /// Reference field for error reporting (overrides the config).
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// Convert run CSVs into gnuplot-ready .dat files.
    Report(Common),
}

fn load_config(common: &Common) -> Result<RunConfig, Error> {
    let mut config = match &common.config {
        Some(path) => RunConfig::from_path(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &common.out {
        config.output_dir = out.clone();
    }
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(threads) = common.threads {
        config.threads = threads;
    }
    Ok(config)
}

fn dispatch(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Sub::Phantom(c) => run(Command::Phantom, &load_config(&c)?),
        Sub::Project(c) => run(Command::Project, &load_config(&c)?),
        Sub::Hemifield(c) => run(Command::Hemifield, &load_config(&c)?),
        Sub::Verify(c) => run(Command::Verify, &load_config(&c)?),
        Sub::Nullspace { common, scenario, angles, degree } => {
            let mut config = load_config(&common)?;
            if let Some(kind) = scenario {
                config.scenario = match kind.as_str() {
                    "full" => ScenarioConfig::Full,
                    "theorem2" => ScenarioConfig::Theorem2 {
                        angles: angles.unwrap_or(9),
                        degree: degree.unwrap_or(8),
                    },
                    "theorem3" => ScenarioConfig::Theorem3,
                    "theorem4" => match config.scenario {
                        ScenarioConfig::Theorem4 { center, radius } => {
                            ScenarioConfig::Theorem4 { center, radius }
                        }
                        _ => ScenarioConfig::Theorem4 { center: [0.0, 2.0, 0.0], radius: 0.5 },
                    },
                    other => {
                        return Err(Error::InvalidInput(format!("unknown scenario '{other}'")))
                    }
                };
            } else if let (ScenarioConfig::Theorem2 { angles: a, degree: d }, _) =
                (&mut config.scenario, ())
            {
                if let Some(n) = angles {
                    *a = n;
                }
                if let Some(n) = degree {
                    *d = n;
                }
            }
            run(Command::Nullspace, &config)
        }
        Sub::Reconstruct { common, sinogram, reference } => {
            let mut config = load_config(&common)?;
            if let Some(path) = sinogram {
                config.sinogram = Some(path);
            }
            if let Some(path) = reference {
                config.reference_field = Some(path);
            }
            run(Command::Reconstruct, &config)
        }
        Sub::Report(c) => run(Command::Report, &load_config(&c)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let kind = match &err {
                Error::InvalidInput(_) => "config",
                Error::Hypothesis(_) | Error::Numerical(_) => "numerical",
                Error::Format(_) | Error::Io(_) => "io",
            };
            let msg: String = err.to_string().replace('\n', " ");
            eprintln!("error kind={kind} code={} msg=\"{msg}\"", err.exit_code());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
