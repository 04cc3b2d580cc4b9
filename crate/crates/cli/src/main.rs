//! `hypermin`: command-line front end of the minimal-surface laboratory.

mod commands;
mod config;
mod envelope;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use config::RunConfig;
use envelope::ReportEnvelope;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        CliError::config(format!("{}: {e}", path.display()))
    }
}

impl From<hypermin::Error> for CliError {
    fn from(e: hypermin::Error) -> Self {
        CliError {
            code: if e.is_config() { 2 } else { 1 },
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "hypermin",
    version,
    about = "Minimal surfaces in cusped hyperbolic manifolds"
)]
struct Cli {
    /// TOML or JSON config merged over the shipped defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for mesh jitter.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Main tolerance of the command.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Subcommand)]
enum Command {
    /// Ruled barrier surfaces over a (lambda, T) grid.
    Barrier {
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        lambda: Option<Vec<f64>>,
        #[arg(long = "T", value_delimiter = ',', allow_negative_numbers = true)]
        t_const: Option<Vec<f64>>,
    },
    /// Minimal graph over a half-plane domain.
    Solve {
        #[arg(long)]
        resolution: Option<usize>,
    },
    /// Least-area disk spanning a geodesic polygon.
    Plateau,
    /// Build one of the example surfaces.
    Example {
        #[arg(long)]
        id: Option<u8>,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        resolution: Option<usize>,
    },
    /// End type of a deck-periodic boundary curve.
    Classify {
        #[arg(long)]
        curve: Option<PathBuf>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        y0: Option<f64>,
    },
    /// Barrier sweeps against an end mesh.
    Trap {
        #[arg(long)]
        mesh: Option<PathBuf>,
        #[arg(long, allow_negative_numbers = true)]
        p: Option<i64>,
        #[arg(long, allow_negative_numbers = true)]
        q: Option<i64>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        h: Option<f64>,
        /// Grow hemispheres toward this ideal line `x,t,dx,dt`.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        line: Option<Vec<f64>>,
    },
    /// Total curvature of a truncated mesh.
    Verify {
        #[arg(long)]
        mesh: Option<PathBuf>,
        #[arg(long, allow_negative_numbers = true)]
        chi: Option<i64>,
        #[arg(long = "ycuts", value_delimiter = ',')]
        y_cuts: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        cusps: Option<Vec<String>>,
    },
    /// Verification report of one example.
    Report {
        #[arg(long)]
        id: Option<u8>,
        #[arg(long = "ycuts", value_delimiter = ',')]
        y_cuts: Option<Vec<f64>>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Barrier { .. } => "barrier",
            Command::Solve { .. } => "solve",
            Command::Plateau => "plateau",
            Command::Example { .. } => "example",
            Command::Classify { .. } => "classify",
            Command::Trap { .. } => "trap",
            Command::Verify { .. } => "verify",
            Command::Report { .. } => "report",
        }
    }

    /// Fold the command flags into the config.
    fn apply(&self, c: &mut RunConfig) {
        match self.clone() {
            Command::Barrier { lambda, t_const } => {
                if let Some(l) = lambda {
                    c.barrier.lambda = l;
                }
                if let Some(t) = t_const {
                    c.barrier.t_const = t;
                }
            }
            Command::Solve { resolution } => {
                if let Some(n) = resolution {
                    c.solve.problem.resolution.n = n;
                    c.solve.problem.resolution.m = n;
                }
            }
            Command::Plateau => {}
            Command::Example { id, h, resolution } => {
                set(&mut c.example.id, id);
                set(&mut c.example.params.h, h);
                set(&mut c.example.params.resolution, resolution);
            }
            Command::Classify { curve, tau, h, y0 } => {
                set(&mut c.classify.curve, curve);
                set(&mut c.model.tau, tau);
                set(&mut c.model.h, h);
                set(&mut c.model.y0, y0);
            }
            Command::Trap {
                mesh,
                p,
                q,
                tau,
                h,
                line,
            } => {
                set(&mut c.trap.mesh, mesh);
                set(&mut c.trap.kind[0], p);
                set(&mut c.trap.kind[1], q);
                set(&mut c.model.tau, tau);
                set(&mut c.model.h, h);
                if let Some(l) = line {
                    c.trap.mode = config::TrapMode::Hemisphere;
                    for (dst, v) in c.trap.line.iter_mut().zip(l) {
                        *dst = v;
                    }
                }
            }
            Command::Verify {
                mesh,
                chi,
                y_cuts,
                cusps,
            } => {
                set(&mut c.verify.mesh, mesh);
                set(&mut c.verify.chi, chi);
                set(&mut c.verify.y_cuts, y_cuts);
                set(&mut c.verify.cusps, cusps);
            }
            Command::Report { id, y_cuts } => {
                set(&mut c.example.id, id);
                set(&mut c.report.y_cuts, y_cuts);
            }
        }
    }
}

fn set<T>(dst: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *dst = v;
    }
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("HYPERMIN_THREADS") {
        let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            CliError::config(format!(
                "HYPERMIN_THREADS must be a positive integer, got {v:?}"
            ))
        })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config(e.to_string()))?;
    }
    Ok(())
}

fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = config::load(cli.config.as_deref())?;
    set(&mut cfg.out, cli.out.clone());
    set(&mut cfg.seed, cli.seed);
    cli.command.apply(&mut cfg);
    if let Some(t) = cli.tol {
        let t = config::positive("--tol", t)?;
        match cli.command {
            Command::Solve { .. } => cfg.solve.solver.tol = t,
            Command::Plateau => cfg.plateau.options.tol = t,
            Command::Example { .. } | Command::Report { .. } => cfg.example.params.solver.tol = t,
            Command::Classify { .. } => cfg.classify.tol = t,
            Command::Trap { .. } => cfg.trap.tol = t,
            Command::Barrier { .. } | Command::Verify { .. } => {
                return Err(CliError::config(format!(
                    "--tol does not apply to {}",
                    cli.command.name()
                )))
            }
        }
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let start = Instant::now();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let env = ReportEnvelope::failure("", None, &CliError::config(e.to_string()), start);
            env.emit(None);
            return ExitCode::from(2);
        }
    };
    let name = cli.command.name();
    let cfg = match configure_threads().and_then(|_| resolve(&cli)) {
        Ok(c) => c,
        Err(e) => {
            ReportEnvelope::failure(name, None, &e, start).emit(None);
            return ExitCode::from(e.code);
        }
    };
    match commands::run(name, &cfg) {
        Ok(outcome) => {
            let env = ReportEnvelope::success(
                name,
                &cfg,
                outcome.payload,
                outcome.warnings,
                outcome.files,
                start,
            );
            match env.write(&cfg.out) {
                Ok(()) => {
                    env.emit(None);
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    ReportEnvelope::failure(name, Some(&cfg), &e, start).emit(None);
                    ExitCode::from(e.code)
                }
            }
        }
        Err(e) => {
            let env = ReportEnvelope::failure(name, Some(&cfg), &e, start);
            let _ = env.write(&cfg.out);
            env.emit(Some(&e));
            ExitCode::from(e.code)
        }
    }
}
