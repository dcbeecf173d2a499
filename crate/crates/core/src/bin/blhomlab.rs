use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use blhom::geometry::rationality_test;
use blhom::harness::{
    exit_code, load_config, run_many, ExperimentConfig, ExperimentId, OutputFormat, RunOutcome, EXIT_CONFIG,
    EXIT_CRITERION, EXIT_NONCONVERGENCE, EXIT_PASS,
};
use blhom::{Error, Result};

#[derive(Parser)]
#[command(name = "blhomlab", version, about = "Boundary layers in periodic homogenization: numerical experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Common {
    /// Experiment config (strict JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Concurrent runs.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more experiment configs (E1..E6, dioph, kernel).
    Run {
        #[arg(long = "config", required = true)]
        configs: Vec<PathBuf>,
        /// Output directory; with several configs each run gets a subdirectory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Small-divisor scan and witness sequence of a boundary normal.
    Dioph(Common),
    /// Cell problem: correctors, A0 and the auxiliary potentials.
    Cell(Common),
    /// Decay of a boundary layer (strip solver for rational normals, exact series otherwise).
    Decay(Common),
    /// Slow-convergence witness for a Liouville normal.
    Slowcv(Common),
    /// Tails over several boundary offsets.
    Tailscan(Common),
    /// Half-plane kernel bounds, scaling and representation checks.
    KernelCheck(Common),
    /// Homogenization error against ε.
    ErrSweep(Common),
}

fn format_of(f: Format) -> OutputFormat {
    match f {
        Format::Csv => OutputFormat::Csv,
        Format::Json => OutputFormat::Json,
    }
}

/// The subcommand's config: the file if given (its `experiment`, if any,
/// must be one the subcommand accepts), else the defaults.
fn subcommand_config(common: &Common, accepted: &[ExperimentId], pick: impl Fn(&ExperimentConfig) -> ExperimentId) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(p) => load_config(p)?,
        None => ExperimentConfig::default(),
    };
    match cfg.experiment {
        Some(id) if !accepted.contains(&id) => {
            return Err(Error::Config(format!(
                "config names experiment {} which this subcommand does not run",
                id.name()
            )))
        }
        Some(_) => {}
        None => cfg.experiment = Some(pick(&cfg)),
    }
    Ok(cfg)
}

fn report(outcome: &Result<RunOutcome>) -> i32 {
    match outcome {
        Ok(r) => {
            println!("{} {}", r.manifest.experiment, r.manifest.title);
            for c in &r.manifest.criteria {
                println!("  {}", c.line());
            }
            println!("  manifest: {}", r.manifest_path.display());
            r.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(e)
        }
    }
}

/// Config errors first, then non-convergence, then failed criteria.
fn combine(codes: &[i32]) -> i32 {
    for c in [EXIT_CONFIG, EXIT_NONCONVERGENCE, EXIT_CRITERION] {
        if codes.contains(&c) {
            return c;
        }
    }
    EXIT_PASS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run {
            configs,
            out,
            format,
            jobs,
        } => {
            let mut loaded = Vec::new();
            let mut codes = Vec::new();
            for (i, p) in configs.iter().enumerate() {
                match load_config(p) {
                    Ok(c) => {
                        let dir = out.as_ref().map(|o| {
                            if configs.len() > 1 {
                                o.join(format!("{i:02}-{}", p.file_stem().and_then(|s| s.to_str()).unwrap_or("run")))
                            } else {
                                o.clone()
                            }
                        });
                        loaded.push((c, dir));
                    }
                    Err(e) => {
                        eprintln!("error: {e}");
                        codes.push(exit_code(&e));
                    }
                }
            }
            if codes.is_empty() {
                for r in run_many(&loaded, format_of(format), jobs) {
                    codes.push(report(&r));
                }
            }
            combine(&codes)
        }
        Command::Dioph(c) => single(&c, &[ExperimentId::Dioph], |_| ExperimentId::Dioph),
        Command::Cell(c) => single(&c, &[ExperimentId::E5], |_| ExperimentId::E5),
        Command::Decay(c) => single(&c, &[ExperimentId::E1, ExperimentId::E2], |cfg| {
            let rational = cfg
                .frame
                .as_ref()
                .and_then(|f| f.build(cfg.offset.unwrap_or(0.0)).ok())
                .is_none_or(|(f, _)| rationality_test(&f, blhom::geometry::DEFAULT_RATIONAL_QMAX).is_some());
            if rational {
                ExperimentId::E1
            } else {
                ExperimentId::E2
            }
        }),
        Command::Slowcv(c) => single(&c, &[ExperimentId::E3], |_| ExperimentId::E3),
        Command::Tailscan(c) => single(&c, &[ExperimentId::E4], |_| ExperimentId::E4),
        Command::KernelCheck(c) => single(&c, &[ExperimentId::Kernel], |_| ExperimentId::Kernel),
        Command::ErrSweep(c) => single(&c, &[ExperimentId::E6], |_| ExperimentId::E6),
    };
    ExitCode::from(code as u8)
}

fn single(common: &Common, accepted: &[ExperimentId], pick: impl Fn(&ExperimentConfig) -> ExperimentId) -> i32 {
    match subcommand_config(common, accepted, pick) {
        Ok(cfg) => {
            let r = run_many(&[(cfg, common.out.clone())], format_of(common.format), common.jobs);
            report(&r[0])
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
