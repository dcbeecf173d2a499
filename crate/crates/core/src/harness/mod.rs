//! Experiment runner behind the `blhomlab` binary: strict JSON configs,
//! deterministic tables and a manifest with checksums per run.

mod config;
mod experiments;
mod output;

use std::path::{Path, PathBuf};

pub use config::{
    load_config, parse_config, two_mode_data, DecayParams, ExperimentConfig, ExperimentId, FrameSpec, KernelParams,
    ScanParams, SweepParams, WitnessParams,
};
pub use experiments::{MAX_PRINCIPLE_TOL, SCALING_TOL};
pub use output::{sha256_hex, Criterion, FileEntry, Manifest, OutputFormat, Relation, Table};

use crate::error::{Error, Result};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CRITERION: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_NONCONVERGENCE: i32 = 4;

/// Exit status for a failed run.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NonConvergence { .. } | Error::NotPlateaued { .. } | Error::NoWitness { .. } | Error::InsufficientData(_) => {
            EXIT_NONCONVERGENCE
        }
        Error::InvalidInput(_) | Error::OutOfRange(_) | Error::Config(_) | Error::Io(_) | Error::Json(_) => EXIT_CONFIG,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub experiment: ExperimentId,
    pub out_dir: PathBuf,
    pub manifest_path: PathBuf,
    pub manifest: Manifest,
}

impl RunOutcome {
    pub fn pass(&self) -> bool {
        self.manifest.pass
    }

    pub fn exit_code(&self) -> i32 {
        if self.pass() {
            EXIT_PASS
        } else {
            EXIT_CRITERION
        }
    }
}

/// Resolves `config`, runs it and writes its tables and manifest into
/// `out` (else the config's `out`, else `out/<experiment>`).
pub fn run_experiment(config: &ExperimentConfig, out: Option<&Path>, format: OutputFormat) -> Result<RunOutcome> {
    let resolved = config.resolve()?;
    let id = resolved.experiment.expect("resolved");
    let out_dir = out
        .map(Path::to_path_buf)
        .or_else(|| resolved.out.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(id.name()));
    let outcome = experiments::dispatch(id, &resolved)?;
    let echo = ExperimentConfig { out: None, ..resolved };
    let manifest = Manifest {
        experiment: id.name().into(),
        title: id.title().into(),
        config: serde_json::to_value(&echo)?,
        summary: outcome.summary,
        pass: outcome.criteria.iter().all(|c| c.pass),
        criteria: outcome.criteria,
        files: Vec::new(),
    };
    let manifest_path = output::write_outputs(&out_dir, format, &outcome.tables, manifest)?;
    let manifest: Manifest = serde_json::from_slice(&std::fs::read(&manifest_path)?)?;
    Ok(RunOutcome {
        experiment: id,
        out_dir,
        manifest_path,
        manifest,
    })
}

/// Runs several configs on at most `jobs` threads; results keep input order.
pub fn run_many(
    configs: &[(ExperimentConfig, Option<PathBuf>)],
    format: OutputFormat,
    jobs: usize,
) -> Vec<Result<RunOutcome>> {
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Mutex;
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<RunOutcome>>>> = configs.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|s| {
        for _ in 0..jobs.clamp(1, configs.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= configs.len() {
                    break;
                }
                let (cfg, out) = &configs[i];
                let r = run_experiment(cfg, out.as_deref(), format);
                *slots[i].lock().expect("result slot") = Some(r);
            });
        }
    });
    slots
        .into_iter()
        .map(|m| m.into_inner().expect("result slot").expect("every config runs"))
        .collect()
}
