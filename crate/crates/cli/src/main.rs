//! `gingap`: runs vacuum, critical-radius, gap, Poisson and kernel
//! experiments and writes CSV, JSON and SVG outputs plus a manifest.

mod commands;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use gingap::experiment::{Command, ExperimentConfig, Format};
use gingap::{Error, Region64};
use serde::{Deserialize, Serialize};

/// Environment variable that overrides `--seed`.
const SEED_ENV: &str = "GINGAP_SEED";

#[derive(Debug, Parser)]
#[command(name = "gingap", version, about = "Ginibre gap and Poisson-approximation experiments")]
struct Args {
    /// vacuum, rn_table, gaps, poisson_test or kernel_checks.
    #[arg(long)]
    command: Option<String>,
    /// Comma-separated ensemble dimensions.
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long, default_value_t = 2.0)]
    kappa: f64,
    #[arg(long, default_value_t = 0.8)]
    s: f64,
    /// Region JSON, or @path to a file holding it.
    #[arg(long)]
    region: Option<String>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Defaults to the available parallelism.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Comma-separated subset of csv, json, svg.
    #[arg(long, value_delimiter = ',', default_value = "csv,json")]
    formats: Vec<String>,
    /// Re-run the configuration recorded in a manifest; `--out` and the
    /// seed environment variable still apply.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    config: ExperimentConfig,
    code_version: String,
    seed: u64,
}

#[derive(Debug)]
enum Failure {
    Validation(Vec<String>),
    Run(Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Run(Error::InvalidConfig(_)) => 2,
            Failure::Run(Error::TooManyFailures { .. }) => 3,
            Failure::Run(_) => 1,
        }
    }
}

fn read_region(text: &str) -> Result<Region64, String> {
    let body = match text.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).map_err(|e| format!("cannot read region file {path}: {e}"))?,
        None => text.to_string(),
    };
    serde_json::from_str(&body).map_err(|e| format!("invalid region JSON: {e}"))
}

fn env_seed() -> Result<Option<u64>, String> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| format!("{SEED_ENV} must be an unsigned integer, got {v:?}")),
        Err(_) => Ok(None),
    }
}

fn build_config(args: &Args) -> Result<ExperimentConfig, Vec<String>> {
    let mut problems = Vec::new();
    let mut config = if let Some(path) = &args.manifest {
        let text = std::fs::read_to_string(path).map_err(|e| vec![format!("cannot read manifest: {e}")])?;
        let m: Manifest = serde_json::from_str(&text).map_err(|e| vec![format!("invalid manifest: {e}")])?;
        let mut c = m.config;
        c.out_dir = args.out.clone();
        c
    } else {
        let command = match args.command.as_deref() {
            Some(c) => Command::parse(c).unwrap_or_else(|| {
                problems.push(format!("unknown command {c:?}"));
                Command::Gaps
            }),
            None => {
                problems.push("--command is required".to_string());
                Command::Gaps
            }
        };
        let region = match &args.region {
            Some(text) => read_region(text).unwrap_or_else(|e| {
                problems.push(e);
                Region64::centered_disk(0.5)
            }),
            None => Region64::centered_disk(0.5),
        };
        let mut formats = Vec::new();
        for f in &args.formats {
            match Format::parse(f.trim()) {
                Some(x) if !formats.contains(&x) => formats.push(x),
                Some(_) => {}
                None => problems.push(format!("unknown format {f:?}")),
            }
        }
        ExperimentConfig {
            command,
            n_list: if args.n.is_empty() { vec![256] } else { args.n.clone() },
            kappa: args.kappa,
            s: args.s,
            region,
            trials: args.trials,
            seed: args.seed,
            workers: args.workers.unwrap_or_else(|| ExperimentConfig::default().workers),
            out_dir: args.out.clone(),
            formats,
        }
    };
    match env_seed() {
        Ok(Some(seed)) => config.seed = seed,
        Ok(None) => {}
        Err(e) => problems.push(e),
    }
    problems.extend(config.validate());
    if problems.is_empty() {
        Ok(config)
    } else {
        Err(problems)
    }
}

/// Tracks written files so a failed run can remove them.
pub struct Outputs {
    dir: PathBuf,
    created_dir: bool,
    written: Vec<PathBuf>,
}

impl Outputs {
    fn new(dir: &Path) -> std::io::Result<Self> {
        let created_dir = !dir.exists();
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), created_dir, written: Vec::new() })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> gingap::Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes)?;
        self.written.push(path);
        Ok(())
    }

    fn discard(self) {
        for p in &self.written {
            let _ = std::fs::remove_file(p);
        }
        if self.created_dir {
            let _ = std::fs::remove_dir(&self.dir);
        }
    }
}

fn run(config: &ExperimentConfig) -> Result<(), Failure> {
    let mut out = Outputs::new(&config.out_dir).map_err(|e| Failure::Run(e.into()))?;
    let manifest = Manifest {
        config: config.clone(),
        code_version: concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION")).to_string(),
        seed: config.seed,
    };
    let result = gingap::to_json_string(&manifest)
        .and_then(|text| out.write("manifest.json", text.as_bytes()))
        .and_then(|_| commands::execute(config, &mut out));
    match result {
        Ok(()) => Ok(()),
        Err(e) => {
            out.discard();
            Err(Failure::Run(e))
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let outcome = build_config(&args).map_err(Failure::Validation).and_then(|c| run(&c));
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Validation(list) => {
                    for p in list {
                        eprintln!("invalid configuration: {p}");
                    }
                }
                Failure::Run(e) => eprintln!("error: {e}"),
            }
            ExitCode::from(f.code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(Failure::Validation(vec![]).code(), 2);
        assert_eq!(Failure::Run(Error::TooManyFailures { failed: 3, total: 10 }).code(), 3);
        assert_eq!(Failure::Run(Error::InvalidConfig("x".into())).code(), 2);
        assert_eq!(Failure::Run(Error::Io("x".into())).code(), 1);
    }
}
