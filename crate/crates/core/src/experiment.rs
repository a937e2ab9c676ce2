//! Experiment configuration shared by the trial harness and the command line.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::Region64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Vacuum,
    RnTable,
    Gaps,
    PoissonTest,
    KernelChecks,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Vacuum => "vacuum",
            Command::RnTable => "rn_table",
            Command::Gaps => "gaps",
            Command::PoissonTest => "poisson_test",
            Command::KernelChecks => "kernel_checks",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "vacuum" => Command::Vacuum,
            "rn_table" => Command::RnTable,
            "gaps" => Command::Gaps,
            "poisson_test" => Command::PoissonTest,
            "kernel_checks" => Command::KernelChecks,
            _ => return None,
        })
    }

    /// Commands whose output depends on `kappa`.
    pub fn uses_kappa(self) -> bool {
        matches!(self, Command::RnTable | Command::Gaps | Command::PoissonTest)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "csv" => Format::Csv,
            "json" => Format::Json,
            "svg" => Format::Svg,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub n_list: Vec<usize>,
    pub kappa: f64,
    /// Radius of the disk over which gaps are maximized, in `1/sqrt(n)` units.
    pub s: f64,
    /// Region for counts and vacuum probabilities. Rescaled coordinates for
    /// `gaps` and `poisson_test`, raw coordinates for `vacuum`.
    pub region: Region64,
    pub trials: usize,
    pub seed: u64,
    pub workers: usize,
    pub out_dir: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            command: Command::Gaps,
            n_list: vec![256],
            kappa: 2.0,
            s: 0.8,
            region: Region64::centered_disk(0.5),
            trials: 100,
            seed: 0,
            workers: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
            out_dir: PathBuf::from("out"),
            formats: vec![Format::Csv, Format::Json],
        }
    }
}

impl ExperimentConfig {
    /// Every violated invariant, in a fixed order. Empty when valid.
    pub fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.n_list.is_empty() {
            v.push("n list must not be empty".to_string());
        }
        if self.n_list.contains(&0) {
            v.push("every n must be positive".to_string());
        }
        if self.command.uses_kappa() && !(self.kappa > 1.0) {
            v.push("kappa must exceed 1".to_string());
        }
        if !(self.s < 1.0) {
            v.push("s must be < 1".to_string());
        }
        if !(self.s > 0.0) {
            v.push("s must be > 0".to_string());
        }
        if let Err(e) = self.region.validate() {
            v.push(e.to_string());
        }
        if self.workers == 0 {
            v.push("workers must be at least 1".to_string());
        }
        if self.formats.is_empty() {
            v.push("at least one output format is required".to_string());
        }
        if matches!(self.command, Command::Gaps | Command::PoissonTest) {
            if self.region.sup_modulus() >= 1.0 {
                v.push("count region must lie inside the open unit disk".to_string());
            }
            if self.n_list.contains(&1) {
                v.push("gap statistics need n >= 2".to_string());
            }
        }
        if self.command == Command::PoissonTest && self.trials < 200 {
            v.push("poisson_test needs at least 200 trials".to_string());
        }
        if self.command == Command::RnTable && self.n_list.contains(&1) {
            v.push("rn_table needs n >= 2".to_string());
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        assert!(ExperimentConfig::default().validate().is_empty());
    }

    #[test]
    fn messages() {
        let c = ExperimentConfig { kappa: 0.5, ..Default::default() };
        assert_eq!(c.validate(), vec!["kappa must exceed 1"]);
        let c = ExperimentConfig { s: 1.0, ..Default::default() };
        assert_eq!(c.validate(), vec!["s must be < 1"]);
        let c = ExperimentConfig { command: Command::Vacuum, kappa: 0.5, ..Default::default() };
        assert!(c.validate().is_empty());
    }

    #[test]
    fn json_round_trip() {
        let c = ExperimentConfig::default();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<ExperimentConfig>(&text).unwrap(), c);
        assert!(text.contains("\"command\":\"gaps\""));
    }
}
