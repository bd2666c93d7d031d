//! Experiment configuration: a JSON file, then command-line overrides.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use shuffle_dp::audit::DEFAULT_BUDGET;
use shuffle_dp::primitives::DEFAULT_SIGMA;

use crate::error::{CliError, CliResult};
use crate::registry::ProtocolName;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    /// One execution with a full transcript dump.
    Run,
    /// Correctness rate over many seeds.
    Mc,
    /// Exact privacy audit.
    Audit,
    /// Registry and derived parameters.
    Info,
}

/// Where the two-round protocol gets its histogram from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum HistogramMode {
    /// Local-randomizer reports and the frequency oracle.
    Real,
    /// Exact counts of the hashed values.
    #[default]
    Injected,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CandidateMode {
    /// Hashes of every domain element.
    #[default]
    DomainImage,
    /// Every value of the hash range.
    FullRange,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Option<CommandKind>,
    pub protocol: String,
    pub n: usize,
    /// `|X|`.
    pub x_domain: u64,
    /// `|Y|`, nested protocols only.
    pub y_domain: u64,
    /// Fraction of element holders in nested protocols.
    pub alpha: f64,
    /// Audit grid, strictly ascending.
    pub epsilons: Vec<f64>,
    /// Two-round failure parameters, strictly ascending in (0, 1). Monte
    /// Carlo sweeps over them; other commands use the first.
    pub deltas: Vec<f64>,
    /// Privacy parameter of local randomizers (histogram reports,
    /// randomized response).
    pub ldp_epsilon: f64,
    /// Key length of private channels; message width of the coin protocol.
    pub k: usize,
    /// Statistical security of the summation.
    pub sigma: u32,
    /// Group size override.
    pub q: Option<u64>,
    /// Share count override (otherwise derived from `sigma`).
    pub shares: Option<usize>,
    pub trials: u64,
    pub coalition_cap: usize,
    pub extra_coalitions: Vec<Vec<usize>>,
    /// Branch budget for exact enumeration.
    pub budget: u64,
    pub seed: u64,
    pub histogram: HistogramMode,
    pub candidates: CandidateMode,
    /// Upper limit on the two-round hash range.
    pub range_cap: Option<u64>,
    /// Element inputs; all zero when absent.
    pub inputs: Option<Vec<u64>>,
    /// Vector inputs of nested protocols; all zero when absent.
    pub vectors: Option<Vec<Vec<u64>>>,
    /// Compute the mutual-information diagnostic in `info`.
    pub mi: bool,
    /// Report path; stdout when absent.
    pub output: Option<PathBuf>,
    /// Optional CSV table.
    pub csv: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            command: None,
            protocol: ProtocolName::CommonPrelude.as_str().to_string(),
            n: 4,
            x_domain: 2,
            y_domain: 2,
            alpha: 0.5,
            epsilons: vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0],
            deltas: vec![1e-3],
            ldp_epsilon: 1.0,
            k: 4,
            sigma: DEFAULT_SIGMA,
            q: None,
            shares: None,
            trials: 1000,
            coalition_cap: 2,
            extra_coalitions: Vec::new(),
            budget: DEFAULT_BUDGET as u64,
            seed: 0,
            histogram: HistogramMode::Injected,
            candidates: CandidateMode::DomainImage,
            range_cap: None,
            inputs: None,
            vectors: None,
            mi: false,
            output: None,
            csv: None,
        }
    }
}

/// Command-line values; each one present replaces the file's value.
#[derive(Clone, Debug, Default, clap::Args)]
pub struct Overrides {
    /// Registry name.
    #[arg(long)]
    pub protocol: Option<String>,
    /// Number of parties.
    #[arg(long)]
    pub n: Option<usize>,
    /// Domain size |X|.
    #[arg(long)]
    pub x_domain: Option<u64>,
    /// Vector alphabet size |Y|, nested protocols.
    #[arg(long)]
    pub y_domain: Option<u64>,
    /// Fraction of element holders, nested protocols.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Comma-separated, strictly ascending.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub epsilons: Option<Vec<f64>>,
    /// Comma-separated, strictly ascending, in (0, 1).
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub deltas: Option<Vec<f64>>,
    /// Privacy parameter of local randomizers.
    #[arg(long)]
    pub ldp_epsilon: Option<f64>,
    /// Channel key length; coin-protocol message width.
    #[arg(long)]
    pub k: Option<usize>,
    /// Statistical security of the summation.
    #[arg(long)]
    pub sigma: Option<u32>,
    /// Group size.
    #[arg(long)]
    pub q: Option<u64>,
    /// Shares per value.
    #[arg(long)]
    pub shares: Option<usize>,
    /// Monte Carlo trials.
    #[arg(long)]
    pub trials: Option<u64>,
    /// Largest audited coalition.
    #[arg(long)]
    pub coalition_cap: Option<usize>,
    /// Branch budget for exact enumeration.
    #[arg(long)]
    pub budget: Option<u64>,
    /// Decimal 64-bit seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub histogram: Option<HistogramMode>,
    #[arg(long, value_enum)]
    pub candidates: Option<CandidateMode>,
    /// Upper limit on the two-round hash range.
    #[arg(long)]
    pub range_cap: Option<u64>,
    /// Comma-separated element inputs.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub inputs: Option<Vec<u64>>,
    /// Add the mutual-information diagnostic to `info`.
    #[arg(long)]
    pub mi: bool,
    /// Report path (default stdout).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// CSV table path.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

macro_rules! take {
    ($cfg:ident, $ov:ident; $($f:ident),*) => {
        $(if let Some(v) = $ov.$f.clone() { $cfg.$f = v; })*
    };
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::config("config", e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::ConfigFile {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        serde_json::from_str(&text).map_err(|e| CliError::ConfigFile {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn apply(&mut self, ov: &Overrides) {
        take!(self, ov; protocol, n, x_domain, y_domain, alpha, epsilons, deltas, ldp_epsilon, k, sigma,
              trials, coalition_cap, budget, seed, histogram, candidates);
        if ov.q.is_some() {
            self.q = ov.q;
        }
        if ov.shares.is_some() {
            self.shares = ov.shares;
        }
        if ov.range_cap.is_some() {
            self.range_cap = ov.range_cap;
        }
        if ov.inputs.is_some() {
            self.inputs = ov.inputs.clone();
        }
        if ov.output.is_some() {
            self.output = ov.output.clone();
        }
        if ov.csv.is_some() {
            self.csv = ov.csv.clone();
        }
        self.mi |= ov.mi;
    }

    pub fn protocol_name(&self) -> CliResult<ProtocolName> {
        self.protocol.parse()
    }

    /// Range checks that do not depend on the protocol.
    pub fn validate(&self) -> CliResult<()> {
        self.protocol_name()?;
        if self.command.is_none() {
            return Err(CliError::config(
                "command",
                "no command given in the file or on the command line",
            ));
        }
        let positive = [
            ("n", self.n as u64),
            ("x_domain", self.x_domain),
            ("y_domain", self.y_domain),
            ("k", self.k as u64),
            ("sigma", self.sigma as u64),
            ("trials", self.trials),
            ("budget", self.budget),
        ];
        for (field, v) in positive {
            if v == 0 {
                return Err(CliError::config(field, "must be positive"));
            }
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(CliError::config("alpha", format!("{} outside (0, 1)", self.alpha)));
        }
        if !(self.ldp_epsilon > 0.0 && self.ldp_epsilon.is_finite()) {
            return Err(CliError::config("ldp_epsilon", "must be positive and finite"));
        }
        check_grid("epsilons", &self.epsilons, |e| e >= 0.0 && e.is_finite())?;
        check_grid("deltas", &self.deltas, |d| d > 0.0 && d < 1.0)?;
        if let Some(q) = self.q {
            if q < 2 {
                return Err(CliError::config("q", "must be at least 2"));
            }
        }
        if self.shares == Some(0) {
            return Err(CliError::config("shares", "must be positive"));
        }
        if self.range_cap == Some(0) {
            return Err(CliError::config("range_cap", "must be positive"));
        }
        Ok(())
    }

    /// The first delta of the grid.
    pub fn delta(&self) -> f64 {
        self.deltas[0]
    }
}

fn check_grid(field: &str, grid: &[f64], ok: impl Fn(f64) -> bool) -> CliResult<()> {
    if grid.is_empty() {
        return Err(CliError::config(field, "empty grid"));
    }
    if let Some(v) = grid.iter().find(|&&v| !ok(v)) {
        return Err(CliError::config(field, format!("{v} is out of range")));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::config(field, "grid must be strictly ascending"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn audit_config() -> ExperimentConfig {
        ExperimentConfig {
            command: Some(CommandKind::Audit),
            ..Default::default()
        }
    }

    #[test]
    fn defaults_validate() {
        audit_config().validate().unwrap();
        assert!(ExperimentConfig::default().validate().is_err());
    }

    #[test]
    fn unsorted_grid_is_rejected() {
        let text = r#"{"command": "audit", "epsilons": [0, 2, 1]}"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        let err = cfg.validate().unwrap_err();
        assert!(
            matches!(err, CliError::Config { ref field, .. } if field == "epsilons"),
            "{err}"
        );
        let text = r#"{"command": "audit", "epsilons": [1, 1]}"#;
        assert!(ExperimentConfig::from_json(text).unwrap().validate().is_err());
    }

    #[test]
    fn unknown_fields_and_protocols_are_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"nn": 3}"#).is_err());
        let cfg = ExperimentConfig::from_json(r#"{"command": "run", "protocol": "no-such"}"#).unwrap();
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("common-prelude"), "{err}");
    }

    #[test]
    fn flags_beat_file() {
        let mut cfg = ExperimentConfig::from_json(r#"{"n": 7, "seed": 3, "q": 11}"#).unwrap();
        let ov = Overrides {
            n: Some(9),
            epsilons: Some(vec![0.5, 1.5]),
            ..Default::default()
        };
        cfg.apply(&ov);
        assert_eq!((cfg.n, cfg.seed, cfg.q), (9, 3, Some(11)));
        assert_eq!(cfg.epsilons, vec![0.5, 1.5]);
    }

    #[test]
    fn range_checks_name_the_field() {
        for (text, field) in [
            (r#"{"command": "mc", "n": 0}"#, "n"),
            (r#"{"command": "mc", "alpha": 1.0}"#, "alpha"),
            (r#"{"command": "mc", "deltas": [0.5, 2.0]}"#, "deltas"),
            (r#"{"command": "mc", "q": 1}"#, "q"),
            (r#"{"command": "mc", "trials": 0}"#, "trials"),
        ] {
            let err = ExperimentConfig::from_json(text).unwrap().validate().unwrap_err();
            assert!(
                matches!(err, CliError::Config { field: ref f, .. } if f == field),
                "{text}: {err}"
            );
        }
    }

    fn arb_config() -> impl Strategy<Value = ExperimentConfig> {
        (
            1usize..100,
            1u64..1000,
            proptest::collection::vec(0.0f64..10.0, 1..5),
            any::<u64>(),
            proptest::option::of(2u64..1 << 40),
            proptest::option::of(proptest::collection::vec(0u64..10, 1..6)),
            any::<bool>(),
            0.01f64..0.99,
        )
            .prop_map(|(n, x, mut eps, seed, q, inputs, real, alpha)| {
                eps.sort_by(f64::total_cmp);
                eps.dedup();
                ExperimentConfig {
                    command: Some(CommandKind::Mc),
                    n,
                    x_domain: x,
                    epsilons: eps,
                    seed,
                    q,
                    inputs,
                    alpha,
                    histogram: if real {
                        HistogramMode::Real
                    } else {
                        HistogramMode::Injected
                    },
                    output: Some(PathBuf::from("out/report.json")),
                    ..Default::default()
                }
            })
    }

    proptest! {
        #[test]
        fn json_round_trip(cfg in arb_config()) {
            let back = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
            prop_assert_eq!(back, cfg);
        }
    }
}
