//! Report files. Nothing time- or machine-dependent goes in, so equal
//! configurations give equal bytes.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use shuffle_dp::audit::dp::Composition;
use shuffle_dp::audit::{AuditReport, McSummary, MiDiagnostic};
use shuffle_dp::model::{ChannelOutput, Outcome, Transcript};
use shuffle_dp::protocols::ElementOutcome;

use crate::config::{CommandKind, ExperimentConfig};
use crate::error::{CliError, CliResult};
use crate::registry::ProtocolName;

pub const TOOL: &str = "shuffle-dp";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: CommandKind,
    pub seed: u64,
    /// The resolved configuration, after overrides.
    pub config: ExperimentConfig,
    pub warnings: Vec<String>,
    pub results: Results,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Results {
    Run(RunResult),
    Mc(McResult),
    Audit(AuditResult),
    Info(InfoResult),
}

#[derive(Clone, Debug, Serialize)]
pub struct RunResult {
    pub outcome: Outcome,
    /// The outcome judged against the required answer, where there is one.
    pub classified: Option<ElementOutcome>,
    pub expected: Option<u64>,
    pub transcripts: Vec<StageTranscript>,
    /// Protocol-specific facts about the run.
    pub details: BTreeMap<String, serde_json::Value>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StageTranscript {
    pub stage: String,
    pub seed: u64,
    pub transcript: TranscriptDump,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChannelDump {
    pub kind: &'static str,
    /// Message bytes in hex, in channel order.
    pub messages: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TranscriptDump {
    pub w_hex: String,
    pub inputs: Vec<shuffle_dp::model::Input>,
    /// `tapes[party][round]`: recorded draws.
    pub tapes: Vec<Vec<Vec<u64>>>,
    pub channel_outputs: Vec<ChannelDump>,
    pub outcome: Outcome,
    /// Canonical binary encoding, hex.
    pub encoded_hex: String,
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

impl From<&Transcript> for TranscriptDump {
    fn from(t: &Transcript) -> Self {
        TranscriptDump {
            w_hex: hex(&t.w),
            inputs: t.inputs.clone(),
            tapes: t
                .tapes
                .iter()
                .map(|rounds| rounds.iter().map(|tape| tape.draws().to_vec()).collect())
                .collect(),
            channel_outputs: t
                .channel_outputs
                .iter()
                .map(|c| ChannelDump {
                    kind: match c {
                        ChannelOutput::Shuffle(_) => "shuffle",
                        ChannelOutput::Public(_) => "public",
                    },
                    messages: c.messages().iter().map(|m| hex(m.as_bytes())).collect(),
                })
                .collect(),
            outcome: t.outcome.clone(),
            encoded_hex: hex(&t.encode()),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct McPoint {
    /// The delta of this sweep point, for protocols that take one.
    pub delta: Option<f64>,
    pub summary: McSummary,
}

#[derive(Clone, Debug, Serialize)]
pub struct McResult {
    pub expected: Option<u64>,
    /// Proof bounds on each failure mode, where known.
    pub failure_bounds: BTreeMap<String, f64>,
    pub sweep: Vec<McPoint>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditResult {
    pub report: AuditReport,
    /// Error of the real summation, when the audit used the ideal one.
    pub delta_prime: Option<f64>,
    pub composition: Option<Vec<Composition>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProtocolEntry {
    pub name: ProtocolName,
    pub description: &'static str,
    pub commands: Vec<CommandKind>,
}

#[derive(Clone, Debug, Serialize)]
pub struct InfoResult {
    pub registry: Vec<ProtocolEntry>,
    pub protocol: ProtocolName,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub mi: Option<MiDiagnostic>,
}

impl Report {
    pub fn to_json(&self) -> CliResult<Vec<u8>> {
        let mut out = serde_json::to_vec_pretty(self).map_err(|e| CliError::Internal(e.to_string()))?;
        out.push(b'\n');
        Ok(out)
    }

    /// One table per command: audit maxima, Monte Carlo sweep points, the
    /// run outcome, or the derived parameters.
    pub fn to_csv(&self) -> CliResult<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| CliError::Internal(e.to_string());
        match &self.results {
            Results::Audit(a) => {
                w.write_record(["coalition_size", "epsilon", "delta", "delta_a", "delta_b"])
                    .map_err(err)?;
                for m in &a.report.maxima {
                    for d in &m.deltas {
                        w.write_record([
                            m.coalition_size.to_string(),
                            d.epsilon.to_string(),
                            shuffle_dp::audit::exact::format_float(d.to_f64()),
                            d.a.to_string(),
                            d.b.to_string(),
                        ])
                        .map_err(err)?;
                    }
                }
            }
            Results::Mc(m) => {
                w.write_record([
                    "delta",
                    "trials",
                    "found",
                    "bottom",
                    "fail",
                    "success_rate",
                    "ci_low",
                    "ci_high",
                ])
                .map_err(err)?;
                for p in &m.sweep {
                    let s = &p.summary;
                    w.write_record([
                        p.delta.map(|d| d.to_string()).unwrap_or_default(),
                        s.trials.to_string(),
                        s.found.to_string(),
                        s.bottom.to_string(),
                        s.fail.to_string(),
                        s.success_rate.to_string(),
                        s.ci_low.to_string(),
                        s.ci_high.to_string(),
                    ])
                    .map_err(err)?;
                }
            }
            Results::Run(r) => {
                w.write_record(["outcome", "classified", "expected"]).map_err(err)?;
                w.write_record([
                    compact(&r.outcome),
                    r.classified.as_ref().map(compact).unwrap_or_default(),
                    r.expected.map(|e| e.to_string()).unwrap_or_default(),
                ])
                .map_err(err)?;
            }
            Results::Info(i) => {
                w.write_record(["parameter", "value"]).map_err(err)?;
                for (k, v) in &i.parameters {
                    w.write_record([k.clone(), v.to_string()]).map_err(err)?;
                }
            }
        }
        w.into_inner().map_err(|e| CliError::Internal(e.to_string()))
    }

    /// Write the JSON report (stdout when no path is configured) and the
    /// CSV table when one is configured.
    pub fn emit(&self) -> CliResult<()> {
        let json = self.to_json()?;
        match &self.config.output {
            Some(p) => write_file(p, &json)?,
            None => {
                use std::io::Write;
                std::io::stdout()
                    .write_all(&json)
                    .map_err(|e| CliError::Internal(e.to_string()))?;
            }
        }
        if let Some(p) = &self.config.csv {
            write_file(p, &self.to_csv()?)?;
        }
        Ok(())
    }
}

fn compact<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).unwrap_or_default()
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let wrap = |source| CliError::Write {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(wrap)?;
    }
    std::fs::write(path, bytes).map_err(wrap)
}
