//! The four commands, for every registered protocol.

use std::collections::BTreeMap;

use rand::Rng;
use serde_json::{json, Value};

use shuffle_dp::audit::mc::summarize;
use shuffle_dp::audit::{dp_audit, mi_diagnostic, monte_carlo, AuditConfig, TrialResult, ViewMode};
use shuffle_dp::messaging::channels::{messages_per_party, pairwise_channels_round, ShuffleLayout};
use shuffle_dp::messaging::{pairwise_channels_spec, PayloadRow};
use shuffle_dp::model::protocol::local_outputs;
use shuffle_dp::model::seed::aux_stream;
use shuffle_dp::model::{run_protocol, Input, Outcome, ProtocolSpec};
use shuffle_dp::primitives::{ikos_sum_spec, share_count, smallest_prime_at_least};
use shuffle_dp::protocols::nested::{nested_events, nested_failure_mode, size_warning, split_point, stage_seed};
use shuffle_dp::protocols::prelude::{correctness_warning, default_modulus, prelude_events, prelude_failure_mode};
use shuffle_dp::protocols::toy::{input_ignoring_spec, randomized_response_spec};
use shuffle_dp::protocols::two_round::{decision, hash_range};
use shuffle_dp::protocols::{
    classify, common_prelude_protocol, common_two_round, common_two_round_spec, common_value,
    nested_one_round_protocol, nested_two_round, Candidates, CellProtocol, ElementOutcome, HistogramBackend,
    InjectedHistogram, NestedInput, TwoRoundParams, TwoRoundSolver,
};

use crate::config::{CandidateMode, CommandKind, ExperimentConfig, HistogramMode};
use crate::error::{CliError, CliResult};
use crate::registry::ProtocolName;
use crate::report::{
    AuditResult, InfoResult, McPoint, McResult, ProtocolEntry, Report, Results, RunResult, StageTranscript,
};

/// Validate `cfg` and run its command.
pub fn execute(cfg: &ExperimentConfig) -> CliResult<Report> {
    cfg.validate()?;
    let command = cfg.command.expect("validated");
    let name = cfg.protocol_name()?;
    if !name.supports(command) {
        return Err(CliError::config(
            "command",
            format!("{name} does not support `{}`", command_str(command)),
        ));
    }
    let mut warnings = Vec::new();
    let setup = Setup::new(cfg, name, &mut warnings)?;
    let results = match command {
        CommandKind::Run => Results::Run(setup.run()?),
        CommandKind::Mc => Results::Mc(setup.mc()?),
        CommandKind::Audit => Results::Audit(setup.audit()?),
        CommandKind::Info => Results::Info(setup.info()?),
    };
    Ok(Report {
        tool: crate::report::TOOL,
        version: crate::report::VERSION,
        command,
        seed: cfg.seed,
        config: cfg.clone(),
        warnings,
        results,
    })
}

fn command_str(c: CommandKind) -> &'static str {
    match c {
        CommandKind::Run => "run",
        CommandKind::Mc => "mc",
        CommandKind::Audit => "audit",
        CommandKind::Info => "info",
    }
}

fn elems(xs: &[u64]) -> Vec<Input> {
    xs.iter().map(|&x| Input::Element(x)).collect()
}

fn element_inputs(cfg: &ExperimentConfig, count: usize, domain: u64) -> CliResult<Vec<u64>> {
    let xs = cfg.inputs.clone().unwrap_or_else(|| vec![0; count]);
    if xs.len() != count {
        return Err(CliError::config(
            "inputs",
            format!("{} inputs for {count} parties", xs.len()),
        ));
    }
    if let Some(x) = xs.iter().find(|&&x| x >= domain) {
        return Err(CliError::config(
            "inputs",
            format!("{x} outside domain of size {domain}"),
        ));
    }
    Ok(xs)
}

/// Every vector in `[0, base)^len`, in odometer order.
fn all_vectors(len: usize, base: u64) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..base).map(move |y| {
                    let mut w = v.clone();
                    w.push(y);
                    w
                })
            })
            .collect();
    }
    out
}

fn backend(cfg: &ExperimentConfig) -> HistogramBackend {
    match cfg.histogram {
        HistogramMode::Real => HistogramBackend::Ldp {
            epsilon: cfg.ldp_epsilon,
        },
        HistogramMode::Injected => HistogramBackend::Injected(InjectedHistogram::Exact),
    }
}

fn candidates(cfg: &ExperimentConfig) -> Candidates {
    match cfg.candidates {
        CandidateMode::DomainImage => Candidates::DomainImage,
        CandidateMode::FullRange => Candidates::FullRange,
    }
}

/// Random payload rows of `k` bits for every ordered pair.
fn random_payloads(n: usize, k: usize, seed: u64) -> Vec<PayloadRow> {
    let mut rng = aux_stream("cli-payloads", seed, 0);
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (i != j).then(|| (0..k).map(|_| rng.gen()).collect()))
                .collect()
        })
        .collect()
}

/// Protocol objects built once from the configuration.
enum Built {
    Cells {
        proto: CellProtocol,
        inputs: Vec<Input>,
        expected: Option<u64>,
        nested: Option<NestedInput>,
    },
    TwoRound {
        inputs: Vec<u64>,
    },
    NestedTwoRound {
        input: NestedInput,
    },
    Sum {
        spec: ProtocolSpec,
        inputs: Vec<u64>,
        q: u64,
    },
    Channels {
        spec: ProtocolSpec,
    },
    Toy {
        spec: ProtocolSpec,
        inputs: Vec<Input>,
        domain: Vec<Input>,
    },
}

struct Setup<'a> {
    cfg: &'a ExperimentConfig,
    name: ProtocolName,
    built: Built,
    parameters: BTreeMap<String, Value>,
}

impl<'a> Setup<'a> {
    fn new(cfg: &'a ExperimentConfig, name: ProtocolName, warnings: &mut Vec<String>) -> CliResult<Self> {
        let n = cfg.n;
        let mut parameters = BTreeMap::new();
        let mut param = |k: &str, v: Value| {
            parameters.insert(k.to_string(), v);
        };
        param("n", json!(n));
        let built = match name {
            ProtocolName::CommonPrelude => {
                let q = match cfg.q {
                    Some(q) => q,
                    None => default_modulus(cfg.x_domain as usize)?,
                };
                let shares = cfg.shares.unwrap_or_else(|| share_count(cfg.sigma, q, n));
                warnings.extend(correctness_warning(q, cfg.x_domain as usize));
                let proto = common_prelude_protocol(n, cfg.x_domain, q, shares)?;
                param("q", json!(q));
                param("shares", json!(shares));
                param("cells", json!(proto.dim()));
                param("messages_per_party", json!(proto.dim() * shares));
                let xs = element_inputs(cfg, n, cfg.x_domain)?;
                Built::Cells {
                    proto,
                    inputs: elems(&xs),
                    expected: common_value(&xs),
                    nested: None,
                }
            }
            ProtocolName::NestedOneRound => {
                let input = nested_input(cfg)?;
                let cells = (cfg.x_domain * cfg.y_domain) as usize;
                let q = match cfg.q {
                    Some(q) => q,
                    None => default_modulus(cells)?,
                };
                let shares = cfg.shares.unwrap_or_else(|| share_count(cfg.sigma, q, n));
                warnings.extend(correctness_warning(q, cells));
                warnings.extend(size_warning(input.xs.len(), input.ys.len()));
                let proto =
                    nested_one_round_protocol(input.xs.len(), input.ys.len(), cfg.x_domain, cfg.y_domain, q, shares)?;
                param("q", json!(q));
                param("shares", json!(shares));
                param("cells", json!(cells));
                param("element_holders", json!(input.xs.len()));
                param("vector_holders", json!(input.ys.len()));
                param("messages_per_party", json!(cells * shares));
                Built::Cells {
                    proto,
                    inputs: input.to_inputs(),
                    expected: input.expected(),
                    nested: Some(input),
                }
            }
            ProtocolName::CommonTwoRound => {
                if n < 2 {
                    return Err(CliError::config("n", "common-two-round needs at least two parties"));
                }
                param("hash_range", json!(hash_range(n, cfg.delta(), cfg.range_cap)?));
                param("histogram", json!(cfg.histogram));
                Built::TwoRound {
                    inputs: element_inputs(cfg, n, cfg.x_domain)?,
                }
            }
            ProtocolName::NestedTwoRound => {
                let input = nested_input(cfg)?;
                if input.xs.len() < 2 || input.ys.len() < 2 {
                    return Err(CliError::config("alpha", "both stages need at least two parties"));
                }
                param("element_holders", json!(input.xs.len()));
                param("vector_holders", json!(input.ys.len()));
                param(
                    "first_stage_hash_range",
                    json!(hash_range(input.xs.len(), cfg.delta(), cfg.range_cap)?),
                );
                param(
                    "second_stage_hash_range",
                    json!(hash_range(input.ys.len(), cfg.delta(), cfg.range_cap)?),
                );
                Built::NestedTwoRound { input }
            }
            ProtocolName::IkosSum => {
                let q = match cfg.q {
                    Some(q) => q,
                    None => smallest_prime_at_least(cfg.x_domain.max(2))?,
                };
                if cfg.x_domain > q {
                    return Err(CliError::config(
                        "x_domain",
                        format!("{} exceeds q = {q}", cfg.x_domain),
                    ));
                }
                let shares = cfg.shares.unwrap_or_else(|| share_count(cfg.sigma, q, n));
                param("q", json!(q));
                param("shares", json!(shares));
                Built::Sum {
                    spec: ikos_sum_spec(n, q, 1, shares)?,
                    inputs: element_inputs(cfg, n, cfg.x_domain)?,
                    q,
                }
            }
            ProtocolName::PairwiseChannels => {
                param("k", json!(cfg.k));
                if n >= 2 {
                    param("messages_per_party", json!(messages_per_party(n, cfg.k)));
                }
                Built::Channels {
                    spec: pairwise_channels_spec(n, cfg.k)?,
                }
            }
            ProtocolName::InputIgnoring => {
                param("messages_per_party", json!(cfg.k));
                let xs = element_inputs(cfg, n, cfg.x_domain)?;
                Built::Toy {
                    spec: input_ignoring_spec(n, cfg.k)?,
                    inputs: elems(&xs),
                    domain: elems(&(0..cfg.x_domain).collect::<Vec<_>>()),
                }
            }
            ProtocolName::RandomizedResponse => {
                param("epsilon", json!(cfg.ldp_epsilon));
                let xs = element_inputs(cfg, n, 2)?;
                Built::Toy {
                    spec: randomized_response_spec(n, cfg.ldp_epsilon)?,
                    inputs: elems(&xs),
                    domain: elems(&[0, 1]),
                }
            }
        };
        Ok(Setup {
            cfg,
            name,
            built,
            parameters,
        })
    }

    fn two_round_params(&self, n: usize, domain: u64, delta: f64) -> TwoRoundParams {
        TwoRoundParams {
            n,
            domain,
            delta,
            range_cap: self.cfg.range_cap,
            backend: backend(self.cfg),
            candidates: candidates(self.cfg),
        }
    }

    fn solver(&self, delta: f64) -> TwoRoundSolver {
        TwoRoundSolver {
            delta,
            backend: backend(self.cfg),
            candidates: candidates(self.cfg),
            range_cap: self.cfg.range_cap,
        }
    }

    fn run(&self) -> CliResult<RunResult> {
        let cfg = self.cfg;
        let seed = cfg.seed;
        let stage = |name: &str, seed: u64, t: &shuffle_dp::model::Transcript| StageTranscript {
            stage: name.to_string(),
            seed,
            transcript: t.into(),
        };
        let mut details = BTreeMap::new();
        let (outcome, expected, transcripts) = match &self.built {
            Built::Cells {
                proto,
                inputs,
                expected,
                ..
            } => {
                let t = proto.run(inputs, seed)?;
                (t.outcome.clone(), *expected, vec![stage("main", seed, &t)])
            }
            Built::TwoRound { inputs } => {
                let (_, t) = common_two_round(
                    inputs,
                    cfg.x_domain,
                    cfg.delta(),
                    backend(cfg),
                    candidates(cfg),
                    cfg.range_cap,
                    seed,
                )?;
                let d = decision(&self.two_round_params(inputs.len(), cfg.x_domain, cfg.delta()), &t)?;
                details.insert("heaviest_hash".into(), json!(d.heaviest));
                details.insert("heaviest_estimate".into(), json!(d.estimate));
                (t.outcome.clone(), common_value(inputs), vec![stage("main", seed, &t)])
            }
            Built::NestedTwoRound { input } => {
                let s = self.solver(cfg.delta());
                let r = nested_two_round(input, &s, &s, seed)?;
                let mut stages = Vec::new();
                let s0 = stage_seed(seed, 0);
                let (_, t0) = common_two_round(
                    &input.xs,
                    input.x_domain,
                    cfg.delta(),
                    backend(cfg),
                    candidates(cfg),
                    cfg.range_cap,
                    s0,
                )?;
                if t0.outcome != r.first {
                    return Err(CliError::Internal("first stage does not replay".into()));
                }
                stages.push(stage("find-x", s0, &t0));
                if let Some(column) = &r.column {
                    let s1 = stage_seed(seed, 1);
                    let (_, t1) = common_two_round(
                        column,
                        input.y_domain,
                        cfg.delta(),
                        backend(cfg),
                        candidates(cfg),
                        cfg.range_cap,
                        s1,
                    )?;
                    if Some(&t1.outcome) != r.second.as_ref() {
                        return Err(CliError::Internal("second stage does not replay".into()));
                    }
                    stages.push(stage("find-y", s1, &t1));
                    details.insert("column".into(), json!(column));
                }
                (r.outcome, input.expected(), stages)
            }
            Built::Sum { spec, inputs, q } => {
                let t = run_protocol(spec, &sum_inputs(inputs), seed)?;
                let want = inputs.iter().fold(0u64, |a, &x| (a + x) % q);
                details.insert("exact_sum".into(), json!(want));
                (t.outcome.clone(), Some(want), vec![stage("main", seed, &t)])
            }
            Built::Channels { spec } => {
                let payloads = random_payloads(cfg.n, cfg.k, seed);
                let inputs: Vec<Input> = payloads.iter().cloned().map(Input::Payloads).collect();
                let t = run_protocol(spec, &inputs, seed)?;
                let received = local_outputs(spec, &t)?;
                let delivered = received.iter().enumerate().all(
                    |(j, o)| matches!(o, Some(Outcome::Payloads(row)) if (0..cfg.n).all(|i| row[i] == payloads[i][j])),
                );
                details.insert("received".into(), json!(received));
                details.insert("all_delivered".into(), json!(delivered));
                (t.outcome.clone(), None, vec![stage("main", seed, &t)])
            }
            Built::Toy { spec, inputs, .. } => {
                let t = run_protocol(spec, inputs, seed)?;
                (t.outcome.clone(), None, vec![stage("main", seed, &t)])
            }
        };
        let classified = match (&self.built, &outcome) {
            (Built::Sum { .. }, Outcome::Values(v)) => Some(match (v.first(), expected) {
                (Some(&s), Some(e)) if s == e => ElementOutcome::Found(s),
                _ => ElementOutcome::Fail,
            }),
            (Built::Channels { .. } | Built::Toy { .. }, _) => None,
            _ => Some(classify(&outcome, expected)),
        };
        Ok(RunResult {
            outcome,
            classified,
            expected,
            transcripts,
            details,
        })
    }

    fn mc(&self) -> CliResult<McResult> {
        let cfg = self.cfg;
        let (trials, base) = (cfg.trials, cfg.seed);
        let mut failure_bounds = BTreeMap::new();
        let mut sweep = Vec::new();
        let expected = match &self.built {
            Built::Cells {
                proto,
                inputs,
                expected,
                nested,
            } => {
                if nested.is_none() {
                    failure_bounds.insert("noise-branch".into(), 1.0 / 8.0);
                    failure_bounds.insert("nobody-participated".into(), 4f64.powi(-(cfg.n as i32)));
                    failure_bounds.insert("accidental-zero".into(), cfg.x_domain as f64 / proto.modulus() as f64);
                }
                let summary = monte_carlo(trials, base, |s| {
                    let tr = proto.trial(inputs, s)?;
                    let outcome = classify(&tr.outcome, *expected);
                    let failure_mode = match (outcome, expected, nested) {
                        (ElementOutcome::Found(_), _, _) | (_, None, _) => None,
                        (_, Some(c), None) => Some(prelude_failure_mode(&prelude_events(&tr, *c))),
                        (_, Some(_), Some(input)) => Some(nested_failure_mode(&nested_events(&tr, input))),
                    };
                    Ok(TrialResult { outcome, failure_mode })
                })?;
                sweep.push(McPoint { delta: None, summary });
                *expected
            }
            Built::TwoRound { inputs } => {
                let expected = common_value(inputs);
                for &delta in &cfg.deltas {
                    let summary = monte_carlo(trials, base, |s| {
                        let (o, _) = common_two_round(
                            inputs,
                            cfg.x_domain,
                            delta,
                            backend(cfg),
                            candidates(cfg),
                            cfg.range_cap,
                            s,
                        )?;
                        Ok(o.into())
                    })?;
                    sweep.push(McPoint {
                        delta: Some(delta),
                        summary,
                    });
                }
                expected
            }
            Built::NestedTwoRound { input } => {
                for &delta in &cfg.deltas {
                    let s = self.solver(delta);
                    let summary = monte_carlo(trials, base, |seed| {
                        let r = nested_two_round(input, &s, &s, seed)?;
                        Ok(classify(&r.outcome, input.expected()).into())
                    })?;
                    sweep.push(McPoint {
                        delta: Some(delta),
                        summary,
                    });
                }
                input.expected()
            }
            Built::Sum { spec, inputs, q } => {
                let want = inputs.iter().fold(0u64, |a, &x| (a + x) % q);
                let xs = sum_inputs(inputs);
                let summary = monte_carlo(trials, base, |s| {
                    let t = run_protocol(spec, &xs, s)?;
                    Ok(match t.outcome {
                        Outcome::Values(v) if v == [want] => ElementOutcome::Found(want),
                        _ => ElementOutcome::Fail,
                    }
                    .into())
                })?;
                sweep.push(McPoint { delta: None, summary });
                Some(want)
            }
            Built::Channels { .. } => {
                let (n, k) = (cfg.n, cfg.k);
                let results = (0..trials)
                    .map(|idx| {
                        let s = shuffle_dp::audit::mc::trial_seed(base, idx);
                        let payloads = random_payloads(n, k, s);
                        let got = pairwise_channels_round(&payloads, k, ShuffleLayout::Global, s)?;
                        let ok = (0..n).all(|j| (0..n).all(|i| got[j][i] == payloads[i][j]));
                        Ok(if ok {
                            ElementOutcome::Found(0)
                        } else {
                            ElementOutcome::Fail
                        }
                        .into())
                    })
                    .collect::<shuffle_dp::Result<Vec<TrialResult>>>()?;
                sweep.push(McPoint {
                    delta: None,
                    summary: summarize(trials, base, &results)?,
                });
                None
            }
            Built::Toy { .. } => unreachable!("registry rejects mc for toys"),
        };
        Ok(McResult {
            expected,
            failure_bounds,
            sweep,
        })
    }

    fn audit(&self) -> CliResult<AuditResult> {
        let cfg = self.cfg;
        let mut audit_cfg = AuditConfig {
            epsilons: cfg.epsilons.clone(),
            coalition_cap: cfg.coalition_cap,
            extra_coalitions: cfg.extra_coalitions.clone(),
            mode: ViewMode::FullShuffle,
            seed: cfg.seed,
            budget: cfg.budget as u128,
        };
        let elements = |d: u64| elems(&(0..d).collect::<Vec<_>>());
        let (spec, domains) = match &self.built {
            Built::Cells { proto, nested, .. } => {
                audit_cfg.mode = ViewMode::IdealSum;
                let domains = match nested {
                    None => vec![elements(cfg.x_domain); cfg.n],
                    Some(input) => {
                        let vectors: Vec<Input> = all_vectors(cfg.x_domain as usize, cfg.y_domain)
                            .into_iter()
                            .map(Input::Vector)
                            .collect();
                        let mut d = vec![elements(cfg.x_domain); input.xs.len()];
                        d.extend(vec![vectors; input.ys.len()]);
                        d
                    }
                };
                (proto.spec()?, domains)
            }
            Built::TwoRound { inputs } => (
                common_two_round_spec(self.two_round_params(inputs.len(), cfg.x_domain, cfg.delta()))?,
                vec![elements(cfg.x_domain); cfg.n],
            ),
            Built::Sum { spec, .. } => (
                spec.clone(),
                vec![(0..cfg.x_domain).map(|x| Input::Vector(vec![x])).collect(); cfg.n],
            ),
            Built::Channels { spec } => {
                let row = |bit: bool, i: usize| -> Input {
                    Input::Payloads((0..cfg.n).map(|j| (i != j).then(|| vec![bit; cfg.k])).collect())
                };
                let domains = (0..cfg.n).map(|i| vec![row(false, i), row(true, i)]).collect();
                (spec.clone(), domains)
            }
            Built::Toy { spec, domain, .. } => (spec.clone(), vec![domain.clone(); cfg.n]),
            Built::NestedTwoRound { .. } => unreachable!("registry rejects audit for nested-two-round"),
        };
        let report = dp_audit(&spec, &domains, &audit_cfg)?;
        let (delta_prime, composition) = if audit_cfg.mode == ViewMode::IdealSum {
            let dp = 2f64.powi(-(cfg.sigma as i32));
            (Some(dp), Some(report.compose(dp)?))
        } else {
            (None, None)
        };
        Ok(AuditResult {
            report,
            delta_prime,
            composition,
        })
    }

    fn info(&self) -> CliResult<InfoResult> {
        let cfg = self.cfg;
        let registry = ProtocolName::ALL
            .into_iter()
            .map(|p| ProtocolEntry {
                name: p,
                description: p.description(),
                commands: [CommandKind::Run, CommandKind::Mc, CommandKind::Audit, CommandKind::Info]
                    .into_iter()
                    .filter(|&c| p.supports(c))
                    .collect(),
            })
            .collect();
        let mi = if cfg.mi {
            let eps = cfg.ldp_epsilon;
            let (spec, domain) = match &self.built {
                Built::Cells {
                    proto, nested: None, ..
                } => (proto.spec()?, elems(&(0..cfg.x_domain).collect::<Vec<_>>())),
                Built::Sum { spec, .. } => (
                    spec.clone(),
                    (0..cfg.x_domain).map(|x| Input::Vector(vec![x])).collect(),
                ),
                Built::Toy { spec, domain, .. } => (spec.clone(), domain.clone()),
                _ => {
                    return Err(CliError::config(
                        "mi",
                        format!("{} has no single-round element randomizer", self.name),
                    ))
                }
            };
            Some(mi_diagnostic(&spec, 0, &domain, eps, cfg.delta(), cfg.seed)?)
        } else {
            None
        };
        Ok(InfoResult {
            registry,
            protocol: self.name,
            parameters: self.parameters.clone(),
            mi,
        })
    }
}

fn sum_inputs(xs: &[u64]) -> Vec<Input> {
    xs.iter().map(|&x| Input::Vector(vec![x])).collect()
}

fn nested_input(cfg: &ExperimentConfig) -> CliResult<NestedInput> {
    let k = split_point(cfg.alpha, cfg.n)?;
    if k == 0 || k == cfg.n {
        return Err(CliError::config(
            "alpha",
            format!("split of {} parties leaves a side empty", cfg.n),
        ));
    }
    let xs = element_inputs(cfg, k, cfg.x_domain)?;
    let ys = cfg
        .vectors
        .clone()
        .unwrap_or_else(|| vec![vec![0; cfg.x_domain as usize]; cfg.n - k]);
    if ys.len() != cfg.n - k {
        return Err(CliError::config(
            "vectors",
            format!("{} vectors for {} vector holders", ys.len(), cfg.n - k),
        ));
    }
    NestedInput::new(cfg.x_domain, cfg.y_domain, xs, ys).map_err(|e| CliError::config("vectors", e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(command: CommandKind, protocol: ProtocolName) -> ExperimentConfig {
        ExperimentConfig {
            command: Some(command),
            protocol: protocol.as_str().into(),
            ..Default::default()
        }
    }

    #[test]
    fn odometer() {
        assert_eq!(all_vectors(2, 2), vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(all_vectors(0, 3), vec![Vec::<u64>::new()]);
    }

    #[test]
    fn run_every_protocol() {
        for p in ProtocolName::ALL {
            let mut c = cfg(CommandKind::Run, p);
            if matches!(p, ProtocolName::NestedTwoRound) {
                c.n = 6;
            }
            if matches!(p, ProtocolName::CommonPrelude | ProtocolName::NestedOneRound) {
                c.sigma = 4;
            }
            if p == ProtocolName::PairwiseChannels {
                c.n = 3;
                c.k = 2;
            }
            let r = execute(&c).unwrap_or_else(|e| panic!("{p}: {e}"));
            let Results::Run(run) = r.results else { panic!() };
            assert!(!run.transcripts.is_empty());
            if p == ProtocolName::PairwiseChannels {
                assert_eq!(run.details["all_delivered"], json!(true));
            }
            if p == ProtocolName::IkosSum {
                assert_eq!(run.classified, Some(ElementOutcome::Found(0)));
            }
        }
    }

    #[test]
    fn mc_counts_sum_to_trials() {
        for p in [
            ProtocolName::CommonPrelude,
            ProtocolName::NestedOneRound,
            ProtocolName::CommonTwoRound,
            ProtocolName::IkosSum,
            ProtocolName::PairwiseChannels,
        ] {
            let mut c = cfg(CommandKind::Mc, p);
            c.trials = 1;
            c.sigma = 4;
            let Results::Mc(m) = execute(&c).unwrap().results else {
                panic!()
            };
            let s = &m.sweep[0].summary;
            assert_eq!(s.found + s.bottom + s.fail, 1, "{p}");
        }
    }

    #[test]
    fn input_ignoring_audit_is_zero() {
        let mut c = cfg(CommandKind::Audit, ProtocolName::InputIgnoring);
        c.n = 3;
        c.k = 1;
        let Results::Audit(a) = execute(&c).unwrap().results else {
            panic!()
        };
        assert!(!a.report.rows.is_empty());
        assert!(a
            .report
            .rows
            .iter()
            .all(|r| r.deltas.iter().all(|d| d.is_zero().unwrap())));
        assert!(a.composition.is_none());
    }

    #[test]
    fn prelude_audit_composes() {
        let mut c = cfg(CommandKind::Audit, ProtocolName::CommonPrelude);
        c.n = 2;
        c.q = Some(3);
        c.shares = Some(1);
        c.sigma = 10;
        c.coalition_cap = 1;
        let Results::Audit(a) = execute(&c).unwrap().results else {
            panic!()
        };
        let comp = a.composition.unwrap();
        assert_eq!(comp.len(), c.epsilons.len());
        assert_eq!(a.delta_prime, Some(2f64.powi(-10)));
    }

    #[test]
    fn errors_map_to_exit_codes() {
        let mut c = cfg(CommandKind::Audit, ProtocolName::NestedTwoRound);
        assert_eq!(execute(&c).unwrap_err().exit_code(), 2);
        c = cfg(CommandKind::Audit, ProtocolName::PairwiseChannels);
        c.n = 2;
        c.k = 1;
        c.budget = 1000;
        assert_eq!(execute(&c).unwrap_err().exit_code(), 3);
        c = cfg(CommandKind::Run, ProtocolName::CommonPrelude);
        c.inputs = Some(vec![0, 1, 5, 0]);
        let err = execute(&c).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("inputs"));
    }

    #[test]
    fn info_reports_mi_when_asked() {
        let mut c = cfg(CommandKind::Info, ProtocolName::RandomizedResponse);
        c.mi = true;
        c.n = 1;
        let Results::Info(i) = execute(&c).unwrap().results else {
            panic!()
        };
        assert_eq!(i.registry.len(), ProtocolName::ALL.len());
        assert!(i.mi.unwrap().measured > 0.0);
    }
}
