//! Monte Carlo estimation of protocol correctness.

use std::collections::BTreeMap;

use rand::RngCore;
use rayon::prelude::*;
use serde::Serialize;

use super::stats::clopper_pearson;
use crate::model::seed::aux_stream;
use crate::protocols::ElementOutcome;
use crate::Result;

/// Result of one trial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrialResult {
    pub outcome: ElementOutcome,
    /// Why the trial did not succeed, when the protocol can tell.
    pub failure_mode: Option<&'static str>,
}

impl From<ElementOutcome> for TrialResult {
    fn from(outcome: ElementOutcome) -> Self {
        TrialResult {
            outcome,
            failure_mode: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McSummary {
    pub trials: u64,
    pub base_seed: u64,
    pub found: u64,
    pub bottom: u64,
    pub fail: u64,
    /// `found / trials`.
    pub success_rate: f64,
    /// 95% Clopper-Pearson interval on the success rate.
    pub ci_low: f64,
    pub ci_high: f64,
    pub failure_modes: BTreeMap<String, u64>,
}

/// Seed of trial `index`.
pub fn trial_seed(base_seed: u64, index: u64) -> u64 {
    aux_stream("mc-trial", base_seed, index).next_u64()
}

/// Run `trials` independent trials in parallel; trial `k` receives
/// `trial_seed(base_seed, k)`. Counts do not depend on scheduling.
pub fn monte_carlo<F>(trials: u64, base_seed: u64, trial: F) -> Result<McSummary>
where
    F: Fn(u64) -> Result<TrialResult> + Sync,
{
    let results: Vec<TrialResult> = (0..trials)
        .into_par_iter()
        .map(|k| trial(trial_seed(base_seed, k)))
        .collect::<Result<_>>()?;
    summarize(trials, base_seed, &results)
}

pub fn summarize(trials: u64, base_seed: u64, results: &[TrialResult]) -> Result<McSummary> {
    let (mut found, mut bottom, mut fail) = (0, 0, 0);
    let mut failure_modes = BTreeMap::new();
    for r in results {
        match r.outcome {
            ElementOutcome::Found(_) => found += 1,
            ElementOutcome::Bottom => bottom += 1,
            ElementOutcome::Fail => fail += 1,
        }
        if let Some(m) = r.failure_mode {
            *failure_modes.entry(m.to_string()).or_default() += 1;
        }
    }
    let (ci_low, ci_high) = clopper_pearson(found, trials, 0.05)?;
    Ok(McSummary {
        trials,
        base_seed,
        found,
        bottom,
        fail,
        success_rate: found as f64 / trials as f64,
        ci_low,
        ci_high,
        failure_modes,
    })
}
