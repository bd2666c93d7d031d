//! Exhaustive `(eps, delta)` audits over neighbouring inputs and coalitions.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::dist::ExactDistribution;
use super::exact::{format_float, hockey_stick_exact, ExactDelta};
use super::view::{ViewEnumerator, ViewMode, DEFAULT_BUDGET};
use crate::model::{Input, ProtocolSpec};
use crate::{Error, Result};

/// Stated in every report header.
pub const FINITE_OUTCOME_NOTE: &str =
    "all audited outcome spaces are finite, so the hockey-stick sum is the least delta over all events";

#[derive(Clone, Debug, PartialEq)]
pub struct AuditConfig {
    /// Ascending, non-negative.
    pub epsilons: Vec<f64>,
    /// Every coalition of at most this many parties is audited.
    pub coalition_cap: usize,
    pub extra_coalitions: Vec<Vec<usize>>,
    pub mode: ViewMode,
    /// Selects the public string the audit conditions on.
    pub seed: u64,
    pub budget: u128,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig {
            epsilons: vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0],
            coalition_cap: 2,
            extra_coalitions: Vec::new(),
            mode: ViewMode::FullShuffle,
            seed: 0,
            budget: DEFAULT_BUDGET,
        }
    }
}

impl AuditConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epsilons.is_empty() {
            return Err(Error::param("epsilons", "empty grid"));
        }
        for w in self.epsilons.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::param("epsilons", "grid must be strictly ascending"));
            }
        }
        if !(self.epsilons[0] >= 0.0) || !self.epsilons.iter().all(|e| e.is_finite()) {
            return Err(Error::param("epsilons", "values must be finite and non-negative"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditRow {
    pub party: usize,
    pub coalition: Vec<usize>,
    pub inputs: Vec<Input>,
    /// Replaces `inputs[party]` in the neighbouring vector.
    pub neighbor: Input,
    /// One entry per grid point.
    pub deltas: Vec<ExactDelta>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SizeMaximum {
    pub coalition_size: usize,
    pub deltas: Vec<ExactDelta>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Composition {
    pub epsilon: f64,
    pub delta_ideal: String,
    pub delta_prime: String,
    /// `(e^eps + 1) * delta_prime + delta_ideal`.
    pub delta_total: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditReport {
    pub protocol: String,
    pub n: usize,
    pub mode: ViewMode,
    pub seed: u64,
    pub w_hex: String,
    pub version: &'static str,
    pub note: &'static str,
    pub epsilons: Vec<f64>,
    pub coalition_cap: usize,
    pub coalitions: Vec<Vec<usize>>,
    /// Coalition inputs do not affect single-round divergences; those rows
    /// fix them to each party's first domain value.
    pub honest_part_reduction: bool,
    pub rows: Vec<AuditRow>,
    pub maxima: Vec<SizeMaximum>,
    pub monotone_in_epsilon: bool,
}

impl AuditReport {
    /// Largest delta over all rows at grid point `k`.
    pub fn overall(&self, k: usize) -> Result<ExactDelta> {
        let mut best = ExactDelta::zero(self.epsilons[k]);
        for m in &self.maxima {
            best = best.max(m.deltas[k].clone())?;
        }
        Ok(best)
    }

    /// End-to-end delta per grid point when the ideal summation is replaced
    /// by a real one with error `delta_prime`.
    pub fn compose(&self, delta_prime: f64) -> Result<Vec<Composition>> {
        (0..self.epsilons.len())
            .map(|k| {
                let eps = self.epsilons[k];
                let ideal = self.overall(k)?.to_f64();
                Ok(Composition {
                    epsilon: eps,
                    delta_ideal: format_float(ideal),
                    delta_prime: format_float(delta_prime),
                    delta_total: format_float(composed_delta(eps, ideal, delta_prime)),
                })
            })
            .collect()
    }
}

pub fn composed_delta(epsilon: f64, delta_ideal: f64, delta_prime: f64) -> f64 {
    (epsilon.exp() + 1.0) * delta_prime + delta_ideal
}

/// All subsets of `0..n` with at most `cap` members, by size then
/// lexicographically.
pub fn coalitions_up_to(n: usize, cap: usize) -> Vec<Vec<usize>> {
    fn extend(start: usize, n: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for p in start..n {
            cur.push(p);
            extend(p + 1, n, size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for size in 0..=cap.min(n) {
        extend(0, n, size, &mut Vec::new(), &mut out);
    }
    out
}

/// Every assignment of `domains[p]` to the listed parties, in odometer order.
fn assignments(parties: &[usize], domains: &[Vec<Input>]) -> Vec<Vec<(usize, Input)>> {
    let mut out = vec![Vec::new()];
    for &p in parties {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                domains[p].iter().map(move |x| {
                    let mut v = prefix.clone();
                    v.push((p, x.clone()));
                    v
                })
            })
            .collect();
    }
    out
}

struct Job {
    party: usize,
    coalition: Vec<usize>,
    inputs: Vec<Input>,
    neighbor: Input,
}

fn plan(spec: &ProtocolSpec, domains: &[Vec<Input>], coalitions: &[Vec<usize>], reduce: bool) -> Vec<Job> {
    let n = spec.n;
    let mut jobs = Vec::new();
    for coalition in coalitions {
        let members: BTreeSet<usize> = coalition.iter().copied().collect();
        for party in (0..n).filter(|p| !members.contains(p)) {
            let free: Vec<usize> = (0..n)
                .filter(|&p| p != party && !(reduce && members.contains(&p)))
                .collect();
            for assignment in assignments(&free, domains) {
                let mut base: Vec<Input> = domains.iter().map(|d| d[0].clone()).collect();
                for (p, x) in assignment {
                    base[p] = x;
                }
                let dom = &domains[party];
                for a in 0..dom.len() {
                    for b in a + 1..dom.len() {
                        let mut inputs = base.clone();
                        inputs[party] = dom[a].clone();
                        jobs.push(Job {
                            party,
                            coalition: coalition.clone(),
                            inputs,
                            neighbor: dom[b].clone(),
                        });
                    }
                }
            }
        }
    }
    jobs
}

/// Exact hockey-stick divergence between the views of every coalition on
/// every pair of neighbouring inputs drawn from `domains`, over a grid of
/// `eps`. Views are conditioned on the public string of `config.seed`.
pub fn dp_audit(spec: &ProtocolSpec, domains: &[Vec<Input>], config: &AuditConfig) -> Result<AuditReport> {
    config.validate()?;
    let n = spec.n;
    if domains.len() != n {
        return Err(Error::param(
            "domains",
            format!("{} domains for {n} parties", domains.len()),
        ));
    }
    if let Some(p) = domains.iter().position(|d| d.is_empty()) {
        return Err(Error::param("domains", format!("party {p} has an empty domain")));
    }
    let mut coalitions = coalitions_up_to(n, config.coalition_cap);
    for extra in &config.extra_coalitions {
        let mut c = extra.clone();
        c.sort_unstable();
        c.dedup();
        if let Some(&bad) = c.iter().find(|&&p| p >= n) {
            return Err(Error::param("coalitions", format!("party {bad} not in [0, {n})")));
        }
        if !coalitions.contains(&c) {
            coalitions.push(c);
        }
    }

    let enumerator = ViewEnumerator::new(spec, config.mode, config.seed, config.budget)?;
    let reduce = spec.rounds.len() == 1;
    let jobs = plan(spec, domains, &coalitions, reduce);

    let mut needed: BTreeSet<(Vec<usize>, Vec<Input>)> = BTreeSet::new();
    for j in &jobs {
        needed.insert((j.coalition.clone(), j.inputs.clone()));
        let mut other = j.inputs.clone();
        other[j.party] = j.neighbor.clone();
        needed.insert((j.coalition.clone(), other));
    }
    let needed: Vec<_> = needed.into_iter().collect();
    let computed: Vec<Arc<ExactDistribution>> = needed
        .par_iter()
        .map(|(c, x)| {
            let members: BTreeSet<usize> = c.iter().copied().collect();
            let d = if reduce {
                enumerator.honest_part_distribution(x, &members)?
            } else {
                enumerator.view_distribution(x, &members)?
            };
            Ok(Arc::new(d))
        })
        .collect::<Result<_>>()?;
    let dists: BTreeMap<_, _> = needed.into_iter().zip(computed).collect();

    let rows: Vec<AuditRow> = jobs
        .into_par_iter()
        .map(|j| {
            let mut other = j.inputs.clone();
            other[j.party] = j.neighbor.clone();
            let p = &dists[&(j.coalition.clone(), j.inputs.clone())];
            let q = &dists[&(j.coalition.clone(), other)];
            let deltas = config
                .epsilons
                .iter()
                .map(|&eps| hockey_stick_exact(p.weights(), q.weights(), eps))
                .collect::<Result<Vec<_>>>()?;
            Ok(AuditRow {
                party: j.party,
                coalition: j.coalition,
                inputs: j.inputs,
                neighbor: j.neighbor,
                deltas,
            })
        })
        .collect::<Result<_>>()?;

    let mut monotone = true;
    for r in &rows {
        for w in r.deltas.windows(2) {
            if w[1].cmp_exact(&w[0])? == Ordering::Greater {
                monotone = false;
            }
        }
    }
    let mut by_size: BTreeMap<usize, Vec<ExactDelta>> = BTreeMap::new();
    for c in &coalitions {
        by_size
            .entry(c.len())
            .or_insert_with(|| config.epsilons.iter().map(|&e| ExactDelta::zero(e)).collect());
    }
    for r in &rows {
        let slot = by_size.get_mut(&r.coalition.len()).expect("coalition listed");
        for (k, d) in r.deltas.iter().enumerate() {
            slot[k] = slot[k].clone().max(d.clone())?;
        }
    }

    Ok(AuditReport {
        protocol: spec.name.clone(),
        n,
        mode: config.mode,
        seed: config.seed,
        w_hex: enumerator.w().iter().map(|b| format!("{b:02x}")).collect(),
        version: env!("CARGO_PKG_VERSION"),
        note: FINITE_OUTCOME_NOTE,
        epsilons: config.epsilons.clone(),
        coalition_cap: config.coalition_cap,
        coalitions,
        honest_part_reduction: reduce,
        rows,
        maxima: by_size
            .into_iter()
            .map(|(coalition_size, deltas)| SizeMaximum { coalition_size, deltas })
            .collect(),
        monotone_in_epsilon: monotone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::toy::{input_ignoring_spec, randomized_response_spec};
    use num_traits::Zero;

    fn bits(n: usize) -> Vec<Vec<Input>> {
        vec![vec![Input::Element(0), Input::Element(1)]; n]
    }

    #[test]
    fn coalition_family() {
        let c = coalitions_up_to(4, 2);
        assert_eq!(c.len(), 1 + 4 + 6);
        assert_eq!(c[0], Vec::<usize>::new());
        assert_eq!(c[5], vec![0, 1]);
        assert_eq!(coalitions_up_to(2, 5).len(), 4);
    }

    #[test]
    fn input_ignoring_protocol_has_zero_delta() {
        let spec = input_ignoring_spec(3, 2).unwrap();
        let r = dp_audit(&spec, &vec![vec![Input::None]; 3], &AuditConfig::default()).unwrap();
        assert!(r.rows.is_empty());
        // inputs present but ignored
        let r = dp_audit(&spec, &bits(3), &AuditConfig::default()).unwrap();
        assert!(!r.rows.is_empty());
        for row in &r.rows {
            assert!(row.deltas.iter().all(|d| d.is_zero().unwrap()));
        }
    }

    #[test]
    fn randomized_response_threshold() {
        // keep probability e/(1+e) in floating point
        let spec = randomized_response_spec(1, 1.0).unwrap();
        let cfg = AuditConfig {
            epsilons: vec![0.0, 0.5, 0.99, 1.0, 1.5],
            ..AuditConfig::default()
        };
        let r = dp_audit(&spec, &bits(1), &cfg).unwrap();
        assert_eq!(r.rows.len(), 1);
        let d = &r.rows[0].deltas;
        assert!(!d[0].is_zero().unwrap() && !d[1].is_zero().unwrap() && !d[2].is_zero().unwrap());
        assert!(d[3].is_zero().unwrap() && d[4].is_zero().unwrap());
        assert!(d[3].a.is_zero());
        assert!(r.monotone_in_epsilon);
        let e = std::f64::consts::E;
        assert!((d[0].to_f64() - (e - 1.0) / (e + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn grid_and_domain_validation() {
        let spec = randomized_response_spec(2, 1.0).unwrap();
        let bad = AuditConfig {
            epsilons: vec![1.0, 0.5],
            ..AuditConfig::default()
        };
        assert!(dp_audit(&spec, &bits(2), &bad).is_err());
        assert!(dp_audit(&spec, &bits(1), &AuditConfig::default()).is_err());
        let extra = AuditConfig {
            coalition_cap: 0,
            extra_coalitions: vec![vec![1, 1]],
            ..AuditConfig::default()
        };
        let r = dp_audit(&spec, &bits(2), &extra).unwrap();
        assert_eq!(r.coalitions, vec![vec![], vec![1]]);
    }

    #[test]
    fn composition_arithmetic() {
        let spec = randomized_response_spec(1, 1.0).unwrap();
        let r = dp_audit(&spec, &bits(1), &AuditConfig::default()).unwrap();
        let c = r.compose(1e-6).unwrap();
        let ideal = r.overall(0).unwrap().to_f64();
        let want = 2.0 * 1e-6 + ideal;
        assert_eq!(c[0].delta_total, format_float(want));
        assert_eq!(composed_delta(2.0, 0.1, 0.01), (2f64.exp() + 1.0) * 0.01 + 0.1);
    }
}
