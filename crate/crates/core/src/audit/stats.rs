//! Goodness-of-fit tests and binomial confidence intervals.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use statrs::distribution::{Beta, ChiSquared, ContinuousCDF};

use crate::{Error, Result};

/// Bins with a smaller expected count are pooled.
pub const MIN_EXPECTED: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChiSquaredTest {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

impl ChiSquaredTest {
    pub fn passes(&self, significance: f64) -> bool {
        self.p_value >= significance
    }
}

fn p_value(statistic: f64, df: usize) -> Result<f64> {
    if df == 0 {
        return Ok(1.0);
    }
    let chi = ChiSquared::new(df as f64).map_err(|e| Error::Internal(e.to_string()))?;
    Ok(chi.sf(statistic))
}

/// Pool `(observed, expected)` bins whose expected count is below
/// [`MIN_EXPECTED`], smallest first, until every bin reaches it.
fn pool(mut bins: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    bins.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut out: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for (o, e) in bins {
        if acc.1 < MIN_EXPECTED {
            acc = (acc.0 + o, acc.1 + e);
        } else {
            out.push(acc);
            acc = (o, e);
        }
    }
    if acc.1 > 0.0 || acc.0 > 0.0 {
        match out.last_mut() {
            Some(last) if acc.1 < MIN_EXPECTED => {
                last.0 += acc.0;
                last.1 += acc.1;
            }
            _ => out.push(acc),
        }
    }
    out
}

/// Pearson goodness of fit of observed counts against a distribution.
/// Observations outside the support give a p-value of zero.
pub fn chi_squared_gof<K: Ord>(observed: &BTreeMap<K, u64>, probs: &BTreeMap<K, f64>) -> Result<ChiSquaredTest> {
    let total: u64 = observed.values().sum();
    if total == 0 {
        return Err(Error::param("observed", "no observations"));
    }
    if observed
        .iter()
        .any(|(k, &c)| c > 0 && probs.get(k).is_none_or(|&p| p <= 0.0))
    {
        return Ok(ChiSquaredTest {
            statistic: f64::INFINITY,
            df: 0,
            p_value: 0.0,
        });
    }
    let bins = probs
        .iter()
        .map(|(k, &p)| (observed.get(k).copied().unwrap_or(0) as f64, p * total as f64))
        .collect();
    let bins = pool(bins);
    let statistic = bins.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let df = bins.len().saturating_sub(1);
    Ok(ChiSquaredTest {
        statistic,
        df,
        p_value: p_value(statistic, df)?,
    })
}

/// Pearson homogeneity test between two samples.
pub fn chi_squared_two_sample<K: Ord + Clone>(a: &BTreeMap<K, u64>, b: &BTreeMap<K, u64>) -> Result<ChiSquaredTest> {
    let na: u64 = a.values().sum();
    let nb: u64 = b.values().sum();
    if na == 0 || nb == 0 {
        return Err(Error::param("samples", "both samples must be non-empty"));
    }
    let keys: BTreeSet<&K> = a.keys().chain(b.keys()).collect();
    let total = (na + nb) as f64;
    let fa = na as f64 / total;
    // Pool on the smaller expected cell of each column.
    let mut cols: Vec<(f64, f64)> = keys
        .into_iter()
        .map(|k| {
            (
                a.get(k).copied().unwrap_or(0) as f64,
                b.get(k).copied().unwrap_or(0) as f64,
            )
        })
        .collect();
    cols.sort_by(|x, y| (x.0 + x.1).total_cmp(&(y.0 + y.1)));
    let min_share = fa.min(1.0 - fa);
    let mut pooled: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for c in cols {
        if (acc.0 + acc.1) * min_share < MIN_EXPECTED {
            acc = (acc.0 + c.0, acc.1 + c.1);
        } else {
            pooled.push(acc);
            acc = c;
        }
    }
    match pooled.last_mut() {
        Some(last) if (acc.0 + acc.1) * min_share < MIN_EXPECTED => {
            last.0 += acc.0;
            last.1 += acc.1;
        }
        _ => pooled.push(acc),
    }
    let mut statistic = 0.0;
    for (oa, ob) in &pooled {
        let col = oa + ob;
        let (ea, eb) = (col * fa, col * (1.0 - fa));
        statistic += (oa - ea) * (oa - ea) / ea + (ob - eb) * (ob - eb) / eb;
    }
    let df = pooled.len().saturating_sub(1);
    Ok(ChiSquaredTest {
        statistic,
        df,
        p_value: p_value(statistic, df)?,
    })
}

/// Exact two-sided Clopper-Pearson interval for `successes` out of `trials`
/// at confidence `1 - alpha`.
pub fn clopper_pearson(successes: u64, trials: u64, alpha: f64) -> Result<(f64, f64)> {
    if trials == 0 || successes > trials {
        return Err(Error::param("trials", format!("{successes} successes out of {trials}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param("alpha", format!("{alpha} not in (0, 1)")));
    }
    let beta = |a: f64, b: f64| Beta::new(a, b).map_err(|e| Error::Internal(e.to_string()));
    let (x, n) = (successes as f64, trials as f64);
    let lower = if successes == 0 {
        0.0
    } else {
        beta(x, n - x + 1.0)?.inverse_cdf(alpha / 2.0)
    };
    let upper = if successes == trials {
        1.0
    } else {
        beta(x + 1.0, n - x)?.inverse_cdf(1.0 - alpha / 2.0)
    };
    Ok((lower, upper))
}

/// Tally a sample into counts.
pub fn counts<K: Ord>(sample: impl IntoIterator<Item = K>) -> BTreeMap<K, u64> {
    let mut m = BTreeMap::new();
    for k in sample {
        *m.entry(k).or_default() += 1;
    }
    m
}
