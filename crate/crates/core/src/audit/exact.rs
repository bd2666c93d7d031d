//! Exact hockey-stick divergence between rational distributions.
//!
//! For `eps > 0` the divergence `sum_t max(0, P(t) - e^eps Q(t))` is
//! irrational, so it is kept as the pair `(A, B)` with value `A - e^eps B`.
//! Comparisons against `e^eps` use a floating-point fast path and fall back
//! to rational Taylor bounds when the fast path cannot decide.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::{Error, Result};

const FAST_PATH_MARGIN: f64 = 1e-9;
const MAX_TERMS: usize = 1 << 14;

fn check_epsilon(eps: f64) -> Result<()> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::param(
            "epsilon",
            format!("{eps} must be finite and non-negative"),
        ));
    }
    Ok(())
}

/// Rational bounds `lo <= e^x <= hi` from `terms` Taylor terms, `x >= 0`.
pub fn exp_bounds(x: &BigRational, terms: usize) -> (BigRational, BigRational) {
    let mut sum = BigRational::zero();
    let mut term = BigRational::one();
    for k in 0..terms {
        sum += &term;
        term = term * x / BigRational::from_integer(BigInt::from(k + 1));
    }
    // remainder <= x^N / N! * e^x and e^x <= 3^ceil(x)
    let ceil = x.ceil().to_integer().to_u32().unwrap_or(u32::MAX);
    let three = BigRational::from_integer(BigInt::from(3).pow(ceil));
    let hi = &sum + term * three;
    (sum, hi)
}

/// Order of `a` against `e^eps * b` for `a, b >= 0`.
pub fn cmp_scaled(a: &BigRational, b: &BigRational, eps: f64) -> Result<Ordering> {
    check_epsilon(eps)?;
    if a.is_negative() || b.is_negative() {
        return Err(Error::Internal("cmp_scaled needs non-negative operands".into()));
    }
    if b.is_zero() {
        return Ok(a.cmp(&BigRational::zero()));
    }
    if a.is_zero() {
        return Ok(Ordering::Less);
    }
    if eps == 0.0 {
        return Ok(a.cmp(b));
    }
    let ratio = a / b;
    if let Some(r) = ratio.to_f64() {
        let e = eps.exp();
        if r.is_finite() && r > e * (1.0 + FAST_PATH_MARGIN) {
            return Ok(Ordering::Greater);
        }
        if r.is_finite() && r < e * (1.0 - FAST_PATH_MARGIN) {
            return Ok(Ordering::Less);
        }
    }
    let x = BigRational::from_float(eps).expect("finite");
    let mut terms = 32;
    while terms <= MAX_TERMS {
        let (lo, hi) = exp_bounds(&x, terms);
        if ratio < lo {
            return Ok(Ordering::Less);
        }
        if ratio > hi {
            return Ok(Ordering::Greater);
        }
        terms *= 2;
    }
    Err(Error::Internal(format!("could not separate {ratio} from e^{eps}")))
}

/// Order of `a` against `e^eps * b` for rationals of any sign.
pub fn cmp_linear(a: &BigRational, b: &BigRational, eps: f64) -> Result<Ordering> {
    let zero = BigRational::zero();
    match (a.cmp(&zero), b.cmp(&zero)) {
        (_, Ordering::Equal) => Ok(a.cmp(&zero)),
        (Ordering::Less | Ordering::Equal, Ordering::Greater) => Ok(Ordering::Less),
        (Ordering::Greater, Ordering::Greater) => cmp_scaled(a, b, eps),
        (Ordering::Greater | Ordering::Equal, Ordering::Less) => Ok(Ordering::Greater),
        (Ordering::Less, Ordering::Less) => Ok(cmp_scaled(&-a, &-b, eps)?.reverse()),
    }
}

/// `a - e^eps * b`, exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactDelta {
    pub epsilon: f64,
    pub a: BigRational,
    pub b: BigRational,
}

impl ExactDelta {
    pub fn zero(epsilon: f64) -> Self {
        ExactDelta {
            epsilon,
            a: BigRational::zero(),
            b: BigRational::zero(),
        }
    }

    /// Canonical form: at `eps = 0` the value is folded into `a`.
    fn normalized(mut self) -> Self {
        if self.epsilon == 0.0 {
            self.a = &self.a - &self.b;
            self.b = BigRational::zero();
        }
        self
    }

    pub fn to_f64(&self) -> f64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        (a - self.epsilon.exp() * b).max(0.0)
    }

    pub fn is_zero(&self) -> Result<bool> {
        Ok(cmp_linear(&self.a, &self.b, self.epsilon)? == Ordering::Equal)
    }

    /// Exact comparison of two values, possibly at different `eps`.
    pub fn cmp_exact(&self, other: &ExactDelta) -> Result<Ordering> {
        if self.epsilon == other.epsilon {
            return cmp_linear(&(&self.a - &other.a), &(&self.b - &other.b), self.epsilon);
        }
        // Different exponents: separate by floats unless too close.
        let (x, y) = (self.to_f64(), other.to_f64());
        if (x - y).abs() > 1e-12 * x.abs().max(y.abs()).max(1e-300) {
            return Ok(x.partial_cmp(&y).unwrap_or(Ordering::Equal));
        }
        if self.is_zero()? && other.is_zero()? {
            return Ok(Ordering::Equal);
        }
        Err(Error::Internal("deltas at different epsilon too close to order".into()))
    }

    pub fn max(self, other: ExactDelta) -> Result<ExactDelta> {
        Ok(if other.cmp_exact(&self)? == Ordering::Greater {
            other
        } else {
            self
        })
    }
}

impl fmt::Display for ExactDelta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", self.a)
        } else {
            write!(f, "{} - e^{} * {}", self.a, self.epsilon, self.b)
        }
    }
}

impl Serialize for ExactDelta {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("ExactDelta", 4)?;
        st.serialize_field("epsilon", &self.epsilon)?;
        st.serialize_field("a", &self.a.to_string())?;
        st.serialize_field("b", &self.b.to_string())?;
        st.serialize_field("value", &format_float(self.to_f64()))?;
        st.end()
    }
}

/// Twelve significant digits.
pub fn format_float(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    format!("{v:.11e}")
}

fn one_direction<K: Ord>(p: &BTreeMap<K, BigRational>, q: &BTreeMap<K, BigRational>, eps: f64) -> Result<ExactDelta> {
    let zero = BigRational::zero();
    let mut d = ExactDelta::zero(eps);
    for (k, pa) in p {
        let qb = q.get(k).unwrap_or(&zero);
        if cmp_scaled(pa, qb, eps)? == Ordering::Greater {
            d.a += pa;
            d.b += qb;
        }
    }
    Ok(d)
}

/// Least `delta` making `p` and `q` `(eps, delta)`-close in both directions.
pub fn hockey_stick_exact<K: Ord>(
    p: &BTreeMap<K, BigRational>,
    q: &BTreeMap<K, BigRational>,
    eps: f64,
) -> Result<ExactDelta> {
    check_epsilon(eps)?;
    let d0 = one_direction(p, q, eps)?.normalized();
    let d1 = one_direction(q, p, eps)?.normalized();
    d0.max(d1)
}

/// Floating-point hockey-stick divergence, both directions.
pub fn hockey_stick_f64<K: Ord>(p: &BTreeMap<K, f64>, q: &BTreeMap<K, f64>, eps: f64) -> Result<f64> {
    check_epsilon(eps)?;
    let e = eps.exp();
    let dir = |p: &BTreeMap<K, f64>, q: &BTreeMap<K, f64>| {
        p.iter()
            .map(|(k, &a)| (a - e * q.get(k).copied().unwrap_or(0.0)).max(0.0))
            .sum::<f64>()
    };
    Ok(dir(p, q).max(dir(q, p)))
}
