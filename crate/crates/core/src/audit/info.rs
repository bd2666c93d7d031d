//! Entropy and mutual information of joint distributions, in bits.
//!
//! Variable groups are index lists into the tuple; everything reduces to
//! entropies of marginals.

use super::dist::JointDistribution;
use crate::Result;

fn joint_entropy(j: &JointDistribution, groups: &[&[usize]]) -> Result<f64> {
    let mut vars: Vec<usize> = groups.iter().flat_map(|g| g.iter().copied()).collect();
    vars.sort_unstable();
    vars.dedup();
    Ok(j.marginal(&vars)?.entropy())
}

/// `H(A)`.
pub fn entropy(j: &JointDistribution, a: &[usize]) -> Result<f64> {
    joint_entropy(j, &[a])
}

/// `H(A | B) = H(A, B) - H(B)`.
pub fn conditional_entropy(j: &JointDistribution, a: &[usize], b: &[usize]) -> Result<f64> {
    Ok(joint_entropy(j, &[a, b])? - joint_entropy(j, &[b])?)
}

/// `I(A; B) = H(A) + H(B) - H(A, B)`.
pub fn mutual_information(j: &JointDistribution, a: &[usize], b: &[usize]) -> Result<f64> {
    Ok((joint_entropy(j, &[a])? + joint_entropy(j, &[b])? - joint_entropy(j, &[a, b])?).max(0.0))
}

/// `I(A; B | C) = H(A, C) + H(B, C) - H(A, B, C) - H(C)`.
pub fn conditional_mutual_information(j: &JointDistribution, a: &[usize], b: &[usize], c: &[usize]) -> Result<f64> {
    let v = joint_entropy(j, &[a, c])? + joint_entropy(j, &[b, c])?
        - joint_entropy(j, &[a, b, c])?
        - joint_entropy(j, &[c])?;
    Ok(v.max(0.0))
}

/// Binary entropy function.
pub fn binary_entropy(p: f64) -> f64 {
    super::dist::entropy_of([p, 1.0 - p].into_iter())
}
