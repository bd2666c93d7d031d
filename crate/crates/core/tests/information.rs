//! Entropy and mutual-information identities and inequalities on random
//! finite joints.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use shuffle_dp::audit::info::{
    binary_entropy, conditional_entropy, conditional_mutual_information, entropy, mutual_information,
};
use shuffle_dp::audit::JointDistribution;

const INSTANCES: usize = 1000;
const IDENTITY_TOL: f64 = 1e-10;
const INEQUALITY_SLACK: f64 = 1e-12;

/// Random joint over `[0,a) x [0,b) x [0,c)` with some zero cells.
fn random_triple(rng: &mut ChaCha8Rng) -> JointDistribution {
    let dims: Vec<u64> = (0..3).map(|_| rng.gen_range(1..=5)).collect();
    let mut cells = Vec::new();
    for x in 0..dims[0] {
        for y in 0..dims[1] {
            for z in 0..dims[2] {
                let w: f64 = if rng.gen_bool(0.2) { 0.0 } else { rng.gen() };
                cells.push((vec![x, y, z], w));
            }
        }
    }
    let total: f64 = cells.iter().map(|c| c.1).sum();
    if total == 0.0 {
        cells[0].1 = 1.0;
        return JointDistribution::from_pairs(3, cells).unwrap();
    }
    JointDistribution::from_pairs(3, cells.into_iter().map(|(k, w)| (k, w / total))).unwrap()
}

fn random_simplex(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| rng.gen::<f64>() + 1e-3).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

#[test]
fn chain_rules() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..INSTANCES {
        let j = random_triple(&mut rng);
        let (x, y, z) = (&[0][..], &[1][..], &[2][..]);
        let lhs = entropy(&j, &[0, 1]).unwrap();
        let rhs = entropy(&j, x).unwrap() + conditional_entropy(&j, y, x).unwrap();
        assert!((lhs - rhs).abs() < IDENTITY_TOL);
        let lhs = mutual_information(&j, &[0, 1], z).unwrap();
        let rhs = mutual_information(&j, x, z).unwrap() + conditional_mutual_information(&j, y, z, x).unwrap();
        assert!((lhs - rhs).abs() < IDENTITY_TOL);
        // the identity behind mutual_information itself
        let direct = entropy(&j, x).unwrap() + entropy(&j, y).unwrap() - entropy(&j, &[0, 1]).unwrap();
        assert!((mutual_information(&j, x, y).unwrap() - direct.max(0.0)).abs() < IDENTITY_TOL);
        // symmetry
        let (a, b) = (
            mutual_information(&j, x, y).unwrap(),
            mutual_information(&j, y, x).unwrap(),
        );
        assert!((a - b).abs() < IDENTITY_TOL);
    }
}

#[test]
fn conditionally_independent_observations_are_subadditive() {
    // Y1 and Y2 independent given Z: I(Z;Y1) + I(Z;Y2) >= I(Z;Y1,Y2)
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..INSTANCES {
        let kz = rng.gen_range(1..=5);
        let (k1, k2) = (rng.gen_range(1..=5), rng.gen_range(1..=5));
        let pz = random_simplex(&mut rng, kz);
        let c1: Vec<Vec<f64>> = (0..kz).map(|_| random_simplex(&mut rng, k1)).collect();
        let c2: Vec<Vec<f64>> = (0..kz).map(|_| random_simplex(&mut rng, k2)).collect();
        let mut cells = Vec::new();
        for z in 0..kz {
            for a in 0..k1 {
                for b in 0..k2 {
                    cells.push((vec![z as u64, a as u64, b as u64], pz[z] * c1[z][a] * c2[z][b]));
                }
            }
        }
        let j = JointDistribution::from_pairs(3, cells).unwrap();
        let lhs = mutual_information(&j, &[0], &[1]).unwrap() + mutual_information(&j, &[0], &[2]).unwrap();
        let rhs = mutual_information(&j, &[0], &[1, 2]).unwrap();
        assert!(lhs >= rhs - INEQUALITY_SLACK, "{lhs} < {rhs}");
    }
}

#[test]
fn conditioning_on_low_entropy_loses_little() {
    // I(X;Y) >= I(X;Y|Z) - H(Z)
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..INSTANCES {
        let j = random_triple(&mut rng);
        let lhs = mutual_information(&j, &[0], &[1]).unwrap();
        let rhs = conditional_mutual_information(&j, &[0], &[1], &[2]).unwrap() - entropy(&j, &[2]).unwrap();
        assert!(lhs >= rhs - INEQUALITY_SLACK);
    }
}

#[test]
fn binary_entropy_bounds() {
    for k in 1..1000 {
        let p = k as f64 / 1000.0;
        let h = binary_entropy(p);
        assert!(p * (1.0 / p).log2() <= h + INEQUALITY_SLACK, "p = {p}");
        assert!(h <= p * (4.0 / p).log2() + INEQUALITY_SLACK, "p = {p}");
    }
    let h = binary_entropy(0.25);
    assert!((0.5..=1.0).contains(&h));
    assert!((h - 0.811_278_124_459_132_8).abs() < 1e-15);
}

#[test]
fn reference_values() {
    let copy = JointDistribution::from_pairs(2, (0..4u64).map(|v| (vec![v, v], 0.25))).unwrap();
    assert!((mutual_information(&copy, &[0], &[1]).unwrap() - 2.0).abs() < 1e-12);
    let indep = JointDistribution::from_pairs(2, (0..6u64).map(|v| (vec![v % 2, v / 2], 1.0 / 6.0))).unwrap();
    assert!(mutual_information(&indep, &[0], &[1]).unwrap().abs() < 1e-12);
    let coin = JointDistribution::from_pairs(1, [(vec![0], 0.5), (vec![1], 0.5)]).unwrap();
    assert!((entropy(&coin, &[0]).unwrap() - 1.0).abs() < 1e-15);
    assert!(JointDistribution::from_pairs(1, [(vec![0], 0.5), (vec![1], 0.6)]).is_err());
    assert!(JointDistribution::from_pairs(1, [(vec![0], -0.5), (vec![1], 1.5)]).is_err());
}
