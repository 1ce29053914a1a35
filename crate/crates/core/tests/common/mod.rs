#![allow(dead_code)]

use pidkit_core::{JointDistribution, Mass, Variable};
use proptest::prelude::*;

/// Exact distribution over the given arities from nonnegative integer weights,
/// one per joint outcome in mixed-radix order (first variable slowest).
pub fn from_weights(arities: &[usize], weights: &[u32]) -> JointDistribution {
    let total: u32 = weights.iter().sum();
    let mut rows = Vec::new();
    for (code, &w) in weights.iter().enumerate() {
        if w == 0 {
            continue;
        }
        let mut rest = code;
        let mut tuple = vec![0; arities.len()];
        for (slot, &a) in tuple.iter_mut().zip(arities).rev() {
            *slot = rest % a;
            rest /= a;
        }
        rows.push((tuple, Mass::fraction(w as i64, total as i64)));
    }
    let vars = arities.iter().enumerate().map(|(i, &a)| Variable::new(format!("V{i}"), a)).collect();
    JointDistribution::new(vars, rows).unwrap()
}

/// Distributions over exactly `n` variables of arity 2 or 3.
pub fn dist_with(n: usize) -> impl Strategy<Value = JointDistribution> {
    prop::collection::vec(2usize..=3, n).prop_flat_map(|arities| {
        let space: usize = arities.iter().product();
        prop::collection::vec(0u32..4, space)
            .prop_filter("needs some mass", |w| w.iter().any(|&x| x > 0))
            .prop_map(move |w| from_weights(&arities, &w))
    })
}

/// Strictly positive probability vector of length `k`.
pub fn positive_simplex(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1u32..20, k).prop_map(|w| {
        let t: u32 = w.iter().sum();
        w.iter().map(|&x| x as f64 / t as f64).collect()
    })
}

/// Probability vector of length `k`, zeros allowed.
pub fn simplex(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0u32..20, k).prop_filter("needs some mass", |w| w.iter().any(|&x| x > 0)).prop_map(|w| {
        let t: u32 = w.iter().sum();
        w.iter().map(|&x| x as f64 / t as f64).collect()
    })
}
