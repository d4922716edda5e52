//! Greedy optimization over integral polymatroids.

use std::cmp::Ordering;

use num_traits::Signed;

use crate::rat::Rat;

use super::rank::RankOracle;

/// `x_{order(t)} = f(first t) - f(first t-1)`.
pub fn greedy_base(f: &RankOracle, order: &[usize]) -> Vec<i64> {
    let mut x = vec![0i64; f.ground_size()];
    let mut prefix = 0u32;
    let mut prev = 0i64;
    for &j in order {
        prefix |= 1 << j;
        let r = f.rank(prefix);
        x[j] = r - prev;
        prev = r;
    }
    x
}

fn sorted_order(weights: &[Rat], descending: bool) -> Vec<usize> {
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let c = weights[a].cmp(&weights[b]);
        let c = if descending { c.reverse() } else { c };
        if c == Ordering::Equal {
            a.cmp(&b)
        } else {
            c
        }
    });
    order
}

/// An optimal base for the linear objective `weights`.
pub fn optimal_base(f: &RankOracle, weights: &[Rat], minimize: bool) -> Vec<i64> {
    greedy_base(f, &sorted_order(weights, !minimize))
}

/// An optimal independent vector: only strictly profitable elements are raised.
pub fn optimal_independent(f: &RankOracle, weights: &[Rat], minimize: bool) -> Vec<i64> {
    let order = sorted_order(weights, !minimize);
    let profitable: Vec<usize> = order
        .into_iter()
        .take_while(|&j| {
            let w = &weights[j];
            if minimize {
                w.is_negative()
            } else {
                w.is_positive()
            }
        })
        .collect();
    greedy_base(f, &profitable)
}
