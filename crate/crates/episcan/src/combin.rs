//! Exact combination counting and colex ranking/unranking.
//!
//! Colex order lists k-combinations sorted by their largest element, then
//! the next largest, and so on: the rank of `{c_1 < ... < c_k}` is
//! `sum_i C(c_i, i)`. Contiguous rank ranges therefore partition the search
//! space into disjoint chunks for parallel scans.

use crate::error::{Error, Result};

/// Exact `C(n, k)` with overflow-safe arithmetic.
pub fn combination_count(n: u64, k: u64) -> Result<u128> {
    if k > n {
        return Err(Error::precondition(format!(
            "combination order {k} exceeds the number of items {n}"
        )));
    }
    let k = k.min(n - k);
    let mut result: u128 = 1;
    for i in 1..=k {
        // result holds C(n-k+i-1, i-1); multiply-then-divide stays exact
        result = result
            .checked_mul((n - k + i) as u128)
            .ok_or_else(|| Error::Overflow {
                detail: format!("C({n}, {k}) exceeds the 128-bit integer range"),
            })?
            / i as u128;
    }
    Ok(result)
}

/// `C(n, k)` that saturates instead of failing; used for unranking where
/// ranks are known to fit in u64.
fn binom_saturating(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut result: u128 = 1;
    for i in 1..=k as u128 {
        result = match result.checked_mul((n as u128) - (k as u128) + i) {
            Some(v) => v / i,
            None => return u128::MAX,
        };
    }
    result
}

/// The colex rank of an ascending combination.
pub fn rank_colex(combo: &[usize]) -> u128 {
    combo
        .iter()
        .enumerate()
        .map(|(i, &c)| binom_saturating(c, i + 1))
        .sum()
}

/// The ascending k-combination of `0..n` at the given colex rank.
pub fn unrank_colex(n: usize, k: usize, rank: u128) -> Vec<usize> {
    debug_assert!(rank < binom_saturating(n, k));
    let mut combo = vec![0usize; k];
    let mut remaining = rank;
    let mut ceiling = n;
    for i in (1..=k).rev() {
        // largest value v < ceiling with C(v, i) <= remaining
        let mut v = ceiling - 1;
        while binom_saturating(v, i) > remaining {
            v -= 1;
        }
        combo[i - 1] = v;
        remaining -= binom_saturating(v, i);
        ceiling = v;
    }
    combo
}

/// Advances an ascending combination to its colex successor in place.
/// The caller bounds iteration by the total count; advancing the final
/// combination is not meaningful.
pub fn advance_colex(combo: &mut [usize]) {
    let k = combo.len();
    for i in 0..k {
        let blocked = i + 1 < k && combo[i] + 1 == combo[i + 1];
        if !blocked {
            combo[i] += 1;
            for (j, slot) in combo.iter_mut().enumerate().take(i) {
                *slot = j;
            }
            return;
        }
    }
}
