//! Exhaustive k-locus scan: score every combination, keep the top K.
//!
//! The rank space is split into disjoint contiguous colex ranges; each
//! worker scans its range with a local bounded candidate list and the
//! per-range results are merged by a total order (reward descending, then
//! lexicographic SNP indices). Rankings are therefore identical for any
//! worker count.

use std::cmp::Ordering;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::action::ActionSet;
use crate::combin::{advance_colex, combination_count, unrank_colex};
use crate::data::GenotypeMatrix;
use crate::error::{Error, Result};
use crate::num::Real;
use crate::reward::{reward, RewardValue};

/// One scored combination in a ranking.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RankedSet<T> {
    pub set: ActionSet,
    pub reward: RewardValue<T>,
}

/// Result of an exhaustive scan.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SearchResult<T> {
    /// Top combinations, best first.
    pub entries: Vec<RankedSet<T>>,
    pub elapsed_seconds: f64,
    /// Number of combinations scored; always exactly `C(l, k)`.
    pub evaluated: u64,
}

/// Total order on candidates: higher reward first, ties broken by
/// lexicographic index order so rankings are reproducible.
pub(crate) fn ranking_order<T: Real>(a: &RankedSet<T>, b: &RankedSet<T>) -> Ordering {
    b.reward
        .total
        .partial_cmp(&a.reward.total)
        .expect("reward totals are finite")
        .then_with(|| a.set.cmp(&b.set))
}

/// Scores every k-combination of the dataset's SNPs and returns the
/// `top_k` best. Runs on the current rayon thread pool.
pub fn exhaustive_topk<T: Real>(
    data: &GenotypeMatrix,
    k: usize,
    top_k: usize,
) -> Result<SearchResult<T>> {
    if k < 2 {
        return Err(Error::precondition(format!(
            "interaction order must be at least 2, got {k}"
        )));
    }
    if top_k == 0 {
        return Err(Error::precondition("result size must be at least 1"));
    }
    let l = data.n_snps();
    let total_wide = combination_count(l as u64, k as u64)?;
    let total = u64::try_from(total_wide).map_err(|_| Error::Capacity {
        detail: format!("C({l}, {k}) = {total_wide} combinations cannot be enumerated"),
    })?;

    let start = Instant::now();
    let workers = rayon::current_num_threads().max(1) as u64;
    // enough chunks to balance load, small enough to keep merge trivial
    let chunk_size = (total / (workers * 8)).max(1024).min(total.max(1));
    let n_chunks = total.div_ceil(chunk_size);

    let mut per_chunk: Vec<Result<Vec<RankedSet<T>>>> = Vec::new();
    (0..n_chunks as usize)
        .into_par_iter()
        .map(|chunk| {
            let begin = chunk as u64 * chunk_size;
            let len = chunk_size.min(total - begin);
            scan_range(data, k, top_k, begin, len)
        })
        .collect_into_vec(&mut per_chunk);

    let mut entries = Vec::with_capacity(per_chunk.len() * top_k.min(64));
    for chunk in per_chunk {
        entries.extend(chunk?);
    }
    entries.sort_by(ranking_order);
    entries.truncate(top_k);

    Ok(SearchResult {
        entries,
        elapsed_seconds: start.elapsed().as_secs_f64(),
        evaluated: total,
    })
}

fn scan_range<T: Real>(
    data: &GenotypeMatrix,
    k: usize,
    top_k: usize,
    begin: u64,
    len: u64,
) -> Result<Vec<RankedSet<T>>> {
    let mut combo = unrank_colex(data.n_snps(), k, begin as u128);
    let mut best: Vec<RankedSet<T>> = Vec::with_capacity(top_k * 2 + 1);
    for i in 0..len {
        let set = ActionSet::new(combo.clone())?;
        let rv = reward::<T>(data, &set)?;
        best.push(RankedSet { set, reward: rv });
        if best.len() > top_k * 2 {
            best.sort_by(ranking_order);
            best.truncate(top_k);
        }
        if i + 1 < len {
            advance_colex(&mut combo);
        }
    }
    best.sort_by(ranking_order);
    best.truncate(top_k);
    Ok(best)
}
