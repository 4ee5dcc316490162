//! Experiment orchestration: multi-trial agent runs, recall at K over
//! dataset collections, and the wall-clock comparison against the
//! exhaustive baseline.
//!
//! Trials are dispatched to the current rayon pool; each worker owns its
//! agent and random stream and results are merged in seed order, so reports
//! are reproducible from (dataset, config, seed list). Wall-clock fields
//! are the one non-deterministic part and can be stripped for byte-stable
//! output.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::action::ActionSet;
use crate::agent::{train, TrainConfig, TrialReport};
use crate::data::GenotypeMatrix;
use crate::error::{Error, Result};
use crate::exhaustive::{exhaustive_topk, RankedSet};
use crate::num::Real;

/// Aggregate statistics over a batch of trials. Means over successful
/// trials mirror how hit statistics are usually reported; all-trial means
/// are labeled as such.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub trials: u64,
    pub successes: u64,
    pub success_rate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_iterations_to_hit: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_elapsed_seconds_successes: Option<f64>,
    pub mean_iterations_all_trials: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_elapsed_seconds_all_trials: Option<f64>,
}

/// Result of `run_trials`: per-trial reports in seed order plus the summary.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrialsReport<T> {
    pub summary: TrialSummary,
    pub trials: Vec<TrialReport<T>>,
}

impl<T: Real> TrialsReport<T> {
    /// Removes every wall-clock field so serialization is byte-identical
    /// across runs with the same inputs.
    pub fn strip_timing(&mut self) {
        for trial in &mut self.trials {
            trial.elapsed_seconds = None;
        }
        self.summary.mean_elapsed_seconds_successes = None;
        self.summary.mean_elapsed_seconds_all_trials = None;
    }
}

fn summarize<T: Real>(trials: &[TrialReport<T>]) -> TrialSummary {
    let n = trials.len() as u64;
    let successes: Vec<&TrialReport<T>> = trials.iter().filter(|t| t.success).collect();
    let hit_count = successes.len() as u64;
    let mean = |xs: &[f64]| -> Option<f64> {
        if xs.is_empty() {
            None
        } else {
            Some(xs.iter().sum::<f64>() / xs.len() as f64)
        }
    };
    let hit_iters: Vec<f64> = successes
        .iter()
        .filter_map(|t| t.iterations_to_hit.map(|i| i as f64))
        .collect();
    let hit_elapsed: Vec<f64> = successes.iter().filter_map(|t| t.elapsed_seconds).collect();
    let all_elapsed: Vec<f64> = trials.iter().filter_map(|t| t.elapsed_seconds).collect();
    let all_iters: f64 = trials
        .iter()
        .map(|t| t.reward_trajectory.len() as f64)
        .sum::<f64>()
        / n.max(1) as f64;
    TrialSummary {
        trials: n,
        successes: hit_count,
        success_rate: hit_count as f64 / n.max(1) as f64,
        mean_iterations_to_hit: mean(&hit_iters),
        mean_elapsed_seconds_successes: mean(&hit_elapsed),
        mean_iterations_all_trials: all_iters,
        // only meaningful when every trial carries timing
        mean_elapsed_seconds_all_trials: if all_elapsed.len() == trials.len() {
            mean(&all_elapsed)
        } else {
            None
        },
    }
}

/// Runs one independent training trial per seed. A trial that fails is
/// recorded with its error message rather than aborting the batch.
pub fn run_trials<T: Real>(
    data: &GenotypeMatrix,
    config: &TrainConfig<T>,
    seeds: &[u64],
    ground_truth: Option<&ActionSet>,
) -> Result<TrialsReport<T>> {
    if seeds.is_empty() {
        return Err(Error::precondition("at least one trial seed is required"));
    }
    for (i, s) in seeds.iter().enumerate() {
        if seeds[..i].contains(s) {
            return Err(Error::precondition(format!("duplicate trial seed {s}")));
        }
    }
    let trials: Vec<TrialReport<T>> = seeds
        .par_iter()
        .map(|&seed| {
            let cfg = TrainConfig {
                seed,
                ..config.clone()
            };
            match train(data, &cfg, ground_truth) {
                Ok(report) => report,
                Err(e) => TrialReport {
                    seed,
                    success: false,
                    iterations_to_hit: None,
                    elapsed_seconds: None,
                    best_sets: Vec::new(),
                    reward_trajectory: Vec::new(),
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(TrialsReport {
        summary: summarize(&trials),
        trials,
    })
}

/// CSV rendering of a trials report, one row per trial.
pub fn trials_csv<T: Real>(report: &TrialsReport<T>) -> String {
    let mut out = String::from("seed,success,iterations_to_hit,elapsed_seconds,best_set,best_total\n");
    for t in &report.trials {
        let best = t.best_sets.first();
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            t.seed,
            t.success,
            t.iterations_to_hit.map_or(String::new(), |i| i.to_string()),
            t.elapsed_seconds.map_or(String::new(), |e| format!("{e:.6}")),
            best.map_or(String::new(), |b| format!("\"{}\"", b.set)),
            best.map_or(String::new(), |b| format!("{}", b.reward.total)),
        ));
    }
    out
}

/// Which search produces the top-K candidate sets for recall.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RecallBackend {
    /// One agent training run per dataset (seed = config seed + index).
    Agent,
    /// Exhaustive scan of the given interaction order.
    Exhaustive { order: usize },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RecallEntry<T> {
    pub dataset_index: usize,
    pub truth: ActionSet,
    pub hit: bool,
    /// The candidate sets the truth was compared against, best first.
    pub top_sets: Vec<RankedSet<T>>,
    /// Per-dataset trial (agent backend only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trial: Option<TrialReport<T>>,
}

/// Recall at K: the fraction of datasets whose ground-truth set appears
/// among the K best candidate sets.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RecallReport<T> {
    pub datasets: u64,
    pub hits: u64,
    pub recall: f64,
    pub top_k: usize,
    pub per_dataset: Vec<RecallEntry<T>>,
}

pub fn recall_at_k<T: Real>(
    datasets: &[GenotypeMatrix],
    truths: &[ActionSet],
    config: &TrainConfig<T>,
    top_k: usize,
    backend: RecallBackend,
) -> Result<RecallReport<T>> {
    if datasets.is_empty() {
        return Err(Error::precondition("recall needs at least one dataset"));
    }
    if datasets.len() != truths.len() {
        return Err(Error::precondition(format!(
            "{} datasets but {} ground-truth sets",
            datasets.len(),
            truths.len()
        )));
    }
    if top_k == 0 {
        return Err(Error::precondition("K must be at least 1"));
    }
    let entries: Vec<Result<RecallEntry<T>>> = datasets
        .par_iter()
        .zip(truths)
        .enumerate()
        .map(|(i, (data, truth))| {
            let (top_sets, trial) = match backend {
                RecallBackend::Agent => {
                    let cfg = TrainConfig {
                        seed: config.seed + i as u64,
                        report_top_k: config.report_top_k.max(top_k),
                        ..config.clone()
                    };
                    let mut report = train(data, &cfg, None)?;
                    let mut sets = report.best_sets.clone();
                    sets.truncate(top_k);
                    // the full trajectory is bulky and rarely needed here
                    report.reward_trajectory = Vec::new();
                    (sets, Some(report))
                }
                RecallBackend::Exhaustive { order } => {
                    (exhaustive_topk(data, order, top_k)?.entries, None)
                }
            };
            let hit = top_sets.iter().any(|r| r.set == *truth);
            Ok(RecallEntry {
                dataset_index: i,
                truth: truth.clone(),
                hit,
                top_sets,
                trial,
            })
        })
        .collect();
    let entries: Vec<RecallEntry<T>> = entries.into_iter().collect::<Result<_>>()?;
    let hits = entries.iter().filter(|e| e.hit).count() as u64;
    let datasets_n = entries.len() as u64;
    Ok(RecallReport {
        datasets: datasets_n,
        hits,
        recall: hits as f64 / datasets_n as f64,
        top_k,
        per_dataset: entries,
    })
}

/// Side-by-side timing of the agent against the exhaustive scan. The
/// ground truth handed to the agent is the exhaustive rank-1 set, so the
/// agent clock measures time-to-find exactly what the scan found.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComparisonReport<T> {
    pub interaction_order: usize,
    pub exhaustive_elapsed_seconds: f64,
    pub combinations_evaluated: u64,
    pub best_set: RankedSet<T>,
    pub agent: TrialSummary,
    /// exhaustive elapsed / mean successful-agent elapsed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub speedup: Option<f64>,
    /// Every successful trial re-found the best set with an identical
    /// reward value.
    pub reward_consistent: bool,
}

pub fn compare_baseline<T: Real>(
    data: &GenotypeMatrix,
    config: &TrainConfig<T>,
    order: usize,
    seeds: &[u64],
) -> Result<ComparisonReport<T>> {
    let scan = exhaustive_topk::<T>(data, order, config.report_top_k.max(1))?;
    let best = scan.entries[0].clone();
    let trials = run_trials(data, config, seeds, Some(&best.set))?;
    let reward_consistent = trials
        .trials
        .iter()
        .filter(|t| t.success)
        .all(|t| {
            t.best_sets
                .iter()
                .find(|r| r.set == best.set)
                .is_some_and(|r| r.reward.total == best.reward.total)
        });
    let speedup = trials
        .summary
        .mean_elapsed_seconds_successes
        .map(|m| scan.elapsed_seconds / m);
    Ok(ComparisonReport {
        interaction_order: order,
        exhaustive_elapsed_seconds: scan.elapsed_seconds,
        combinations_evaluated: scan.evaluated,
        best_set: best,
        agent: trials.summary,
        speedup,
        reward_consistent,
    })
}
