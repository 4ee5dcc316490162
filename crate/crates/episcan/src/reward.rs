//! Interaction reward for a selected SNP set.
//!
//! The pipeline collapses the selected columns into their 3^n joint-genotype
//! cells, labels each non-empty cell high- or low-risk by its case:control
//! ratio, folds the cells into a 2x2 contingency table, and scores the table
//! with the correct classification rate (CCR) plus the chi-square-derived
//! rule utility. The reward of a set is `ccr + utility`.
//!
//! Cells are indexed in base 3 with the set's smallest SNP index as the most
//! significant digit, so tabulations are reproducible across implementations.
//!
//! All operations are pure and safe for concurrent callers over a shared
//! dataset.

use serde::{Deserialize, Serialize};

use crate::action::ActionSet;
use crate::data::GenotypeMatrix;
use crate::error::{Error, Result};
use crate::num::Real;

/// Largest supported interaction order; 3^12 cell tables still fit easily
/// in memory, anything beyond is almost certainly a caller bug.
pub const MAX_SET_ORDER: usize = 12;

/// Guard for the rule-utility denominator.
pub const UTILITY_DENOM_EPSILON: f64 = 1e-12;

/// Case/control counts per joint-genotype combination of a selected set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellCounts {
    controls: Vec<u32>,
    cases: Vec<u32>,
    order: usize,
}

impl CellCounts {
    /// Number of joint-genotype cells (3^order).
    pub fn n_cells(&self) -> usize {
        self.controls.len()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// (control count, case count) for one cell.
    pub fn cell(&self, index: usize) -> (u32, u32) {
        (self.controls[index], self.cases[index])
    }
}

/// Risk class of one joint-genotype cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Risk {
    High,
    Low,
    /// No sequence carries this combination; excluded from both groups.
    Empty,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RiskPartition {
    classes: Vec<Risk>,
}

impl RiskPartition {
    pub fn classes(&self) -> &[Risk] {
        &self.classes
    }
}

/// 2x2 fold of the risk partition: cases and controls inside each group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable {
    /// Cases in high-risk cells.
    pub true_positives: u64,
    /// Controls in high-risk cells.
    pub false_positives: u64,
    /// Cases in low-risk cells.
    pub false_negatives: u64,
    /// Controls in low-risk cells.
    pub true_negatives: u64,
}

/// The scored reward of a SNP set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardValue<T> {
    pub ccr: T,
    pub utility: T,
    pub total: T,
}

/// Counts the control/case sequences in every joint-genotype cell of the
/// selected columns.
pub fn tabulate(data: &GenotypeMatrix, snps: &ActionSet) -> Result<CellCounts> {
    let n = snps.order();
    if n > MAX_SET_ORDER {
        return Err(Error::Capacity {
            detail: format!(
                "interaction order {n} exceeds the supported maximum of {MAX_SET_ORDER}"
            ),
        });
    }
    if let Some(&bad) = snps.indices().iter().find(|&&s| s >= data.n_snps()) {
        return Err(Error::precondition(format!(
            "SNP index {bad} out of bounds for a dataset with {} SNPs",
            data.n_snps()
        )));
    }
    let n_cells = 3usize.pow(n as u32);
    let mut controls = vec![0u32; n_cells];
    let mut cases = vec![0u32; n_cells];
    for row in 0..data.n_rows() {
        let mut cell = 0usize;
        for &s in snps.indices() {
            cell = cell * 3 + data.genotype(row, s) as usize;
        }
        if data.is_case(row) {
            cases[cell] += 1;
        } else {
            controls[cell] += 1;
        }
    }
    Ok(CellCounts {
        controls,
        cases,
        order: n,
    })
}

/// Labels each cell: high-risk when cases >= controls (a case:control ratio
/// of at least 1, including the zero-control case), low-risk otherwise,
/// empty when the cell holds no sequence at all.
pub fn partition_risk(cells: &CellCounts) -> RiskPartition {
    let classes = cells
        .controls
        .iter()
        .zip(&cells.cases)
        .map(|(&ctl, &cas)| {
            if ctl == 0 && cas == 0 {
                Risk::Empty
            } else if cas >= ctl {
                Risk::High
            } else {
                Risk::Low
            }
        })
        .collect();
    RiskPartition { classes }
}

/// Folds the partitioned cells into the 2x2 table. Empty cells contribute
/// nothing, so `TP+FN = t2` and `FP+TN = t1` always.
pub fn contingency(cells: &CellCounts, partition: &RiskPartition) -> ContingencyTable {
    let mut table = ContingencyTable {
        true_positives: 0,
        false_positives: 0,
        false_negatives: 0,
        true_negatives: 0,
    };
    for (i, risk) in partition.classes.iter().enumerate() {
        let (ctl, cas) = cells.cell(i);
        match risk {
            Risk::High => {
                table.true_positives += cas as u64;
                table.false_positives += ctl as u64;
            }
            Risk::Low => {
                table.false_negatives += cas as u64;
                table.true_negatives += ctl as u64;
            }
            Risk::Empty => {}
        }
    }
    table
}

/// Correct classification rate: `0.5 * (TP/(TP+FN) + TN/(FP+TN))`.
/// A zero denominator contributes 0 to its term.
pub fn ccr<T: Real>(table: &ContingencyTable) -> T {
    let tp = table.true_positives;
    let fp = table.false_positives;
    let fneg = table.false_negatives;
    let tn = table.true_negatives;
    let sensitivity = if tp + fneg > 0 {
        T::from_count(tp) / T::from_count(tp + fneg)
    } else {
        T::zero()
    };
    let specificity = if fp + tn > 0 {
        T::from_count(tn) / T::from_count(fp + tn)
    } else {
        T::zero()
    };
    T::of(0.5) * (sensitivity + specificity)
}

/// Rule utility: `(R - delta)^2 / ((1 + delta) * (gamma - delta - 1))` with
/// `R = (FP+TN)/(TP+FN)`, `delta = FP/TP`, `gamma = (TP+FP+TN+FN)/TP`.
/// Degenerate tables (no true positives, no cases, or a vanishing
/// denominator) score 0 so the reward stays total.
pub fn rule_utility<T: Real>(table: &ContingencyTable) -> T {
    let tp = table.true_positives;
    let fp = table.false_positives;
    let fneg = table.false_negatives;
    let tn = table.true_negatives;
    if tp == 0 || tp + fneg == 0 {
        return T::zero();
    }
    let ratio = T::from_count(fp + tn) / T::from_count(tp + fneg);
    let delta = T::from_count(fp) / T::from_count(tp);
    let gamma = T::from_count(tp + fp + tn + fneg) / T::from_count(tp);
    let denom = (T::one() + delta) * (gamma - delta - T::one());
    if denom <= T::of(UTILITY_DENOM_EPSILON) {
        return T::zero();
    }
    let diff = ratio - delta;
    diff * diff / denom
}

/// Scores a SNP set on the full dataset: tabulate, partition, fold, then
/// `ccr + utility`. Pure, and order-invariant in the set's SNP indices.
pub fn reward<T: Real>(data: &GenotypeMatrix, snps: &ActionSet) -> Result<RewardValue<T>> {
    let cells = tabulate(data, snps)?;
    let partition = partition_risk(&cells);
    let table = contingency(&cells, &partition);
    let ccr_value = ccr::<T>(&table);
    let utility = rule_utility::<T>(&table);
    Ok(RewardValue {
        ccr: ccr_value,
        utility,
        total: ccr_value + utility,
    })
}
