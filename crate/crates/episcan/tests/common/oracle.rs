//! Independent brute-force reward implementation.
//!
//! Deliberately structured differently from the library: joint genotypes
//! are collected in a hash map keyed by the raw genotype vector instead of
//! base-3 cell tables, and the statistics are written out as plain f64
//! expressions. Only the operation order of the final formulas matches the
//! library contract, so agreement is expected to be bit-exact.

use std::collections::HashMap;

use episcan::data::GenotypeMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BruteTable {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

/// Nested-loop recount: joint genotype -> (controls, cases).
pub fn brute_force_cells(data: &GenotypeMatrix, snps: &[usize]) -> HashMap<Vec<u8>, (u64, u64)> {
    let mut cells: HashMap<Vec<u8>, (u64, u64)> = HashMap::new();
    for row in 0..data.n_rows() {
        let key: Vec<u8> = snps.iter().map(|&s| data.genotype(row, s)).collect();
        let entry = cells.entry(key).or_insert((0, 0));
        if data.is_case(row) {
            entry.1 += 1;
        } else {
            entry.0 += 1;
        }
    }
    cells
}

/// The high/low-risk fold of the recount.
pub fn brute_force_table(data: &GenotypeMatrix, snps: &[usize]) -> BruteTable {
    let mut table = BruteTable {
        tp: 0,
        fp: 0,
        fn_: 0,
        tn: 0,
    };
    for (controls, cases) in brute_force_cells(data, snps).values() {
        // never both zero: the map only holds observed combinations
        if cases >= controls {
            table.tp += cases;
            table.fp += controls;
        } else {
            table.fn_ += cases;
            table.tn += controls;
        }
    }
    table
}

pub fn brute_force_ccr(t: &BruteTable) -> f64 {
    let sensitivity = if t.tp + t.fn_ > 0 {
        t.tp as f64 / (t.tp + t.fn_) as f64
    } else {
        0.0
    };
    let specificity = if t.fp + t.tn > 0 {
        t.tn as f64 / (t.fp + t.tn) as f64
    } else {
        0.0
    };
    0.5 * (sensitivity + specificity)
}

pub fn brute_force_utility(t: &BruteTable) -> f64 {
    if t.tp == 0 || t.tp + t.fn_ == 0 {
        return 0.0;
    }
    let ratio = (t.fp + t.tn) as f64 / (t.tp + t.fn_) as f64;
    let delta = t.fp as f64 / t.tp as f64;
    let gamma = (t.tp + t.fp + t.tn + t.fn_) as f64 / t.tp as f64;
    let denom = (1.0 + delta) * (gamma - delta - 1.0);
    if denom <= 1e-12 {
        return 0.0;
    }
    let diff = ratio - delta;
    diff * diff / denom
}
