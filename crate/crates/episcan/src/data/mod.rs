//! Case/control genotype datasets: loading, simulation, mini-batching and
//! numeric encoding.
//!
//! A dataset is a `(controls + cases) x snps` matrix of genotype codes in
//! {0,1,2} with a binary class label per row (0 = control, 1 = case). The
//! matrix is immutable after construction and safe to share across threads;
//! samplers take an explicit caller-owned random stream.

mod io;
mod simulate;

pub use io::{load_dataset, render_dataset, write_dataset};
pub use simulate::{simulate_dataset, PenetranceModel};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;

/// Validated case/control genotype matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenotypeMatrix {
    genotypes: Vec<u8>, // row-major, rows x n_snps
    labels: Vec<u8>,    // 0 = control, 1 = case
    snp_names: Vec<String>,
    n_snps: usize,
    control_rows: Vec<usize>,
    case_rows: Vec<usize>,
}

impl GenotypeMatrix {
    /// Validates and assembles a matrix from row-major genotype codes,
    /// per-row labels and per-column SNP names.
    pub fn new(genotypes: Vec<u8>, labels: Vec<u8>, snp_names: Vec<String>) -> Result<Self> {
        let n_snps = snp_names.len();
        if n_snps == 0 {
            return Err(Error::invalid("dataset must contain at least one SNP"));
        }
        if genotypes.len() != labels.len() * n_snps {
            return Err(Error::invalid(format!(
                "genotype buffer holds {} cells, expected {} rows x {} SNPs",
                genotypes.len(),
                labels.len(),
                n_snps
            )));
        }
        for (i, a) in snp_names.iter().enumerate() {
            if snp_names[..i].contains(a) {
                return Err(Error::invalid(format!("duplicate SNP name {a:?}")));
            }
        }
        if let Some(pos) = genotypes.iter().position(|&g| g > 2) {
            let row = pos / n_snps;
            let column = pos % n_snps;
            return Err(Error::GenotypeDomain {
                row: row + 1,
                column: column + 1,
                snp: snp_names[column].clone(),
                found: genotypes[pos].to_string(),
            });
        }
        if let Some(row) = labels.iter().position(|&c| c > 1) {
            return Err(Error::ClassDomain {
                row: row + 1,
                found: labels[row].to_string(),
            });
        }
        let mut control_rows = Vec::new();
        let mut case_rows = Vec::new();
        for (r, &label) in labels.iter().enumerate() {
            if label == 0 {
                control_rows.push(r);
            } else {
                case_rows.push(r);
            }
        }
        if control_rows.is_empty() {
            return Err(Error::MissingClass { class: "control" });
        }
        if case_rows.is_empty() {
            return Err(Error::MissingClass { class: "case" });
        }
        Ok(GenotypeMatrix {
            genotypes,
            labels,
            snp_names,
            n_snps,
            control_rows,
            case_rows,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_snps(&self) -> usize {
        self.n_snps
    }

    /// Number of control rows (t1).
    pub fn n_controls(&self) -> usize {
        self.control_rows.len()
    }

    /// Number of case rows (t2).
    pub fn n_cases(&self) -> usize {
        self.case_rows.len()
    }

    #[inline]
    pub fn genotype(&self, row: usize, column: usize) -> u8 {
        self.genotypes[row * self.n_snps + column]
    }

    #[inline]
    pub fn row(&self, row: usize) -> &[u8] {
        &self.genotypes[row * self.n_snps..(row + 1) * self.n_snps]
    }

    #[inline]
    pub fn is_case(&self, row: usize) -> bool {
        self.labels[row] == 1
    }

    pub fn label(&self, row: usize) -> u8 {
        self.labels[row]
    }

    pub fn snp_names(&self) -> &[String] {
        &self.snp_names
    }

    pub fn snp_index(&self, name: &str) -> Option<usize> {
        self.snp_names.iter().position(|n| n == name)
    }

    pub(crate) fn control_rows(&self) -> &[usize] {
        &self.control_rows
    }

    pub(crate) fn case_rows(&self) -> &[usize] {
        &self.case_rows
    }
}

/// Row indices of one sampled mini-batch: exactly `K/2` controls followed by
/// `K/2` cases, drawn without replacement within each class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Minibatch {
    indices: Vec<usize>,
    half: usize,
}

impl Minibatch {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Row indices into the source matrix, controls first.
    pub fn rows(&self) -> &[usize] {
        &self.indices
    }

    pub fn control_half(&self) -> &[usize] {
        &self.indices[..self.half]
    }

    pub fn case_half(&self) -> &[usize] {
        &self.indices[self.half..]
    }
}

/// Draws `batch_size` rows, half from each class, without replacement within
/// the batch.
pub fn sample_minibatch<R: Rng>(
    data: &GenotypeMatrix,
    batch_size: usize,
    rng: &mut R,
) -> Result<Minibatch> {
    if batch_size == 0 || !batch_size.is_multiple_of(2) {
        return Err(Error::precondition(format!(
            "batch size must be a positive even number, got {batch_size}"
        )));
    }
    let half = batch_size / 2;
    if half > data.n_controls() || half > data.n_cases() {
        return Err(Error::precondition(format!(
            "batch size {batch_size} needs {half} rows per class, dataset has {} controls and {} cases",
            data.n_controls(),
            data.n_cases()
        )));
    }
    let mut indices = Vec::with_capacity(batch_size);
    indices.extend(draw_without_replacement(data.control_rows(), half, rng));
    indices.extend(draw_without_replacement(data.case_rows(), half, rng));
    Ok(Minibatch { indices, half })
}

// Partial Fisher-Yates over a copy of the pool.
fn draw_without_replacement<R: Rng>(pool: &[usize], take: usize, rng: &mut R) -> Vec<usize> {
    let mut scratch = pool.to_vec();
    for i in 0..take {
        let j = rng.gen_range(i..scratch.len());
        scratch.swap(i, j);
    }
    scratch.truncate(take);
    scratch
}

/// Numeric encoding scheme for genotype codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Encoding {
    /// {0,1,2} as floats {0.0,1.0,2.0}; one value per SNP.
    RawCodes,
    /// Each genotype as a 3-vector; three values per SNP.
    OneHot,
}

impl Encoding {
    /// Encoded row width for a dataset with `n_snps` columns.
    pub fn width(self, n_snps: usize) -> usize {
        n_snps * self.channels()
    }

    /// Values per SNP position (conv-encoder input channels).
    pub fn channels(self) -> usize {
        match self {
            Encoding::RawCodes => 1,
            Encoding::OneHot => 3,
        }
    }
}

impl std::str::FromStr for Encoding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw_codes" => Ok(Encoding::RawCodes),
            "one_hot" => Ok(Encoding::OneHot),
            other => Err(Error::config(format!(
                "unknown encoding {other:?} (expected raw_codes or one_hot)"
            ))),
        }
    }
}

/// A mini-batch rendered as a dense row-major numeric tensor.
#[derive(Clone, Debug)]
pub struct EncodedBatch<T> {
    pub values: Vec<T>,
    pub rows: usize,
    pub cols: usize,
}

impl<T: Real> EncodedBatch<T> {
    #[inline]
    pub fn row(&self, r: usize) -> &[T] {
        &self.values[r * self.cols..(r + 1) * self.cols]
    }
}

/// Encodes the batch rows of `data` under `scheme`. Output shape is
/// `K x n_snps` for raw codes and `K x 3*n_snps` for one-hot.
pub fn encode_genotypes<T: Real>(
    data: &GenotypeMatrix,
    batch: &Minibatch,
    scheme: Encoding,
) -> EncodedBatch<T> {
    let cols = scheme.width(data.n_snps());
    let mut values = Vec::with_capacity(batch.len() * cols);
    for &r in batch.rows() {
        for &code in data.row(r) {
            match scheme {
                Encoding::RawCodes => values.push(T::from_count(code as u64)),
                Encoding::OneHot => {
                    for slot in 0..3u8 {
                        values.push(if slot == code { T::one() } else { T::zero() });
                    }
                }
            }
        }
    }
    EncodedBatch {
        values,
        rows: batch.len(),
        cols,
    }
}

/// Quick balanced dataset with no planted signal, for tests.
#[cfg(test)]
pub(crate) fn simulate_smoke(n_snps: usize, rows_per_class: usize, seed: u64) -> GenotypeMatrix {
    let model = PenetranceModel {
        interacting_snps: vec![0],
        maf: vec![0.3],
        penetrance: vec![0.5, 0.5, 0.5],
        background_snps: n_snps - 1,
        background_maf: 0.3,
        seed,
        rejection_budget: 0,
        heritability: None,
        prevalence: None,
    };
    simulate_dataset(&model, rows_per_class, rows_per_class).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn toy_matrix() -> GenotypeMatrix {
        // Two controls, two cases over three SNPs.
        GenotypeMatrix::new(
            vec![0, 1, 2, 2, 1, 0, 1, 1, 1, 0, 0, 2],
            vec![0, 0, 1, 1],
            vec!["SNP0".into(), "SNP1".into(), "SNP2".into()],
        )
        .unwrap()
    }

    #[test]
    fn construction_counts_classes() {
        let m = toy_matrix();
        assert_eq!(m.n_rows(), 4);
        assert_eq!(m.n_snps(), 3);
        assert_eq!(m.n_controls(), 2);
        assert_eq!(m.n_cases(), 2);
        assert_eq!(m.genotype(1, 0), 2);
        assert!(m.is_case(2));
        assert_eq!(m.snp_index("SNP2"), Some(2));
    }

    #[test]
    fn rejects_domain_violations() {
        let err = GenotypeMatrix::new(
            vec![0, 3],
            vec![0, 1],
            vec!["A".into()],
        )
        .unwrap_err();
        assert!(matches!(err, Error::GenotypeDomain { row: 2, column: 1, .. }));

        let err = GenotypeMatrix::new(vec![0, 1], vec![0, 2], vec!["A".into()]).unwrap_err();
        assert!(matches!(err, Error::ClassDomain { row: 2, .. }));

        let err = GenotypeMatrix::new(vec![0, 1], vec![0, 0], vec!["A".into()]).unwrap_err();
        assert!(matches!(err, Error::MissingClass { class: "case" }));

        let err =
            GenotypeMatrix::new(vec![0, 0], vec![0, 1], vec!["A".into(), "A".into()]).unwrap_err();
        assert!(matches!(err, Error::Invalid { .. }));
    }

    #[test]
    fn minibatch_exhausts_tiny_dataset() {
        let m = toy_matrix();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = sample_minibatch(&m, 4, &mut rng).unwrap();
        assert_eq!(b.len(), 4);
        assert_eq!(b.control_half().len(), 2);
        assert_eq!(b.case_half().len(), 2);
        let mut rows = b.rows().to_vec();
        rows.sort_unstable();
        assert_eq!(rows, vec![0, 1, 2, 3]);
    }

    #[test]
    fn minibatch_preconditions() {
        let m = toy_matrix();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            sample_minibatch(&m, 3, &mut rng),
            Err(Error::Precondition { .. })
        ));
        assert!(matches!(
            sample_minibatch(&m, 6, &mut rng),
            Err(Error::Precondition { .. })
        ));
    }

    #[test]
    fn encode_one_hot_and_raw() {
        let m = toy_matrix();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = sample_minibatch(&m, 4, &mut rng).unwrap();

        let raw: EncodedBatch<f64> = encode_genotypes(&m, &b, Encoding::RawCodes);
        assert_eq!((raw.rows, raw.cols), (4, 3));
        for (i, &r) in b.rows().iter().enumerate() {
            for c in 0..3 {
                assert_eq!(raw.row(i)[c], m.genotype(r, c) as f64);
            }
        }

        let hot: EncodedBatch<f64> = encode_genotypes(&m, &b, Encoding::OneHot);
        assert_eq!((hot.rows, hot.cols), (4, 9));
        // genotype 1 -> (0,1,0)
        let r0 = hot.row(0);
        let g = m.genotype(b.rows()[0], 1) as usize;
        assert_eq!(r0[3 + g], 1.0);
        assert_eq!(r0[3..6].iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn raw_encoding_of_zero_row_is_zero_vector() {
        let m = GenotypeMatrix::new(
            vec![0, 0, 0, 1, 2, 0],
            vec![1, 0],
            vec!["A".into(), "B".into(), "C".into()],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let b = sample_minibatch(&m, 2, &mut rng).unwrap();
        let raw: EncodedBatch<f64> = encode_genotypes(&m, &b, Encoding::RawCodes);
        let zero_row = b.rows().iter().position(|&r| r == 0).unwrap();
        assert!(raw.row(zero_row).iter().all(|&v| v == 0.0));
    }
}
