//! Penetrance-table dataset simulator.
//!
//! Genotypes are drawn under Hardy-Weinberg equilibrium (independent SNPs,
//! no linkage disequilibrium). Disease status is assigned from the joint
//! genotype of the planted interacting SNPs via the penetrance table, and
//! rows are rejection-sampled until the requested class counts are filled.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::GenotypeMatrix;
use crate::error::{Error, Result};

/// Ground-truth disease model for the simulator.
///
/// `heritability` and `prevalence` are descriptive metadata carried along
/// with a table; they are never solved for.
#[derive(Clone, Debug, PartialEq)]
pub struct PenetranceModel {
    /// Column indices of the interacting SNPs, in table-digit order
    /// (first index is the most significant base-3 digit).
    pub interacting_snps: Vec<usize>,
    /// Minor-allele frequency of each interacting SNP, in (0, 0.5].
    pub maf: Vec<f64>,
    /// P(case | joint genotype), 3^k entries in [0,1].
    pub penetrance: Vec<f64>,
    /// Number of non-interacting columns.
    pub background_snps: usize,
    /// Minor-allele frequency shared by every background SNP.
    pub background_maf: f64,
    pub seed: u64,
    /// Maximum candidate rows drawn before the simulation is declared
    /// unsatisfiable. 0 means the default of `200 * rows + 10_000`.
    pub rejection_budget: u64,
    pub heritability: Option<f64>,
    pub prevalence: Option<f64>,
}

impl PenetranceModel {
    /// Total number of columns in a simulated dataset.
    pub fn n_snps(&self) -> usize {
        self.background_snps + self.interacting_snps.len()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.interacting_snps.len();
        if k == 0 {
            return Err(Error::invalid("model must plant at least one SNP"));
        }
        if self.maf.len() != k {
            return Err(Error::invalid(format!(
                "expected {k} minor-allele frequencies, got {}",
                self.maf.len()
            )));
        }
        let cells = 3usize
            .checked_pow(k as u32)
            .ok_or_else(|| Error::invalid("penetrance table size overflows"))?;
        if self.penetrance.len() != cells {
            return Err(Error::invalid(format!(
                "penetrance table must have 3^{k} = {cells} entries, got {}",
                self.penetrance.len()
            )));
        }
        if self.penetrance.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(Error::invalid("penetrance entries must lie in [0,1]"));
        }
        for (i, &c) in self.interacting_snps.iter().enumerate() {
            if self.interacting_snps[..i].contains(&c) {
                return Err(Error::invalid(format!("duplicate interacting column {c}")));
            }
            if c >= self.n_snps() {
                return Err(Error::invalid(format!(
                    "interacting column {c} out of bounds for {} SNPs",
                    self.n_snps()
                )));
            }
        }
        for &q in self.maf.iter().chain(std::iter::once(&self.background_maf)) {
            if !(q > 0.0 && q <= 0.5) {
                return Err(Error::invalid(format!(
                    "minor-allele frequency {q} outside (0, 0.5]"
                )));
            }
        }
        Ok(())
    }

    fn budget(&self, rows: u64) -> u64 {
        if self.rejection_budget > 0 {
            self.rejection_budget
        } else {
            200 * rows + 10_000
        }
    }
}

/// Hardy-Weinberg genotype draw: P(0)=p^2, P(1)=2pq, P(2)=q^2 with q = maf.
#[inline]
fn sample_genotype<R: Rng>(maf: f64, rng: &mut R) -> u8 {
    let p = 1.0 - maf;
    let u: f64 = rng.gen();
    if u < p * p {
        0
    } else if u < p * p + 2.0 * p * maf {
        1
    } else {
        2
    }
}

/// Simulates a dataset with exactly `n_case` case rows and `n_control`
/// control rows. Deterministic for a fixed model (including seed). Rows
/// appear in draw order.
pub fn simulate_dataset(
    model: &PenetranceModel,
    n_case: usize,
    n_control: usize,
) -> Result<GenotypeMatrix> {
    model.validate()?;
    if n_case == 0 || n_control == 0 {
        return Err(Error::precondition(
            "n_case and n_control must both be at least 1",
        ));
    }
    let l = model.n_snps();
    let rows = n_case + n_control;
    let budget = model.budget(rows as u64);

    // column -> slot in the interacting list, if planted
    let mut slot_of: Vec<Option<usize>> = vec![None; l];
    for (slot, &col) in model.interacting_snps.iter().enumerate() {
        slot_of[col] = Some(slot);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    let mut genotypes = Vec::with_capacity(rows * l);
    let mut labels = Vec::with_capacity(rows);
    let mut cases_left = n_case;
    let mut controls_left = n_control;
    let mut row = vec![0u8; l];

    let mut drawn: u64 = 0;
    while cases_left > 0 || controls_left > 0 {
        if drawn >= budget {
            return Err(Error::Unsatisfiable {
                detail: format!(
                    "rejection budget of {budget} candidate rows exhausted with {cases_left} \
                     case and {controls_left} control rows still unfilled"
                ),
            });
        }
        drawn += 1;

        for (c, slot) in slot_of.iter().enumerate() {
            row[c] = match slot {
                Some(s) => sample_genotype(model.maf[*s], &mut rng),
                None => sample_genotype(model.background_maf, &mut rng),
            };
        }
        let mut cell = 0usize;
        for &col in &model.interacting_snps {
            cell = cell * 3 + row[col] as usize;
        }
        let diseased = rng.gen::<f64>() < model.penetrance[cell];
        let keep = if diseased {
            if cases_left > 0 {
                cases_left -= 1;
                labels.push(1);
                true
            } else {
                false
            }
        } else if controls_left > 0 {
            controls_left -= 1;
            labels.push(0);
            true
        } else {
            false
        };
        if keep {
            genotypes.extend_from_slice(&row);
        }
    }

    let snp_names = (0..l).map(|i| format!("SNP{i}")).collect();
    GenotypeMatrix::new(genotypes, labels, snp_names)
}
