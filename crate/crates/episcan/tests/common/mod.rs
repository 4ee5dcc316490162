//! Shared fixtures for the integration suites.

// each integration test target compiles this module separately and none
// uses every helper
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use episcan::action::ActionSet;
use episcan::config::load_sim_config;
use episcan::data::{simulate_dataset, GenotypeMatrix};

pub mod oracle;

/// The shipped planted-pair dataset: 100 SNPs, 300/300 rows, XOR-like
/// strongly penetrant 2-locus model. Deterministic.
pub fn planted_dataset() -> (GenotypeMatrix, ActionSet) {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/sim_2locus.cfg");
    let sim = load_sim_config(path).expect("shipped simulator config parses");
    let data = simulate_dataset(&sim.model, sim.n_case, sim.n_control).expect("simulation fills");
    let truth = ActionSet::new(sim.model.interacting_snps.clone()).unwrap();
    (data, truth)
}

/// Random dataset with `min_snps..=max_snps` SNPs and at most `max_rows`
/// rows; at least 8 rows of each class, so batches up to 16 always fit.
pub fn random_dataset(
    rng: &mut ChaCha8Rng,
    min_snps: usize,
    max_snps: usize,
    max_rows: usize,
) -> GenotypeMatrix {
    let n_snps = rng.gen_range(min_snps..=max_snps);
    let rows = rng.gen_range(16..=max_rows.max(16));
    let genotypes: Vec<u8> = (0..rows * n_snps).map(|_| rng.gen_range(0..=2)).collect();
    let mut labels: Vec<u8> = (0..rows).map(|_| rng.gen_range(0..=1)).collect();
    for (i, label) in labels.iter_mut().take(16).enumerate() {
        *label = (i % 2) as u8;
    }
    let names = (0..n_snps).map(|i| format!("S{i}")).collect();
    GenotypeMatrix::new(genotypes, labels, names).unwrap()
}
