//! Property suites for the invariants that hold across all inputs: IO
//! round-trips, encoding inverses, batch splits, reward order-invariance
//! and conservation, and CCR range/symmetry.

mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use episcan::action::ActionSet;
use episcan::data::{
    encode_genotypes, load_dataset, sample_minibatch, write_dataset, Encoding, GenotypeMatrix,
};
use episcan::reward::{ccr, contingency, partition_risk, reward, tabulate, ContingencyTable};

fn matrix_strategy() -> impl Strategy<Value = GenotypeMatrix> {
    (2usize..6, 1usize..16).prop_flat_map(|(n_snps, half_rows)| {
        let rows = 2 * half_rows;
        proptest::collection::vec(0u8..3, rows * n_snps).prop_map(move |genotypes| {
            let labels = (0..rows).map(|i| (i % 2) as u8).collect();
            let names = (0..n_snps).map(|i| format!("P{i}")).collect();
            GenotypeMatrix::new(genotypes, labels, names).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn writer_loader_round_trip_is_identity(data in matrix_strategy()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rt.tsv");
        write_dataset(&path, &data).unwrap();
        let back = load_dataset(&path).unwrap();
        prop_assert_eq!(&data, &back);
    }

    #[test]
    fn one_hot_argmax_recovers_codes(data in matrix_strategy(), seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let batch = sample_minibatch(&data, 2, &mut rng).unwrap();
        let hot = encode_genotypes::<f64>(&data, &batch, Encoding::OneHot);
        let raw = encode_genotypes::<f64>(&data, &batch, Encoding::RawCodes);
        for (r, &row_index) in batch.rows().iter().enumerate() {
            for s in 0..data.n_snps() {
                let slot = &hot.row(r)[3 * s..3 * s + 3];
                let argmax = (0..3).max_by(|&a, &b| slot[a].partial_cmp(&slot[b]).unwrap()).unwrap();
                prop_assert_eq!(argmax as u8, data.genotype(row_index, s));
                prop_assert_eq!(slot.iter().sum::<f64>(), 1.0);
                prop_assert_eq!(raw.row(r)[s], data.genotype(row_index, s) as f64);
            }
        }
    }

    #[test]
    fn minibatches_split_exactly_in_half(
        data in matrix_strategy(),
        half in 1usize..8,
        seed in 0u64..1000,
    ) {
        let half = half.min(data.n_controls()).min(data.n_cases());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let batch = sample_minibatch(&data, 2 * half, &mut rng).unwrap();
        prop_assert_eq!(batch.control_half().len(), half);
        prop_assert_eq!(batch.case_half().len(), half);
        prop_assert!(batch.control_half().iter().all(|&r| !data.is_case(r)));
        prop_assert!(batch.case_half().iter().all(|&r| data.is_case(r)));
        let mut sorted = batch.rows().to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        prop_assert_eq!(sorted.len(), 2 * half, "a row repeated within the batch");
    }

    #[test]
    fn reward_is_order_invariant_and_conservative(
        data in matrix_strategy(),
        picks in proptest::collection::vec(0usize..6, 2..4),
        ) {
        let mut indices: Vec<usize> = picks.iter().map(|&p| p % data.n_snps()).collect();
        indices.sort_unstable();
        indices.dedup();
        prop_assume!(indices.len() >= 2);

        let forward = ActionSet::new(indices.clone()).unwrap();
        let mut reversed_input = indices.clone();
        reversed_input.reverse();
        let backward = ActionSet::new(reversed_input).unwrap();
        let a = reward::<f64>(&data, &forward).unwrap();
        let b = reward::<f64>(&data, &backward).unwrap();
        prop_assert_eq!(a, b);
        prop_assert_eq!(a.total, a.ccr + a.utility);

        let cells = tabulate(&data, &forward).unwrap();
        let table = contingency(&cells, &partition_risk(&cells));
        prop_assert_eq!(table.true_positives + table.false_negatives, data.n_cases() as u64);
        prop_assert_eq!(table.false_positives + table.true_negatives, data.n_controls() as u64);
        let c: f64 = ccr(&table);
        prop_assert!((0.0..=1.0).contains(&c));
    }

    // Chance-level symmetry: TP*TN = FP*FN (with both class denominators
    // positive) forces sensitivity + specificity = 1, hence CCR = 1/2.
    // The product form TP=xy, FP=xw, FN=yz, TN=zw generates exactly such
    // tables.
    #[test]
    fn chance_level_tables_score_half(
        x in 0u64..12, z in 0u64..12, y in 1u64..12, w in 1u64..12,
    ) {
        prop_assume!(x + z > 0);
        let table = ContingencyTable {
            true_positives: x * y,
            false_positives: x * w,
            false_negatives: y * z,
            true_negatives: z * w,
        };
        let c: f64 = ccr(&table);
        prop_assert!((c - 0.5).abs() < 1e-12, "ccr = {}", c);
    }
}

#[test]
fn planted_scale_dataset_round_trips_with_exact_counts() {
    let (data, _) = common::planted_dataset();
    assert_eq!(data.n_snps(), 100);
    assert_eq!(data.n_controls(), 300);
    assert_eq!(data.n_cases(), 300);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("planted.tsv");
    write_dataset(&path, &data).unwrap();
    let back = load_dataset(&path).unwrap();
    assert_eq!(data, back);
}

#[test]
fn sampler_row_frequencies_are_uniform_within_class() {
    // 1000 draws of K=32 on the 300/300 dataset: each row is included
    // with probability 16/300 per draw; check every row against 5 SE.
    let (data, _) = common::planted_dataset();
    let mut rng = ChaCha8Rng::seed_from_u64(314);
    let draws = 1000usize;
    let mut counts = vec![0u32; data.n_rows()];
    for _ in 0..draws {
        let batch = sample_minibatch(&data, 32, &mut rng).unwrap();
        for &r in batch.rows() {
            counts[r] += 1;
        }
    }
    let p = 16.0 / 300.0;
    let expected = draws as f64 * p;
    let se = (draws as f64 * p * (1.0 - p)).sqrt();
    for (row, &c) in counts.iter().enumerate() {
        assert!(
            (c as f64 - expected).abs() < 5.0 * se,
            "row {row}: included {c} times, expected {expected:.1} +- {se:.1}"
        );
    }
}

#[test]
fn exhaustive_top1_dominates_agent_pair_rewards() {
    // restrict the agent to pairs so the k=2 scan bounds everything it sees
    let (data, _) = common::planted_dataset();
    let scan = episcan::exhaustive::exhaustive_topk::<f64>(&data, 2, 1).unwrap();
    let best = scan.entries[0].reward.total;
    let cfg = episcan::agent::TrainConfig::<f64> {
        max_set_size: 2,
        max_iterations: 300,
        seed: 77,
        ..Default::default()
    };
    let report = episcan::agent::train(&data, &cfg, None).unwrap();
    for ranked in &report.best_sets {
        assert_eq!(ranked.set.order(), 2);
        assert!(
            ranked.reward.total <= best,
            "agent found {} with reward {} above the exhaustive optimum {best}",
            ranked.set,
            ranked.reward.total
        );
    }
    assert!(report.reward_trajectory.iter().all(|&r| r <= best));
}

#[test]
fn scalar_f32_instantiation_matches_f64_closely() {
    let data = GenotypeMatrix::new(
        vec![0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1],
        vec![1, 1, 0, 0, 0, 1],
        vec!["A".into(), "B".into()],
    )
    .unwrap();
    let set = ActionSet::new(vec![0, 1]).unwrap();
    let single = reward::<f32>(&data, &set).unwrap();
    let double = reward::<f64>(&data, &set).unwrap();
    assert!((single.total as f64 - double.total).abs() < 1e-6);
    assert!((single.total - 7.0f32 / 9.0).abs() < 1e-6);

    // the agent trains in f32 as well
    let wide = common::planted_dataset().0;
    let cfg = episcan::agent::TrainConfig::<f32> {
        max_iterations: 20,
        batch_size: 8,
        hidden_policy: 8,
        hidden_value: 8,
        ..Default::default()
    };
    let report = episcan::agent::train(&wide, &cfg, None).unwrap();
    assert_eq!(report.reward_trajectory.len(), 20);
    assert!(report.reward_trajectory.iter().all(|r| r.is_finite()));
}
