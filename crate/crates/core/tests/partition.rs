mod common;

use hypaq::builders::{build_adaptive, build_static, WeightModel};
use hypaq::circuit::generators::{gen_random_adaptive, Family};
use hypaq::circuit::parse_circuit;
use hypaq::partition::{
    compute_balance, compute_cut_size, fm_refine, handle_conditional_cuts, initial_partition,
    kl_partition, partition, GainTable, Heuristic, PartitionConfig,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn fm_against_brute_force() {
    let cfg = PartitionConfig::default();
    let graphs = common::partition_corpus();
    let mut optimal = 0;
    for (i, g) in graphs.iter().enumerate() {
        let r = fm_refine(g, &cfg).unwrap();
        let (best, _) = common::brute_force(g, 2, cfg.epsilon, cfg.lambda);
        let cut = common::oracle_cut(g, &r.assignment.block_of);
        assert!(cut >= best - 1e-9, "graph {i}: FM below optimum");
        assert!(
            cut <= 2.0 * best + 1e-9,
            "graph {i}: FM {cut} vs optimum {best}"
        );
        if (cut - best).abs() < 1e-9 {
            optimal += 1;
        }
        let counts = common::oracle_qubit_counts(g, &r.assignment.block_of, 2);
        let nq: usize = counts.iter().sum();
        assert!(counts
            .iter()
            .all(|&c| c as f64 <= common::oracle_capacity(nq, 2, cfg.epsilon) + 1e-9));
    }
    assert!(
        optimal * 10 >= graphs.len() * 8,
        "{optimal}/{}",
        graphs.len()
    );
}

#[test]
fn fm_and_kl_never_worse_than_start() {
    for g in common::partition_corpus() {
        let cfg = PartitionConfig::default();
        let start = compute_cut_size(&g, &initial_partition(&g, &cfg).unwrap()).unwrap();
        for heuristic in [Heuristic::Fm, Heuristic::Kl] {
            let r = partition(
                &g,
                &PartitionConfig {
                    heuristic,
                    ..cfg.clone()
                },
            )
            .unwrap();
            assert!(r.cut_size <= start + 1e-9);
            assert_eq!(r.cut_size, compute_cut_size(&g, &r.assignment).unwrap());
            assert_eq!(r.pass_history[0].1, start);
            assert!(r.pass_history.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-9));
        }
    }
}

#[test]
fn kl_matches_brute_force_on_path() {
    let g = build_static(
        &parse_circuit(&common::corpus_file("path3.qc")).unwrap(),
        &WeightModel::default(),
    )
    .unwrap();
    let cfg = PartitionConfig::default();
    let (best, _) = common::brute_force(&g, 2, cfg.epsilon, cfg.lambda);
    assert_eq!(best, 1.0);
    assert_eq!(kl_partition(&g, &cfg).unwrap().cut_size, best);
    assert_eq!(fm_refine(&g, &cfg).unwrap().cut_size, best);
}

#[test]
fn benchmark_passes_are_monotone() {
    let cfg = PartitionConfig::default();
    for family in Family::ALL {
        for &size in family.default_sizes().iter().take(6) {
            let c = family.at_size(size, 1).build().unwrap();
            let g = build_adaptive(&c, &WeightModel::default(), true).unwrap();
            let r = partition(&g, &cfg).unwrap();
            assert!(r.pass_history.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-9));
            assert!(r.cut_size <= r.pass_history[0].1 + 1e-9);
        }
    }
}

#[test]
fn gain_table_consistency_over_random_moves() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    for seed in 0..20 {
        let g = common::random_hypergraph(1000 + seed, 12);
        let k = rng.gen_range(2..=3).min(g.num_qubits());
        let cfg = PartitionConfig {
            k,
            ..PartitionConfig::default()
        };
        let mut t = GainTable::new(&g, &initial_partition(&g, &cfg).unwrap(), k);
        for _ in 0..50 {
            let v = rng.gen_range(0..g.vertices.len());
            let b = rng.gen_range(0..k);
            let before = t.assignment();
            let (dc, db) = (t.cut_gain(v, b), t.balance_delta(v, b));
            t.apply_move(v, b);
            let after = t.assignment();
            let cut_change =
                common::oracle_cut(&g, &after.block_of) - common::oracle_cut(&g, &before.block_of);
            let bal_change =
                compute_balance(&g, &after, k).unwrap() - compute_balance(&g, &before, k).unwrap();
            assert!((cut_change + dc).abs() < 1e-9);
            assert_eq!(bal_change, db as f64);
            checked += 1;
        }
    }
    assert_eq!(checked, 1000);
}

#[test]
fn weight_scaling_preserves_move_choices() {
    for seed in 0..40 {
        let g = common::random_hypergraph(500 + seed, 12);
        let mut scaled = g.clone();
        for e in &mut scaled.edges {
            e.weight *= 4.0;
        }
        let cfg = PartitionConfig {
            epsilon: 0.5,
            ..PartitionConfig::default()
        };
        let a = fm_refine(&g, &cfg).unwrap();
        let b = fm_refine(&scaled, &PartitionConfig { lambda: 4.0, ..cfg }).unwrap();
        assert_eq!(a.assignment, b.assignment);
        assert_eq!(a.moves_applied, b.moves_applied);
    }
}

#[test]
fn conditional_cut_handling_keeps_assignment() {
    for seed in 0..50u64 {
        let c = gen_random_adaptive(4, 8, seed).unwrap();
        let g = build_adaptive(&c, &WeightModel::default(), seed % 2 == 0).unwrap();
        let cfg = PartitionConfig {
            k: 2 + (seed as usize % 2),
            ..PartitionConfig::default()
        };
        let r = fm_refine(&g, &cfg).unwrap();
        let h = handle_conditional_cuts(&g, r.clone(), &cfg);
        assert_eq!(h.assignment, r.assignment);
        assert_eq!(h.cut_size, r.cut_size);
        let extra: f64 = h
            .comm_records
            .iter()
            .map(|rec| (rec.adjusted_weight - rec.weight) * (rec.blocks.len() - 1) as f64)
            .sum();
        assert!((h.cut_size_with_overhead - h.cut_size - extra).abs() < 1e-9);
        assert!(h.comm_records.iter().all(|rec| rec.blocks.len() >= 2));
    }
}

proptest! {
    #[test]
    fn fm_result_invariants(seed in any::<u64>(), k in 2usize..4, eps in 0.0f64..0.6, lambda in 0.0f64..3.0) {
        let g = common::random_hypergraph(seed, 12);
        prop_assume!(g.num_qubits() >= k);
        let cfg = PartitionConfig { k, epsilon: eps, lambda, ..PartitionConfig::default() };
        let r = partition(&g, &cfg).unwrap();
        prop_assert_eq!(r.cut_size, compute_cut_size(&g, &r.assignment).unwrap());
        prop_assert!((r.cut_size - common::oracle_cut(&g, &r.assignment.block_of)).abs() < 1e-9);
        let counts = common::oracle_qubit_counts(&g, &r.assignment.block_of, k);
        let cap = common::oracle_capacity(g.num_qubits(), k, eps);
        prop_assert!(counts.iter().all(|&c| c as f64 <= cap + 1e-9));
        prop_assert!(r.pass_history.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-9));
        let again = partition(&g, &cfg).unwrap();
        prop_assert_eq!(again.to_json(&g), r.to_json(&g));
    }
}
