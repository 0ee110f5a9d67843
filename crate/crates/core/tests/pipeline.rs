mod common;

use common::{permuted, shuffle_fraction};
use consensus_core::moea::{GAConfig, Matching, ObjectiveTarget};
use consensus_core::pipeline::{run_consensus, ConsensusOptions};
use consensus_core::{adjusted_rand_index, Clustering, ClusteringEnsemble, RandomSeed};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn planted(seed: u64, n: usize, k: u32, noise: f64) -> (ClusteringEnsemble, Clustering) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truth: Vec<u32> = (0..n).map(|i| (i as u32 % k) + 1).collect();
    let members = (0..10)
        .map(|_| {
            let mut l = truth.clone();
            shuffle_fraction(&mut l, noise, &mut rng);
            permuted(&Clustering::new(&l).unwrap(), &mut rng)
        })
        .collect();
    (
        ClusteringEnsemble::new(members).unwrap(),
        Clustering::new(&truth).unwrap(),
    )
}

fn options(seed: u64) -> ConsensusOptions {
    ConsensusOptions {
        ga: GAConfig {
            seed: RandomSeed(seed),
            ..GAConfig::default()
        },
        ..ConsensusOptions::default()
    }
}

#[test]
fn planted_front_contains_a_near_truth_solution() {
    let (base, truth) = planted(3, 300, 4, 0.1);
    let out = run_consensus(&base, &options(3)).unwrap();
    assert_eq!(out.k_hat, 4);
    let best = out
        .front
        .solutions
        .iter()
        .map(|s| adjusted_rand_index(&s.genes, &truth).unwrap())
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(best >= 0.9, "best front ARI to truth {best}");
    assert!(out.trace.is_monotone());
    assert!(out.consensus_objectives.mean_ari >= out.best_member_quality());
}

#[test]
fn consensus_is_reproducible() {
    let (base, _) = planted(4, 120, 3, 0.1);
    let a = run_consensus(&base, &options(8)).unwrap();
    let b = run_consensus(&base, &options(8)).unwrap();
    assert_eq!(a.front, b.front);
    assert_eq!(a.consensus, b.consensus);
    assert_eq!(a.trace, b.trace);
    assert_eq!(a.baseline, b.baseline);
}

#[test]
fn every_option_combination_runs() {
    let (base, _) = planted(5, 80, 3, 0.15);
    for target in [
        ObjectiveTarget::Base,
        ObjectiveTarget::Refined,
        ObjectiveTarget::Union,
    ] {
        for matching in [Matching::Greedy, Matching::Optimal] {
            let mut opts = options(1);
            opts.ga.objective_target = target;
            opts.ga.matching = matching;
            opts.ga.generations = 15;
            opts.dedup_refined = matching == Matching::Greedy;
            let out = run_consensus(&base, &opts).unwrap();
            assert!(!out.front.is_empty());
            assert!(out.trace.is_monotone());
            assert_eq!(out.baseline.k(), out.k_hat);
        }
    }
}
