mod common;

use common::{brute_force_ari, permuted};
use consensus_core::coassoc::{
    build_weighted_coassoc, connected_components, threshold_sweep, CoassocMode,
};
use consensus_core::metrics::quality_weights;
use consensus_core::moea::{crossover_at, fast_nondominated_sort, mutate, Chromosome, Matching};
use consensus_core::relabel::align_labels;
use consensus_core::{
    adjusted_rand_index, canonicalize, partition_equal, Clustering, ClusteringEnsemble,
    ObjectiveVector,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn labels(max_n: usize, max_k: u32) -> impl Strategy<Value = Vec<u32>> {
    (1..=max_k).prop_flat_map(move |k| prop::collection::vec(1..=k, 2..=max_n))
}

fn labelling_pair(max_n: usize, max_k: u32) -> impl Strategy<Value = (Vec<u32>, Vec<u32>)> {
    (2..=max_n).prop_flat_map(move |n| {
        (
            prop::collection::vec(1..=max_k, n),
            prop::collection::vec(1..=max_k, n),
        )
    })
}

fn ensemble(max_n: usize, max_m: usize, max_k: u32) -> impl Strategy<Value = Vec<Vec<u32>>> {
    (2..=max_n, 2..=max_m)
        .prop_flat_map(move |(n, m)| prop::collection::vec(prop::collection::vec(1..=max_k, n), m))
}

fn c(l: &[u32]) -> Clustering {
    Clustering::new(l).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn ari_matches_pair_counting((a, b) in labelling_pair(10, 4)) {
        let fast = adjusted_rand_index(&c(&a), &c(&b)).unwrap();
        prop_assert!((fast - brute_force_ari(&a, &b)).abs() < 1e-12);
    }

    #[test]
    fn ari_is_symmetric_and_bounded((a, b) in labelling_pair(25, 5)) {
        let (a, b) = (c(&a), c(&b));
        let ab = adjusted_rand_index(&a, &b).unwrap();
        prop_assert_eq!(ab, adjusted_rand_index(&b, &a).unwrap());
        prop_assert!(ab <= 1.0 + 1e-12);
        prop_assert_eq!(adjusted_rand_index(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn ari_ignores_label_names((a, b) in labelling_pair(25, 5), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (c(&a), c(&b));
        let before = adjusted_rand_index(&a, &b).unwrap();
        let after = adjusted_rand_index(&permuted(&a, &mut rng), &permuted(&b, &mut rng)).unwrap();
        prop_assert_eq!(before, after);
    }

    #[test]
    fn canonicalize_is_idempotent(l in labels(30, 6)) {
        let once = canonicalize(&l).unwrap();
        let twice = canonicalize(once.labels()).unwrap();
        prop_assert_eq!(&once, &twice);
        let mut seen = std::collections::HashSet::new();
        let mut next = 1;
        for &x in once.labels() {
            if seen.insert(x) {
                prop_assert_eq!(x, next);
                next += 1;
            }
        }
    }

    #[test]
    fn partition_equality_is_an_equivalence(l in labels(20, 4), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = c(&l);
        let b = permuted(&a, &mut rng);
        let d = permuted(&b, &mut rng);
        prop_assert!(partition_equal(&a, &a).unwrap());
        prop_assert!(partition_equal(&a, &b).unwrap() && partition_equal(&b, &a).unwrap());
        prop_assert!(partition_equal(&a, &d).unwrap());
    }

    #[test]
    fn crossover_of_equal_partitions_is_a_no_op(l in labels(25, 5), seed in any::<u64>(), cut_frac in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p1 = c(&l);
        let p2 = permuted(&p1, &mut rng);
        let cut = 1 + (cut_frac * (p1.n() - 1) as f64) as usize;
        let cut = cut.min(p1.n() - 1).max(1);
        for matching in [Matching::Greedy, Matching::Optimal] {
            let (c1, c2) = crossover_at(&p1, &p2, cut, matching).unwrap();
            prop_assert!(partition_equal(&c1, &p1).unwrap());
            prop_assert!(partition_equal(&c2, &p1).unwrap());
        }
    }

    #[test]
    fn variation_keeps_children_canonical((a, b) in labelling_pair(20, 5), seed in any::<u64>(), cut_frac in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (p1, p2) = (c(&a), c(&b));
        let cut = (1 + (cut_frac * (p1.n() - 1) as f64) as usize).min(p1.n() - 1);
        let (c1, c2) = crossover_at(&p1, &p2, cut, Matching::Greedy).unwrap();
        let mutant = mutate(&p1, 1.0, &mut rng);
        prop_assert!(mutant.k() <= p1.k() + 1);
        for child in [c1, c2, mutant] {
            prop_assert_eq!(child.n(), p1.n());
            prop_assert_eq!(&canonicalize(child.labels()).unwrap(), &child);
            prop_assert!(child.k() <= p1.k() + p2.k());
        }
    }

    #[test]
    fn nondominated_sort_matches_pairwise_oracle(points in prop::collection::vec((0u8..6, 0u8..6), 1..=20)) {
        let objs: Vec<ObjectiveVector> = points
            .iter()
            .map(|&(m, s)| ObjectiveVector::new(m as f64 / 5.0, s as f64 / 5.0))
            .collect();
        let mut pop: Vec<Chromosome> = objs
            .iter()
            .map(|&o| Chromosome::with_objectives(Clustering::single(1).unwrap(), o))
            .collect();
        let fronts = fast_nondominated_sort(&mut pop).unwrap();
        // Oracle: peel off the non-dominated set of what remains.
        let mut remaining: Vec<usize> = (0..objs.len()).collect();
        let mut expected = Vec::new();
        while !remaining.is_empty() {
            let front: Vec<usize> = remaining
                .iter()
                .copied()
                .filter(|&i| !remaining.iter().any(|&j| consensus_core::moea::dominates(&objs[j], &objs[i])))
                .collect();
            remaining.retain(|i| !front.contains(i));
            expected.push(front);
        }
        let mut got: Vec<Vec<usize>> = fronts.into_iter().map(|mut f| { f.sort_unstable(); f }).collect();
        got.iter_mut().for_each(|f| f.sort_unstable());
        prop_assert_eq!(got, expected);
    }

    #[test]
    fn component_count_grows_with_threshold(members in ensemble(15, 5, 4)) {
        let members: Vec<Clustering> = members.iter().map(|l| c(l)).collect();
        let e = ClusteringEnsemble::new(members).unwrap();
        let plain = build_weighted_coassoc(&e, CoassocMode::Plain).unwrap();
        let mut last = 0;
        for delta in 0..=e.m() {
            let (count, _) = connected_components(&plain, delta as f64).unwrap();
            prop_assert!(count >= last);
            last = count;
        }
        prop_assert_eq!(last, e.n());
        // An edgeless matrix has no sweep range.
        let Ok(sweep) = threshold_sweep(&plain, 10, 40) else { return Ok(()) };
        let counts: Vec<usize> = sweep.counts().collect();
        prop_assert!(counts.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(sweep.steps.windows(2).all(|w| w[0].0 < w[1].0));
    }

    #[test]
    fn plain_graph_never_has_fewer_components_at_a_shared_threshold(members in ensemble(20, 6, 4), delta_frac in 0.0f64..1.0) {
        let members: Vec<Clustering> = members.iter().map(|l| c(l)).collect();
        let e = ClusteringEnsemble::new(members).unwrap();
        let weighted = match build_weighted_coassoc(&e, CoassocMode::Weighted) {
            Ok(m) => m,
            Err(_) => return Ok(()),
        };
        let quality = quality_weights(&e).unwrap();
        // Pointwise dominance of the weighted graph needs every member weight >= 1.
        prop_assume!(e.members().iter().zip(&quality).all(|(m, q)| m.k() as f64 + 2.0 * weighted.w() * q >= 1.0));
        let plain = build_weighted_coassoc(&e, CoassocMode::Plain).unwrap();
        let delta = delta_frac * e.m() as f64;
        let (plain_count, _) = connected_components(&plain, delta).unwrap();
        let (weighted_count, _) = connected_components(&weighted, delta).unwrap();
        prop_assert!(plain_count >= weighted_count);
    }

    #[test]
    fn alignment_never_splits_a_source_cluster((a, b) in labelling_pair(20, 5)) {
        let (source, reference) = (c(&a), c(&b));
        let aligned = align_labels(&source, &reference).unwrap();
        for i in 0..source.n() {
            for j in 0..source.n() {
                if source.label(i) == source.label(j) {
                    prop_assert_eq!(aligned.label(i), aligned.label(j));
                }
            }
        }
        prop_assert!(aligned.k() <= reference.k());
    }
}
