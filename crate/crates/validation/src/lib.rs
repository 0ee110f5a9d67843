//! Synthetic data for exercising the consensus pipeline: planted
//! partitions with label noise, mixed-k ensembles, random ensembles and
//! separated blobs, plus a pair-counting ARI oracle.

use consensus_core::{Clustering, ClusteringEnsemble, DataMatrix};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn partition(labels: &[u32]) -> Clustering {
    Clustering::new(labels).unwrap()
}

pub fn relabelled(labels: &[u32], rng: &mut ChaCha8Rng) -> Clustering {
    let top = labels.iter().copied().max().unwrap_or(1);
    let mut perm: Vec<u32> = (1..=top + 5).collect();
    perm.shuffle(rng);
    partition(
        &labels
            .iter()
            .map(|&l| perm[l as usize - 1])
            .collect::<Vec<_>>(),
    )
}

/// Picks `frac * n` objects and permutes their labels among themselves.
pub fn shuffle_fraction(labels: &mut [u32], frac: f64, rng: &mut ChaCha8Rng) {
    let count = (frac * labels.len() as f64).round() as usize;
    let mut idx = rand::seq::index::sample(rng, labels.len(), count).into_vec();
    let values: Vec<u32> = idx.iter().map(|&i| labels[i]).collect();
    idx.shuffle(rng);
    for (i, v) in idx.into_iter().zip(values) {
        labels[i] = v;
    }
}

/// Ten relabelled members, each the truth with `noise` of its labels shuffled.
pub fn planted(seed: u64, n: usize, k: u32, noise: f64) -> (ClusteringEnsemble, Clustering) {
    let mut r = rng(seed);
    let truth: Vec<u32> = (0..n).map(|i| (i as u32 % k) + 1).collect();
    let members = (0..10)
        .map(|_| {
            let mut l = truth.clone();
            shuffle_fraction(&mut l, noise, &mut r);
            relabelled(&l, &mut r)
        })
        .collect();
    (ClusteringEnsemble::new(members).unwrap(), partition(&truth))
}

/// Adjusted Rand index from the four pair-agreement counts.
pub fn pair_counting_ari(a: &[u32], b: &[u32]) -> f64 {
    let n = a.len();
    let (mut ss, mut sd, mut ds, mut dd) = (0f64, 0f64, 0f64, 0f64);
    for i in 0..n {
        for j in i + 1..n {
            match (a[i] == a[j], b[i] == b[j]) {
                (true, true) => ss += 1.0,
                (true, false) => sd += 1.0,
                (false, true) => ds += 1.0,
                (false, false) => dd += 1.0,
            }
        }
    }
    let pairs = ss + sd + ds + dd;
    let expected = (ss + sd) * (ss + ds) / pairs;
    let max = ((ss + sd) + (ss + ds)) / 2.0;
    if max == expected {
        // Both trivial: identical iff no pair is split differently.
        return if sd == 0.0 && ds == 0.0 { 1.0 } else { 0.0 };
    }
    (ss - expected) / (max - expected)
}

/// Random ensemble: noisy relabelled copies of a random partition, with the
/// noise level itself random so near-uniform ensembles are included.
pub fn random_ensemble(r: &mut ChaCha8Rng) -> ClusteringEnsemble {
    let n = r.gen_range(5..=30);
    let m = r.gen_range(2..=8);
    let k = r.gen_range(2..=5u32);
    let truth: Vec<u32> = (0..n).map(|_| r.gen_range(1..=k)).collect();
    let noise = r.gen_range(0.0..1.0);
    let members = (0..m)
        .map(|_| {
            let mk = r.gen_range(2..=5u32);
            let l: Vec<u32> = truth
                .iter()
                .map(|&t| {
                    if r.gen_bool(noise) {
                        r.gen_range(1..=mk)
                    } else {
                        t
                    }
                })
                .collect();
            relabelled(&l, r)
        })
        .collect();
    ClusteringEnsemble::new(members).unwrap()
}

/// Ten members over a K=5 truth: six at K=5, then a 3-, 4-, 6- and 7-cluster
/// member made by merging or splitting true clusters, all lightly shuffled.
pub fn mixed_k_ensemble(seed: u64) -> ClusteringEnsemble {
    let mut r = rng(seed);
    let truth: Vec<u32> = (0..200).map(|i| (i % 5) as u32 + 1).collect();
    let split = |x: u32, i: usize, from: &[u32]| -> u32 {
        match from.iter().position(|&f| f == x) {
            Some(p) if i.is_multiple_of(2) => 6 + p as u32,
            _ => x,
        }
    };
    let members = (0..10)
        .map(|j| {
            let mut l: Vec<u32> = truth
                .iter()
                .enumerate()
                .map(|(i, &x)| match j {
                    6 => x.min(3),
                    7 => x.min(4),
                    8 => split(x, i, &[1]),
                    9 => split(x, i, &[1, 2]),
                    _ => x,
                })
                .collect();
            shuffle_fraction(&mut l, 0.05, &mut r);
            relabelled(&l, &mut r)
        })
        .collect();
    ClusteringEnsemble::new(members).unwrap()
}

/// Four well-separated blobs in three columns of very different scales.
pub fn blob_data(seed: u64, n: usize) -> DataMatrix {
    let mut r = rng(seed);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let c = (i % 4) as f64;
            vec![
                1000.0 * c + r.gen_range(-50.0..50.0),
                2.0 * ((i + 1) % 4) as f64 + r.gen_range(-0.1..0.1),
                40.0 * ((i + 2) % 4) as f64 + r.gen_range(-2.0..2.0),
            ]
        })
        .collect();
    DataMatrix::from_rows(&rows).unwrap()
}
