#![allow(dead_code)]

use consensus_core::{Clustering, DataMatrix};
use rand::seq::SliceRandom;
use rand::Rng;

/// Pair-counting ARI straight from the definition: classify every pair of
/// objects by agreement and plug the four counts into the adjusted index.
pub fn brute_force_ari(a: &[u32], b: &[u32]) -> f64 {
    let n = a.len();
    let (mut both, mut only_a, mut only_b, mut neither) = (0f64, 0f64, 0f64, 0f64);
    for i in 0..n {
        for j in i + 1..n {
            match (a[i] == a[j], b[i] == b[j]) {
                (true, true) => both += 1.0,
                (true, false) => only_a += 1.0,
                (false, true) => only_b += 1.0,
                (false, false) => neither += 1.0,
            }
        }
    }
    let pairs = both + only_a + only_b + neither;
    let expected = (both + only_a) * (both + only_b) / pairs;
    let max = ((both + only_a) + (both + only_b)) / 2.0;
    if max == expected {
        return if a_equals_b(a, b) { 1.0 } else { 0.0 };
    }
    (both - expected) / (max - expected)
}

fn a_equals_b(a: &[u32], b: &[u32]) -> bool {
    (0..a.len()).all(|i| (0..a.len()).all(|j| (a[i] == a[j]) == (b[i] == b[j])))
}

pub fn random_labels<R: Rng>(rng: &mut R, n: usize, k: u32) -> Vec<u32> {
    (0..n).map(|_| rng.gen_range(1..=k)).collect()
}

/// Same partition under a random relabelling.
pub fn permuted<R: Rng>(c: &Clustering, rng: &mut R) -> Clustering {
    let mut perm: Vec<u32> = (1..=c.k() as u32 + 5).collect();
    perm.shuffle(rng);
    let labels: Vec<u32> = c.labels().iter().map(|&l| perm[l as usize - 1]).collect();
    Clustering::new(&labels).unwrap()
}

/// Picks `frac * n` objects and permutes their labels among themselves.
pub fn shuffle_fraction<R: Rng>(labels: &mut [u32], frac: f64, rng: &mut R) {
    let count = (frac * labels.len() as f64).round() as usize;
    let mut idx = rand::seq::index::sample(rng, labels.len(), count).into_vec();
    let values: Vec<u32> = idx.iter().map(|&i| labels[i]).collect();
    idx.shuffle(rng);
    for (i, v) in idx.into_iter().zip(values) {
        labels[i] = v;
    }
}

/// `k` blobs with centre `gap * ((c + j) mod k)` in column `j` (pairwise
/// distinct for any `d`), each point uniform in
/// a box of half-width `spread` around its centre. Returns data and truth.
pub fn blobs<R: Rng>(
    rng: &mut R,
    k: usize,
    per: usize,
    d: usize,
    gap: f64,
    spread: f64,
) -> (DataMatrix, Vec<u32>) {
    let mut rows = Vec::with_capacity(k * per);
    let mut truth = Vec::with_capacity(k * per);
    for c in 0..k {
        for _ in 0..per {
            let row: Vec<f64> = (0..d)
                .map(|j| {
                    let centre = gap * ((c + j) % k) as f64;
                    centre + rng.gen_range(-spread..=spread)
                })
                .collect();
            rows.push(row);
            truth.push(c as u32 + 1);
        }
    }
    (DataMatrix::from_rows(&rows).unwrap(), truth)
}
