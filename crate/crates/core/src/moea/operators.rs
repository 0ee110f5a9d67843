use rand::Rng;

use crate::error::{Error, Result};
use crate::model::Clustering;

use super::{Chromosome, Matching};

/// Largest perturbation added to a label by [`mutate`].
pub const MUTATION_STEP: f64 = 1.5;

/// Crowded binary tournament: lower rank wins, then larger crowding
/// distance, then a fair coin.
pub fn tournament_select<'a, R: Rng + ?Sized>(
    pop: &'a [Chromosome],
    rng: &mut R,
) -> &'a Chromosome {
    let a = &pop[rng.gen_range(0..pop.len())];
    let b = &pop[rng.gen_range(0..pop.len())];
    if a.rank != b.rank {
        return if a.rank < b.rank { a } else { b };
    }
    if a.crowding != b.crowding {
        return if a.crowding > b.crowding { a } else { b };
    }
    if rng.gen_bool(0.5) {
        a
    } else {
        b
    }
}

/// Overlap counts between the clusters of `other` (rows) and `base`
/// (columns).
fn overlap_table(other: &Clustering, base: &Clustering) -> Vec<Vec<usize>> {
    let mut table = vec![vec![0usize; base.k()]; other.k()];
    for (&o, &b) in other.labels().iter().zip(base.labels()) {
        table[o as usize - 1][b as usize - 1] += 1;
    }
    table
}

fn greedy_matching(table: &[Vec<usize>]) -> Vec<Option<usize>> {
    let rows = table.len();
    let cols = table.first().map_or(0, Vec::len);
    let mut cells: Vec<(usize, usize, usize)> = Vec::new();
    for (r, row) in table.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            if v > 0 {
                cells.push((v, r, c));
            }
        }
    }
    cells.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut row_match = vec![None; rows];
    let mut col_used = vec![false; cols];
    for (_, r, c) in cells {
        if row_match[r].is_none() && !col_used[c] {
            row_match[r] = Some(c);
            col_used[c] = true;
        }
    }
    row_match
}

const EXACT_MATCHING_LIMIT: usize = 12;

/// Maximum-total-overlap matching by dynamic programming over subsets of
/// the smaller side. Falls back to greedy when both sides are large.
fn optimal_matching(table: &[Vec<usize>]) -> Vec<Option<usize>> {
    let rows = table.len();
    let cols = table.first().map_or(0, Vec::len);
    if cols <= EXACT_MATCHING_LIMIT {
        subset_matching(table, rows, cols)
    } else if rows <= EXACT_MATCHING_LIMIT {
        let transposed: Vec<Vec<usize>> = (0..cols)
            .map(|c| (0..rows).map(|r| table[r][c]).collect())
            .collect();
        let col_match = subset_matching(&transposed, cols, rows);
        let mut row_match = vec![None; rows];
        for (c, m) in col_match.into_iter().enumerate() {
            if let Some(r) = m {
                row_match[r] = Some(c);
            }
        }
        row_match
    } else {
        greedy_matching(table)
    }
}

/// `best[r][mask]`: best total over rows `r..` with columns in `mask` used.
fn subset_matching(table: &[Vec<usize>], rows: usize, cols: usize) -> Vec<Option<usize>> {
    let full = 1usize << cols;
    let mut best = vec![vec![0usize; full]; rows + 1];
    for r in (0..rows).rev() {
        for mask in 0..full {
            let mut v = best[r + 1][mask];
            for c in 0..cols {
                if mask & (1 << c) == 0 && table[r][c] > 0 {
                    v = v.max(table[r][c] + best[r + 1][mask | (1 << c)]);
                }
            }
            best[r][mask] = v;
        }
    }
    let mut out = vec![None; rows];
    let mut mask = 0usize;
    for (r, slot) in out.iter_mut().enumerate() {
        let target = best[r][mask];
        if best[r + 1][mask] == target {
            continue;
        }
        for c in 0..cols {
            if mask & (1 << c) == 0
                && table[r][c] > 0
                && table[r][c] + best[r + 1][mask | (1 << c)] == target
            {
                *slot = Some(c);
                mask |= 1 << c;
                break;
            }
        }
    }
    out
}

/// Rewrites `other` in the label vocabulary of `base`. Clusters of `other`
/// left unmatched get fresh labels after `base.k()`. The result is not
/// canonicalized.
pub fn align_to(other: &Clustering, base: &Clustering, matching: Matching) -> Result<Vec<u32>> {
    if other.n() != base.n() {
        return Err(Error::SizeMismatch {
            expected: base.n(),
            actual: other.n(),
        });
    }
    let table = overlap_table(other, base);
    let assignment = match matching {
        Matching::Greedy => greedy_matching(&table),
        Matching::Optimal => optimal_matching(&table),
    };
    let mut fresh = base.k() as u32;
    let map: Vec<u32> = assignment
        .into_iter()
        .map(|m| match m {
            Some(c) => c as u32 + 1,
            None => {
                fresh += 1;
                fresh
            }
        })
        .collect();
    Ok(other
        .labels()
        .iter()
        .map(|&l| map[l as usize - 1])
        .collect())
}

/// Aligns `p2` onto `p1` and swaps the tails after position `cut`.
pub fn crossover_at(
    p1: &Clustering,
    p2: &Clustering,
    cut: usize,
    matching: Matching,
) -> Result<(Clustering, Clustering)> {
    let aligned = align_to(p2, p1, matching)?;
    let cut = cut.min(p1.n());
    let first = p1.labels();
    let mut c1 = first[..cut].to_vec();
    c1.extend_from_slice(&aligned[cut..]);
    let mut c2 = aligned[..cut].to_vec();
    c2.extend_from_slice(&first[cut..]);
    Ok((
        Clustering::from_small_labels(&c1),
        Clustering::from_small_labels(&c2),
    ))
}

/// Bipartite-aligned single-point crossover at a uniform random cut.
///
/// The second parent is relabeled onto the first parent's clusters before
/// the cut, so two encodings of the same partition produce children equal
/// to that partition.
pub fn crossover_bipartite<R: Rng + ?Sized>(
    p1: &Clustering,
    p2: &Clustering,
    matching: Matching,
    rng: &mut R,
) -> Result<(Clustering, Clustering)> {
    if p1.n() != p2.n() {
        return Err(Error::SizeMismatch {
            expected: p1.n(),
            actual: p2.n(),
        });
    }
    if p1.n() < 2 {
        return Ok((p1.clone(), p2.clone()));
    }
    let cut = rng.gen_range(1..p1.n());
    crossover_at(p1, p2, cut, matching)
}

/// [`crossover_bipartite`] with probability `rate`, otherwise copies.
pub fn crossover<R: Rng + ?Sized>(
    p1: &Clustering,
    p2: &Clustering,
    rate: f64,
    matching: Matching,
    rng: &mut R,
) -> Result<(Clustering, Clustering)> {
    if rng.gen_bool(rate) {
        crossover_bipartite(p1, p2, matching, rng)
    } else {
        Ok((p1.clone(), p2.clone()))
    }
}

/// Adds `delta` to the label of object `index`, rounds to the nearest
/// integer, clamps to `[1, k + 1]` and canonicalizes.
pub fn mutate_gene(c: &Clustering, index: usize, delta: f64) -> Clustering {
    let mut labels = c.labels().to_vec();
    let shifted = (f64::from(labels[index]) + delta).round();
    labels[index] = shifted.clamp(1.0, c.k() as f64 + 1.0) as u32;
    Clustering::from_small_labels(&labels)
}

/// With probability `rate`, perturbs one uniformly chosen gene by a value
/// drawn from `[-MUTATION_STEP, MUTATION_STEP]`.
pub fn mutate<R: Rng + ?Sized>(c: &Clustering, rate: f64, rng: &mut R) -> Clustering {
    if !rng.gen_bool(rate) {
        return c.clone();
    }
    let index = rng.gen_range(0..c.n());
    let delta = rng.gen_range(-MUTATION_STEP..=MUTATION_STEP);
    mutate_gene(c, index, delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::ObjectiveVector;
    use crate::model::partition_equal;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(labels: &[u32]) -> Clustering {
        Clustering::new(labels).unwrap()
    }

    fn ranked(rank: usize, crowding: f64) -> Chromosome {
        let mut ch = Chromosome::with_objectives(c(&[1, 2]), ObjectiveVector::new(0.0, 0.0));
        ch.rank = rank;
        ch.crowding = crowding;
        ch
    }

    #[test]
    fn tournament_prefers_rank_then_crowding() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pop = vec![ranked(1, 0.0), ranked(2, f64::INFINITY)];
        // Rank 2 can only win when it is drawn twice.
        let mut wins = 0;
        for _ in 0..2000 {
            if tournament_select(&pop, &mut rng).rank == 1 {
                wins += 1;
            }
        }
        assert!(wins > 1400, "{wins}");
    }

    #[test]
    fn tournament_pairwise_winner() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pop = vec![ranked(1, f64::INFINITY), ranked(1, 0.3)];
        let mut infinite = 0;
        let trials = 4000;
        for _ in 0..trials {
            if tournament_select(&pop, &mut rng).crowding.is_infinite() {
                infinite += 1;
            }
        }
        // Wins on every mixed draw (1/2) plus its own identical draws (1/4).
        let share = infinite as f64 / trials as f64;
        assert!((share - 0.75).abs() < 0.03, "{share}");
    }

    #[test]
    fn tournament_coin_flip_is_fair() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut pop = vec![ranked(1, 0.5), ranked(1, 0.5)];
        pop[1].genes = c(&[1, 1]);
        let trials = 10_000;
        let first = (0..trials)
            .filter(|_| tournament_select(&pop, &mut rng).genes == pop[0].genes)
            .count();
        let share = first as f64 / trials as f64;
        assert!((share - 0.5).abs() < 0.05, "{share}");
    }

    #[test]
    fn crossover_of_relabeled_equal_parents() {
        let p1 = c(&[2, 2, 2, 1, 1, 3]);
        let p2 = c(&[3, 3, 3, 2, 2, 1]);
        assert_eq!(align_to(&p2, &p1, Matching::Greedy).unwrap(), p1.labels());
        for cut in 0..=6 {
            let (a, b) = crossover_at(&p1, &p2, cut, Matching::Greedy).unwrap();
            assert_eq!(a, p1);
            assert_eq!(b, p1);
        }
    }

    #[test]
    fn crossover_of_identical_parents() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = c(&[1, 2, 2, 3, 1]);
        let (a, b) = crossover_bipartite(&p, &p, Matching::Greedy, &mut rng).unwrap();
        assert_eq!((a, b), (p.clone(), p));
    }

    #[test]
    fn crossover_all_cuts_give_valid_children() {
        let p1 = c(&[1, 1, 2, 2]);
        let p2 = c(&[1, 2, 2, 2]);
        assert_eq!(
            align_to(&p2, &p1, Matching::Greedy).unwrap(),
            vec![1, 2, 2, 2]
        );
        let expected = [
            (vec![1, 2, 2, 2], vec![1, 1, 2, 2]),
            (vec![1, 1, 2, 2], vec![1, 2, 2, 2]),
            (vec![1, 1, 2, 2], vec![1, 2, 2, 2]),
        ];
        for (cut, (e1, e2)) in (1..4).zip(expected) {
            let (a, b) = crossover_at(&p1, &p2, cut, Matching::Greedy).unwrap();
            assert_eq!(a.labels(), &e1[..], "cut {cut}");
            assert_eq!(b.labels(), &e2[..], "cut {cut}");
            for child in [&a, &b] {
                let max = *child.labels().iter().max().unwrap() as usize;
                assert_eq!(max, child.k());
            }
        }
    }

    #[test]
    fn crossover_rate_zero_copies() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (p1, p2) = (c(&[1, 1, 2, 2]), c(&[1, 2, 1, 2]));
        for _ in 0..50 {
            let (a, b) = crossover(&p1, &p2, 0.0, Matching::Greedy, &mut rng).unwrap();
            assert_eq!((a, b), (p1.clone(), p2.clone()));
        }
    }

    #[test]
    fn unmatched_clusters_get_fresh_labels() {
        let p1 = c(&[1, 1, 1, 1]);
        let p2 = c(&[1, 1, 2, 3]);
        assert_eq!(
            align_to(&p2, &p1, Matching::Greedy).unwrap(),
            vec![1, 1, 2, 3]
        );
    }

    #[test]
    fn optimal_matching_beats_greedy_when_it_should() {
        // Greedy takes the 3-overlap first and loses two 2-overlaps.
        let table = vec![vec![3, 2], vec![2, 0]];
        assert_eq!(greedy_matching(&table), vec![Some(0), None]);
        assert_eq!(optimal_matching(&table), vec![Some(1), Some(0)]);
    }

    #[test]
    fn optimal_matching_equal_parents() {
        let p1 = c(&[2, 2, 2, 1, 1, 3]);
        let p2 = c(&[3, 3, 3, 2, 2, 1]);
        let (a, b) = crossover_at(&p1, &p2, 3, Matching::Optimal).unwrap();
        assert!(partition_equal(&a, &p1).unwrap());
        assert!(partition_equal(&b, &p1).unwrap());
    }

    #[test]
    fn mutation_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x = c(&[1, 1, 2, 2]);
        for _ in 0..20 {
            assert_eq!(mutate(&x, 0.0, &mut rng), x);
        }
        let one = c(&[1]);
        for _ in 0..20 {
            assert_eq!(mutate(&one, 1.0, &mut rng), one);
        }
        // Gene 1 pushed from label 1 to 2: {2,1,2,2} canonicalizes to {1,2,1,1}.
        assert_eq!(mutate_gene(&x, 0, 0.8).labels(), &[1, 2, 1, 1]);
        // Clamped to k + 1 = 3: a new cluster.
        assert_eq!(mutate_gene(&x, 3, 1.5).labels(), &[1, 1, 2, 3]);
        // Clamped below at 1.
        assert_eq!(mutate_gene(&x, 0, -1.5).labels(), &[1, 1, 2, 2]);
    }

    #[test]
    fn mutation_keeps_labels_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut x = c(&[1, 2, 3, 1, 2, 3, 4]);
        for _ in 0..500 {
            x = mutate(&x, 1.0, &mut rng);
            let max = *x.labels().iter().max().unwrap() as usize;
            assert_eq!(max, x.k());
        }
    }
}
