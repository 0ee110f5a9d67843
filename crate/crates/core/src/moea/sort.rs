use crate::error::Result;
use crate::metrics::ObjectiveVector;

use super::{dominates, Chromosome};

/// Splits the population into nondomination fronts (indices into `pop`)
/// and stores each chromosome's 1-based rank.
pub fn fast_nondominated_sort(pop: &mut [Chromosome]) -> Result<Vec<Vec<usize>>> {
    let objs: Vec<ObjectiveVector> = pop
        .iter()
        .map(Chromosome::objectives_or_err)
        .collect::<Result<_>>()?;
    let fronts = nondominated_fronts(&objs);
    for (r, front) in fronts.iter().enumerate() {
        for &i in front {
            pop[i].rank = r + 1;
        }
    }
    Ok(fronts)
}

pub(crate) fn nondominated_fronts(objs: &[ObjectiveVector]) -> Vec<Vec<usize>> {
    let n = objs.len();
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut domination_count = vec![0usize; n];
    for p in 0..n {
        for q in p + 1..n {
            if dominates(&objs[p], &objs[q]) {
                dominated_by[p].push(q);
                domination_count[q] += 1;
            } else if dominates(&objs[q], &objs[p]) {
                dominated_by[q].push(p);
                domination_count[p] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&p| domination_count[p] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &p in &current {
            for &q in &dominated_by[p] {
                domination_count[q] -= 1;
                if domination_count[q] == 0 {
                    next.push(q);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Crowding distance of each point within one front. Boundary points of an
/// objective get infinity; an objective with zero range contributes
/// nothing, boundaries included.
pub(crate) fn crowding_values(objs: &[ObjectiveVector]) -> Vec<f64> {
    let n = objs.len();
    let mut dist = vec![0.0; n];
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let getters: [fn(&ObjectiveVector) -> f64; 2] = [|o| o.mean_ari, |o| o.std_ari];
    for get in getters {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| get(&objs[a]).total_cmp(&get(&objs[b])));
        let lo = get(&objs[order[0]]);
        let hi = get(&objs[order[n - 1]]);
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        dist[order[0]] = f64::INFINITY;
        dist[order[n - 1]] = f64::INFINITY;
        for w in 1..n - 1 {
            let gap = get(&objs[order[w + 1]]) - get(&objs[order[w - 1]]);
            dist[order[w]] += gap / range;
        }
    }
    dist
}

/// Assigns crowding distances to the members of one front.
pub fn crowding_distance(front: &mut [Chromosome]) -> Result<()> {
    let objs: Vec<ObjectiveVector> = front
        .iter()
        .map(Chromosome::objectives_or_err)
        .collect::<Result<_>>()?;
    for (c, d) in front.iter_mut().zip(crowding_values(&objs)) {
        c.crowding = d;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Clustering;

    fn chrom(m: f64, s: f64) -> Chromosome {
        Chromosome::with_objectives(Clustering::new(&[1]).unwrap(), ObjectiveVector::new(m, s))
    }

    #[test]
    fn incomparable_population_is_one_front() {
        let mut pop = vec![chrom(0.9, 0.3), chrom(0.8, 0.2), chrom(0.7, 0.1)];
        let fronts = fast_nondominated_sort(&mut pop).unwrap();
        assert_eq!(fronts, vec![vec![0, 1, 2]]);
        assert!(pop.iter().all(|c| c.rank == 1));
    }

    #[test]
    fn chain_gives_singleton_fronts() {
        let mut pop = vec![chrom(0.7, 0.2), chrom(0.9, 0.0), chrom(0.8, 0.1)];
        let fronts = fast_nondominated_sort(&mut pop).unwrap();
        assert_eq!(fronts, vec![vec![1], vec![2], vec![0]]);
        assert_eq!(pop[0].rank, 3);
    }

    #[test]
    fn unevaluated_chromosome_is_an_error() {
        let mut pop = vec![Chromosome::new(Clustering::new(&[1]).unwrap())];
        assert!(fast_nondominated_sort(&mut pop).is_err());
    }

    #[test]
    fn crowding_small_fronts() {
        let mut two = vec![chrom(0.9, 0.3), chrom(0.8, 0.2)];
        crowding_distance(&mut two).unwrap();
        assert!(two.iter().all(|c| c.crowding.is_infinite()));

        let mut three = vec![chrom(0.9, 0.3), chrom(0.8, 0.2), chrom(0.7, 0.1)];
        crowding_distance(&mut three).unwrap();
        assert!(three[0].crowding.is_infinite());
        assert!(three[2].crowding.is_infinite());
        // Equal spacing: half the range per objective, two objectives.
        assert!((three[1].crowding - 2.0).abs() < 1e-12);
    }

    #[test]
    fn crowding_with_degenerate_objective_is_finite_inside() {
        let mut front = vec![
            chrom(0.5, 0.1),
            chrom(0.5, 0.2),
            chrom(0.5, 0.4),
            chrom(0.5, 0.3),
        ];
        crowding_distance(&mut front).unwrap();
        assert!(front[0].crowding.is_infinite());
        assert!(front[2].crowding.is_infinite());
        assert!(front[1].crowding.is_finite());
        assert!(front[3].crowding.is_finite());

        let mut flat = vec![chrom(0.5, 0.1); 4];
        crowding_distance(&mut flat).unwrap();
        assert!(flat.iter().all(|c| c.crowding == 0.0));
    }
}
