use std::collections::{HashMap, HashSet};
use std::io::Write;

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::metrics::{objectives, ObjectiveVector};
use crate::model::{Clustering, ClusteringEnsemble};
use crate::par;

use super::operators::{crossover, mutate};
use super::sort::{crowding_values, nondominated_fronts};
use super::{Chromosome, GAConfig, ObjectiveTarget, ParetoFront};

/// Summary of one generation after environmental selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationStats {
    pub generation: usize,
    pub best_mean_ari: f64,
    /// Distinct partitions on the first front.
    pub front_size: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvolutionTrace {
    /// Generation 0 is the initial population.
    pub generations: Vec<GenerationStats>,
    pub stopped_early: bool,
}

impl EvolutionTrace {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "generation,best_mean_ari,front_size")?;
        for g in &self.generations {
            writeln!(out, "{},{},{}", g.generation, g.best_mean_ari, g.front_size)?;
        }
        Ok(())
    }

    /// Best mean ARI never decreased from one generation to the next.
    pub fn is_monotone(&self) -> bool {
        self.generations
            .windows(2)
            .all(|w| w[1].best_mean_ari >= w[0].best_mean_ari)
    }
}

/// Memoized objective evaluation; identical partitions recur constantly
/// once the population converges.
struct Evaluator<'a> {
    target: &'a ClusteringEnsemble,
    cache: HashMap<Clustering, ObjectiveVector>,
}

impl Evaluator<'_> {
    fn evaluate(&mut self, pop: &mut [Chromosome]) -> Result<()> {
        let mut missing: Vec<Clustering> = Vec::new();
        for c in pop.iter() {
            if c.objectives.is_none()
                && !self.cache.contains_key(&c.genes)
                && !missing.contains(&c.genes)
            {
                missing.push(c.genes.clone());
            }
        }
        let target = self.target;
        let values = par::map_slice(&missing, |g| objectives(g, target));
        for (g, v) in missing.into_iter().zip(values) {
            self.cache.insert(g, v?);
        }
        for c in pop.iter_mut() {
            if c.objectives.is_none() {
                c.objectives = Some(self.cache[&c.genes]);
            }
        }
        Ok(())
    }
}

/// Keeps the best `size` chromosomes, preferring distinct partitions:
/// later copies of a partition only fill slots the distinct ones leave
/// open. Rank and crowding are stored on the survivors.
fn environmental_select(pool: Vec<Chromosome>, size: usize) -> Vec<Chromosome> {
    let mut seen: HashSet<&Clustering> = HashSet::with_capacity(pool.len());
    let duplicate: Vec<bool> = pool.iter().map(|c| !seen.insert(&c.genes)).collect();
    let distinct = duplicate.iter().filter(|&&d| !d).count();
    if distinct == pool.len() {
        return select_by_rank(pool, size);
    }
    let (unique, copies): (Vec<_>, Vec<_>) = pool.into_iter().zip(duplicate).partition(|(_, d)| !d);
    let mut kept: Vec<Chromosome> = unique.into_iter().map(|(c, _)| c).collect();
    if distinct < size {
        let copies: Vec<Chromosome> = copies.into_iter().map(|(c, _)| c).collect();
        kept.extend(select_by_rank(copies, size - distinct));
    }
    // Ranks and crowding are recomputed over the final population.
    select_by_rank(kept, size)
}

/// Best `size` chromosomes by rank, then crowding distance.
fn select_by_rank(mut pool: Vec<Chromosome>, size: usize) -> Vec<Chromosome> {
    let objs: Vec<ObjectiveVector> = pool.iter().map(|c| c.objectives.unwrap()).collect();
    let fronts = nondominated_fronts(&objs);
    let mut keep: Vec<usize> = Vec::with_capacity(size);
    for (r, front) in fronts.iter().enumerate() {
        if keep.len() >= size {
            break;
        }
        let front_objs: Vec<ObjectiveVector> = front.iter().map(|&i| objs[i]).collect();
        let crowding = crowding_values(&front_objs);
        for (&i, &d) in front.iter().zip(&crowding) {
            pool[i].rank = r + 1;
            pool[i].crowding = d;
        }
        if keep.len() + front.len() <= size {
            keep.extend(front);
        } else {
            let mut order: Vec<usize> = (0..front.len()).collect();
            order.sort_by(|&a, &b| crowding[b].total_cmp(&crowding[a]).then(a.cmp(&b)));
            keep.extend(order.iter().take(size - keep.len()).map(|&o| front[o]));
        }
    }
    keep.sort_unstable();
    let mut slots: Vec<Option<Chromosome>> = pool.into_iter().map(Some).collect();
    keep.into_iter().map(|i| slots[i].take().unwrap()).collect()
}

fn first_front_signature(pop: &[Chromosome]) -> Vec<&Clustering> {
    let mut front: Vec<&Clustering> = pop
        .iter()
        .filter(|c| c.rank == 1)
        .map(|c| &c.genes)
        .collect();
    front.sort_by(|a, b| a.labels().cmp(b.labels()));
    front.dedup();
    front
}

fn stats(generation: usize, pop: &[Chromosome]) -> GenerationStats {
    let best = pop
        .iter()
        .map(|c| c.objectives.unwrap().mean_ari)
        .fold(f64::NEG_INFINITY, f64::max);
    GenerationStats {
        generation,
        best_mean_ari: best,
        front_size: first_front_signature(pop).len(),
    }
}

/// Initial pool: base members, then refined members not already present
/// in the base.
fn initial_pool(base: &ClusteringEnsemble, refined: &ClusteringEnsemble) -> Vec<Clustering> {
    let mut pool = base.members().to_vec();
    for r in refined.members() {
        if !base.members().contains(r) {
            pool.push(r.clone());
        }
    }
    pool
}

/// NSGA-II over partitions seeded with the base and refined ensembles.
/// Returns the final first front and a per-generation trace.
pub fn evolve(
    base: &ClusteringEnsemble,
    refined: &ClusteringEnsemble,
    cfg: &GAConfig,
) -> Result<(ParetoFront, EvolutionTrace)> {
    cfg.validate(base.m())?;
    if base.n() != refined.n() {
        return Err(Error::SizeMismatch {
            expected: base.n(),
            actual: refined.n(),
        });
    }
    let pool = initial_pool(base, refined);
    let union;
    let target = match cfg.objective_target {
        ObjectiveTarget::Base => base,
        ObjectiveTarget::Refined => refined,
        ObjectiveTarget::Union => {
            union = ClusteringEnsemble::new(pool.clone())?;
            &union
        }
    };
    if target.m() < 2 {
        return Err(Error::Degenerate(
            "objectives need an ensemble of at least two members".into(),
        ));
    }
    let size = cfg.resolved_population(base.m());
    let mut rng: ChaCha8Rng = cfg.seed.named("nsga2").rng();
    let mut evaluator = Evaluator {
        target,
        cache: HashMap::new(),
    };

    let mut pop: Vec<Chromosome> = pool.iter().cloned().map(Chromosome::new).collect();
    let mut i = 0;
    while pop.len() < size {
        let clone = mutate(&pool[i % pool.len()], 1.0, &mut rng);
        pop.push(Chromosome::new(clone));
        i += 1;
    }
    evaluator.evaluate(&mut pop)?;
    let mut pop = environmental_select(pop, size);

    let mut trace = EvolutionTrace::default();
    trace.generations.push(stats(0, &pop));
    let mut stall = 0;
    for generation in 1..=cfg.generations {
        let before: Vec<Clustering> = first_front_signature(&pop).into_iter().cloned().collect();
        let mut offspring = Vec::with_capacity(size);
        while offspring.len() < size {
            let p1 = &super::tournament_select(&pop, &mut rng).genes;
            let p2 = &super::tournament_select(&pop, &mut rng).genes;
            let (c1, c2) = crossover(p1, p2, cfg.crossover_rate, cfg.matching, &mut rng)?;
            for child in [c1, c2] {
                let child = mutate(&child, cfg.mutation_rate, &mut rng);
                offspring.push(Chromosome {
                    born: generation,
                    ..Chromosome::new(child)
                });
            }
        }
        offspring.truncate(size);
        evaluator.evaluate(&mut offspring)?;
        pop.extend(offspring);
        pop = environmental_select(pop, size);
        trace.generations.push(stats(generation, &pop));

        let after = first_front_signature(&pop);
        if after.len() == before.len() && after.iter().zip(&before).all(|(a, b)| *a == b) {
            stall += 1;
        } else {
            stall = 0;
        }
        if cfg.stall_generations > 0 && stall >= cfg.stall_generations {
            trace.stopped_early = generation < cfg.generations;
            break;
        }
    }
    Ok((ParetoFront::from_population(&pop)?, trace))
}

/// Front member with the highest mean ARI against `base`; ties go to the
/// lower standard deviation, then fewer clusters, then the earlier member.
pub fn select_final(front: &ParetoFront, base: &ClusteringEnsemble) -> Result<Clustering> {
    if front.is_empty() {
        return Err(Error::InvalidInput("empty Pareto front".into()));
    }
    let scores = par::map_slice(&front.solutions, |s| objectives(&s.genes, base));
    let mut best: Option<(usize, ObjectiveVector)> = None;
    for (i, score) in scores.into_iter().enumerate() {
        let score = score?;
        let better = match best {
            None => true,
            Some((b, bs)) => {
                let k = front.solutions[i].genes.k();
                let bk = front.solutions[b].genes.k();
                score.mean_ari > bs.mean_ari
                    || (score.mean_ari == bs.mean_ari
                        && (score.std_ari < bs.std_ari || (score.std_ari == bs.std_ari && k < bk)))
            }
        };
        if better {
            best = Some((i, score));
        }
    }
    Ok(front.solutions[best.unwrap().0].genes.clone())
}
