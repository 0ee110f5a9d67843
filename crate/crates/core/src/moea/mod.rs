//! NSGA-II search over partitions.
//!
//! Chromosomes are integer label vectors; the two objectives are the mean
//! ARI to a reference ensemble (maximized) and its standard deviation
//! (minimized).

mod evolve;
mod operators;
mod sort;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::ObjectiveVector;
use crate::model::{Clustering, RandomSeed};

pub use evolve::{evolve, select_final, EvolutionTrace, GenerationStats};
pub use operators::{
    align_to, crossover, crossover_at, crossover_bipartite, mutate, mutate_gene, tournament_select,
    MUTATION_STEP,
};
pub use sort::{crowding_distance, fast_nondominated_sort};

/// One candidate partition with its NSGA-II bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct Chromosome {
    pub genes: Clustering,
    pub objectives: Option<ObjectiveVector>,
    /// Nondomination rank, 1 for the first front; 0 until sorted.
    pub rank: usize,
    pub crowding: f64,
    /// Generation in which this chromosome was created.
    pub born: usize,
}

impl Chromosome {
    pub fn new(genes: Clustering) -> Self {
        Chromosome {
            genes,
            objectives: None,
            rank: 0,
            crowding: 0.0,
            born: 0,
        }
    }

    pub fn with_objectives(genes: Clustering, objectives: ObjectiveVector) -> Self {
        Chromosome {
            objectives: Some(objectives),
            ..Chromosome::new(genes)
        }
    }

    pub(crate) fn objectives_or_err(&self) -> Result<ObjectiveVector> {
        self.objectives
            .ok_or_else(|| Error::InvalidInput("chromosome has not been evaluated".into()))
    }
}

/// Pareto dominance: at least as good in both objectives, strictly better
/// in one.
pub fn dominates(a: &ObjectiveVector, b: &ObjectiveVector) -> bool {
    a.mean_ari >= b.mean_ari
        && a.std_ari <= b.std_ari
        && (a.mean_ari > b.mean_ari || a.std_ari < b.std_ari)
}

/// Which ensemble the objectives are measured against during the search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveTarget {
    Base,
    Refined,
    /// Base members plus refined members not already in the base.
    #[default]
    Union,
}

/// How [`crossover_bipartite`] matches the second parent's clusters to the
/// first parent's labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Matching {
    /// Descending-overlap greedy matching.
    #[default]
    Greedy,
    /// Maximum total overlap (exhaustive assignment for small cluster
    /// counts, falling back to greedy beyond that).
    Optimal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GAConfig {
    pub crossover_rate: f64,
    /// Probability that a child has one gene mutated.
    pub mutation_rate: f64,
    /// `None` means twice the base ensemble size.
    pub population_size: Option<usize>,
    pub generations: usize,
    /// Stop once the first front is unchanged for this many generations;
    /// 0 disables early stopping.
    pub stall_generations: usize,
    pub objective_target: ObjectiveTarget,
    pub matching: Matching,
    pub seed: RandomSeed,
}

impl Default for GAConfig {
    fn default() -> Self {
        GAConfig {
            crossover_rate: 0.9,
            mutation_rate: 0.01,
            population_size: None,
            generations: 100,
            stall_generations: 20,
            objective_target: ObjectiveTarget::Union,
            matching: Matching::Greedy,
            seed: RandomSeed(0),
        }
    }
}

impl GAConfig {
    /// Population size for a base ensemble of `base_size` members. Odd
    /// defaults are rounded up to the next even size.
    pub fn resolved_population(&self, base_size: usize) -> usize {
        self.population_size.unwrap_or_else(|| {
            let p = (2 * base_size).max(4);
            p + p % 2
        })
    }

    pub fn validate(&self, base_size: usize) -> Result<()> {
        for (name, rate) in [
            ("crossover_rate", self.crossover_rate),
            ("mutation_rate", self.mutation_rate),
        ] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::Config(format!(
                    "{name} must be in [0, 1], got {rate}"
                )));
            }
        }
        let pop = self.resolved_population(base_size);
        if pop < 4 || !pop.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "population size must be even and at least 4, got {pop}"
            )));
        }
        Ok(())
    }
}

/// A solution on the first front and the generation it was created in.
#[derive(Debug, Clone, PartialEq)]
pub struct ParetoSolution {
    pub genes: Clustering,
    pub objectives: ObjectiveVector,
    pub generation: usize,
}

/// Mutually non-dominated solutions, one per distinct partition.
#[derive(Debug, Clone, PartialEq)]
pub struct ParetoFront {
    pub solutions: Vec<ParetoSolution>,
}

impl ParetoFront {
    /// Rank-1 members of an evaluated population, deduplicated by partition
    /// (the earliest-born copy is kept) and ordered by descending mean ARI.
    pub fn from_population(pop: &[Chromosome]) -> Result<Self> {
        let mut evaluated = pop.to_vec();
        fast_nondominated_sort(&mut evaluated)?;
        let mut first: Vec<&Chromosome> = evaluated.iter().filter(|c| c.rank == 1).collect();
        first.sort_by(|a, b| {
            let (oa, ob) = (a.objectives.unwrap(), b.objectives.unwrap());
            ob.mean_ari
                .total_cmp(&oa.mean_ari)
                .then(oa.std_ari.total_cmp(&ob.std_ari))
                .then(a.genes.k().cmp(&b.genes.k()))
                .then(a.genes.labels().cmp(b.genes.labels()))
                .then(a.born.cmp(&b.born))
        });
        let mut solutions: Vec<ParetoSolution> = Vec::new();
        for c in first {
            if solutions.iter().any(|s| s.genes == c.genes) {
                continue;
            }
            solutions.push(ParetoSolution {
                genes: c.genes.clone(),
                objectives: c.objectives.unwrap(),
                generation: c.born,
            });
        }
        Ok(ParetoFront { solutions })
    }

    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    /// `mean_ari,std_ari,k,generation` rows with a header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "mean_ari,std_ari,k,generation")?;
        for s in &self.solutions {
            writeln!(
                out,
                "{},{},{},{}",
                s.objectives.mean_ari,
                s.objectives.std_ari,
                s.genes.k(),
                s.generation
            )?;
        }
        Ok(())
    }
}
