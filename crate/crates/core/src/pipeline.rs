//! End-to-end consensus: estimate the cluster count, refine the ensemble,
//! search with NSGA-II and pick the final partition.

use serde::{Deserialize, Serialize};

use crate::coassoc::{
    build_weighted_coassoc, eac_baseline, estimate_cluster_count, threshold_sweep, CoassocMode,
    ThresholdSweepResult, DEFAULT_STEPS, DEFAULT_T,
};
use crate::error::{Error, Result};
use crate::metrics::{objectives, quality_weights, ObjectiveVector};
use crate::model::{Clustering, ClusteringEnsemble};
use crate::moea::{evolve, select_final, EvolutionTrace, GAConfig, ParetoFront};
use crate::relabel::build_refined_ensemble_with;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsensusOptions {
    pub t: usize,
    pub steps: usize,
    pub mode: CoassocMode,
    /// Drop pass-through copies from the refined half of the ensemble.
    pub dedup_refined: bool,
    pub ga: GAConfig,
}

impl Default for ConsensusOptions {
    fn default() -> Self {
        ConsensusOptions {
            t: DEFAULT_T,
            steps: DEFAULT_STEPS,
            mode: CoassocMode::Weighted,
            dedup_refined: true,
            ga: GAConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConsensusOutcome {
    pub scale_factor: f64,
    pub sweep: ThresholdSweepResult,
    pub k_hat: usize,
    pub refined: ClusteringEnsemble,
    pub front: ParetoFront,
    pub trace: EvolutionTrace,
    pub consensus: Clustering,
    /// Consensus scored against the base ensemble.
    pub consensus_objectives: ObjectiveVector,
    pub baseline: Clustering,
    pub baseline_objectives: ObjectiveVector,
    pub member_quality: Vec<f64>,
}

impl ConsensusOutcome {
    pub fn best_member_quality(&self) -> f64 {
        self.member_quality
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn run_consensus(
    base: &ClusteringEnsemble,
    opts: &ConsensusOptions,
) -> Result<ConsensusOutcome> {
    if base.m() < 2 {
        return Err(Error::InvalidInput(format!(
            "consensus needs at least two base clusterings, got {}",
            base.m()
        )));
    }
    let member_quality = quality_weights(base)?;
    let matrix = build_weighted_coassoc(base, opts.mode)?;
    let sweep = threshold_sweep(&matrix, opts.t, opts.steps)?;
    let k_hat = estimate_cluster_count(base, &sweep)?;
    let refined = build_refined_ensemble_with(base, k_hat, opts.dedup_refined)?;
    let (front, trace) = evolve(base, &refined, &opts.ga)?;
    let consensus = select_final(&front, base)?;
    let consensus_objectives = objectives(&consensus, base)?;
    let baseline = eac_baseline(base, k_hat)?;
    let baseline_objectives = objectives(&baseline, base)?;
    Ok(ConsensusOutcome {
        scale_factor: matrix.w(),
        sweep,
        k_hat,
        refined,
        front,
        trace,
        consensus,
        consensus_objectives,
        baseline,
        baseline_objectives,
        member_quality,
    })
}
