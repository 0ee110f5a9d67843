//! Consensus report in text and JSON form.

use std::fmt::Write as _;

use consensus_core::pipeline::ConsensusOutcome;
use consensus_core::{adjusted_rand_index, ClusteringEnsemble, Result};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodRow {
    pub method: String,
    pub k: usize,
    pub mean_ari: f64,
    pub std_ari: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub n: usize,
    pub members: usize,
    pub member_k: Vec<usize>,
    pub member_quality: Vec<f64>,
    pub scale_factor: f64,
    pub k_hat: usize,
    pub k_hat_stability: usize,
    pub refined_members: usize,
    pub generations: usize,
    pub stopped_early: bool,
    pub front_size: usize,
    pub best_member_quality: f64,
    /// Proposed consensus first, then the baselines, all scored against
    /// the base ensemble.
    pub comparison: Vec<MethodRow>,
    /// ARI between the consensus and the evidence-accumulation baseline.
    pub consensus_vs_baseline_ari: f64,
}

impl Report {
    pub fn new(base: &ClusteringEnsemble, out: &ConsensusOutcome) -> Result<Self> {
        Ok(Report {
            n: base.n(),
            members: base.m(),
            member_k: base.members().iter().map(|c| c.k()).collect(),
            member_quality: out.member_quality.clone(),
            scale_factor: out.scale_factor,
            k_hat: out.k_hat,
            k_hat_stability: out.sweep.stability.get(&out.k_hat).copied().unwrap_or(0),
            refined_members: out.refined.m(),
            generations: out.trace.generations.len().saturating_sub(1),
            stopped_early: out.trace.stopped_early,
            front_size: out.front.len(),
            best_member_quality: out.best_member_quality(),
            comparison: vec![
                MethodRow {
                    method: "proposed".into(),
                    k: out.consensus.k(),
                    mean_ari: out.consensus_objectives.mean_ari,
                    std_ari: out.consensus_objectives.std_ari,
                },
                MethodRow {
                    method: "eac-average".into(),
                    k: out.baseline.k(),
                    mean_ari: out.baseline_objectives.mean_ari,
                    std_ari: out.baseline_objectives.std_ari,
                },
            ],
            consensus_vs_baseline_ari: adjusted_rand_index(&out.consensus, &out.baseline)?,
        })
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "objects            {}", self.n);
        let _ = writeln!(s, "base clusterings   {}", self.members);
        let _ = writeln!(s, "scale factor w     {:.6}", self.scale_factor);
        let _ = writeln!(
            s,
            "estimated k        {} (stable for {} steps)",
            self.k_hat, self.k_hat_stability
        );
        let _ = writeln!(s, "refined members    {}", self.refined_members);
        let _ = writeln!(
            s,
            "generations        {}{}",
            self.generations,
            if self.stopped_early {
                " (front stalled)"
            } else {
                ""
            }
        );
        let _ = writeln!(s, "pareto front size  {}", self.front_size);
        let _ = writeln!(s, "best member q      {:.6}", self.best_member_quality);
        let _ = writeln!(s);
        let _ = writeln!(
            s,
            "{:<12} {:>3} {:>10} {:>10}",
            "method", "k", "mean_ari", "std_ari"
        );
        for row in &self.comparison {
            let _ = writeln!(
                s,
                "{:<12} {:>3} {:>10.6} {:>10.6}",
                row.method, row.k, row.mean_ari, row.std_ari
            );
        }
        let _ = writeln!(s);
        let _ = writeln!(
            s,
            "consensus vs eac ARI {:.6}",
            self.consensus_vs_baseline_ari
        );
        s
    }
}

/// Per-member table printed by `generate`.
pub fn member_table(k: &[usize], quality: &[f64]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:>6} {:>3} {:>10}", "member", "k", "quality");
    for (i, (k, q)) in k.iter().zip(quality).enumerate() {
        let _ = writeln!(s, "{:>6} {:>3} {:>10.6}", i + 1, k, q);
    }
    s
}
