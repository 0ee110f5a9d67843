//! Plurality-vote label alignment and the refined ensemble.

use crate::error::{Error, Result};
use crate::metrics::quality_weights;
use crate::model::{Clustering, ClusteringEnsemble};
use crate::par;

/// Relabels every cluster of `source` with the reference label that holds
/// the plurality of its objects. Ties go to the reference label of the
/// lowest-index object among the tied labels. Distinct source clusters may
/// collapse onto one reference label.
pub fn align_labels(source: &Clustering, reference: &Clustering) -> Result<Clustering> {
    if source.n() != reference.n() {
        return Err(Error::SizeMismatch {
            expected: reference.n(),
            actual: source.n(),
        });
    }
    let (ks, kr) = (source.k(), reference.k());
    let mut overlap = vec![0usize; ks * kr];
    // First object index (per source cluster) carrying each reference label.
    let mut first_seen = vec![usize::MAX; ks * kr];
    for (i, (&s, &r)) in source.labels().iter().zip(reference.labels()).enumerate() {
        let cell = (s as usize - 1) * kr + (r as usize - 1);
        overlap[cell] += 1;
        if first_seen[cell] == usize::MAX {
            first_seen[cell] = i;
        }
    }
    let mapping: Vec<u32> = (0..ks)
        .map(|s| {
            let row = s * kr;
            let mut best = 0;
            for r in 1..kr {
                let (o, b) = (overlap[row + r], overlap[row + best]);
                if o > b || (o == b && first_seen[row + r] < first_seen[row + best]) {
                    best = r;
                }
            }
            best as u32 + 1
        })
        .collect();
    let relabeled: Vec<u32> = source
        .labels()
        .iter()
        .map(|&s| mapping[s as usize - 1])
        .collect();
    Ok(Clustering::from_small_labels(&relabeled))
}

/// Member with `k == k_hat` and the highest quality weight, ties to the
/// lowest index.
pub fn reference_member(base: &ClusteringEnsemble, k_hat: usize) -> Result<usize> {
    let quality = if base.m() >= 2 {
        quality_weights(base)?
    } else {
        vec![1.0]
    };
    let mut best: Option<usize> = None;
    for (p, c) in base.members().iter().enumerate() {
        if c.k() == k_hat && best.is_none_or(|b| quality[p] > quality[b]) {
            best = Some(p);
        }
    }
    best.ok_or_else(|| {
        Error::Degenerate(format!(
            "no base clustering has the estimated {k_hat} clusters, so there is no reference \
             for label refinement"
        ))
    })
}

/// Original members followed by the refined half: members with more than
/// `k_hat` clusters aligned to the reference member, the rest passed
/// through. With `dedup` set, pass-through copies are dropped from the
/// refined half since they duplicate their original.
pub fn build_refined_ensemble_with(
    base: &ClusteringEnsemble,
    k_hat: usize,
    dedup: bool,
) -> Result<ClusteringEnsemble> {
    let reference = base.member(reference_member(base, k_hat)?);
    let refined = par::map_slice(base.members(), |c| {
        if c.k() > k_hat {
            align_labels(c, reference).map(Some)
        } else if dedup {
            Ok(None)
        } else {
            Ok(Some(c.clone()))
        }
    });
    let mut members = base.members().to_vec();
    for r in refined {
        members.extend(r?);
    }
    ClusteringEnsemble::new(members)
}

/// [`build_refined_ensemble_with`] with deduplication on.
pub fn build_refined_ensemble(
    base: &ClusteringEnsemble,
    k_hat: usize,
) -> Result<ClusteringEnsemble> {
    build_refined_ensemble_with(base, k_hat, true)
}
