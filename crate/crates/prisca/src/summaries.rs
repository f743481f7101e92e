//! Point estimates, credible sets, and the detection rule that turns fitted
//! effects into a change-point count.

use serde::{Deserialize, Serialize};

use crate::engine::{dedup_overlaps, PriscaFit};
use crate::error::{Error, Result};

/// Smallest set of time indices whose posterior mass exceeds `level`.
/// Indices are 1-based and sorted ascending; the set need not be an interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CredibleSet {
    pub indices: Vec<usize>,
    pub total_mass: f64,
    pub level: f64,
}

impl CredibleSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, t: usize) -> bool {
        self.indices.binary_search(&t).is_ok()
    }
}

/// One kept effect: where the change most likely sits and its credible set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    /// 0-based index of the effect within the fit.
    pub effect: usize,
    /// 1-based time index of the posterior mode.
    pub point_estimate: usize,
    pub credible_set: CredibleSet,
}

/// Outcome of the detection rule over all effects of a fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangePointReport {
    /// Number of kept detections.
    pub k_hat: usize,
    pub detections: Vec<Detection>,
    /// Effects whose credible set exceeded the cardinality threshold.
    pub discarded_effects: Vec<usize>,
    /// Effects dropped because their set overlapped a stronger one.
    pub overlap_removed: Vec<usize>,
}

/// Maximum a posteriori change location, 1-based. Ties break to the smallest
/// index.
pub fn map_estimate(alpha: &[f64]) -> Result<usize> {
    if alpha.is_empty() {
        return Err(Error::InvalidInput("alpha must be nonempty".into()));
    }
    let mut best = 0;
    for (i, &v) in alpha.iter().enumerate() {
        if v > alpha[best] {
            best = i;
        }
    }
    Ok(best + 1)
}

/// Greedy credible set: take indices by descending alpha (ties by ascending
/// index) until the accumulated mass strictly exceeds `p`.
///
/// Expects a normalized `alpha` and `0 < p < 1`.
pub fn credible_set(alpha: &[f64], p: f64) -> CredibleSet {
    assert!(!alpha.is_empty(), "alpha must be nonempty");
    assert!(p > 0.0 && p < 1.0, "level must lie in (0,1)");
    let mut order: Vec<usize> = (0..alpha.len()).collect();
    // Stable sort keeps ascending index order within ties.
    order.sort_by(|&i, &j| alpha[j].partial_cmp(&alpha[i]).unwrap());
    let mut indices = Vec::new();
    let mut mass = 0.0;
    for i in order {
        indices.push(i + 1);
        mass += alpha[i];
        if mass > p {
            break;
        }
    }
    indices.sort_unstable();
    CredibleSet { indices, total_mass: mass, level: p }
}

/// Detection rule at level `p` with the default diffuseness threshold ⌊T/2⌋.
pub fn detect(fit: &PriscaFit, p: f64) -> ChangePointReport {
    let t_len = fit.effects.first().map_or(0, |e| e.alpha.len());
    detect_with_threshold(fit, p, t_len / 2)
}

/// Detection rule with an explicit cardinality threshold: effects whose
/// credible set has more than `max_cardinality` members are classed diffuse,
/// the rest are deduplicated by overlap and counted.
pub fn detect_with_threshold(fit: &PriscaFit, p: f64, max_cardinality: usize) -> ChangePointReport {
    let mut candidates: Vec<(usize, CredibleSet, f64)> = Vec::new();
    let mut discarded = Vec::new();
    for (l, effect) in fit.effects.iter().enumerate() {
        let set = credible_set(&effect.alpha, p);
        if set.len() <= max_cardinality {
            let max_alpha = effect.alpha.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            candidates.push((l, set, max_alpha));
        } else {
            discarded.push(l);
        }
    }

    let sets: Vec<&CredibleSet> = candidates.iter().map(|(_, s, _)| s).collect();
    let max_alphas: Vec<f64> = candidates.iter().map(|(_, _, m)| *m).collect();
    let kept_positions = dedup_overlaps(&sets, &max_alphas);

    let mut detections = Vec::new();
    let mut overlap_removed = Vec::new();
    for (pos, (l, set, _)) in candidates.into_iter().enumerate() {
        if kept_positions.contains(&pos) {
            let point_estimate = map_estimate(&fit.effects[l].alpha).expect("nonempty alpha");
            detections.push(Detection { effect: l, point_estimate, credible_set: set });
        } else {
            overlap_removed.push(l);
        }
    }

    ChangePointReport { k_hat: detections.len(), detections, discarded_effects: discarded, overlap_removed }
}
