//! ROC / precision-recall evaluation of per-step scores.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One threshold step on the combined ROC / precision-recall curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    pub precision: f64,
    pub recall: f64,
}

/// Ranking quality of a score set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingEval {
    /// Area under the ROC curve, Mann-Whitney convention (ties count half).
    pub auroc: f64,
    /// Area under the precision-recall curve by step integration.
    pub aupr: f64,
    pub points: Vec<RocPoint>,
    pub positives: u64,
    pub negatives: u64,
}

/// Computes AUROC, AUPR, and curve points from `(score, is_positive)` pairs.
/// Higher scores must indicate the positive class.
pub fn roc_pr(scores: &[(f64, bool)]) -> Result<RankingEval> {
    if scores.iter().any(|(s, _)| !s.is_finite()) {
        return Err(Error::invalid_input("scores must be finite"));
    }
    let positives = scores.iter().filter(|(_, l)| *l).count();
    let negatives = scores.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::SingleClass(format!(
            "{positives} positives and {negatives} negatives; need both"
        )));
    }

    // AUROC by average ranks: (rank sum of positives - P(P+1)/2) / (P*N)
    // handles ties exactly as the half-credit pair count.
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].0.total_cmp(&scores[b].0));
    let mut rank_sum_pos = 0.0f64;
    let mut i = 0usize;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]].0 == scores[order[i]].0 {
            j += 1;
        }
        let avg_rank = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            if scores[idx].1 {
                rank_sum_pos += avg_rank;
            }
        }
        i = j;
    }
    let p = positives as f64;
    let n = negatives as f64;
    let auroc = (rank_sum_pos - p * (p + 1.0) / 2.0) / (p * n);

    // Sweep thresholds from the highest score down, grouping ties, to build
    // the ROC and precision-recall curves together.
    let mut desc = order;
    desc.reverse();
    let mut points = Vec::new();
    points.push(RocPoint {
        fpr: 0.0,
        tpr: 0.0,
        precision: 1.0,
        recall: 0.0,
    });
    let mut tp = 0u64;
    let mut fp = 0u64;
    let mut aupr = 0.0f64;
    let mut prev_recall = 0.0f64;
    let mut i = 0usize;
    while i < desc.len() {
        let mut j = i;
        while j < desc.len() && scores[desc[j]].0 == scores[desc[i]].0 {
            if scores[desc[j]].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            j += 1;
        }
        let recall = tp as f64 / p;
        let precision = tp as f64 / (tp + fp) as f64;
        points.push(RocPoint {
            fpr: fp as f64 / n,
            tpr: recall,
            precision,
            recall,
        });
        aupr += (recall - prev_recall) * precision;
        prev_recall = recall;
        i = j;
    }

    Ok(RankingEval {
        auroc,
        aupr,
        points,
        positives: positives as u64,
        negatives: negatives as u64,
    })
}
