//! Detection average precision.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Detection, GroundTruth};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub false_negatives: usize,
    pub precision: f64,
    pub recall: f64,
    pub ap: f64,
}

fn ranking(a: &Detection, b: &Detection) -> Ordering {
    b.score
        .partial_cmp(&a.score)
        .unwrap_or(Ordering::Equal)
        .then(a.frame.cmp(&b.frame))
        .then_with(|| a.bbox.position_cmp(&b.bbox))
}

/// Marks each detection, in ranking order, as a hit or a miss. A detection
/// claims the still-unclaimed ground-truth box of its frame with the
/// highest IoU, provided that IoU reaches the threshold.
fn match_ranked(dets: &[Detection], gt: &GroundTruth, iou_thresh: f64) -> Vec<bool> {
    let mut sorted = dets.to_vec();
    sorted.sort_by(ranking);
    let mut claimed: BTreeMap<usize, Vec<bool>> = BTreeMap::new();
    sorted
        .iter()
        .map(|d| {
            let objects = gt.objects_at(d.frame);
            let used = claimed
                .entry(d.frame)
                .or_insert_with(|| vec![false; objects.len()]);
            let mut best: Option<(usize, f64)> = None;
            for (i, o) in objects.iter().enumerate() {
                if used[i] {
                    continue;
                }
                let v = d.bbox.iou(&o.bbox);
                if v >= iou_thresh && v > 0.0 && best.is_none_or(|(_, b)| v > b) {
                    best = Some((i, v));
                }
            }
            match best {
                Some((i, _)) => {
                    used[i] = true;
                    true
                }
                None => false,
            }
        })
        .collect()
}

fn interpolated_area(hits: &[bool], total_gt: usize) -> f64 {
    let mut precision = Vec::with_capacity(hits.len());
    let mut recall = Vec::with_capacity(hits.len());
    let mut tp = 0usize;
    for (rank, &hit) in hits.iter().enumerate() {
        if hit {
            tp += 1;
        }
        precision.push(tp as f64 / (rank + 1) as f64);
        recall.push(tp as f64 / total_gt as f64);
    }
    for i in (0..precision.len().saturating_sub(1)).rev() {
        precision[i] = precision[i].max(precision[i + 1]);
    }
    let mut area = 0.0;
    let mut prev_recall = 0.0;
    for (p, r) in precision.iter().zip(&recall) {
        area += (r - prev_recall) * p;
        prev_recall = *r;
    }
    area
}

/// Area under the all-point interpolated precision-recall curve.
pub fn average_precision(dets: &[Detection], gt: &GroundTruth, iou_thresh: f64) -> Result<f64> {
    Ok(evaluate_detections(dets, gt, iou_thresh)?.ap)
}

pub fn evaluate_detections(
    dets: &[Detection],
    gt: &GroundTruth,
    iou_thresh: f64,
) -> Result<DetectionReport> {
    gt.require_nonempty()?;
    let total = gt.total_objects();
    let hits = match_ranked(dets, gt, iou_thresh);
    let tp = hits.iter().filter(|&&h| h).count();
    let fp = hits.len() - tp;
    Ok(DetectionReport {
        tp,
        fp,
        false_negatives: total - tp,
        precision: if hits.is_empty() {
            0.0
        } else {
            tp as f64 / hits.len() as f64
        },
        recall: tp as f64 / total as f64,
        ap: interpolated_area(&hits, total),
    })
}
