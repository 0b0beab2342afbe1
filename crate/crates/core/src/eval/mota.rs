//! Multiple object tracking accuracy.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{BoundingBox, GroundTruth, Track};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackingReport {
    pub fp: usize,
    #[serde(rename = "fn")]
    pub false_negatives: usize,
    pub idsw: usize,
    pub mota: f64,
}

pub fn mota(tracks: &[Track], gt: &GroundTruth, iou_thresh: f64) -> Result<f64> {
    Ok(evaluate_tracks(tracks, gt, iou_thresh)?.mota)
}

/// Frame-by-frame CLEAR-style matching. A ground-truth object keeps the
/// track it was last matched to while their IoU stays at or above the
/// threshold; the remaining pairs are matched greedily by descending IoU.
/// An identity switch is counted whenever an object's matched track
/// differs from the one it was last matched to.
pub fn evaluate_tracks(
    tracks: &[Track],
    gt: &GroundTruth,
    iou_thresh: f64,
) -> Result<TrackingReport> {
    gt.require_nonempty()?;
    let mut hyps_by_frame: BTreeMap<usize, Vec<(u32, BoundingBox)>> = BTreeMap::new();
    for t in tracks {
        for o in &t.observations {
            hyps_by_frame
                .entry(o.frame)
                .or_default()
                .push((t.id, o.bbox));
        }
    }
    let frames: BTreeSet<usize> = gt
        .frames
        .iter()
        .map(|f| f.frame)
        .chain(hyps_by_frame.keys().copied())
        .collect();

    let mut last_match: BTreeMap<u32, u32> = BTreeMap::new();
    let (mut fp, mut fn_, mut idsw) = (0usize, 0usize, 0usize);
    let no_hyps = Vec::new();
    for frame in frames {
        let objects = gt.objects_at(frame);
        let hyps = hyps_by_frame.get(&frame).unwrap_or(&no_hyps);
        let mut gt_used = vec![false; objects.len()];
        let mut hyp_used = vec![false; hyps.len()];
        let mut matches: Vec<(usize, usize)> = Vec::new();

        for (gi, o) in objects.iter().enumerate() {
            let Some(&tid) = last_match.get(&o.id) else {
                continue;
            };
            if let Some(hi) = hyps.iter().position(|h| h.0 == tid) {
                let v = o.bbox.iou(&hyps[hi].1);
                if !hyp_used[hi] && v >= iou_thresh && v > 0.0 {
                    gt_used[gi] = true;
                    hyp_used[hi] = true;
                    matches.push((gi, hi));
                }
            }
        }

        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for (gi, o) in objects.iter().enumerate() {
            if gt_used[gi] {
                continue;
            }
            for (hi, h) in hyps.iter().enumerate() {
                if hyp_used[hi] {
                    continue;
                }
                let v = o.bbox.iou(&h.1);
                if v >= iou_thresh && v > 0.0 {
                    pairs.push((v, gi, hi));
                }
            }
        }
        pairs.sort_by(|a, b| {
            b.0.partial_cmp(&a.0)
                .unwrap_or(Ordering::Equal)
                .then_with(|| hyps[a.2].1.position_cmp(&hyps[b.2].1))
                .then_with(|| objects[a.1].bbox.position_cmp(&objects[b.1].bbox))
        });
        for (_, gi, hi) in pairs {
            if gt_used[gi] || hyp_used[hi] {
                continue;
            }
            gt_used[gi] = true;
            hyp_used[hi] = true;
            matches.push((gi, hi));
        }

        for (gi, hi) in matches {
            let (gid, tid) = (objects[gi].id, hyps[hi].0);
            if last_match.insert(gid, tid).is_some_and(|prev| prev != tid) {
                idsw += 1;
            }
        }
        fp += hyp_used.iter().filter(|&&u| !u).count();
        fn_ += gt_used.iter().filter(|&&u| !u).count();
    }

    let total = gt.total_objects() as f64;
    Ok(TrackingReport {
        fp,
        false_negatives: fn_,
        idsw,
        mota: 1.0 - (fp + fn_ + idsw) as f64 / total,
    })
}
