//! Greedy frame-to-frame IoU association.

use std::cmp::Ordering;

use super::{Detection, Observation, Track};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackerConfig {
    /// Minimum IoU between a track's last box and a detection.
    pub iou_threshold: f64,
    /// A track ends after more than this many consecutive unmatched frames.
    pub max_missed: usize,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            iou_threshold: 0.3,
            max_missed: 3,
        }
    }
}

struct Active {
    track: usize,
    missed: usize,
}

pub fn associate_tracks(dets: &[Detection]) -> Vec<Track> {
    associate_tracks_with(dets, &TrackerConfig::default())
}

/// Links detections into tracks. At each frame, candidate (track,
/// detection) pairs at or above the IoU threshold are accepted greedily
/// by descending IoU; unmatched detections open new tracks with the next
/// id (starting at 1).
pub fn associate_tracks_with(dets: &[Detection], cfg: &TrackerConfig) -> Vec<Track> {
    let mut sorted: Vec<Detection> = dets.to_vec();
    sorted.sort_by(|a, b| {
        a.frame
            .cmp(&b.frame)
            .then_with(|| a.bbox.position_cmp(&b.bbox))
    });
    let (Some(first), Some(last)) = (sorted.first(), sorted.last()) else {
        return Vec::new();
    };
    let (first, last) = (first.frame, last.frame);

    let mut tracks: Vec<Track> = Vec::new();
    let mut active: Vec<Active> = Vec::new();
    let mut cursor = 0;
    for frame in first..=last {
        let start = cursor;
        while cursor < sorted.len() && sorted[cursor].frame == frame {
            cursor += 1;
        }
        let current = &sorted[start..cursor];

        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for (ai, a) in active.iter().enumerate() {
            let last_box = tracks[a.track].observations.last().unwrap().bbox;
            for (di, d) in current.iter().enumerate() {
                let iou = last_box.iou(&d.bbox);
                if iou >= cfg.iou_threshold && iou > 0.0 {
                    pairs.push((iou, ai, di));
                }
            }
        }
        // detections are already in position order, so ties fall back to it
        pairs.sort_by(|a, b| {
            b.0.partial_cmp(&a.0)
                .unwrap_or(Ordering::Equal)
                .then(a.2.cmp(&b.2))
                .then(a.1.cmp(&b.1))
        });
        let mut track_used = vec![false; active.len()];
        let mut det_used = vec![false; current.len()];
        for (_, ai, di) in pairs {
            if track_used[ai] || det_used[di] {
                continue;
            }
            track_used[ai] = true;
            det_used[di] = true;
            let d = current[di];
            tracks[active[ai].track].observations.push(Observation {
                frame: d.frame,
                bbox: d.bbox,
                score: d.score,
            });
        }

        let mut next_active = Vec::with_capacity(active.len());
        for (ai, mut a) in active.into_iter().enumerate() {
            if track_used[ai] {
                a.missed = 0;
                next_active.push(a);
            } else {
                a.missed += 1;
                if a.missed <= cfg.max_missed {
                    next_active.push(a);
                }
            }
        }
        for (di, d) in current.iter().enumerate() {
            if det_used[di] {
                continue;
            }
            tracks.push(Track {
                id: tracks.len() as u32 + 1,
                observations: vec![Observation {
                    frame: d.frame,
                    bbox: d.bbox,
                    score: d.score,
                }],
            });
            next_active.push(Active {
                track: tracks.len() - 1,
                missed: 0,
            });
        }
        active = next_active;
    }
    tracks
}
