//! Baseline shadow detector and tracker, and the AP / MOTA evaluation
//! metrics.
//!
//! Ties are broken deterministically everywhere: by frame index, then
//! leftmost `x`, then topmost `y`.

mod ap;
mod detect;
mod io;
mod mota;
mod track;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

pub use ap::{average_precision, evaluate_detections, DetectionReport};
pub use detect::{detect_shadows, Polarity};
pub use io::{
    load_ground_truth, read_detections_csv, save_ground_truth, tracks_from_rows,
    write_detections_csv, write_tracks_csv, DetectionRow,
};
pub use mota::{evaluate_tracks, mota, TrackingReport};
pub use track::{associate_tracks, associate_tracks_with, TrackerConfig};

use crate::error::{Error, Result};

pub const DEFAULT_IOU_THRESHOLD: f64 = 0.5;

/// Axis-aligned box in pixels: top-left `(x, y)`, size `w x h`. Pixel
/// `(px, py)` is inside when `x <= px < x + w` and `y <= py < y + h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BoundingBox {
    pub const fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Self { x, y, w, h }
    }

    pub fn area(&self) -> f64 {
        self.w.max(0.0) * self.h.max(0.0)
    }

    pub fn intersection(&self, other: &Self) -> f64 {
        let iw = (self.x + self.w).min(other.x + other.w) - self.x.max(other.x);
        let ih = (self.y + self.h).min(other.y + other.h) - self.y.max(other.y);
        iw.max(0.0) * ih.max(0.0)
    }

    pub fn iou(&self, other: &Self) -> f64 {
        let inter = self.intersection(other);
        let union = self.area() + other.area() - inter;
        if union <= 0.0 {
            0.0
        } else {
            inter / union
        }
    }

    /// Position order used for tie-breaking: leftmost, then topmost.
    pub(crate) fn position_cmp(&self, other: &Self) -> Ordering {
        self.x
            .total_cmp(&other.x)
            .then_with(|| self.y.total_cmp(&other.y))
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.w > 0.0 && self.h > 0.0)
            || ![self.x, self.y, self.w, self.h]
                .iter()
                .all(|v| v.is_finite())
        {
            return Err(Error::InvalidArgument(format!("degenerate box {self:?}")));
        }
        Ok(())
    }
}

pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    a.iou(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub frame: usize,
    pub bbox: BoundingBox,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub frame: usize,
    pub bbox: BoundingBox,
    pub score: f64,
}

/// A tracked identity with frames strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Track {
    pub id: u32,
    pub observations: Vec<Observation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthObject {
    pub id: u32,
    #[serde(flatten)]
    pub bbox: BoundingBox,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameObjects {
    pub frame: usize,
    pub objects: Vec<GroundTruthObject>,
}

/// Per-frame ground-truth boxes with identities stable across frames.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GroundTruth {
    pub frames: Vec<FrameObjects>,
}

impl GroundTruth {
    pub fn total_objects(&self) -> usize {
        self.frames.iter().map(|f| f.objects.len()).sum()
    }

    /// Objects of one frame (empty when the frame is absent).
    pub fn objects_at(&self, frame: usize) -> &[GroundTruthObject] {
        self.frames
            .iter()
            .find(|f| f.frame == frame)
            .map_or(&[], |f| f.objects.as_slice())
    }

    /// Builds ground truth from `(frame, [(id, box)])` lists.
    pub fn from_boxes(frames: &[(usize, Vec<(u32, BoundingBox)>)]) -> Self {
        Self {
            frames: frames
                .iter()
                .map(|(frame, objs)| FrameObjects {
                    frame: *frame,
                    objects: objs
                        .iter()
                        .map(|&(id, bbox)| GroundTruthObject { id, bbox })
                        .collect(),
                })
                .collect(),
        }
    }

    pub(crate) fn require_nonempty(&self) -> Result<()> {
        if self.total_objects() == 0 {
            return Err(Error::InvalidArgument(
                "ground truth contains no objects".into(),
            ));
        }
        Ok(())
    }
}
