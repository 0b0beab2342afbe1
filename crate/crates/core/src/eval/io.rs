//! Detection/track CSV and ground-truth JSON files.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BoundingBox, Detection, GroundTruth, Observation, Track};
use crate::error::{Error, Result};

/// One CSV row `frame,id,x,y,w,h,score`. `id` is -1 for untracked detections.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionRow {
    pub frame: usize,
    pub id: i64,
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    pub score: f64,
}

impl DetectionRow {
    pub fn detection(&self) -> Detection {
        Detection {
            frame: self.frame,
            bbox: BoundingBox::new(self.x, self.y, self.w, self.h),
            score: self.score,
        }
    }

    fn from_detection(d: &Detection, id: i64) -> Self {
        Self {
            frame: d.frame,
            id,
            x: d.bbox.x,
            y: d.bbox.y,
            w: d.bbox.w,
            h: d.bbox.h,
            score: d.score,
        }
    }
}

fn parse_err(path: &Path, message: impl ToString) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        message: message.to_string(),
    }
}

pub fn read_detections_csv(path: impl AsRef<Path>) -> Result<Vec<DetectionRow>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, record) in reader.deserialize::<DetectionRow>().enumerate() {
        let row = record.map_err(|e| parse_err(path, e))?;
        row.detection()
            .bbox
            .validate()
            .map_err(|e| parse_err(path, format!("row {}: {e}", i + 1)))?;
        if !row.score.is_finite() {
            return Err(parse_err(path, format!("row {}: non-finite score", i + 1)));
        }
        rows.push(row);
    }
    Ok(rows)
}

fn write_rows(path: &Path, rows: &[DetectionRow]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    if rows.is_empty() {
        writer
            .write_record(["frame", "id", "x", "y", "w", "h", "score"])
            .map_err(|e| parse_err(path, e))?;
    }
    for r in rows {
        writer.serialize(r).map_err(|e| parse_err(path, e))?;
    }
    let bytes = writer.into_inner().map_err(|e| parse_err(path, e))?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn write_detections_csv(path: impl AsRef<Path>, dets: &[Detection]) -> Result<()> {
    let rows: Vec<_> = dets
        .iter()
        .map(|d| DetectionRow::from_detection(d, -1))
        .collect();
    write_rows(path.as_ref(), &rows)
}

/// Writes one row per observation, ordered by frame and then by track id.
pub fn write_tracks_csv(path: impl AsRef<Path>, tracks: &[Track]) -> Result<()> {
    let mut rows: Vec<DetectionRow> = tracks
        .iter()
        .flat_map(|t| {
            t.observations.iter().map(move |o| {
                let d = Detection {
                    frame: o.frame,
                    bbox: o.bbox,
                    score: o.score,
                };
                DetectionRow::from_detection(&d, i64::from(t.id))
            })
        })
        .collect();
    rows.sort_by(|a, b| a.frame.cmp(&b.frame).then(a.id.cmp(&b.id)));
    write_rows(path.as_ref(), &rows)
}

/// Groups rows with a positive id into tracks, ordered by id.
pub fn tracks_from_rows(rows: &[DetectionRow]) -> Result<Vec<Track>> {
    let mut by_id: BTreeMap<u32, Vec<Observation>> = BTreeMap::new();
    for r in rows {
        let id = u32::try_from(r.id)
            .ok()
            .filter(|&id| id > 0)
            .ok_or_else(|| Error::InvalidArgument(format!("row has no track id: {r:?}")))?;
        by_id.entry(id).or_default().push(Observation {
            frame: r.frame,
            bbox: BoundingBox::new(r.x, r.y, r.w, r.h),
            score: r.score,
        });
    }
    by_id
        .into_iter()
        .map(|(id, mut observations)| {
            observations.sort_by_key(|o| o.frame);
            if observations.windows(2).any(|w| w[0].frame == w[1].frame) {
                return Err(Error::InvalidArgument(format!(
                    "track {id} has two observations in one frame"
                )));
            }
            Ok(Track { id, observations })
        })
        .collect()
}

pub fn load_ground_truth(path: impl AsRef<Path>) -> Result<GroundTruth> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let gt: GroundTruth = serde_json::from_str(&text).map_err(|e| parse_err(path, e))?;
    for f in &gt.frames {
        for o in &f.objects {
            o.bbox
                .validate()
                .map_err(|e| parse_err(path, format!("frame {}: {e}", f.frame)))?;
        }
    }
    Ok(gt)
}

pub fn save_ground_truth(path: impl AsRef<Path>, gt: &GroundTruth) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string(gt).map_err(|e| parse_err(path, e))?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
