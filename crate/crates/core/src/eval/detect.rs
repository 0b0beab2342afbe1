//! Threshold + 8-connected component shadow detector.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{BoundingBox, Detection};
use crate::error::Error;
use crate::video::FrameStack;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    /// Foreground is `value < threshold` (shadows in raw frames).
    Dark,
    /// Foreground is `value > threshold` (e.g. `|S|`).
    Bright,
}

impl FromStr for Polarity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dark" => Ok(Polarity::Dark),
            "bright" => Ok(Polarity::Bright),
            other => Err(Error::InvalidArgument(format!(
                "polarity must be dark or bright, got {other:?}"
            ))),
        }
    }
}

/// Margin in pixels of the ring used as the local surround of a component.
const SURROUND_MARGIN: usize = 2;

struct Component {
    pixels: Vec<usize>,
    min_x: usize,
    min_y: usize,
    max_x: usize,
    max_y: usize,
}

fn label_components(mask: &[bool], height: usize, width: usize) -> Vec<Component> {
    let mut seen = vec![false; mask.len()];
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for start in 0..mask.len() {
        if !mask[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut comp = Component {
            pixels: Vec::new(),
            min_x: usize::MAX,
            min_y: usize::MAX,
            max_x: 0,
            max_y: 0,
        };
        while let Some(p) = stack.pop() {
            let (y, x) = (p / width, p % width);
            comp.pixels.push(p);
            comp.min_x = comp.min_x.min(x);
            comp.min_y = comp.min_y.min(y);
            comp.max_x = comp.max_x.max(x);
            comp.max_y = comp.max_y.max(y);
            for ny in y.saturating_sub(1)..=(y + 1).min(height - 1) {
                for nx in x.saturating_sub(1)..=(x + 1).min(width - 1) {
                    let q = ny * width + nx;
                    if mask[q] && !seen[q] {
                        seen[q] = true;
                        stack.push(q);
                    }
                }
            }
        }
        out.push(comp);
    }
    out
}

fn score(
    comp: &Component,
    frame: &[f32],
    mask: &[bool],
    (height, width): (usize, usize),
    polarity: Polarity,
    span: f64,
) -> f64 {
    if span <= 0.0 {
        return 0.0;
    }
    let inside = comp
        .pixels
        .iter()
        .map(|&p| f64::from(frame[p]))
        .sum::<f64>()
        / comp.pixels.len() as f64;
    let (y0, x0) = (
        comp.min_y.saturating_sub(SURROUND_MARGIN),
        comp.min_x.saturating_sub(SURROUND_MARGIN),
    );
    let y1 = (comp.max_y + SURROUND_MARGIN).min(height - 1);
    let x1 = (comp.max_x + SURROUND_MARGIN).min(width - 1);
    let (mut sum, mut count) = (0.0, 0usize);
    for y in y0..=y1 {
        for x in x0..=x1 {
            let p = y * width + x;
            if !mask[p] {
                sum += f64::from(frame[p]);
                count += 1;
            }
        }
    }
    if count == 0 {
        return 1.0;
    }
    let surround = sum / count as f64;
    let contrast = match polarity {
        Polarity::Dark => surround - inside,
        Polarity::Bright => inside - surround,
    };
    (contrast / span).clamp(0.0, 1.0)
}

/// Per frame: binarize, label 8-connected components, and emit one
/// detection per component of at least `min_area` pixels.
///
/// The score is the component's mean contrast against the non-foreground
/// pixels of its bounding box grown by two pixels, divided by the frame's
/// value range and clamped to `[0, 1]`. Detections come out ordered by
/// frame and then by raster order of each component's first pixel.
pub fn detect_shadows(
    stack: &FrameStack,
    threshold: f64,
    min_area: usize,
    polarity: Polarity,
) -> Vec<Detection> {
    let (h, w) = (stack.height(), stack.width());
    let mut out = Vec::new();
    for k in 0..stack.frames() {
        let frame = stack.frame(k);
        let mask: Vec<bool> = frame
            .iter()
            .map(|&v| match polarity {
                Polarity::Dark => f64::from(v) < threshold,
                Polarity::Bright => f64::from(v) > threshold,
            })
            .collect();
        let (lo, hi) = frame
            .iter()
            .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        let span = f64::from(hi) - f64::from(lo);
        for comp in label_components(&mask, h, w) {
            if comp.pixels.len() < min_area.max(1) {
                continue;
            }
            out.push(Detection {
                frame: k,
                bbox: BoundingBox::new(
                    comp.min_x as f64,
                    comp.min_y as f64,
                    (comp.max_x - comp.min_x + 1) as f64,
                    (comp.max_y - comp.min_y + 1) as f64,
                ),
                score: score(&comp, frame, &mask, (h, w), polarity, span),
            });
        }
    }
    out
}
