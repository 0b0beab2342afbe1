use serde::{Deserialize, Serialize};

use super::{edge_preservation_index, entropy_2d, glcm_contrast, CropRect, GrayImage};
use crate::error::{Error, Result};
use crate::video::FrameStack;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSeries {
    pub per_frame: Vec<f64>,
    pub mean: f64,
}

impl MetricSeries {
    fn from_values(per_frame: Vec<f64>) -> Self {
        let mean = per_frame.iter().sum::<f64>() / per_frame.len() as f64;
        Self { per_frame, mean }
    }
}

/// Per-frame contrast, EPI and entropy of a stack. EPI is present only when
/// a reference stack was supplied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub contrast: MetricSeries,
    pub epi: Option<MetricSeries>,
    pub entropy: MetricSeries,
}

fn frame(stack: &FrameStack, k: usize, crop: Option<CropRect>) -> Result<GrayImage> {
    let img = stack.frame_image(k);
    match crop {
        Some(rect) => img.crop(rect),
        None => Ok(img),
    }
}

pub fn stack_report(
    eval: &FrameStack,
    reference: Option<&FrameStack>,
    offsets: &[(isize, isize)],
    crop: Option<CropRect>,
) -> Result<MetricsReport> {
    if let Some(r) = reference {
        if (r.height(), r.width(), r.frames()) != (eval.height(), eval.width(), eval.frames()) {
            return Err(Error::Dimension(format!(
                "reference stack {}x{}x{} differs from {}x{}x{}",
                r.height(),
                r.width(),
                r.frames(),
                eval.height(),
                eval.width(),
                eval.frames()
            )));
        }
    }
    let mut contrast = Vec::with_capacity(eval.frames());
    let mut entropy = Vec::with_capacity(eval.frames());
    let mut epi = Vec::with_capacity(eval.frames());
    for k in 0..eval.frames() {
        let img = frame(eval, k, crop)?;
        contrast.push(glcm_contrast(&img, offsets)?);
        entropy.push(entropy_2d(&img)?);
        if let Some(r) = reference {
            epi.push(edge_preservation_index(&img, &frame(r, k, crop)?)?);
        }
    }
    Ok(MetricsReport {
        contrast: MetricSeries::from_values(contrast),
        epi: reference.map(|_| MetricSeries::from_values(epi)),
        entropy: MetricSeries::from_values(entropy),
    })
}
