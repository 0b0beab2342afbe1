//! Shadow-quality metrics evaluated on 8-bit quantized gray levels.
//!
//! Every metric first maps real intensities to levels `0..=255` by clamping
//! to `[0, 1]` and rounding `v * 255`.

mod quality;
mod report;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use quality::{
    edge_preservation_index, entropy_2d, glcm_contrast, pixel_statistics, DEFAULT_OFFSETS,
};
pub use report::{stack_report, MetricSeries, MetricsReport};

/// A single real-valued grayscale image, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    height: usize,
    width: usize,
    values: Vec<f64>,
}

impl GrayImage {
    pub fn new(height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::Dimension(format!(
                "image dimensions must be positive, got {height}x{width}"
            )));
        }
        if values.len() != height * width {
            return Err(Error::Dimension(format!(
                "expected {} values for {height}x{width}, got {}",
                height * width,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite pixel value".into()));
        }
        Ok(Self {
            height,
            width,
            values,
        })
    }

    /// Builds an image directly from quantized levels (`l / 255`).
    pub fn from_levels(height: usize, width: usize, levels: &[u8]) -> Result<Self> {
        Self::new(
            height,
            width,
            levels.iter().map(|&l| f64::from(l) / 255.0).collect(),
        )
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, y: usize, x: usize) -> f64 {
        self.values[y * self.width + x]
    }

    /// Quantized gray levels, row-major.
    pub fn levels(&self) -> Vec<u8> {
        self.values.iter().map(|&v| quantize(v)).collect()
    }

    pub fn crop(&self, rect: CropRect) -> Result<Self> {
        let CropRect { x, y, w, h } = rect;
        if w == 0 || h == 0 || x + w > self.width || y + h > self.height {
            return Err(Error::InvalidArgument(format!(
                "crop {w}x{h}+{x}+{y} outside {}x{} image",
                self.width, self.height
            )));
        }
        let values = (y..y + h)
            .flat_map(|r| {
                self.values[r * self.width + x..r * self.width + x + w]
                    .iter()
                    .copied()
            })
            .collect();
        Self::new(h, w, values)
    }
}

pub fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Pixel rectangle: top-left `(x, y)`, size `w x h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CropRect {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}
