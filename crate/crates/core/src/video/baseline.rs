//! Classical comparison baselines: histogram equalization and temporal
//! median background subtraction.

use super::FrameStack;
use crate::error::{Error, Result};
use crate::metrics::{pixel_statistics, GrayImage};

/// 256-bin cumulative-histogram remap of the `[0, 1]`-clamped image.
///
/// Level `l` maps to `(cdf(l) - cdf_min) / (n - cdf_min)`, so the darkest
/// occupied level goes to 0 and the brightest to 1. A constant image is
/// returned at its quantized level.
pub fn histogram_equalize(frame: &GrayImage) -> GrayImage {
    let levels = frame.levels();
    let (hist, _) = pixel_statistics(frame);
    let n = levels.len() as u64;
    let mut cdf = [0u64; 256];
    let mut acc = 0;
    for (c, h) in cdf.iter_mut().zip(hist.iter()) {
        acc += h;
        *c = acc;
    }
    let cdf_min = cdf[levels.iter().copied().min().unwrap_or(0) as usize];
    let values = levels
        .iter()
        .map(|&l| {
            if n == cdf_min {
                f64::from(l) / 255.0
            } else {
                (cdf[l as usize] - cdf_min) as f64 / (n - cdf_min) as f64
            }
        })
        .collect();
    GrayImage::new(frame.height(), frame.width(), values).expect("same shape as input")
}

/// Per-pixel temporal median of a stack, as a single frame.
pub fn temporal_median(stack: &FrameStack) -> Vec<f32> {
    let n = stack.pixels_per_frame();
    let f = stack.frames();
    let mut column = vec![0.0f32; f];
    (0..n)
        .map(|i| {
            for (k, c) in column.iter_mut().enumerate() {
                *c = stack.data()[k * n + i];
            }
            column.sort_by(f32::total_cmp);
            if f % 2 == 1 {
                column[f / 2]
            } else {
                (column[f / 2 - 1] + column[f / 2]) / 2.0
            }
        })
        .collect()
}

/// `input - temporal median`, pixel by pixel.
pub fn temporal_median_subtract(stack: &FrameStack) -> Result<FrameStack> {
    if stack.frames() < 2 {
        return Err(Error::InvalidArgument(
            "median background subtraction needs at least 2 frames".into(),
        ));
    }
    let median = temporal_median(stack);
    let n = stack.pixels_per_frame();
    let data = stack
        .data()
        .iter()
        .enumerate()
        .map(|(i, &v)| v - median[i % n])
        .collect();
    FrameStack::new(stack.height(), stack.width(), stack.frames(), data)
}
