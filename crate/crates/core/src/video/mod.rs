//! Video tensors and the operations that move them between files, matrices
//! and sub-windows.

mod baseline;
mod pgm;
mod register;
mod sbnt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::metrics::GrayImage;

pub use baseline::{histogram_equalize, temporal_median, temporal_median_subtract};
pub use pgm::{export_frames, import_frames, read_pgm, write_pgm};
pub use register::{register_to, register_translation, Reference, RegistrationReport};
pub use sbnt::{decode_stack, encode_stack, load_stack, save_stack, SBNT_MAGIC, SBNT_VERSION};

/// A stack of `frames` grayscale frames, each `height` x `width`.
///
/// Pixels are stored frame after frame, each frame row-major. The nominal
/// range is `[0, 1]` but any finite value is allowed, so signed components
/// such as a shadow layer can be represented.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameStack {
    height: usize,
    width: usize,
    frames: usize,
    data: Vec<f32>,
}

impl FrameStack {
    pub fn new(height: usize, width: usize, frames: usize, data: Vec<f32>) -> Result<Self> {
        if height == 0 || width == 0 || frames == 0 {
            return Err(Error::Dimension(format!(
                "stack dimensions must be positive, got {height}x{width}x{frames}"
            )));
        }
        let expected = height
            .checked_mul(width)
            .and_then(|n| n.checked_mul(frames))
            .ok_or_else(|| Error::Dimension("stack size overflows usize".into()))?;
        if data.len() != expected {
            return Err(Error::Dimension(format!(
                "expected {expected} pixels for {height}x{width}x{frames}, got {}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite pixel at index {i}"
            )));
        }
        Ok(Self {
            height,
            width,
            frames,
            data,
        })
    }

    pub fn zeros(height: usize, width: usize, frames: usize) -> Result<Self> {
        Self::new(height, width, frames, vec![0.0; height * width * frames])
    }

    /// Builds a stack from a generator `f(frame, row, col)`.
    pub fn from_fn(
        height: usize,
        width: usize,
        frames: usize,
        mut f: impl FnMut(usize, usize, usize) -> f32,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(height * width * frames);
        for k in 0..frames {
            for y in 0..height {
                for x in 0..width {
                    data.push(f(k, y, x));
                }
            }
        }
        Self::new(height, width, frames, data)
    }

    /// Concatenates frames of identical size, in order.
    pub fn from_frames(frames: &[GrayImage]) -> Result<Self> {
        let first = frames
            .first()
            .ok_or_else(|| Error::Dimension("no frames supplied".into()))?;
        let (h, w) = (first.height(), first.width());
        let mut data = Vec::with_capacity(h * w * frames.len());
        for (k, img) in frames.iter().enumerate() {
            if img.height() != h || img.width() != w {
                return Err(Error::Dimension(format!(
                    "frame {k} is {}x{}, expected {h}x{w}",
                    img.height(),
                    img.width()
                )));
            }
            data.extend(img.values().iter().map(|&v| v as f32));
        }
        Self::new(h, w, frames.len(), data)
    }

    /// Stacks several stacks of equal frame size along time.
    pub fn concat(parts: &[FrameStack]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::Dimension("nothing to concatenate".into()))?;
        let mut data = Vec::new();
        let mut frames = 0;
        for part in parts {
            if part.height != first.height || part.width != first.width {
                return Err(Error::Dimension(format!(
                    "cannot concatenate {}x{} frames with {}x{}",
                    part.height, part.width, first.height, first.width
                )));
            }
            data.extend_from_slice(&part.data);
            frames += part.frames;
        }
        Self::new(first.height, first.width, frames, data)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn pixels_per_frame(&self) -> usize {
        self.height * self.width
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn frame(&self, k: usize) -> &[f32] {
        let n = self.pixels_per_frame();
        &self.data[k * n..(k + 1) * n]
    }

    pub fn get(&self, k: usize, y: usize, x: usize) -> f32 {
        self.data[(k * self.height + y) * self.width + x]
    }

    pub fn frame_image(&self, k: usize) -> GrayImage {
        let values = self.frame(k).iter().map(|&v| f64::from(v)).collect();
        GrayImage::new(self.height, self.width, values).expect("frame dimensions are valid")
    }

    pub fn frame_images(&self) -> Vec<GrayImage> {
        (0..self.frames).map(|k| self.frame_image(k)).collect()
    }

    /// Applies `f` to every pixel. Fails if `f` produces a non-finite value.
    pub fn map(&self, f: impl Fn(f32) -> f32) -> Result<Self> {
        Self::new(
            self.height,
            self.width,
            self.frames,
            self.data.iter().map(|&v| f(v)).collect(),
        )
    }

    pub fn abs(&self) -> Self {
        self.map(f32::abs).expect("abs of finite values is finite")
    }

    /// Affine map of the whole stack onto `[0, 1]` (min to 0, max to 1).
    /// A constant stack maps to all zeros.
    pub fn normalized(&self) -> Self {
        let (lo, hi) = self.value_range();
        let span = hi - lo;
        if span <= 0.0 {
            return self.map(|_| 0.0).expect("zeros are finite");
        }
        self.map(|v| (v - lo) / span)
            .expect("affine map of finite values")
    }

    pub fn value_range(&self) -> (f32, f32) {
        self.data
            .iter()
            .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Column `j` of the result is frame `j` flattened row-major.
    pub fn matricize(&self) -> MatricizedVideo {
        let n = self.pixels_per_frame();
        let matrix = DMatrix::from_fn(n, self.frames, |i, j| f64::from(self.data[j * n + i]));
        MatricizedVideo { matrix }
    }

    /// Frames `[start, start + length)` as a new stack.
    pub fn window(&self, start: usize, length: usize) -> Result<Self> {
        let end = start
            .checked_add(length)
            .filter(|&e| length > 0 && e <= self.frames)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "window [{start}, {start}+{length}) outside 0..{}",
                    self.frames
                ))
            })?;
        let n = self.pixels_per_frame();
        Self::new(
            self.height,
            self.width,
            length,
            self.data[start * n..end * n].to_vec(),
        )
    }

    /// Consecutive windows of `length` frames covering the whole stack; the
    /// last window is shorter when `length` does not divide the frame count.
    pub fn windows(&self, length: usize) -> Result<Vec<Self>> {
        if length == 0 {
            return Err(Error::InvalidArgument(
                "window length must be positive".into(),
            ));
        }
        (0..self.frames)
            .step_by(length)
            .map(|start| self.window(start, length.min(self.frames - start)))
            .collect()
    }
}

/// The `Nc x f` matrix form of a stack: one vectorized frame per column.
#[derive(Debug, Clone, PartialEq)]
pub struct MatricizedVideo {
    matrix: DMatrix<f64>,
}

impl MatricizedVideo {
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() == 0 || matrix.ncols() == 0 {
            return Err(Error::Dimension(
                "matricized video must be non-empty".into(),
            ));
        }
        Ok(Self { matrix })
    }

    pub fn pixels_per_frame(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn frames(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    /// Inverse of [`FrameStack::matricize`]. Values are narrowed to `f32`.
    pub fn tensorize(&self, height: usize, width: usize) -> Result<FrameStack> {
        tensorize(&self.matrix, height, width)
    }
}

pub fn tensorize(matrix: &DMatrix<f64>, height: usize, width: usize) -> Result<FrameStack> {
    if height.checked_mul(width) != Some(matrix.nrows()) {
        return Err(Error::Dimension(format!(
            "{height}x{width} frames do not match {} pixels per column",
            matrix.nrows()
        )));
    }
    // nalgebra storage is column-major, which is exactly frame-after-frame.
    let data = matrix.as_slice().iter().map(|&v| v as f32).collect();
    FrameStack::new(height, width, matrix.ncols(), data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(h: usize, w: usize, f: usize) -> FrameStack {
        FrameStack::from_fn(h, w, f, |k, y, x| (k * 100 + y * 10 + x) as f32 / 1000.0).unwrap()
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(FrameStack::new(0, 2, 1, vec![]).is_err());
        assert!(FrameStack::new(2, 2, 0, vec![]).is_err());
        assert!(FrameStack::new(2, 2, 1, vec![0.0; 3]).is_err());
        assert!(FrameStack::new(1, 1, 1, vec![f32::NAN]).is_err());
    }

    #[test]
    fn matricize_shape_and_columns() {
        let s = ramp(2, 2, 2);
        let m = s.matricize();
        assert_eq!(m.matrix().shape(), (4, 2));
        assert_eq!(m.pixels_per_frame(), 4);
        // column 1 is frame 1 row-major
        let col: Vec<f32> = m.matrix().column(1).iter().map(|&v| v as f32).collect();
        assert_eq!(col, s.frame(1));
    }

    #[test]
    fn static_stack_matricizes_to_rank_one() {
        let s = FrameStack::from_fn(4, 5, 6, |_, y, x| (y * 5 + x) as f32 * 0.01 + 0.1).unwrap();
        let m = s.matricize();
        for j in 1..m.frames() {
            assert_eq!(m.matrix().column(j), m.matrix().column(0));
        }
        assert_eq!(m.matrix().rank(1e-9), 1);
    }

    #[test]
    fn tensorize_inverts_matricize() {
        let s = ramp(3, 4, 5);
        assert_eq!(s.matricize().tensorize(3, 4).unwrap(), s);
        let m = DMatrix::from_fn(4, 2, |i, j| (i + 4 * j) as f64 * 0.5);
        let mv = MatricizedVideo::from_matrix(m.clone()).unwrap();
        let back = mv.tensorize(2, 2).unwrap();
        assert_eq!((back.height(), back.width(), back.frames()), (2, 2, 2));
        assert_eq!(back.matricize().matrix(), &m);
        assert!(mv.tensorize(3, 2).is_err());
    }

    #[test]
    fn windows_cover_stack() {
        let s = ramp(2, 2, 9);
        assert_eq!(s.window(0, 9).unwrap(), s);
        assert!(s.window(5, 5).is_err());
        assert!(s.window(0, 0).is_err());
        let w = s.window(3, 2).unwrap();
        assert_eq!(w.frame(0), s.frame(3));
        assert_eq!(w.frame(1), s.frame(4));
        let parts = s.windows(4).unwrap();
        assert_eq!(
            parts.iter().map(|p| p.frames()).collect::<Vec<_>>(),
            vec![4, 4, 1]
        );
        assert_eq!(FrameStack::concat(&parts).unwrap(), s);
    }

    #[test]
    fn nine_sub_videos_of_long_stack() {
        let s = FrameStack::zeros(2, 2, 900).unwrap();
        assert_eq!(s.windows(100).unwrap().len(), 9);
        for len in [50, 75, 100, 125, 150] {
            assert_eq!(s.window(0, len).unwrap().frames(), len);
        }
    }

    #[test]
    fn normalized_spans_unit_range() {
        let s = FrameStack::new(1, 3, 1, vec![-0.3, 0.0, 0.1]).unwrap();
        let n = s.normalized();
        assert_eq!(n.value_range(), (0.0, 1.0));
        let c = FrameStack::new(1, 2, 1, vec![0.4, 0.4]).unwrap();
        assert_eq!(c.normalized().data(), &[0.0, 0.0]);
    }
}
