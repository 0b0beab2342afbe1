//! Integer translation registration by normalized cross-correlation.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::baseline::temporal_median;
use super::FrameStack;
use crate::error::{Error, Result};

/// What every frame is aligned to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reference {
    Frame(usize),
    /// Per-pixel temporal median of the stack. Moving shadows vanish from
    /// it, so they cannot pull the alignment along with them.
    TemporalMedian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegistrationReport {
    /// Reference frame index; `None` for the temporal median.
    pub reference: Option<usize>,
    /// Displacement `(dy, dx)` of each frame relative to the reference:
    /// `frame(y, x) ~ reference(y - dy, x - dx)`.
    pub shifts: Vec<(i32, i32)>,
    /// Peak normalized cross-correlation per frame, in `[-1, 1]`.
    pub scores: Vec<f64>,
}

struct Fft2 {
    height: usize,
    width: usize,
    planner: FftPlanner<f64>,
}

impl Fft2 {
    fn new(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            planner: FftPlanner::new(),
        }
    }

    fn transform(&mut self, buf: &mut [Complex<f64>], inverse: bool) {
        let (h, w) = (self.height, self.width);
        let row = if inverse {
            self.planner.plan_fft_inverse(w)
        } else {
            self.planner.plan_fft_forward(w)
        };
        row.process(buf);
        let col = if inverse {
            self.planner.plan_fft_inverse(h)
        } else {
            self.planner.plan_fft_forward(h)
        };
        let mut column = vec![Complex::default(); h];
        for x in 0..w {
            for y in 0..h {
                column[y] = buf[y * w + x];
            }
            col.process(&mut column);
            for y in 0..h {
                buf[y * w + x] = column[y];
            }
        }
    }
}

/// Zero-mean copy of a frame and its L2 norm.
fn centered(frame: &[f32]) -> (Vec<Complex<f64>>, f64) {
    let mean = frame.iter().map(|&v| f64::from(v)).sum::<f64>() / frame.len() as f64;
    let buf: Vec<Complex<f64>> = frame
        .iter()
        .map(|&v| Complex::new(f64::from(v) - mean, 0.0))
        .collect();
    let norm = buf.iter().map(|c| c.re * c.re).sum::<f64>().sqrt();
    (buf, norm)
}

fn median(values: &[f32]) -> f32 {
    let mut v = values.to_vec();
    v.sort_by(f32::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Candidate shifts ordered so that, among equal scores, the smallest
/// displacement wins.
fn candidates(height: usize, width: usize) -> Vec<(i32, i32)> {
    let ry = (height / 4) as i32;
    let rx = (width / 4) as i32;
    let mut out: Vec<(i32, i32)> = (-ry..=ry)
        .flat_map(|dy| (-rx..=rx).map(move |dx| (dy, dx)))
        .collect();
    out.sort_by_key(|&(dy, dx)| (dy.abs() + dx.abs(), dy, dx));
    out
}

/// Aligns every frame to frame `reference` by the integer shift (up to a
/// quarter of the frame size per axis) maximizing circular normalized
/// cross-correlation. Vacated pixels take the frame's median value.
pub fn register_translation(
    stack: &FrameStack,
    reference: usize,
) -> Result<(FrameStack, RegistrationReport)> {
    register_to(stack, Reference::Frame(reference))
}

pub fn register_to(
    stack: &FrameStack,
    reference: Reference,
) -> Result<(FrameStack, RegistrationReport)> {
    let (ref_frame, ref_index) = match reference {
        Reference::Frame(i) if i >= stack.frames() => {
            return Err(Error::InvalidArgument(format!(
                "reference frame {i} outside 0..{}",
                stack.frames()
            )));
        }
        Reference::Frame(i) => (stack.frame(i).to_vec(), Some(i)),
        Reference::TemporalMedian => (temporal_median(stack), None),
    };
    let (h, w) = (stack.height(), stack.width());
    let mut fft = Fft2::new(h, w);
    let (mut ref_spec, ref_norm) = centered(&ref_frame);
    fft.transform(&mut ref_spec, false);
    let shifts_to_try = candidates(h, w);
    let scale = (h * w) as f64;

    let mut shifts = Vec::with_capacity(stack.frames());
    let mut scores = Vec::with_capacity(stack.frames());
    let mut data = Vec::with_capacity(stack.data().len());
    for k in 0..stack.frames() {
        let frame = stack.frame(k);
        let (shift, score) = if Some(k) == ref_index {
            ((0, 0), if ref_norm > 0.0 { 1.0 } else { 0.0 })
        } else {
            let (mut spec, norm) = centered(frame);
            if norm == 0.0 || ref_norm == 0.0 {
                ((0, 0), 0.0)
            } else {
                fft.transform(&mut spec, false);
                // corr(d) = sum_p ref(p) * frame(p + d)
                for (s, r) in spec.iter_mut().zip(&ref_spec) {
                    *s *= r.conj();
                }
                fft.transform(&mut spec, true);
                let denom = scale * norm * ref_norm;
                let mut best = ((0, 0), f64::NEG_INFINITY);
                for &(dy, dx) in &shifts_to_try {
                    let iy = dy.rem_euclid(h as i32) as usize;
                    let ix = dx.rem_euclid(w as i32) as usize;
                    let c = spec[iy * w + ix].re / denom;
                    if c > best.1 {
                        best = ((dy, dx), c);
                    }
                }
                best
            }
        };
        let fill = median(frame);
        let (dy, dx) = shift;
        for y in 0..h as i32 {
            for x in 0..w as i32 {
                let (sy, sx) = (y + dy, x + dx);
                let v = if (0..h as i32).contains(&sy) && (0..w as i32).contains(&sx) {
                    frame[sy as usize * w + sx as usize]
                } else {
                    fill
                };
                data.push(v);
            }
        }
        shifts.push(shift);
        scores.push(score);
    }
    let registered = FrameStack::new(h, w, stack.frames(), data)?;
    Ok((
        registered,
        RegistrationReport {
            reference: ref_index,
            shifts,
            scores,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_xoshiro::Xoshiro256PlusPlus;

    fn textured(h: usize, w: usize, seed: u64) -> Vec<f32> {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        (0..h * w).map(|_| rng.random::<f32>()).collect()
    }

    fn shift_circular(frame: &[f32], h: usize, w: usize, dy: i32, dx: i32) -> Vec<f32> {
        let mut out = vec![0.0; h * w];
        for y in 0..h {
            for x in 0..w {
                let sy = (y as i32 - dy).rem_euclid(h as i32) as usize;
                let sx = (x as i32 - dx).rem_euclid(w as i32) as usize;
                out[y * w + x] = frame[sy * w + sx];
            }
        }
        out
    }

    #[test]
    fn identical_frames_do_not_move() {
        let f = textured(16, 12, 1);
        let data: Vec<f32> = (0..4).flat_map(|_| f.clone()).collect();
        let s = FrameStack::new(16, 12, 4, data).unwrap();
        let (out, report) = register_translation(&s, 0).unwrap();
        assert!(report.shifts.iter().all(|&d| d == (0, 0)));
        assert_eq!(out, s);
    }

    #[test]
    fn recovers_wraparound_shift() {
        let (h, w) = (32, 24);
        let f0 = textured(h, w, 2);
        let f1 = shift_circular(&f0, h, w, 2, 3);
        let s = FrameStack::new(h, w, 2, [f0.clone(), f1].concat()).unwrap();
        let (out, report) = register_translation(&s, 0).unwrap();
        assert_eq!(report.shifts, vec![(0, 0), (2, 3)]);
        assert!((report.scores[1] - 1.0).abs() < 1e-9);
        assert_eq!((out.height(), out.width(), out.frames()), (h, w, 2));
        // the overlapping region lines up exactly with the reference
        for y in 0..h - 2 {
            for x in 0..w - 3 {
                assert_eq!(out.get(1, y, x), f0[y * w + x]);
            }
        }
    }

    #[test]
    fn recovers_shifts_up_to_a_quarter_frame() {
        let (h, w) = (40, 32);
        let f0 = textured(h, w, 3);
        for &(dy, dx) in &[(-10, 8), (10, -8), (0, -8), (-7, 0), (5, 5)] {
            let f1 = shift_circular(&f0, h, w, dy, dx);
            let s = FrameStack::new(h, w, 2, [f0.clone(), f1].concat()).unwrap();
            let (_, report) = register_translation(&s, 0).unwrap();
            assert_eq!(report.shifts[1], (dy, dx));
        }
    }

    #[test]
    fn non_circular_shift_with_fill() {
        let (h, w) = (32, 32);
        let big = textured(h + 8, w + 8, 4);
        let crop = |oy: usize, ox: usize| -> Vec<f32> {
            (0..h)
                .flat_map(|y| (0..w).map(move |x| (y, x)))
                .map(|(y, x)| big[(y + oy) * (w + 8) + x + ox])
                .collect()
        };
        // frame 1 content is the reference content displaced by (+3, -2)
        let s = FrameStack::new(h, w, 2, [crop(4, 4), crop(1, 6)].concat()).unwrap();
        let (_, report) = register_translation(&s, 0).unwrap();
        assert_eq!(report.shifts[1], (3, -2));
    }

    #[test]
    fn flat_frames_get_zero_shift() {
        let s = FrameStack::new(8, 8, 3, vec![0.5; 192]).unwrap();
        let (out, report) = register_translation(&s, 1).unwrap();
        assert_eq!(report.shifts, vec![(0, 0); 3]);
        assert_eq!(report.reference, Some(1));
        assert_eq!(out, s);
        assert!(register_translation(&s, 3).is_err());
    }

    #[test]
    fn median_reference_ignores_moving_shadows() {
        let (h, w, f) = (40, 40, 12);
        let bg = textured(h, w, 9);
        let mut data = Vec::new();
        let mut expected = Vec::new();
        for k in 0..f {
            let mut frame = bg.clone();
            // a dark 6x6 square drifting two pixels per frame
            for y in 10..16 {
                for x in 2 + 2 * k..8 + 2 * k {
                    frame[y * w + x] -= 0.8;
                }
            }
            let shift = if k % 4 == 1 { (2, -3) } else { (0, 0) };
            data.extend(shift_circular(&frame, h, w, shift.0, shift.1));
            expected.push(shift);
        }
        let s = FrameStack::new(h, w, f, data).unwrap();
        let (_, report) = register_to(&s, Reference::TemporalMedian).unwrap();
        assert_eq!(report.reference, None);
        assert_eq!(report.shifts, expected);
    }
}
