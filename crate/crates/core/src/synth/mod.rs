//! Synthetic registered scenes with exactly known shadow, background and
//! noise layers, plus ground-truth boxes and track identities.
//!
//! Randomness comes from `Xoshiro256PlusPlus` seeded through
//! `seed_from_u64`, drawing noise frame by frame in row-major order.

use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Exp, StandardNormal};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{BoundingBox, FrameObjects, GroundTruth, GroundTruthObject};
use crate::video::FrameStack;

/// `0.5 + 0.5 sin(2 pi cycles t / len + phase)`, a smooth profile in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wave {
    pub cycles: f64,
    pub phase: f64,
}

impl Wave {
    fn eval(&self, t: usize, len: usize) -> f64 {
        0.5 + 0.5 * (std::f64::consts::TAU * self.cycles * t as f64 / len as f64 + self.phase).sin()
    }
}

/// One separable term `amplitude * rows(y) * cols(x)` of the background.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparableProfile {
    pub amplitude: f64,
    pub rows: Wave,
    pub cols: Wave,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackgroundSpec {
    pub offset: f64,
    pub profiles: Vec<SeparableProfile>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeKind {
    Rectangle,
    Ellipse,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Shape {
    pub kind: ShapeKind,
    pub width: usize,
    pub height: usize,
}

/// Top-left corner at frame `k`: `start + velocity k + acceleration k^2 / 2`,
/// rounded to the nearest pixel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub start: (f64, f64),
    pub velocity: (f64, f64),
    #[serde(default)]
    pub acceleration: (f64, f64),
}

impl Trajectory {
    /// `(x, y)` of the top-left corner at frame `k`.
    pub fn position(&self, k: usize) -> (i64, i64) {
        let t = k as f64;
        let at = |s: f64, v: f64, a: f64| (s + v * t + 0.5 * a * t * t).round() as i64;
        (
            at(self.start.0, self.velocity.0, self.acceleration.0),
            at(self.start.1, self.velocity.1, self.acceleration.1),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub shape: Shape,
    /// Additive intensity offset of the shadow; must be negative.
    pub depth: f64,
    pub trajectory: Trajectory,
}

impl TargetSpec {
    /// In-shape pixel offsets relative to the top-left corner.
    fn footprint(&self) -> Vec<(usize, usize)> {
        let Shape {
            kind,
            width,
            height,
        } = self.shape;
        let mut cells = Vec::new();
        for dy in 0..height {
            for dx in 0..width {
                let inside = match kind {
                    ShapeKind::Rectangle => true,
                    ShapeKind::Ellipse => {
                        let u = (dx as f64 + 0.5) / width as f64 * 2.0 - 1.0;
                        let v = (dy as f64 + 0.5) / height as f64 * 2.0 - 1.0;
                        u * u + v * v <= 1.0
                    }
                };
                if inside {
                    cells.push((dy, dx));
                }
            }
        }
        cells
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    Gaussian,
    Rayleigh,
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    /// Gaussian standard deviation, Rayleigh scale, or exponential mean.
    pub scale: f64,
    /// Subtract the distribution mean so the noise layer is zero-mean.
    #[serde(default = "default_true")]
    pub mean_center: bool,
}

fn default_true() -> bool {
    true
}

impl NoiseModel {
    pub fn gaussian(sigma: f64) -> Self {
        Self {
            kind: NoiseKind::Gaussian,
            scale: sigma,
            mean_center: true,
        }
    }

    pub fn mean(&self) -> f64 {
        match self.kind {
            NoiseKind::Gaussian => 0.0,
            NoiseKind::Rayleigh => self.scale * (std::f64::consts::PI / 2.0).sqrt(),
            NoiseKind::Exponential => self.scale,
        }
    }

    fn sample(&self, rng: &mut Xoshiro256PlusPlus) -> f64 {
        let raw = match self.kind {
            NoiseKind::Gaussian => self.scale * rng.sample::<f64, _>(StandardNormal),
            NoiseKind::Rayleigh => {
                // inverse CDF; 1 - u lies in (0, 1]
                let u: f64 = rng.random();
                self.scale * (-2.0 * (1.0 - u).ln()).sqrt()
            }
            NoiseKind::Exponential => {
                self.scale * Exp::new(1.0).expect("unit rate is valid").sample(rng)
            }
        };
        if self.mean_center {
            raw - self.mean()
        } else {
            raw
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub height: usize,
    pub width: usize,
    pub frames: usize,
    pub background: BackgroundSpec,
    pub targets: Vec<TargetSpec>,
    pub noise: Option<NoiseModel>,
    /// Clip the observed stack to `[0, 1]`.
    #[serde(default)]
    pub clamp: bool,
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.height == 0 || self.width == 0 || self.frames == 0 {
            return bad("scene dimensions must be positive".into());
        }
        if self.background.profiles.is_empty() {
            return bad("background needs at least one separable profile".into());
        }
        if let Some(noise) = &self.noise {
            if !(noise.scale > 0.0 && noise.scale.is_finite()) {
                return bad(format!("noise scale must be positive, got {}", noise.scale));
            }
        }
        for (i, t) in self.targets.iter().enumerate() {
            if t.depth.is_nan() || t.depth >= 0.0 {
                return bad(format!(
                    "target {i}: depth must be negative, got {}",
                    t.depth
                ));
            }
            let area = t.footprint().len();
            if area < 4 {
                return bad(format!("target {i}: footprint of {area} pixels is below 4"));
            }
            for k in 0..self.frames {
                let (x, y) = t.trajectory.position(k);
                if x < 0
                    || y < 0
                    || x as usize + t.shape.width > self.width
                    || y as usize + t.shape.height > self.height
                {
                    return bad(format!(
                        "target {i} leaves the {}x{} frame at frame {k} (corner {x},{y})",
                        self.width, self.height
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn with_noise(mut self, noise: Option<NoiseModel>) -> Self {
        self.noise = noise;
        self
    }
}

/// Observed stack, its three layers, and the ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub observed: FrameStack,
    pub shadow: FrameStack,
    pub background: FrameStack,
    pub noise: FrameStack,
    pub ground_truth: GroundTruth,
}

pub fn generate_scene(spec: &SceneSpec, seed: u64) -> Result<Scene> {
    spec.validate()?;
    let (h, w, f) = (spec.height, spec.width, spec.frames);
    let n = h * w;

    let mut frame_bg = vec![0f32; n];
    for y in 0..h {
        for x in 0..w {
            let v = spec.background.offset
                + spec
                    .background
                    .profiles
                    .iter()
                    .map(|p| p.amplitude * p.rows.eval(y, h) * p.cols.eval(x, w))
                    .sum::<f64>();
            frame_bg[y * w + x] = v as f32;
        }
    }

    let footprints: Vec<Vec<(usize, usize)>> = spec.targets.iter().map(|t| t.footprint()).collect();
    let mut shadow = vec![0f32; n * f];
    let mut gt_frames = Vec::with_capacity(f);
    for k in 0..f {
        let mut objects = Vec::with_capacity(spec.targets.len());
        for (id, (t, cells)) in spec.targets.iter().zip(&footprints).enumerate() {
            let (x0, y0) = t.trajectory.position(k);
            let (x0, y0) = (x0 as usize, y0 as usize);
            let (mut min_x, mut min_y, mut max_x, mut max_y) = (usize::MAX, usize::MAX, 0, 0);
            for &(dy, dx) in cells {
                let (y, x) = (y0 + dy, x0 + dx);
                shadow[k * n + y * w + x] += t.depth as f32;
                min_x = min_x.min(x);
                min_y = min_y.min(y);
                max_x = max_x.max(x);
                max_y = max_y.max(y);
            }
            objects.push(GroundTruthObject {
                id: id as u32 + 1,
                bbox: BoundingBox::new(
                    min_x as f64,
                    min_y as f64,
                    (max_x - min_x + 1) as f64,
                    (max_y - min_y + 1) as f64,
                ),
            });
        }
        gt_frames.push(FrameObjects { frame: k, objects });
    }

    let mut noise = vec![0f32; n * f];
    if let Some(model) = &spec.noise {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        for v in noise.iter_mut() {
            *v = model.sample(&mut rng) as f32;
        }
    }

    let mut observed = Vec::with_capacity(n * f);
    for i in 0..n * f {
        let d = (shadow[i] + frame_bg[i % n]) + noise[i];
        observed.push(if spec.clamp { d.clamp(0.0, 1.0) } else { d });
    }
    let background: Vec<f32> = (0..f).flat_map(|_| frame_bg.iter().copied()).collect();

    Ok(Scene {
        observed: FrameStack::new(h, w, f, observed)?,
        shadow: FrameStack::new(h, w, f, shadow)?,
        background: FrameStack::new(h, w, f, background)?,
        noise: FrameStack::new(h, w, f, noise)?,
        ground_truth: GroundTruth { frames: gt_frames },
    })
}

/// 64x64x100 fixture: static smooth background spanning roughly
/// `[0.3, 0.7]`, a 5x7 and a 6x6 shadow of depth -0.3 on crossing linear
/// paths, Gaussian noise with sigma 0.02.
pub fn canonical_scene() -> SceneSpec {
    let rect = |width, height| Shape {
        kind: ShapeKind::Rectangle,
        width,
        height,
    };
    SceneSpec {
        height: 64,
        width: 64,
        frames: 100,
        background: BackgroundSpec {
            offset: 0.3,
            profiles: vec![SeparableProfile {
                amplitude: 0.4,
                rows: Wave {
                    cycles: 0.75,
                    phase: -0.6,
                },
                cols: Wave {
                    cycles: 1.0,
                    phase: 0.4,
                },
            }],
        },
        targets: vec![
            // down-right diagonal; reaches the crossing point near frame 64
            TargetSpec {
                shape: rect(5, 7),
                depth: -0.3,
                trajectory: Trajectory {
                    start: (4.0, 6.0),
                    velocity: (0.5, 0.44),
                    acceleration: (0.0, 0.0),
                },
            },
            // up-right diagonal; reaches the crossing point near frame 26
            TargetSpec {
                shape: rect(6, 6),
                depth: -0.3,
                trajectory: Trajectory {
                    start: (28.0, 46.0),
                    velocity: (0.3, -0.45),
                    acceleration: (0.0, 0.0),
                },
            },
        ],
        noise: Some(NoiseModel::gaussian(0.02)),
        clamp: false,
    }
}
