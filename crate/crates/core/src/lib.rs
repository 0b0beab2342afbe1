//! Three-term decomposition of registered video stacks into a sparse shadow
//! component, a low-rank background and a Gaussian noise residual, solved by
//! ADMM, together with image-quality and detection/tracking evaluation.
//!
//! The crate is organised by pipeline stage:
//!
//! - [`video`]: frame stacks, the SBNT and PGM file formats, matricization,
//!   sub-video windows, translation registration and the classical
//!   enhancement baselines.
//! - [`solver`]: proximal operators, the alternating updates, the full
//!   decomposition loop and the singular-value CDF.
//! - [`metrics`]: contrast, edge preservation index and 2D entropy.
//! - [`eval`]: a threshold detector, a greedy IoU tracker, AP and MOTA.
//! - [`synth`]: synthetic scenes with exactly known components.

pub mod error;
pub mod eval;
pub mod metrics;
pub mod solver;
pub mod synth;
pub mod video;

pub use error::{Error, Result};
pub use eval::{BoundingBox, Detection, GroundTruth, Track};
pub use metrics::GrayImage;
pub use solver::{decompose, DecompositionResult, SolverConfig};
pub use synth::{canonical_scene, generate_scene, SceneSpec};
pub use video::{FrameStack, MatricizedVideo};
