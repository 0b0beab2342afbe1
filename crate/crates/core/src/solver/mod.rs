//! Sparse + low-rank + Gaussian decomposition by ADMM.
//!
//! Given the matricized video `D`, the solver minimizes
//!
//! ```text
//! ||S||_1 + xi ||B||_* + gamma ||N||_F^2   subject to   D = S + B + N
//! ```
//!
//! by cycling, each iteration, through the background (singular value
//! thresholding), shadow (soft thresholding) and noise (scalar shrink)
//! blocks, followed by a dual ascent step on `Y` and the penalty schedule
//! `mu <- rho * mu`. Iteration stops once `||D - (B + S + N)||_F / ||D||_F`
//! drops below the tolerance.

mod cdf;
mod prox;
mod updates;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::video::MatricizedVideo;

pub use cdf::{singular_value_cdf, singular_value_cdf_curve};
pub use prox::{singular_value_threshold, singular_values, soft_threshold};
pub use updates::{
    relative_error, update_background, update_multiplier, update_noise, update_penalty,
    update_shadow,
};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Nuclear-norm weight. `None` selects `sqrt(max(Nc, f))`.
    pub xi: Option<f64>,
    /// Weight of the squared Frobenius noise term.
    pub gamma: f64,
    /// Penalty schedule factor, `mu_{k+1} = rho * mu_k`.
    pub rho: f64,
    /// Initial penalty. `None` selects `1.25 / sigma_1(D)`.
    pub mu0: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
    /// Elementwise weights in `[0, 1]` applied to the background-step input.
    pub confidence_map: Option<DMatrix<f64>>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            xi: None,
            gamma: DEFAULT_GAMMA,
            rho: DEFAULT_RHO,
            mu0: None,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            confidence_map: None,
        }
    }
}

pub const DEFAULT_GAMMA: f64 = 300.0;
pub const DEFAULT_RHO: f64 = 1.5;
pub const DEFAULT_TOL: f64 = 1e-3;
pub const DEFAULT_MAX_ITER: usize = 100;
pub const AUTO_MU_SCALE: f64 = 1.25;

impl SolverConfig {
    pub fn validate(&self, shape: (usize, usize)) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if let Some(xi) = self.xi {
            if !(xi >= 0.0 && xi.is_finite()) {
                return bad(format!("xi must be nonnegative, got {xi}"));
            }
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return bad(format!("gamma must be nonnegative, got {}", self.gamma));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return bad(format!("rho must be positive, got {}", self.rho));
        }
        if let Some(mu0) = self.mu0 {
            if !(mu0 > 0.0 && mu0.is_finite()) {
                return bad(format!("mu0 must be positive, got {mu0}"));
            }
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        if self.max_iter == 0 {
            return bad("max_iter must be at least 1".into());
        }
        if let Some(pi) = &self.confidence_map {
            if pi.shape() != shape {
                return Err(Error::Dimension(format!(
                    "confidence map is {:?}, data is {:?}",
                    pi.shape(),
                    shape
                )));
            }
            if pi.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return bad("confidence map entries must lie in [0, 1]".into());
            }
        }
        Ok(())
    }

    pub fn resolved_xi(&self, shape: (usize, usize)) -> f64 {
        self.xi
            .unwrap_or_else(|| (shape.0.max(shape.1) as f64).sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub mu: f64,
    pub rel_error: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionResult {
    pub shadow: DMatrix<f64>,
    pub background: DMatrix<f64>,
    pub noise: DMatrix<f64>,
    pub multiplier: DMatrix<f64>,
    pub trace: Vec<IterationRecord>,
    pub converged: bool,
}

impl DecompositionResult {
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }

    pub fn final_error(&self) -> f64 {
        self.trace.last().map_or(f64::INFINITY, |r| r.rel_error)
    }

    /// Trace as CSV with header `iter,mu,rel_error,objective`.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iter,mu,rel_error,objective\n");
        for r in &self.trace {
            out.push_str(&format!(
                "{},{:e},{:e},{:e}\n",
                r.iter, r.mu, r.rel_error, r.objective
            ));
        }
        out
    }
}

/// Largest singular value, from the eigenvalues of the smaller Gram matrix.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    let gram = if m.nrows() >= m.ncols() {
        m.tr_mul(m)
    } else {
        m * m.transpose()
    };
    gram.symmetric_eigenvalues().max().max(0.0).sqrt()
}

fn objective(s: &DMatrix<f64>, nuclear_b: f64, n: &DMatrix<f64>, xi: f64, gamma: f64) -> f64 {
    s.iter().map(|v| v.abs()).sum::<f64>() + xi * nuclear_b + gamma * n.norm_squared()
}

/// Runs the ADMM iteration from `S = N = Y = 0`.
pub fn decompose(mat: &MatricizedVideo, cfg: &SolverConfig) -> Result<DecompositionResult> {
    let d = mat.matrix();
    if d.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("input contains non-finite values".into()));
    }
    cfg.validate(d.shape())?;
    if d.norm() == 0.0 {
        return Err(Error::InvalidArgument(
            "input video is identically zero".into(),
        ));
    }
    let xi = cfg.resolved_xi(d.shape());
    let mut mu = match cfg.mu0 {
        Some(mu0) => mu0,
        None => AUTO_MU_SCALE / spectral_norm(d),
    };

    let (rows, cols) = d.shape();
    let mut s = DMatrix::zeros(rows, cols);
    let mut b = DMatrix::zeros(rows, cols);
    let mut n = DMatrix::zeros(rows, cols);
    let mut y = DMatrix::zeros(rows, cols);
    let mut trace = Vec::new();
    let mut converged = false;

    for iter in 1..=cfg.max_iter {
        let (b_next, nuclear) =
            updates::background_step(d, &s, &n, &y, mu, xi, cfg.confidence_map.as_ref())?;
        b = b_next;
        s = update_shadow(d, &b, &n, &y, mu)?;
        n = update_noise(d, &b, &s, &y, mu, cfg.gamma)?;
        let rel_error = relative_error(d, &s, &b, &n)?;
        trace.push(IterationRecord {
            iter,
            mu,
            rel_error,
            objective: objective(&s, nuclear, &n, xi, cfg.gamma),
        });
        y = update_multiplier(&y, mu, d, &s, &b, &n)?;
        if !rel_error.is_finite() {
            return Err(Error::Numerical(format!("iteration {iter} diverged")));
        }
        if rel_error < cfg.tol {
            converged = true;
            break;
        }
        mu = update_penalty(mu, cfg.rho);
    }

    Ok(DecompositionResult {
        shadow: s,
        background: b,
        noise: n,
        multiplier: y,
        trace,
        converged,
    })
}
