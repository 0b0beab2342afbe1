//! The alternating ADMM steps. Each primal step is the closed-form
//! minimizer of the augmented Lagrangian in one block with the others held
//! fixed.

use nalgebra::DMatrix;

use super::prox::{shrink, svt_with_norm};
use crate::error::{Error, Result};

pub(crate) fn check_shapes(mats: &[&DMatrix<f64>]) -> Result<()> {
    let shape = mats[0].shape();
    if let Some(m) = mats.iter().find(|m| m.shape() != shape) {
        return Err(Error::Dimension(format!(
            "matrix shapes disagree: {:?} vs {:?}",
            shape,
            m.shape()
        )));
    }
    Ok(())
}

fn check_mu(mu: f64) -> Result<()> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "penalty factor must be positive and finite, got {mu}"
        )));
    }
    Ok(())
}

/// `a - b - c + y / mu`, the shifted residual every primal step works on.
fn shifted(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    c: &DMatrix<f64>,
    y: &DMatrix<f64>,
    mu: f64,
) -> DMatrix<f64> {
    let inv = 1.0 / mu;
    let mut out = a.clone();
    out.iter_mut()
        .zip(b.iter().zip(c.iter().zip(y.iter())))
        .for_each(|(o, (b, (c, y)))| *o = *o - b - c + y * inv);
    out
}

/// `SVT(Pi .* (D - S - N + Y/mu), xi/mu)`; `confidence = None` is the
/// identity weighting. Also returns the nuclear norm of the result.
pub(crate) fn background_step(
    d: &DMatrix<f64>,
    s: &DMatrix<f64>,
    n: &DMatrix<f64>,
    y: &DMatrix<f64>,
    mu: f64,
    xi: f64,
    confidence: Option<&DMatrix<f64>>,
) -> Result<(DMatrix<f64>, f64)> {
    check_shapes(&[d, s, n, y])?;
    check_mu(mu)?;
    if xi.is_nan() || xi < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "xi must be nonnegative, got {xi}"
        )));
    }
    let mut w = shifted(d, s, n, y, mu);
    if let Some(pi) = confidence {
        check_shapes(&[d, pi])?;
        w.component_mul_assign(pi);
    }
    svt_with_norm(&w, xi / mu)
}

/// Low-rank background step.
pub fn update_background(
    d: &DMatrix<f64>,
    s: &DMatrix<f64>,
    n: &DMatrix<f64>,
    y: &DMatrix<f64>,
    mu: f64,
    xi: f64,
) -> Result<DMatrix<f64>> {
    background_step(d, s, n, y, mu, xi, None).map(|(b, _)| b)
}

/// Sparse shadow step: `soft(D - B - N + Y/mu, 1/mu)`.
pub fn update_shadow(
    d: &DMatrix<f64>,
    b: &DMatrix<f64>,
    n: &DMatrix<f64>,
    y: &DMatrix<f64>,
    mu: f64,
) -> Result<DMatrix<f64>> {
    check_shapes(&[d, b, n, y])?;
    check_mu(mu)?;
    let eps = 1.0 / mu;
    let mut out = shifted(d, b, n, y, mu);
    out.apply(|q| *q = shrink(*q, eps));
    Ok(out)
}

/// Gaussian noise step: `(1 + 2 gamma/mu)^-1 (D - B - S + Y/mu)`.
pub fn update_noise(
    d: &DMatrix<f64>,
    b: &DMatrix<f64>,
    s: &DMatrix<f64>,
    y: &DMatrix<f64>,
    mu: f64,
    gamma: f64,
) -> Result<DMatrix<f64>> {
    check_shapes(&[d, b, s, y])?;
    check_mu(mu)?;
    if gamma.is_nan() || gamma < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "gamma must be nonnegative, got {gamma}"
        )));
    }
    let factor = 1.0 / (1.0 + 2.0 * gamma / mu);
    let mut out = shifted(d, b, s, y, mu);
    out *= factor;
    Ok(out)
}

/// Dual ascent: `Y + mu (D - S - B - N)`.
pub fn update_multiplier(
    y: &DMatrix<f64>,
    mu: f64,
    d: &DMatrix<f64>,
    s: &DMatrix<f64>,
    b: &DMatrix<f64>,
    n: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    check_shapes(&[y, d, s, b, n])?;
    let mut out = y.clone();
    out.iter_mut()
        .zip(d.iter().zip(s.iter().zip(b.iter().zip(n.iter()))))
        .for_each(|(o, (d, (s, (b, n))))| *o += mu * (d - s - b - n));
    Ok(out)
}

pub fn update_penalty(mu: f64, rho: f64) -> f64 {
    rho * mu
}

/// `||D - (B + S + N)||_F / ||D||_F`.
pub fn relative_error(
    d: &DMatrix<f64>,
    s: &DMatrix<f64>,
    b: &DMatrix<f64>,
    n: &DMatrix<f64>,
) -> Result<f64> {
    check_shapes(&[d, s, b, n])?;
    let denom = d.norm();
    if denom == 0.0 {
        return Err(Error::InvalidArgument(
            "relative error undefined for an all-zero data matrix".into(),
        ));
    }
    let num = d
        .iter()
        .zip(s.iter().zip(b.iter().zip(n.iter())))
        .map(|(d, (s, (b, n)))| {
            let r = d - (b + s + n);
            r * r
        })
        .sum::<f64>()
        .sqrt();
    Ok(num / denom)
}
