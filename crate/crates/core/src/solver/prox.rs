//! Proximal operators of the l1 and nuclear norms.

use nalgebra::{DMatrix, SVD};

use crate::error::{Error, Result};

fn check_threshold(eps: f64) -> Result<()> {
    if eps.is_nan() || eps < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "shrinkage threshold must be nonnegative, got {eps}"
        )));
    }
    Ok(())
}

#[inline]
pub(crate) fn shrink(q: f64, eps: f64) -> f64 {
    q.signum() * (q.abs() - eps).max(0.0)
}

/// Elementwise `sign(q) * max(|q| - eps, 0)`.
pub fn soft_threshold(m: &DMatrix<f64>, eps: f64) -> Result<DMatrix<f64>> {
    check_threshold(eps)?;
    Ok(m.map(|q| shrink(q, eps)))
}

/// Thin SVD that reports failure instead of panicking.
pub(crate) fn thin_svd(m: &DMatrix<f64>) -> Result<SVD<f64, nalgebra::Dyn, nalgebra::Dyn>> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(
            "SVD input contains non-finite values".into(),
        ));
    }
    SVD::try_new(m.clone(), true, true, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))
}

/// Singular value thresholding, also returning the nuclear norm of the
/// result (the sum of the shrunk singular values).
pub(crate) fn svt_with_norm(m: &DMatrix<f64>, eps: f64) -> Result<(DMatrix<f64>, f64)> {
    check_threshold(eps)?;
    let svd = thin_svd(m)?;
    let u = svd.u.as_ref().expect("U requested");
    let v_t = svd.v_t.as_ref().expect("V^T requested");
    let keep: Vec<(usize, f64)> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > eps)
        .map(|(i, &s)| (i, s - eps))
        .collect();
    let mut out = DMatrix::zeros(m.nrows(), m.ncols());
    let mut nuclear = 0.0;
    if !keep.is_empty() {
        let mut left = DMatrix::zeros(m.nrows(), keep.len());
        let mut right = DMatrix::zeros(keep.len(), m.ncols());
        for (c, &(i, s)) in keep.iter().enumerate() {
            left.set_column(c, &(u.column(i) * s));
            right.set_row(c, &v_t.row(i));
            nuclear += s;
        }
        left.mul_to(&right, &mut out);
    }
    Ok((out, nuclear))
}

/// `U diag(max(sigma_i - eps, 0)) V^T`: the proximal map of `eps * ||.||_*`.
pub fn singular_value_threshold(m: &DMatrix<f64>, eps: f64) -> Result<DMatrix<f64>> {
    svt_with_norm(m, eps).map(|(out, _)| out)
}

pub fn singular_values(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(
            "SVD input contains non-finite values".into(),
        ));
    }
    let svd = SVD::try_new(m.clone(), false, false, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}
