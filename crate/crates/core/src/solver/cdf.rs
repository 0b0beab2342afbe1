use super::prox::singular_values;
use crate::error::{Error, Result};
use crate::video::MatricizedVideo;

/// Fraction of singular-value mass held by the top `ceil(k/100 * min(Nc, f))`
/// singular values. Close to 1 for small `k` means the video is nearly
/// low-rank.
pub fn singular_value_cdf(mat: &MatricizedVideo, k_percent: f64) -> Result<f64> {
    Ok(singular_value_cdf_curve(mat, &[k_percent])?[0])
}

/// Evaluates the CDF at several percentages with a single SVD.
pub fn singular_value_cdf_curve(mat: &MatricizedVideo, ks: &[f64]) -> Result<Vec<f64>> {
    if let Some(k) = ks.iter().find(|&&k| !(k > 0.0 && k <= 100.0)) {
        return Err(Error::InvalidArgument(format!(
            "CDF percentage must lie in (0, 100], got {k}"
        )));
    }
    let sigma = singular_values(mat.matrix())?;
    let total: f64 = sigma.iter().sum();
    if total == 0.0 {
        return Err(Error::InvalidArgument(
            "singular-value CDF undefined for an all-zero matrix".into(),
        ));
    }
    let r = sigma.len();
    let mut prefix = Vec::with_capacity(r + 1);
    prefix.push(0.0);
    for s in &sigma {
        prefix.push(prefix.last().unwrap() + s);
    }
    Ok(ks
        .iter()
        .map(|&k| {
            // the small slack keeps exact products such as 0.07 * 100 from
            // rounding up past an integer
            let count = ((k / 100.0 * r as f64) - 1e-9).ceil().clamp(1.0, r as f64) as usize;
            if count == r {
                1.0
            } else {
                (prefix[count] / total).min(1.0)
            }
        })
        .collect())
}
