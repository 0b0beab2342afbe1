use super::GrayImage;
use crate::error::{Error, Result};

/// Horizontal and vertical neighbours, as `(dy, dx)`.
pub const DEFAULT_OFFSETS: [(isize, isize); 2] = [(0, 1), (1, 0)];

/// Visits every in-bounds pair `(p, p + offset)` of quantized levels.
fn for_each_pair(
    levels: &[u8],
    height: usize,
    width: usize,
    (dy, dx): (isize, isize),
    mut visit: impl FnMut(u8, u8),
) {
    let (h, w) = (height as isize, width as isize);
    for y in 0.max(-dy)..h.min(h - dy) {
        for x in 0.max(-dx)..w.min(w - dx) {
            let a = levels[(y * w + x) as usize];
            let b = levels[((y + dy) * w + x + dx) as usize];
            visit(a, b);
        }
    }
}

/// Gray-difference contrast: `sum_d d^2 * p(d)`, where `p` is the
/// distribution of absolute level differences pooled over all pixel pairs
/// at the given offsets.
pub fn glcm_contrast(img: &GrayImage, offsets: &[(isize, isize)]) -> Result<f64> {
    if offsets.is_empty() {
        return Err(Error::InvalidArgument(
            "contrast needs at least one offset".into(),
        ));
    }
    let levels = img.levels();
    let mut hist = [0u64; 256];
    for &offset in offsets {
        for_each_pair(&levels, img.height(), img.width(), offset, |a, b| {
            hist[a.abs_diff(b) as usize] += 1;
        });
    }
    let total: u64 = hist.iter().sum();
    if total == 0 {
        return Err(Error::Dimension(format!(
            "{}x{} image has no pixel pairs at offsets {offsets:?}",
            img.height(),
            img.width()
        )));
    }
    let weighted: f64 = hist
        .iter()
        .enumerate()
        .map(|(d, &n)| (d * d) as f64 * n as f64)
        .sum();
    Ok(weighted / total as f64)
}

fn gradient_sum(levels: &[u8], height: usize, width: usize) -> u64 {
    let mut sum = 0u64;
    for y in 0..height - 1 {
        for x in 0..width - 1 {
            let c = levels[y * width + x];
            sum += u64::from(c.abs_diff(levels[(y + 1) * width + x]));
            sum += u64::from(c.abs_diff(levels[y * width + x + 1]));
        }
    }
    sum
}

/// Edge preservation index: total absolute down/right neighbour
/// differences of `eval` divided by those of `reference`.
pub fn edge_preservation_index(eval: &GrayImage, reference: &GrayImage) -> Result<f64> {
    let (h, w) = (reference.height(), reference.width());
    if (eval.height(), eval.width()) != (h, w) {
        return Err(Error::Dimension(format!(
            "EPI needs equal sizes, got {}x{} and {h}x{w}",
            eval.height(),
            eval.width()
        )));
    }
    if h < 2 || w < 2 {
        return Err(Error::Dimension(format!(
            "EPI needs at least 2x2, got {h}x{w}"
        )));
    }
    let denom = gradient_sum(&reference.levels(), h, w);
    if denom == 0 {
        return Err(Error::InvalidArgument(
            "EPI reference image is flat (zero gradient)".into(),
        ));
    }
    Ok(gradient_sum(&eval.levels(), h, w) as f64 / denom as f64)
}

/// Shannon entropy (bits) of the joint distribution of (pixel level,
/// rounded mean level of its 8-neighbourhood) over interior pixels.
pub fn entropy_2d(img: &GrayImage) -> Result<f64> {
    let (h, w) = (img.height(), img.width());
    if h < 3 || w < 3 {
        return Err(Error::Dimension(format!(
            "2D entropy needs at least 3x3, got {h}x{w}"
        )));
    }
    let levels = img.levels();
    let mut joint = vec![0u32; 256 * 256];
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let mut sum = 0u32;
            for ny in y - 1..=y + 1 {
                for nx in x - 1..=x + 1 {
                    sum += u32::from(levels[ny * w + nx]);
                }
            }
            let centre = levels[y * w + x];
            let neighbourhood = (sum - u32::from(centre) + 4) / 8;
            joint[usize::from(centre) * 256 + neighbourhood as usize] += 1;
        }
    }
    let total = ((h - 2) * (w - 2)) as f64;
    let entropy = joint
        .iter()
        .filter(|&&n| n > 0)
        .map(|&n| {
            let p = f64::from(n) / total;
            -p * p.log2()
        })
        .sum::<f64>();
    Ok(entropy.max(0.0))
}

/// Histogram over the 256 levels and the cumulative fraction of pixels at
/// or below each level.
pub fn pixel_statistics(img: &GrayImage) -> ([u64; 256], Vec<f64>) {
    let mut hist = [0u64; 256];
    for l in img.levels() {
        hist[l as usize] += 1;
    }
    let total = img.values().len() as f64;
    let mut acc = 0u64;
    let cumulative = hist
        .iter()
        .map(|&n| {
            acc += n;
            acc as f64 / total
        })
        .collect();
    (hist, cumulative)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    use rand::{Rng, SeedableRng};
    use rand_xoshiro::Xoshiro256PlusPlus;

    fn random_image(rng: &mut impl Rng, h: usize, w: usize) -> GrayImage {
        GrayImage::new(h, w, (0..h * w).map(|_| rng.random::<f64>()).collect()).unwrap()
    }

    fn level(img: &GrayImage, y: usize, x: usize) -> i64 {
        (img.get(y, x).clamp(0.0, 1.0) * 255.0).round() as i64
    }

    // Brute-force oracles: direct double loops over pixels, sharing no code
    // with the histogram-based implementations above.

    fn contrast_oracle(img: &GrayImage) -> f64 {
        let (h, w) = (img.height(), img.width());
        let mut sum = 0.0;
        let mut count = 0.0;
        for y in 0..h {
            for x in 0..w {
                if x + 1 < w {
                    sum += ((level(img, y, x) - level(img, y, x + 1)).pow(2)) as f64;
                    count += 1.0;
                }
                if y + 1 < h {
                    sum += ((level(img, y, x) - level(img, y + 1, x)).pow(2)) as f64;
                    count += 1.0;
                }
            }
        }
        sum / count
    }

    fn epi_oracle(e: &GrayImage, r: &GrayImage) -> f64 {
        let grad = |img: &GrayImage| {
            let mut s = 0.0;
            for y in 0..img.height() - 1 {
                for x in 0..img.width() - 1 {
                    s += (level(img, y, x) - level(img, y + 1, x)).abs() as f64;
                    s += (level(img, y, x) - level(img, y, x + 1)).abs() as f64;
                }
            }
            s
        };
        grad(e) / grad(r)
    }

    fn entropy_oracle(img: &GrayImage) -> f64 {
        let mut counts: BTreeMap<(i64, i64), f64> = BTreeMap::new();
        let mut n = 0.0;
        for y in 1..img.height() - 1 {
            for x in 1..img.width() - 1 {
                let mut s = 0;
                for (dy, dx) in [
                    (-1, -1),
                    (-1, 0),
                    (-1, 1),
                    (0, -1),
                    (0, 1),
                    (1, -1),
                    (1, 0),
                    (1, 1),
                ] {
                    s += level(img, (y as i64 + dy) as usize, (x as i64 + dx) as usize);
                }
                let mean = (s as f64 / 8.0).round() as i64;
                *counts.entry((level(img, y, x), mean)).or_default() += 1.0;
                n += 1.0;
            }
        }
        counts.values().map(|c| -(c / n) * (c / n).log2()).sum()
    }

    #[test]
    fn contrast_of_constant_is_zero() {
        let img = GrayImage::new(5, 5, vec![0.37; 25]).unwrap();
        assert_eq!(glcm_contrast(&img, &DEFAULT_OFFSETS).unwrap(), 0.0);
    }

    #[test]
    fn contrast_single_extreme_pair() {
        let img = GrayImage::new(1, 2, vec![0.0, 1.0]).unwrap();
        assert_eq!(glcm_contrast(&img, &[(0, 1)]).unwrap(), 65025.0);
    }

    #[test]
    fn contrast_errors() {
        let img = GrayImage::new(1, 2, vec![0.0, 1.0]).unwrap();
        assert!(glcm_contrast(&img, &[]).is_err());
        assert!(glcm_contrast(&img, &[(1, 0)]).is_err());
    }

    #[test]
    fn contrast_negative_offsets_match_positive() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(3);
        let img = random_image(&mut rng, 9, 7);
        let a = glcm_contrast(&img, &[(0, 1)]).unwrap();
        let b = glcm_contrast(&img, &[(0, -1)]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn epi_identity_and_scaling() {
        let levels: Vec<u8> = (0..30).map(|i| ((i * 37) % 128) as u8).collect();
        let reference = GrayImage::from_levels(5, 6, &levels).unwrap();
        assert_eq!(
            edge_preservation_index(&reference, &reference).unwrap(),
            1.0
        );
        let doubled: Vec<u8> = levels.iter().map(|l| l * 2).collect();
        let eval = GrayImage::from_levels(5, 6, &doubled).unwrap();
        assert_eq!(edge_preservation_index(&eval, &reference).unwrap(), 2.0);
    }

    #[test]
    fn epi_is_shift_invariant() {
        let levels: Vec<u8> = (0..36).map(|i| ((i * 53) % 200) as u8).collect();
        let shifted: Vec<u8> = levels.iter().map(|l| l + 40).collect();
        let r = GrayImage::from_levels(6, 6, &levels).unwrap();
        let e = GrayImage::from_levels(6, 6, &levels).unwrap();
        let r2 = GrayImage::from_levels(6, 6, &shifted).unwrap();
        let e2 = GrayImage::from_levels(6, 6, &shifted).unwrap();
        assert_eq!(
            edge_preservation_index(&e, &r).unwrap(),
            edge_preservation_index(&e2, &r2).unwrap()
        );
    }

    #[test]
    fn epi_errors() {
        let flat = GrayImage::new(3, 3, vec![0.5; 9]).unwrap();
        let other = GrayImage::new(3, 4, vec![0.5; 12]).unwrap();
        assert!(edge_preservation_index(&flat, &flat).is_err());
        assert!(edge_preservation_index(&flat, &other).is_err());
    }

    #[test]
    fn entropy_constant_is_zero() {
        let img = GrayImage::new(6, 6, vec![0.8; 36]).unwrap();
        assert_eq!(entropy_2d(&img).unwrap(), 0.0);
    }

    #[test]
    fn entropy_two_equal_bins_is_one_bit() {
        // interior pixels (1,1) and (1,2) form pairs (0, 32) and (255, 0)
        let mut levels = [0u8; 12];
        levels[6] = 255;
        let img = GrayImage::from_levels(3, 4, &levels).unwrap();
        assert_eq!(entropy_2d(&img).unwrap(), 1.0);
        assert!(entropy_2d(&GrayImage::new(2, 5, vec![0.0; 10]).unwrap()).is_err());
    }

    #[test]
    fn metrics_match_double_loop_oracles() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(99);
        for _ in 0..20 {
            let a = random_image(&mut rng, 16, 16);
            let b = random_image(&mut rng, 16, 16);
            let c = glcm_contrast(&a, &DEFAULT_OFFSETS).unwrap();
            assert!((c - contrast_oracle(&a)).abs() < 1e-9);
            let e = edge_preservation_index(&a, &b).unwrap();
            assert!((e - epi_oracle(&a, &b)).abs() < 1e-9);
            let h = entropy_2d(&a).unwrap();
            assert!((h - entropy_oracle(&a)).abs() < 1e-9);
            assert!((0.0..=16.0).contains(&h));
        }
    }

    #[test]
    fn statistics_spike_and_total_mass() {
        let img = GrayImage::from_levels(4, 4, &[29; 16]).unwrap();
        let (hist, cum) = pixel_statistics(&img);
        assert_eq!(hist[29], 16);
        assert_eq!(hist.iter().sum::<u64>(), 16);
        assert_eq!(cum[28], 0.0);
        assert_eq!(cum[29], 1.0);
        assert_eq!(*cum.last().unwrap(), 1.0);
    }
}
