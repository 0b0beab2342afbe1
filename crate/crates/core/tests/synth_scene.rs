use shadowdecomp::synth::{NoiseKind, NoiseModel};
use shadowdecomp::{canonical_scene, generate_scene, SceneSpec};

fn layer_stats(values: &[f32]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().map(|&v| f64::from(v)).sum::<f64>() / n;
    let var = values
        .iter()
        .map(|&v| (f64::from(v) - mean).powi(2))
        .sum::<f64>()
        / n;
    (mean, var.sqrt())
}

#[test]
fn observed_is_exact_sum_of_layers() {
    let scene = generate_scene(&canonical_scene(), 1).unwrap();
    for i in 0..scene.observed.data().len() {
        let sum = (scene.shadow.data()[i] + scene.background.data()[i]) + scene.noise.data()[i];
        assert_eq!(scene.observed.data()[i], sum);
    }
}

#[test]
fn same_seed_same_scene() {
    let spec = canonical_scene();
    assert_eq!(
        generate_scene(&spec, 42).unwrap(),
        generate_scene(&spec, 42).unwrap()
    );
    assert_ne!(
        generate_scene(&spec, 42).unwrap().noise,
        generate_scene(&spec, 43).unwrap().noise
    );
}

#[test]
fn noise_moments_match_model() {
    for kind in [
        NoiseKind::Gaussian,
        NoiseKind::Rayleigh,
        NoiseKind::Exponential,
    ] {
        let model = NoiseModel {
            kind,
            scale: 0.05,
            mean_center: true,
        };
        let spec = canonical_scene().with_noise(Some(model));
        let scene = generate_scene(&spec, 5).unwrap();
        let (mean, std) = layer_stats(scene.noise.data());
        let expected_std = match kind {
            NoiseKind::Gaussian => 0.05,
            NoiseKind::Rayleigh => 0.05 * (2.0 - std::f64::consts::PI / 2.0).sqrt(),
            NoiseKind::Exponential => 0.05,
        };
        let n = scene.noise.data().len() as f64;
        let se = expected_std / n.sqrt();
        assert!(mean.abs() <= 3.0 * se + 1e-7, "{kind:?} mean {mean}");
        // standard error of the sample std, loosened for the skewed kinds
        let se_std = expected_std
            * (2.0 / n).sqrt()
            * if kind == NoiseKind::Gaussian {
                1.0
            } else {
                2.0
            };
        assert!(
            (std - expected_std).abs() <= 3.0 * se_std,
            "{kind:?} std {std}"
        );
    }
}

#[test]
fn uncentered_noise_keeps_its_mean() {
    let model = NoiseModel {
        kind: NoiseKind::Exponential,
        scale: 0.05,
        mean_center: false,
    };
    let scene = generate_scene(&canonical_scene().with_noise(Some(model)), 5).unwrap();
    let (mean, _) = layer_stats(scene.noise.data());
    assert!((mean - 0.05).abs() < 1e-3);
    assert!(scene.noise.data().iter().all(|&v| v >= 0.0));
}

#[test]
fn ground_truth_bounds_shadow_support() {
    let scene = generate_scene(&canonical_scene(), 2).unwrap();
    let (h, w) = (scene.shadow.height(), scene.shadow.width());
    for frame in &scene.ground_truth.frames {
        let k = frame.frame;
        let mut covered = 0;
        for obj in &frame.objects {
            let b = obj.bbox;
            let (x0, y0) = (b.x as usize, b.y as usize);
            let (x1, y1) = (x0 + b.w as usize, y0 + b.h as usize);
            // every box edge row and column touches the support
            assert!((x0..x1).any(|x| scene.shadow.get(k, y0, x) != 0.0));
            assert!((x0..x1).any(|x| scene.shadow.get(k, y1 - 1, x) != 0.0));
            assert!((y0..y1).any(|y| scene.shadow.get(k, y, x0) != 0.0));
            assert!((y0..y1).any(|y| scene.shadow.get(k, y, x1 - 1) != 0.0));
            covered += (y0..y1)
                .flat_map(|y| (x0..x1).map(move |x| (y, x)))
                .filter(|&(y, x)| scene.shadow.get(k, y, x) != 0.0)
                .count();
        }
        let support = (0..h)
            .flat_map(|y| (0..w).map(move |x| (y, x)))
            .filter(|&(y, x)| scene.shadow.get(k, y, x) != 0.0)
            .count();
        assert_eq!(covered, support, "frame {k}");
    }
}

#[test]
fn two_targets_over_fifty_frames() {
    let mut spec: SceneSpec = canonical_scene().with_noise(None);
    spec.frames = 50;
    let scene = generate_scene(&spec, 0).unwrap();
    assert_eq!(scene.ground_truth.frames.len(), 50);
    assert_eq!(scene.ground_truth.total_objects(), 100);
    for f in &scene.ground_truth.frames {
        let ids: Vec<u32> = f.objects.iter().map(|o| o.id).collect();
        assert_eq!(ids, vec![1, 2]);
    }
    assert!(scene.noise.data().iter().all(|&v| v == 0.0));
}

#[test]
fn background_is_rank_one_and_sparse_shadows() {
    let scene = generate_scene(&canonical_scene(), 3).unwrap();
    let b = scene.background.matricize();
    let first = b.matrix().column(0).into_owned();
    for j in 1..b.frames() {
        assert_eq!(b.matrix().column(j), first);
    }
    let per_frame = scene.shadow.pixels_per_frame();
    for k in 0..scene.shadow.frames() {
        let nz = scene.shadow.frame(k).iter().filter(|&&v| v != 0.0).count();
        assert_eq!(nz, 71);
        assert!((nz as f64) / (per_frame as f64) < 0.02);
    }
}

#[test]
fn spec_json_round_trip() {
    let spec = canonical_scene();
    let text = serde_json::to_string(&spec).unwrap();
    let back: SceneSpec = serde_json::from_str(&text).unwrap();
    assert_eq!(back, spec);
}
