use proptest::prelude::*;

use shadowdecomp::eval::{
    associate_tracks, average_precision, detect_shadows, evaluate_tracks, mota, BoundingBox,
    Detection, GroundTruth, Polarity, DEFAULT_IOU_THRESHOLD,
};
use shadowdecomp::{canonical_scene, generate_scene};

#[test]
fn detector_recovers_noiseless_shadows() {
    let scene = generate_scene(&canonical_scene().with_noise(None), 0).unwrap();
    let magnitude = scene.shadow.abs();
    let dets = detect_shadows(&magnitude, 0.15, 4, Polarity::Bright);
    for frame in &scene.ground_truth.frames {
        for obj in &frame.objects {
            let best = dets
                .iter()
                .filter(|d| d.frame == frame.frame)
                .map(|d| d.bbox.iou(&obj.bbox))
                .fold(0.0, f64::max);
            assert!(best >= 0.9, "frame {} id {}: {best}", frame.frame, obj.id);
        }
    }
    assert_eq!(dets.len(), scene.ground_truth.total_objects());

    // the same boxes come back from the dark raw residual against the true background
    let residual = scene
        .observed
        .data()
        .iter()
        .zip(scene.background.data())
        .map(|(d, b)| d - b + 0.5)
        .collect();
    let residual = shadowdecomp::FrameStack::new(64, 64, 100, residual).unwrap();
    let dark = detect_shadows(&residual, 0.35, 4, Polarity::Dark);
    assert_eq!(
        dark.iter().map(|d| d.bbox).collect::<Vec<_>>(),
        dets.iter().map(|d| d.bbox).collect::<Vec<_>>()
    );
}

#[test]
fn hand_built_precision_recall_curve() {
    let gt = GroundTruth::from_boxes(&[
        (0, vec![(1, BoundingBox::new(2.0, 2.0, 5.0, 7.0))]),
        (1, vec![(1, BoundingBox::new(3.0, 2.0, 5.0, 7.0))]),
    ]);
    let dets = [
        Detection {
            frame: 0,
            bbox: BoundingBox::new(2.0, 2.0, 5.0, 7.0),
            score: 0.9,
        },
        Detection {
            frame: 1,
            bbox: BoundingBox::new(40.0, 40.0, 5.0, 7.0),
            score: 0.8,
        },
        Detection {
            frame: 1,
            bbox: BoundingBox::new(3.0, 2.0, 5.0, 7.0),
            score: 0.7,
        },
    ];
    let ap = average_precision(&dets, &gt, DEFAULT_IOU_THRESHOLD).unwrap();
    assert!((ap - 0.8333).abs() < 1e-4);
    assert!((ap - 5.0 / 6.0).abs() < 1e-12);
}

#[test]
fn tracked_synthetic_scene_is_perfect() {
    let scene = generate_scene(&canonical_scene().with_noise(None), 0).unwrap();
    let dets = detect_shadows(&scene.shadow.abs(), 0.15, 4, Polarity::Bright);
    let tracks = associate_tracks(&dets);
    assert_eq!(tracks.len(), 2);
    let r = evaluate_tracks(&tracks, &scene.ground_truth, DEFAULT_IOU_THRESHOLD).unwrap();
    assert_eq!(r.mota, 1.0);
    assert_eq!(
        average_precision(&dets, &scene.ground_truth, DEFAULT_IOU_THRESHOLD).unwrap(),
        1.0
    );
}

fn gt_fixture() -> GroundTruth {
    let frames: Vec<_> = (0..6)
        .map(|k| {
            let k = k as usize;
            (
                k,
                vec![
                    (1, BoundingBox::new(2.0 + k as f64, 3.0, 5.0, 7.0)),
                    (2, BoundingBox::new(30.0, 20.0 + k as f64, 6.0, 6.0)),
                ],
            )
        })
        .collect();
    GroundTruth::from_boxes(&frames)
}

fn arb_detections() -> impl Strategy<Value = Vec<Detection>> {
    prop::collection::vec(
        (
            0usize..6,
            0.0f64..40.0,
            0.0f64..30.0,
            3.0f64..8.0,
            3.0f64..8.0,
            0.0f64..1.0,
        ),
        0..30,
    )
    .prop_map(|v| {
        v.into_iter()
            .map(|(frame, x, y, w, h, score)| Detection {
                frame,
                bbox: BoundingBox::new(x.round(), y.round(), w.round(), h.round()),
                score,
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn ap_depends_only_on_score_order(dets in arb_detections()) {
        let gt = gt_fixture();
        let base = average_precision(&dets, &gt, 0.3).unwrap();
        let warped: Vec<_> = dets
            .iter()
            .map(|d| Detection { score: (3.0 * d.score).exp() / 30.0 + 0.01, ..*d })
            .collect();
        prop_assert_eq!(base, average_precision(&warped, &gt, 0.3).unwrap());
        prop_assert!((0.0..=1.0).contains(&base));
    }

    #[test]
    fn mota_is_at_most_one(dets in arb_detections()) {
        let gt = gt_fixture();
        let tracks = associate_tracks(&dets);
        let r = evaluate_tracks(&tracks, &gt, 0.3).unwrap();
        prop_assert!(r.mota <= 1.0);
        let perfect = r.fp == 0 && r.false_negatives == 0 && r.idsw == 0;
        prop_assert_eq!(r.mota == 1.0, perfect);
        prop_assert_eq!(r.mota, mota(&tracks, &gt, 0.3).unwrap());
    }

    #[test]
    fn tracks_have_increasing_frames(dets in arb_detections()) {
        let tracks = associate_tracks(&dets);
        let total: usize = tracks.iter().map(|t| t.observations.len()).sum();
        prop_assert_eq!(total, dets.len());
        for (i, t) in tracks.iter().enumerate() {
            prop_assert_eq!(t.id as usize, i + 1);
            prop_assert!(t.observations.windows(2).all(|w| w[0].frame < w[1].frame));
        }
    }
}
