use std::fs;
use std::path::Path;

use log::{info, warn};
use rayon::prelude::*;
use serde_json::{json, Value};

use shadowdecomp::eval::{
    associate_tracks_with, detect_shadows, evaluate_detections, evaluate_tracks, load_ground_truth,
    read_detections_csv, save_ground_truth, tracks_from_rows, write_detections_csv,
    write_tracks_csv, Polarity, TrackerConfig,
};
use shadowdecomp::metrics::{entropy_2d, glcm_contrast, stack_report, DEFAULT_OFFSETS};
use shadowdecomp::solver::singular_value_cdf_curve;
use shadowdecomp::synth::NoiseModel;
use shadowdecomp::video::{import_frames, load_stack, register_to, save_stack, Reference};
use shadowdecomp::{
    canonical_scene, decompose, generate_scene, DecompositionResult, Error, FrameStack, SceneSpec,
    SolverConfig,
};

use crate::args::{
    CdfArgs, Command, DecomposeArgs, DetectArgs, EvaluateArgs, MetricArg, MetricsArgs, Mu0,
    PolarityArg, Preprocess, RegisterArgs, SynthArgs, TrackArgs,
};
use crate::{CliError, EXIT_NOT_CONVERGED, EXIT_OK};

type CliResult<T> = Result<T, CliError>;

/// Summary line and exit status of a completed subcommand.
pub(crate) struct Outcome {
    pub summary: Value,
    pub code: i32,
}

impl From<Value> for Outcome {
    fn from(summary: Value) -> Self {
        Self {
            summary,
            code: EXIT_OK,
        }
    }
}

pub(crate) fn dispatch(command: Command) -> CliResult<Outcome> {
    match command {
        Command::Synth(a) => synth(a).map(Outcome::from),
        Command::Register(a) => register(a).map(Outcome::from),
        Command::Decompose(a) => decompose_cmd(a),
        Command::Metrics(a) => metrics(a).map(Outcome::from),
        Command::Cdf(a) => cdf(a).map(Outcome::from),
        Command::Detect(a) => detect(a).map(Outcome::from),
        Command::Track(a) => track(a).map(Outcome::from),
        Command::Evaluate(a) => evaluate(a).map(Outcome::from),
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Reads a stack from an SBNT file or a directory of PGM frames.
fn read_stack(path: &Path) -> CliResult<FrameStack> {
    let stack = if path.is_dir() {
        import_frames(path)?
    } else {
        load_stack(path)?
    };
    info!(
        "read {} ({}x{}x{})",
        path.display(),
        stack.height(),
        stack.width(),
        stack.frames()
    );
    Ok(stack)
}

fn write_json(path: &Path, value: &Value) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    fs::write(path, text + "\n").map_err(|e| {
        CliError::Input(Error::Io {
            path: path.into(),
            source: e,
        })
    })
}

fn preprocess(stack: FrameStack, pre: &Preprocess) -> FrameStack {
    let stack = if pre.abs { stack.abs() } else { stack };
    if pre.normalize {
        stack.normalized()
    } else {
        stack
    }
}

fn synth(a: SynthArgs) -> CliResult<Value> {
    let mut spec: SceneSpec = if a.spec == "canonical" {
        canonical_scene()
    } else {
        let path = Path::new(&a.spec);
        let text = fs::read_to_string(path).map_err(|e| {
            CliError::Input(Error::Io {
                path: path.into(),
                source: e,
            })
        })?;
        serde_json::from_str(&text).map_err(|e| {
            CliError::Input(Error::Parse {
                path: path.into(),
                message: e.to_string(),
            })
        })?
    };
    if let Some(sigma) = a.sigma {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(usage(format!("--sigma must be nonnegative, got {sigma}")));
        }
        spec = spec.with_noise((sigma > 0.0).then(|| NoiseModel::gaussian(sigma)));
    }
    let scene = generate_scene(&spec, a.seed)?;
    save_stack(&scene.observed, &a.out)?;
    if let Some(gt) = &a.gt {
        save_ground_truth(gt, &scene.ground_truth)?;
    }
    if let Some(paths) = &a.components {
        for (stack, path) in [&scene.shadow, &scene.background, &scene.noise]
            .into_iter()
            .zip(paths)
        {
            save_stack(stack, path)?;
        }
    }
    info!("generated {} frames with seed {}", spec.frames, a.seed);
    Ok(json!({
        "command": "synth",
        "seed": a.seed,
        "height": spec.height,
        "width": spec.width,
        "frames": spec.frames,
        "targets": spec.targets.len(),
        "objects": scene.ground_truth.total_objects(),
    }))
}

fn register(a: RegisterArgs) -> CliResult<Value> {
    let stack = read_stack(&a.input)?;
    if let Reference::Frame(i) = a.reference {
        if i >= stack.frames() {
            return Err(usage(format!(
                "--reference {i} out of range for {} frames",
                stack.frames()
            )));
        }
    }
    let (registered, report) = register_to(&stack, a.reference)?;
    save_stack(&registered, &a.out)?;
    let report_json = serde_json::to_value(&report).expect("report serializes");
    if let Some(path) = &a.report {
        write_json(path, &report_json)?;
    }
    let moved = report.shifts.iter().filter(|&&s| s != (0, 0)).count();
    info!("{moved} of {} frames shifted", stack.frames());
    Ok(json!({
        "command": "register",
        "reference": report.reference,
        "shifts": report_json["shifts"],
        "min_score": report.scores.iter().copied().fold(f64::INFINITY, f64::min),
    }))
}

/// One decomposed sub-video.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowOutcome {
    pub start: usize,
    pub shadow: FrameStack,
    pub background: FrameStack,
    pub noise: FrameStack,
    pub result: DecompositionResult,
}

/// Decomposes consecutive windows of `window` frames independently, using
/// at most `jobs` threads. Output order follows the input.
pub fn decompose_windows(
    stack: &FrameStack,
    window: usize,
    cfg: &SolverConfig,
    confidence: Option<&FrameStack>,
    jobs: usize,
) -> shadowdecomp::Result<Vec<WindowOutcome>> {
    let pieces = stack.windows(window)?;
    let weights = match confidence {
        Some(c) => c.windows(window)?.into_iter().map(Some).collect(),
        None => vec![None; pieces.len()],
    };
    let (h, w) = (stack.height(), stack.width());
    let mut starts = Vec::with_capacity(pieces.len());
    let mut next = 0;
    for p in &pieces {
        starts.push(next);
        next += p.frames();
    }
    let job = |(i, (piece, weight)): (usize, (&FrameStack, &Option<FrameStack>))| {
        let cfg = SolverConfig {
            confidence_map: weight.as_ref().map(|c| c.matricize().into_matrix()),
            ..cfg.clone()
        };
        let result = decompose(&piece.matricize(), &cfg)?;
        info!(
            "window {i}: frames {}..{}, {} iterations, rel_error {:.3e}{}",
            starts[i],
            starts[i] + piece.frames(),
            result.iterations(),
            result.final_error(),
            if result.converged {
                ""
            } else {
                " (not converged)"
            }
        );
        Ok(WindowOutcome {
            start: starts[i],
            shadow: shadowdecomp::video::tensorize(&result.shadow, h, w)?,
            background: shadowdecomp::video::tensorize(&result.background, h, w)?,
            noise: shadowdecomp::video::tensorize(&result.noise, h, w)?,
            result,
        })
    };
    let items: Vec<_> = pieces.iter().zip(weights.iter()).enumerate().collect();
    if jobs <= 1 {
        items.into_iter().map(job).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
        pool.install(|| items.into_par_iter().map(job).collect())
    }
}

fn mean_over_frames(
    stack: &FrameStack,
    f: impl Fn(&shadowdecomp::GrayImage) -> shadowdecomp::Result<f64>,
) -> shadowdecomp::Result<f64> {
    let mut sum = 0.0;
    for img in stack.frame_images() {
        sum += f(&img)?;
    }
    Ok(sum / stack.frames() as f64)
}

fn window_summary(i: usize, raw: &FrameStack, w: &WindowOutcome) -> shadowdecomp::Result<Value> {
    let enhanced = w.shadow.abs().normalized();
    let raw = raw.normalized();
    let contrast = |img: &shadowdecomp::GrayImage| glcm_contrast(img, &DEFAULT_OFFSETS);
    Ok(json!({
        "window": i,
        "start": w.start,
        "frames": w.shadow.frames(),
        "iterations": w.result.iterations(),
        "converged": w.result.converged,
        "rel_error": w.result.final_error(),
        "contrast_raw": mean_over_frames(&raw, contrast)?,
        "contrast_shadow": mean_over_frames(&enhanced, contrast)?,
        "entropy_raw": mean_over_frames(&raw, entropy_2d)?,
        "entropy_shadow": mean_over_frames(&enhanced, entropy_2d)?,
    }))
}

fn decompose_cmd(a: DecomposeArgs) -> CliResult<Outcome> {
    if a.window == 0 {
        return Err(usage("--window must be at least 1"));
    }
    if a.jobs == 0 {
        return Err(usage("--jobs must be at least 1"));
    }
    let cfg = SolverConfig {
        xi: a.xi,
        gamma: a.gamma,
        rho: a.rho,
        mu0: match a.mu0 {
            Mu0::Auto => None,
            Mu0::Value(v) => Some(v),
        },
        tol: a.tol,
        max_iter: a.max_iter,
        confidence_map: None,
    };
    cfg.validate((1, 1)).map_err(|e| usage(e.to_string()))?;

    let stack = read_stack(&a.input)?;
    let confidence = a.confidence.as_deref().map(read_stack).transpose()?;
    if let Some(c) = &confidence {
        let same =
            (c.height(), c.width(), c.frames()) == (stack.height(), stack.width(), stack.frames());
        if !same {
            return Err(CliError::Input(Error::Dimension(
                "confidence stack shape differs from the input".into(),
            )));
        }
    }
    let windows = decompose_windows(&stack, a.window, &cfg, confidence.as_ref(), a.jobs)?;

    fs::create_dir_all(&a.out_dir).map_err(|e| {
        CliError::Input(Error::Io {
            path: a.out_dir.clone(),
            source: e,
        })
    })?;
    let concat = |pick: fn(&WindowOutcome) -> &FrameStack| {
        FrameStack::concat(&windows.iter().map(|w| pick(w).clone()).collect::<Vec<_>>())
    };
    save_stack(&concat(|w| &w.shadow)?, a.out_dir.join("S.sbnt"))?;
    save_stack(&concat(|w| &w.background)?, a.out_dir.join("B.sbnt"))?;
    save_stack(&concat(|w| &w.noise)?, a.out_dir.join("N.sbnt"))?;
    let mut trace = String::from("iter,mu,rel_error,objective\n");
    for w in &windows {
        trace.extend(
            w.result
                .trace_csv()
                .lines()
                .skip(1)
                .map(|l| format!("{l}\n")),
        );
    }
    let trace_path = a.out_dir.join("trace.csv");
    fs::write(&trace_path, trace).map_err(|e| {
        CliError::Input(Error::Io {
            path: trace_path,
            source: e,
        })
    })?;

    let mut per_window = Vec::with_capacity(windows.len());
    for (i, w) in windows.iter().enumerate() {
        per_window.push(window_summary(
            i,
            &stack.window(w.start, w.shadow.frames())?,
            w,
        )?);
    }
    let unconverged: Vec<usize> = windows
        .iter()
        .enumerate()
        .filter(|(_, w)| !w.result.converged)
        .map(|(i, _)| i)
        .collect();
    let summary = json!({
        "command": "decompose",
        "window": a.window,
        "frames": stack.frames(),
        "converged": unconverged.is_empty(),
        "windows": per_window,
    });
    if unconverged.is_empty() {
        return Ok(summary.into());
    }
    warn!("windows {unconverged:?} did not reach tolerance {}", a.tol);
    Ok(Outcome {
        summary,
        code: if a.strict {
            EXIT_NOT_CONVERGED
        } else {
            EXIT_OK
        },
    })
}

fn metrics(a: MetricsArgs) -> CliResult<Value> {
    let stack = preprocess(read_stack(&a.input)?, &a.pre);
    let reference = a
        .reference
        .as_deref()
        .map(|p| read_stack(p).map(|s| preprocess(s, &a.pre)))
        .transpose()?;
    let report = stack_report(&stack, reference.as_ref(), &a.offsets.0, a.crop)?;
    let report_json = serde_json::to_value(&report).expect("report serializes");
    if let Some(path) = &a.out {
        write_json(path, &report_json)?;
    }
    let mut summary = json!({
        "command": "metrics",
        "frames": stack.frames(),
        "contrast": report.contrast.mean,
        "entropy": report.entropy.mean,
    });
    if let Some(epi) = &report.epi {
        summary["epi"] = json!(epi.mean);
    }
    Ok(summary)
}

fn cdf(a: CdfArgs) -> CliResult<Value> {
    let stack = read_stack(&a.input)?;
    let values = singular_value_cdf_curve(&stack.matricize(), &a.k.0)?;
    if let Some(path) = &a.out {
        let mut text = String::from("k_percent,cdf\n");
        for (k, v) in a.k.0.iter().zip(&values) {
            text.push_str(&format!("{k},{v}\n"));
        }
        fs::write(path, text).map_err(|e| {
            CliError::Input(Error::Io {
                path: path.clone(),
                source: e,
            })
        })?;
    }
    let points: Vec<Value> =
        a.k.0
            .iter()
            .zip(&values)
            .map(|(k, v)| json!({"k_percent": k, "cdf": v}))
            .collect();
    Ok(json!({"command": "cdf", "points": points}))
}

fn detect(a: DetectArgs) -> CliResult<Value> {
    if !a.threshold.is_finite() {
        return Err(usage("--threshold must be finite"));
    }
    let stack = preprocess(read_stack(&a.input)?, &a.pre);
    let polarity = match a.polarity {
        PolarityArg::Dark => Polarity::Dark,
        PolarityArg::Bright => Polarity::Bright,
    };
    let dets = detect_shadows(&stack, a.threshold, a.min_area, polarity);
    write_detections_csv(&a.out, &dets)?;
    info!("{} detections over {} frames", dets.len(), stack.frames());
    Ok(json!({"command": "detect", "frames": stack.frames(), "detections": dets.len()}))
}

fn check_iou(iou: f64) -> CliResult<()> {
    if (0.0..=1.0).contains(&iou) {
        Ok(())
    } else {
        Err(usage(format!(
            "IoU threshold must lie in [0, 1], got {iou}"
        )))
    }
}

fn track(a: TrackArgs) -> CliResult<Value> {
    check_iou(a.iou)?;
    let rows = read_detections_csv(&a.det)?;
    let dets: Vec<_> = rows.iter().map(|r| r.detection()).collect();
    let cfg = TrackerConfig {
        iou_threshold: a.iou,
        max_missed: a.max_missed,
    };
    let tracks = associate_tracks_with(&dets, &cfg);
    write_tracks_csv(&a.out, &tracks)?;
    Ok(json!({"command": "track", "detections": dets.len(), "tracks": tracks.len()}))
}

fn evaluate(a: EvaluateArgs) -> CliResult<Value> {
    check_iou(a.iou)?;
    let rows = read_detections_csv(&a.det)?;
    let gt = load_ground_truth(&a.gt)?;
    let report = match a.metric {
        MetricArg::Ap => {
            let dets: Vec<_> = rows.iter().map(|r| r.detection()).collect();
            serde_json::to_value(evaluate_detections(&dets, &gt, a.iou)?)
        }
        MetricArg::Mota => {
            let tracks = tracks_from_rows(&rows)?;
            serde_json::to_value(evaluate_tracks(&tracks, &gt, a.iou)?)
        }
    }
    .expect("report serializes");
    if let Some(path) = &a.out {
        write_json(path, &report)?;
    }
    Ok(report)
}
