use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use fishrep::camera::{fit_division_model, uniform_theta_grid, CalibrationFile, CameraId, CameraRig, RadialModel};
use fishrep::detect::{nms_generalized, DetectionRecord};
use fishrep::io::{
    annotation_from_synth, division_residual_csv, emit_report, load_annotations, render_overlay, render_polylines,
    save_annotations, AnnotationFile, OverlayObject, OverlayStyle, ReportFormat, RunConfig,
};
use fishrep::metrics::{
    aggregate, average_precision, fit_representations, vertex_count_study, EvalImage, EvaluationReport, FitSettings,
    GroundTruthInstance, ObjectMask, ObjectScores, PredictedInstance, Representation, VERTEX_STUDY_COUNTS,
};
use fishrep::sampling::{sample_adaptive, sample_uniform_angular, sample_uniform_perimeter, AdaptiveSamplingConfig};
use fishrep::geometry::polygon_pair_iou;
use fishrep::shapes::{shape_points, Shape, ARC_TOLERANCE};
use fishrep::synth::{render_open_cube, CorpusSize, Renderer, SceneConfig, SYNTH_SCALE};
use fishrep::{Error, Result};

#[derive(Parser)]
#[command(name = "fishrep", version, about = "Fisheye object representations: fitting, evaluation and synthetic data")]
struct Cli {
    /// Run configuration (JSON); flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Calibration file; defaults to the shipped rig.
    #[arg(long, global = true)]
    calib: Option<PathBuf>,
    /// Drop invalid objects with a warning instead of failing.
    #[arg(long, global = true)]
    lenient: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit representations to every annotated contour.
    Fit {
        #[arg(long)]
        annotations: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated, e.g. standard,oriented,poly24-adaptive.
        #[arg(long, value_delimiter = ',')]
        representations: Option<Vec<Representation>>,
    },
    /// Sample polygon vertices from every contour.
    Sample {
        #[arg(long)]
        annotations: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(short, long, default_value_t = 24)]
        n: usize,
        #[arg(long, value_enum, default_value_t = SampleMethod::Adaptive)]
        method: SampleMethod,
    },
    /// Representation capacity: mask mIoU per camera.
    EvalMiou {
        #[arg(long)]
        annotations: PathBuf,
        /// Output directory; the report is printed when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        representations: Option<Vec<Representation>>,
        /// Run the polygon vertex-count study instead.
        #[arg(long)]
        vertex_study: bool,
        #[arg(long, default_value = "md")]
        format: ReportFormat,
    },
    /// Detection mAP of predictions against annotated contours.
    EvalMap {
        #[arg(long)]
        annotations: PathBuf,
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        iou: Option<f64>,
        #[arg(long, default_value = "md")]
        format: ReportFormat,
    },
    /// Fit the two-parameter division model to one camera's polynomial.
    FitDivision {
        #[arg(long, default_value = "front")]
        camera: CameraId,
        #[arg(long, default_value_t = fishrep::camera::DEFAULT_FIT_SAMPLES)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic annotated corpus.
    GenSynth {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of camera frames.
        #[arg(long, default_value_t = 8, conflicts_with = "objects")]
        images: usize,
        /// Generate exactly this many object instances instead.
        #[arg(long)]
        objects: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        /// Cuboids per scene.
        #[arg(long)]
        objects_per_scene: Option<usize>,
        #[arg(long)]
        no_previews: bool,
    },
    /// Non-maximum suppression over scored detections.
    Nms {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        score: Option<f64>,
        #[arg(long)]
        iou: Option<f64>,
    },
    /// Print a saved report (report.json) as a table.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "md")]
        format: ReportFormat,
    },
    /// SVG overlays of fitted shapes, or the projected open cube.
    Render {
        #[arg(long, required_unless_present = "cube")]
        annotations: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Only this image.
        #[arg(long)]
        image: Option<String>,
        /// Draw the open cube through `--camera` instead.
        #[arg(long)]
        cube: bool,
        #[arg(long, default_value = "front")]
        camera: CameraId,
        #[arg(long, default_value_t = 5)]
        grid: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SampleMethod {
    UniformAngular,
    UniformPerimeter,
    Adaptive,
}

/// Detections file for `nms` and `eval-map`.
#[derive(Serialize, Deserialize)]
struct DetectionsFile {
    detections: Vec<ImageDetection>,
}

#[derive(Clone, Serialize, Deserialize)]
struct ImageDetection {
    image_id: String,
    #[serde(flatten)]
    record: DetectionRecord,
}

#[derive(Serialize)]
struct SampledObject {
    image_id: String,
    object: usize,
    shape: Shape,
}

enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Ok(n) = std::env::var("FISHREP_WORKERS") {
        match n.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: FISHREP_WORKERS must be a positive integer, got '{n}'");
                return ExitCode::from(1);
            }
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numeric() { 3 } else { 2 })
        }
    }
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

fn rig(cli_calib: &Option<PathBuf>, cfg: &RunConfig) -> Result<CameraRig> {
    match cli_calib.as_ref().or(cfg.calib.as_ref()) {
        Some(p) => CalibrationFile::load(p)?.rig(),
        None => Ok(CameraRig::shipped()),
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let lenient = cli.lenient;
    match cli.command {
        Command::Fit { annotations, out, representations } => {
            let reps = representations.unwrap_or_else(|| cfg.representations.clone());
            cmd_fit(&annotations, &out, &reps, lenient)
        }
        Command::Sample { annotations, out, n, method } => cmd_sample(&annotations, &out, n, method, lenient),
        Command::EvalMiou { annotations, out, representations, vertex_study, format } => {
            let reps = representations.unwrap_or_else(|| cfg.representations.clone());
            cmd_eval_miou(&annotations, out.as_deref(), &reps, vertex_study, format, lenient)
        }
        Command::EvalMap { annotations, predictions, out, iou, format } => {
            let iou = iou.unwrap_or(cfg.iou_threshold);
            cmd_eval_map(&annotations, &predictions, out.as_deref(), iou, format, lenient)
        }
        Command::FitDivision { camera, samples, out } => cmd_fit_division(&rig(&cli.calib, &cfg)?, camera, samples, out.as_deref()),
        Command::GenSynth { seed, images, objects, out, objects_per_scene, no_previews } => {
            let size = objects.map_or(CorpusSize::Images(images), CorpusSize::Objects);
            cmd_gen_synth(&rig(&cli.calib, &cfg)?, seed, size, &out, objects_per_scene, !no_previews)
        }
        Command::Nms { input, out, score, iou } => {
            cmd_nms(&input, &out, score.unwrap_or(cfg.score_threshold), iou.unwrap_or(cfg.iou_threshold))
        }
        Command::Report { input, format } => {
            let report: EvaluationReport = read_json(&input)?;
            print!("{}", emit_report(&report, format));
            Ok(())
        }
        Command::Render { annotations, out, image, cube, camera, grid } => {
            if cube {
                cmd_render_cube(&rig(&cli.calib, &cfg)?, camera, grid, &out)
            } else {
                let path = annotations.ok_or_else(|| Failure::Usage("--annotations is required".into()))?;
                cmd_render(&path, &out, image.as_deref(), lenient)
            }
        }
    }
}

fn cmd_fit(path: &Path, out: &Path, reps: &[Representation], lenient: bool) -> CliResult<()> {
    let (mut file, _) = load_annotations(path, lenient)?;
    let settings = FitSettings::default();
    let results: Vec<Vec<Result<BTreeMap<Representation, Shape>>>> = file
        .images
        .par_iter()
        .map(|img| {
            img.objects
                .iter()
                .map(|o| {
                    let contour = fishrep::geometry::Contour::new(o.contour.clone())?;
                    let gt = ObjectMask::new(&contour, img.width, img.height)?;
                    let shapes = fit_representations(&contour, &gt, reps, &settings);
                    reps.iter().zip(shapes).map(|(&r, s)| Ok((r, s?))).collect()
                })
                .collect()
        })
        .collect();
    for (img, fits) in file.images.iter_mut().zip(results) {
        let mut kept = Vec::new();
        for (k, (mut obj, fit)) in img.objects.drain(..).zip(fits).enumerate() {
            match fit {
                Ok(shapes) => {
                    obj.shapes = shapes;
                    kept.push(obj);
                }
                Err(e) if lenient => warn!("{} object {k}: {e}; dropped", img.image_id),
                Err(e) => {
                    return Err(Error::InvalidContour { image_id: img.image_id.clone(), object: k, reason: e.to_string() }.into())
                }
            }
        }
        img.objects = kept;
    }
    save_annotations(out, &file)?;
    Ok(())
}

fn cmd_sample(path: &Path, out: &Path, n: usize, method: SampleMethod, lenient: bool) -> CliResult<()> {
    let (file, _) = load_annotations(path, lenient)?;
    let images = file.eval_images()?;
    let sampled: Vec<Vec<Result<SampledObject>>> = images
        .par_iter()
        .map(|img| {
            img.contours
                .iter()
                .enumerate()
                .map(|(k, c)| {
                    let shape = match method {
                        SampleMethod::UniformAngular => Shape::Polar(sample_uniform_angular(c, n)?),
                        SampleMethod::UniformPerimeter => Shape::Polygon(sample_uniform_perimeter(c, n)?),
                        SampleMethod::Adaptive => Shape::Polygon(sample_adaptive(c, &AdaptiveSamplingConfig::new(n))?),
                    };
                    Ok(SampledObject { image_id: img.image_id.clone(), object: k, shape })
                })
                .collect()
        })
        .collect();
    let mut objects = Vec::new();
    for r in sampled.into_iter().flatten() {
        match r {
            Ok(o) => objects.push(o),
            Err(e) if lenient => warn!("{e}; skipped"),
            Err(e) => return Err(e.into()),
        }
    }
    write(out, serde_json::to_string_pretty(&objects).map_err(Error::from)? + "\n")?;
    Ok(())
}

/// Per-object IoUs, using stored shapes when present and fitting the rest.
fn scores_for(file: &AnnotationFile, images: &[EvalImage], reps: &[Representation]) -> Vec<ObjectScores> {
    let settings = FitSettings::default();
    images
        .par_iter()
        .zip(&file.images)
        .flat_map_iter(|(img, ann)| {
            img.contours.iter().zip(&ann.objects).enumerate().map(move |(k, (c, obj))| {
                let ious = match ObjectMask::new(c, img.width, img.height) {
                    Ok(gt) => {
                        let missing: Vec<Representation> = reps.iter().copied().filter(|r| !obj.shapes.contains_key(r)).collect();
                        let mut fitted = fit_representations(c, &gt, &missing, &settings).into_iter();
                        reps.iter()
                            .map(|r| match obj.shapes.get(r) {
                                Some(s) => gt.iou(s),
                                None => fitted.next().expect("one fit per missing representation").and_then(|s| gt.iou(&s)),
                            })
                            .collect()
                    }
                    Err(e) => vec![Err(e); reps.len()],
                };
                ObjectScores { image_id: img.image_id.clone(), object: k, camera: img.camera, ious }
            })
        })
        .collect()
}

fn emit(report: &EvaluationReport, out: Option<&Path>, stem: &str, format: ReportFormat) -> Result<()> {
    match out {
        Some(dir) => {
            write(&dir.join(format!("{stem}.csv")), emit_report(report, ReportFormat::Csv))?;
            write(&dir.join(format!("{stem}.md")), emit_report(report, ReportFormat::Markdown))?;
            write(&dir.join(format!("{stem}.json")), serde_json::to_string_pretty(report)? + "\n")?;
        }
        None => print!("{}", emit_report(report, format)),
    }
    Ok(())
}

fn cmd_eval_miou(
    path: &Path,
    out: Option<&Path>,
    reps: &[Representation],
    vertex_study: bool,
    format: ReportFormat,
    lenient: bool,
) -> CliResult<()> {
    let (file, _) = load_annotations(path, lenient)?;
    let images = file.eval_images()?;
    if vertex_study {
        let study = vertex_count_study(&images, &VERTEX_STUDY_COUNTS, 0.005);
        info!("vertex study monotone within {}: {}", study.tolerance, study.monotone);
        emit(&study.report, out, "vertex_study", format)?;
        if !study.monotone {
            warn!("mIoU is not non-decreasing in the vertex count");
        }
        return Ok(());
    }
    let mut scores = scores_for(&file, &images, reps);
    scores.sort_by(|a, b| a.image_id.cmp(&b.image_id).then(a.object.cmp(&b.object)));
    let report = aggregate("Representation capacity (mIoU)", reps, &images, &scores);
    let failures: usize = report.rows.iter().map(|r| r.failures).sum();
    if failures > 0 && !lenient {
        return Err(Error::DegenerateInput(format!("{failures} fits failed; rerun with --lenient to exclude them")).into());
    }
    emit(&report, out, "miou", format)?;
    Ok(())
}

fn cmd_eval_map(
    gt_path: &Path,
    pred_path: &Path,
    out: Option<&Path>,
    iou: f64,
    format: ReportFormat,
    lenient: bool,
) -> CliResult<()> {
    let (file, _) = load_annotations(gt_path, lenient)?;
    let images = file.eval_images()?;
    let dets: DetectionsFile = read_json(pred_path)?;
    let camera_of: BTreeMap<&str, CameraId> = images.iter().map(|i| (i.image_id.as_str(), i.camera)).collect();
    if let Some(d) = dets.detections.iter().find(|d| !camera_of.contains_key(d.image_id.as_str())) {
        return Err(Error::Schema(format!("prediction for unknown image '{}'", d.image_id)).into());
    }
    let gts: Vec<GroundTruthInstance> = file
        .images
        .iter()
        .flat_map(|img| {
            img.objects.iter().map(move |o| GroundTruthInstance { image_id: img.image_id.clone(), class: o.class, points: o.contour.clone() })
        })
        .collect();
    // One row per representation present in the predictions.
    let mut by_rep: BTreeMap<Representation, Vec<PredictedInstance>> = BTreeMap::new();
    for d in &dets.detections {
        let rep = representation_of(&d.record.shape);
        by_rep.entry(rep).or_default().push(PredictedInstance {
            image_id: d.image_id.clone(),
            class: d.record.class,
            confidence: d.record.confidence,
            points: shape_points(&d.record.shape, ARC_TOLERANCE),
        });
    }
    let reps: Vec<Representation> = Representation::TABLE
        .iter()
        .copied()
        .filter(|r| by_rep.contains_key(r))
        .chain(by_rep.keys().copied().filter(|r| !Representation::TABLE.contains(r)))
        .collect();
    let mut report = aggregate("Detection (matched mask IoU, mAP)", &reps, &images, &[]);
    for row in &mut report.rows {
        let preds = &by_rep[&row.representation];
        let ap = average_precision(preds, &gts, iou, |a, b| polygon_pair_iou(a, b, 512))?;
        for m in &ap.matches {
            let cam = camera_of[preds[m.prediction].image_id.as_str()];
            let s = row.per_camera.entry(cam).or_default();
            s.iou_sum += m.iou;
            s.count += 1;
        }
        row.map = ap.map;
    }
    emit(&report, out, "map", format)?;
    Ok(())
}

fn representation_of(shape: &Shape) -> Representation {
    match shape {
        Shape::Standard(_) => Representation::Standard,
        Shape::Oriented(_) => Representation::Oriented,
        Shape::Ellipse(_) => Representation::Ellipse,
        Shape::Curved(_) => Representation::Curved,
        Shape::Polygon(p) => Representation::Polygon {
            n: p.vertices.len(),
            adaptive: p.sampling_kind == fishrep::shapes::SamplingKind::Adaptive,
        },
        Shape::Polar(p) => Representation::Polygon { n: p.sector_count(), adaptive: false },
    }
}

fn cmd_fit_division(rig: &CameraRig, camera: CameraId, samples: usize, out: Option<&Path>) -> CliResult<()> {
    let cam = rig.get(camera).ok_or_else(|| Error::Config(format!("camera '{camera}' not in the rig")))?;
    let poly = &cam.model;
    let start = Instant::now();
    let fit = fit_division_model(poly, &uniform_theta_grid(poly.max_field_angle(), samples))?;
    let elapsed = start.elapsed();
    println!("camera        {camera}");
    println!("f             {:.6} px", fit.model.f);
    println!("lambda        {:.6e} px^-2", fit.model.lambda);
    println!("max residual  {:.6} px", fit.max_abs_residual());
    println!("rms residual  {:.6} px", fit.rms_residual());
    info!("fit took {elapsed:?}");
    if let Some(dir) = out {
        write(&dir.join(format!("division_{camera}.csv")), division_residual_csv(poly, &fit))?;
        write(&dir.join(format!("division_{camera}.json")), serde_json::to_string_pretty(&fit.model).map_err(Error::from)? + "\n")?;
    }
    Ok(())
}

fn cmd_gen_synth(rig: &CameraRig, seed: u64, size: CorpusSize, out: &Path, per_scene: Option<usize>, previews: bool) -> CliResult<()> {
    let renderer = Renderer::new(&rig.scaled(SYNTH_SCALE)?);
    let mut cfg = SceneConfig { seed, ..Default::default() };
    if let Some(n) = per_scene {
        cfg.n_objects = n;
    }
    let corpus = renderer.generate_corpus(&cfg, size)?;
    let file = AnnotationFile {
        images: corpus.iter().map(|img| annotation_from_synth(img, Some("masks"))).collect(),
        ..Default::default()
    };
    for img in &corpus {
        for (k, inst) in img.instances.iter().enumerate() {
            write(&out.join("masks").join(format!("{}_{k}.pgm", img.image_id)), inst.mask.to_pgm())?;
        }
    }
    if previews {
        for ann in &file.images {
            write(&out.join("previews").join(format!("{}.svg", ann.image_id)), overlay(ann))?;
        }
    }
    save_annotations(&out.join("annotations.json"), &file)?;
    let n: usize = corpus.iter().map(|i| i.instances.len()).sum();
    info!("wrote {} images with {n} objects to {}", corpus.len(), out.display());
    Ok(())
}

fn overlay(img: &fishrep::io::AnnotationImage) -> String {
    let objects: Vec<OverlayObject> = img.objects.iter().map(|o| OverlayObject { contour: &o.contour, shapes: &o.shapes }).collect();
    render_overlay(img.width, img.height, &objects, &OverlayStyle::default())
}

/// Suppression runs per image and per representation, since each kind is a
/// separate detector output.
fn cmd_nms(input: &Path, out: &Path, score: f64, iou: f64) -> CliResult<()> {
    let file: DetectionsFile = read_json(input)?;
    let mut groups: BTreeMap<(String, Representation), Vec<DetectionRecord>> = BTreeMap::new();
    for d in file.detections {
        groups.entry((d.image_id, representation_of(&d.record.shape))).or_default().push(d.record);
    }
    let kept: Vec<Vec<ImageDetection>> = groups
        .par_iter()
        .map(|((id, _), dets)| {
            Ok(nms_generalized(dets, score, iou)?
                .into_iter()
                .map(|record| ImageDetection { image_id: id.clone(), record })
                .collect())
        })
        .collect::<Result<_>>()?;
    let result = DetectionsFile { detections: kept.into_iter().flatten().collect() };
    write(out, serde_json::to_string_pretty(&result).map_err(Error::from)? + "\n")?;
    Ok(())
}

fn cmd_render(path: &Path, out: &Path, only: Option<&str>, lenient: bool) -> CliResult<()> {
    let (file, _) = load_annotations(path, lenient)?;
    let mut any = false;
    for img in file.images.iter().filter(|i| only.map_or(true, |id| i.image_id == id)) {
        write(&out.join(format!("{}.svg", img.image_id)), overlay(img))?;
        any = true;
    }
    if let (false, Some(id)) = (any, only) {
        return Err(Error::Schema(format!("no image '{id}' in {}", path.display())).into());
    }
    Ok(())
}

fn cmd_render_cube(rig: &CameraRig, camera: CameraId, grid: usize, out: &Path) -> CliResult<()> {
    let cam = rig.get(camera).ok_or_else(|| Error::Config(format!("camera '{camera}' not in the rig")))?;
    let curves: Vec<_> = render_open_cube(&cam.model, grid)?.into_iter().map(|c| c.points).collect();
    let [w, h] = cam.model.image_size();
    write(&out.join(format!("open_cube_{camera}.svg")), render_polylines(w as usize, h as usize, &curves, "#40c040"))?;
    Ok(())
}
