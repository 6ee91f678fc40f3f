//! The four pipeline stages behind the `lssal` subcommands.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::SystemTime;

use lssal::diffusion::{diffuse, render};
use lssal::eval::{
    accuracy, average_precision, mae, pr_curve, write_metrics_csv, write_pr_csv, MetricsRow,
    PrCurve, PrMode,
};
use lssal::features::{
    extract, read_record, write_record, FeatureBundle, FeatureRecord, GLOBAL_DIM,
};
use lssal::imaging::load_image;
use lssal::learn::{train, TrainTrace};
use lssal::model::{infer, load_model, save_model, Label, LabeledInstance, ModelParams};
use lssal::mrf::RegionGraph;
use lssal::Config;
use rayon::prelude::*;

use crate::error::{invalid, io_err, CliError, CliResult};
use crate::manifest::{Manifest, Record};

pub const CACHE_EXT: &str = "feat";
pub const EXTRACT_SIDECAR: &str = "extract.cfg";
pub const EXISTENCE_CSV: &str = "existence.csv";
pub const METHOD_NAME: &str = "lssvm";

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

fn create_dir(path: &Path) -> CliResult<()> {
    fs::create_dir_all(path).map_err(|e| io_err(path, e))
}

/// `model.lssvm` -> `model.lssvm.cfg`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".cfg");
    PathBuf::from(s)
}

/// Global descriptor length a model trained under these settings expects.
pub fn expected_e_len(cfg: &Config, chi2: bool) -> usize {
    if chi2 {
        GLOBAL_DIM * cfg.chi2.expansion()
    } else {
        GLOBAL_DIM
    }
}

// ---------------------------------------------------------------- extract

pub fn cache_path(dir: &Path, rec: &Record) -> PathBuf {
    dir.join(format!("{}.{CACHE_EXT}", rec.stem()))
}

#[derive(Debug, Default)]
pub struct ExtractReport {
    pub computed: usize,
    pub skipped: usize,
    pub failed: Vec<(PathBuf, String)>,
}

fn modified(path: &Path) -> Option<SystemTime> {
    fs::metadata(path).and_then(|m| m.modified()).ok()
}

fn cache_is_fresh(cache: &Path, image: &Path) -> bool {
    let magic_ok = fs::File::open(cache)
        .and_then(|mut f| {
            let mut buf = [0u8; 8];
            std::io::Read::read_exact(&mut f, &mut buf).map(|_| buf)
        })
        .is_ok_and(|b| &b == lssal::features::FEATURE_MAGIC);
    match (modified(cache), modified(image)) {
        (Some(c), Some(i)) => magic_ok && c >= i,
        _ => false,
    }
}

fn extract_record(image: &Path, cfg: &Config) -> lssal::Result<Vec<u8>> {
    let img = load_image(image)?;
    let ex = extract(&img, &cfg.features)?;
    let mut bytes = Vec::new();
    write_record(&mut bytes, &FeatureRecord::from_extraction(&ex)).expect("in-memory write");
    Ok(bytes)
}

/// Writes one feature cache per record. Caches newer than their image are
/// kept unless the feature settings changed since the last run.
pub fn cmd_extract(manifest: &Manifest, out_dir: &Path, cfg: &Config) -> CliResult<ExtractReport> {
    create_dir(out_dir)?;
    let sidecar = out_dir.join(EXTRACT_SIDECAR);
    let same_settings = fs::read_to_string(&sidecar)
        .ok()
        .and_then(|t| Config::parse(&t).ok())
        .is_some_and(|old| old.features == cfg.features);
    if !same_settings {
        // Invalidate before writing anything so an interrupted run never
        // leaves old caches looking current.
        let _ = fs::remove_file(&sidecar);
    }
    let outcomes: Vec<_> = manifest
        .records
        .par_iter()
        .map(|rec| {
            let image = manifest.image_path(rec);
            let cache = cache_path(out_dir, rec);
            if same_settings && cache_is_fresh(&cache, &image) {
                return Ok(false);
            }
            let bytes = extract_record(&image, cfg).map_err(|e| (image.clone(), e.to_string()))?;
            fs::write(&cache, bytes).map_err(|e| (cache.clone(), e.to_string()))?;
            Ok(true)
        })
        .collect();
    write_file(&sidecar, cfg.to_string().as_bytes())?;
    let mut report = ExtractReport::default();
    for o in outcomes {
        match o {
            Ok(true) => report.computed += 1,
            Ok(false) => report.skipped += 1,
            Err(f) => report.failed.push(f),
        }
    }
    Ok(report)
}

pub fn load_cached(path: &Path, eps: f64) -> CliResult<(FeatureBundle, RegionGraph)> {
    let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
    let rec = read_record(std::io::BufReader::new(file))?;
    Ok(rec.into_parts(eps)?)
}

// ------------------------------------------------------------------ train

fn to_instance(
    (mut fb, graph): (FeatureBundle, RegionGraph),
    y: Label,
    cfg: &Config,
    chi2: bool,
) -> lssal::Result<LabeledInstance> {
    if chi2 {
        fb.map_global_chi2(&cfg.chi2)?;
    }
    LabeledInstance::new(fb, graph, y)
}

/// Loads (or extracts) features for every record. With a cache directory
/// the caches are refreshed first.
pub fn training_set(
    manifest: &Manifest,
    cache: Option<&Path>,
    cfg: &Config,
    chi2: bool,
) -> CliResult<Vec<LabeledInstance>> {
    if let Some(dir) = cache {
        let report = cmd_extract(manifest, dir, cfg)?;
        if !report.failed.is_empty() {
            for (p, msg) in &report.failed {
                eprintln!("{}: {msg}", p.display());
            }
            return Err(CliError::Partial {
                failed: report.failed.len(),
                total: manifest.records.len(),
            });
        }
    }
    manifest
        .records
        .par_iter()
        .map(|rec| {
            let parts = match cache {
                Some(dir) => load_cached(&cache_path(dir, rec), cfg.features.eps)?,
                None => {
                    let ex = extract(&load_image(manifest.image_path(rec))?, &cfg.features)?;
                    (ex.bundle, ex.graph)
                }
            };
            Ok(to_instance(parts, rec.label, cfg, chi2)?)
        })
        .collect()
}

#[derive(Debug)]
pub struct TrainSummary {
    pub model: ModelParams,
    pub trace: TrainTrace,
}

impl TrainSummary {
    pub fn final_objective(&self) -> f64 {
        self.trace.best_objective().unwrap_or(f64::NAN)
    }
}

/// Trains on the manifest and writes the model, its trace CSV and a config
/// sidecar next to the model.
pub fn cmd_train(
    manifest: &Manifest,
    cache: Option<&Path>,
    cfg: &Config,
    chi2: bool,
    model_path: &Path,
    trace_path: &Path,
) -> CliResult<TrainSummary> {
    let labels: std::collections::BTreeSet<_> = manifest.records.iter().map(|r| r.label).collect();
    if labels.len() < 2 {
        return Err(invalid(
            "training needs both existence labels in the manifest",
        ));
    }
    let samples = training_set(manifest, cache, cfg, chi2)?;
    let (model, trace) = train(&samples, &cfg.train)?;
    save_model(model_path, &model)?;
    let mut csv = Vec::new();
    trace.write_csv(&mut csv, true).expect("in-memory write");
    write_file(trace_path, &csv)?;
    write_file(&sidecar_path(model_path), cfg.to_string().as_bytes())?;
    Ok(TrainSummary { model, trace })
}

// ---------------------------------------------------------------- predict

#[derive(Clone, Debug, PartialEq)]
pub struct ExistenceRow {
    /// Image path as given on input.
    pub image: PathBuf,
    pub y: Label,
    pub scores: [f64; 2],
}

#[derive(Debug, Default)]
pub struct PredictReport {
    pub rows: Vec<ExistenceRow>,
    pub failed: Vec<(PathBuf, String)>,
}

/// Existence label, scores and 8-bit saliency map for one image.
pub fn predict_image(
    model: &ModelParams,
    image: &Path,
    cfg: &Config,
    chi2: bool,
    force_black: bool,
) -> lssal::Result<(Label, [f64; 2], lssal::diffusion::SaliencyMap)> {
    let img = load_image(image)?;
    let mut ex = extract(&img, &cfg.features)?;
    if chi2 {
        ex.bundle.map_global_chi2(&cfg.chi2)?;
    }
    let inf = infer(model, &ex.bundle, &ex.graph)?;
    let z = diffuse(&inf.h, &ex.graph, cfg.gamma)?;
    let map = render(&z, &ex.segmentation, inf.y, force_black)?;
    Ok((inf.y, inf.scores, map))
}

/// `images` pairs the name written to the CSV with the file to read.
/// Writes `<stem>.png` per image plus `existence.csv` to `out_dir`.
pub fn cmd_predict(
    model_path: &Path,
    images: &[(PathBuf, PathBuf)],
    out_dir: &Path,
    cfg: &Config,
    chi2: bool,
    force_black: bool,
) -> CliResult<PredictReport> {
    let model = load_model(model_path)?;
    let feature_len = expected_e_len(cfg, chi2);
    if model.e_len() != feature_len {
        return Err(lssal::Error::ModelMismatch {
            expected: model.e_len(),
            actual: feature_len,
        }
        .into());
    }
    create_dir(out_dir)?;
    let outcomes: Vec<_> = images
        .par_iter()
        .map(|(name, file)| {
            let stem = name
                .file_stem()
                .unwrap_or_default()
                .to_string_lossy()
                .into_owned();
            let (y, scores, map) = predict_image(&model, file, cfg, chi2, force_black)
                .map_err(|e| (file.clone(), e.to_string()))?;
            map.save_png(&out_dir.join(format!("{stem}.png")))
                .map_err(|e| (file.clone(), e.to_string()))?;
            Ok(ExistenceRow {
                image: name.clone(),
                y,
                scores,
            })
        })
        .collect();
    let mut report = PredictReport::default();
    for o in outcomes {
        match o {
            Ok(row) => report.rows.push(row),
            Err(f) => report.failed.push(f),
        }
    }
    let mut csv = String::from("image,y,score_0,score_1\n");
    for r in &report.rows {
        csv += &format!(
            "{},{},{:?},{:?}\n",
            r.image.display(),
            r.y,
            r.scores[0],
            r.scores[1]
        );
    }
    write_file(&out_dir.join(EXISTENCE_CSV), csv.as_bytes())?;
    write_file(&out_dir.join("predict.cfg"), cfg.to_string().as_bytes())?;
    Ok(report)
}

/// Reads `existence.csv` back as (image stem, label) pairs.
pub fn read_existence(path: &Path) -> CliResult<Vec<(String, Label)>> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let mut cols = line.split(',');
        let (Some(image), Some(y)) = (cols.next(), cols.next()) else {
            return Err(invalid(format!(
                "{}:{}: malformed row",
                path.display(),
                i + 1
            )));
        };
        let y: Label = y
            .parse()
            .map_err(|_| invalid(format!("{}:{}: bad label {y:?}", path.display(), i + 1)))?;
        let stem = Path::new(image)
            .file_stem()
            .unwrap_or_default()
            .to_string_lossy()
            .into_owned();
        out.push((stem, y));
    }
    Ok(out)
}

// ------------------------------------------------------------------- eval

fn load_gray(path: &Path) -> CliResult<image::GrayImage> {
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    let img = image::load_from_memory(&bytes).map_err(|e| lssal::Error::Decode {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    Ok(img.to_luma8())
}

/// Ground-truth masks are binarized at mid-gray.
pub fn load_mask(path: &Path) -> CliResult<(u32, u32, Vec<bool>)> {
    let img = load_gray(path)?;
    Ok((
        img.width(),
        img.height(),
        img.pixels().map(|p| p[0] >= 128).collect(),
    ))
}

pub fn prediction_path(pred_dir: &Path, rec: &Record) -> PathBuf {
    pred_dir.join(format!("{}.png", rec.stem()))
}

#[derive(Debug)]
pub struct EvalReport {
    pub row: MetricsRow,
    /// `None` when the masks contain no salient pixel.
    pub curve: Option<PrCurve>,
}

/// Scores the maps in `pred_dir` against the manifest masks. Accuracy is
/// reported when `existence.csv` is present.
pub fn cmd_eval(pred_dir: &Path, manifest: &Manifest, mode: PrMode) -> CliResult<EvalReport> {
    let mut maps = Vec::new();
    let mut masks = Vec::new();
    for rec in &manifest.records {
        let Some(mask_path) = manifest.mask_path(rec) else {
            continue;
        };
        let pred = prediction_path(pred_dir, rec);
        if !pred.is_file() {
            return Err(CliError::MissingPrediction(pred));
        }
        let map = load_gray(&pred)?;
        let (w, h, mask) = load_mask(&mask_path)?;
        if (map.width(), map.height()) != (w, h) {
            return Err(lssal::Error::DimensionMismatch(format!(
                "{} is {}x{}, mask is {w}x{h}",
                pred.display(),
                map.width(),
                map.height()
            ))
            .into());
        }
        maps.push(map.into_raw());
        masks.push(mask);
    }
    let (curve, ap) = match pr_curve(&maps, &masks, mode) {
        Ok(c) => {
            let ap = average_precision(&c);
            (Some(c), Some(ap))
        }
        Err(lssal::Error::DegenerateInput(_)) => (None, None),
        Err(e) => return Err(e.into()),
    };
    let mae = if maps.is_empty() {
        None
    } else {
        Some(mae(&maps, &masks)?)
    };
    let existence = pred_dir.join(EXISTENCE_CSV);
    let accuracy = if existence.is_file() {
        let predicted: std::collections::BTreeMap<_, _> =
            read_existence(&existence)?.into_iter().collect();
        let mut pred = Vec::new();
        let mut truth = Vec::new();
        for rec in &manifest.records {
            let y = predicted
                .get(&rec.stem())
                .ok_or_else(|| CliError::MissingPrediction(manifest.image_path(rec)))?;
            pred.push(*y);
            truth.push(rec.label);
        }
        if pred.is_empty() {
            None
        } else {
            Some(accuracy(&pred, &truth)?)
        }
    } else {
        None
    };
    Ok(EvalReport {
        row: MetricsRow {
            dataset: manifest.name.clone(),
            method: METHOD_NAME.into(),
            ap,
            mae,
            accuracy,
        },
        curve,
    })
}

pub fn write_eval_outputs(report: &EvalReport, metrics: &Path, pr: Option<&Path>) -> CliResult<()> {
    let mut buf = BufWriter::new(Vec::new());
    write_metrics_csv(&mut buf, std::slice::from_ref(&report.row)).expect("in-memory write");
    write_file(metrics, &buf.into_inner().expect("in-memory flush"))?;
    if let (Some(path), Some(curve)) = (pr, &report.curve) {
        let mut out = Vec::new();
        write_pr_csv(&mut out, curve).expect("in-memory write");
        out.flush().expect("in-memory flush");
        write_file(path, &out)?;
    }
    Ok(())
}
