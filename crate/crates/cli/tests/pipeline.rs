mod common;

use std::fs;
use std::path::{Path, PathBuf};

use lssal::eval::PrMode;
use lssal::features::GLOBAL_DIM;
use lssal::Config;
use lssal_cli::commands::{
    cache_path, cmd_eval, cmd_extract, cmd_predict, cmd_train, read_existence, sidecar_path,
    write_eval_outputs, EXISTENCE_CSV,
};
use lssal_cli::{CliError, Manifest};

fn header_e(model: &Path) -> u32 {
    let bytes = fs::read(model).unwrap();
    assert_eq!(&bytes[..8], b"LSSVMW01");
    u32::from_le_bytes(bytes[8..12].try_into().unwrap())
}

fn images(m: &Manifest) -> Vec<(PathBuf, PathBuf)> {
    m.records
        .iter()
        .map(|r| (r.image.clone(), m.image_path(r)))
        .collect()
}

#[test]
fn extract_is_deterministic_and_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let (_, m) = common::synth(dir.path(), 4, 5);
    let m = common::subset(&m, |i, _| i < 3);
    let cfg = common::quick_config();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));

    let r = cmd_extract(&m, &a, &cfg).unwrap();
    assert_eq!((r.computed, r.skipped, r.failed.len()), (3, 0, 0));
    cmd_extract(&m, &b, &cfg).unwrap();
    for rec in &m.records {
        let bytes = fs::read(cache_path(&a, rec)).unwrap();
        assert_eq!(&bytes[..8], b"LSALFEA1");
        assert_eq!(bytes, fs::read(cache_path(&b, rec)).unwrap());
    }

    let stamp = fs::metadata(cache_path(&a, &m.records[0]))
        .unwrap()
        .modified()
        .unwrap();
    let r = cmd_extract(&m, &a, &cfg).unwrap();
    assert_eq!((r.computed, r.skipped), (0, 3));
    let again = fs::metadata(cache_path(&a, &m.records[0]))
        .unwrap()
        .modified()
        .unwrap();
    assert_eq!(stamp, again);

    // Training-only settings leave caches valid; feature settings do not.
    let mut cfg2 = cfg.clone();
    cfg2.train.lambda = 0.5;
    assert_eq!(cmd_extract(&m, &a, &cfg2).unwrap().skipped, 3);
    cfg2.features.sigma_c = 0.5;
    assert_eq!(cmd_extract(&m, &a, &cfg2).unwrap().computed, 3);
}

#[test]
fn unreadable_image_is_reported_alone() {
    let dir = tempfile::tempdir().unwrap();
    let (_, m) = common::synth(dir.path(), 4, 6);
    let m = common::subset(&m, |i, _| i < 3);
    let broken = m.image_path(&m.records[1]);
    fs::write(&broken, b"not an image").unwrap();
    let r = cmd_extract(&m, &dir.path().join("cache"), &common::quick_config()).unwrap();
    assert_eq!(r.computed, 2);
    assert_eq!(r.failed.len(), 1);
    assert_eq!(r.failed[0].0, broken);
}

#[test]
fn train_predict_eval_round() {
    let dir = tempfile::tempdir().unwrap();
    let (_, m) = common::synth(dir.path(), 8, 8);
    let cfg = common::quick_config();
    let model = dir.path().join("raw.lssvm");
    let trace = dir.path().join("raw.csv");
    let s = cmd_train(
        &m,
        Some(&dir.path().join("cache")),
        &cfg,
        false,
        &model,
        &trace,
    )
    .unwrap();
    assert!(s.final_objective().is_finite());
    assert_eq!(header_e(&model), GLOBAL_DIM as u32);
    let trace_text = fs::read_to_string(&trace).unwrap();
    assert!(trace_text.starts_with("iter,objective,risk,norm_w,seconds\n"));
    assert_eq!(trace_text.lines().count(), s.trace.len() + 1);
    let echoed = Config::load(&sidecar_path(&model)).unwrap();
    assert_eq!(echoed, cfg);

    let out = dir.path().join("pred");
    let r = cmd_predict(&model, &images(&m), &out, &cfg, false, true).unwrap();
    assert!(r.failed.is_empty());
    assert_eq!(r.rows.len(), 8);
    let rows = read_existence(&out.join(EXISTENCE_CSV)).unwrap();
    assert_eq!(rows.len(), 8);
    for (row, rec) in r.rows.iter().zip(&m.records) {
        assert_eq!(row.image, rec.image);
        let expected = usize::from(row.scores[1] > row.scores[0]);
        assert_eq!(row.y, expected);
        let map = image::open(out.join(format!("{}.png", rec.stem())))
            .unwrap()
            .to_luma8();
        assert_eq!(map.dimensions(), (96, 96));
        if row.y == 0 {
            assert!(
                map.pixels().all(|p| p[0] == 0),
                "force-black map for {}",
                rec.stem()
            );
        }
    }

    let report = cmd_eval(&out, &m, PrMode::Pooled).unwrap();
    assert!(report.row.ap.is_some());
    assert!(report.row.mae.unwrap() <= 1.0);
    assert!(report.row.accuracy.is_some());
    let metrics = dir.path().join("metrics.csv");
    let pr = dir.path().join("pr.csv");
    write_eval_outputs(&report, &metrics, Some(&pr)).unwrap();
    assert_eq!(fs::read_to_string(&pr).unwrap().lines().count(), 257);
}

#[test]
fn chi2_model_records_expanded_length_and_rejects_raw_features() {
    let dir = tempfile::tempdir().unwrap();
    let (_, m) = common::synth(dir.path(), 4, 9);
    let mut cfg = common::quick_config();
    cfg.train.max_iters = 3;
    let model = dir.path().join("chi2.lssvm");
    cmd_train(&m, None, &cfg, true, &model, &dir.path().join("t.csv")).unwrap();
    assert_eq!(header_e(&model), (GLOBAL_DIM * cfg.chi2.expansion()) as u32);

    let err = cmd_predict(
        &model,
        &images(&m),
        &dir.path().join("p"),
        &cfg,
        false,
        false,
    )
    .unwrap_err();
    assert!(
        matches!(err, CliError::Core(lssal::Error::ModelMismatch { .. })),
        "{err}"
    );
    assert_eq!(err.exit_code(), 2);
    assert!(cmd_predict(
        &model,
        &images(&m),
        &dir.path().join("p"),
        &cfg,
        true,
        false
    )
    .is_ok());
}

#[test]
fn single_class_training_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let (_, m) = common::synth(dir.path(), 4, 10);
    let m = common::subset(&m, |_, r| r.label == 1);
    let err = cmd_train(
        &m,
        None,
        &common::quick_config(),
        false,
        &dir.path().join("m"),
        &dir.path().join("t"),
    )
    .unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(!dir.path().join("m").exists());
}

/// Predictions copied from the ground truth.
fn perfect_predictions(m: &Manifest, out: &Path) {
    fs::create_dir_all(out).unwrap();
    let mut csv = String::from("image,y,score_0,score_1\n");
    for r in &m.records {
        fs::copy(
            m.mask_path(r).unwrap(),
            out.join(format!("{}.png", r.stem())),
        )
        .unwrap();
        csv += &format!("{},{},0,0\n", r.image.display(), r.label);
    }
    fs::write(out.join(EXISTENCE_CSV), csv).unwrap();
}

#[test]
fn eval_of_ground_truth_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let (_, m) = common::synth(dir.path(), 6, 12);
    let out = dir.path().join("gt");
    perfect_predictions(&m, &out);
    let r = cmd_eval(&out, &m, PrMode::Pooled).unwrap();
    assert_eq!(r.row.ap, Some(1.0));
    assert_eq!(r.row.mae, Some(0.0));
    assert_eq!(r.row.accuracy, Some(1.0));
    let r = cmd_eval(&out, &m, PrMode::PerImage).unwrap();
    assert_eq!(r.row.ap, Some(1.0));
}

#[test]
fn background_only_split_reports_na_ap() {
    let dir = tempfile::tempdir().unwrap();
    let (_, m) = common::synth(dir.path(), 6, 13);
    let bg = common::subset(&m, |_, r| r.label == 0);
    let out = dir.path().join("gt");
    perfect_predictions(&bg, &out);
    let r = cmd_eval(&out, &bg, PrMode::Pooled).unwrap();
    assert_eq!(r.row.ap, None);
    assert_eq!(r.row.mae, Some(0.0));
    let metrics = dir.path().join("metrics.csv");
    let pr = dir.path().join("pr.csv");
    write_eval_outputs(&r, &metrics, Some(&pr)).unwrap();
    let text = fs::read_to_string(&metrics).unwrap();
    assert_eq!(
        text,
        format!(
            "dataset,method,AP,MAE,accuracy\n{},lssvm,N/A,0.000000,1.000000\n",
            m.name
        )
    );
    assert!(!pr.exists());
}

#[test]
fn missing_prediction_names_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let (_, m) = common::synth(dir.path(), 4, 14);
    let out = dir.path().join("gt");
    perfect_predictions(&m, &out);
    let gone = out.join(format!("{}.png", m.records[2].stem()));
    fs::remove_file(&gone).unwrap();
    match cmd_eval(&out, &m, PrMode::Pooled).unwrap_err() {
        CliError::MissingPrediction(p) => assert_eq!(p, gone),
        e => panic!("unexpected {e}"),
    }
}

#[test]
fn training_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (_, m) = common::synth(dir.path(), 6, 15);
    let cfg = common::quick_config();
    let run = |tag: &str| {
        let model = dir.path().join(format!("{tag}.lssvm"));
        cmd_train(
            &m,
            None,
            &cfg,
            false,
            &model,
            &dir.path().join(format!("{tag}.csv")),
        )
        .unwrap();
        let out = dir.path().join(format!("{tag}-pred"));
        cmd_predict(&model, &images(&m), &out, &cfg, false, true).unwrap();
        let report = cmd_eval(&out, &m, PrMode::Pooled).unwrap();
        let metrics = dir.path().join(format!("{tag}-metrics.csv"));
        write_eval_outputs(&report, &metrics, None).unwrap();
        (fs::read(model).unwrap(), fs::read(metrics).unwrap())
    };
    assert_eq!(run("a"), run("b"));
}
