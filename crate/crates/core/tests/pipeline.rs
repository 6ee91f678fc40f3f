//! End-to-end use of the library on small generated images.

use lssal::diffusion::{diffuse, render};
use lssal::features::{
    extract, read_record, write_record, FeatureParams, FeatureRecord, GLOBAL_DIM,
};
use lssal::imaging::Image;
use lssal::learn::{train, TrainConfig};
use lssal::model::{infer, read_model, write_model, LabeledInstance};

fn params() -> FeatureParams {
    FeatureParams {
        n_target: 40,
        ..FeatureParams::default()
    }
}

/// Gray field, optionally with a red square in the middle.
fn scene(salient: bool, shade: f64) -> Image {
    Image::from_fn(48, 48, |x, y| {
        let inside = (16..32).contains(&x) && (16..32).contains(&y);
        if salient && inside {
            [0.9, 0.1, 0.1]
        } else {
            let t = shade + 0.002 * ((x * 7 + y * 13) % 11) as f64;
            [t, t, t]
        }
    })
    .unwrap()
}

#[test]
fn cache_round_trip_preserves_model_inputs() {
    let ex = extract(&scene(true, 0.5), &params()).unwrap();
    let rec = FeatureRecord::from_extraction(&ex);
    let mut bytes = Vec::new();
    write_record(&mut bytes, &rec).unwrap();
    let back = read_record(bytes.as_slice()).unwrap();
    assert_eq!(back, rec);
    let (fb, graph) = back.into_parts(params().eps).unwrap();
    assert_eq!(fb, ex.bundle);
    assert_eq!(graph, ex.graph);
    assert_eq!(fb.phi_e.len(), GLOBAL_DIM);
}

#[test]
fn train_infer_and_render() {
    let samples: Vec<LabeledInstance> = (0..6)
        .map(|i| {
            let salient = i % 2 == 0;
            let ex = extract(&scene(salient, 0.3 + 0.08 * i as f64), &params()).unwrap();
            LabeledInstance::new(ex.bundle, ex.graph, usize::from(salient)).unwrap()
        })
        .collect();
    let cfg = TrainConfig {
        max_iters: 40,
        ..TrainConfig::default()
    };
    let (w, trace) = train(&samples, &cfg).unwrap();
    assert!(!trace.is_empty());
    assert!(w.w_p() >= 0.0);

    let mut bytes = Vec::new();
    write_model(&mut bytes, &w).unwrap();
    assert_eq!(read_model(bytes.as_slice()).unwrap(), w);

    let ex = extract(&scene(true, 0.45), &params()).unwrap();
    let inf = infer(&w, &ex.bundle, &ex.graph).unwrap();
    let z = diffuse(&inf.h, &ex.graph, 10.0).unwrap();
    assert!(z.iter().all(|v| (0.0..=1.0).contains(v)));
    let map = render(&z, &ex.segmentation, inf.y, false).unwrap();
    assert_eq!((map.width, map.height), (48, 48));
    assert_eq!(map.to_gray8().len(), 48 * 48);
    let black = render(&z, &ex.segmentation, 0, true).unwrap();
    assert!(black.to_gray8().iter().all(|&v| v == 0));
}
