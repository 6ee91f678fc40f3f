//! Benchmark metrics: fixed-threshold PR curves, average precision, MAE and
//! existence accuracy.
//!
//! Saliency maps are 8-bit gray levels; a pixel counts as predicted salient
//! at threshold `t` when its value is at least `t`, so threshold 0 selects
//! every pixel. Thresholds with no predicted pixel get precision 1.

use std::io::Write;

use crate::error::{Error, Result};
use crate::model::Label;

pub const N_THRESHOLDS: usize = 256;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PrMode {
    /// Counts summed over the dataset before forming ratios.
    #[default]
    Pooled,
    /// Ratios per image, averaged over images with salient pixels.
    PerImage,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrPoint {
    pub threshold: u8,
    pub precision: f64,
    pub recall: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrCurve {
    pub points: Vec<PrPoint>,
}

/// Counts of pixels with value >= t, split by ground truth.
#[derive(Clone, Debug)]
struct Counts {
    tp: [u64; N_THRESHOLDS],
    fp: [u64; N_THRESHOLDS],
    positives: u64,
}

impl Counts {
    fn of(map: &[u8], mask: &[bool]) -> Self {
        let mut pos = [0u64; N_THRESHOLDS];
        let mut neg = [0u64; N_THRESHOLDS];
        for (&v, &m) in map.iter().zip(mask) {
            if m {
                pos[v as usize] += 1;
            } else {
                neg[v as usize] += 1;
            }
        }
        let mut tp = [0u64; N_THRESHOLDS];
        let mut fp = [0u64; N_THRESHOLDS];
        let (mut p, mut n) = (0, 0);
        for t in (0..N_THRESHOLDS).rev() {
            p += pos[t];
            n += neg[t];
            tp[t] = p;
            fp[t] = n;
        }
        Self {
            tp,
            fp,
            positives: p,
        }
    }

    fn add(&mut self, other: &Counts) {
        for t in 0..N_THRESHOLDS {
            self.tp[t] += other.tp[t];
            self.fp[t] += other.fp[t];
        }
        self.positives += other.positives;
    }

    fn precision_recall(&self, t: usize) -> (f64, f64) {
        let predicted = self.tp[t] + self.fp[t];
        let precision = if predicted == 0 {
            1.0
        } else {
            self.tp[t] as f64 / predicted as f64
        };
        let recall = if predicted == 0 || self.positives == 0 {
            0.0
        } else {
            self.tp[t] as f64 / self.positives as f64
        };
        (precision, recall)
    }
}

fn check_pairs<M: AsRef<[u8]>, K: AsRef<[bool]>>(maps: &[M], masks: &[K]) -> Result<()> {
    if maps.len() != masks.len() {
        return Err(Error::LengthMismatch {
            left: maps.len(),
            right: masks.len(),
        });
    }
    for (i, (m, k)) in maps.iter().zip(masks).enumerate() {
        if m.as_ref().len() != k.as_ref().len() {
            return Err(Error::DimensionMismatch(format!(
                "image {i}: map has {} pixels, mask {}",
                m.as_ref().len(),
                k.as_ref().len()
            )));
        }
    }
    Ok(())
}

/// Precision and recall at all 256 thresholds.
pub fn pr_curve<M: AsRef<[u8]>, K: AsRef<[bool]>>(
    maps: &[M],
    masks: &[K],
    mode: PrMode,
) -> Result<PrCurve> {
    check_pairs(maps, masks)?;
    let per_image: Vec<Counts> = maps
        .iter()
        .zip(masks)
        .map(|(m, k)| Counts::of(m.as_ref(), k.as_ref()))
        .collect();
    if per_image.iter().all(|c| c.positives == 0) {
        return Err(Error::DegenerateInput(
            "no salient ground-truth pixels".into(),
        ));
    }
    let points = match mode {
        PrMode::Pooled => {
            let mut total = Counts {
                tp: [0; N_THRESHOLDS],
                fp: [0; N_THRESHOLDS],
                positives: 0,
            };
            per_image.iter().for_each(|c| total.add(c));
            (0..N_THRESHOLDS)
                .map(|t| {
                    let (precision, recall) = total.precision_recall(t);
                    PrPoint {
                        threshold: t as u8,
                        precision,
                        recall,
                    }
                })
                .collect()
        }
        PrMode::PerImage => {
            let with_gt: Vec<&Counts> = per_image.iter().filter(|c| c.positives > 0).collect();
            let m = with_gt.len() as f64;
            (0..N_THRESHOLDS)
                .map(|t| {
                    let (p, r) = with_gt.iter().fold((0.0, 0.0), |(p, r), c| {
                        let (pi, ri) = c.precision_recall(t);
                        (p + pi, r + ri)
                    });
                    PrPoint {
                        threshold: t as u8,
                        precision: p / m,
                        recall: r / m,
                    }
                })
                .collect()
        }
    };
    Ok(PrCurve { points })
}

/// Area under the PR curve by the trapezoid rule over recall. Points with
/// equal recall keep their best precision; the curve is anchored at recall 0
/// with the precision of its lowest-recall point.
pub fn average_precision(curve: &PrCurve) -> f64 {
    let mut pts: Vec<(f64, f64)> = curve
        .points
        .iter()
        .map(|p| (p.recall, p.precision))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
    pts.dedup_by(|next, kept| next.0 == kept.0);
    let Some(&(r0, p0)) = pts.first() else {
        return 0.0;
    };
    if r0 > 0.0 {
        pts.insert(0, (0.0, p0));
    }
    pts.windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0)
        .sum::<f64>()
        .clamp(0.0, 1.0)
}

/// Mean absolute error between maps scaled to [0, 1] and binary masks,
/// averaged per image and then over images.
pub fn mae<M: AsRef<[u8]>, K: AsRef<[bool]>>(maps: &[M], masks: &[K]) -> Result<f64> {
    check_pairs(maps, masks)?;
    if maps.is_empty() {
        return Err(Error::InvalidArgument("no images".into()));
    }
    let mut total = 0.0;
    for (m, k) in maps.iter().zip(masks) {
        let (m, k) = (m.as_ref(), k.as_ref());
        if m.is_empty() {
            return Err(Error::DimensionMismatch("empty image".into()));
        }
        let err: f64 = m
            .iter()
            .zip(k)
            .map(|(&v, &g)| (f64::from(v) / 255.0 - f64::from(u8::from(g))).abs())
            .sum();
        total += err / m.len() as f64;
    }
    Ok(total / maps.len() as f64)
}

pub fn accuracy(pred: &[Label], truth: &[Label]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: truth.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::InvalidArgument("no labels".into()));
    }
    let hits = pred.iter().zip(truth).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / pred.len() as f64)
}

/// 256-row CSV: `threshold,precision,recall`.
pub fn write_pr_csv<W: Write>(mut out: W, curve: &PrCurve) -> std::io::Result<()> {
    writeln!(out, "threshold,precision,recall")?;
    for p in &curve.points {
        writeln!(out, "{},{:?},{:?}", p.threshold, p.precision, p.recall)?;
    }
    out.flush()
}

/// One line of the metrics report. Undefined metrics print as `N/A`.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRow {
    pub dataset: String,
    pub method: String,
    pub ap: Option<f64>,
    pub mae: Option<f64>,
    pub accuracy: Option<f64>,
}

pub fn write_metrics_csv<W: Write>(mut out: W, rows: &[MetricsRow]) -> std::io::Result<()> {
    let cell = |v: Option<f64>| v.map_or_else(|| "N/A".to_string(), |x| format!("{x:.6}"));
    writeln!(out, "dataset,method,AP,MAE,accuracy")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.dataset,
            r.method,
            cell(r.ap),
            cell(r.mae),
            cell(r.accuracy)
        )?;
    }
    out.flush()
}
