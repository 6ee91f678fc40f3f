//! Regularized risk minimization for the latent structural SVM and a linear
//! SVM baseline on the global features.

mod minimize;
mod svm;

pub use svm::{train_linear_svm, LinearSvm};

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{
    infer_h, joint_feature, loss_augmented_infer, project_pairwise, LabeledInstance, Layout,
    ModelParams,
};
use crate::util::sq_norm;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Optimizer {
    Bundle,
    Subgradient,
}

impl FromStr for Optimizer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bundle" => Ok(Optimizer::Bundle),
            "subgradient" => Ok(Optimizer::Subgradient),
            _ => Err(Error::InvalidArgument(format!("unknown optimizer {s:?}"))),
        }
    }
}

impl fmt::Display for Optimizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Optimizer::Bundle => "bundle",
            Optimizer::Subgradient => "subgradient",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub lambda: f64,
    pub max_iters: usize,
    /// Relative gap between best objective and the bundle lower model.
    pub tol: f64,
    pub optimizer: Optimizer,
    /// Recorded with the run; the optimizers themselves are deterministic.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lambda: 1e-2,
            max_iters: 200,
            tol: 1e-4,
            optimizer: Optimizer::Bundle,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "lambda {} must be > 0",
                self.lambda
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be >= 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tol {} must be > 0",
                self.tol
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceEntry {
    pub iter: usize,
    pub objective: f64,
    pub risk: f64,
    pub norm_w: f64,
    pub seconds: f64,
    /// Cutting-plane model at this iterate (bundle mode only).
    pub model: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainTrace {
    pub entries: Vec<TraceEntry>,
}

impl TrainTrace {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn best_objective(&self) -> Option<f64> {
        self.entries.iter().map(|e| e.objective).reduce(f64::min)
    }

    /// Running minimum of the objective.
    pub fn best_so_far(&self) -> Vec<f64> {
        let mut best = f64::INFINITY;
        self.entries
            .iter()
            .map(|e| {
                best = best.min(e.objective);
                best
            })
            .collect()
    }

    /// CSV with header `iter,objective,risk,norm_w,seconds`. Without timing
    /// the seconds column is written as 0 so runs can be compared byte for
    /// byte.
    pub fn write_csv<W: Write>(&self, mut out: W, timing: bool) -> std::io::Result<()> {
        writeln!(out, "iter,objective,risk,norm_w,seconds")?;
        for e in &self.entries {
            let seconds = if timing { e.seconds } else { 0.0 };
            writeln!(
                out,
                "{},{:?},{:?},{:?},{}",
                e.iter, e.objective, e.risk, e.norm_w, seconds
            )?;
        }
        out.flush()
    }
}

/// Hinge risk of one sample and its subgradient contribution.
fn sample_risk(w: &ModelParams, s: &LabeledInstance) -> Result<(f64, Vec<f64>)> {
    let fb = &s.features;
    let augmented = loss_augmented_infer(w, fb, &s.graph, s.y)?;
    // Ties between the two existence labels go to 0.
    let y_star = usize::from(augmented[1].value > augmented[0].value);
    let truth = infer_h(w, fb, &s.graph, s.y)?;
    let risk = augmented[y_star].value - truth.value;
    let mut g = joint_feature(fb, &s.graph, y_star, &augmented[y_star].labels)?;
    let psi_true = joint_feature(fb, &s.graph, s.y, &truth.labels)?;
    for (gi, t) in g.iter_mut().zip(&psi_true) {
        *gi -= t;
    }
    Ok((risk, g))
}

const CHUNK: usize = 8;

/// Mean hinge risk over `batch` and its subgradient. Samples are evaluated in
/// parallel and reduced in a fixed order.
fn risk_and_subgradient(w: &ModelParams, batch: &[LabeledInstance]) -> Result<(f64, Vec<f64>)> {
    let dim = w.layout().len();
    let partials: Vec<Result<(f64, Vec<f64>)>> = batch
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut r = 0.0;
            let mut g = vec![0.0; dim];
            for s in chunk {
                let (ri, gi) = sample_risk(w, s)?;
                r += ri;
                for (a, b) in g.iter_mut().zip(&gi) {
                    *a += b;
                }
            }
            Ok((r, g))
        })
        .collect();
    let m = batch.len() as f64;
    let mut r = 0.0;
    let mut g = vec![0.0; dim];
    for part in partials {
        let (ri, gi) = part?;
        r += ri;
        for (a, b) in g.iter_mut().zip(&gi) {
            *a += b;
        }
    }
    g.iter_mut().for_each(|v| *v /= m);
    Ok((r / m, g))
}

fn check_batch(w: &ModelParams, batch: &[LabeledInstance]) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::InvalidArgument("empty training batch".into()));
    }
    for s in batch {
        if s.features.phi_e.len() != w.e_len() {
            return Err(Error::ModelMismatch {
                expected: w.e_len(),
                actual: s.features.phi_e.len(),
            });
        }
    }
    Ok(())
}

/// Regularized objective `lambda/2 |w|^2 + mean hinge` and a subgradient.
pub fn objective_and_subgradient(
    w: &ModelParams,
    batch: &[LabeledInstance],
    lambda: f64,
) -> Result<(f64, Vec<f64>)> {
    check_batch(w, batch)?;
    let (r, mut g) = risk_and_subgradient(w, batch)?;
    for (gi, wi) in g.iter_mut().zip(w.as_slice()) {
        *gi += lambda * wi;
    }
    Ok((0.5 * lambda * sq_norm(w.as_slice()) + r, g))
}

/// Trains the latent structural SVM from image-level labels.
pub fn train(samples: &[LabeledInstance], cfg: &TrainConfig) -> Result<(ModelParams, TrainTrace)> {
    cfg.validate()?;
    let first = samples
        .first()
        .ok_or_else(|| Error::InvalidArgument("no training samples".into()))?;
    if samples.iter().all(|s| s.y == first.y) {
        return Err(Error::InvalidArgument(
            "training set needs both existence labels".into(),
        ));
    }
    let e_len = first.features.phi_e.len();
    let layout = Layout::new(e_len);
    check_batch(&ModelParams::zeros(e_len), samples)?;
    let oracle = |w: &[f64]| {
        let params = ModelParams::from_vec(e_len, w.to_vec())?;
        risk_and_subgradient(&params, samples)
    };
    let (w, trace) =
        minimize::minimize(layout.len(), cfg, oracle, |w| project_pairwise(layout, w))?;
    Ok((ModelParams::from_vec(e_len, w)?, trace))
}
