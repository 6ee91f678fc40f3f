//! Latent structural SVM: parameters, joint feature map, inference and loss.

mod file;
mod inference;

pub use file::{load_model, read_model, save_model, write_model, MODEL_MAGIC};
pub use inference::{infer, infer_h, joint_feature, loss, loss_augmented_infer, score, Inference};

#[cfg(test)]
pub(crate) use inference::fixtures;

use crate::error::{Error, Result};
use crate::features::{FeatureBundle, REGIONAL_DIM};
use crate::mrf::RegionGraph;

/// Existence label: 0 = background only, 1 = contains a salient object.
pub type Label = usize;

pub(crate) fn check_label(y: Label) -> Result<()> {
    if y > 1 {
        return Err(Error::InvalidArgument(format!("label {y} is not 0 or 1")));
    }
    Ok(())
}

/// Offsets of every parameter block in the flat vector.
///
/// Order: `w_e[0] w_e[1] w_s[0] w_s[1] w_f[0] w_f[1] w_b[0] w_b[1] w_p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layout {
    pub e_len: usize,
}

impl Layout {
    pub fn new(e_len: usize) -> Self {
        Self { e_len }
    }

    pub fn len(&self) -> usize {
        2 * (self.e_len + REGIONAL_DIM + 2) + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn e(&self, y: Label) -> std::ops::Range<usize> {
        let start = y * self.e_len;
        start..start + self.e_len
    }

    pub fn s(&self, y: Label) -> std::ops::Range<usize> {
        let start = 2 * self.e_len + y * REGIONAL_DIM;
        start..start + REGIONAL_DIM
    }

    pub fn f(&self, y: Label) -> usize {
        2 * (self.e_len + REGIONAL_DIM) + y
    }

    pub fn b(&self, y: Label) -> usize {
        2 * (self.e_len + REGIONAL_DIM) + 2 + y
    }

    pub fn p(&self) -> usize {
        self.len() - 1
    }
}

/// Flat parameter vector `w` with its block layout.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    layout: Layout,
    w: Vec<f64>,
}

impl ModelParams {
    pub fn zeros(e_len: usize) -> Self {
        let layout = Layout::new(e_len);
        Self {
            layout,
            w: vec![0.0; layout.len()],
        }
    }

    pub fn from_vec(e_len: usize, w: Vec<f64>) -> Result<Self> {
        let layout = Layout::new(e_len);
        if w.len() != layout.len() {
            return Err(Error::LengthMismatch {
                left: w.len(),
                right: layout.len(),
            });
        }
        if let Some(v) = w.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite weight {v}")));
        }
        Ok(Self { layout, w })
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn e_len(&self) -> usize {
        self.layout.e_len
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.w
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.w
    }

    pub fn w_e(&self, y: Label) -> &[f64] {
        &self.w[self.layout.e(y)]
    }

    pub fn w_s(&self, y: Label) -> &[f64] {
        &self.w[self.layout.s(y)]
    }

    pub fn w_f(&self, y: Label) -> f64 {
        self.w[self.layout.f(y)]
    }

    pub fn w_b(&self, y: Label) -> f64 {
        self.w[self.layout.b(y)]
    }

    pub fn w_p(&self) -> f64 {
        self.w[self.layout.p()]
    }

    /// Clamps the pairwise weight at zero so inference stays submodular.
    pub fn project(&mut self) {
        project_pairwise(self.layout, &mut self.w);
    }

    pub(crate) fn check_bundle(&self, fb: &FeatureBundle) -> Result<()> {
        if fb.phi_e.len() != self.e_len() {
            return Err(Error::ModelMismatch {
                expected: self.e_len(),
                actual: fb.phi_e.len(),
            });
        }
        Ok(())
    }
}

pub(crate) fn project_pairwise(layout: Layout, w: &mut [f64]) {
    let p = layout.p();
    w[p] = w[p].max(0.0);
}

/// One training image: features, region graph and existence label.
#[derive(Clone, Debug)]
pub struct LabeledInstance {
    pub features: FeatureBundle,
    pub graph: RegionGraph,
    pub y: Label,
}

impl LabeledInstance {
    pub fn new(features: FeatureBundle, graph: RegionGraph, y: Label) -> Result<Self> {
        check_label(y)?;
        if graph.n_nodes() != features.n_regions()
            || features.areas.len() != features.n_regions()
            || features.border.len() != features.n_regions()
        {
            return Err(Error::DimensionMismatch(format!(
                "graph has {} nodes, features {} regions",
                graph.n_nodes(),
                features.n_regions()
            )));
        }
        Ok(Self { features, graph, y })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_blocks_tile_the_vector() {
        let l = Layout::new(5);
        assert_eq!(l.len(), 2 * (5 + 35 + 2) + 1);
        assert_eq!(l.e(0), 0..5);
        assert_eq!(l.e(1), 5..10);
        assert_eq!(l.s(0), 10..45);
        assert_eq!(l.s(1), 45..80);
        assert_eq!(
            (l.f(0), l.f(1), l.b(0), l.b(1), l.p()),
            (80, 81, 82, 83, 84)
        );
    }

    #[test]
    fn projection_clamps_only_the_pairwise_weight() {
        let mut w = ModelParams::from_vec(1, vec![-1.0; Layout::new(1).len()]).unwrap();
        w.project();
        assert_eq!(w.w_p(), 0.0);
        assert_eq!(w.w_f(0), -1.0);
    }

    #[test]
    fn from_vec_checks_length() {
        assert!(matches!(
            ModelParams::from_vec(3, vec![0.0; 4]),
            Err(Error::LengthMismatch { .. })
        ));
    }
}
