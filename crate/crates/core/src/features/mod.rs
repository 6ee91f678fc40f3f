//! Regional saliency cues, the global existence descriptor and the explicit
//! chi-square feature map.
//!
//! Every regional cue is computed on the seven appearance channels of
//! [`Channel`] and min-max normalized per image and channel. The 35 regional
//! columns are laid out family-major: `column = family * 7 + channel`, with
//! families ordered global contrast, spatial distribution, backgroundness,
//! manifold ranking, boundary connectivity.

mod cache;
mod chi2;
mod connectivity;
mod contrast;
mod gist;
mod global;
mod manifold;

pub use cache::{read_record, write_record, FeatureRecord, FEATURE_MAGIC};
pub use chi2::{chi2_map, Chi2Params};
pub use connectivity::boundary_connectivity;
pub use contrast::{backgroundness, global_contrast, spatial_distribution};
pub use gist::{gist, GIST_CELLS, GIST_DIM, GIST_FILTERS, GIST_ORIENTATIONS, GIST_SCALES};
pub use global::{global_existence, GlobalFeatures, GRID_CELLS, GRID_DIM};
pub use manifold::manifold_ranking;

use crate::error::{Error, Result};
use crate::imaging::{
    build_channels, region_descriptors, slic_superpixels, Image, RegionAppearance, Segmentation,
    N_CHANNELS,
};
use crate::mrf::{build_graph, RegionGraph};

pub const N_FAMILIES: usize = 5;
pub const REGIONAL_DIM: usize = N_FAMILIES * N_CHANNELS;
pub const GLOBAL_DIM: usize = GRID_DIM + GIST_DIM;

/// Per-region values for each of the seven appearance channels.
pub type ChannelMatrix = Vec<[f64; N_CHANNELS]>;
pub type RegionalRow = [f64; REGIONAL_DIM];

/// Tunable constants of segmentation and feature extraction.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureParams {
    pub n_target: usize,
    pub compactness: f64,
    /// Spatial falloff of global contrast (normalized coordinates).
    pub sigma_sp: f64,
    /// Appearance falloff of spatial distribution.
    pub sigma_a: f64,
    /// Affinity scale of manifold ranking.
    pub sigma_m: f64,
    pub mr_alpha: f64,
    /// Geodesic falloff of boundary connectivity.
    pub sigma_g: f64,
    pub sigma_b: f64,
    /// Clamp applied before the log-likelihood transforms.
    pub eps: f64,
    /// Color falloff of the pairwise similarity `v_jk`.
    pub sigma_c: f64,
}

impl Default for FeatureParams {
    fn default() -> Self {
        Self {
            n_target: 200,
            compactness: 10.0,
            sigma_sp: 0.25,
            sigma_a: 0.25,
            sigma_m: 0.1,
            mr_alpha: 0.99,
            sigma_g: 0.25,
            sigma_b: 1.0,
            eps: 1e-3,
            sigma_c: 0.25,
        }
    }
}

/// Regional saliency `phi_s` and its foreground / background negative
/// log-likelihood transforms.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionSaliencyFeatures {
    pub phi_s: Vec<RegionalRow>,
    pub phi_f: Vec<RegionalRow>,
    pub phi_b: Vec<RegionalRow>,
}

impl RegionSaliencyFeatures {
    /// Derives `phi_f = -ln(1 - s)` and `phi_b = -ln(s)` with `s` clamped to
    /// `[eps, 1 - eps]`.
    pub fn from_phi_s(phi_s: Vec<RegionalRow>, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 0.5) {
            return Err(Error::InvalidArgument(format!(
                "eps must be in (0, 0.5), got {eps}"
            )));
        }
        if phi_s.iter().flatten().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidArgument(
                "phi_s entries must lie in [0, 1]".into(),
            ));
        }
        let transform = |f: fn(f64) -> f64| -> Vec<RegionalRow> {
            phi_s
                .iter()
                .map(|row| row.map(|s| f(s.clamp(eps, 1.0 - eps))))
                .collect()
        };
        let phi_f = transform(|s| -(1.0 - s).ln());
        let phi_b = transform(|s| -s.ln());
        Ok(Self {
            phi_s,
            phi_f,
            phi_b,
        })
    }

    pub fn n_regions(&self) -> usize {
        self.phi_s.len()
    }
}

/// Concatenates the five cue matrices `[gc | sp | bg | mr | bc]`.
pub fn assemble_regional(
    families: [&ChannelMatrix; N_FAMILIES],
    eps: f64,
) -> Result<RegionSaliencyFeatures> {
    let n = families[0].len();
    if let Some(bad) = families.iter().find(|m| m.len() != n) {
        return Err(Error::DimensionMismatch(format!(
            "cue matrices have {} and {} rows",
            n,
            bad.len()
        )));
    }
    let phi_s = (0..n)
        .map(|i| {
            let mut row = [0.0; REGIONAL_DIM];
            for (f, m) in families.iter().enumerate() {
                row[f * N_CHANNELS..(f + 1) * N_CHANNELS].copy_from_slice(&m[i]);
            }
            row
        })
        .collect();
    RegionSaliencyFeatures::from_phi_s(phi_s, eps)
}

/// Everything the model needs about one image.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureBundle {
    pub regional: RegionSaliencyFeatures,
    pub phi_e: Vec<f64>,
    /// Region areas in pixels.
    pub areas: Vec<f64>,
    /// Pseudo-background membership.
    pub border: Vec<bool>,
}

impl FeatureBundle {
    pub fn n_regions(&self) -> usize {
        self.regional.n_regions()
    }

    /// Replaces `phi_e` with its explicit chi-square expansion.
    pub fn map_global_chi2(&mut self, params: &Chi2Params) -> Result<()> {
        self.phi_e = chi2_map(&self.phi_e, params)?;
        Ok(())
    }
}

/// Full per-image extraction result.
#[derive(Clone, Debug)]
pub struct Extraction {
    pub segmentation: Segmentation,
    pub appearance: RegionAppearance,
    pub bundle: FeatureBundle,
    pub graph: RegionGraph,
}

/// Five regional cue matrices in family order.
pub fn regional_cues(
    app: &RegionAppearance,
    seg: &Segmentation,
    params: &FeatureParams,
) -> Result<[ChannelMatrix; N_FAMILIES]> {
    Ok([
        global_contrast(app, seg, params.sigma_sp),
        spatial_distribution(app, seg, params.sigma_a),
        backgroundness(app, seg)?,
        manifold_ranking(app, seg, params.sigma_m, params.mr_alpha)?,
        boundary_connectivity(app, seg, params.sigma_g, params.sigma_b),
    ])
}

/// Segments the image and computes all regional and global features.
pub fn extract(img: &Image, params: &FeatureParams) -> Result<Extraction> {
    img.check_min_size()?;
    let segmentation = slic_superpixels(img, params.n_target, params.compactness)?;
    let stack = build_channels(img);
    let appearance = region_descriptors(&stack, &segmentation)?;
    let [gc, sp, bg, mr, bc] = regional_cues(&appearance, &segmentation, params)?;
    let regional = assemble_regional([&gc, &sp, &bg, &mr, &bc], params.eps)?;
    let gist512 = gist(img);
    let global = global_existence(&regional, &segmentation, &gist512)?;
    let graph = build_graph(&segmentation, &appearance, params.sigma_c)?;
    let bundle = FeatureBundle {
        regional,
        phi_e: global.phi_e,
        areas: segmentation.areas(),
        border: segmentation.border_flags(),
    };
    Ok(Extraction {
        segmentation,
        appearance,
        bundle,
        graph,
    })
}

pub(crate) fn per_channel(
    n: usize,
    mut f: impl FnMut(crate::imaging::Channel) -> Vec<f64>,
) -> ChannelMatrix {
    let mut out = vec![[0.0; N_CHANNELS]; n];
    for (c, ch) in crate::imaging::Channel::ALL.into_iter().enumerate() {
        for (row, v) in out.iter_mut().zip(f(ch)) {
            row[c] = v;
        }
    }
    out
}

pub(crate) const CONSTANT_EPS: f64 = 1e-12;
