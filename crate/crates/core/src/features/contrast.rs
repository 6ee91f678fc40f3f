//! Global contrast, spatial distribution and backgroundness.

use super::{per_channel, ChannelMatrix, CONSTANT_EPS};
use crate::error::{Error, Result};
use crate::imaging::{RegionAppearance, RegionDescriptor, Segmentation};
use crate::util::minmax_normalize;

fn sq_dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

/// Appearance contrast to all other regions, weighted by their area and by a
/// Gaussian of centroid distance.
pub fn global_contrast(app: &RegionAppearance, seg: &Segmentation, sigma_sp: f64) -> ChannelMatrix {
    let n = app.len();
    let areas = seg.normalized_areas();
    let denom = 2.0 * sigma_sp * sigma_sp;
    let spatial: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (-sq_dist(seg.regions[i].centroid, seg.regions[j].centroid) / denom).exp())
                .collect()
        })
        .collect();
    per_channel(n, |ch| {
        let mut raw: Vec<f64> = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| j != i)
                    .map(|j| areas[j] * spatial[i][j] * app.distance(i, j, ch))
                    .sum()
            })
            .collect();
        minmax_normalize(&mut raw, CONSTANT_EPS);
        raw
    })
}

/// Appearance-weighted spatial variance, inverted so that compact regions
/// score high. A constant variance maps to 1 on every region.
pub fn spatial_distribution(
    app: &RegionAppearance,
    seg: &Segmentation,
    sigma_a: f64,
) -> ChannelMatrix {
    let n = app.len();
    let denom = 2.0 * sigma_a * sigma_a;
    per_channel(n, |ch| {
        let mut spread: Vec<f64> = (0..n)
            .map(|i| {
                let weights: Vec<f64> = (0..n)
                    .map(|j| (-app.distance(i, j, ch).powi(2) / denom).exp())
                    .collect();
                let total: f64 = weights.iter().sum();
                let mut mu = [0.0; 2];
                for (w, r) in weights.iter().zip(&seg.regions) {
                    mu[0] += w / total * r.centroid[0];
                    mu[1] += w / total * r.centroid[1];
                }
                weights
                    .iter()
                    .zip(&seg.regions)
                    .map(|(w, r)| w / total * sq_dist(r.centroid, mu))
                    .sum()
            })
            .collect();
        minmax_normalize(&mut spread, CONSTANT_EPS);
        spread.iter().map(|d| 1.0 - d).collect()
    })
}

/// Appearance distance to the area-pooled pseudo-background.
pub fn backgroundness(app: &RegionAppearance, seg: &Segmentation) -> Result<ChannelMatrix> {
    let border: Vec<(&RegionDescriptor, f64)> = app
        .regions
        .iter()
        .zip(&seg.regions)
        .filter(|(_, r)| r.is_border)
        .map(|(d, r)| (d, r.area as f64))
        .collect();
    if border.is_empty() {
        return Err(Error::DegenerateInput(
            "no region touches the image border".into(),
        ));
    }
    let pooled = RegionDescriptor::pooled(border);
    Ok(per_channel(app.len(), |ch| {
        let mut raw: Vec<f64> = app
            .regions
            .iter()
            .map(|d| d.distance(&pooled, ch))
            .collect();
        minmax_normalize(&mut raw, CONSTANT_EPS);
        raw
    }))
}
