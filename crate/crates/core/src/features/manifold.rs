//! Background-query manifold ranking, one query per image side.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};

use super::{per_channel, ChannelMatrix, CONSTANT_EPS};
use crate::error::{Error, Result};
use crate::imaging::{Channel, RegionAppearance, Segmentation, Side};
use crate::util::minmax_normalize;

const DIAGONAL_JITTER: f64 = 1e-9;

/// Ranking graph: adjacent pairs, two-hop pairs and every pair of border regions.
pub(crate) fn ranking_edges(seg: &Segmentation) -> Vec<(usize, usize)> {
    let nbrs = seg.neighbors();
    let mut edges = BTreeSet::new();
    for (j, list) in nbrs.iter().enumerate() {
        for &k in list {
            edges.insert((j.min(k), j.max(k)));
            for &m in &nbrs[k] {
                if m != j {
                    edges.insert((j.min(m), j.max(m)));
                }
            }
        }
    }
    let border: Vec<usize> = (0..seg.n_regions())
        .filter(|&i| seg.regions[i].is_border)
        .collect();
    for (a, &j) in border.iter().enumerate() {
        for &k in &border[a + 1..] {
            edges.insert((j, k));
        }
    }
    edges.into_iter().collect()
}

/// Ranks each region against the regions touching each image side and
/// combines the four complemented rankings multiplicatively.
pub fn manifold_ranking(
    app: &RegionAppearance,
    seg: &Segmentation,
    sigma_m: f64,
    alpha: f64,
) -> Result<ChannelMatrix> {
    let n = app.len();
    if n < 2 {
        return Err(Error::DegenerateInput(format!(
            "manifold ranking needs at least 2 regions, got {n}"
        )));
    }
    let edges = ranking_edges(seg);
    let queries: Vec<DVector<f64>> = Side::ALL
        .iter()
        .map(|&s| {
            DVector::from_iterator(
                n,
                seg.regions
                    .iter()
                    .map(|r| f64::from(u8::from(r.sides[s as usize]))),
            )
        })
        .collect();
    let mut failure = None;
    let out = per_channel(n, |ch| {
        match rank_channel(app, &edges, &queries, ch, sigma_m, alpha) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                vec![0.0; n]
            }
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

fn rank_channel(
    app: &RegionAppearance,
    edges: &[(usize, usize)],
    queries: &[DVector<f64>],
    ch: Channel,
    sigma_m: f64,
    alpha: f64,
) -> Result<Vec<f64>> {
    let n = app.len();
    let mut system = DMatrix::<f64>::zeros(n, n);
    for &(j, k) in edges {
        let w = (-app.distance(j, k, ch) / sigma_m).exp();
        system[(j, j)] += w;
        system[(k, k)] += w;
        system[(j, k)] -= alpha * w;
        system[(k, j)] -= alpha * w;
    }
    let inverse = match system.clone().lu().try_inverse() {
        Some(inv) => inv,
        None => {
            for i in 0..n {
                system[(i, i)] += DIAGONAL_JITTER;
            }
            system.lu().try_inverse().ok_or_else(|| {
                Error::SingularSystem(format!("manifold ranking on channel {ch:?}"))
            })?
        }
    };
    let mut combined = vec![1.0; n];
    for y in queries {
        let mut f: Vec<f64> = (&inverse * y).iter().copied().collect();
        minmax_normalize(&mut f, CONSTANT_EPS);
        for (c, v) in combined.iter_mut().zip(&f) {
            *c *= 1.0 - v;
        }
    }
    minmax_normalize(&mut combined, CONSTANT_EPS);
    Ok(combined)
}
