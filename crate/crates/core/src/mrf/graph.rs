use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::imaging::{RegionAppearance, Segmentation};

/// Undirected region adjacency graph with similarity weights in (0, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct RegionGraph {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl RegionGraph {
    /// Validates edges: in range, no self-loops, no duplicates (either
    /// orientation), weights in (0, 1].
    pub fn new(n: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for &(j, k, v) in &edges {
            if j >= n || k >= n {
                return Err(Error::InvalidArgument(format!(
                    "edge ({j}, {k}) out of range for {n} nodes"
                )));
            }
            if j == k {
                return Err(Error::InvalidArgument(format!("self-loop on {j}")));
            }
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "edge ({j}, {k}) weight {v} outside (0, 1]"
                )));
            }
            if !seen.insert((j.min(k), j.max(k))) {
                return Err(Error::InvalidArgument(format!("duplicate edge ({j}, {k})")));
            }
        }
        Ok(Self { n, edges })
    }

    pub fn n_nodes(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// Weighted degree `d_ii = sum_j v_ij` per node.
    pub fn degrees(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for &(j, k, v) in &self.edges {
            d[j] += v;
            d[k] += v;
        }
        d
    }
}

/// One edge per pixel-adjacent region pair, weighted by
/// `exp(-|c_j - c_k|^2 / (2 sigma_c^2))` on normalized mean Lab colors.
pub fn build_graph(
    seg: &Segmentation,
    app: &RegionAppearance,
    sigma_c: f64,
) -> Result<RegionGraph> {
    if !(sigma_c > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "sigma_c must be positive, got {sigma_c}"
        )));
    }
    if app.len() != seg.n_regions() {
        return Err(Error::DimensionMismatch(format!(
            "{} descriptors for {} regions",
            app.len(),
            seg.n_regions()
        )));
    }
    let edges = seg
        .adjacency()
        .into_iter()
        .map(|(j, k)| {
            let cj = app.regions[j].lab_mean;
            let ck = app.regions[k].lab_mean;
            let d2: f64 = (0..3).map(|c| (cj[c] - ck[c]).powi(2)).sum();
            // floor keeps the weight strictly positive under underflow
            (
                j,
                k,
                (-d2 / (2.0 * sigma_c * sigma_c))
                    .exp()
                    .max(f64::MIN_POSITIVE),
            )
        })
        .collect();
    RegionGraph::new(seg.n_regions(), edges)
}
