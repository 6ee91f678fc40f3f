//! Boundary connectivity from geodesic appearance distances.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{per_channel, ChannelMatrix, CONSTANT_EPS};
use crate::imaging::{Channel, RegionAppearance, Segmentation};
use crate::util::minmax_normalize;

#[derive(PartialEq)]
struct Visit {
    cost: f64,
    node: usize,
}

impl Eq for Visit {}

impl Ord for Visit {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Visit {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest paths over a weighted neighbor list.
pub(crate) fn dijkstra(adj: &[Vec<(usize, f64)>], source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adj.len()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Visit {
        cost: 0.0,
        node: source,
    });
    while let Some(Visit { cost, node }) = heap.pop() {
        if cost > dist[node] {
            continue;
        }
        for &(next, w) in &adj[node] {
            let c = cost + w;
            if c < dist[next] {
                dist[next] = c;
                heap.push(Visit {
                    cost: c,
                    node: next,
                });
            }
        }
    }
    dist
}

/// Soft boundary length over square root of soft spanning area, mapped
/// through `exp(-b^2 / 2 sigma_b^2)` so weakly connected regions score high.
pub fn boundary_connectivity(
    app: &RegionAppearance,
    seg: &Segmentation,
    sigma_g: f64,
    sigma_b: f64,
) -> ChannelMatrix {
    let n = app.len();
    let areas = seg.normalized_areas();
    let nbrs = seg.neighbors();
    per_channel(n, |ch: Channel| {
        let adj: Vec<Vec<(usize, f64)>> = nbrs
            .iter()
            .enumerate()
            .map(|(j, list)| list.iter().map(|&k| (k, app.distance(j, k, ch))).collect())
            .collect();
        let mut score: Vec<f64> = (0..n)
            .map(|i| {
                let geo = dijkstra(&adj, i);
                let mut span = 0.0;
                let mut boundary = 0.0;
                for (j, d) in geo.iter().enumerate() {
                    let s = areas[j] * (-d * d / (2.0 * sigma_g * sigma_g)).exp();
                    span += s;
                    if seg.regions[j].is_border {
                        boundary += s;
                    }
                }
                let bnd_con = boundary / span.sqrt();
                (-bnd_con * bnd_con / (2.0 * sigma_b * sigma_b)).exp()
            })
            .collect();
        minmax_normalize(&mut score, CONSTANT_EPS);
        score
    })
}
