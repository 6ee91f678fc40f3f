//! SLIC superpixels in CIELAB with connectivity enforcement.

use std::collections::BTreeSet;

use super::channels::lab_from_rgb;
use super::segmentation::connected_components;
use super::{Image, Segmentation};
use crate::error::{Error, Result};

const ITERATIONS: usize = 10;

#[derive(Clone, Copy, Debug)]
struct Center {
    lab: [f64; 3],
    x: f64,
    y: f64,
}

/// Segments `img` into roughly `n_target` compact superpixels.
///
/// Clustering uses unscaled L*a*b* with spatial distance weighted by
/// `compactness / S`, where `S` is the grid interval. Afterwards every label
/// keeps only its largest 4-connected component; stray fragments and
/// components smaller than a quarter cell are merged into their largest
/// adjacent region.
pub fn slic_superpixels(img: &Image, n_target: usize, compactness: f64) -> Result<Segmentation> {
    if n_target < 2 {
        return Err(Error::InvalidArgument(format!(
            "n_target must be at least 2, got {n_target}"
        )));
    }
    if !(compactness > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "compactness must be positive, got {compactness}"
        )));
    }
    let (w, h) = (img.width(), img.height());
    let lab: Vec<[f64; 3]> = img
        .pixels()
        .iter()
        .map(|&c| {
            let s = lab_from_rgb(c);
            [s[0] * 100.0, s[1] * 220.0 - 110.0, s[2] * 220.0 - 110.0]
        })
        .collect();

    let nx = ((n_target as f64 * w as f64 / h as f64).sqrt().ceil() as usize).clamp(1, w);
    let ny = ((n_target as f64 / nx as f64).round() as usize).clamp(1, h);
    let step_x = w as f64 / nx as f64;
    let step_y = h as f64 / ny as f64;
    let interval = (step_x * step_y).sqrt();
    let radius = step_x.max(step_y).ceil() as isize;
    let spatial_weight = (compactness / interval).powi(2);

    let mut centers = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let x = (((i as f64 + 0.5) * step_x) as usize).min(w - 1);
            let y = (((j as f64 + 0.5) * step_y) as usize).min(h - 1);
            let (x, y) = lowest_gradient(&lab, w, h, x, y);
            centers.push(Center {
                lab: lab[y * w + x],
                x: x as f64,
                y: y as f64,
            });
        }
    }

    let mut labels: Vec<usize> = (0..w * h)
        .map(|p| {
            let cx = (((p % w) as f64 / step_x) as usize).min(nx - 1);
            let cy = (((p / w) as f64 / step_y) as usize).min(ny - 1);
            cy * nx + cx
        })
        .collect();
    let mut dist = vec![f64::INFINITY; w * h];

    for _ in 0..ITERATIONS {
        dist.iter_mut().for_each(|d| *d = f64::INFINITY);
        for (k, c) in centers.iter().enumerate() {
            let (cx, cy) = (c.x.round() as isize, c.y.round() as isize);
            let x0 = (cx - radius).max(0) as usize;
            let x1 = ((cx + radius) as usize).min(w - 1);
            let y0 = (cy - radius).max(0) as usize;
            let y1 = ((cy + radius) as usize).min(h - 1);
            for y in y0..=y1 {
                for x in x0..=x1 {
                    let p = y * w + x;
                    let q = lab[p];
                    let dc = (q[0] - c.lab[0]).powi(2)
                        + (q[1] - c.lab[1]).powi(2)
                        + (q[2] - c.lab[2]).powi(2);
                    let ds = (x as f64 - c.x).powi(2) + (y as f64 - c.y).powi(2);
                    let d = dc + ds * spatial_weight;
                    if d < dist[p] {
                        dist[p] = d;
                        labels[p] = k;
                    }
                }
            }
        }
        let mut acc = vec![[0.0f64; 6]; centers.len()];
        for (p, &k) in labels.iter().enumerate() {
            let a = &mut acc[k];
            a[0] += lab[p][0];
            a[1] += lab[p][1];
            a[2] += lab[p][2];
            a[3] += (p % w) as f64;
            a[4] += (p / w) as f64;
            a[5] += 1.0;
        }
        for (c, a) in centers.iter_mut().zip(&acc) {
            if a[5] > 0.0 {
                c.lab = [a[0] / a[5], a[1] / a[5], a[2] / a[5]];
                c.x = a[3] / a[5];
                c.y = a[4] / a[5];
            }
        }
    }

    let min_size = ((interval * interval / 4.0) as usize).max(1);
    let labels = enforce_connectivity(w, h, &labels, min_size);
    Segmentation::from_labels(w, h, labels)
}

/// Moves a seed to the lowest-gradient pixel of its 3x3 neighborhood; the
/// original position wins ties.
fn lowest_gradient(lab: &[[f64; 3]], w: usize, h: usize, x: usize, y: usize) -> (usize, usize) {
    let at = |x: isize, y: isize| {
        lab[(y.clamp(0, h as isize - 1) as usize) * w + x.clamp(0, w as isize - 1) as usize]
    };
    let grad = |x: isize, y: isize| {
        let (l, r, u, d) = (at(x - 1, y), at(x + 1, y), at(x, y - 1), at(x, y + 1));
        (0..3)
            .map(|i| (r[i] - l[i]).powi(2) + (d[i] - u[i]).powi(2))
            .sum::<f64>()
    };
    let (xi, yi) = (x as isize, y as isize);
    let mut best = (x, y);
    let mut best_g = grad(xi, yi);
    for dy in -1..=1isize {
        for dx in -1..=1isize {
            let (px, py) = (xi + dx, yi + dy);
            if px < 0 || py < 0 || px >= w as isize || py >= h as isize {
                continue;
            }
            let g = grad(px, py);
            if g < best_g {
                best_g = g;
                best = (px as usize, py as usize);
            }
        }
    }
    best
}

fn enforce_connectivity(w: usize, h: usize, labels: &[usize], min_size: usize) -> Vec<usize> {
    let (comp, n_comp) = connected_components(w, h, labels);
    let mut size = vec![0usize; n_comp];
    let mut comp_label = vec![0usize; n_comp];
    for (p, &c) in comp.iter().enumerate() {
        size[c] += 1;
        comp_label[c] = labels[p];
    }
    let mut largest: Vec<Option<usize>> = vec![None; labels.iter().max().map_or(0, |m| m + 1)];
    for c in 0..n_comp {
        let slot = &mut largest[comp_label[c]];
        if slot.is_none_or(|b| size[c] > size[b]) {
            *slot = Some(c);
        }
    }
    let mut adj = vec![BTreeSet::new(); n_comp];
    for y in 0..h {
        for x in 0..w {
            let a = comp[y * w + x];
            let mut link = |b: usize| {
                if a != b {
                    adj[a].insert(b);
                    adj[b].insert(a);
                }
            };
            if x + 1 < w {
                link(comp[y * w + x + 1]);
            }
            if y + 1 < h {
                link(comp[(y + 1) * w + x]);
            }
        }
    }

    let mut orphans: Vec<usize> = (0..n_comp)
        .filter(|&c| largest[comp_label[c]] != Some(c) || size[c] < min_size)
        .collect();
    orphans.sort_by_key(|&c| (size[c], c));

    let mut parent: Vec<usize> = (0..n_comp).collect();
    let mut area = size.clone();
    fn find(parent: &mut [usize], mut c: usize) -> usize {
        while parent[c] != c {
            parent[c] = parent[parent[c]];
            c = parent[c];
        }
        c
    }
    for c in orphans {
        let root = find(&mut parent, c);
        let mut target: Option<usize> = None;
        for &nb in &adj[c] {
            let r = find(&mut parent, nb);
            if r == root {
                continue;
            }
            target = match target {
                Some(t) if area[t] > area[r] || (area[t] == area[r] && t < r) => Some(t),
                _ => Some(r),
            };
        }
        if let Some(t) = target {
            parent[root] = t;
            area[t] += area[root];
        }
    }

    let mut relabel = vec![usize::MAX; n_comp];
    let mut next = 0;
    comp.iter()
        .map(|&c| {
            let r = find(&mut parent, c);
            if relabel[r] == usize::MAX {
                relabel[r] = next;
                next += 1;
            }
            relabel[r]
        })
        .collect()
}
