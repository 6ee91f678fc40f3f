use std::collections::BTreeSet;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Top = 0,
    Bottom = 1,
    Left = 2,
    Right = 3,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Top, Side::Bottom, Side::Left, Side::Right];
}

/// Geometry of one superpixel.
#[derive(Clone, Debug, PartialEq)]
pub struct Region {
    /// Pixel count.
    pub area: usize,
    /// Mean pixel-center position, normalized by width and height.
    pub centroid: [f64; 2],
    /// Touches the outer one-pixel frame (member of the pseudo-background).
    pub is_border: bool,
    /// Which image sides the region touches, indexed by [`Side`].
    pub sides: [bool; 4],
}

/// A partition of the image into 4-connected regions labelled `0..N`.
#[derive(Clone, Debug, PartialEq)]
pub struct Segmentation {
    width: usize,
    height: usize,
    labels: Vec<usize>,
    /// Public so hand-built fixtures can override geometry.
    pub regions: Vec<Region>,
}

impl Segmentation {
    /// Validates a label map and derives region geometry.
    pub fn from_labels(width: usize, height: usize, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != width * height || labels.is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for a {width}x{height} grid",
                labels.len()
            )));
        }
        let n = labels.iter().max().map_or(0, |&m| m + 1);
        let mut area = vec![0usize; n];
        let mut sum = vec![[0.0f64; 2]; n];
        let mut sides = vec![[false; 4]; n];
        for y in 0..height {
            for x in 0..width {
                let l = labels[y * width + x];
                area[l] += 1;
                sum[l][0] += x as f64 + 0.5;
                sum[l][1] += y as f64 + 0.5;
                let s = &mut sides[l];
                s[Side::Top as usize] |= y == 0;
                s[Side::Bottom as usize] |= y + 1 == height;
                s[Side::Left as usize] |= x == 0;
                s[Side::Right as usize] |= x + 1 == width;
            }
        }
        if let Some(empty) = area.iter().position(|&a| a == 0) {
            return Err(Error::InvalidArgument(format!("region {empty} is empty")));
        }
        let components = count_components(width, height, &labels);
        if components != n {
            return Err(Error::InvalidArgument(format!(
                "{n} labels but {components} connected components"
            )));
        }
        let regions = (0..n)
            .map(|l| Region {
                area: area[l],
                centroid: [
                    sum[l][0] / (area[l] as f64 * width as f64),
                    sum[l][1] / (area[l] as f64 * height as f64),
                ],
                is_border: sides[l].iter().any(|&s| s),
                sides: sides[l],
            })
            .collect();
        Ok(Self {
            width,
            height,
            labels,
            regions,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, x: usize, y: usize) -> usize {
        self.labels[y * self.width + x]
    }

    pub fn n_regions(&self) -> usize {
        self.regions.len()
    }

    pub fn areas(&self) -> Vec<f64> {
        self.regions.iter().map(|r| r.area as f64).collect()
    }

    /// Areas divided by the pixel count.
    pub fn normalized_areas(&self) -> Vec<f64> {
        let total = (self.width * self.height) as f64;
        self.regions.iter().map(|r| r.area as f64 / total).collect()
    }

    pub fn border_flags(&self) -> Vec<bool> {
        self.regions.iter().map(|r| r.is_border).collect()
    }

    /// Pixel-adjacent region pairs `(j, k)` with `j < k`, sorted.
    pub fn adjacency(&self) -> Vec<(usize, usize)> {
        let mut pairs = BTreeSet::new();
        let w = self.width;
        for y in 0..self.height {
            for x in 0..w {
                let a = self.labels[y * w + x];
                if x + 1 < w {
                    let b = self.labels[y * w + x + 1];
                    if a != b {
                        pairs.insert((a.min(b), a.max(b)));
                    }
                }
                if y + 1 < self.height {
                    let b = self.labels[(y + 1) * w + x];
                    if a != b {
                        pairs.insert((a.min(b), a.max(b)));
                    }
                }
            }
        }
        pairs.into_iter().collect()
    }

    /// Neighbor lists derived from [`Segmentation::adjacency`].
    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut nbrs = vec![Vec::new(); self.n_regions()];
        for (j, k) in self.adjacency() {
            nbrs[j].push(k);
            nbrs[k].push(j);
        }
        nbrs
    }
}

/// Labels 4-connected components of equal label; returns the component id per
/// pixel (ids assigned in scan order) and the number of components.
pub(crate) fn connected_components(
    width: usize,
    height: usize,
    labels: &[usize],
) -> (Vec<usize>, usize) {
    let mut comp = vec![usize::MAX; labels.len()];
    let mut next = 0;
    let mut stack = Vec::new();
    for start in 0..labels.len() {
        if comp[start] != usize::MAX {
            continue;
        }
        comp[start] = next;
        stack.push(start);
        while let Some(p) = stack.pop() {
            let (x, y) = (p % width, p / width);
            let mut visit = |q: usize| {
                if comp[q] == usize::MAX && labels[q] == labels[start] {
                    comp[q] = next;
                    stack.push(q);
                }
            };
            if x > 0 {
                visit(p - 1);
            }
            if x + 1 < width {
                visit(p + 1);
            }
            if y > 0 {
                visit(p - width);
            }
            if y + 1 < height {
                visit(p + width);
            }
        }
        next += 1;
    }
    (comp, next)
}

fn count_components(width: usize, height: usize, labels: &[usize]) -> usize {
    connected_components(width, height, labels).1
}
