//! Smooths a binary region labeling over the region graph and renders it.
//!
//! With `L = D - V` the graph Laplacian of the pairwise weights, the diffused
//! scores solve `(I + gamma L) z' = gamma h`. The system is symmetric
//! positive definite for `gamma > 0`; small systems are factored densely,
//! larger ones use Jacobi-preconditioned conjugate gradients.

use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::imaging::Segmentation;
use crate::model::Label;
use crate::mrf::RegionGraph;
use crate::util::min_max;

/// Largest system solved by dense Cholesky factorization.
pub const DENSE_MAX: usize = 64;
/// Required infinity-norm residual of the linear solve.
pub const RESIDUAL_TOL: f64 = 1e-8;
const CG_TOL: f64 = 1e-10;

/// Applies `(I + gamma L)` to `x`.
fn apply(graph: &RegionGraph, gamma: f64, x: &[f64]) -> Vec<f64> {
    let mut out = x.to_vec();
    for &(j, k, v) in graph.edges() {
        let d = gamma * v * (x[j] - x[k]);
        out[j] += d;
        out[k] -= d;
    }
    out
}

/// Dense `(I + gamma L)`.
pub fn system_matrix(graph: &RegionGraph, gamma: f64) -> DMatrix<f64> {
    let n = graph.n_nodes();
    let mut m = DMatrix::identity(n, n);
    for &(j, k, v) in graph.edges() {
        m[(j, j)] += gamma * v;
        m[(k, k)] += gamma * v;
        m[(j, k)] -= gamma * v;
        m[(k, j)] -= gamma * v;
    }
    m
}

fn dense_solve(graph: &RegionGraph, gamma: f64, rhs: &[f64]) -> Result<Vec<f64>> {
    let m = system_matrix(graph, gamma);
    let chol = m
        .cholesky()
        .ok_or_else(|| Error::SingularSystem("diffusion system is not positive definite".into()))?;
    Ok(chol
        .solve(&DVector::from_column_slice(rhs))
        .as_slice()
        .to_vec())
}

fn cg_solve(graph: &RegionGraph, gamma: f64, rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len();
    let mut diag = vec![1.0; n];
    for &(j, k, v) in graph.edges() {
        diag[j] += gamma * v;
        diag[k] += gamma * v;
    }
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut x = vec![0.0; n];
    let mut r = rhs.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(a, d)| a / d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let target = CG_TOL * dot(rhs, rhs).sqrt().max(1.0);
    for _ in 0..10 * n + 100 {
        if dot(&r, &r).sqrt() <= target {
            break;
        }
        let ap = apply(graph, gamma, &p);
        let step = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    x
}

/// Raw diffused scores `z'` before normalization.
pub fn solve_diffusion(h: &[bool], graph: &RegionGraph, gamma: f64) -> Result<Vec<f64>> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidArgument(format!("gamma {gamma} must be > 0")));
    }
    if h.len() != graph.n_nodes() {
        return Err(Error::DimensionMismatch(format!(
            "{} labels for {} graph nodes",
            h.len(),
            graph.n_nodes()
        )));
    }
    let rhs: Vec<f64> = h.iter().map(|&on| if on { gamma } else { 0.0 }).collect();
    let z = if h.len() <= DENSE_MAX {
        dense_solve(graph, gamma, &rhs)?
    } else {
        cg_solve(graph, gamma, &rhs)
    };
    let residual = apply(graph, gamma, &z)
        .iter()
        .zip(&rhs)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if !(residual <= RESIDUAL_TOL) {
        return Err(Error::SolveFailure {
            residual,
            tolerance: RESIDUAL_TOL,
        });
    }
    Ok(z)
}

/// Diffused region scores in [0, 1]: min-max normalized, or clamped when
/// the raw scores are constant.
pub fn diffuse(h: &[bool], graph: &RegionGraph, gamma: f64) -> Result<Vec<f64>> {
    let mut z = solve_diffusion(h, graph, gamma)?;
    let (lo, hi) = min_max(&z);
    let range = hi - lo;
    if range <= 1e-9 * hi.abs().max(1.0) {
        z.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
    } else {
        z.iter_mut()
            .for_each(|v| *v = ((*v - lo) / range).clamp(0.0, 1.0));
    }
    Ok(z)
}

/// Per-pixel saliency map with the predicted existence label.
#[derive(Clone, Debug, PartialEq)]
pub struct SaliencyMap {
    pub z: Vec<f64>,
    pub width: usize,
    pub height: usize,
    /// Row-major values in [0, 1].
    pub pixels: Vec<f64>,
    pub existence: Label,
}

impl SaliencyMap {
    /// 8-bit gray levels, `round(255 z)`.
    pub fn to_gray8(&self) -> Vec<u8> {
        self.pixels
            .iter()
            .map(|v| (255.0 * v).round().clamp(0.0, 255.0) as u8)
            .collect()
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        let img =
            image::GrayImage::from_raw(self.width as u32, self.height as u32, self.to_gray8())
                .expect("buffer matches dimensions");
        img.save_with_format(path, image::ImageFormat::Png)
            .map_err(|e| match e {
                image::ImageError::IoError(source) => Error::io(path, source),
                other => Error::Format(other.to_string()),
            })
    }
}

/// Paints every pixel with its region's score. With `force_black` a
/// prediction of "no salient object" yields the all-zero map.
pub fn render(
    z: &[f64],
    seg: &Segmentation,
    y_star: Label,
    force_black: bool,
) -> Result<SaliencyMap> {
    if z.len() != seg.n_regions() {
        return Err(Error::DimensionMismatch(format!(
            "{} scores for {} regions",
            z.len(),
            seg.n_regions()
        )));
    }
    let pixels = if force_black && y_star == 0 {
        vec![0.0; seg.labels().len()]
    } else {
        seg.labels().iter().map(|&l| z[l]).collect()
    };
    Ok(SaliencyMap {
        z: z.to_vec(),
        width: seg.width(),
        height: seg.height(),
        pixels,
        existence: y_star,
    })
}
