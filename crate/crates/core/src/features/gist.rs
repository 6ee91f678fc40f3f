//! GIST-style scene descriptor: a Gabor-like filter bank applied in the
//! frequency domain, pooled over a 4x4 grid.

use std::f64::consts::PI;
use std::sync::OnceLock;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::CONSTANT_EPS;
use crate::imaging::{resize_plane, Image};
use crate::util::{min_max, minmax_normalize};

pub const GIST_SIDE: usize = 128;
pub const GIST_SCALES: usize = 4;
pub const GIST_ORIENTATIONS: usize = 8;
pub const GIST_FILTERS: usize = GIST_SCALES * GIST_ORIENTATIONS;
pub const GIST_GRID: usize = 4;
pub const GIST_CELLS: usize = GIST_GRID * GIST_GRID;
pub const GIST_DIM: usize = GIST_FILTERS * GIST_CELLS;

/// Peak frequency of the finest scale, in cycles per pixel; each coarser
/// scale halves it.
const FINEST_PEAK: f64 = 0.25;
const RADIAL_BANDWIDTH: f64 = 0.55;
const ANGULAR_SIGMA: f64 = 0.25;

/// Center frequency (cycles/pixel) of the filters at `scale`.
pub fn scale_peak(scale: usize) -> f64 {
    FINEST_PEAK / (1u32 << scale) as f64
}

fn frequency(k: usize) -> f64 {
    let k = k as f64;
    let n = GIST_SIDE as f64;
    if k < n / 2.0 {
        k / n
    } else {
        (k - n) / n
    }
}

/// Transfer functions indexed `scale * 8 + orientation`. Orientation `o`
/// passes frequency vectors at angle `o * pi / 8` from the horizontal axis,
/// so orientation 0 responds to vertical structures.
fn filter_bank() -> &'static Vec<Vec<f64>> {
    static BANK: OnceLock<Vec<Vec<f64>>> = OnceLock::new();
    BANK.get_or_init(|| {
        let mut bank = Vec::with_capacity(GIST_FILTERS);
        for s in 0..GIST_SCALES {
            let peak = scale_peak(s);
            let sigma_r = RADIAL_BANDWIDTH * peak;
            for o in 0..GIST_ORIENTATIONS {
                let theta = o as f64 * PI / GIST_ORIENTATIONS as f64;
                let mut h = vec![0.0; GIST_SIDE * GIST_SIDE];
                for ky in 0..GIST_SIDE {
                    let v = frequency(ky);
                    for kx in 0..GIST_SIDE {
                        if kx == 0 && ky == 0 {
                            continue;
                        }
                        let u = frequency(kx);
                        let rho = (u * u + v * v).sqrt();
                        let phi = v.atan2(u);
                        let dphi = (phi - theta + PI / 2.0).rem_euclid(PI) - PI / 2.0;
                        h[ky * GIST_SIDE + kx] =
                            (-(rho - peak).powi(2) / (2.0 * sigma_r * sigma_r)).exp()
                                * (-dphi * dphi / (2.0 * ANGULAR_SIGMA * ANGULAR_SIGMA)).exp();
                    }
                }
                bank.push(h);
            }
        }
        bank
    })
}

fn fft2(data: &mut [Complex<f64>], inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(GIST_SIDE)
    } else {
        planner.plan_fft_forward(GIST_SIDE)
    };
    for row in data.chunks_mut(GIST_SIDE) {
        fft.process(row);
    }
    let mut col = vec![Complex::new(0.0, 0.0); GIST_SIDE];
    for x in 0..GIST_SIDE {
        for y in 0..GIST_SIDE {
            col[y] = data[y * GIST_SIDE + x];
        }
        fft.process(&mut col);
        for y in 0..GIST_SIDE {
            data[y * GIST_SIDE + x] = col[y];
        }
    }
}

/// Mean filter-response magnitude per cell for every filter, before the
/// final normalization. Layout: `filter * 16 + cell_y * 4 + cell_x`.
pub(crate) fn gist_energies(img: &Image) -> Vec<f64> {
    let gray = resize_plane(&img.gray(), img.width(), img.height(), GIST_SIDE, GIST_SIDE);
    let (lo, hi) = min_max(&gray);
    if hi - lo <= CONSTANT_EPS {
        return vec![0.0; GIST_DIM];
    }
    let mean = gray.iter().sum::<f64>() / gray.len() as f64;
    let mut spectrum: Vec<Complex<f64>> =
        gray.iter().map(|&g| Complex::new(g - mean, 0.0)).collect();
    fft2(&mut spectrum, false);

    let cell = GIST_SIDE / GIST_GRID;
    let scale = 1.0 / (GIST_SIDE * GIST_SIDE) as f64;
    let mut out = Vec::with_capacity(GIST_DIM);
    let mut buf = vec![Complex::new(0.0, 0.0); spectrum.len()];
    for h in filter_bank() {
        for ((b, s), g) in buf.iter_mut().zip(&spectrum).zip(h) {
            *b = s * g;
        }
        fft2(&mut buf, true);
        for cy in 0..GIST_GRID {
            for cx in 0..GIST_GRID {
                let mut acc = 0.0;
                for y in cy * cell..(cy + 1) * cell {
                    for x in cx * cell..(cx + 1) * cell {
                        acc += buf[y * GIST_SIDE + x].norm() * scale;
                    }
                }
                out.push(acc / (cell * cell) as f64);
            }
        }
    }
    out
}

/// 512-dimensional scene descriptor, min-max normalized per image.
pub fn gist(img: &Image) -> Vec<f64> {
    let mut v = gist_energies(img);
    minmax_normalize(&mut v, CONSTANT_EPS);
    v
}
