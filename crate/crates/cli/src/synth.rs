//! Synthetic desk-scale dataset: half the images show one high-contrast
//! rectangle on a plain or lightly textured background, half are
//! stationary textures with no salient object.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use image::{GrayImage, Luma, Rgb, RgbImage};
use lssal::imaging::lab_from_rgb;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, io_err, CliError, CliResult};
use crate::manifest::{Manifest, Record};

pub const SIDE: u32 = 96;
/// Minimum gap between the rectangle and the image frame.
pub const MARGIN: u32 = 8;
pub const RECT_MIN: u32 = 24;
pub const RECT_MAX: u32 = 48;
/// Lower bound on the normalized Lab distance between mean rectangle and
/// mean background colors.
pub const MIN_LAB_DISTANCE: f64 = 0.3;
pub const MANIFEST_NAME: &str = "synth.jsonl";

/// Axis-aligned rectangle `[x0, x0 + w) x [y0, y0 + h)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rect {
    pub x0: u32,
    pub y0: u32,
    pub w: u32,
    pub h: u32,
}

impl Rect {
    pub fn contains(&self, x: u32, y: u32) -> bool {
        x >= self.x0 && x < self.x0 + self.w && y >= self.y0 && y < self.y0 + self.h
    }
}

fn to_u8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

fn random_color(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> [f64; 3] {
    [(); 3].map(|_| rng.gen_range(lo..hi))
}

fn lab_distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    let (a, b) = (lab_from_rgb(a), lab_from_rgb(b));
    a.iter()
        .zip(&b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn mean_color(img: &RgbImage, mut keep: impl FnMut(u32, u32) -> bool) -> [f64; 3] {
    let mut sum = [0.0; 3];
    let mut n = 0.0;
    for (x, y, p) in img.enumerate_pixels() {
        if keep(x, y) {
            for c in 0..3 {
                sum[c] += p[c] as f64 / 255.0;
            }
            n += 1.0;
        }
    }
    sum.map(|s| s / n)
}

/// Normalized Lab distance between the mean colors inside and outside `r`.
pub fn rect_contrast(img: &RgbImage, r: &Rect) -> f64 {
    let inside = mean_color(img, |x, y| r.contains(x, y));
    let outside = mean_color(img, |x, y| !r.contains(x, y));
    lab_distance(inside, outside)
}

fn salient_image(rng: &mut ChaCha8Rng) -> (RgbImage, Rect) {
    loop {
        let w = rng.gen_range(RECT_MIN..=RECT_MAX);
        let h = rng.gen_range(RECT_MIN..=RECT_MAX);
        let rect = Rect {
            x0: rng.gen_range(MARGIN..=SIDE - MARGIN - w),
            y0: rng.gen_range(MARGIN..=SIDE - MARGIN - h),
            w,
            h,
        };
        let bg = random_color(rng, 0.1, 0.9);
        let fg = random_color(rng, 0.0, 1.0);
        if lab_distance(bg, fg) < MIN_LAB_DISTANCE + 0.05 {
            continue;
        }
        let noise = rng.gen_range(0.0..0.05);
        let img = RgbImage::from_fn(SIDE, SIDE, |x, y| {
            let base = if rect.contains(x, y) { fg } else { bg };
            Rgb(base.map(|c| to_u8(c + rng.gen_range(-noise..=noise))))
        });
        if rect_contrast(&img, &rect) >= MIN_LAB_DISTANCE + 0.01 {
            return (img, rect);
        }
    }
}

fn noise_texture(rng: &mut ChaCha8Rng) -> RgbImage {
    const GRID: usize = 13;
    let base = random_color(rng, 0.2, 0.8);
    let amp = rng.gen_range(0.1..0.3);
    let coarse: Vec<[f64; 3]> = (0..GRID * GRID)
        .map(|_| base.map(|c| c + rng.gen_range(-amp..amp)))
        .collect();
    let cell = (SIDE as f64 - 1.0) / (GRID as f64 - 1.0);
    RgbImage::from_fn(SIDE, SIDE, |x, y| {
        let (gx, gy) = (x as f64 / cell, y as f64 / cell);
        let (ix, iy) = ((gx as usize).min(GRID - 2), (gy as usize).min(GRID - 2));
        let (fx, fy) = (gx - ix as f64, gy - iy as f64);
        let at = |i: usize, j: usize| coarse[j * GRID + i];
        let mut px = [0.0; 3];
        for (c, v) in px.iter_mut().enumerate() {
            let top = at(ix, iy)[c] * (1.0 - fx) + at(ix + 1, iy)[c] * fx;
            let bottom = at(ix, iy + 1)[c] * (1.0 - fx) + at(ix + 1, iy + 1)[c] * fx;
            *v = top * (1.0 - fy) + bottom * fy + rng.gen_range(-0.04..0.04);
        }
        Rgb(px.map(to_u8))
    })
}

fn stripe_texture(rng: &mut ChaCha8Rng) -> RgbImage {
    let a = random_color(rng, 0.0, 1.0);
    let b = random_color(rng, 0.0, 1.0);
    let theta = rng.gen_range(0.0..PI);
    let period = rng.gen_range(6.0..16.0);
    let (c, s) = (theta.cos(), theta.sin());
    RgbImage::from_fn(SIDE, SIDE, |x, y| {
        let t = 0.5 + 0.5 * (2.0 * PI * (x as f64 * c + y as f64 * s) / period).sin();
        Rgb([0, 1, 2].map(|k| to_u8(a[k] * t + b[k] * (1.0 - t) + rng.gen_range(-0.03..0.03))))
    })
}

fn save_png<P>(img: &image::ImageBuffer<P, Vec<P::Subpixel>>, path: &Path) -> CliResult<()>
where
    P: image::PixelWithColorType,
    [P::Subpixel]: image::EncodableLayout,
{
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| match e {
            image::ImageError::IoError(source) => io_err(path, source),
            other => CliError::Core(lssal::Error::Format(other.to_string())),
        })
}

/// Writes `n` images, their masks and `synth.jsonl` under `out_dir`.
/// Even indices are salient, odd indices background. Returns the manifest
/// path.
pub fn synth_dataset(n: usize, seed: u64, out_dir: &Path) -> CliResult<PathBuf> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(invalid(format!(
            "image count must be even and >= 2, got {n}"
        )));
    }
    for sub in ["images", "masks"] {
        let d = out_dir.join(sub);
        fs::create_dir_all(&d).map_err(|e| io_err(d, e))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(n);
    for i in 0..n {
        let name = format!("img_{i:04}.png");
        let (img, rect) = if i % 2 == 0 {
            let (img, r) = salient_image(&mut rng);
            (img, Some(r))
        } else if rng.gen_bool(0.5) {
            (noise_texture(&mut rng), None)
        } else {
            (stripe_texture(&mut rng), None)
        };
        let mask = GrayImage::from_fn(SIDE, SIDE, |x, y| {
            Luma([if rect.is_some_and(|r| r.contains(x, y)) {
                255
            } else {
                0
            }])
        });
        let image = Path::new("images").join(&name);
        let mask_rel = Path::new("masks").join(&name);
        save_png(&img, &out_dir.join(&image))?;
        save_png(&mask, &out_dir.join(&mask_rel))?;
        records.push(Record {
            image,
            label: usize::from(rect.is_some()),
            mask: Some(mask_rel),
        });
    }
    let path = out_dir.join(MANIFEST_NAME);
    Manifest::new("synth", out_dir, records).save(&path)?;
    Ok(path)
}
