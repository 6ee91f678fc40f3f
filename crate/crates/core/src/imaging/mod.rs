//! Image I/O, color spaces, superpixels and region appearance descriptors.

mod channels;
mod descriptors;
mod segmentation;
mod slic;

pub use channels::{build_channels, hsv_from_rgb, lab_from_rgb, ChannelStack, LBP_BINS};
pub use descriptors::{
    chi2_distance, euclidean, region_descriptors, Channel, RegionAppearance, RegionDescriptor,
    HIST_BINS, N_CHANNELS,
};
pub use segmentation::{Region, Segmentation, Side};
pub use slic::slic_superpixels;

use std::path::Path;

use crate::error::{Error, Result};

/// Smallest side length the feature pipeline accepts.
pub const MIN_SIDE: usize = 16;

/// An RGB image with components in [0, 1], stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    rgb: Vec<[f64; 3]>,
}

impl Image {
    pub fn new(width: usize, height: usize, rgb: Vec<[f64; 3]>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument("image has zero extent".into()));
        }
        if rgb.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{} pixels for a {width}x{height} image",
                rgb.len()
            )));
        }
        if rgb.iter().flatten().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(Error::InvalidArgument(
                "color components must lie in [0, 1]".into(),
            ));
        }
        Ok(Self { width, height, rgb })
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [f64; 3],
    ) -> Result<Self> {
        let mut rgb = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                rgb.push(f(x, y));
            }
        }
        Self::new(width, height, rgb)
    }

    pub fn from_rgb8(img: &image::RgbImage) -> Self {
        let rgb = img
            .pixels()
            .map(|p| {
                [
                    p[0] as f64 / 255.0,
                    p[1] as f64 / 255.0,
                    p[2] as f64 / 255.0,
                ]
            })
            .collect();
        Self {
            width: img.width() as usize,
            height: img.height() as usize,
            rgb,
        }
    }

    pub fn to_rgb8(&self) -> image::RgbImage {
        let mut out = image::RgbImage::new(self.width as u32, self.height as u32);
        for (px, c) in out.pixels_mut().zip(&self.rgb) {
            *px = image::Rgb(c.map(|v| (v * 255.0).round().clamp(0.0, 255.0) as u8));
        }
        out
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[f64; 3]] {
        &self.rgb
    }

    pub fn pixel(&self, x: usize, y: usize) -> [f64; 3] {
        self.rgb[y * self.width + x]
    }

    /// Luma plane (Rec. 601 weights).
    pub fn gray(&self) -> Vec<f64> {
        self.rgb.iter().map(|c| gray_of(*c)).collect()
    }

    pub(crate) fn check_min_size(&self) -> Result<()> {
        if self.width < MIN_SIDE || self.height < MIN_SIDE {
            return Err(Error::InvalidArgument(format!(
                "image is {}x{}, both sides must be at least {MIN_SIDE}",
                self.width, self.height
            )));
        }
        Ok(())
    }
}

pub(crate) fn gray_of(c: [f64; 3]) -> f64 {
    0.299 * c[0] + 0.587 * c[1] + 0.114 * c[2]
}

/// Decodes an 8-bit RGB image (PNG or JPEG) from disk.
pub fn load_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let decoded = image::load_from_memory(&bytes).map_err(|e| Error::Decode {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    Ok(Image::from_rgb8(&decoded.to_rgb8()))
}

/// Bilinear resampling of a single plane (pixel-center aligned, clamped edges).
pub(crate) fn resize_plane(
    src: &[f64],
    width: usize,
    height: usize,
    out_w: usize,
    out_h: usize,
) -> Vec<f64> {
    let mut out = Vec::with_capacity(out_w * out_h);
    let sx = width as f64 / out_w as f64;
    let sy = height as f64 / out_h as f64;
    for oy in 0..out_h {
        let (y0, y1, fy) = sample_axis((oy as f64 + 0.5) * sy - 0.5, height);
        for ox in 0..out_w {
            let (x0, x1, fx) = sample_axis((ox as f64 + 0.5) * sx - 0.5, width);
            let top = src[y0 * width + x0] * (1.0 - fx) + src[y0 * width + x1] * fx;
            let bot = src[y1 * width + x0] * (1.0 - fx) + src[y1 * width + x1] * fx;
            out.push(top * (1.0 - fy) + bot * fy);
        }
    }
    out
}

/// Two neighboring source indices and the interpolation weight of the second.
pub(crate) fn sample_axis(pos: f64, len: usize) -> (usize, usize, f64) {
    let pos = pos.clamp(0.0, (len - 1) as f64);
    let i0 = pos.floor() as usize;
    let i1 = (i0 + 1).min(len - 1);
    (i0, i1, pos - i0 as f64)
}
