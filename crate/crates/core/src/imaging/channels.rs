use super::{gray_of, Image};

/// Number of LBP histogram bins: 58 uniform patterns plus one catch-all.
pub const LBP_BINS: usize = 59;

// sRGB (D65) -> XYZ.
const RGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.412_456_4, 0.357_576_1, 0.180_437_5],
    [0.212_672_9, 0.715_152_2, 0.072_175_0],
    [0.019_333_9, 0.119_192_0, 0.950_304_1],
];

// a* and b* are mapped from this symmetric range onto [0, 1].
const AB_RANGE: f64 = 110.0;

/// Per-pixel appearance planes derived from one image.
#[derive(Clone, Debug)]
pub struct ChannelStack {
    pub width: usize,
    pub height: usize,
    pub rgb: Vec<[f64; 3]>,
    pub hsv: Vec<[f64; 3]>,
    pub lab: Vec<[f64; 3]>,
    /// Uniform-LBP bin per pixel, in `0..LBP_BINS`.
    pub lbp: Vec<u8>,
    pub gray: Vec<f64>,
}

pub fn build_channels(img: &Image) -> ChannelStack {
    let rgb = img.pixels().to_vec();
    let hsv = rgb.iter().map(|&c| hsv_from_rgb(c)).collect();
    let lab = rgb.iter().map(|&c| lab_from_rgb(c)).collect();
    let gray: Vec<f64> = rgb.iter().map(|&c| gray_of(c)).collect();
    let lbp = lbp_codes(&gray, img.width(), img.height());
    ChannelStack {
        width: img.width(),
        height: img.height(),
        rgb,
        hsv,
        lab,
        lbp,
        gray,
    }
}

/// HSV with hue scaled from degrees to [0, 1).
pub fn hsv_from_rgb([r, g, b]: [f64; 3]) -> [f64; 3] {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let hue = if delta <= 0.0 {
        0.0
    } else if max == r {
        ((g - b) / delta).rem_euclid(6.0)
    } else if max == g {
        (b - r) / delta + 2.0
    } else {
        (r - g) / delta + 4.0
    } / 6.0;
    let sat = if max <= 0.0 { 0.0 } else { delta / max };
    [hue.clamp(0.0, 1.0 - f64::EPSILON), sat, max]
}

/// CIE L*a*b* under D65, affinely scaled so L in [0,100] and a*, b* in
/// [-110, 110] land on [0, 1].
pub fn lab_from_rgb(rgb: [f64; 3]) -> [f64; 3] {
    let lin = rgb.map(srgb_to_linear);
    let mut xyz = [0.0; 3];
    for (row, out) in RGB_TO_XYZ.iter().zip(xyz.iter_mut()) {
        *out = row[0] * lin[0] + row[1] * lin[1] + row[2] * lin[2];
    }
    // Reference white is the image of (1, 1, 1) under the same matrix.
    let f = [0, 1, 2].map(|i| {
        let white: f64 = RGB_TO_XYZ[i].iter().sum();
        lab_f(xyz[i] / white)
    });
    let l = 116.0 * f[1] - 16.0;
    let a = 500.0 * (f[0] - f[1]);
    let b = 200.0 * (f[1] - f[2]);
    [
        (l / 100.0).clamp(0.0, 1.0),
        ((a + AB_RANGE) / (2.0 * AB_RANGE)).clamp(0.0, 1.0),
        ((b + AB_RANGE) / (2.0 * AB_RANGE)).clamp(0.0, 1.0),
    ]
}

fn srgb_to_linear(c: f64) -> f64 {
    if c <= 0.040_45 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

fn lab_f(t: f64) -> f64 {
    const DELTA: f64 = 6.0 / 29.0;
    if t > DELTA * DELTA * DELTA {
        t.cbrt()
    } else {
        t / (3.0 * DELTA * DELTA) + 4.0 / 29.0
    }
}

const NEIGHBORS: [(isize, isize); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
];

fn lbp_codes(gray: &[f64], width: usize, height: usize) -> Vec<u8> {
    let table = uniform_table();
    let clamp = |v: isize, len: usize| v.clamp(0, len as isize - 1) as usize;
    let mut codes = Vec::with_capacity(gray.len());
    for y in 0..height {
        for x in 0..width {
            let center = gray[y * width + x];
            let mut pattern = 0u8;
            for (bit, (dx, dy)) in NEIGHBORS.iter().enumerate() {
                let nx = clamp(x as isize + dx, width);
                let ny = clamp(y as isize + dy, height);
                if gray[ny * width + nx] > center {
                    pattern |= 1 << bit;
                }
            }
            codes.push(table[pattern as usize]);
        }
    }
    codes
}

/// Maps each 8-bit pattern to its uniform-pattern bin (ascending pattern
/// order), or to bin 58 when it has more than two circular transitions.
fn uniform_table() -> [u8; 256] {
    let mut table = [(LBP_BINS - 1) as u8; 256];
    let mut next = 0u8;
    for p in 0..=255u8 {
        if (p ^ p.rotate_right(1)).count_ones() <= 2 {
            table[p as usize] = next;
            next += 1;
        }
    }
    debug_assert_eq!(next as usize, LBP_BINS - 1);
    table
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_red_hsv() {
        assert_eq!(hsv_from_rgb([1.0, 0.0, 0.0]), [0.0, 1.0, 1.0]);
    }

    #[test]
    fn hsv_primaries() {
        let g = hsv_from_rgb([0.0, 1.0, 0.0]);
        assert!((g[0] - 1.0 / 3.0).abs() < 1e-12);
        let b = hsv_from_rgb([0.0, 0.0, 1.0]);
        assert!((b[0] - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(hsv_from_rgb([0.0; 3]), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn mid_gray_lab_is_neutral() {
        // Oracle: a neutral color has X/Xn = Y/Yn = Z/Zn, so a* = b* = 0 and the
        // scaled components sit at 0.5. L* for sRGB 0.5 is 53.389 (reference tables).
        let lab = lab_from_rgb([0.5, 0.5, 0.5]);
        assert!((lab[1] - 0.5).abs() < 1e-9);
        assert!((lab[2] - 0.5).abs() < 1e-9);
        assert!((lab[0] - 0.533_889).abs() < 1e-4);
    }

    #[test]
    fn lab_white_and_black() {
        let w = lab_from_rgb([1.0; 3]);
        assert!((w[0] - 1.0).abs() < 1e-9);
        assert_eq!(lab_from_rgb([0.0; 3])[0], 0.0);
    }

    #[test]
    fn uniform_table_has_58_patterns() {
        let table = uniform_table();
        assert_eq!(table[0], 0);
        assert_eq!(table[255], 57);
        assert_eq!(table.iter().filter(|&&b| b == 58).count(), 256 - 58);
    }

    #[test]
    fn constant_image_lbp_is_zero_pattern() {
        let img = Image::from_fn(20, 18, |_, _| [0.3, 0.3, 0.3]).unwrap();
        let stack = build_channels(&img);
        assert!(stack.lbp.iter().all(|&c| c == 0));
    }

    #[test]
    fn lbp_codes_in_range() {
        let img = Image::from_fn(17, 17, |x, y| {
            let v = ((x * 7 + y * 13) % 11) as f64 / 10.0;
            [v, 1.0 - v, 0.5]
        })
        .unwrap();
        let stack = build_channels(&img);
        assert!(stack.lbp.iter().all(|&c| (c as usize) < LBP_BINS));
        assert!(stack.lbp.iter().any(|&c| c != 0));
    }
}
