use super::channels::{ChannelStack, LBP_BINS};
use super::Segmentation;
use crate::error::{Error, Result};

/// Bins per color component; three components are concatenated.
pub const BINS_PER_COMPONENT: usize = 16;
pub const HIST_BINS: usize = 3 * BINS_PER_COMPONENT;
pub const N_CHANNELS: usize = 7;

/// The seven appearance channels saliency cues are computed on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Channel {
    RgbMean,
    RgbHist,
    HsvMean,
    HsvHist,
    LabMean,
    LabHist,
    LbpHist,
}

impl Channel {
    pub const ALL: [Channel; N_CHANNELS] = [
        Channel::RgbMean,
        Channel::RgbHist,
        Channel::HsvMean,
        Channel::HsvHist,
        Channel::LabMean,
        Channel::LabHist,
        Channel::LbpHist,
    ];

    pub fn is_histogram(self) -> bool {
        !matches!(self, Channel::RgbMean | Channel::HsvMean | Channel::LabMean)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegionDescriptor {
    pub rgb_mean: [f64; 3],
    pub hsv_mean: [f64; 3],
    pub lab_mean: [f64; 3],
    pub rgb_hist: [f64; HIST_BINS],
    pub hsv_hist: [f64; HIST_BINS],
    pub lab_hist: [f64; HIST_BINS],
    pub lbp_hist: [f64; LBP_BINS],
}

impl RegionDescriptor {
    pub fn zeros() -> Self {
        Self {
            rgb_mean: [0.0; 3],
            hsv_mean: [0.0; 3],
            lab_mean: [0.0; 3],
            rgb_hist: [0.0; HIST_BINS],
            hsv_hist: [0.0; HIST_BINS],
            lab_hist: [0.0; HIST_BINS],
            lbp_hist: [0.0; LBP_BINS],
        }
    }

    /// Mean vector (for mean channels) or histogram (for histogram channels).
    pub fn channel(&self, ch: Channel) -> &[f64] {
        match ch {
            Channel::RgbMean => &self.rgb_mean,
            Channel::RgbHist => &self.rgb_hist,
            Channel::HsvMean => &self.hsv_mean,
            Channel::HsvHist => &self.hsv_hist,
            Channel::LabMean => &self.lab_mean,
            Channel::LabHist => &self.lab_hist,
            Channel::LbpHist => &self.lbp_hist,
        }
    }

    fn channel_mut(&mut self, ch: Channel) -> &mut [f64] {
        match ch {
            Channel::RgbMean => &mut self.rgb_mean,
            Channel::RgbHist => &mut self.rgb_hist,
            Channel::HsvMean => &mut self.hsv_mean,
            Channel::HsvHist => &mut self.hsv_hist,
            Channel::LabMean => &mut self.lab_mean,
            Channel::LabHist => &mut self.lab_hist,
            Channel::LbpHist => &mut self.lbp_hist,
        }
    }

    /// chi-square distance for histogram channels, Euclidean for means.
    pub fn distance(&self, other: &Self, ch: Channel) -> f64 {
        if ch.is_histogram() {
            chi2_distance(self.channel(ch), other.channel(ch))
        } else {
            euclidean(self.channel(ch), other.channel(ch))
        }
    }

    /// Weighted average of descriptors. Every channel is a convex combination,
    /// so pooled histograms stay L1-normalized.
    pub fn pooled<'a>(items: impl IntoIterator<Item = (&'a RegionDescriptor, f64)>) -> Self {
        let mut out = Self::zeros();
        let mut total = 0.0;
        for (d, wgt) in items {
            total += wgt;
            for ch in Channel::ALL {
                for (o, v) in out.channel_mut(ch).iter_mut().zip(d.channel(ch)) {
                    *o += wgt * v;
                }
            }
        }
        if total > 0.0 {
            for ch in Channel::ALL {
                out.channel_mut(ch).iter_mut().for_each(|v| *v /= total);
            }
        }
        out
    }
}

/// `sum (p_i - q_i)^2 / (p_i + q_i)` over bins with positive mass; in [0, 2]
/// for L1-normalized inputs.
pub fn chi2_distance(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(&a, &b)| {
            let s = a + b;
            if s > 0.0 {
                (a - b) * (a - b) / s
            } else {
                0.0
            }
        })
        .sum()
}

pub fn euclidean(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Appearance descriptors for every region of a segmentation.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionAppearance {
    pub regions: Vec<RegionDescriptor>,
}

impl RegionAppearance {
    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    pub fn distance(&self, i: usize, j: usize, ch: Channel) -> f64 {
        self.regions[i].distance(&self.regions[j], ch)
    }
}

fn bin(v: f64) -> usize {
    ((v * BINS_PER_COMPONENT as f64) as usize).min(BINS_PER_COMPONENT - 1)
}

pub fn region_descriptors(stack: &ChannelStack, seg: &Segmentation) -> Result<RegionAppearance> {
    if stack.width != seg.width() || stack.height != seg.height() {
        return Err(Error::DimensionMismatch(format!(
            "channels are {}x{}, segmentation is {}x{}",
            stack.width,
            stack.height,
            seg.width(),
            seg.height()
        )));
    }
    let mut regions = vec![RegionDescriptor::zeros(); seg.n_regions()];
    for (p, &l) in seg.labels().iter().enumerate() {
        let d = &mut regions[l];
        let spaces = [
            (&stack.rgb[p], &mut d.rgb_mean, &mut d.rgb_hist),
            (&stack.hsv[p], &mut d.hsv_mean, &mut d.hsv_hist),
            (&stack.lab[p], &mut d.lab_mean, &mut d.lab_hist),
        ];
        for (px, mean, hist) in spaces {
            for c in 0..3 {
                mean[c] += px[c];
                hist[c * BINS_PER_COMPONENT + bin(px[c])] += 1.0;
            }
        }
        d.lbp_hist[stack.lbp[p] as usize] += 1.0;
    }
    for (d, r) in regions.iter_mut().zip(&seg.regions) {
        let area = r.area as f64;
        for ch in [Channel::RgbMean, Channel::HsvMean, Channel::LabMean] {
            d.channel_mut(ch).iter_mut().for_each(|v| *v /= area);
        }
        for ch in [Channel::RgbHist, Channel::HsvHist, Channel::LabHist] {
            d.channel_mut(ch).iter_mut().for_each(|v| *v /= 3.0 * area);
        }
        d.lbp_hist.iter_mut().for_each(|v| *v /= area);
    }
    Ok(RegionAppearance { regions })
}
