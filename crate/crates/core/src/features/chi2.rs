//! Homogeneous kernel map for the additive chi-square kernel.
//!
//! Each nonnegative component `x` expands into `2n + 1` values
//! `sqrt(x L k(0))`, and for `j = 1..=n`
//! `sqrt(2 x L k(jL)) * (cos(jL ln x), sin(jL ln x))`, where `k` is the
//! spectrum of the chi-square kernel, `k(w) = sech(pi w)`, and `L` the
//! sampling period. Inner products of mapped vectors approximate
//! `sum_i 2 x_i y_i / (x_i + y_i)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Chi2Params {
    pub order: usize,
    pub period: f64,
}

impl Default for Chi2Params {
    fn default() -> Self {
        Self {
            order: 2,
            period: 0.6,
        }
    }
}

impl Chi2Params {
    /// Output values per input component.
    pub fn expansion(&self) -> usize {
        2 * self.order + 1
    }
}

fn spectrum(omega: f64) -> f64 {
    1.0 / (PI * omega).cosh()
}

pub fn chi2_map(v: &[f64], params: &Chi2Params) -> Result<Vec<f64>> {
    if !(params.period > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "sampling period must be positive, got {}",
            params.period
        )));
    }
    if let Some(bad) = v.iter().find(|x| !(**x >= 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "chi-square map needs nonnegative input, got {bad}"
        )));
    }
    let l = params.period;
    let weights: Vec<f64> = (0..=params.order)
        .map(|j| {
            let k = spectrum(j as f64 * l);
            if j == 0 {
                l * k
            } else {
                2.0 * l * k
            }
        })
        .collect();
    let mut out = Vec::with_capacity(v.len() * params.expansion());
    for &x in v {
        if x == 0.0 {
            out.extend(std::iter::repeat_n(0.0, params.expansion()));
            continue;
        }
        let lx = x.ln();
        out.push((x * weights[0]).sqrt());
        for (j, w) in weights.iter().enumerate().skip(1) {
            let a = (x * w).sqrt();
            let phase = j as f64 * l * lx;
            out.push(a * phase.cos());
            out.push(a * phase.sin());
        }
    }
    Ok(out)
}
