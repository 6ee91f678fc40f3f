//! Flat `key = value` run configuration.
//!
//! Blank lines and `#` comments are ignored. Every key is optional; missing
//! keys keep their defaults and unknown keys are rejected.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::features::{Chi2Params, FeatureParams};
use crate::learn::{Optimizer, TrainConfig};

pub const DEFAULT_GAMMA: f64 = 10.0;

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub features: FeatureParams,
    /// Diffusion strength.
    pub gamma: f64,
    pub chi2: Chi2Params,
    pub train: TrainConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            features: FeatureParams::default(),
            gamma: DEFAULT_GAMMA,
            chi2: Chi2Params::default(),
            train: TrainConfig::default(),
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad value {value:?} for {key}")))
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = Config::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidArgument(format!("line {}: expected key = value", lineno + 1))
            })?;
            c.set(key.trim(), value.trim())?;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let f = &mut self.features;
        match key {
            "n_target" => f.n_target = parse_value(key, value)?,
            "compactness" => f.compactness = parse_value(key, value)?,
            "sigma_sp" => f.sigma_sp = parse_value(key, value)?,
            "sigma_a" => f.sigma_a = parse_value(key, value)?,
            "sigma_m" => f.sigma_m = parse_value(key, value)?,
            "mr_alpha" => f.mr_alpha = parse_value(key, value)?,
            "sigma_g" => f.sigma_g = parse_value(key, value)?,
            "sigma_b" => f.sigma_b = parse_value(key, value)?,
            "eps" => f.eps = parse_value(key, value)?,
            "sigma_c" => f.sigma_c = parse_value(key, value)?,
            "gamma" => self.gamma = parse_value(key, value)?,
            "chi2_order" => self.chi2.order = parse_value(key, value)?,
            "chi2_period" => self.chi2.period = parse_value(key, value)?,
            "lambda" => self.train.lambda = parse_value(key, value)?,
            "max_iters" => self.train.max_iters = parse_value(key, value)?,
            "tol" => self.train.tol = parse_value(key, value)?,
            "optimizer" => self.train.optimizer = value.parse::<Optimizer>()?,
            "seed" => self.train.seed = parse_value(key, value)?,
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "unknown config key {key:?}"
                )))
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let f = &self.features;
        if f.n_target < 2 {
            return Err(Error::InvalidArgument("n_target must be >= 2".into()));
        }
        let positive = [
            ("compactness", f.compactness),
            ("sigma_sp", f.sigma_sp),
            ("sigma_a", f.sigma_a),
            ("sigma_m", f.sigma_m),
            ("sigma_g", f.sigma_g),
            ("sigma_b", f.sigma_b),
            ("sigma_c", f.sigma_c),
            ("gamma", self.gamma),
            ("chi2_period", self.chi2.period),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be > 0, got {v}"
                )));
            }
        }
        if !(f.mr_alpha > 0.0 && f.mr_alpha < 1.0) {
            return Err(Error::InvalidArgument("mr_alpha must lie in (0, 1)".into()));
        }
        if !(f.eps > 0.0 && f.eps < 0.5) {
            return Err(Error::InvalidArgument("eps must lie in (0, 0.5)".into()));
        }
        self.train.validate()
    }
}

/// Writes every key, so the output documents the full effective
/// configuration and parses back to the same value.
impl fmt::Display for Config {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        let f = &self.features;
        writeln!(out, "n_target = {}", f.n_target)?;
        writeln!(out, "compactness = {:?}", f.compactness)?;
        writeln!(out, "sigma_sp = {:?}", f.sigma_sp)?;
        writeln!(out, "sigma_a = {:?}", f.sigma_a)?;
        writeln!(out, "sigma_m = {:?}", f.sigma_m)?;
        writeln!(out, "mr_alpha = {:?}", f.mr_alpha)?;
        writeln!(out, "sigma_g = {:?}", f.sigma_g)?;
        writeln!(out, "sigma_b = {:?}", f.sigma_b)?;
        writeln!(out, "eps = {:?}", f.eps)?;
        writeln!(out, "sigma_c = {:?}", f.sigma_c)?;
        writeln!(out, "gamma = {:?}", self.gamma)?;
        writeln!(out, "chi2_order = {}", self.chi2.order)?;
        writeln!(out, "chi2_period = {:?}", self.chi2.period)?;
        writeln!(out, "lambda = {:?}", self.train.lambda)?;
        writeln!(out, "max_iters = {}", self.train.max_iters)?;
        writeln!(out, "tol = {:?}", self.train.tol)?;
        writeln!(out, "optimizer = {}", self.train.optimizer)?;
        writeln!(out, "seed = {}", self.train.seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_and_comments() {
        let c = Config::parse("# run\nlambda = 0.5\n\ngamma=3 # inline\noptimizer = subgradient\n")
            .unwrap();
        assert_eq!(c.train.lambda, 0.5);
        assert_eq!(c.gamma, 3.0);
        assert_eq!(c.train.optimizer, Optimizer::Subgradient);
        assert_eq!(c.features, FeatureParams::default());
    }

    #[test]
    fn echo_round_trips() {
        let mut c = Config::default();
        c.set("sigma_c", "0.125").unwrap();
        c.set("seed", "42").unwrap();
        assert_eq!(Config::parse(&c.to_string()).unwrap(), c);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(Config::parse("sigma = 1").is_err());
        assert!(Config::parse("lambda = abc").is_err());
        assert!(Config::parse("lambda = -1").is_err());
        assert!(Config::parse("n_target = 1").is_err());
        assert!(Config::parse("just words").is_err());
    }
}
