#![allow(dead_code)]

use std::path::{Path, PathBuf};

use lssal::Config;
use lssal_cli::synth::synth_dataset;
use lssal_cli::Manifest;

/// Synthetic set written under `dir`, with its manifest loaded.
pub fn synth(dir: &Path, n: usize, seed: u64) -> (PathBuf, Manifest) {
    let path = synth_dataset(n, seed, dir).unwrap();
    let m = Manifest::load(&path).unwrap();
    (path, m)
}

/// Keeps test runs short: fewer superpixels and iterations.
pub fn quick_config() -> Config {
    let mut cfg = Config::default();
    cfg.features.n_target = 60;
    cfg.train.max_iters = 15;
    cfg
}

pub fn subset(m: &Manifest, keep: impl Fn(usize, &lssal_cli::Record) -> bool) -> Manifest {
    let records = m
        .records
        .iter()
        .enumerate()
        .filter(|(i, r)| keep(*i, r))
        .map(|(_, r)| r.clone())
        .collect();
    Manifest::new(m.name.clone(), m.base.clone(), records)
}
