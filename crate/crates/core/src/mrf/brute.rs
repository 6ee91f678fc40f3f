use super::{EnergyProblem, Labeling};
use crate::error::{Error, Result};

pub const BRUTE_FORCE_MAX: usize = 20;

/// Exhaustive maximization. Among optima the labeling with the smallest
/// binary value (bit `j` = `h_j`) wins.
pub fn brute_force(prob: &EnergyProblem) -> Result<Labeling> {
    prob.validate()?;
    let n = prob.n_nodes();
    if n > BRUTE_FORCE_MAX {
        return Err(Error::TooLarge(n));
    }
    let decode = |mask: u32| (0..n).map(|j| mask >> j & 1 == 1).collect::<Vec<_>>();
    let mut best_mask = 0u32;
    let mut best = prob.evaluate(&decode(0));
    for mask in 1..(1u32 << n) {
        let v = prob.evaluate(&decode(mask));
        if v > best {
            best = v;
            best_mask = mask;
        }
    }
    Ok(Labeling {
        labels: decode(best_mask),
        value: best,
    })
}
