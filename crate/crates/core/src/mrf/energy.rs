use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Benefit-maximization problem over binary labels:
/// `sum_j [h_j u1_j + (1 - h_j) u0_j] - sum_(j,k) [h_j != h_k] lambda_jk`.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyProblem {
    pub unary1: Vec<f64>,
    pub unary0: Vec<f64>,
    pub pairwise: Vec<(usize, usize, f64)>,
}

impl EnergyProblem {
    pub fn n_nodes(&self) -> usize {
        self.unary1.len()
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let n = self.n_nodes();
        if self.unary0.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} unary1 vs {} unary0 entries",
                n,
                self.unary0.len()
            )));
        }
        if let Some(v) = self
            .unary1
            .iter()
            .chain(&self.unary0)
            .find(|v| !v.is_finite())
        {
            return Err(Error::InvalidArgument(format!("non-finite unary {v}")));
        }
        for &(j, k, lambda) in &self.pairwise {
            if j >= n || k >= n || j == k {
                return Err(Error::InvalidArgument(format!("bad edge ({j}, {k})")));
            }
            if !(lambda >= 0.0) || !lambda.is_finite() {
                return Err(Error::NonSubmodular {
                    j,
                    k,
                    penalty: lambda,
                });
            }
        }
        Ok(())
    }

    /// Objective value of `labels`, summed in a fixed order.
    pub fn evaluate(&self, labels: &[bool]) -> f64 {
        let mut value = 0.0;
        for (j, &h) in labels.iter().enumerate() {
            value += if h { self.unary1[j] } else { self.unary0[j] };
        }
        for &(j, k, lambda) in &self.pairwise {
            if labels[j] != labels[k] {
                value -= lambda;
            }
        }
        value
    }
}

/// Debug dump: `node <j> <unary1> <unary0>` and `edge <j> <k> <lambda>`
/// lines, with floats in round-trip precision.
impl fmt::Display for EnergyProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (j, (u1, u0)) in self.unary1.iter().zip(&self.unary0).enumerate() {
            writeln!(f, "node {j} {u1:?} {u0:?}")?;
        }
        for (j, k, l) in &self.pairwise {
            writeln!(f, "edge {j} {k} {l:?}")?;
        }
        Ok(())
    }
}

impl FromStr for EnergyProblem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut nodes = Vec::new();
        let mut pairwise = Vec::new();
        let bad = |line: &str| Error::Format(format!("bad energy dump line: {line:?}"));
        for line in s
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
        {
            let parts: Vec<&str> = line.split_whitespace().collect();
            match parts.as_slice() {
                ["node", j, u1, u0] => {
                    let j: usize = j.parse().map_err(|_| bad(line))?;
                    if j != nodes.len() {
                        return Err(Error::Format(format!("node {j} out of order")));
                    }
                    nodes.push((
                        u1.parse::<f64>().map_err(|_| bad(line))?,
                        u0.parse::<f64>().map_err(|_| bad(line))?,
                    ));
                }
                ["edge", j, k, l] => pairwise.push((
                    j.parse().map_err(|_| bad(line))?,
                    k.parse().map_err(|_| bad(line))?,
                    l.parse().map_err(|_| bad(line))?,
                )),
                _ => return Err(bad(line)),
            }
        }
        let (unary1, unary0) = nodes.into_iter().unzip();
        Ok(Self {
            unary1,
            unary0,
            pairwise,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dump_round_trips() {
        let p = EnergyProblem {
            unary1: vec![0.1, -2.5, 1.0 / 3.0],
            unary0: vec![0.0, 1e-17, 7.0],
            pairwise: vec![(0, 1, 0.25), (1, 2, 3.0)],
        };
        let text = p.to_string();
        assert!(text.starts_with("node 0 0.1 0.0\n"));
        assert_eq!(text.parse::<EnergyProblem>().unwrap(), p);
    }

    #[test]
    fn evaluate_counts_cut_edges() {
        let p = EnergyProblem {
            unary1: vec![1.0, 2.0],
            unary0: vec![0.5, 0.0],
            pairwise: vec![(0, 1, 0.75)],
        };
        assert_eq!(p.evaluate(&[true, true]), 3.0);
        assert_eq!(p.evaluate(&[false, true]), 1.75);
    }

    #[test]
    fn negative_penalty_is_non_submodular() {
        let p = EnergyProblem {
            unary1: vec![0.0; 2],
            unary0: vec![0.0; 2],
            pairwise: vec![(0, 1, -1.0)],
        };
        assert!(matches!(p.validate(), Err(Error::NonSubmodular { .. })));
    }
}
