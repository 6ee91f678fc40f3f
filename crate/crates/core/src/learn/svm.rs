//! Linear SVM on global feature vectors, trained with the same minimizer.

use super::minimize::minimize;
use super::TrainConfig;
use crate::error::{Error, Result};
use crate::model::Label;
use crate::util::dot;

#[derive(Clone, Debug, PartialEq)]
pub struct LinearSvm {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearSvm {
    pub fn decision(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) + self.bias
    }

    pub fn predict(&self, x: &[f64]) -> Label {
        usize::from(self.decision(x) > 0.0)
    }
}

/// Hinge-loss linear classifier. The bias is learned as the weight of a
/// constant feature and is regularized with the rest.
pub fn train_linear_svm(
    features: &[Vec<f64>],
    labels: &[Label],
    cfg: &TrainConfig,
) -> Result<LinearSvm> {
    if features.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: features.len(),
            right: labels.len(),
        });
    }
    if !(labels.contains(&0) && labels.contains(&1)) {
        return Err(Error::InvalidArgument(
            "linear SVM needs both labels".into(),
        ));
    }
    if let Some(&y) = labels.iter().find(|&&y| y > 1) {
        return Err(Error::InvalidArgument(format!("label {y} is not 0 or 1")));
    }
    let d = features[0].len();
    if features.iter().any(|x| x.len() != d) {
        return Err(Error::DimensionMismatch(
            "feature vectors differ in length".into(),
        ));
    }
    let m = features.len() as f64;
    let oracle = |w: &[f64]| {
        let mut r = 0.0;
        let mut g = vec![0.0; d + 1];
        for (x, &y) in features.iter().zip(labels) {
            let sign = if y == 1 { 1.0 } else { -1.0 };
            let margin = sign * (dot(&w[..d], x) + w[d]);
            if margin < 1.0 {
                r += 1.0 - margin;
                for (gi, xi) in g.iter_mut().zip(x) {
                    *gi -= sign * xi;
                }
                g[d] -= sign;
            }
        }
        g.iter_mut().for_each(|v| *v /= m);
        Ok((r / m, g))
    };
    let (mut w, _) = minimize(d + 1, cfg, oracle, |_| {})?;
    let bias = w.pop().unwrap_or(0.0);
    Ok(LinearSvm { weights: w, bias })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separates_two_points() {
        let x = vec![vec![-1.0], vec![1.0]];
        let svm = train_linear_svm(&x, &[0, 1], &TrainConfig::default()).unwrap();
        assert_eq!(svm.predict(&x[0]), 0);
        assert_eq!(svm.predict(&x[1]), 1);
    }

    #[test]
    fn separates_shifted_clusters() {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..20 {
            let t = i as f64 * 0.05;
            x.push(vec![3.0 + t, 2.0 - t]);
            y.push(1);
            x.push(vec![2.0 - t, 3.0 + t]);
            y.push(0);
        }
        let svm = train_linear_svm(&x, &y, &TrainConfig::default()).unwrap();
        let acc = x
            .iter()
            .zip(&y)
            .filter(|(xi, &yi)| svm.predict(xi) == yi)
            .count();
        assert_eq!(acc, 40);
    }

    #[test]
    fn single_class_is_rejected() {
        let x = vec![vec![0.0], vec![1.0]];
        assert!(matches!(
            train_linear_svm(&x, &[1, 1], &TrainConfig::default()),
            Err(Error::InvalidArgument(_))
        ));
    }
}
