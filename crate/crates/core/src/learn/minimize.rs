//! Minimizes `lambda/2 |w|^2 + R(w)` given an oracle for `R` and one of its
//! subgradients.
//!
//! The bundle mode keeps cutting planes `<a_i, w> + b_i` of `R` and minimizes
//! the regularized piecewise-linear model plus a proximal term around a
//! stability center (the best point accepted so far), through the dual over
//! the simplex. `R` need not be convex, so planes are handled conservatively:
//!
//! - every plane is lowered when it overestimates the risk at a newly
//!   evaluated point, keeping the model below the objective there;
//! - relative to the center, a plane built at `w_i` is shifted down by
//!   `gamma |w_i - center|^2`, so planes from distant iterates (often built
//!   under a different latent configuration) lose influence locally.

use std::time::Instant;

use super::{Optimizer, TraceEntry, TrainConfig, TrainTrace};
use crate::error::Result;
use crate::util::{dot, sq_norm};

/// Risk value and a subgradient of the risk (regularizer excluded).
pub(crate) type RiskEval = (f64, Vec<f64>);

/// Fraction of the predicted decrease a step must achieve to move the center.
const SERIOUS_FRACTION: f64 = 0.1;

struct Plane {
    a: Vec<f64>,
    b: f64,
    origin: Vec<f64>,
}

struct Bundle {
    planes: Vec<Plane>,
    gram: Vec<Vec<f64>>,
    alpha: Vec<f64>,
    gamma: f64,
    /// Offsets in effect for the current center.
    effective: Vec<f64>,
}

impl Bundle {
    fn new(gamma: f64) -> Self {
        Self {
            planes: Vec::new(),
            gram: Vec::new(),
            alpha: Vec::new(),
            gamma,
            effective: Vec::new(),
        }
    }

    /// Lowers planes lying above the risk `r` observed at `w` and returns
    /// the resulting model value there.
    fn lower_at(&mut self, w: &[f64], r: f64) -> f64 {
        let mut model = f64::NEG_INFINITY;
        for p in &mut self.planes {
            p.b = p.b.min(r - dot(&p.a, w));
            model = model.max(dot(&p.a, w) + p.b);
        }
        model
    }

    /// Adds the plane with slope `a` through the risk `r` observed at `w`.
    fn add(&mut self, w: &[f64], r: f64, a: Vec<f64>) {
        let b = r - dot(&a, w);
        let mut row: Vec<f64> = self.planes.iter().map(|p| dot(&p.a, &a)).collect();
        for (g, &v) in self.gram.iter_mut().zip(&row) {
            g.push(v);
        }
        row.push(sq_norm(&a));
        self.gram.push(row);
        self.planes.push(Plane {
            a,
            b,
            origin: w.to_vec(),
        });
        self.alpha
            .push(if self.alpha.is_empty() { 1.0 } else { 0.0 });
    }

    /// Recomputes the offsets used by the master problem for a new center
    /// with risk `r_center`.
    fn recenter(&mut self, center: &[f64], r_center: f64) {
        self.effective = self
            .planes
            .iter()
            .map(|p| {
                let dist: f64 = p
                    .origin
                    .iter()
                    .zip(center)
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum();
                p.b.min(r_center - self.gamma * dist - dot(&p.a, center))
            })
            .collect();
    }

    /// Model of the risk at `w` under the current center's offsets.
    fn risk_model(&self, w: &[f64]) -> f64 {
        self.planes
            .iter()
            .zip(&self.effective)
            .map(|(p, b)| dot(&p.a, w) + b)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Minimizes `lambda/2 |w|^2 + mu/2 |w - center|^2 + model(w)` through
    /// its dual: `min (1/2k) a'Ga + c'a` over the simplex with
    /// `k = lambda + mu` and `c_i = -b_i - mu <a_i, center> / k`.
    fn solve(&mut self, lambda: f64, mu: f64, center: &[f64]) -> Vec<f64> {
        let n = self.planes.len();
        let kappa = lambda + mu;
        let c: Vec<f64> = self
            .planes
            .iter()
            .zip(&self.effective)
            .map(|(p, b)| -b - mu * dot(&p.a, center) / kappa)
            .collect();
        let mut ga: Vec<f64> = (0..n).map(|i| dot(&self.gram[i], &self.alpha)).collect();
        let scale = self
            .gram
            .iter()
            .enumerate()
            .map(|(i, r)| r[i])
            .fold(1.0, f64::max)
            / kappa
            + c.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        for _ in 0..200 * n + 10_000 {
            let grad: Vec<f64> = (0..n).map(|i| ga[i] / kappa + c[i]).collect();
            let mut up = 0;
            for i in 1..n {
                if grad[i] < grad[up] {
                    up = i;
                }
            }
            let mut down = None;
            for j in 0..n {
                if self.alpha[j] > 0.0 && down.is_none_or(|d: usize| grad[j] > grad[d]) {
                    down = Some(j);
                }
            }
            let Some(down) = down else { break };
            // Frank-Wolfe duality gap of the simplex-constrained dual.
            let gap = dot(&self.alpha, &grad) - grad[up];
            if gap <= 1e-12 * scale {
                break;
            }
            let slope = grad[down] - grad[up];
            let curvature =
                (self.gram[up][up] + self.gram[down][down] - 2.0 * self.gram[up][down]) / kappa;
            let mut t = if curvature > 0.0 {
                slope / curvature
            } else {
                self.alpha[down]
            };
            t = t.min(self.alpha[down]);
            if self.alpha[down] - t < 1e-16 {
                t = self.alpha[down];
            }
            self.alpha[up] += t;
            self.alpha[down] -= t;
            for (k, g) in ga.iter_mut().enumerate() {
                *g += t * (self.gram[k][up] - self.gram[k][down]);
            }
        }
        let mut w: Vec<f64> = center.iter().map(|v| mu * v / kappa).collect();
        for (alpha, p) in self.alpha.iter().zip(&self.planes) {
            if *alpha != 0.0 {
                for (wi, ai) in w.iter_mut().zip(&p.a) {
                    *wi -= alpha * ai / kappa;
                }
            }
        }
        w
    }
}

/// Runs the configured optimizer from `w = 0`.
///
/// Every iteration takes one step and evaluates the post-step iterate, which
/// becomes one trace entry. The returned iterate is the best evaluated one.
pub(crate) fn minimize<F, P>(
    dim: usize,
    cfg: &TrainConfig,
    mut risk: F,
    project: P,
) -> Result<(Vec<f64>, TrainTrace)>
where
    F: FnMut(&[f64]) -> Result<RiskEval>,
    P: Fn(&mut [f64]),
{
    cfg.validate()?;
    let lambda = cfg.lambda;
    let start = Instant::now();
    let mut trace = TrainTrace::default();
    let mut w = vec![0.0; dim];
    let (mut r, mut a) = risk(&w)?;
    let mut bundle = Bundle::new(lambda);
    let mut center = w.clone();
    let mut center_risk = r;
    let mut center_obj = r;
    let mut mu = lambda;
    let mut best: Option<(f64, Vec<f64>)> = None;
    if cfg.optimizer == Optimizer::Bundle {
        bundle.add(&w, r, std::mem::take(&mut a));
    }

    for t in 1..=cfg.max_iters {
        let mut predicted = f64::INFINITY;
        match cfg.optimizer {
            Optimizer::Bundle => {
                bundle.recenter(&center, center_risk);
                w = bundle.solve(lambda, mu, &center);
                predicted = center_obj - (0.5 * lambda * sq_norm(&w) + bundle.risk_model(&w));
            }
            Optimizer::Subgradient => {
                let step = 1.0 / (lambda * t as f64);
                for (wi, ai) in w.iter_mut().zip(&a) {
                    *wi -= step * (lambda * *wi + ai);
                }
            }
        }
        project(&mut w);
        (r, a) = risk(&w)?;
        let norm_sq = sq_norm(&w);
        let objective = 0.5 * lambda * norm_sq + r;
        let mut model = None;
        if cfg.optimizer == Optimizer::Bundle {
            model = Some(0.5 * lambda * norm_sq + bundle.lower_at(&w, r));
            bundle.add(&w, r, std::mem::take(&mut a));
            if objective <= center_obj - SERIOUS_FRACTION * predicted.max(0.0) {
                center.clone_from(&w);
                center_risk = r;
                center_obj = objective;
                mu *= 0.1;
            } else {
                mu = (mu * 2.0).min(1e12 * lambda);
            }
        }
        trace.entries.push(TraceEntry {
            iter: t,
            objective,
            risk: r,
            norm_w: norm_sq.sqrt(),
            seconds: start.elapsed().as_secs_f64(),
            model,
        });
        if best.as_ref().is_none_or(|(l, _)| objective < *l) {
            best = Some((objective, w.clone()));
        }
        if predicted <= cfg.tol * center_obj.abs() {
            break;
        }
    }
    let (_, w) = best.expect("at least one iteration");
    Ok((w, trace))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(optimizer: Optimizer, lambda: f64, max_iters: usize) -> TrainConfig {
        TrainConfig {
            lambda,
            max_iters,
            tol: 1e-9,
            optimizer,
            seed: 0,
        }
    }

    /// R(w) = mean_i max(0, 1 - y_i <x_i, w>): convex, with a known scale.
    fn hinge(points: &[([f64; 2], f64)]) -> impl FnMut(&[f64]) -> Result<RiskEval> + '_ {
        move |w: &[f64]| {
            let m = points.len() as f64;
            let mut r = 0.0;
            let mut g = vec![0.0; 2];
            for (x, y) in points {
                let margin = y * (x[0] * w[0] + x[1] * w[1]);
                if margin < 1.0 {
                    r += (1.0 - margin) / m;
                    g[0] -= y * x[0] / m;
                    g[1] -= y * x[1] / m;
                }
            }
            Ok((r, g))
        }
    }

    #[test]
    fn quadratic_with_linear_risk_reaches_closed_form() {
        // R(w) = <c, w> + 1  =>  argmin = -c / lambda.
        let c = [0.3, -0.7, 1.1];
        let oracle = |w: &[f64]| Ok((dot(&c, w) + 1.0, c.to_vec()));
        let (w, trace) = minimize(3, &cfg(Optimizer::Bundle, 2.0, 20), oracle, |_| {}).unwrap();
        for (wi, ci) in w.iter().zip(&c) {
            assert!((wi + ci / 2.0).abs() < 1e-9);
        }
        assert!(trace.entries.len() <= 10);
    }

    #[test]
    fn bundle_and_subgradient_agree_on_a_convex_hinge() {
        let pts = [
            ([1.0, 0.2], 1.0),
            ([-0.5, 1.0], -1.0),
            ([0.3, -0.8], 1.0),
            ([-1.0, -0.1], -1.0),
        ];
        let (wb, tb) = minimize(2, &cfg(Optimizer::Bundle, 0.1, 200), hinge(&pts), |_| {}).unwrap();
        let (ws, ts) = minimize(
            2,
            &cfg(Optimizer::Subgradient, 0.1, 5000),
            hinge(&pts),
            |_| {},
        )
        .unwrap();
        let lb = tb.best_objective().unwrap();
        let ls = ts.best_objective().unwrap();
        assert!(lb <= ls + 1e-6, "bundle {lb} vs subgradient {ls}");
        assert!((lb - ls).abs() < 1e-2);
        assert!(tb.entries.len() < 200);
        let _ = (wb, ws);
    }

    #[test]
    fn single_iteration_returns_the_post_step_iterate() {
        let c = [1.0, 2.0];
        let oracle = |w: &[f64]| Ok((dot(&c, w), c.to_vec()));
        for opt in [Optimizer::Bundle, Optimizer::Subgradient] {
            let (w, trace) = minimize(2, &cfg(opt, 1.0, 1), oracle, |_| {}).unwrap();
            assert_eq!(trace.entries.len(), 1);
            assert_ne!(w, vec![0.0, 0.0]);
            let objective = 0.5 * sq_norm(&w) + dot(&c, &w);
            assert_eq!(trace.entries[0].objective, objective);
        }
    }

    #[test]
    fn model_stays_below_a_nonconvex_objective() {
        // Risk with a concave kink: R(w) = |w0 - 1| - 0.5 |w1|.
        let oracle = |w: &[f64]| {
            let r = (w[0] - 1.0).abs() - 0.5 * w[1].abs();
            Ok((r, vec![(w[0] - 1.0).signum(), -0.5 * w[1].signum()]))
        };
        let (_, trace) = minimize(2, &cfg(Optimizer::Bundle, 1.0, 40), oracle, |_| {}).unwrap();
        for e in &trace.entries {
            if let Some(m) = e.model {
                assert!(m <= e.objective + 1e-9);
            }
        }
        let best = trace.best_so_far();
        assert!(best.windows(2).all(|p| p[1] <= p[0]));
    }

    #[test]
    fn projection_is_applied_every_step() {
        let c = [1.0];
        let oracle = |w: &[f64]| Ok((dot(&c, w), c.to_vec()));
        let clamp = |w: &mut [f64]| w[0] = w[0].max(0.0);
        for opt in [Optimizer::Bundle, Optimizer::Subgradient] {
            let (w, _) = minimize(1, &cfg(opt, 1.0, 10), oracle, clamp).unwrap();
            assert_eq!(w, vec![0.0]);
        }
    }
}
