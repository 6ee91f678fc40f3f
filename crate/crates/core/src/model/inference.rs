use super::{check_label, Label, Layout, ModelParams};
use crate::error::{Error, Result};
use crate::features::FeatureBundle;
use crate::mrf::{max_benefit_labeling, EnergyProblem, Labeling, RegionGraph};
use crate::util::dot;

/// Result of joint inference over the existence label and the region labels.
#[derive(Clone, Debug, PartialEq)]
pub struct Inference {
    pub y: Label,
    pub h: Vec<bool>,
    /// `max_h <w, Psi(y, h)>` for y = 0 and y = 1.
    pub scores: [f64; 2],
}

fn check_labels(fb: &FeatureBundle, graph: &RegionGraph, h: &[bool]) -> Result<()> {
    let n = fb.n_regions();
    if h.len() != n || graph.n_nodes() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} labels, {} regions, {} graph nodes",
            h.len(),
            n,
            graph.n_nodes()
        )));
    }
    Ok(())
}

/// Joint feature map `Psi(I, y, h)` in parameter layout.
pub fn joint_feature(
    fb: &FeatureBundle,
    graph: &RegionGraph,
    y: Label,
    h: &[bool],
) -> Result<Vec<f64>> {
    check_label(y)?;
    check_labels(fb, graph, h)?;
    let layout = Layout::new(fb.phi_e.len());
    let mut psi = vec![0.0; layout.len()];
    psi[layout.e(y)].copy_from_slice(&fb.phi_e);
    let s = layout.s(y);
    let regional = &fb.regional;
    for (j, &on) in h.iter().enumerate() {
        let row = if on {
            &regional.phi_f[j]
        } else {
            &regional.phi_b[j]
        };
        for (acc, v) in psi[s.clone()].iter_mut().zip(row) {
            *acc += v;
        }
    }
    let ones = h.iter().filter(|&&on| on).count();
    psi[layout.f(y)] = ones as f64;
    psi[layout.b(y)] = (h.len() - ones) as f64;
    psi[layout.p()] = -disagreement(graph, h);
    Ok(psi)
}

fn disagreement(graph: &RegionGraph, h: &[bool]) -> f64 {
    graph
        .edges()
        .iter()
        .filter(|&&(j, k, _)| h[j] != h[k])
        .map(|&(_, _, v)| v)
        .sum()
}

/// Score `<w, Psi(I, y, h)>` evaluated term by term.
pub fn score(
    w: &ModelParams,
    fb: &FeatureBundle,
    graph: &RegionGraph,
    y: Label,
    h: &[bool],
) -> Result<f64> {
    check_label(y)?;
    w.check_bundle(fb)?;
    check_labels(fb, graph, h)?;
    let problem = energy(w, fb, graph, y);
    Ok(dot(w.w_e(y), &fb.phi_e) + problem.evaluate(h))
}

/// Region-level benefit problem for class `y`, without the global term.
pub(crate) fn energy(
    w: &ModelParams,
    fb: &FeatureBundle,
    graph: &RegionGraph,
    y: Label,
) -> EnergyProblem {
    let ws = w.w_s(y);
    let regional = &fb.regional;
    EnergyProblem {
        unary1: regional
            .phi_f
            .iter()
            .map(|row| dot(ws, row) + w.w_f(y))
            .collect(),
        unary0: regional
            .phi_b
            .iter()
            .map(|row| dot(ws, row) + w.w_b(y))
            .collect(),
        pairwise: graph
            .edges()
            .iter()
            .map(|&(j, k, v)| (j, k, w.w_p() * v))
            .collect(),
    }
}

fn check_graph(fb: &FeatureBundle, graph: &RegionGraph) -> Result<()> {
    if graph.n_nodes() != fb.n_regions() {
        return Err(Error::DimensionMismatch(format!(
            "{} graph nodes, {} regions",
            graph.n_nodes(),
            fb.n_regions()
        )));
    }
    Ok(())
}

/// Best region labeling for a fixed existence label, with its full score.
pub fn infer_h(
    w: &ModelParams,
    fb: &FeatureBundle,
    graph: &RegionGraph,
    y: Label,
) -> Result<Labeling> {
    check_label(y)?;
    w.check_bundle(fb)?;
    check_graph(fb, graph)?;
    let mut best = max_benefit_labeling(&energy(w, fb, graph, y))?;
    best.value += dot(w.w_e(y), &fb.phi_e);
    Ok(best)
}

/// Joint maximization over `y` and `h`. Ties go to `y = 0`.
pub fn infer(w: &ModelParams, fb: &FeatureBundle, graph: &RegionGraph) -> Result<Inference> {
    let zero = infer_h(w, fb, graph, 0)?;
    let one = infer_h(w, fb, graph, 1)?;
    let scores = [zero.value, one.value];
    let (y, h) = if one.value > zero.value {
        (1, one.labels)
    } else {
        (0, zero.labels)
    };
    Ok(Inference { y, h, scores })
}

/// Per-region weights of the area term of the loss for ground truth `y_m`.
fn alpha_weights(y_m: Label, areas: &[f64], border: &[bool]) -> Result<Vec<f64>> {
    check_label(y_m)?;
    if areas.len() != border.len() {
        return Err(Error::LengthMismatch {
            left: areas.len(),
            right: border.len(),
        });
    }
    let counted = |l: usize| y_m == 0 || border[l];
    let z: f64 = (0..areas.len())
        .filter(|&l| counted(l))
        .map(|l| areas[l])
        .sum();
    if !(z > 0.0) {
        return Err(Error::DegenerateInput(if y_m == 0 {
            "total region area is zero".into()
        } else {
            "no border area to normalize the loss".into()
        }));
    }
    Ok((0..areas.len())
        .map(|l| if counted(l) { areas[l] / z } else { 0.0 })
        .collect())
}

/// Training loss `Delta(y_m, y, h)`: 0/1 existence error plus the area of
/// regions labeled salient, normalized by the image area (`y_m = 0`) or the
/// border area (`y_m = 1`, border regions only).
pub fn loss(y_m: Label, y: Label, h: &[bool], areas: &[f64], border: &[bool]) -> Result<f64> {
    check_label(y)?;
    let weights = alpha_weights(y_m, areas, border)?;
    if h.len() != weights.len() {
        return Err(Error::LengthMismatch {
            left: h.len(),
            right: weights.len(),
        });
    }
    let alpha: f64 = h
        .iter()
        .zip(&weights)
        .filter(|(&on, _)| on)
        .map(|(_, &b)| b)
        .sum();
    Ok(f64::from(u8::from(y_m != y)) + alpha)
}

/// `max_h <w, Psi(y, h)> + Delta(y_m, y, h)` for both `y`, with maximizers.
pub fn loss_augmented_infer(
    w: &ModelParams,
    fb: &FeatureBundle,
    graph: &RegionGraph,
    y_m: Label,
) -> Result<[Labeling; 2]> {
    w.check_bundle(fb)?;
    check_graph(fb, graph)?;
    let weights = alpha_weights(y_m, &fb.areas, &fb.border)?;
    let solve = |y: Label| -> Result<Labeling> {
        let mut problem = energy(w, fb, graph, y);
        for (u, b) in problem.unary1.iter_mut().zip(&weights) {
            *u += b;
        }
        let mut best = max_benefit_labeling(&problem)?;
        best.value += dot(w.w_e(y), &fb.phi_e) + f64::from(u8::from(y != y_m));
        Ok(best)
    };
    Ok([solve(0)?, solve(1)?])
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::features::{RegionSaliencyFeatures, REGIONAL_DIM};
    use rand::Rng;

    /// Random bundle with `n` regions, global length `e_len`, and a random
    /// connected-ish region graph.
    pub(crate) fn random_instance<R: Rng>(
        rng: &mut R,
        n: usize,
        e_len: usize,
    ) -> (FeatureBundle, RegionGraph) {
        let phi_s = (0..n)
            .map(|_| std::array::from_fn::<f64, REGIONAL_DIM, _>(|_| rng.gen_range(0.0..1.0)))
            .collect();
        let regional = RegionSaliencyFeatures::from_phi_s(phi_s, 1e-3).unwrap();
        let mut border: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
        border[0] = true;
        let fb = FeatureBundle {
            regional,
            phi_e: (0..e_len).map(|_| rng.gen_range(0.0..1.0)).collect(),
            areas: (0..n).map(|_| rng.gen_range(1..50) as f64).collect(),
            border,
        };
        let mut edges = Vec::new();
        for j in 0..n {
            for k in j + 1..n {
                if k == j + 1 || rng.gen_bool(0.2) {
                    edges.push((j, k, rng.gen_range(0.05..1.0)));
                }
            }
        }
        (fb, RegionGraph::new(n, edges).unwrap())
    }

    pub(crate) fn random_params<R: Rng>(rng: &mut R, e_len: usize, scale: f64) -> ModelParams {
        let n = Layout::new(e_len).len();
        let mut w = ModelParams::from_vec(
            e_len,
            (0..n).map(|_| rng.gen_range(-scale..scale)).collect(),
        )
        .unwrap();
        w.project();
        w
    }

    pub(crate) fn all_labelings(n: usize) -> impl Iterator<Item = Vec<bool>> {
        (0u32..1 << n).map(move |mask| (0..n).map(|j| mask >> j & 1 == 1).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    /// Term-by-term expansion of the scoring function.
    fn expanded_score(
        w: &ModelParams,
        fb: &FeatureBundle,
        g: &RegionGraph,
        y: usize,
        h: &[bool],
    ) -> f64 {
        let mut total = 0.0;
        for a in 0..2 {
            if a == y {
                total += w
                    .w_e(a)
                    .iter()
                    .zip(&fb.phi_e)
                    .map(|(p, q)| p * q)
                    .sum::<f64>();
            }
        }
        for (j, &on) in h.iter().enumerate() {
            let row = if on {
                &fb.regional.phi_f[j]
            } else {
                &fb.regional.phi_b[j]
            };
            let prior = if on { w.w_f(y) } else { w.w_b(y) };
            total += w.w_s(y).iter().zip(row).map(|(p, q)| p * q).sum::<f64>() + prior;
        }
        for &(j, k, v) in g.edges() {
            if h[j] != h[k] {
                total -= w.w_p() * v;
            }
        }
        total
    }

    #[test]
    fn joint_feature_of_all_background() {
        let (fb, g) = random_instance(&mut rng(1), 5, 4);
        let psi = joint_feature(&fb, &g, 0, &[false; 5]).unwrap();
        let l = Layout::new(4);
        assert_eq!(&psi[l.e(0)], fb.phi_e.as_slice());
        for (c, got) in psi[l.s(0)].iter().enumerate() {
            let want: f64 = fb.regional.phi_b.iter().map(|r| r[c]).sum();
            assert!((got - want).abs() < 1e-12);
        }
        assert_eq!(psi[l.f(0)], 0.0);
        assert_eq!(psi[l.b(0)], 5.0);
        assert_eq!(psi[l.p()], 0.0);
        assert!(psi[l.e(1)].iter().chain(&psi[l.s(1)]).all(|&v| v == 0.0));
        assert_eq!((psi[l.f(1)], psi[l.b(1)]), (0.0, 0.0));
    }

    #[test]
    fn inner_product_matches_expanded_score() {
        let mut r = rng(2);
        for _ in 0..100 {
            let n = r.gen_range(1..9);
            let (fb, g) = random_instance(&mut r, n, 6);
            let w = random_params(&mut r, 6, 2.0);
            let y = r.gen_range(0..2);
            let h: Vec<bool> = (0..n).map(|_| r.gen_bool(0.5)).collect();
            let psi = joint_feature(&fb, &g, y, &h).unwrap();
            let ip: f64 = w.as_slice().iter().zip(&psi).map(|(a, b)| a * b).sum();
            let direct = expanded_score(&w, &fb, &g, y, &h);
            assert!((ip - direct).abs() <= 1e-9);
            assert!((score(&w, &fb, &g, y, &h).unwrap() - direct).abs() <= 1e-9);
        }
    }

    #[test]
    fn single_flip_changes_score_by_local_terms() {
        let mut r = rng(3);
        for _ in 0..50 {
            let n = 6;
            let (fb, g) = random_instance(&mut r, n, 3);
            let w = random_params(&mut r, 3, 1.0);
            let y = r.gen_range(0..2);
            let mut h: Vec<bool> = (0..n).map(|_| r.gen_bool(0.5)).collect();
            let j = r.gen_range(0..n);
            h[j] = false;
            let before = score(&w, &fb, &g, y, &h).unwrap();
            let mut expected = w.w_f(y) - w.w_b(y);
            for c in 0..35 {
                expected += w.w_s(y)[c] * (fb.regional.phi_f[j][c] - fb.regional.phi_b[j][c]);
            }
            for &(a, b, v) in g.edges() {
                let k = if a == j {
                    b
                } else if b == j {
                    a
                } else {
                    continue;
                };
                let sign = if h[k] { -1.0 } else { 1.0 };
                expected -= w.w_p() * v * sign;
            }
            h[j] = true;
            let after = score(&w, &fb, &g, y, &h).unwrap();
            assert!((after - before - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn uniform_foreground_prior_labels_everything_salient() {
        let (fb, g) = random_instance(&mut rng(4), 7, 2);
        let mut w = ModelParams::zeros(2);
        let l = w.layout();
        w.as_mut_slice()[l.f(1)] = 1.0;
        w.as_mut_slice()[l.b(1)] = 0.5;
        let best = infer_h(&w, &fb, &g, 1).unwrap();
        assert_eq!(best.labels, vec![true; 7]);
    }

    #[test]
    fn zero_weights_give_zero_score_and_background() {
        let (fb, g) = random_instance(&mut rng(5), 6, 3);
        let w = ModelParams::zeros(3);
        let best = infer_h(&w, &fb, &g, 1).unwrap();
        assert_eq!(best.value, 0.0);
        assert_eq!(best.labels, vec![false; 6]);
        let joint = infer(&w, &fb, &g).unwrap();
        assert_eq!(joint.y, 0);
    }

    #[test]
    fn infer_h_matches_enumeration() {
        let mut r = rng(6);
        for _ in 0..60 {
            let n = r.gen_range(1..=12);
            let (fb, g) = random_instance(&mut r, n, 4);
            let w = random_params(&mut r, 4, 1.5);
            let y = r.gen_range(0..2);
            let best = infer_h(&w, &fb, &g, y).unwrap();
            let brute = all_labelings(n)
                .map(|h| expanded_score(&w, &fb, &g, y, &h))
                .fold(f64::NEG_INFINITY, f64::max);
            assert!((best.value - brute).abs() < 1e-9);
            assert!((score(&w, &fb, &g, y, &best.labels).unwrap() - best.value).abs() < 1e-9);
        }
    }

    #[test]
    fn infer_dominates_random_labelings() {
        let mut r = rng(7);
        let n = 16;
        let (fb, g) = random_instance(&mut r, n, 4);
        let w = random_params(&mut r, 4, 1.0);
        let best = infer_h(&w, &fb, &g, 1).unwrap();
        for _ in 0..1000 {
            let h: Vec<bool> = (0..n).map(|_| r.gen_bool(0.5)).collect();
            assert!(score(&w, &fb, &g, 1, &h).unwrap() <= best.value + 1e-9);
        }
    }

    #[test]
    fn joint_inference_matches_enumeration_and_is_repeatable() {
        let mut r = rng(8);
        for _ in 0..40 {
            let n = r.gen_range(1..=10);
            let (fb, g) = random_instance(&mut r, n, 3);
            let w = random_params(&mut r, 3, 1.0);
            let got = infer(&w, &fb, &g).unwrap();
            let brute = (0..2)
                .flat_map(|y| all_labelings(n).map(move |h| (y, h)))
                .map(|(y, h)| expanded_score(&w, &fb, &g, y, &h))
                .fold(f64::NEG_INFINITY, f64::max);
            assert!((got.scores[0].max(got.scores[1]) - brute).abs() < 1e-9);
            assert_eq!(infer(&w, &fb, &g).unwrap(), got);
        }
    }

    #[test]
    fn existence_tie_goes_to_background() {
        let (fb, g) = random_instance(&mut rng(9), 3, 2);
        let mut w = ModelParams::zeros(2);
        let l = w.layout();
        // Identical class weights give identical scores.
        w.as_mut_slice()[l.f(0)] = 0.3;
        w.as_mut_slice()[l.f(1)] = 0.3;
        let got = infer(&w, &fb, &g).unwrap();
        assert_eq!(got.scores[0], got.scores[1]);
        assert_eq!(got.y, 0);
        // Clear winner.
        w.as_mut_slice()[l.b(1)] = 5.0;
        assert_eq!(infer(&w, &fb, &g).unwrap().y, 1);
    }

    #[test]
    fn loss_cases() {
        let areas = [10.0, 30.0, 40.0, 20.0];
        let border = [true, true, false, false];
        assert_eq!(loss(1, 1, &[false; 4], &areas, &border).unwrap(), 0.0);
        assert_eq!(loss(0, 0, &[false; 4], &areas, &border).unwrap(), 0.0);
        assert!((loss(0, 0, &[true; 4], &areas, &border).unwrap() - 1.0).abs() < 1e-12);
        assert!((loss(0, 1, &[true; 4], &areas, &border).unwrap() - 2.0).abs() < 1e-12);
        // Border area 40; region 0 covers half of it, interior labels are free.
        let areas = [20.0, 20.0, 40.0, 20.0];
        let h = [true, false, true, true];
        assert!((loss(1, 1, &h, &areas, &border).unwrap() - 0.5).abs() < 1e-12);
        assert!((loss(1, 0, &h, &areas, &border).unwrap() - 1.5).abs() < 1e-12);
        assert!(matches!(
            loss(1, 1, &h, &areas, &[false; 4]),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn loss_augmented_with_zero_weights() {
        let (fb, g) = random_instance(&mut rng(10), 6, 2);
        let w = ModelParams::zeros(2);
        let by_y = loss_augmented_infer(&w, &fb, &g, 0).unwrap();
        assert_eq!(by_y[0].labels, vec![true; 6]);
        assert!((by_y[0].value - 1.0).abs() < 1e-12);
        assert!((by_y[1].value - 2.0).abs() < 1e-12);
        let by_y = loss_augmented_infer(&w, &fb, &g, 1).unwrap();
        assert_eq!(by_y[1].labels, fb.border);
        assert!((by_y[1].value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn loss_augmented_matches_enumeration_and_dominates() {
        let mut r = rng(11);
        for _ in 0..40 {
            let n = r.gen_range(1..=10);
            let (fb, g) = random_instance(&mut r, n, 3);
            let w = random_params(&mut r, 3, 1.0);
            let y_m = r.gen_range(0..2);
            let got = loss_augmented_infer(&w, &fb, &g, y_m).unwrap();
            for y in 0..2 {
                let brute = all_labelings(n)
                    .map(|h| {
                        expanded_score(&w, &fb, &g, y, &h)
                            + loss(y_m, y, &h, &fb.areas, &fb.border).unwrap()
                    })
                    .fold(f64::NEG_INFINITY, f64::max);
                assert!((got[y].value - brute).abs() < 1e-9);
            }
        }
        let n = 15;
        let (fb, g) = random_instance(&mut r, n, 3);
        let w = random_params(&mut r, 3, 1.0);
        let got = loss_augmented_infer(&w, &fb, &g, 1).unwrap();
        for _ in 0..1000 {
            let h: Vec<bool> = (0..n).map(|_| r.gen_bool(0.5)).collect();
            let y = r.gen_range(0..2);
            let v =
                score(&w, &fb, &g, y, &h).unwrap() + loss(1, y, &h, &fb.areas, &fb.border).unwrap();
            assert!(v <= got[y].value + 1e-9);
        }
    }

    #[test]
    fn global_length_mismatch_is_reported() {
        let (fb, g) = random_instance(&mut rng(12), 3, 4);
        let w = ModelParams::zeros(5);
        assert!(matches!(
            infer(&w, &fb, &g),
            Err(Error::ModelMismatch {
                expected: 5,
                actual: 4
            })
        ));
    }

    #[test]
    fn negative_pairwise_weight_is_rejected() {
        let (fb, g) = random_instance(&mut rng(13), 4, 1);
        let mut w = ModelParams::zeros(1);
        let p = w.layout().p();
        w.as_mut_slice()[p] = -1.0;
        assert!(matches!(
            infer_h(&w, &fb, &g, 0),
            Err(Error::NonSubmodular { .. })
        ));
    }
}
