/// Rescales `values` to [0, 1]. A channel whose range is at most `eps` is
/// treated as constant and maps to all zeros.
pub(crate) fn minmax_normalize(values: &mut [f64], eps: f64) {
    let (lo, hi) = min_max(values);
    let range = hi - lo;
    if !(range > eps) {
        values.iter_mut().for_each(|v| *v = 0.0);
        return;
    }
    for v in values.iter_mut() {
        *v = ((*v - lo) / range).clamp(0.0, 1.0);
    }
}

pub(crate) fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn sq_norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_channel_maps_to_zero() {
        let mut v = [0.3, 0.3, 0.3];
        minmax_normalize(&mut v, 1e-12);
        assert_eq!(v, [0.0; 3]);
    }

    #[test]
    fn minmax_spans_unit_interval() {
        let mut v = [2.0, -1.0, 0.5];
        minmax_normalize(&mut v, 1e-12);
        assert_eq!(v, [1.0, 0.0, 0.5]);
    }
}
