//! Hausdorff distances between finite point sets, and a windowed index used
//! to deduplicate samples at a fixed resolution.

use std::collections::BTreeMap;

use ordered_float::OrderedFloat;
use serde::Serialize;

use crate::error::{Error, Result};

/// Directed and symmetric Hausdorff distances.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Hausdorff {
    /// `max_{a in A} min_{b in B} d(a, b)`
    pub a_to_b: f64,
    /// `max_{b in B} min_{a in A} d(a, b)`
    pub b_to_a: f64,
    pub max: f64,
}

/// Brute-force `O(|A| |B|)` Hausdorff distance.
pub fn hausdorff<T>(a: &[T], b: &[T], metric: impl Fn(&T, &T) -> f64) -> Result<Hausdorff> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("Hausdorff distance of an empty set"));
    }
    let a_to_b = directed(a, b, &metric);
    let b_to_a = directed(b, a, |x, y| metric(y, x));
    Ok(Hausdorff {
        a_to_b,
        b_to_a,
        max: a_to_b.max(b_to_a),
    })
}

/// Brute-force one-sided distance `max_a min_b d(a, b)`.
pub fn directed<T>(a: &[T], b: &[T], metric: impl Fn(&T, &T) -> f64) -> f64 {
    a.iter()
        .map(|x| b.iter().map(|y| metric(x, y)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

/// One-sided distance for points carrying a `P^1` angle in `[0, pi)`, where
/// the metric dominates `|sin(angle difference)|`. Candidates are scanned
/// outward from the query angle and pruned by that lower bound.
pub fn directed_by_angle<T>(
    a: &[T],
    b: &[T],
    angle: impl Fn(&T) -> f64,
    metric: impl Fn(&T, &T) -> f64,
) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("Hausdorff distance of an empty set"));
    }
    let pi = std::f64::consts::PI;
    let mut sorted: Vec<(f64, &T)> = b.iter().map(|p| (angle(p), p)).collect();
    sorted.sort_by(|x, y| x.0.total_cmp(&y.0));
    let n = sorted.len();
    let mut worst: f64 = 0.0;
    for x in a {
        let th = angle(x);
        let start = sorted.partition_point(|(t, _)| *t < th);
        let mut best = f64::INFINITY;
        // forward
        for step in 0..n {
            let (t, p) = sorted[(start + step) % n];
            let off = (t - th).rem_euclid(pi);
            if off > 0.5 * pi || off.sin() >= best {
                break;
            }
            best = best.min(metric(x, p));
        }
        // backward
        for step in 1..=n {
            let (t, p) = sorted[(start + n - step) % n];
            let off = (th - t).rem_euclid(pi);
            if off > 0.5 * pi || off.sin() >= best {
                break;
            }
            best = best.min(metric(x, p));
        }
        worst = worst.max(best);
    }
    Ok(worst)
}

/// Keeps the first of every cluster of points closer than `tol`.
///
/// The key must satisfy `d(p, q) <= tol => |key(p) - key(q)| <= window`.
pub(crate) struct DedupIndex {
    window: f64,
    buckets: BTreeMap<OrderedFloat<f64>, Vec<usize>>,
}

impl DedupIndex {
    pub(crate) fn new(window: f64) -> Self {
        DedupIndex {
            window,
            buckets: BTreeMap::new(),
        }
    }

    /// Returns `true` when no indexed point satisfies `is_close`; the new
    /// index is then recorded.
    pub(crate) fn insert_if_new(&mut self, key: f64, index: usize, mut is_close: impl FnMut(usize) -> bool) -> bool {
        let lo = OrderedFloat(key - self.window);
        let hi = OrderedFloat(key + self.window);
        let dup = self
            .buckets
            .range(lo..=hi)
            .any(|(_, ids)| ids.iter().any(|&i| is_close(i)));
        if !dup {
            self.buckets.entry(OrderedFloat(key)).or_default().push(index);
        }
        !dup
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn d(x: &f64, y: &f64) -> f64 {
        (x - y).abs()
    }

    #[test]
    fn examples() {
        let a = [0.0, 1.0, 2.5];
        let h = hausdorff(&a, &a, d).unwrap();
        assert_eq!(h.max, 0.0);
        let h = hausdorff(&[1.0], &[1.25], d).unwrap();
        assert_eq!((h.a_to_b, h.b_to_a, h.max), (0.25, 0.25, 0.25));
        let b = [0.1, 3.0];
        let h1 = hausdorff(&a, &b, d).unwrap();
        let h2 = hausdorff(&b, &a, d).unwrap();
        assert_eq!(h1.max, h2.max);
        assert_eq!(h1.a_to_b, h2.b_to_a);
        assert!(hausdorff::<f64>(&[], &b, d).is_err());
    }

    #[test]
    fn angle_scan_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pi = std::f64::consts::PI;
        let metric = |x: &(f64, f64), y: &(f64, f64)| (x.0 - y.0).sin().abs().max((x.1 - y.1).abs());
        for _ in 0..20 {
            let a: Vec<(f64, f64)> = (0..50).map(|_| (rng.gen_range(0.0..pi), rng.gen())).collect();
            let b: Vec<(f64, f64)> = (0..300).map(|_| (rng.gen_range(0.0..pi), rng.gen())).collect();
            let brute = directed(&a, &b, metric);
            let fast = directed_by_angle(&a, &b, |p| p.0, metric).unwrap();
            assert!((brute - fast).abs() < 1e-15, "{brute} vs {fast}");
        }
    }
}
