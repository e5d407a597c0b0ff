//! Slow, independent reference implementations for checking the fast paths.
//!
//! Nothing here calls into `space`, `eval` or the branch search in `ring`;
//! the only shared primitive is [`mod_k`](crate::ring::mod_k).

use alloc::vec::Vec;

use crate::ring::{mod_k, RingPoint, RingSpec};

/// Ring distance by exhaustive search over branches `j` and explicit lattice
/// shifts `i1·q`, `i2·p` with `i1, i2 ∈ {-3..3}`.
///
/// For canonical points, `b1 - a1 + j/p ∈ (-q, 2q)` and
/// `b2 - a2 + j/q ∈ (-p, 2p)`, so the nearest multiple of the modulus is at
/// most two periods away and the shift range is sufficient.
pub fn brute_dist(a: RingPoint, b: RingPoint, spec: RingSpec) -> f64 {
    let (q, p) = (spec.q() as f64, spec.p() as f64);
    let mut best = f64::INFINITY;
    for j in 0..spec.q() * spec.p() {
        let u1 = b.x1 - a.x1 + j as f64 / p;
        let u2 = b.x2 - a.x2 + j as f64 / q;
        for i1 in -3..=3 {
            for i2 in -3..=3 {
                let d = (u1 + i1 as f64 * q).abs() + (u2 + i2 as f64 * p).abs();
                if d < best {
                    best = d;
                }
            }
        }
    }
    best
}

/// Rank of `true_score` among itself and `others` in ascending order, with
/// tied scores sharing the mean of the positions they occupy.
pub fn brute_rank(true_score: f64, others: &[f64]) -> f64 {
    let mut all: Vec<f64> = others.to_vec();
    all.push(true_score);
    all.sort_by(|a, b| a.partial_cmp(b).expect("scores must not be NaN"));
    let first = all.iter().position(|&s| s == true_score).unwrap();
    let last = all.iter().rposition(|&s| s == true_score).unwrap();
    // positions first+1 ..= last+1, averaged
    (first + last + 2) as f64 / 2.0
}

/// Central-difference gradient plus a per-coordinate kink flag.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteDiff {
    pub gradient: Vec<f64>,
    /// Set where the one-sided slopes disagree by more than `1e-3` relative.
    pub kinks: Vec<bool>,
}

impl FiniteDiff {
    pub fn has_kink(&self) -> bool {
        self.kinks.iter().any(|&k| k)
    }
}

pub fn finite_diff_grad<F>(f: F, point: &[f64], step: f64) -> FiniteDiff
where
    F: Fn(&[f64]) -> f64,
{
    assert!(step > 0.0, "finite-difference step must be positive");
    let center = f(point);
    let mut x = point.to_vec();
    let mut gradient = Vec::with_capacity(point.len());
    let mut kinks = Vec::with_capacity(point.len());
    for i in 0..point.len() {
        x[i] = point[i] + step;
        let plus = f(&x);
        x[i] = point[i] - step;
        let minus = f(&x);
        x[i] = point[i];

        let forward = (plus - center) / step;
        let backward = (center - minus) / step;
        let scale = forward.abs().max(backward.abs()).max(1.0);
        kinks.push((forward - backward).abs() > 1e-3 * scale);
        gradient.push((plus - minus) / (2.0 * step));
    }
    FiniteDiff { gradient, kinks }
}

/// Zero points of `spec` found by scanning a grid of spacing `step` with
/// [`brute_dist`] and refining every candidate by pattern search.
///
/// Every zero has a grid point within L1 distance `step`, so candidates are
/// grid points with `brute_dist < step`. Returned points are canonical and
/// deduplicated, sorted by `(x1, x2)`.
pub fn grid_scan_zeros(spec: RingSpec, step: f64) -> Vec<RingPoint> {
    let (q, p) = (spec.q() as f64, spec.p() as f64);
    let dist0 = |x1: f64, x2: f64| {
        let point = RingPoint {
            x1: mod_k(x1, spec.q()).unwrap(),
            x2: mod_k(x2, spec.p()).unwrap(),
        };
        brute_dist(RingPoint::ORIGIN, point, spec)
    };
    let n1 = (q / step) as usize + 1;
    let n2 = (p / step) as usize + 1;
    let mut found: Vec<RingPoint> = Vec::new();
    for a in 0..n1 {
        for b in 0..n2 {
            let (mut x1, mut x2) = (a as f64 * step, b as f64 * step);
            let mut d = dist0(x1, x2);
            if d >= step {
                continue;
            }
            let mut h = step;
            while h > 1e-15 && d > 0.0 {
                let mut improved = false;
                for (dx1, dx2) in [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)] {
                    let nd = dist0(x1 + dx1, x2 + dx2);
                    if nd < d {
                        x1 += dx1;
                        x2 += dx2;
                        d = nd;
                        improved = true;
                        break;
                    }
                }
                if !improved {
                    h *= 0.5;
                }
            }
            if d > 1e-12 {
                continue;
            }
            let z = RingPoint {
                x1: mod_k(x1, spec.q()).unwrap(),
                x2: mod_k(x2, spec.p()).unwrap(),
            };
            let duplicate = found.iter().any(|f| {
                let d1 = (f.x1 - z.x1).abs();
                let d2 = (f.x2 - z.x2).abs();
                d1.min(q - d1) + d2.min(p - d2) < 1e-6
            });
            if !duplicate {
                found.push(z);
            }
        }
    }
    // snap values that landed a hair under the period
    for z in &mut found {
        if q - z.x1 < 1e-9 {
            z.x1 = 0.0;
        }
        if p - z.x2 < 1e-9 {
            z.x2 = 0.0;
        }
    }
    found.sort_by(|a, b| (a.x1, a.x2).partial_cmp(&(b.x1, b.x2)).unwrap());
    found
}
