//! Single-ring algebra: modulus and circular distance, Möbius and torus
//! addition and distance, zero points, and the parametric surfaces.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use crate::error::{Error, Result};
use crate::math;
use crate::space::NormKind;

/// `𝕞_k(u)`: the representative of `u` modulo `k` in `[0, k)`.
pub fn mod_k(u: f64, k: u32) -> Result<f64> {
    if k == 0 {
        return Err(Error::ZeroModulus);
    }
    if !u.is_finite() {
        return Err(Error::NonFinite(u));
    }
    Ok(wrap(u, k as f64))
}

/// `𝕕_k(u) = min(𝕞_k(u), k - 𝕞_k(u))`, the distance from `u` to the
/// nearest multiple of `k`.
pub fn dist_k(u: f64, k: u32) -> Result<f64> {
    mod_k(u, k).map(|m| fold(m, k as f64))
}

#[inline]
pub(crate) fn wrap(u: f64, k: f64) -> f64 {
    let r = u - k * math::floor(u / k);
    // rounding can land exactly on k (e.g. u = -1e-20)
    if r >= k || r < 0.0 {
        0.0
    } else {
        r
    }
}

#[inline]
fn fold(m: f64, k: f64) -> f64 {
    let other = k - m;
    if m <= other {
        m
    } else {
        other
    }
}

#[inline]
pub(crate) fn circ(u: f64, k: f64) -> f64 {
    fold(wrap(u, k), k)
}

/// Derivative of `𝕕_k` at `u`, taking 0 at the kinks `𝕞_k(u) ∈ {0, k/2}`.
#[inline]
pub(crate) fn circ_slope(u: f64, k: f64) -> f64 {
    let m = wrap(u, k);
    let half = 0.5 * k;
    if m == 0.0 || m == half {
        0.0
    } else if m < half {
        1.0
    } else {
        -1.0
    }
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// The pair `(q, p)` of co-prime positive integers defining `M^{q/p}`, the
/// quotient of `[0, q) × [0, p)` by the shifts `(j/p, j/q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RingSpec {
    q: u32,
    p: u32,
}

impl RingSpec {
    /// `M^2 = M^{2/1}`.
    pub const MOBIUS_2: RingSpec = RingSpec { q: 2, p: 1 };

    pub fn new(q: u32, p: u32) -> Result<Self> {
        if q == 0 || p == 0 || gcd(q, p) != 1 {
            return Err(Error::InvalidRing { q, p });
        }
        Ok(Self { q, p })
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.q
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    /// Number of identification branches, `pq`. Also the number of zero
    /// points in the fundamental region.
    #[inline]
    pub fn branches(&self) -> u32 {
        self.q * self.p
    }

    /// The branch-`j` shift `(j/p, j/q)`.
    #[inline]
    pub fn shift(&self, j: u32) -> (f64, f64) {
        (j as f64 / self.p as f64, j as f64 / self.q as f64)
    }

    /// Largest ring distance claimed for this ring, `1/(2p) + 1/(2q)`.
    ///
    /// Exact for `M^{2/1}` (3/4). For other rings the distance can exceed it;
    /// see [`RingSpec::trivial_bound`] for a bound that always holds.
    pub fn claimed_bound(&self) -> f64 {
        0.5 / self.p as f64 + 0.5 / self.q as f64
    }

    /// `q/2 + p/2`, the branch-0 bound. Always an upper bound on the distance.
    pub fn trivial_bound(&self) -> f64 {
        0.5 * (self.q + self.p) as f64
    }

    fn is_canonical(&self, x1: f64, x2: f64) -> bool {
        (0.0..self.q as f64).contains(&x1) && (0.0..self.p as f64).contains(&x2)
    }

    /// Distance between two points given the coordinate differences
    /// `dy = y - x`. Returns the minimum and the lowest minimising branch.
    #[inline]
    pub(crate) fn branch_dist(&self, dy1: f64, dy2: f64) -> (f64, u32) {
        let (q, p) = (self.q as f64, self.p as f64);
        let mut best = circ(dy1, q) + circ(dy2, p);
        let mut best_j = 0;
        for j in 1..self.branches() {
            let (s1, s2) = self.shift(j);
            let d = circ(dy1 + s1, q) + circ(dy2 + s2, p);
            if d < best {
                best = d;
                best_j = j;
            }
        }
        (best, best_j)
    }
}

impl Default for RingSpec {
    fn default() -> Self {
        Self::MOBIUS_2
    }
}

impl fmt::Display for RingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "M^{}/{}", self.q, self.p)
    }
}

/// A point `(x1, x2)` of a single Möbius ring, canonical in `[0,q) × [0,p)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RingPoint {
    pub x1: f64,
    pub x2: f64,
}

impl RingPoint {
    pub const ORIGIN: RingPoint = RingPoint { x1: 0.0, x2: 0.0 };

    /// Canonicalises `(x1, x2)` onto `spec`.
    pub fn new(x1: f64, x2: f64, spec: RingSpec) -> Result<Self> {
        Ok(Self {
            x1: mod_k(x1, spec.q)?,
            x2: mod_k(x2, spec.p)?,
        })
    }

    fn check(&self, spec: RingSpec) -> Result<()> {
        if spec.is_canonical(self.x1, self.x2) {
            Ok(())
        } else {
            Err(Error::NotCanonical {
                x1: self.x1,
                x2: self.x2,
                q: spec.q,
                p: spec.p,
            })
        }
    }

    /// The additive inverse, `(𝕞_q(-x1), 𝕞_p(-x2))`.
    pub fn inverse(&self, spec: RingSpec) -> RingPoint {
        RingPoint {
            x1: wrap(-self.x1, spec.q as f64),
            x2: wrap(-self.x2, spec.p as f64),
        }
    }
}

/// A point of the unit circle `T^1`, canonical in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TorusPoint(f64);

impl TorusPoint {
    pub fn new(x: f64) -> Result<Self> {
        mod_k(x, 1).map(TorusPoint)
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.0
    }
}

/// `x ⊕ y = (𝕞_q(x1 + y1), 𝕞_p(x2 + y2))`.
pub fn mobius_add(a: RingPoint, b: RingPoint, spec: RingSpec) -> Result<RingPoint> {
    a.check(spec)?;
    b.check(spec)?;
    Ok(RingPoint {
        x1: wrap(a.x1 + b.x1, spec.q as f64),
        x2: wrap(a.x2 + b.x2, spec.p as f64),
    })
}

/// Ring distance: the minimum over branches `j = 0..pq` of
/// `𝕕_q(y1 - x1 + j/p) + 𝕕_p(y2 - x2 + j/q)`.
pub fn mobius_dist(a: RingPoint, b: RingPoint, spec: RingSpec) -> Result<f64> {
    a.check(spec)?;
    b.check(spec)?;
    Ok(spec.branch_dist(b.x1 - a.x1, b.x2 - a.x2).0)
}

/// Componentwise `𝕞_1` addition on `T^n`.
pub fn torus_add(a: &[TorusPoint], b: &[TorusPoint]) -> Result<Vec<TorusPoint>> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.iter()
        .zip(b)
        .map(|(x, y)| TorusPoint(wrap(x.0 + y.0, 1.0)))
        .collect())
}

/// Norm of the componentwise `𝕕_1(y_i - x_i)` vector.
pub fn torus_dist(a: &[TorusPoint], b: &[TorusPoint], norm: NormKind) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(norm.combine(a.iter().zip(b).map(|(x, y)| circ(y.0 - x.0, 1.0))))
}

/// Every point at distance zero from the origin: `(𝕞_q(j/p), 𝕞_p(j/q))` for
/// `j = 0..pq`. Ordered by `j`.
pub fn zero_points(spec: RingSpec) -> Vec<RingPoint> {
    (0..spec.branches())
        .map(|j| {
            let (s1, s2) = spec.shift(j);
            RingPoint {
                x1: wrap(s1, spec.q as f64),
                x2: wrap(s2, spec.p as f64),
            }
        })
        .collect()
}

/// Radii of the embedded surface: `big_r` from the hole centre to the tube
/// centre, `small_r` for the tube.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceParams {
    big_r: f64,
    small_r: f64,
}

impl SurfaceParams {
    pub fn new(big_r: f64, small_r: f64) -> Result<Self> {
        if !(big_r.is_finite() && small_r > 0.0 && small_r < big_r) {
            return Err(Error::InvalidSurface { big_r, small_r });
        }
        Ok(Self { big_r, small_r })
    }

    pub fn big_r(&self) -> f64 {
        self.big_r
    }

    pub fn small_r(&self) -> f64 {
        self.small_r
    }
}

impl Default for SurfaceParams {
    fn default() -> Self {
        Self {
            big_r: 2.0,
            small_r: 1.0,
        }
    }
}

/// Point of the twisted surface at angles `(θ, ω)`. Period `4π` in `θ` and
/// `2π` in `ω`, with the extra identification `(θ + 2π, ω + π)`.
pub fn surface_point_mobius(theta: f64, omega: f64, params: &SurfaceParams) -> [f64; 3] {
    let phase = 0.5 * theta + omega;
    let radius = params.big_r + params.small_r * math::cos(phase);
    [
        radius * math::cos(theta),
        radius * math::sin(theta),
        params.small_r * math::sin(phase),
    ]
}

/// Point of the ordinary torus at `(θ, ω)`; period `2π` in both angles.
pub fn surface_point_torus(theta: f64, omega: f64, params: &SurfaceParams) -> [f64; 3] {
    let radius = params.big_r + params.small_r * math::cos(omega);
    [
        radius * math::cos(theta),
        radius * math::sin(theta),
        params.small_r * math::sin(omega),
    ]
}

/// Angles `(θ, ω) = (2π x1, 2π x2)` of a ring point on the surface of `M^2`.
pub fn surface_angles(point: RingPoint) -> (f64, f64) {
    (2.0 * PI * point.x1, 2.0 * PI * point.x2)
}
