//! Product embedding spaces: `M^{q/p}_n`, `T^n` and `R^n`.
//!
//! Embedding vectors are stored flat. A Möbius vector of dimension `n` holds
//! `2n` coordinates laid out ring by ring, `[x1_0, x2_0, x1_1, x2_1, ...]`;
//! torus and Euclidean vectors hold `n`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::math;
use crate::ring::{self, circ, circ_slope, wrap, RingPoint, RingSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum NormKind {
    #[default]
    L1,
    L2,
}

impl NormKind {
    pub fn combine<I: IntoIterator<Item = f64>>(self, parts: I) -> f64 {
        match self {
            NormKind::L1 => parts.into_iter().sum(),
            NormKind::L2 => math::sqrt(parts.into_iter().map(|d| d * d).sum()),
        }
    }
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormKind::L1 => "L1",
            NormKind::L2 => "L2",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GeometryKind {
    /// MöbiusE on `M^{q/p}_n`.
    Mobius(RingSpec),
    /// TorusE on `T^n`.
    Torus,
    /// TransE on `R^n`.
    Euclidean,
}

/// An embedding space together with the norm used to combine per-dimension
/// distances into a score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Geometry {
    pub kind: GeometryKind,
    pub norm: NormKind,
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GeometryKind::Mobius(spec) => write!(f, "MobiusE({},{})", spec.q(), spec.p())?,
            GeometryKind::Torus => f.write_str("TorusE")?,
            GeometryKind::Euclidean => f.write_str("TransE")?,
        }
        write!(f, "/{}", self.norm)
    }
}

/// Subgradient of a triple score with respect to each coordinate of the head,
/// relation and tail vectors.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScoreGradient {
    pub grad_h: Vec<f64>,
    pub grad_r: Vec<f64>,
    pub grad_t: Vec<f64>,
}

impl Geometry {
    pub fn mobius(spec: RingSpec) -> Self {
        Self {
            kind: GeometryKind::Mobius(spec),
            norm: NormKind::L1,
        }
    }

    pub fn torus() -> Self {
        Self {
            kind: GeometryKind::Torus,
            norm: NormKind::L1,
        }
    }

    pub fn euclidean() -> Self {
        Self {
            kind: GeometryKind::Euclidean,
            norm: NormKind::L1,
        }
    }

    pub fn with_norm(self, norm: NormKind) -> Self {
        Self { norm, ..self }
    }

    pub fn ring(&self) -> Option<RingSpec> {
        match self.kind {
            GeometryKind::Mobius(spec) => Some(spec),
            _ => None,
        }
    }

    /// Stored coordinates per embedding dimension.
    #[inline]
    pub fn coords_per_dim(&self) -> usize {
        match self.kind {
            GeometryKind::Mobius(_) => 2,
            _ => 1,
        }
    }

    /// Stored coordinates of a `dim`-dimensional vector.
    #[inline]
    pub fn width(&self, dim: usize) -> usize {
        dim * self.coords_per_dim()
    }

    /// Whether every coordinate lies in its canonical range.
    pub fn is_canonical(&self, row: &[f64]) -> bool {
        match self.kind {
            GeometryKind::Mobius(spec) => row.chunks_exact(2).all(|c| {
                (0.0..spec.q() as f64).contains(&c[0]) && (0.0..spec.p() as f64).contains(&c[1])
            }),
            GeometryKind::Torus => row.iter().all(|x| (0.0..1.0).contains(x)),
            GeometryKind::Euclidean => row.iter().all(|x| x.is_finite()),
        }
    }

    /// Maps every coordinate back into its canonical range. No-op for
    /// Euclidean vectors.
    pub fn canonicalize(&self, row: &mut [f64]) {
        match self.kind {
            GeometryKind::Mobius(spec) => {
                let (q, p) = (spec.q() as f64, spec.p() as f64);
                for c in row.chunks_exact_mut(2) {
                    c[0] = wrap(c[0], q);
                    c[1] = wrap(c[1], p);
                }
            }
            GeometryKind::Torus => {
                for x in row {
                    *x = wrap(*x, 1.0);
                }
            }
            GeometryKind::Euclidean => {}
        }
    }

    /// Fills `row` uniformly over the canonical range. Euclidean vectors are
    /// drawn from `[-6/√n, 6/√n]`.
    pub fn init_row<R: Rng + ?Sized>(&self, row: &mut [f64], rng: &mut R) {
        match self.kind {
            GeometryKind::Mobius(spec) => {
                let (q, p) = (spec.q() as f64, spec.p() as f64);
                for c in row.chunks_exact_mut(2) {
                    c[0] = wrap(rng.gen::<f64>() * q, q);
                    c[1] = wrap(rng.gen::<f64>() * p, p);
                }
            }
            GeometryKind::Torus => {
                for x in row {
                    *x = rng.gen::<f64>();
                }
            }
            GeometryKind::Euclidean => {
                let bound = 6.0 / math::sqrt(row.len().max(1) as f64);
                for x in row {
                    *x = rng.gen_range(-bound..=bound);
                }
            }
        }
    }

    fn check_shapes(&self, h: &[f64], r: &[f64], t: &[f64]) -> Result<()> {
        for other in [r.len(), t.len()] {
            if other != h.len() {
                return Err(Error::LengthMismatch {
                    left: h.len(),
                    right: other,
                });
            }
        }
        if h.is_empty() {
            return Err(Error::EmptyVector);
        }
        let k = self.coords_per_dim();
        if !h.len().is_multiple_of(k) {
            return Err(Error::LengthMismatch {
                left: h.len(),
                right: h.len() / k * k,
            });
        }
        Ok(())
    }

    /// `f(h, r, t) = dist(h ⊕ r, t)`; for TransE, `‖h + r − t‖`.
    pub fn score(&self, h: &[f64], r: &[f64], t: &[f64]) -> Result<f64> {
        self.check_shapes(h, r, t)?;
        Ok(self.score_unchecked(h, r, t))
    }

    /// [`Geometry::score`] without shape checks. Inputs need not be
    /// canonical.
    #[inline]
    pub fn score_unchecked(&self, h: &[f64], r: &[f64], t: &[f64]) -> f64 {
        self.norm.combine(self.components(h, r, t).map(|(d, _)| d))
    }

    /// Per-dimension `(distance, slope)` pairs, where `slope` holds the
    /// derivative of that distance with respect to the tail coordinate(s).
    /// Head and relation coordinates have the negated slope.
    #[inline]
    fn components<'a>(
        &self,
        h: &'a [f64],
        r: &'a [f64],
        t: &'a [f64],
    ) -> impl Iterator<Item = (f64, [f64; 2])> + 'a {
        let kind = self.kind;
        let k = self.coords_per_dim();
        h.chunks_exact(k)
            .zip(r.chunks_exact(k))
            .zip(t.chunks_exact(k))
            .map(move |((h, r), t)| match kind {
                GeometryKind::Mobius(spec) => {
                    let (q, p) = (spec.q() as f64, spec.p() as f64);
                    let dy1 = t[0] - wrap(h[0] + r[0], q);
                    let dy2 = t[1] - wrap(h[1] + r[1], p);
                    let (d, j) = spec.branch_dist(dy1, dy2);
                    let (s1, s2) = spec.shift(j);
                    (d, [circ_slope(dy1 + s1, q), circ_slope(dy2 + s2, p)])
                }
                GeometryKind::Torus => {
                    let dy = t[0] - wrap(h[0] + r[0], 1.0);
                    (circ(dy, 1.0), [circ_slope(dy, 1.0), 0.0])
                }
                GeometryKind::Euclidean => {
                    let e = h[0] + r[0] - t[0];
                    let slope = if e > 0.0 {
                        -1.0
                    } else if e < 0.0 {
                        1.0
                    } else {
                        0.0
                    };
                    (e.abs(), [slope, 0.0])
                }
            })
    }

    /// Computes the score and adds `weight ×` its subgradient into the three
    /// gradient buffers. Ties between branches resolve to the lowest branch;
    /// kinks contribute 0.
    #[allow(clippy::too_many_arguments)]
    pub fn accumulate_subgradient(
        &self,
        h: &[f64],
        r: &[f64],
        t: &[f64],
        weight: f64,
        grad_h: &mut [f64],
        grad_r: &mut [f64],
        grad_t: &mut [f64],
    ) -> f64 {
        let k = self.coords_per_dim();
        let (score, scale) = match self.norm {
            NormKind::L1 => (self.score_unchecked(h, r, t), None),
            NormKind::L2 => {
                let s = self.score_unchecked(h, r, t);
                (s, Some(s))
            }
        };
        if scale == Some(0.0) {
            return score;
        }
        for (i, (d, slope)) in self.components(h, r, t).enumerate() {
            let w = match scale {
                None => weight,
                Some(norm) => weight * d / norm,
            };
            for (c, s) in slope.iter().take(k).enumerate() {
                let g = w * s;
                let idx = i * k + c;
                grad_t[idx] += g;
                grad_h[idx] -= g;
                grad_r[idx] -= g;
            }
        }
        score
    }

    pub fn score_subgradient(&self, h: &[f64], r: &[f64], t: &[f64]) -> Result<(f64, ScoreGradient)> {
        self.check_shapes(h, r, t)?;
        let mut g = ScoreGradient {
            grad_h: vec![0.0; h.len()],
            grad_r: vec![0.0; h.len()],
            grad_t: vec![0.0; h.len()],
        };
        let score = self.accumulate_subgradient(h, r, t, 1.0, &mut g.grad_h, &mut g.grad_r, &mut g.grad_t);
        Ok((score, g))
    }
}

/// An element of `M^{q/p}_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct RingVector {
    spec: RingSpec,
    points: Vec<RingPoint>,
}

impl RingVector {
    pub fn new(spec: RingSpec, points: Vec<RingPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyVector);
        }
        let points = points
            .into_iter()
            .map(|p| RingPoint::new(p.x1, p.x2, spec))
            .collect::<Result<_>>()?;
        Ok(Self { spec, points })
    }

    pub fn zeros(spec: RingSpec, n: usize) -> Result<Self> {
        Self::new(spec, vec![RingPoint::ORIGIN; n])
    }

    /// Builds a vector from interleaved `[x1, x2, x1, x2, ...]` coordinates.
    pub fn from_flat(spec: RingSpec, coords: &[f64]) -> Result<Self> {
        if !coords.len().is_multiple_of(2) {
            return Err(Error::LengthMismatch {
                left: coords.len(),
                right: coords.len() - 1,
            });
        }
        Self::new(
            spec,
            coords.chunks_exact(2).map(|c| RingPoint { x1: c[0], x2: c[1] }).collect(),
        )
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.points.iter().flat_map(|p| [p.x1, p.x2]).collect()
    }

    pub fn spec(&self) -> RingSpec {
        self.spec
    }

    pub fn points(&self) -> &[RingPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn check_compatible(&self, other: &RingVector) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::RingMismatch {
                left: self.spec,
                right: other.spec,
            });
        }
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        Ok(())
    }
}

/// `u ⊕ v`, ring by ring.
pub fn vec_add(u: &RingVector, v: &RingVector) -> Result<RingVector> {
    u.check_compatible(v)?;
    let points = u
        .points
        .iter()
        .zip(&v.points)
        .map(|(a, b)| ring::mobius_add(*a, *b, u.spec))
        .collect::<Result<_>>()?;
    Ok(RingVector { spec: u.spec, points })
}

/// Norm of the vector of per-ring distances.
pub fn vec_dist(u: &RingVector, v: &RingVector, norm: NormKind) -> Result<f64> {
    u.check_compatible(v)?;
    let parts = u
        .points
        .iter()
        .zip(&v.points)
        .map(|(a, b)| ring::mobius_dist(*a, *b, u.spec))
        .collect::<Result<Vec<_>>>()?;
    Ok(norm.combine(parts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use proptest::prelude::*;

    fn rv(spec: RingSpec, pts: &[(f64, f64)]) -> RingVector {
        RingVector::new(spec, pts.iter().map(|&(x1, x2)| RingPoint { x1, x2 }).collect()).unwrap()
    }

    #[test]
    fn vector_addition_examples() {
        let m2 = RingSpec::MOBIUS_2;
        let u = rv(m2, &[(1.5, 0.7), (0.5, 0.5)]);
        let v = rv(m2, &[(0.8, 0.6), (1.5, 0.5)]);
        let s = vec_add(&u, &v).unwrap();
        let expect = [(0.3, 0.3), (0.0, 0.0)];
        for (p, (a, b)) in s.points().iter().zip(expect) {
            assert!((p.x1 - a).abs() < 1e-12 && (p.x2 - b).abs() < 1e-12);
        }
        assert_eq!(vec_add(&u, &RingVector::zeros(m2, 2).unwrap()).unwrap(), u);

        let a = rv(m2, &[(1.2, 0.1)]);
        let b = rv(m2, &[(1.7, 0.95)]);
        let sum = ring::mobius_add(a.points()[0], b.points()[0], m2).unwrap();
        assert_eq!(vec_add(&a, &b).unwrap().points()[0], sum);
    }

    #[test]
    fn vector_distance_examples() {
        let m2 = RingSpec::MOBIUS_2;
        let u = RingVector::zeros(m2, 2).unwrap();
        let v = rv(m2, &[(0.5, 0.25), (0.5, 0.25)]);
        assert_eq!(vec_dist(&u, &v, NormKind::L1).unwrap(), 1.5);
        assert_eq!(vec_dist(&v, &v, NormKind::L1).unwrap(), 0.0);
        let l2 = vec_dist(&u, &v, NormKind::L2).unwrap();
        assert!((l2 - 0.75 * 2f64.sqrt()).abs() < 1e-12);

        let a = rv(m2, &[(1.2, 0.1)]);
        let b = rv(m2, &[(0.3, 0.95)]);
        assert_eq!(
            vec_dist(&a, &b, NormKind::L1).unwrap(),
            ring::mobius_dist(a.points()[0], b.points()[0], m2).unwrap()
        );
    }

    #[test]
    fn vector_shape_errors() {
        let m2 = RingSpec::MOBIUS_2;
        let s31 = RingSpec::new(3, 1).unwrap();
        let a = RingVector::zeros(m2, 2).unwrap();
        assert!(matches!(vec_add(&a, &RingVector::zeros(m2, 3).unwrap()), Err(Error::LengthMismatch { .. })));
        assert!(matches!(vec_dist(&a, &RingVector::zeros(s31, 2).unwrap(), NormKind::L1), Err(Error::RingMismatch { .. })));
        assert_eq!(RingVector::zeros(m2, 0), Err(Error::EmptyVector));
        assert!(RingVector::from_flat(m2, &[0.1, 0.2, 0.3]).is_err());
    }

    #[test]
    fn score_examples() {
        let m2 = Geometry::mobius(RingSpec::MOBIUS_2);
        let h = [1.3, 0.2, 0.4, 0.9];
        let r = [1.9, 0.7, 0.2, 0.4];
        let mut t = [0.0; 4];
        for i in 0..4 {
            t[i] = h[i] + r[i];
        }
        m2.canonicalize(&mut t);
        assert_eq!(m2.score(&h, &r, &t).unwrap(), 0.0);

        let torus = Geometry::torus();
        assert!((torus.score(&[0.4], &[0.5], &[0.0]).unwrap() - 0.1).abs() < 1e-12);

        assert_eq!(m2.score(&[0.0, 0.0], &[1.0, 0.5], &[0.0, 0.0]).unwrap(), 0.0);

        let transe = Geometry::euclidean();
        assert_eq!(transe.score(&[1.0, 2.0], &[0.5, -1.0], &[1.0, 1.0]).unwrap(), 0.5);
        let l2 = transe.with_norm(NormKind::L2);
        assert_eq!(l2.score(&[3.0, 0.0], &[0.0, 4.0], &[0.0, 0.0]).unwrap(), 5.0);
    }

    #[test]
    fn score_shape_errors() {
        let m2 = Geometry::mobius(RingSpec::MOBIUS_2);
        assert!(m2.score(&[0.0, 0.0], &[0.0, 0.0], &[0.0]).is_err());
        assert!(m2.score(&[0.0], &[0.0], &[0.0]).is_err());
        assert_eq!(Geometry::torus().score(&[], &[], &[]), Err(Error::EmptyVector));
    }

    #[test]
    fn torus_sign_rule() {
        let (s, g) = Geometry::torus().score_subgradient(&[0.0], &[0.1], &[0.0]).unwrap();
        assert!((s - 0.1).abs() < 1e-12);
        assert_eq!(g.grad_r, [1.0]);
        assert_eq!(g.grad_h, [1.0]);
        assert_eq!(g.grad_t, [-1.0]);
    }

    #[test]
    fn zero_gradient_at_minimum() {
        for geometry in [
            Geometry::mobius(RingSpec::MOBIUS_2),
            Geometry::mobius(RingSpec::new(3, 2).unwrap()),
            Geometry::torus(),
            Geometry::euclidean(),
            Geometry::euclidean().with_norm(NormKind::L2),
            Geometry::torus().with_norm(NormKind::L2),
        ] {
            let h: Vec<f64> = (0..geometry.width(3)).map(|i| 0.1 * i as f64).collect();
            let r: Vec<f64> = (0..geometry.width(3)).map(|i| 0.05 + 0.07 * i as f64).collect();
            let mut t: Vec<f64> = h.iter().zip(&r).map(|(a, b)| a + b).collect();
            geometry.canonicalize(&mut t);
            let (s, g) = geometry.score_subgradient(&h, &r, &t).unwrap();
            assert_eq!(s, 0.0, "{geometry}");
            assert!(g.grad_h.iter().chain(&g.grad_r).chain(&g.grad_t).all(|&x| x == 0.0), "{geometry}");
        }
    }

    #[test]
    fn kink_slopes_are_zero() {
        // 𝕞_1(dy) = 1/2 exactly on the torus
        let (s, g) = Geometry::torus().score_subgradient(&[0.0], &[0.25], &[0.75]).unwrap();
        assert_eq!(s, 0.5);
        assert_eq!(g.grad_t, [0.0]);
    }

    #[test]
    fn lowest_branch_wins_ties() {
        // dy = (0.5, 0.25) on M^2: both branches give 3/4; branch 0 has slopes (+1, +1)
        let m2 = Geometry::mobius(RingSpec::MOBIUS_2);
        let (s, g) = m2.score_subgradient(&[0.0, 0.0], &[0.0, 0.0], &[0.5, 0.25]).unwrap();
        assert_eq!(s, 0.75);
        assert_eq!(g.grad_t, [1.0, 1.0]);
        assert_eq!(g.grad_h, [-1.0, -1.0]);
    }

    fn geometries() -> Vec<Geometry> {
        vec![
            Geometry::mobius(RingSpec::MOBIUS_2),
            Geometry::mobius(RingSpec::new(3, 1).unwrap()),
            Geometry::mobius(RingSpec::new(3, 2).unwrap()),
            Geometry::mobius(RingSpec::new(3, 2).unwrap()).with_norm(NormKind::L2),
            Geometry::torus(),
            Geometry::torus().with_norm(NormKind::L2),
            Geometry::euclidean(),
            Geometry::euclidean().with_norm(NormKind::L2),
        ]
    }

    fn unit_rows(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0..1.0f64, n)
    }

    /// Scales unit-interval draws onto the canonical range of `geometry`.
    fn place(geometry: &Geometry, unit: &[f64]) -> Vec<f64> {
        match geometry.kind {
            GeometryKind::Mobius(spec) => {
                let (q, p) = (spec.q() as f64, spec.p() as f64);
                unit.chunks_exact(2).flat_map(|c| [wrap(c[0] * q, q), wrap(c[1] * p, p)]).collect()
            }
            GeometryKind::Torus => unit.to_vec(),
            GeometryKind::Euclidean => unit.iter().map(|x| 4.0 * x - 2.0).collect(),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn subgradient_matches_finite_differences(
            which in 0usize..8,
            h in unit_rows(6), r in unit_rows(6), t in unit_rows(6),
        ) {
            let geometry = geometries()[which];
            let n = geometry.width(3);
            let (h, r, t) = (place(&geometry, &h[..n]), place(&geometry, &r[..n]), place(&geometry, &t[..n]));
            let (_, g) = geometry.score_subgradient(&h, &r, &t).unwrap();
            let mut point = h.clone();
            point.extend(&r);
            point.extend(&t);
            let f = |x: &[f64]| geometry.score_unchecked(&x[..n], &x[n..2 * n], &x[2 * n..]);
            let fd = oracle::finite_diff_grad(f, &point, 1e-6);
            prop_assume!(!fd.has_kink());
            let analytic: Vec<f64> = g.grad_h.iter().chain(&g.grad_r).chain(&g.grad_t).copied().collect();
            for (a, e) in analytic.iter().zip(&fd.gradient) {
                prop_assert!((a - e).abs() / e.abs().max(1.0) <= 1e-5, "{geometry}: {a} vs {e}");
            }
        }

        #[test]
        fn translation_invariance(
            which in 0usize..6,
            h in unit_rows(6), r in unit_rows(6), t in unit_rows(6), c in unit_rows(6),
        ) {
            let geometry = geometries()[which];
            prop_assume!(geometry.kind != GeometryKind::Euclidean);
            let n = geometry.width(3);
            let (h, r, t, c) = (
                place(&geometry, &h[..n]), place(&geometry, &r[..n]),
                place(&geometry, &t[..n]), place(&geometry, &c[..n]),
            );
            let mut hc: Vec<f64> = h.iter().zip(&c).map(|(a, b)| a + b).collect();
            let mut tc: Vec<f64> = t.iter().zip(&c).map(|(a, b)| a + b).collect();
            geometry.canonicalize(&mut hc);
            geometry.canonicalize(&mut tc);
            let a = geometry.score(&h, &r, &t).unwrap();
            let b = geometry.score(&hc, &r, &tc).unwrap();
            prop_assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
        }

        #[test]
        fn score_bounds(which in 0usize..6, h in unit_rows(8), r in unit_rows(8), t in unit_rows(8)) {
            let geometry = geometries()[which];
            let dim = 4;
            let n = geometry.width(dim);
            let (h, r, t) = (place(&geometry, &h[..n]), place(&geometry, &r[..n]), place(&geometry, &t[..n]));
            let s = geometry.score(&h, &r, &t).unwrap();
            let per_dim = match geometry.kind {
                GeometryKind::Mobius(spec) if spec == RingSpec::MOBIUS_2 => spec.claimed_bound(),
                GeometryKind::Mobius(spec) => spec.trivial_bound(),
                _ => 0.5,
            };
            prop_assert!(s >= 0.0);
            prop_assert!(s <= dim as f64 * per_dim + 1e-12);
        }

        #[test]
        fn mobius_with_zero_first_coordinates_is_torus(x in unit_rows(5), y in unit_rows(5), z in unit_rows(5)) {
            let m2 = Geometry::mobius(RingSpec::MOBIUS_2);
            let lift = |v: &[f64]| v.iter().flat_map(|&x| [0.0, x]).collect::<Vec<_>>();
            let a = m2.score(&lift(&x), &lift(&y), &lift(&z)).unwrap();
            let b = Geometry::torus().score(&x, &y, &z).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
