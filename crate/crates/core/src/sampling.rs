//! Bern negative sampling.

use rand::Rng;

use crate::error::{Error, Result};
use crate::kg::{FilterIndex, RelationStats, Triple};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Head,
    Tail,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Head => Side::Tail,
            Side::Tail => Side::Head,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NegativeSample {
    pub triple: Triple,
    pub corrupted_side: Side,
}

/// Replaces one side of `triple` with `entity`.
#[inline]
pub fn corrupt(triple: Triple, side: Side, entity: u32) -> Triple {
    match side {
        Side::Head => Triple { head: entity, ..triple },
        Side::Tail => Triple { tail: entity, ..triple },
    }
}

/// Draws corrupted triples outside `filter`, choosing the head with
/// probability `tph / (tph + hpt)`.
#[derive(Debug, Clone, Copy)]
pub struct BernSampler<'a> {
    stats: &'a RelationStats,
    filter: &'a FilterIndex,
    num_entities: u32,
    attempts: usize,
}

impl<'a> BernSampler<'a> {
    pub const DEFAULT_ATTEMPTS: usize = 100;

    pub fn new(stats: &'a RelationStats, filter: &'a FilterIndex, num_entities: usize) -> Result<Self> {
        if num_entities < 2 {
            return Err(Error::TooFewEntities(num_entities));
        }
        Ok(Self {
            stats,
            filter,
            num_entities: num_entities as u32,
            attempts: Self::DEFAULT_ATTEMPTS,
        })
    }

    /// Rejection budget per side.
    pub fn with_attempts(self, attempts: usize) -> Self {
        Self { attempts, ..self }
    }

    pub fn sample<R: Rng + ?Sized>(&self, positive: Triple, rng: &mut R) -> Result<NegativeSample> {
        let p_head = self.stats.head_probability(positive.relation);
        let first = if rng.gen::<f64>() < p_head { Side::Head } else { Side::Tail };
        for side in [first, first.other()] {
            let original = match side {
                Side::Head => positive.head,
                Side::Tail => positive.tail,
            };
            for _ in 0..self.attempts {
                // uniform over E \ {original}
                let mut e = rng.gen_range(0..self.num_entities - 1);
                if e >= original {
                    e += 1;
                }
                let candidate = corrupt(positive, side, e);
                if !self.filter.contains(&candidate) {
                    return Ok(NegativeSample {
                        triple: candidate,
                        corrupted_side: side,
                    });
                }
            }
        }
        Err(Error::SamplingExhausted {
            h: positive.head,
            r: positive.relation,
            t: positive.tail,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::relation_stats;
    use alloc::vec::Vec;
    use hashbrown::HashSet;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_entity_candidates() {
        // H ∪ T − Δ for (a, r, b) with E = {a, b}: {(b, r, b), (a, r, a)}
        let pos = Triple::new(0, 0, 1);
        let filter: FilterIndex = [pos].into_iter().collect();
        let stats = relation_stats(&[pos], 1);
        let sampler = BernSampler::new(&stats, &filter, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let seen: HashSet<Triple> = (0..200).map(|_| sampler.sample(pos, &mut rng).unwrap().triple).collect();
        let expected: HashSet<Triple> = [Triple::new(1, 0, 1), Triple::new(0, 0, 0)].into_iter().collect();
        assert_eq!(seen, expected);
    }

    #[test]
    fn head_frequency_follows_bern() {
        let stats = RelationStats::from_pairs(&[(3.0, 1.0), (2.0, 2.0)]);
        assert_eq!(stats.head_probability(0), 0.75);
        assert_eq!(stats.head_probability(1), 0.5);
        let filter = FilterIndex::default();
        let sampler = BernSampler::new(&stats, &filter, 1000).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (r, p) in [(0u32, 0.75), (1, 0.5)] {
            let draws = 100_000;
            let heads = (0..draws)
                .filter(|_| sampler.sample(Triple::new(3, r, 9), &mut rng).unwrap().corrupted_side == Side::Head)
                .count();
            let freq = heads as f64 / draws as f64;
            assert!((freq - p).abs() <= 0.01, "relation {r}: {freq}");
        }
    }

    #[test]
    fn negatives_avoid_filter_and_differ_in_one_slot() {
        let train: Vec<Triple> = (0..30u32).map(|i| Triple::new(i % 10, 0, (i * 3) % 10)).collect();
        let filter: FilterIndex = train.iter().copied().collect();
        let stats = relation_stats(&train, 1);
        let sampler = BernSampler::new(&stats, &filter, 10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for &pos in &train {
            for _ in 0..20 {
                let neg = sampler.sample(pos, &mut rng).unwrap();
                assert!(!filter.contains(&neg.triple));
                let changed = (neg.triple.head != pos.head) as u8 + (neg.triple.tail != pos.tail) as u8;
                assert_eq!(changed, 1);
                assert_eq!(neg.triple.relation, pos.relation);
            }
        }
    }

    #[test]
    fn seeded_stream_is_deterministic() {
        let stats = RelationStats::uniform(1);
        let filter = FilterIndex::default();
        let sampler = BernSampler::new(&stats, &filter, 50).unwrap();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..100).map(|_| sampler.sample(Triple::new(1, 0, 2), &mut rng).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(draw(5), draw(5));
        assert_ne!(draw(5), draw(6));
    }

    #[test]
    fn degenerate_graphs() {
        let stats = RelationStats::uniform(1);
        let filter = FilterIndex::default();
        assert_eq!(BernSampler::new(&stats, &filter, 1).unwrap_err(), Error::TooFewEntities(1));

        // every corruption is a known triple
        let full: FilterIndex = (0..2).flat_map(|h| (0..2).map(move |t| Triple::new(h, 0, t))).collect();
        let sampler = BernSampler::new(&stats, &full, 2).unwrap().with_attempts(5);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            sampler.sample(Triple::new(0, 0, 1), &mut rng),
            Err(Error::SamplingExhausted { .. })
        ));
    }
}
