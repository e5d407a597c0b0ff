//! Link-prediction ranking and the MR / MRR / HIT@m metrics.
//!
//! Ties use the mid-rank: `rank = 1 + #{strictly smaller} + #{equal} / 2`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::kg::{FilterIndex, Split, Triple, TripleStore};
use crate::sampling::{corrupt, Side};
use crate::training::ModelState;

/// Cut-offs reported as HIT@m.
pub const HITS_AT: [u32; 3] = [1, 3, 10];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankResult {
    pub triple: Triple,
    pub head_rank: f64,
    pub tail_rank: f64,
}

/// Rank of `triple` against every corruption of `side`. With a filter,
/// corruptions that are known true triples are skipped.
pub fn rank_triple(triple: Triple, state: &ModelState, filter: Option<&FilterIndex>, side: Side) -> Result<f64> {
    state.check(triple)?;
    Ok(rank_unchecked(triple, state, filter, side))
}

fn rank_unchecked(triple: Triple, state: &ModelState, filter: Option<&FilterIndex>, side: Side) -> f64 {
    let target = state.score(triple);
    let original = match side {
        Side::Head => triple.head,
        Side::Tail => triple.tail,
    };
    let mut smaller = 0usize;
    let mut equal = 0usize;
    for e in 0..state.num_entities() as u32 {
        if e == original {
            continue;
        }
        let candidate = corrupt(triple, side, e);
        if filter.is_some_and(|f| f.contains(&candidate)) {
            continue;
        }
        let s = state.score(candidate);
        if s < target {
            smaller += 1;
        } else if s == target {
            equal += 1;
        }
    }
    1.0 + smaller as f64 + equal as f64 / 2.0
}

pub fn rank_both(triple: Triple, state: &ModelState, filter: Option<&FilterIndex>) -> Result<RankResult> {
    state.check(triple)?;
    Ok(RankResult {
        triple,
        head_rank: rank_unchecked(triple, state, filter, Side::Head),
        tail_rank: rank_unchecked(triple, state, filter, Side::Tail),
    })
}

/// Running sums behind a [`MetricReport`]. `merge` is associative, so
/// partial accumulators from parallel workers can be combined in any
/// grouping.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricAccumulator {
    count: usize,
    rank_sum: f64,
    reciprocal_sum: f64,
    hits: [usize; 3],
}

impl MetricAccumulator {
    pub fn push(&mut self, rank: f64) {
        self.count += 1;
        self.rank_sum += rank;
        self.reciprocal_sum += 1.0 / rank;
        for (hit, m) in self.hits.iter_mut().zip(HITS_AT) {
            if rank <= m as f64 {
                *hit += 1;
            }
        }
    }

    pub fn push_result(&mut self, r: &RankResult) {
        self.push(r.head_rank);
        self.push(r.tail_rank);
    }

    pub fn merge(mut self, other: Self) -> Self {
        self.count += other.count;
        self.rank_sum += other.rank_sum;
        self.reciprocal_sum += other.reciprocal_sum;
        for (a, b) in self.hits.iter_mut().zip(other.hits) {
            *a += b;
        }
        self
    }

    pub fn finish(&self) -> Result<MetricReport> {
        if self.count == 0 {
            return Err(Error::EmptySplit);
        }
        let n = self.count as f64;
        Ok(MetricReport {
            count: self.count,
            mr: self.rank_sum / n,
            mrr: self.reciprocal_sum / n,
            hits: [
                (HITS_AT[0], self.hits[0] as f64 / n),
                (HITS_AT[1], self.hits[1] as f64 / n),
                (HITS_AT[2], self.hits[2] as f64 / n),
            ],
        })
    }
}

/// Pooled head- and tail-side metrics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    /// Number of ranks pooled (two per triple).
    pub count: usize,
    pub mr: f64,
    pub mrr: f64,
    /// `(m, HIT@m)` for m = 1, 3, 10.
    pub hits: [(u32, f64); 3],
}

impl MetricReport {
    pub fn hits_at(&self, m: u32) -> Option<f64> {
        self.hits.iter().find(|(k, _)| *k == m).map(|(_, v)| *v)
    }

    pub fn from_ranks<I: IntoIterator<Item = f64>>(ranks: I) -> Result<Self> {
        let mut acc = MetricAccumulator::default();
        ranks.into_iter().for_each(|r| acc.push(r));
        acc.finish()
    }
}

pub fn rank_triples(state: &ModelState, triples: &[Triple], filter: Option<&FilterIndex>) -> Result<Vec<RankResult>> {
    triples.iter().map(|&t| rank_both(t, state, filter)).collect()
}

pub fn evaluate_triples(state: &ModelState, triples: &[Triple], filter: Option<&FilterIndex>) -> Result<MetricReport> {
    if triples.is_empty() {
        return Err(Error::EmptySplit);
    }
    let mut acc = MetricAccumulator::default();
    for &t in triples {
        acc.push_result(&rank_both(t, state, filter)?);
    }
    acc.finish()
}

/// Metrics over one split of `store`. Pass `None` as filter for raw ranks.
pub fn evaluate(state: &ModelState, store: &TripleStore, filter: Option<&FilterIndex>, split: Split) -> Result<MetricReport> {
    evaluate_triples(state, store.split(split), filter)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::brute_rank;
    use crate::space::Geometry;
    use alloc::vec;

    /// Torus model with one dimension where entity `i` sits at `pos[i]` and
    /// the single relation is the identity.
    fn line_model(pos: &[f64]) -> ModelState {
        ModelState::from_tables(Geometry::torus(), 1, pos.to_vec(), vec![0.0], 0).unwrap()
    }

    #[test]
    fn rank_examples() {
        // true tail scores 0.2; the other tails score 0.0, 0.1, 0.5, 0.3
        let state = line_model(&[0.0, 0.2, 0.1, 0.5, 0.3]);
        let r = rank_triple(Triple::new(0, 0, 1), &state, None, Side::Tail).unwrap();
        let all: Vec<f64> = [0.0, 0.1, 0.5, 0.3].to_vec();
        assert_eq!(r, brute_rank(0.2, &all));
        assert_eq!(r, 3.0);

        let state = line_model(&[0.0, 0.2, 0.1, 0.5, 0.7]);
        let filter: FilterIndex = [Triple::new(0, 0, 1), Triple::new(0, 0, 0)].into_iter().collect();
        assert_eq!(rank_triple(Triple::new(0, 0, 1), &state, Some(&filter), Side::Tail).unwrap(), 2.0);

        let unique = line_model(&[0.0, 0.05, 0.3, 0.4]);
        assert_eq!(rank_triple(Triple::new(0, 0, 1), &unique, None, Side::Tail).unwrap(), 2.0);
        let filter: FilterIndex = [Triple::new(0, 0, 0)].into_iter().collect();
        assert_eq!(rank_triple(Triple::new(0, 0, 1), &unique, Some(&filter), Side::Tail).unwrap(), 1.0);

        let ties = line_model(&[0.0, 0.2, 0.2, 0.2]);
        let filter: FilterIndex = [Triple::new(0, 0, 0)].into_iter().collect();
        assert_eq!(rank_triple(Triple::new(0, 0, 1), &ties, Some(&filter), Side::Tail).unwrap(), 2.0);
    }

    #[test]
    fn perfect_model_metrics() {
        // entity i at i/4 on the circle, relation shifts by 1/4: i → i+1 mod 4
        let state = ModelState::from_tables(Geometry::torus(), 1, vec![0.0, 0.25, 0.5, 0.75], vec![0.25], 0).unwrap();
        let triples: Vec<Triple> = (0..4).map(|i| Triple::new(i, 0, (i + 1) % 4)).collect();
        let report = evaluate_triples(&state, &triples, None).unwrap();
        assert_eq!(report.mr, 1.0);
        assert_eq!(report.mrr, 1.0);
        assert!(report.hits.iter().all(|&(_, h)| h == 1.0));
        assert_eq!(report.count, 8);
    }

    #[test]
    fn metric_arithmetic() {
        let r = MetricReport::from_ranks([1.0, 2.0, 4.0, 12.0]).unwrap();
        assert_eq!(r.mr, 4.75);
        assert!((r.mrr - (1.0 + 0.5 + 0.25 + 1.0 / 12.0) / 4.0).abs() < 1e-15);
        assert_eq!(r.hits_at(1), Some(0.25));
        assert_eq!(r.hits_at(3), Some(0.5));
        assert_eq!(r.hits_at(10), Some(0.75));
        assert_eq!(r.hits_at(5), None);
        assert_eq!(MetricReport::from_ranks([]), Err(Error::EmptySplit));
        let state = line_model(&[0.0, 0.1]);
        assert_eq!(evaluate_triples(&state, &[], None), Err(Error::EmptySplit));
    }

    #[test]
    fn accumulator_merge_is_associative() {
        let parts = [[1.0, 3.5], [2.0, 7.0], [11.0, 1.5]];
        let acc: Vec<MetricAccumulator> = parts
            .iter()
            .map(|p| {
                let mut a = MetricAccumulator::default();
                p.iter().for_each(|&r| a.push(r));
                a
            })
            .collect();
        let left = acc[0].merge(acc[1]).merge(acc[2]).finish().unwrap();
        let right = acc[0].merge(acc[1].merge(acc[2])).finish().unwrap();
        assert_eq!(left.count, right.count);
        assert!((left.mr - right.mr).abs() < 1e-12);
        assert!((left.mrr - right.mrr).abs() < 1e-12);
        assert_eq!(left.hits, right.hits);
    }

    #[test]
    fn out_of_vocabulary() {
        let state = line_model(&[0.0, 0.1]);
        assert!(matches!(
            rank_triple(Triple::new(0, 0, 9), &state, None, Side::Head),
            Err(Error::OutOfVocabulary { id: 9, .. })
        ));
        assert!(rank_triple(Triple::new(0, 3, 1), &state, None, Side::Head).is_err());
    }
}
