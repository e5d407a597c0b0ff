//! Synthetic compositional knowledge graphs.
//!
//! Entities are the elements of the cyclic group `Z_m` and every relation is
//! a translation `e ↦ e + a (mod m)` by a random offset, so that each
//! relation is one-to-one and paths compose. Such graphs are exactly
//! representable by translation models on compact spaces, which makes them a
//! useful smoke test for end-to-end training.

use mobiuse_core::{Triple, TripleStore};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticConfig {
    pub entities: u32,
    pub relations: u32,
    /// Fraction of triples moved to the test split.
    pub test_fraction: f64,
    /// Fraction of triples moved to the validation split.
    pub valid_fraction: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            entities: 200,
            relations: 10,
            test_fraction: 0.1,
            valid_fraction: 0.0,
            seed: 0,
        }
    }
}

/// Builds the graph: one triple per (entity, relation) pair, shuffled, with
/// held-out triples chosen so that every entity keeps at least one training
/// triple.
pub fn translation_graph(config: &SyntheticConfig) -> Result<TripleStore> {
    let m = config.entities.max(2);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let offsets: Vec<u32> = (0..config.relations).map(|_| rng.gen_range(1..m)).collect();
    let mut all: Vec<Triple> = (0..m)
        .flat_map(|e| offsets.iter().enumerate().map(move |(r, &a)| Triple::new(e, r as u32, (e + a) % m)))
        .collect();
    all.shuffle(&mut rng);

    let total = all.len();
    let n_test = (total as f64 * config.test_fraction).round() as usize;
    let n_valid = (total as f64 * config.valid_fraction).round() as usize;
    let mut degree = vec![0usize; m as usize];
    let mut rel_count = vec![0usize; config.relations as usize];
    for t in &all {
        degree[t.head as usize] += 1;
        degree[t.tail as usize] += 1;
        rel_count[t.relation as usize] += 1;
    }
    let (mut train, mut valid, mut test) = (Vec::new(), Vec::new(), Vec::new());
    for t in all {
        let (h, tl, r) = (t.head as usize, t.tail as usize, t.relation as usize);
        let need = if h == tl { 2 } else { 1 };
        let removable = degree[h] > need && degree[tl] > need && rel_count[r] > 1;
        if removable && test.len() < n_test {
            test.push(t);
        } else if removable && valid.len() < n_valid {
            valid.push(t);
        } else {
            train.push(t);
            continue;
        }
        degree[h] -= 1;
        degree[tl] -= 1;
        rel_count[r] -= 1;
    }
    Ok(TripleStore::from_ids(m, config.relations, &train, &valid, &test)?)
}
