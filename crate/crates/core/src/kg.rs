//! Triple storage, vocabularies, relation statistics and the filter index.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use hashbrown::{HashMap, HashSet};

use crate::error::{Error, Result};

pub type EntityId = u32;
pub type RelationId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub head: EntityId,
    pub relation: RelationId,
    pub tail: EntityId,
}

impl Triple {
    pub const fn new(head: EntityId, relation: RelationId, tail: EntityId) -> Self {
        Self { head, relation, tail }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Valid,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Valid, Split::Test];

    pub fn name(&self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Valid => "valid",
            Split::Test => "test",
        }
    }
}

/// Dense string ↔ id mapping in first-appearance order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Vocab {
    names: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocab {
    pub fn get(&self, name: &str) -> Option<u32> {
        self.index.get(name).copied()
    }

    pub fn get_or_insert(&mut self, name: &str) -> u32 {
        if let Some(id) = self.index.get(name) {
            return *id;
        }
        let id = self.names.len() as u32;
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        id
    }

    pub fn name(&self, id: u32) -> Option<&str> {
        self.names.get(id as usize).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

impl<S: AsRef<str>> FromIterator<S> for Vocab {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        let mut v = Vocab::default();
        for name in iter {
            v.get_or_insert(name.as_ref());
        }
        v
    }
}

/// Encoded triples of the three splits plus their vocabularies.
///
/// Ids are dense, and no split holds the same triple twice.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TripleStore {
    pub entities: Vocab,
    pub relations: Vocab,
    train: Vec<Triple>,
    valid: Vec<Triple>,
    test: Vec<Triple>,
    seen: [HashSet<Triple>; 3],
}

/// Outcome of [`TripleStore::insert`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Insert {
    Added(Triple),
    /// Already present in that split.
    Duplicate(Triple),
    /// An entity or relation was not seen in train (only with
    /// `train_vocab_only`).
    Unseen,
}

impl TripleStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a store from id triples over anonymous vocabularies
    /// `e0..`, `r0..`, sized to cover every id.
    pub fn from_ids(num_entities: u32, num_relations: u32, train: &[Triple], valid: &[Triple], test: &[Triple]) -> Result<Self> {
        let mut store = TripleStore {
            entities: (0..num_entities).map(|i| alloc::format!("e{i}")).collect(),
            relations: (0..num_relations).map(|i| alloc::format!("r{i}")).collect(),
            ..Default::default()
        };
        for (split, triples) in [(Split::Train, train), (Split::Valid, valid), (Split::Test, test)] {
            for &t in triples {
                store.check(t)?;
                store.push(split, t);
            }
        }
        Ok(store)
    }

    /// Adds a named triple. With `train_vocab_only`, valid/test triples
    /// naming an entity or relation absent from the vocabulary are refused
    /// instead of extending it.
    pub fn insert(&mut self, split: Split, head: &str, relation: &str, tail: &str, train_vocab_only: bool) -> Insert {
        let triple = if train_vocab_only && split != Split::Train {
            match (self.entities.get(head), self.relations.get(relation), self.entities.get(tail)) {
                (Some(h), Some(r), Some(t)) => Triple::new(h, r, t),
                _ => return Insert::Unseen,
            }
        } else {
            let h = self.entities.get_or_insert(head);
            let r = self.relations.get_or_insert(relation);
            let t = self.entities.get_or_insert(tail);
            Triple::new(h, r, t)
        };
        if self.push(split, triple) {
            Insert::Added(triple)
        } else {
            Insert::Duplicate(triple)
        }
    }

    fn push(&mut self, split: Split, triple: Triple) -> bool {
        let idx = split as usize;
        if !self.seen[idx].insert(triple) {
            return false;
        }
        match split {
            Split::Train => self.train.push(triple),
            Split::Valid => self.valid.push(triple),
            Split::Test => self.test.push(triple),
        }
        true
    }

    /// Errors unless every id of `triple` is in range.
    pub fn check(&self, triple: Triple) -> Result<()> {
        for e in [triple.head, triple.tail] {
            if e as usize >= self.entities.len() {
                return Err(Error::OutOfVocabulary {
                    id: e,
                    size: self.entities.len(),
                });
            }
        }
        if triple.relation as usize >= self.relations.len() {
            return Err(Error::OutOfVocabulary {
                id: triple.relation,
                size: self.relations.len(),
            });
        }
        Ok(())
    }

    pub fn split(&self, split: Split) -> &[Triple] {
        match split {
            Split::Train => &self.train,
            Split::Valid => &self.valid,
            Split::Test => &self.test,
        }
    }

    pub fn train(&self) -> &[Triple] {
        &self.train
    }

    pub fn num_entities(&self) -> usize {
        self.entities.len()
    }

    pub fn num_relations(&self) -> usize {
        self.relations.len()
    }

    pub fn encode(&self, head: &str, relation: &str, tail: &str) -> Option<Triple> {
        Some(Triple::new(
            self.entities.get(head)?,
            self.relations.get(relation)?,
            self.entities.get(tail)?,
        ))
    }

    pub fn decode(&self, triple: Triple) -> Option<(&str, &str, &str)> {
        Some((
            self.entities.name(triple.head)?,
            self.relations.name(triple.relation)?,
            self.entities.name(triple.tail)?,
        ))
    }
}

/// Per-relation Bern statistics: mean tails per head (`tph`) and mean heads
/// per tail (`hpt`), from the training split.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationStats {
    tph: Vec<f64>,
    hpt: Vec<f64>,
}

impl RelationStats {
    pub fn tph(&self, relation: RelationId) -> f64 {
        self.tph.get(relation as usize).copied().unwrap_or(1.0)
    }

    pub fn hpt(&self, relation: RelationId) -> f64 {
        self.hpt.get(relation as usize).copied().unwrap_or(1.0)
    }

    /// Probability of corrupting the head, `tph / (tph + hpt)`.
    pub fn head_probability(&self, relation: RelationId) -> f64 {
        let (tph, hpt) = (self.tph(relation), self.hpt(relation));
        tph / (tph + hpt)
    }

    /// Uniform 1/1 statistics for `num_relations` relations.
    pub fn uniform(num_relations: usize) -> Self {
        Self {
            tph: alloc::vec![1.0; num_relations],
            hpt: alloc::vec![1.0; num_relations],
        }
    }

    /// Stats from explicit `(tph, hpt)` pairs, indexed by relation id.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Self {
        Self {
            tph: pairs.iter().map(|p| p.0).collect(),
            hpt: pairs.iter().map(|p| p.1).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.tph.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tph.is_empty()
    }
}

/// Bern statistics from the training split. Relations that never occur in
/// train get `tph = hpt = 1`.
pub fn bern_stats(store: &TripleStore) -> RelationStats {
    relation_stats(store.train(), store.num_relations())
}

pub fn relation_stats(triples: &[Triple], num_relations: usize) -> RelationStats {
    let mut count = alloc::vec![0usize; num_relations];
    let mut heads: HashSet<(RelationId, EntityId)> = HashSet::new();
    let mut tails: HashSet<(RelationId, EntityId)> = HashSet::new();
    let mut distinct_heads = alloc::vec![0usize; num_relations];
    let mut distinct_tails = alloc::vec![0usize; num_relations];
    for t in triples {
        let r = t.relation as usize;
        count[r] += 1;
        if heads.insert((t.relation, t.head)) {
            distinct_heads[r] += 1;
        }
        if tails.insert((t.relation, t.tail)) {
            distinct_tails[r] += 1;
        }
    }
    let ratio = |n: usize, d: usize| if n == 0 { 1.0 } else { n as f64 / d as f64 };
    RelationStats {
        tph: (0..num_relations).map(|r| ratio(count[r], distinct_heads[r])).collect(),
        hpt: (0..num_relations).map(|r| ratio(count[r], distinct_tails[r])).collect(),
    }
}

/// Constant-time membership over a set of known true triples.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FilterIndex {
    known: HashSet<Triple>,
}

impl FilterIndex {
    /// Every triple of train ∪ valid ∪ test.
    pub fn from_store(store: &TripleStore) -> Self {
        Split::ALL.iter().flat_map(|&s| store.split(s).iter().copied()).collect()
    }

    /// Train triples only, for negative sampling.
    pub fn train_only(store: &TripleStore) -> Self {
        store.train().iter().copied().collect()
    }

    #[inline]
    pub fn contains(&self, triple: &Triple) -> bool {
        self.known.contains(triple)
    }

    pub fn len(&self) -> usize {
        self.known.len()
    }

    pub fn is_empty(&self) -> bool {
        self.known.is_empty()
    }
}

impl FromIterator<Triple> for FilterIndex {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        Self {
            known: iter.into_iter().collect(),
        }
    }
}

/// Shorthand for [`FilterIndex::from_store`].
pub fn filter_index(store: &TripleStore) -> FilterIndex {
    FilterIndex::from_store(store)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> TripleStore {
        let mut s = TripleStore::new();
        s.insert(Split::Train, "a", "likes", "x", false);
        s.insert(Split::Train, "a", "likes", "y", false);
        s.insert(Split::Train, "b", "likes", "z", false);
        s.insert(Split::Valid, "b", "likes", "x", false);
        s.insert(Split::Test, "a", "likes", "x", false);
        s
    }

    #[test]
    fn vocab_in_first_appearance_order() {
        let s = toy();
        assert_eq!(s.entities.names(), ["a", "x", "y", "b", "z"]);
        assert_eq!(s.num_relations(), 1);
        assert_eq!(s.encode("b", "likes", "z"), Some(Triple::new(3, 0, 4)));
        assert_eq!(s.decode(Triple::new(3, 0, 4)), Some(("b", "likes", "z")));
        assert_eq!(s.encode("q", "likes", "z"), None);
    }

    #[test]
    fn three_line_toy() {
        let mut s = TripleStore::new();
        s.insert(Split::Train, "a", "r", "b", false);
        s.insert(Split::Valid, "b", "r", "a", false);
        s.insert(Split::Test, "a", "r", "a", false);
        assert_eq!((s.num_entities(), s.num_relations()), (2, 1));
    }

    #[test]
    fn duplicates_dropped_within_split() {
        let mut s = TripleStore::new();
        assert!(matches!(s.insert(Split::Train, "a", "r", "b", false), Insert::Added(_)));
        assert!(matches!(s.insert(Split::Train, "a", "r", "b", false), Insert::Duplicate(_)));
        assert!(matches!(s.insert(Split::Test, "a", "r", "b", false), Insert::Added(_)));
        assert_eq!(s.train().len(), 1);
    }

    #[test]
    fn unseen_entities_refused_when_restricted() {
        let mut s = TripleStore::new();
        s.insert(Split::Train, "a", "r", "b", true);
        assert_eq!(s.insert(Split::Test, "a", "r", "c", true), Insert::Unseen);
        assert_eq!(s.insert(Split::Test, "a", "q", "b", true), Insert::Unseen);
        assert!(matches!(s.insert(Split::Test, "b", "r", "a", true), Insert::Added(_)));
        assert_eq!(s.num_entities(), 2);
    }

    #[test]
    fn bern_counts() {
        let s = toy();
        let stats = bern_stats(&s);
        assert_eq!(stats.tph(0), 1.5);
        assert_eq!(stats.hpt(0), 1.0);
        assert_eq!(stats.head_probability(0), 0.6);

        let one_to_one = [Triple::new(0, 0, 1), Triple::new(2, 0, 3), Triple::new(4, 0, 5)];
        let stats = relation_stats(&one_to_one, 2);
        assert_eq!((stats.tph(0), stats.hpt(0)), (1.0, 1.0));
        assert_eq!((stats.tph(1), stats.hpt(1)), (1.0, 1.0), "absent relation defaults to 1");

        let stats = relation_stats(&[Triple::new(0, 0, 1)], 1);
        assert_eq!((stats.tph(0), stats.hpt(0)), (1.0, 1.0));
    }

    #[test]
    fn bern_weighted_identity() {
        let triples: Vec<Triple> = (0..200u32)
            .map(|i| Triple::new(i % 7, i % 3, (i * 13) % 11))
            .collect::<HashSet<_>>()
            .into_iter()
            .collect();
        let stats = relation_stats(&triples, 3);
        for r in 0..3u32 {
            let of_r: Vec<_> = triples.iter().filter(|t| t.relation == r).collect();
            let heads: HashSet<_> = of_r.iter().map(|t| t.head).collect();
            let tails: HashSet<_> = of_r.iter().map(|t| t.tail).collect();
            let n = of_r.len() as f64;
            assert!((stats.tph(r) * heads.len() as f64 - n).abs() <= 1e-9);
            assert!((stats.hpt(r) * tails.len() as f64 - n).abs() <= 1e-9);
            assert!(stats.tph(r) >= 1.0 && stats.hpt(r) >= 1.0);
        }
    }

    #[test]
    fn filter_membership() {
        let s = toy();
        let f = filter_index(&s);
        assert!(f.contains(&s.encode("a", "likes", "x").unwrap()));
        assert!(f.contains(&s.encode("b", "likes", "x").unwrap()));
        assert!(!f.contains(&s.encode("x", "likes", "a").unwrap()));
        // (a, likes, x) sits in train and test but is stored once
        assert_eq!(f.len(), 4);
        assert_eq!(FilterIndex::train_only(&s).len(), 3);
    }

    #[test]
    fn from_ids_checks_range() {
        assert!(TripleStore::from_ids(2, 1, &[Triple::new(0, 0, 2)], &[], &[]).is_err());
        let s = TripleStore::from_ids(3, 1, &[Triple::new(0, 0, 2)], &[], &[]).unwrap();
        assert_eq!(s.decode(Triple::new(0, 0, 2)), Some(("e0", "r0", "e2")));
    }
}
