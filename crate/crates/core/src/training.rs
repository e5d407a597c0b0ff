//! Margin-ranking objective and plain minibatch SGD over the embedding
//! tables.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kg::Triple;
use crate::math;
use crate::sampling::BernSampler;
use crate::space::{Geometry, GeometryKind};

/// Hinge term `[γ + f(pos) − f(neg)]_+`.
#[inline]
pub fn loss_term(pos_score: f64, neg_score: f64, gamma: f64) -> f64 {
    let x = gamma + pos_score - neg_score;
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    /// Margin γ.
    pub gamma: f64,
    /// Learning rate α.
    pub alpha: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Validate every this many epochs; 0 disables.
    pub eval_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            gamma: 500.0,
            alpha: 0.0005,
            epochs: 500,
            batch_size: 100,
            seed: 0,
            eval_every: 0,
        }
    }
}

impl TrainConfig {
    /// Margins searched by the grid helper.
    pub const GAMMA_GRID: [f64; 5] = [2000.0, 1000.0, 500.0, 200.0, 100.0];
    /// Learning rates searched by the grid helper.
    pub const ALPHA_GRID: [f64; 5] = [0.002, 0.001, 0.0005, 0.0002, 0.0001];

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidConfig("gamma must be a finite non-negative margin"));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidConfig("alpha must be a finite non-negative learning rate"));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch size must be at least 1"));
        }
        Ok(())
    }
}

/// Entity and relation tables of one model, stored row-major with
/// [`Geometry::width`] coordinates per row.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelState {
    geometry: Geometry,
    dim: usize,
    entities: Vec<f64>,
    relations: Vec<f64>,
    seed: u64,
}

impl ModelState {
    /// Uniform random initialisation over each coordinate's canonical range.
    pub fn new(geometry: Geometry, dim: usize, num_entities: usize, num_relations: usize, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyVector);
        }
        let width = geometry.width(dim);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut entities = vec![0.0; width * num_entities];
        let mut relations = vec![0.0; width * num_relations];
        for row in entities.chunks_exact_mut(width).chain(relations.chunks_exact_mut(width)) {
            geometry.init_row(row, &mut rng);
        }
        let mut state = Self {
            geometry,
            dim,
            entities,
            relations,
            seed,
        };
        if geometry.kind == GeometryKind::Euclidean {
            state.normalize_entities();
        }
        Ok(state)
    }

    /// Wraps existing tables. Rows must be `geometry.width(dim)` wide and
    /// canonical.
    pub fn from_tables(geometry: Geometry, dim: usize, entities: Vec<f64>, relations: Vec<f64>, seed: u64) -> Result<Self> {
        let width = geometry.width(dim);
        if width == 0 {
            return Err(Error::EmptyVector);
        }
        for table in [&entities, &relations] {
            if table.len() % width != 0 {
                return Err(Error::LengthMismatch {
                    left: table.len(),
                    right: table.len() / width * width,
                });
            }
        }
        let state = Self {
            geometry,
            dim,
            entities,
            relations,
            seed,
        };
        if !state.is_canonical() {
            return Err(Error::InvalidConfig("embedding tables are not canonical for the geometry"));
        }
        Ok(state)
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn width(&self) -> usize {
        self.geometry.width(self.dim)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn num_entities(&self) -> usize {
        self.entities.len() / self.width()
    }

    pub fn num_relations(&self) -> usize {
        self.relations.len() / self.width()
    }

    pub fn entities(&self) -> &[f64] {
        &self.entities
    }

    pub fn relations(&self) -> &[f64] {
        &self.relations
    }

    /// Mutable tables `(entities, relations)`. Callers restore canonical
    /// form with [`ModelState::canonicalize`].
    pub fn tables_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.entities, &mut self.relations)
    }

    #[inline]
    pub fn entity(&self, id: u32) -> &[f64] {
        let w = self.width();
        &self.entities[id as usize * w..(id as usize + 1) * w]
    }

    #[inline]
    pub fn relation(&self, id: u32) -> &[f64] {
        let w = self.width();
        &self.relations[id as usize * w..(id as usize + 1) * w]
    }

    pub fn check(&self, triple: Triple) -> Result<()> {
        let (ne, nr) = (self.num_entities(), self.num_relations());
        for e in [triple.head, triple.tail] {
            if e as usize >= ne {
                return Err(Error::OutOfVocabulary { id: e, size: ne });
            }
        }
        if triple.relation as usize >= nr {
            return Err(Error::OutOfVocabulary {
                id: triple.relation,
                size: nr,
            });
        }
        Ok(())
    }

    /// Score of an in-range triple.
    #[inline]
    pub fn score(&self, triple: Triple) -> f64 {
        self.geometry
            .score_unchecked(self.entity(triple.head), self.relation(triple.relation), self.entity(triple.tail))
    }

    pub fn is_canonical(&self) -> bool {
        let w = self.width();
        self.entities
            .chunks_exact(w)
            .chain(self.relations.chunks_exact(w))
            .all(|row| self.geometry.is_canonical(row))
    }

    pub fn canonicalize(&mut self) {
        let geometry = self.geometry;
        geometry.canonicalize(&mut self.entities);
        geometry.canonicalize(&mut self.relations);
    }

    /// Projects every entity onto the unit L2 ball.
    pub fn normalize_entities(&mut self) {
        let w = self.width();
        for row in self.entities.chunks_exact_mut(w) {
            let norm = math::sqrt(row.iter().map(|x| x * x).sum());
            if norm > 1.0 {
                for x in row {
                    *x /= norm;
                }
            }
        }
    }
}

/// Dense gradient accumulator for one table plus the list of rows touched.
struct TableGrad {
    grad: Vec<f64>,
    touched: Vec<u32>,
    marked: Vec<bool>,
    width: usize,
}

impl TableGrad {
    fn new(rows: usize, width: usize) -> Self {
        Self {
            grad: vec![0.0; rows * width],
            touched: Vec::new(),
            marked: vec![false; rows],
            width,
        }
    }

    fn add(&mut self, row: u32, g: &[f64]) {
        let r = row as usize;
        if !self.marked[r] {
            self.marked[r] = true;
            self.touched.push(row);
        }
        for (acc, x) in self.grad[r * self.width..(r + 1) * self.width].iter_mut().zip(g) {
            *acc += x;
        }
    }

    /// `table -= alpha · grad` on touched rows, then clears.
    fn apply(&mut self, table: &mut [f64], alpha: f64, geometry: &Geometry, name: &'static str) -> Result<()> {
        let w = self.width;
        for &row in &self.touched {
            let r = row as usize;
            let target = &mut table[r * w..(r + 1) * w];
            let grad = &mut self.grad[r * w..(r + 1) * w];
            for (x, g) in target.iter_mut().zip(grad.iter_mut()) {
                *x -= alpha * *g;
                *g = 0.0;
            }
            if target.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFiniteUpdate { table: name, row: r });
            }
            geometry.canonicalize(target);
            self.marked[r] = false;
        }
        self.touched.clear();
        Ok(())
    }
}

/// Subgradients of one scored triple.
struct TripleGrad {
    h: Vec<f64>,
    r: Vec<f64>,
    t: Vec<f64>,
}

impl TripleGrad {
    fn new(width: usize) -> Self {
        Self {
            h: vec![0.0; width],
            r: vec![0.0; width],
            t: vec![0.0; width],
        }
    }

    fn compute(&mut self, state: &ModelState, triple: Triple) -> f64 {
        for buf in [&mut self.h, &mut self.r, &mut self.t] {
            buf.fill(0.0);
        }
        state.geometry.accumulate_subgradient(
            state.entity(triple.head),
            state.relation(triple.relation),
            state.entity(triple.tail),
            1.0,
            &mut self.h,
            &mut self.r,
            &mut self.t,
        )
    }

    fn scatter(&mut self, triple: Triple, sign: f64, entities: &mut TableGrad, relations: &mut TableGrad) {
        if sign != 1.0 {
            for buf in [&mut self.h, &mut self.r, &mut self.t] {
                buf.iter_mut().for_each(|x| *x *= sign);
            }
        }
        entities.add(triple.head, &self.h);
        relations.add(triple.relation, &self.r);
        entities.add(triple.tail, &self.t);
    }
}

/// One pass over `train` in a seeded shuffle: one negative per positive,
/// minibatch subgradient step on the hinge, then re-canonicalisation of the
/// touched rows (entity renormalisation for TransE). Returns the summed loss.
pub fn train_epoch<R: Rng + ?Sized>(
    state: &mut ModelState,
    train: &[Triple],
    sampler: &BernSampler<'_>,
    config: &TrainConfig,
    rng: &mut R,
) -> Result<f64> {
    config.validate()?;
    for &t in train {
        state.check(t)?;
    }
    let width = state.width();
    let geometry = state.geometry;
    let mut order: Vec<usize> = (0..train.len()).collect();
    order.shuffle(rng);

    let mut ent_grad = TableGrad::new(state.num_entities(), width);
    let mut rel_grad = TableGrad::new(state.num_relations(), width);
    let mut pos_grad = TripleGrad::new(width);
    let mut neg_grad = TripleGrad::new(width);
    let mut total = 0.0;

    for batch in order.chunks(config.batch_size) {
        for &i in batch {
            let pos = train[i];
            let neg = sampler.sample(pos, rng)?.triple;
            let pos_score = pos_grad.compute(state, pos);
            let neg_score = neg_grad.compute(state, neg);
            let loss = loss_term(pos_score, neg_score, config.gamma);
            if loss > 0.0 {
                total += loss;
                pos_grad.scatter(pos, 1.0, &mut ent_grad, &mut rel_grad);
                neg_grad.scatter(neg, -1.0, &mut ent_grad, &mut rel_grad);
            }
        }
        ent_grad.apply(&mut state.entities, config.alpha, &geometry, "entity")?;
        rel_grad.apply(&mut state.relations, config.alpha, &geometry, "relation")?;
    }
    if geometry.kind == GeometryKind::Euclidean {
        state.normalize_entities();
    }
    Ok(total)
}

/// Owns the training RNG so that consecutive epochs continue one seeded
/// stream.
#[derive(Debug, Clone)]
pub struct Trainer {
    config: TrainConfig,
    rng: ChaCha8Rng,
    epoch: usize,
}

impl Trainer {
    pub fn new(config: TrainConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            // offset keeps the stream distinct from table initialisation
            rng: ChaCha8Rng::seed_from_u64(config.seed ^ 0x9e37_79b9_7f4a_7c15),
            epoch: 0,
        })
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    pub fn train_epoch(&mut self, state: &mut ModelState, train: &[Triple], sampler: &BernSampler<'_>) -> Result<f64> {
        let loss = train_epoch(state, train, sampler, &self.config, &mut self.rng)?;
        self.epoch += 1;
        Ok(loss)
    }

    /// Runs the configured number of epochs, calling `on_epoch(epoch, loss)`
    /// after each.
    pub fn fit<F>(&mut self, state: &mut ModelState, train: &[Triple], sampler: &BernSampler<'_>, mut on_epoch: F) -> Result<()>
    where
        F: FnMut(usize, f64, &ModelState) -> Result<()>,
    {
        while self.epoch < self.config.epochs {
            let loss = self.train_epoch(state, train, sampler)?;
            on_epoch(self.epoch, loss, state)?;
        }
        Ok(())
    }
}
