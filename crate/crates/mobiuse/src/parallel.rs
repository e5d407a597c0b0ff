//! Multi-threaded evaluation and the optional lock-free training mode.

use std::sync::atomic::{AtomicU64, Ordering};

use mobiuse_core::eval::{rank_both, MetricAccumulator};
use mobiuse_core::training::loss_term;
use mobiuse_core::{BernSampler, Error as CoreError, FilterIndex, GeometryKind, MetricReport, ModelState, RankResult, TrainConfig, Triple};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Usage(format!("cannot start {threads} threads: {e}")))
}

/// Ranks every triple on `threads` workers (0 picks the rayon default). The
/// output order matches `triples`.
pub fn rank_triples(state: &ModelState, triples: &[Triple], filter: Option<&FilterIndex>, threads: usize) -> Result<Vec<RankResult>> {
    let ranks = pool(threads)?.install(|| {
        triples
            .par_iter()
            .map(|&t| rank_both(t, state, filter))
            .collect::<std::result::Result<Vec<_>, _>>()
    })?;
    Ok(ranks)
}

/// Same metrics as [`mobiuse_core::eval::evaluate_triples`]: ranks are
/// computed in parallel and then folded in input order, so the result does
/// not depend on the thread count.
pub fn evaluate(state: &ModelState, triples: &[Triple], filter: Option<&FilterIndex>, threads: usize) -> Result<MetricReport> {
    let ranks = rank_triples(state, triples, filter, threads)?;
    let mut acc = MetricAccumulator::default();
    ranks.iter().for_each(|r| acc.push_result(r));
    Ok(acc.finish()?)
}

struct SharedTable {
    cells: Vec<AtomicU64>,
    width: usize,
}

impl SharedTable {
    fn new(values: &[f64], width: usize) -> Self {
        Self {
            cells: values.iter().map(|x| AtomicU64::new(x.to_bits())).collect(),
            width,
        }
    }

    fn read(&self, row: u32, out: &mut [f64]) {
        let start = row as usize * self.width;
        for (o, c) in out.iter_mut().zip(&self.cells[start..start + self.width]) {
            *o = f64::from_bits(c.load(Ordering::Relaxed));
        }
    }

    fn write(&self, row: u32, values: &[f64]) {
        let start = row as usize * self.width;
        for (c, v) in self.cells[start..start + self.width].iter().zip(values) {
            c.store(v.to_bits(), Ordering::Relaxed);
        }
    }

    fn into_values(self) -> Vec<f64> {
        self.cells.into_iter().map(|c| f64::from_bits(c.into_inner())).collect()
    }
}

/// One lock-free epoch: `threads` workers each take a contiguous share of
/// the shuffled training set and apply per-triple updates straight to the
/// shared tables. Worker `i` draws negatives from a stream seeded with
/// `seed + i`. Results depend on thread interleaving.
pub fn hogwild_epoch(
    state: &mut ModelState,
    train: &[Triple],
    sampler: &BernSampler<'_>,
    config: &TrainConfig,
    seed: u64,
    threads: usize,
) -> Result<f64> {
    config.validate()?;
    for &t in train {
        state.check(t)?;
    }
    let threads = threads.max(1);
    let geometry = state.geometry();
    let width = state.width();
    let mut order: Vec<Triple> = train.to_vec();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let entities = SharedTable::new(state.entities(), width);
    let relations = SharedTable::new(state.relations(), width);
    let share = order.len().div_ceil(threads).max(1);

    let results: Vec<Result<f64>> = std::thread::scope(|scope| {
        let handles: Vec<_> = order
            .chunks(share)
            .enumerate()
            .map(|(worker, chunk)| {
                let (entities, relations) = (&entities, &relations);
                scope.spawn(move || -> Result<f64> {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(worker as u64));
                    let mut rows = vec![vec![0.0; width]; 5];
                    let mut grads = vec![vec![0.0; width]; 6];
                    let mut total = 0.0;
                    for &pos in chunk {
                        let neg = sampler.sample(pos, &mut rng)?.triple;
                        let [h, r, t, nh, nt] = &mut rows[..] else { unreachable!() };
                        entities.read(pos.head, h);
                        relations.read(pos.relation, r);
                        entities.read(pos.tail, t);
                        entities.read(neg.head, nh);
                        entities.read(neg.tail, nt);
                        grads.iter_mut().for_each(|g| g.fill(0.0));
                        let [gh, gr, gt, gnh, gnr, gnt] = &mut grads[..] else { unreachable!() };
                        let ps = geometry.accumulate_subgradient(h, r, t, 1.0, gh, gr, gt);
                        let ns = geometry.accumulate_subgradient(nh, r, nt, -1.0, gnh, gnr, gnt);
                        let loss = loss_term(ps, ns, config.gamma);
                        if loss <= 0.0 {
                            continue;
                        }
                        total += loss;
                        gr.iter_mut().zip(gnr.iter()).for_each(|(a, b)| *a += b);
                        let updates = [
                            (entities, pos.head, &*gh, "entity"),
                            (relations, pos.relation, &*gr, "relation"),
                            (entities, pos.tail, &*gt, "entity"),
                            (entities, neg.head, &*gnh, "entity"),
                            (entities, neg.tail, &*gnt, "entity"),
                        ];
                        let mut row = vec![0.0; width];
                        for (table, id, g, name) in updates {
                            if g.iter().all(|&x| x == 0.0) {
                                continue;
                            }
                            table.read(id, &mut row);
                            for (x, d) in row.iter_mut().zip(g) {
                                *x -= config.alpha * d;
                            }
                            if row.iter().any(|x| !x.is_finite()) {
                                return Err(CoreError::NonFiniteUpdate { table: name, row: id as usize }.into());
                            }
                            geometry.canonicalize(&mut row);
                            table.write(id, &row);
                        }
                    }
                    Ok(total)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("training worker panicked")).collect()
    });

    let mut total = 0.0;
    for r in results {
        total += r?;
    }
    let (ent, rel) = state.tables_mut();
    ent.copy_from_slice(&entities.into_values());
    rel.copy_from_slice(&relations.into_values());
    if geometry.kind == GeometryKind::Euclidean {
        state.normalize_entities();
    }
    Ok(total)
}
