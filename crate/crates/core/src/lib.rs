//! Knowledge graph embeddings on products of Möbius rings.
//!
//! Entities and relations live on `M^{q/p}_n`, the direct sum of `n` Möbius
//! rings, and a triple `(h, r, t)` is scored by `dist(h ⊕ r, t)`. TorusE and
//! TransE are provided as baselines over the same training and evaluation
//! machinery.
//!
//! The crate is `no_std` (it needs `alloc`). Enable the `std` feature to use
//! the platform float intrinsics and `std::error::Error`.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod error;
pub mod eval;
pub mod kg;
mod math;
pub mod oracle;
pub mod ring;
pub mod sampling;
pub mod space;
pub mod training;

pub use error::{Error, Result};
pub use eval::{evaluate, rank_triple, MetricReport, RankResult};
pub use kg::{bern_stats, EntityId, FilterIndex, RelationId, RelationStats, Split, Triple, TripleStore};
pub use ring::{RingPoint, RingSpec, SurfaceParams, TorusPoint};
pub use sampling::{BernSampler, NegativeSample, Side};
pub use space::{Geometry, GeometryKind, NormKind, RingVector, ScoreGradient};
pub use training::{loss_term, ModelState, TrainConfig, Trainer};
