//! Binary model checkpoints.
//!
//! Layout, all integers little-endian:
//!
//! | bytes | field |
//! |-------|-------|
//! | 8     | magic `MOBIUSE\0` |
//! | 4     | format version (u32) |
//! | 1     | geometry tag: 0 Möbius, 1 torus, 2 Euclidean |
//! | 1     | norm tag: 0 L1, 1 L2 |
//! | 2     | reserved, zero |
//! | 4 + 4 | q, p (zero unless Möbius) |
//! | 8 × 4 | dimension, entity count, relation count, seed (u64) |
//! | ...   | entity table, then relation table, as f64, row-major |
//! | 8     | CRC-64/ECMA-182 of every preceding byte |

use std::fs;
use std::path::Path;

use crc::{Crc, CRC_64_ECMA_182};
use mobiuse_core::{Geometry, GeometryKind, ModelState, NormKind, RingSpec};

use crate::error::{Error, Result};

pub const MAGIC: [u8; 8] = *b"MOBIUSE\0";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 56;

const CRC64: Crc<u64> = Crc::<u64>::new(&CRC_64_ECMA_182);

pub fn to_bytes(state: &ModelState) -> Vec<u8> {
    let geometry = state.geometry();
    let (tag, q, p) = match geometry.kind {
        GeometryKind::Mobius(spec) => (0u8, spec.q(), spec.p()),
        GeometryKind::Torus => (1, 0, 0),
        GeometryKind::Euclidean => (2, 0, 0),
    };
    let norm = match geometry.norm {
        NormKind::L1 => 0u8,
        NormKind::L2 => 1,
    };
    let floats = state.entities().len() + state.relations().len();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * floats + 8);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&[tag, norm, 0, 0]);
    out.extend_from_slice(&q.to_le_bytes());
    out.extend_from_slice(&p.to_le_bytes());
    for v in [state.dim(), state.num_entities(), state.num_relations()] {
        out.extend_from_slice(&(v as u64).to_le_bytes());
    }
    out.extend_from_slice(&state.seed().to_le_bytes());
    for x in state.entities().iter().chain(state.relations()) {
        out.extend_from_slice(&x.to_le_bytes());
    }
    let sum = CRC64.checksum(&out);
    out.extend_from_slice(&sum.to_le_bytes());
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> [u8; N] {
        let mut a = [0u8; N];
        a.copy_from_slice(&self.buf[self.pos..self.pos + N]);
        self.pos += N;
        a
    }
    fn u32(&mut self) -> u32 {
        u32::from_le_bytes(self.take())
    }
    fn u64(&mut self) -> u64 {
        u64::from_le_bytes(self.take())
    }
}

pub fn from_bytes(bytes: &[u8]) -> Result<ModelState> {
    if bytes.len() < 8 {
        return Err(Error::Checkpoint(format!("file too short ({} bytes)", bytes.len())));
    }
    // the checksum comes first so that any truncation is reported as such
    let (payload, tail) = bytes.split_at(bytes.len() - 8);
    let stored = u64::from_le_bytes(tail.try_into().expect("8-byte tail"));
    let computed = CRC64.checksum(payload);
    if stored != computed {
        return Err(Error::Checksum { stored, computed });
    }
    if payload.len() < HEADER_LEN {
        return Err(Error::Checkpoint("header truncated".into()));
    }
    let mut r = Reader { buf: payload, pos: 0 };
    if r.take::<8>() != MAGIC {
        return Err(Error::Checkpoint("bad magic bytes".into()));
    }
    let version = r.u32();
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version} (expected {VERSION})")));
    }
    let [tag, norm_tag, _, _] = r.take::<4>();
    let (q, p) = (r.u32(), r.u32());
    let norm = match norm_tag {
        0 => NormKind::L1,
        1 => NormKind::L2,
        t => return Err(Error::Checkpoint(format!("unknown norm tag {t}"))),
    };
    let kind = match tag {
        0 => GeometryKind::Mobius(RingSpec::new(q, p)?),
        1 => GeometryKind::Torus,
        2 => GeometryKind::Euclidean,
        t => return Err(Error::Checkpoint(format!("unknown geometry tag {t}"))),
    };
    let geometry = Geometry { kind, norm };
    let dim = r.u64() as usize;
    let num_entities = r.u64() as usize;
    let num_relations = r.u64() as usize;
    let seed = r.u64();

    let width = geometry.width(dim);
    let expected = width
        .checked_mul(num_entities + num_relations)
        .and_then(|n| n.checked_mul(8))
        .ok_or_else(|| Error::Checkpoint("table sizes overflow".into()))?;
    let body = &payload[HEADER_LEN..];
    if body.len() != expected {
        return Err(Error::Checkpoint(format!("table payload is {} bytes, header implies {expected}", body.len())));
    }
    let mut floats = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")));
    let entities: Vec<f64> = floats.by_ref().take(width * num_entities).collect();
    let relations: Vec<f64> = floats.collect();
    Ok(ModelState::from_tables(geometry, dim, entities, relations, seed)?)
}

pub fn save(state: &ModelState, path: &Path) -> Result<()> {
    fs::write(path, to_bytes(state)).map_err(Error::io(path))
}

pub fn load(path: &Path) -> Result<ModelState> {
    let bytes = fs::read(path).map_err(Error::io(path))?;
    from_bytes(&bytes)
}

/// Loads a checkpoint and checks that it was trained in `expected`.
pub fn load_expecting(path: &Path, expected: Geometry) -> Result<ModelState> {
    let state = load(path)?;
    if state.geometry() != expected {
        return Err(Error::GeometryMismatch {
            expected: expected.to_string(),
            found: state.geometry().to_string(),
        });
    }
    Ok(state)
}
