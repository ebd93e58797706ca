use std::collections::BTreeMap;

use super::{derive_rid, tile_id_for, FlowError, Increment, Metadata, Next, OpCode, Payload, Provenance};
use crate::ids::{TargetId, TileId};
use crate::lattice::JoinValue;

/// What a pure op emits. `Contribution` becomes a single-entry
/// `RidKeyedSum` keyed by the emitted increment's own rid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OpOutput {
    Value(JoinValue),
    Contribution(i64),
}

type OpFn = fn(&[u8]) -> Result<Vec<OpOutput>, String>;

/// Closed set of pure functions, immutable once built.
#[derive(Clone)]
pub struct OpRegistry {
    ops: BTreeMap<OpCode, OpFn>,
}

impl std::fmt::Debug for OpRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OpRegistry")
            .field("ops", &self.ops.keys().collect::<Vec<_>>())
            .finish()
    }
}

impl Default for OpRegistry {
    fn default() -> Self {
        Self::standard()
    }
}

impl OpRegistry {
    pub fn empty() -> Self {
        OpRegistry { ops: BTreeMap::new() }
    }

    pub fn standard() -> Self {
        let mut ops: BTreeMap<OpCode, OpFn> = BTreeMap::new();
        ops.insert(OpCode::MAX_EXTRACT, max_extract);
        ops.insert(OpCode::PAIR_JOIN, pair_join);
        ops.insert(OpCode::CONSUME_TILE, consume_tile);
        ops.insert(OpCode::LIFT, lift);
        OpRegistry { ops }
    }

    pub fn contains(&self, op: OpCode) -> bool {
        self.ops.contains_key(&op)
    }

    /// Apply `op` to `payload` and stamp the outputs with `op = next`.
    ///
    /// Output rids derive from `(sources, op, position)` only, so replaying
    /// the same input yields bit-identical increments.
    pub fn apply_op(
        &self,
        op: OpCode,
        payload: &[u8],
        next: Next,
        target: TargetId,
        sources: &[TileId],
    ) -> Result<Vec<Increment>, FlowError> {
        let f = self.ops.get(&op).ok_or(FlowError::UnregisteredOp(op))?;
        let next_op = match next {
            Next::Op(n) => n,
            Next::Terminal => return Err(FlowError::TerminalContinuation(op)),
        };
        let outputs = f(payload).map_err(|reason| FlowError::BadPayload { op, reason })?;
        Ok(outputs
            .into_iter()
            .enumerate()
            .map(|(pos, out)| {
                let rid = derive_rid(&Provenance::new(sources.to_vec(), op.0, 0, pos as u32));
                let value = match out {
                    OpOutput::Value(v) => v,
                    OpOutput::Contribution(x) => JoinValue::single_contribution(rid, x),
                };
                Increment::new(
                    Metadata {
                        id: tile_id_for(rid),
                        target,
                        op: next_op,
                        next: Next::Terminal,
                        rid,
                    },
                    Payload::Value(value),
                )
            })
            .collect())
    }
}

pub fn encode_i64s(values: &[i64]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

fn decode_i64s(bytes: &[u8]) -> Result<Vec<i64>, String> {
    if !bytes.len().is_multiple_of(8) {
        return Err(format!("length {} is not a multiple of 8", bytes.len()));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| i64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

fn max_extract(payload: &[u8]) -> Result<Vec<OpOutput>, String> {
    let values = decode_i64s(payload)?;
    let max = values.iter().copied().max().ok_or("empty value list")?;
    Ok(vec![OpOutput::Value(JoinValue::MaxRegister(max))])
}

fn pair_join(payload: &[u8]) -> Result<Vec<OpOutput>, String> {
    let (left, used) = PairTile::decode_prefix(payload)?;
    let (right, used2) = PairTile::decode_prefix(&payload[used..])?;
    if used + used2 != payload.len() {
        return Err("trailing bytes after pair".into());
    }
    if left.side != PairSide::Left || right.side != PairSide::Right || left.index != right.index {
        return Err(format!(
            "mismatched pair ({:?} {}, {:?} {})",
            left.side, left.index, right.side, right.index
        ));
    }
    Ok(vec![OpOutput::Contribution(PairTile::combine(&left, &right)?)])
}

fn consume_tile(payload: &[u8]) -> Result<Vec<OpOutput>, String> {
    if payload.len() < 4 {
        return Err("missing consumer index".into());
    }
    let consumer = u32::from_le_bytes(payload[..4].try_into().unwrap()) as i64;
    let sum: i64 = payload[4..].iter().map(|&b| b as i64).sum();
    Ok(vec![OpOutput::Value(JoinValue::MaxRegister(sum * (consumer + 1)))])
}

fn lift(payload: &[u8]) -> Result<Vec<OpOutput>, String> {
    let v = super::decode_value(payload).map_err(|e| e.to_string())?;
    Ok(vec![OpOutput::Value(v)])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PairSide {
    Left,
    Right,
}

/// One half of a stream pair: `index u64 | side u8 | count u32 | i64 * count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairTile {
    pub index: u64,
    pub side: PairSide,
    pub values: Vec<i64>,
}

impl PairTile {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(13 + 8 * self.values.len());
        out.extend_from_slice(&self.index.to_le_bytes());
        out.push(match self.side {
            PairSide::Left => 0,
            PairSide::Right => 1,
        });
        out.extend_from_slice(&(self.values.len() as u32).to_le_bytes());
        out.extend_from_slice(&encode_i64s(&self.values));
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<PairTile, String> {
        let (t, used) = Self::decode_prefix(bytes)?;
        if used != bytes.len() {
            return Err("trailing bytes after pair tile".into());
        }
        Ok(t)
    }

    fn decode_prefix(bytes: &[u8]) -> Result<(PairTile, usize), String> {
        if bytes.len() < 13 {
            return Err("pair tile header truncated".into());
        }
        let index = u64::from_le_bytes(bytes[..8].try_into().unwrap());
        let side = match bytes[8] {
            0 => PairSide::Left,
            1 => PairSide::Right,
            s => return Err(format!("bad pair side {s}")),
        };
        let n = u32::from_le_bytes(bytes[9..13].try_into().unwrap()) as usize;
        let end = 13 + 8 * n;
        if bytes.len() < end {
            return Err("pair tile values truncated".into());
        }
        let values = decode_i64s(&bytes[13..end])?;
        Ok((PairTile { index, side, values }, end))
    }

    /// Payload for `PAIR_JOIN`: the two encoded halves back to back.
    pub fn join_payload(left: &PairTile, right: &PairTile) -> Vec<u8> {
        let mut out = left.encode();
        out.extend_from_slice(&right.encode());
        out
    }

    /// Dot product of the two halves.
    pub fn combine(left: &PairTile, right: &PairTile) -> Result<i64, String> {
        if left.values.len() != right.values.len() {
            return Err("pair halves differ in length".into());
        }
        Ok(left
            .values
            .iter()
            .zip(&right.values)
            .map(|(a, b)| a.wrapping_mul(*b))
            .fold(0i64, i64::wrapping_add))
    }
}
