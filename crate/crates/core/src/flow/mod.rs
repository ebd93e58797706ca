//! Self-describing increments.
//!
//! Every increment carries the five metadata fields `id`, `target`, `op`,
//! `next` and `rid` alongside its payload. `op` names a pure function in an
//! [`OpRegistry`]; `next` is the continuation op stamped on whatever that
//! function emits. A `MERGE` op means "join the payload into `target`".

mod codec;
mod ops;
mod rid;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ids::{Rid, TargetId, TileId};
use crate::lattice::JoinValue;

pub use codec::{decode_increment, decode_value, encode_increment, encode_value, CodecError};
pub use ops::{encode_i64s, OpOutput, OpRegistry, PairSide, PairTile};
pub use rid::{derive_rid, tile_id_for, Provenance};

/// Fixed per-increment accounting overhead in bytes: the encoded header
/// (id, target, rid, op, next) plus the payload length prefix.
pub const METADATA_OVERHEAD: u64 = 40;

/// Op-code naming a registered pure function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OpCode(pub u16);

impl OpCode {
    /// Join the payload into the target state. Terminal.
    pub const MERGE: OpCode = OpCode(0);
    /// Bytes of little-endian i64s -> `MaxRegister(max)`.
    pub const MAX_EXTRACT: OpCode = OpCode(1);
    /// Left and right [`PairTile`]s -> one rid-keyed contribution (dot product).
    pub const PAIR_JOIN: OpCode = OpCode(2);
    /// Consumer index plus raw tile bytes -> `MaxRegister`.
    pub const CONSUME_TILE: OpCode = OpCode(3);
    /// An encoded `JoinValue` -> that value. The generic unit task.
    pub const LIFT: OpCode = OpCode(4);
}

const TERMINAL_CODE: u16 = u16::MAX;

/// Continuation: what the outputs of `op` should do next.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Next {
    Op(OpCode),
    Terminal,
}

impl Next {
    pub(crate) fn to_wire(self) -> u16 {
        match self {
            Next::Op(op) => op.0,
            Next::Terminal => TERMINAL_CODE,
        }
    }

    pub(crate) fn from_wire(v: u16) -> Self {
        if v == TERMINAL_CODE {
            Next::Terminal
        } else {
            Next::Op(OpCode(v))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Metadata {
    pub id: TileId,
    pub target: TargetId,
    pub op: OpCode,
    pub next: Next,
    pub rid: Rid,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Payload {
    Value(JoinValue),
    Bytes(Vec<u8>),
}

impl Payload {
    pub fn as_value(&self) -> Option<&JoinValue> {
        match self {
            Payload::Value(v) => Some(v),
            Payload::Bytes(_) => None,
        }
    }

    pub fn as_bytes(&self) -> Option<&[u8]> {
        match self {
            Payload::Bytes(b) => Some(b),
            Payload::Value(_) => None,
        }
    }

    pub fn encoded_len(&self) -> u64 {
        codec::payload_len(self) as u64
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FlowError {
    #[error("increment is missing its `{0}` field")]
    MissingField(&'static str),
    #[error("op {0:?} is not registered; the receiver has no way to process this data")]
    UnregisteredOp(OpCode),
    #[error("op {op:?} rejected its payload: {reason}")]
    BadPayload { op: OpCode, reason: String },
    #[error("op {0:?} requires a continuation but `next` is terminal")]
    TerminalContinuation(OpCode),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

/// The atomic self-describing unit of data.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Increment {
    pub meta: Metadata,
    pub payload: Payload,
    pub size_bytes: u64,
}

impl Increment {
    pub fn new(meta: Metadata, payload: Payload) -> Self {
        let size_bytes = METADATA_OVERHEAD + payload.encoded_len();
        Increment {
            meta,
            payload,
            size_bytes,
        }
    }

    /// A terminal increment that joins `value` into `target`.
    pub fn merge(id: TileId, target: TargetId, rid: Rid, value: JoinValue) -> Self {
        Increment::new(
            Metadata {
                id,
                target,
                op: OpCode::MERGE,
                next: Next::Terminal,
                rid,
            },
            Payload::Value(value),
        )
    }

    /// A unit task: some executor lifts the encoded `value` and forwards it
    /// as a merge into `target`.
    pub fn lift(target: TargetId, rid: Rid, value: &JoinValue) -> Self {
        Increment::new(
            Metadata {
                id: tile_id_for(rid),
                target,
                op: OpCode::LIFT,
                next: Next::Op(OpCode::MERGE),
                rid,
            },
            Payload::Bytes(encode_value(value)),
        )
    }

    pub fn builder() -> IncrementBuilder {
        IncrementBuilder::default()
    }

    pub fn is_merge(&self) -> bool {
        self.meta.op == OpCode::MERGE
    }
}

/// Field-by-field construction. `build` refuses increments with any of the
/// five metadata fields absent.
#[derive(Debug, Default, Clone)]
pub struct IncrementBuilder {
    id: Option<TileId>,
    target: Option<TargetId>,
    op: Option<OpCode>,
    next: Option<Next>,
    rid: Option<Rid>,
    payload: Option<Payload>,
}

impl IncrementBuilder {
    pub fn id(mut self, id: TileId) -> Self {
        self.id = Some(id);
        self
    }

    pub fn target(mut self, target: TargetId) -> Self {
        self.target = Some(target);
        self
    }

    pub fn op(mut self, op: OpCode) -> Self {
        self.op = Some(op);
        self
    }

    pub fn next(mut self, next: Next) -> Self {
        self.next = Some(next);
        self
    }

    pub fn rid(mut self, rid: Rid) -> Self {
        self.rid = Some(rid);
        self
    }

    pub fn payload(mut self, payload: Payload) -> Self {
        self.payload = Some(payload);
        self
    }

    pub fn build(self) -> Result<Increment, FlowError> {
        let meta = Metadata {
            id: self.id.ok_or(FlowError::MissingField("id"))?,
            target: self.target.ok_or(FlowError::MissingField("target"))?,
            op: self.op.ok_or(FlowError::MissingField("op"))?,
            next: self.next.ok_or(FlowError::MissingField("next"))?,
            rid: self.rid.ok_or(FlowError::MissingField("rid"))?,
        };
        let payload = self.payload.ok_or(FlowError::MissingField("payload"))?;
        Ok(Increment::new(meta, payload))
    }
}
