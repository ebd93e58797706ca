//! Binary increment encoding.
//!
//! All integers are little-endian.
//!
//! ```text
//! offset  size  field
//!      0     8  id
//!      8     8  target
//!     16    16  rid
//!     32     2  op
//!     34     2  next (0xFFFF = terminal)
//!     36     4  payload length N
//!     40     N  payload
//! ```
//!
//! Payload: one tag byte, `0` = raw bytes follow, `1` = an encoded
//! [`JoinValue`] follows.
//!
//! JoinValue: tag byte then body.
//! `0` MaxRegister: i64.
//! `1` GrowSet: u32 count, then per element u32 length + bytes.
//! `2` RidKeyedSum: u32 count, then per entry u128 rid + i64.
//! `3` TileStore: u32 count, then per entry u64 id + cell.
//! Cell: u8 (`0` present, `1` tombstone), u128 rid, then for present cells
//! the kind: u8 (`0` S, `1` K, `2` Var + u32 len + utf8, `3` App + u64 + u64,
//! `4` Ind + u64).

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::{Increment, Metadata, Next, OpCode, Payload};
use crate::ids::{Rid, TargetId, TileId};
use crate::lattice::{JoinValue, TileCell, TileKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("input truncated at byte {0}")]
    Truncated(usize),
    #[error("unknown {what} tag {tag} at byte {at}")]
    BadTag { what: &'static str, tag: u8, at: usize },
    #[error("{0} trailing bytes after payload")]
    Trailing(usize),
    #[error("variable name is not valid utf-8")]
    Utf8,
}

const HEADER_LEN: usize = 40;

pub fn encode_increment(inc: &Increment) -> Vec<u8> {
    let mut payload = Vec::new();
    write_payload(&mut payload, &inc.payload);
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
    out.extend_from_slice(&inc.meta.id.0.to_le_bytes());
    out.extend_from_slice(&inc.meta.target.0.to_le_bytes());
    out.extend_from_slice(&inc.meta.rid.0.to_le_bytes());
    out.extend_from_slice(&inc.meta.op.0.to_le_bytes());
    out.extend_from_slice(&inc.meta.next.to_wire().to_le_bytes());
    out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
    out.extend_from_slice(&payload);
    out
}

pub fn decode_increment(bytes: &[u8]) -> Result<Increment, CodecError> {
    let mut r = Reader::new(bytes);
    let id = TileId(r.u64()?);
    let target = TargetId(r.u64()?);
    let rid = Rid(r.u128()?);
    let op = OpCode(r.u16()?);
    let next = Next::from_wire(r.u16()?);
    let len = r.u32()? as usize;
    let body = r.take(len)?;
    r.finish()?;
    let payload = decode_payload(body)?;
    Ok(Increment::new(
        Metadata {
            id,
            target,
            op,
            next,
            rid,
        },
        payload,
    ))
}

pub fn encode_value(v: &JoinValue) -> Vec<u8> {
    let mut out = Vec::new();
    write_value(&mut out, v);
    out
}

pub fn decode_value(bytes: &[u8]) -> Result<JoinValue, CodecError> {
    let mut r = Reader::new(bytes);
    let v = read_value(&mut r)?;
    r.finish()?;
    Ok(v)
}

pub(super) fn payload_len(p: &Payload) -> usize {
    let mut out = Vec::new();
    write_payload(&mut out, p);
    out.len()
}

fn write_payload(out: &mut Vec<u8>, p: &Payload) {
    match p {
        Payload::Bytes(b) => {
            out.push(0);
            out.extend_from_slice(b);
        }
        Payload::Value(v) => {
            out.push(1);
            write_value(out, v);
        }
    }
}

fn decode_payload(body: &[u8]) -> Result<Payload, CodecError> {
    let mut r = Reader::new(body);
    match r.u8()? {
        0 => Ok(Payload::Bytes(r.rest().to_vec())),
        1 => {
            let v = read_value(&mut r)?;
            r.finish()?;
            Ok(Payload::Value(v))
        }
        tag => Err(CodecError::BadTag {
            what: "payload",
            tag,
            at: HEADER_LEN,
        }),
    }
}

fn write_value(out: &mut Vec<u8>, v: &JoinValue) {
    match v {
        JoinValue::MaxRegister(x) => {
            out.push(0);
            out.extend_from_slice(&x.to_le_bytes());
        }
        JoinValue::GrowSet(set) => {
            out.push(1);
            out.extend_from_slice(&(set.len() as u32).to_le_bytes());
            for e in set {
                out.extend_from_slice(&(e.len() as u32).to_le_bytes());
                out.extend_from_slice(e);
            }
        }
        JoinValue::RidKeyedSum(map) => {
            out.push(2);
            out.extend_from_slice(&(map.len() as u32).to_le_bytes());
            for (rid, x) in map {
                out.extend_from_slice(&rid.0.to_le_bytes());
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        JoinValue::TileStore(map) => {
            out.push(3);
            out.extend_from_slice(&(map.len() as u32).to_le_bytes());
            for (id, cell) in map {
                out.extend_from_slice(&id.0.to_le_bytes());
                write_cell(out, cell);
            }
        }
    }
}

fn write_cell(out: &mut Vec<u8>, cell: &TileCell) {
    match cell {
        TileCell::Present { kind, rid } => {
            out.push(0);
            out.extend_from_slice(&rid.0.to_le_bytes());
            match kind {
                TileKind::S => out.push(0),
                TileKind::K => out.push(1),
                TileKind::Var(name) => {
                    out.push(2);
                    out.extend_from_slice(&(name.len() as u32).to_le_bytes());
                    out.extend_from_slice(name.as_bytes());
                }
                TileKind::App(l, r) => {
                    out.push(3);
                    out.extend_from_slice(&l.0.to_le_bytes());
                    out.extend_from_slice(&r.0.to_le_bytes());
                }
                TileKind::Ind(t) => {
                    out.push(4);
                    out.extend_from_slice(&t.0.to_le_bytes());
                }
            }
        }
        TileCell::Tombstone { rid } => {
            out.push(1);
            out.extend_from_slice(&rid.0.to_le_bytes());
        }
    }
}

fn read_value(r: &mut Reader<'_>) -> Result<JoinValue, CodecError> {
    let at = r.pos;
    match r.u8()? {
        0 => Ok(JoinValue::MaxRegister(r.u64()? as i64)),
        1 => {
            let n = r.u32()?;
            let mut set = BTreeSet::new();
            for _ in 0..n {
                let len = r.u32()? as usize;
                set.insert(r.take(len)?.to_vec());
            }
            Ok(JoinValue::GrowSet(set))
        }
        2 => {
            let n = r.u32()?;
            let mut map = BTreeMap::new();
            for _ in 0..n {
                let rid = Rid(r.u128()?);
                map.insert(rid, r.u64()? as i64);
            }
            Ok(JoinValue::RidKeyedSum(map))
        }
        3 => {
            let n = r.u32()?;
            let mut map = BTreeMap::new();
            for _ in 0..n {
                let id = TileId(r.u64()?);
                map.insert(id, read_cell(r)?);
            }
            Ok(JoinValue::TileStore(map))
        }
        tag => Err(CodecError::BadTag {
            what: "value",
            tag,
            at,
        }),
    }
}

fn read_cell(r: &mut Reader<'_>) -> Result<TileCell, CodecError> {
    let at = r.pos;
    let tag = r.u8()?;
    let rid = Rid(r.u128()?);
    match tag {
        0 => {
            let kat = r.pos;
            let kind = match r.u8()? {
                0 => TileKind::S,
                1 => TileKind::K,
                2 => {
                    let len = r.u32()? as usize;
                    let name = std::str::from_utf8(r.take(len)?).map_err(|_| CodecError::Utf8)?;
                    TileKind::Var(name.to_owned())
                }
                3 => TileKind::App(TileId(r.u64()?), TileId(r.u64()?)),
                4 => TileKind::Ind(TileId(r.u64()?)),
                tag => {
                    return Err(CodecError::BadTag {
                        what: "tile kind",
                        tag,
                        at: kat,
                    })
                }
            };
            Ok(TileCell::Present { kind, rid })
        }
        1 => Ok(TileCell::Tombstone { rid }),
        tag => Err(CodecError::BadTag {
            what: "cell",
            tag,
            at,
        }),
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], CodecError> {
        let end = self.pos.checked_add(n).ok_or(CodecError::Truncated(self.pos))?;
        if end > self.buf.len() {
            return Err(CodecError::Truncated(self.buf.len()));
        }
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn rest(&mut self) -> &'a [u8] {
        let s = &self.buf[self.pos..];
        self.pos = self.buf.len();
        s
    }

    fn finish(&self) -> Result<(), CodecError> {
        match self.buf.len() - self.pos {
            0 => Ok(()),
            n => Err(CodecError::Trailing(n)),
        }
    }

    fn u8(&mut self) -> Result<u8, CodecError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, CodecError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, CodecError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, CodecError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn u128(&mut self) -> Result<u128, CodecError> {
        Ok(u128::from_le_bytes(self.take(16)?.try_into().unwrap()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_header_layout() {
        let inc = Increment::merge(TileId(1), TargetId(2), Rid(3), JoinValue::MaxRegister(9));
        let bytes = encode_increment(&inc);
        let mut expected = Vec::new();
        expected.extend_from_slice(&1u64.to_le_bytes());
        expected.extend_from_slice(&2u64.to_le_bytes());
        expected.extend_from_slice(&3u128.to_le_bytes());
        expected.extend_from_slice(&0u16.to_le_bytes());
        expected.extend_from_slice(&0xFFFFu16.to_le_bytes());
        expected.extend_from_slice(&10u32.to_le_bytes());
        expected.push(1); // value payload
        expected.push(0); // MaxRegister
        expected.extend_from_slice(&9i64.to_le_bytes());
        assert_eq!(bytes, expected);
        assert_eq!(inc.size_bytes as usize, bytes.len());
    }

    #[test]
    fn truncated_input_is_rejected() {
        let inc = Increment::merge(TileId(1), TargetId(2), Rid(3), JoinValue::MaxRegister(9));
        let bytes = encode_increment(&inc);
        assert!(matches!(
            decode_increment(&bytes[..bytes.len() - 1]),
            Err(CodecError::Truncated(_))
        ));
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(decode_increment(&extra).is_err());
    }

    #[test]
    fn bad_value_tag() {
        assert!(matches!(
            decode_value(&[9]),
            Err(CodecError::BadTag { what: "value", .. })
        ));
    }
}
