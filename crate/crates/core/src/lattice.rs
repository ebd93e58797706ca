//! Join-semilattice state spaces used as merge targets.
//!
//! Every target holds a [`JoinValue`]. Merging is [`join`], which is
//! commutative, associative and idempotent for every variant, so any
//! interleaving, reordering or duplication of increments converges to the
//! same state. The partial order is derived from the join:
//! `a <= b  <=>  join(a, b) == b`.
//!
//! Four variants cover what the runtime needs:
//!
//! - `MaxRegister`: join = max. Bottom is `i64::MIN`.
//! - `GrowSet`: join = union over opaque byte strings.
//! - `RidKeyedSum`: a map `rid -> contribution`; join is pointwise max, and
//!   the additive total is a derived view. Re-merging a rid never changes the
//!   total.
//! - `TileStore`: a map `tile id -> TileCell` where cells are ordered
//!   `Absent < Present < Tombstone`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ids::{Rid, TileId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("variant mismatch: cannot join {left} with {right}")]
    VariantMismatch { left: VariantKind, right: VariantKind },
    #[error("join_all over an empty multiset")]
    Empty,
}

/// Variant tag of a [`JoinValue`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VariantKind {
    MaxRegister,
    GrowSet,
    RidKeyedSum,
    TileStore,
}

impl fmt::Display for VariantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            VariantKind::MaxRegister => "MaxRegister",
            VariantKind::GrowSet => "GrowSet",
            VariantKind::RidKeyedSum => "RidKeyedSum",
            VariantKind::TileStore => "TileStore",
        };
        f.write_str(s)
    }
}

/// Payload of a present tile. `Ind` is an indirection left behind when a
/// redex apex is rewritten: the apex id now stands for the contractum root.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TileKind {
    S,
    K,
    Var(String),
    App(TileId, TileId),
    Ind(TileId),
}

impl TileKind {
    pub fn is_indirection(&self) -> bool {
        matches!(self, TileKind::Ind(_))
    }
}

impl fmt::Display for TileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TileKind::S => f.write_str("S"),
            TileKind::K => f.write_str("K"),
            TileKind::Var(name) => write!(f, "Var({name})"),
            TileKind::App(l, r) => write!(f, "App({l},{r})"),
            TileKind::Ind(t) => write!(f, "Ind({t})"),
        }
    }
}

/// One entry of a tile store.
///
/// Order: any `Present` < any `Tombstone`. Among present cells an
/// indirection dominates a plain tile (an apex is rewritten at most once),
/// then the larger rid wins, then the larger kind. Tombstones compare by rid.
/// The order is total, so join is simply the maximum.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TileCell {
    Present { kind: TileKind, rid: Rid },
    Tombstone { rid: Rid },
}

impl TileCell {
    pub fn present(kind: TileKind, rid: Rid) -> Self {
        TileCell::Present { kind, rid }
    }

    pub fn tombstone(rid: Rid) -> Self {
        TileCell::Tombstone { rid }
    }

    pub fn rid(&self) -> Rid {
        match self {
            TileCell::Present { rid, .. } | TileCell::Tombstone { rid } => *rid,
        }
    }

    pub fn kind(&self) -> Option<&TileKind> {
        match self {
            TileCell::Present { kind, .. } => Some(kind),
            TileCell::Tombstone { .. } => None,
        }
    }

    pub fn is_tombstone(&self) -> bool {
        matches!(self, TileCell::Tombstone { .. })
    }

    pub fn join(&self, other: &TileCell) -> TileCell {
        if self >= other {
            self.clone()
        } else {
            other.clone()
        }
    }
}

impl Ord for TileCell {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        match (self, other) {
            (TileCell::Present { kind: ka, rid: ra }, TileCell::Present { kind: kb, rid: rb }) => {
                (ka.is_indirection(), ra, ka).cmp(&(kb.is_indirection(), rb, kb))
            }
            (TileCell::Present { .. }, TileCell::Tombstone { .. }) => Ordering::Less,
            (TileCell::Tombstone { .. }, TileCell::Present { .. }) => Ordering::Greater,
            (TileCell::Tombstone { rid: ra }, TileCell::Tombstone { rid: rb }) => ra.cmp(rb),
        }
    }
}

impl PartialOrd for TileCell {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// An element of one of the supported join-semilattices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum JoinValue {
    MaxRegister(i64),
    GrowSet(BTreeSet<Vec<u8>>),
    RidKeyedSum(BTreeMap<Rid, i64>),
    TileStore(BTreeMap<TileId, TileCell>),
}

impl JoinValue {
    pub fn bottom(kind: VariantKind) -> JoinValue {
        match kind {
            VariantKind::MaxRegister => JoinValue::MaxRegister(i64::MIN),
            VariantKind::GrowSet => JoinValue::GrowSet(BTreeSet::new()),
            VariantKind::RidKeyedSum => JoinValue::RidKeyedSum(BTreeMap::new()),
            VariantKind::TileStore => JoinValue::TileStore(BTreeMap::new()),
        }
    }

    pub fn kind(&self) -> VariantKind {
        match self {
            JoinValue::MaxRegister(_) => VariantKind::MaxRegister,
            JoinValue::GrowSet(_) => VariantKind::GrowSet,
            JoinValue::RidKeyedSum(_) => VariantKind::RidKeyedSum,
            JoinValue::TileStore(_) => VariantKind::TileStore,
        }
    }

    pub fn single_contribution(rid: Rid, value: i64) -> JoinValue {
        JoinValue::RidKeyedSum(BTreeMap::from([(rid, value)]))
    }

    pub fn single_tile(id: TileId, cell: TileCell) -> JoinValue {
        JoinValue::TileStore(BTreeMap::from([(id, cell)]))
    }

    /// Sum of contributions for `RidKeyedSum`; `None` for other variants.
    /// The cell map of a `TileStore`.
    pub fn tiles(&self) -> Option<&BTreeMap<TileId, TileCell>> {
        match self {
            JoinValue::TileStore(m) => Some(m),
            _ => None,
        }
    }

    pub fn total(&self) -> Option<i64> {
        match self {
            JoinValue::RidKeyedSum(m) => Some(m.values().sum()),
            _ => None,
        }
    }

    /// In-place join. Leaves `self` untouched on mismatch.
    pub fn merge_from(&mut self, other: &JoinValue) -> Result<bool, LatticeError> {
        let changed = match (&mut *self, other) {
            (JoinValue::MaxRegister(a), JoinValue::MaxRegister(b)) => {
                let changed = *b > *a;
                if changed {
                    *a = *b;
                }
                changed
            }
            (JoinValue::GrowSet(a), JoinValue::GrowSet(b)) => {
                let mut changed = false;
                for x in b {
                    changed |= a.insert(x.clone());
                }
                changed
            }
            (JoinValue::RidKeyedSum(a), JoinValue::RidKeyedSum(b)) => {
                let mut changed = false;
                for (rid, v) in b {
                    match a.get_mut(rid) {
                        Some(cur) => {
                            if *v > *cur {
                                *cur = *v;
                                changed = true;
                            }
                        }
                        None => {
                            a.insert(*rid, *v);
                            changed = true;
                        }
                    }
                }
                changed
            }
            (JoinValue::TileStore(a), JoinValue::TileStore(b)) => {
                let mut changed = false;
                for (id, cell) in b {
                    match a.get_mut(id) {
                        Some(cur) => {
                            if cell > cur {
                                *cur = cell.clone();
                                changed = true;
                            }
                        }
                        None => {
                            a.insert(*id, cell.clone());
                            changed = true;
                        }
                    }
                }
                changed
            }
            (a, b) => {
                return Err(LatticeError::VariantMismatch {
                    left: a.kind(),
                    right: b.kind(),
                })
            }
        };
        Ok(changed)
    }

    /// Canonical text form: sorted keys, decimal integers, hex byte strings.
    pub fn to_canonical_text(&self) -> String {
        let mut out = String::new();
        match self {
            JoinValue::MaxRegister(v) => {
                write!(out, "max({v})").unwrap();
            }
            JoinValue::GrowSet(set) => {
                out.push_str("gset{");
                for (i, e) in set.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    for b in e {
                        write!(out, "{b:02x}").unwrap();
                    }
                }
                out.push('}');
            }
            JoinValue::RidKeyedSum(map) => {
                out.push_str("rsum{");
                for (i, (rid, v)) in map.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    write!(out, "{rid}:{v}").unwrap();
                }
                out.push('}');
            }
            JoinValue::TileStore(map) => {
                out.push_str("tiles{");
                for (i, (id, cell)) in map.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    match cell {
                        TileCell::Present { kind, rid } => write!(out, "{id}:P({rid},{kind})"),
                        TileCell::Tombstone { rid } => write!(out, "{id}:T({rid})"),
                    }
                    .unwrap();
                }
                out.push('}');
            }
        }
        out
    }
}

impl fmt::Display for JoinValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_canonical_text())
    }
}

/// Least upper bound of two values of the same variant.
pub fn join(a: &JoinValue, b: &JoinValue) -> Result<JoinValue, LatticeError> {
    let mut out = a.clone();
    out.merge_from(b)?;
    Ok(out)
}

/// `a <= b` in the order induced by [`join`].
pub fn leq(a: &JoinValue, b: &JoinValue) -> Result<bool, LatticeError> {
    Ok(join(a, b)? == *b)
}

/// Join of a non-empty multiset.
pub fn join_all<'a, I>(items: I) -> Result<JoinValue, LatticeError>
where
    I: IntoIterator<Item = &'a JoinValue>,
{
    let mut iter = items.into_iter();
    let mut acc = iter.next().ok_or(LatticeError::Empty)?.clone();
    for item in iter {
        acc.merge_from(item)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gset(items: &[&str]) -> JoinValue {
        JoinValue::GrowSet(items.iter().map(|s| s.as_bytes().to_vec()).collect())
    }

    fn rsum(entries: &[(u128, i64)]) -> JoinValue {
        JoinValue::RidKeyedSum(entries.iter().map(|&(r, v)| (Rid(r), v)).collect())
    }

    /// Every ordering of `items`, left-folded with `join`.
    fn all_fold_orders(items: &[JoinValue]) -> Vec<JoinValue> {
        fn rec(rest: &mut Vec<JoinValue>, acc: Option<JoinValue>, out: &mut Vec<JoinValue>) {
            if rest.is_empty() {
                out.push(acc.unwrap());
                return;
            }
            for i in 0..rest.len() {
                let x = rest.remove(i);
                let next = match &acc {
                    None => x.clone(),
                    Some(a) => join(a, &x).unwrap(),
                };
                rec(rest, Some(next), out);
                rest.insert(i, x);
            }
        }
        let mut out = Vec::new();
        rec(&mut items.to_vec(), None, &mut out);
        out
    }

    #[test]
    fn max_register_join() {
        assert_eq!(
            join(&JoinValue::MaxRegister(3), &JoinValue::MaxRegister(5)).unwrap(),
            JoinValue::MaxRegister(5)
        );
        assert!(leq(&JoinValue::MaxRegister(3), &JoinValue::MaxRegister(5)).unwrap());
    }

    #[test]
    fn grow_set_idempotent() {
        assert_eq!(join(&gset(&["x"]), &gset(&["x"])).unwrap(), gset(&["x"]));
        assert!(!leq(&gset(&["x", "y"]), &gset(&["x"])).unwrap());
        assert!(leq(&gset(&["x"]), &gset(&["x", "y"])).unwrap());
    }

    #[test]
    fn rid_keyed_sum_ignores_repeated_rids() {
        let parts = [rsum(&[(1, 2)]), rsum(&[(2, 3)]), rsum(&[(1, 2)])];
        let folds = all_fold_orders(&parts);
        assert_eq!(folds.len(), 6);
        for f in &folds {
            assert_eq!(f.total(), Some(5));
        }
        // up to four increments with repeats: every order agrees
        let parts = [rsum(&[(1, 2)]), rsum(&[(2, 3)]), rsum(&[(1, 2)]), rsum(&[(3, 7)])];
        let folds = all_fold_orders(&parts);
        assert_eq!(folds.len(), 24);
        assert!(folds.iter().all(|f| f == &folds[0] && f.total() == Some(12)));
    }

    #[test]
    fn join_all_examples() {
        let v = [JoinValue::MaxRegister(1), JoinValue::MaxRegister(4), JoinValue::MaxRegister(4)];
        assert_eq!(join_all(&v).unwrap(), JoinValue::MaxRegister(4));
        assert_eq!(join_all(&[gset(&["a"]), gset(&["b"])]).unwrap(), gset(&["a", "b"]));
        assert_eq!(join_all(&[] as &[JoinValue]), Err(LatticeError::Empty));
    }

    #[test]
    fn join_all_is_order_free_exhaustively() {
        let items = [
            rsum(&[(1, 4)]),
            rsum(&[(2, -1), (3, 2)]),
            rsum(&[(1, 4)]),
            rsum(&[(4, 10)]),
            rsum(&[(3, 2)]),
        ];
        let expected = join_all(&items).unwrap();
        for f in all_fold_orders(&items) {
            assert_eq!(f, expected);
        }
    }

    #[test]
    fn variant_mismatch_is_an_error() {
        let err = join(&JoinValue::MaxRegister(1), &gset(&["a"])).unwrap_err();
        assert_eq!(
            err,
            LatticeError::VariantMismatch {
                left: VariantKind::MaxRegister,
                right: VariantKind::GrowSet
            }
        );
        assert!(leq(&gset(&[]), &JoinValue::MaxRegister(0)).is_err());
        assert!(join_all(&[JoinValue::MaxRegister(0), gset(&[])]).is_err());
    }

    #[test]
    fn bottoms_are_identities() {
        let samples = [
            JoinValue::MaxRegister(-7),
            gset(&["q"]),
            rsum(&[(9, 1)]),
            JoinValue::single_tile(TileId(1), TileCell::present(TileKind::K, Rid(1))),
        ];
        for s in samples {
            let b = JoinValue::bottom(s.kind());
            assert_eq!(join(&b, &s).unwrap(), s);
            assert!(leq(&b, &s).unwrap());
        }
    }

    #[test]
    fn tombstone_absorbs_present() {
        let p = TileCell::present(TileKind::Var("a".into()), Rid(5));
        let t = TileCell::tombstone(Rid(5));
        assert_eq!(p.join(&t), t);
        assert_eq!(t.join(&p), t);
        let mut s = JoinValue::single_tile(TileId(1), t.clone());
        s.merge_from(&JoinValue::single_tile(TileId(1), p)).unwrap();
        assert_eq!(s, JoinValue::single_tile(TileId(1), t));
    }

    #[test]
    fn present_cells_tie_break_on_rid_and_indirection() {
        let lo = TileCell::present(TileKind::K, Rid(1));
        let hi = TileCell::present(TileKind::S, Rid(2));
        assert_eq!(lo.join(&hi), hi);
        let ind = TileCell::present(TileKind::Ind(TileId(3)), Rid(0));
        assert_eq!(hi.join(&ind), ind);
    }

    #[test]
    fn canonical_text_golden() {
        assert_eq!(JoinValue::MaxRegister(-3).to_canonical_text(), "max(-3)");
        assert_eq!(gset(&["b", "a"]).to_canonical_text(), "gset{61,62}");
        assert_eq!(
            rsum(&[(2, 3), (1, 2)]).to_canonical_text(),
            "rsum{00000000000000000000000000000001:2,00000000000000000000000000000002:3}"
        );
        let mut m = BTreeMap::new();
        m.insert(TileId(2), TileCell::tombstone(Rid(1)));
        m.insert(TileId(1), TileCell::present(TileKind::App(TileId(2), TileId(3)), Rid(15)));
        assert_eq!(
            JoinValue::TileStore(m).to_canonical_text(),
            "tiles{1:P(0000000000000000000000000000000f,App(2,3)),2:T(00000000000000000000000000000001)}"
        );
    }
}
