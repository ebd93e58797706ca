use std::collections::{BTreeMap, BTreeSet};

use sha2::{Digest, Sha256};

use super::{ExprNode, SkError};
use crate::flow::{derive_rid, tile_id_for, Increment, Provenance};
use crate::ids::{Rid, TargetId, TileId};
use crate::lattice::{JoinValue, TileCell, TileKind};

/// Target id of the shared tile store.
pub const SK_STORE: TargetId = TargetId(0x736b_0000_0000_0001);

/// Op code used in every provenance minted by this module.
const SK_OP: u16 = 0x5300;
const TRANSLATE: u16 = 0;
const COLLAPSE: u16 = 1;
const FRESH: u16 = 2;

pub type Store = BTreeMap<TileId, TileCell>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkTile {
    pub id: TileId,
    pub kind: TileKind,
    pub rid: Rid,
}

/// A term laid out as tiles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Translation {
    pub root: TileId,
    pub tiles: Vec<SkTile>,
}

impl Translation {
    pub fn store(&self) -> Store {
        let mut s = Store::new();
        for t in &self.tiles {
            let cell = TileCell::present(t.kind.clone(), t.rid);
            match s.get(&t.id) {
                Some(old) => {
                    let j = old.join(&cell);
                    s.insert(t.id, j);
                }
                None => {
                    s.insert(t.id, cell);
                }
            }
        }
        s
    }

    pub fn to_value(&self) -> JoinValue {
        JoinValue::TileStore(self.store())
    }
}

fn leaf_kind(e: &ExprNode) -> TileKind {
    match e {
        ExprNode::S => TileKind::S,
        ExprNode::K => TileKind::K,
        ExprNode::Var(v) => TileKind::Var(v.clone()),
        ExprNode::App(..) => unreachable!("not a leaf"),
    }
}

/// One tile per node; every node gets its own id, so structurally equal
/// subtrees stay distinguishable. Ids are a function of preorder position.
pub fn translate(expr: &ExprNode) -> Translation {
    fn go(e: &ExprNode, next: &mut u32, out: &mut Vec<SkTile>) -> TileId {
        let rid = derive_rid(&Provenance::new(vec![], SK_OP, TRANSLATE, *next));
        *next += 1;
        let id = tile_id_for(rid);
        let slot = out.len();
        out.push(SkTile {
            id,
            kind: TileKind::K,
            rid,
        });
        out[slot].kind = match e {
            ExprNode::App(f, a) => {
                let l = go(f, next, out);
                let r = go(a, next, out);
                TileKind::App(l, r)
            }
            leaf => leaf_kind(leaf),
        };
        id
    }
    let mut tiles = Vec::new();
    let root = go(expr, &mut 0, &mut tiles);
    Translation { root, tiles }
}

/// Ablation: ids derived from structure alone, so equal subtrees collapse
/// onto one tile.
pub fn translate_collapsed(expr: &ExprNode) -> Translation {
    fn structural_id(e: &ExprNode) -> (TileId, Rid) {
        let digest = Sha256::digest(e.to_string().as_bytes());
        let key = u64::from_le_bytes(digest[..8].try_into().unwrap());
        let rid = derive_rid(&Provenance::new(vec![TileId(key)], SK_OP, COLLAPSE, 0));
        (tile_id_for(rid), rid)
    }
    fn go(e: &ExprNode, out: &mut Vec<SkTile>) -> TileId {
        let (id, rid) = structural_id(e);
        let kind = match e {
            ExprNode::App(f, a) => TileKind::App(go(f, out), go(a, out)),
            leaf => leaf_kind(leaf),
        };
        out.push(SkTile { id, kind, rid });
        id
    }
    let mut tiles = Vec::new();
    let root = go(expr, &mut tiles);
    Translation { root, tiles }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    K,
    S,
}

impl Rule {
    fn code(self) -> u16 {
        match self {
            Rule::K => 0x4b,
            Rule::S => 0x53,
        }
    }

    fn arity(self) -> usize {
        match self {
            Rule::K => 2,
            Rule::S => 3,
        }
    }
}

/// A matched redex. `redex_ids` lists the apex first and the combinator
/// tile last, with every spine tile (indirections included) in between.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ReductionRequest {
    pub rid: Rid,
    pub rule: Rule,
    pub redex_ids: Vec<TileId>,
    pub args: Vec<TileId>,
}

fn present(store: &Store, id: TileId) -> Option<&TileKind> {
    store.get(&id).and_then(|c| c.kind())
}

/// Follow indirections from `id`; returns the ids passed through and the
/// first non-indirection tile, or `None` on a missing or tombstoned tile.
fn resolve(store: &Store, mut id: TileId, chain: &mut Vec<TileId>) -> Option<(TileId, TileKind)> {
    for _ in 0..=store.len() {
        match present(store, id)? {
            TileKind::Ind(t) => {
                chain.push(id);
                id = *t;
            }
            k => return Some((id, k.clone())),
        }
    }
    None
}

/// Match a K or S redex whose apex is `apex`.
pub fn match_redex(store: &Store, apex: TileId) -> Option<ReductionRequest> {
    let TileKind::App(l, last) = present(store, apex)?.clone() else {
        return None;
    };
    let mut ids = vec![apex];
    let mut args = vec![last];
    let mut cur = l;
    // walk down the left spine, at most three applications deep
    loop {
        let (id, kind) = resolve(store, cur, &mut ids)?;
        ids.push(id);
        match kind {
            TileKind::App(f, a) => {
                if args.len() == 3 {
                    return None;
                }
                args.push(a);
                cur = f;
            }
            TileKind::K if args.len() == 2 => return Some(request(Rule::K, ids, args)),
            TileKind::S if args.len() == 3 => return Some(request(Rule::S, ids, args)),
            _ => return None,
        }
    }
}

fn request(rule: Rule, redex_ids: Vec<TileId>, mut args: Vec<TileId>) -> ReductionRequest {
    args.reverse();
    let rid = derive_rid(&Provenance::new(redex_ids.clone(), SK_OP, rule.code(), 0));
    ReductionRequest {
        rid,
        rule,
        redex_ids,
        args,
    }
}

/// Ids of Present tiles reachable from `root`, indirections followed.
pub fn reachable(store: &Store, root: TileId) -> BTreeSet<TileId> {
    let mut seen = BTreeSet::new();
    let mut stack = vec![root];
    while let Some(id) = stack.pop() {
        let Some(kind) = present(store, id) else { continue };
        if !seen.insert(id) {
            continue;
        }
        match kind {
            TileKind::App(a, b) => {
                stack.push(*a);
                stack.push(*b);
            }
            TileKind::Ind(t) => stack.push(*t),
            _ => {}
        }
    }
    seen
}

/// Pattern-match every reachable redex whose apex satisfies `owned`.
/// Deterministic in the store contents.
pub fn branch(store: &Store, root: TileId, owned: impl Fn(TileId) -> bool) -> Vec<ReductionRequest> {
    reachable(store, root)
        .into_iter()
        .filter(|&id| owned(id))
        .filter_map(|id| match_redex(store, id))
        .collect()
}

/// `true` if every tile reachable from `id` is Present and none is a redex
/// apex. Such a subtree can never be touched by another rewrite.
fn is_stable(store: &Store, id: TileId) -> bool {
    let mut stack = vec![id];
    let mut seen = BTreeSet::new();
    while let Some(t) = stack.pop() {
        if !seen.insert(t) {
            continue;
        }
        let Some(kind) = present(store, t) else { return false };
        match kind {
            TileKind::App(a, b) => {
                if match_redex(store, t).is_some() {
                    return false;
                }
                stack.push(*a);
                stack.push(*b);
            }
            TileKind::Ind(n) => stack.push(*n),
            _ => {}
        }
    }
    true
}

fn fresh_id(rid: Rid, position: u32) -> TileId {
    let sources = vec![TileId(rid.0 as u64), TileId((rid.0 >> 64) as u64)];
    tile_id_for(derive_rid(&Provenance::new(sources, SK_OP, FRESH, position)))
}

fn tile_increment(rid: Rid, id: TileId, cell: TileCell) -> Increment {
    Increment::merge(id, SK_STORE, rid, JoinValue::single_tile(id, cell))
}

/// The increments of one rewrite transaction, or `None` if `req` is stale
/// against `store` (its redex is no longer intact, or for S the shared
/// argument is not yet stable).
///
/// K: the apex becomes an indirection to `x`. S: three new applications
/// build `x z (y z')` where `z'` is a fresh copy of `z`, and the apex becomes
/// an indirection to the new root. Either way the rest of the spine is
/// tombstoned. Every emitted cell carries `req.rid`; all new ids derive from
/// it, so re-firing the same request emits identical increments.
pub fn combine(req: &ReductionRequest, store: &Store) -> Result<Option<Vec<Increment>>, SkError> {
    if req.args.len() != req.rule.arity() || req.redex_ids.len() < req.rule.arity() + 1 {
        return Err(SkError::CorruptRequest(format!(
            "{:?} rule with {} args and {} spine tiles",
            req.rule,
            req.args.len(),
            req.redex_ids.len()
        )));
    }
    let expected = request(req.rule, req.redex_ids.clone(), req.args.iter().rev().copied().collect());
    if expected.rid != req.rid {
        return Err(SkError::CorruptRequest(format!("rid {} does not match its redex", req.rid)));
    }
    let Some(current) = match_redex(store, req.redex_ids[0]) else {
        return Ok(None);
    };
    if current != *req {
        return Ok(None);
    }
    let rid = req.rid;
    let apex = req.redex_ids[0];
    let mut out = Vec::new();
    match req.rule {
        Rule::K => {
            out.push(tile_increment(rid, apex, TileCell::present(TileKind::Ind(req.args[0]), rid)));
        }
        Rule::S => {
            let (x, y, z) = (req.args[0], req.args[1], req.args[2]);
            if !is_stable(store, z) {
                return Ok(None);
            }
            let mut position = 3;
            let z_copy = copy_subtree(store, z, rid, &mut position, &mut out)?;
            let n1 = fresh_id(rid, 0);
            let n2 = fresh_id(rid, 1);
            let n3 = fresh_id(rid, 2);
            out.push(tile_increment(rid, n1, TileCell::present(TileKind::App(x, z), rid)));
            out.push(tile_increment(rid, n2, TileCell::present(TileKind::App(y, z_copy), rid)));
            out.push(tile_increment(rid, n3, TileCell::present(TileKind::App(n1, n2), rid)));
            out.push(tile_increment(rid, apex, TileCell::present(TileKind::Ind(n3), rid)));
        }
    }
    for &id in &req.redex_ids[1..] {
        out.push(tile_increment(rid, id, TileCell::tombstone(rid)));
    }
    Ok(Some(out))
}

/// Copy the term under `id` (indirections resolved away) into fresh tiles.
fn copy_subtree(
    store: &Store,
    id: TileId,
    rid: Rid,
    position: &mut u32,
    out: &mut Vec<Increment>,
) -> Result<TileId, SkError> {
    let (_, kind) = resolve(store, id, &mut Vec::new()).ok_or(SkError::Missing(id))?;
    let new_id = fresh_id(rid, *position);
    *position += 1;
    let kind = match kind {
        TileKind::App(a, b) => {
            let a2 = copy_subtree(store, a, rid, position, out)?;
            let b2 = copy_subtree(store, b, rid, position, out)?;
            TileKind::App(a2, b2)
        }
        leaf => leaf,
    };
    out.push(tile_increment(rid, new_id, TileCell::present(kind, rid)));
    Ok(new_id)
}

/// Read the term rooted at `root` back out of a store.
pub fn reconstruct(store: &Store, root: TileId) -> Result<ExprNode, SkError> {
    fn go(store: &Store, id: TileId, budget: &mut usize) -> Result<ExprNode, SkError> {
        if *budget == 0 {
            return Err(SkError::Cycle(id));
        }
        *budget -= 1;
        let cell = store.get(&id).ok_or(SkError::Missing(id))?;
        let kind = cell.kind().ok_or(SkError::Tombstoned(id))?;
        Ok(match kind {
            TileKind::S => ExprNode::S,
            TileKind::K => ExprNode::K,
            TileKind::Var(v) => ExprNode::Var(v.clone()),
            TileKind::App(a, b) => ExprNode::app(go(store, *a, budget)?, go(store, *b, budget)?),
            TileKind::Ind(t) => go(store, *t, budget)?,
        })
    }
    // a tree never visits more tiles than the store holds
    let mut budget = store.len() + 1;
    go(store, root, &mut budget)
}

/// Apply increments to a store by join.
pub fn apply(store: &mut Store, incs: &[Increment]) -> bool {
    let mut changed = false;
    for inc in incs {
        if let Some(JoinValue::TileStore(m)) = inc.payload.as_value() {
            for (id, cell) in m {
                match store.get(id) {
                    Some(old) => {
                        let j = old.join(cell);
                        if &j != old {
                            store.insert(*id, j);
                            changed = true;
                        }
                    }
                    None => {
                        store.insert(*id, cell.clone());
                        changed = true;
                    }
                }
            }
        }
    }
    changed
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sk::{parse, reduce_oracle};

    fn p(s: &str) -> ExprNode {
        parse(s).unwrap()
    }

    /// Fire every request from `branch` (all nodes owned) until none applies.
    fn drive(expr: &ExprNode, max: usize) -> (Store, TileId, usize) {
        let t = translate(expr);
        let mut store = t.store();
        let mut steps = 0;
        loop {
            let mut fired = false;
            for req in branch(&store, t.root, |_| true) {
                if let Some(incs) = combine(&req, &store).unwrap() {
                    apply(&mut store, &incs);
                    fired = true;
                    steps += 1;
                }
            }
            if !fired || steps >= max {
                return (store, t.root, steps);
            }
        }
    }

    #[test]
    fn translate_single_leaf() {
        let t = translate(&ExprNode::K);
        assert_eq!(t.tiles.len(), 1);
        assert_eq!(t.tiles[0].kind, TileKind::K);
    }

    #[test]
    fn duplicate_subtrees_get_distinct_ids() {
        let t = translate(&p("(f x)(f x)"));
        assert_eq!(t.tiles.len(), 7);
        let ids: BTreeSet<_> = t.tiles.iter().map(|t| t.id).collect();
        assert_eq!(ids.len(), 7);
        let c = translate_collapsed(&p("(f x)(f x)"));
        assert_eq!(c.store().len(), 4);
    }

    #[test]
    fn round_trip_through_tiles() {
        for s in ["K", "S x y z", "(f x)(f x)", "S (K a) (S K K) (b c)"] {
            let e = p(s);
            let t = translate(&e);
            assert_eq!(reconstruct(&t.store(), t.root).unwrap(), e);
        }
    }

    #[test]
    fn branch_on_k_redex() {
        let t = translate(&p("K a b"));
        let store = t.store();
        let reqs = branch(&store, t.root, |_| true);
        assert_eq!(reqs.len(), 1);
        let r = &reqs[0];
        assert_eq!(r.rule, Rule::K);
        // apex, App(K, a), K
        assert_eq!(r.redex_ids.len(), 3);
        assert_eq!(r.redex_ids[0], t.root);
        let by_kind = |k: TileKind| t.tiles.iter().find(|x| x.kind == k).unwrap().id;
        assert_eq!(r.args, vec![by_kind(TileKind::Var("a".into())), by_kind(TileKind::Var("b".into()))]);
        assert_eq!(*r.redex_ids.last().unwrap(), by_kind(TileKind::K));
        assert_eq!(branch(&store, t.root, |_| true), reqs);
    }

    #[test]
    fn branch_without_combinator_head() {
        let t = translate(&p("x y"));
        assert!(branch(&t.store(), t.root, |_| true).is_empty());
        let t = translate(&p("S a b"));
        assert!(branch(&t.store(), t.root, |_| true).is_empty());
    }

    #[test]
    fn k_rule_end_to_end() {
        let t = translate(&p("K a b"));
        let mut store = t.store();
        let req = branch(&store, t.root, |_| true).remove(0);
        let incs = combine(&req, &store).unwrap().unwrap();
        // apex indirection plus two tombstones
        assert_eq!(incs.len(), 3);
        assert!(incs.iter().all(|i| i.meta.rid == req.rid));
        apply(&mut store, &incs);
        assert_eq!(reconstruct(&store, t.root).unwrap(), p("a"));
        assert_eq!(combine(&req, &store).unwrap(), None, "request is stale once applied");
    }

    #[test]
    fn s_rule_end_to_end() {
        let t = translate(&p("S x y z"));
        let mut store = t.store();
        let req = branch(&store, t.root, |_| true).remove(0);
        assert_eq!(req.rule, Rule::S);
        let incs = combine(&req, &store).unwrap().unwrap();
        apply(&mut store, &incs);
        assert_eq!(reconstruct(&store, t.root).unwrap(), p("x z (y z)"));
    }

    #[test]
    fn duplicate_application_is_idempotent() {
        let t = translate(&p("S x y (z w)"));
        let mut once = t.store();
        let req = branch(&once, t.root, |_| true).remove(0);
        let incs = combine(&req, &once).unwrap().unwrap();
        let mut twice = once.clone();
        apply(&mut once, &incs);
        apply(&mut twice, &incs);
        apply(&mut twice, &incs);
        assert_eq!(once, twice);
        // re-firing from the original view emits identical increments
        assert_eq!(combine(&req, &t.store()).unwrap().unwrap(), incs);
    }

    #[test]
    fn s_waits_for_stable_argument() {
        let t = translate(&p("S x y (K a b)"));
        let store = t.store();
        let reqs = branch(&store, t.root, |_| true);
        assert_eq!(reqs.len(), 2);
        let s = reqs.iter().find(|r| r.rule == Rule::S).unwrap();
        assert_eq!(combine(s, &store).unwrap(), None);
    }

    #[test]
    fn corrupted_requests_are_rejected() {
        let t = translate(&p("K a b"));
        let store = t.store();
        let mut req = branch(&store, t.root, |_| true).remove(0);
        req.rule = Rule::S;
        assert!(matches!(combine(&req, &store), Err(SkError::CorruptRequest(_))));
        let mut req = branch(&store, t.root, |_| true).remove(0);
        req.rid = Rid(1);
        assert!(matches!(combine(&req, &store), Err(SkError::CorruptRequest(_))));
    }

    #[test]
    fn reconstruct_integrity_errors() {
        let t = translate(&p("a b"));
        let mut store = t.store();
        store.remove(&t.root);
        assert_eq!(reconstruct(&store, t.root), Err(SkError::Missing(t.root)));
        let mut store = t.store();
        store.insert(t.root, TileCell::tombstone(Rid(3)));
        assert_eq!(reconstruct(&store, t.root), Err(SkError::Tombstoned(t.root)));
    }

    #[test]
    fn local_rewriting_matches_oracle() {
        for s in ["S K K a", "S (K a) (S K K) b", "K (S K K a) b", "S (S K K) (S K K) (K a)", "(K (f x) a)(K (f x) b)"] {
            let e = p(s);
            let (store, root, _) = drive(&e, 500);
            let expected = reduce_oracle(&e, 200);
            assert_eq!(Some(&reconstruct(&store, root).unwrap()), expected.normal_form(), "{s}");
        }
    }

    #[test]
    fn collapsed_ids_break_rewriting() {
        let e = p("(S K K a)(S K K b)");
        let c = translate_collapsed(&e);
        let mut store = c.store();
        for _ in 0..20 {
            for req in branch(&store, c.root, |_| true) {
                if let Some(incs) = combine(&req, &store).unwrap() {
                    apply(&mut store, &incs);
                }
            }
        }
        let got = reconstruct(&store, c.root);
        assert_ne!(got.ok(), Some(p("a b")));
    }
}
