//! Generators and law checks shared by the lattice suites.

use proptest::prelude::*;

use sdpf::{join, leq, JoinValue, Rid, TileCell, TileId, TileKind, VariantKind};

pub const VARIANTS: [VariantKind; 4] = [
    VariantKind::MaxRegister,
    VariantKind::GrowSet,
    VariantKind::RidKeyedSum,
    VariantKind::TileStore,
];

// Small key domains so that generated values collide often.
fn rid() -> impl Strategy<Value = Rid> {
    (0u128..6).prop_map(Rid)
}

fn tile_id() -> impl Strategy<Value = TileId> {
    (0u64..6).prop_map(TileId)
}

fn tile_kind() -> impl Strategy<Value = TileKind> {
    prop_oneof![
        Just(TileKind::S),
        Just(TileKind::K),
        "[a-c]".prop_map(TileKind::Var),
        (tile_id(), tile_id()).prop_map(|(f, a)| TileKind::App(f, a)),
        tile_id().prop_map(TileKind::Ind),
    ]
}

fn tile_cell() -> impl Strategy<Value = TileCell> {
    prop_oneof![
        3 => (tile_kind(), rid()).prop_map(|(k, r)| TileCell::present(k, r)),
        1 => rid().prop_map(TileCell::tombstone),
    ]
}

pub fn value_of(kind: VariantKind) -> BoxedStrategy<JoinValue> {
    match kind {
        VariantKind::MaxRegister => (-20i64..20).prop_map(JoinValue::MaxRegister).boxed(),
        VariantKind::GrowSet => prop::collection::btree_set(prop::collection::vec(0u8..3, 0..3), 0..5)
            .prop_map(JoinValue::GrowSet)
            .boxed(),
        VariantKind::RidKeyedSum => prop::collection::btree_map(rid(), -5i64..5, 0..5)
            .prop_map(JoinValue::RidKeyedSum)
            .boxed(),
        VariantKind::TileStore => prop::collection::btree_map(tile_id(), tile_cell(), 0..5)
            .prop_map(JoinValue::TileStore)
            .boxed(),
    }
}

fn j(a: &JoinValue, b: &JoinValue) -> JoinValue {
    join(a, b).expect("same variant")
}

fn le(a: &JoinValue, b: &JoinValue) -> bool {
    leq(a, b).expect("same variant")
}

pub fn check_laws(a: &JoinValue, b: &JoinValue, c: &JoinValue) -> Result<(), TestCaseError> {
    prop_assert_eq!(j(a, b), j(b, a), "commutative");
    prop_assert_eq!(j(&j(a, b), c), j(a, &j(b, c)), "associative");
    prop_assert_eq!(j(a, a), a.clone(), "idempotent");
    let bottom = JoinValue::bottom(a.kind());
    prop_assert_eq!(j(a, &bottom), a.clone(), "bottom is the identity");

    prop_assert!(le(a, a), "reflexive");
    if le(a, b) && le(b, a) {
        prop_assert_eq!(a, b, "antisymmetric");
    }
    if le(a, b) && le(b, c) {
        prop_assert!(le(a, c), "transitive");
    }
    let ab = j(a, b);
    prop_assert!(le(a, &ab) && le(b, &ab), "join is an upper bound");
    if le(a, c) && le(b, c) {
        prop_assert!(le(&ab, c), "join is the least upper bound");
    }
    prop_assert_eq!(le(a, b), j(a, b) == *b, "order agrees with join");

    let mut m = a.clone();
    let changed = m.merge_from(b).unwrap();
    prop_assert_eq!(&m, &ab, "in-place merge equals join");
    prop_assert_eq!(changed, ab != *a, "merge reports change exactly");
    Ok(())
}

