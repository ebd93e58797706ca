//! Semilattice laws for every `JoinValue` variant, plus the multiset oracle:
//! folding any permutation of a multiset, with arbitrary duplicates, gives
//! the same result as folding the distinct set once.

use proptest::prelude::*;
use proptest::test_runner::Config;

use sdpf::flow::{decode_value, encode_value};
use sdpf::{join, join_all, leq, JoinValue, VariantKind};

mod common;
use common::{check_laws, value_of, VARIANTS};

const CASES: u32 = 10_000;

macro_rules! law_suite {
    ($name:ident, $kind:expr) => {
        proptest! {
            #![proptest_config(Config::with_cases(CASES))]
            #[test]
            fn $name(a in value_of($kind), b in value_of($kind), c in value_of($kind)) {
                check_laws(&a, &b, &c)?;
            }
        }
    };
}

law_suite!(max_register_laws, VariantKind::MaxRegister);
law_suite!(grow_set_laws, VariantKind::GrowSet);
law_suite!(rid_keyed_sum_laws, VariantKind::RidKeyedSum);
law_suite!(tile_store_laws, VariantKind::TileStore);

fn multiset(kind: VariantKind) -> impl Strategy<Value = (Vec<JoinValue>, Vec<usize>, Vec<usize>)> {
    prop::collection::vec(value_of(kind), 1..=8).prop_flat_map(|items| {
        let n = items.len();
        let order = Just((0..n).collect::<Vec<_>>()).prop_shuffle();
        let dups = prop::collection::vec(0..n, 0..8);
        (Just(items), order, dups)
    })
}

fn check_order_free(items: &[JoinValue], order: &[usize], dups: &[usize]) -> Result<(), TestCaseError> {
    let once = join_all(items).unwrap();
    let mut replayed: Vec<&JoinValue> = order.iter().map(|&i| &items[i]).collect();
    for &d in dups {
        replayed.insert(d % (replayed.len() + 1), &items[d]);
    }
    prop_assert_eq!(join_all(replayed).unwrap(), once);
    Ok(())
}

proptest! {
    #![proptest_config(Config::with_cases(2_000))]
    #[test]
    fn fold_ignores_order_and_duplicates(
        (items, order, dups) in prop::sample::select(VARIANTS.to_vec()).prop_flat_map(multiset),
    ) {
        check_order_free(&items, &order, &dups)?;
    }

    #[test]
    fn values_survive_the_codec(
        v in prop_oneof![
            value_of(VariantKind::MaxRegister),
            value_of(VariantKind::GrowSet),
            value_of(VariantKind::RidKeyedSum),
            value_of(VariantKind::TileStore),
        ]
    ) {
        prop_assert_eq!(decode_value(&encode_value(&v)).unwrap(), v);
    }
}

#[test]
fn mixed_variants_do_not_join() {
    let a = JoinValue::MaxRegister(1);
    let b = JoinValue::bottom(VariantKind::GrowSet);
    assert!(join(&a, &b).is_err());
    assert!(leq(&a, &b).is_err());
}
