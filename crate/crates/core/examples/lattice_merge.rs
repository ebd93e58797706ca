//! Merge the same contributions in different orders, with duplicates, and
//! get the same state every time.

use sdpf::{join_all, JoinValue, Rid, TileCell, TileId, TileKind};

fn main() {
    let contributions = vec![
        JoinValue::single_contribution(Rid(1), 5),
        JoinValue::single_contribution(Rid(2), 7),
        JoinValue::single_contribution(Rid(3), -2),
    ];
    let forward = join_all(&contributions).unwrap();
    let mut replayed = contributions.clone();
    replayed.reverse();
    replayed.push(contributions[1].clone());
    replayed.push(contributions[1].clone());
    let backward = join_all(&replayed).unwrap();
    println!("in order:          {} (total {:?})", forward.to_canonical_text(), forward.total());
    println!("reversed + dups:   {} (total {:?})", backward.to_canonical_text(), backward.total());
    assert_eq!(forward, backward);

    // A tombstone wins over any present cell for the same tile.
    let live = JoinValue::single_tile(TileId(9), TileCell::present(TileKind::K, Rid(4)));
    let dead = JoinValue::single_tile(TileId(9), TileCell::tombstone(Rid(5)));
    println!("K then tombstone:  {}", join_all([&live, &dead]).unwrap().to_canonical_text());
    println!("tombstone then K:  {}", join_all([&dead, &live]).unwrap().to_canonical_text());
}
