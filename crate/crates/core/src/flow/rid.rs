use sha2::{Digest, Sha256};

use crate::ids::{Rid, TileId};

/// Everything that identifies one semantic contribution. Two emissions with
/// equal provenance are the same contribution and must carry the same rid.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Provenance {
    sources: Vec<TileId>,
    pub op: u16,
    pub rule: u16,
    pub position: u32,
}

impl Provenance {
    /// Source ids are sorted so that provenance is canonical.
    pub fn new(mut sources: Vec<TileId>, op: u16, rule: u16, position: u32) -> Self {
        sources.sort_unstable();
        Provenance {
            sources,
            op,
            rule,
            position,
        }
    }

    pub fn sources(&self) -> &[TileId] {
        &self.sources
    }
}

/// Deterministic 128-bit replay id: the first 16 bytes of SHA-256 over the
/// canonical provenance encoding.
pub fn derive_rid(p: &Provenance) -> Rid {
    let mut h = Sha256::new();
    h.update(b"sdpf-rid\0");
    h.update((p.sources.len() as u64).to_le_bytes());
    for id in &p.sources {
        h.update(id.0.to_le_bytes());
    }
    h.update(p.op.to_le_bytes());
    h.update(p.rule.to_le_bytes());
    h.update(p.position.to_le_bytes());
    let digest = h.finalize();
    let mut bytes = [0u8; 16];
    bytes.copy_from_slice(&digest[..16]);
    Rid(u128::from_le_bytes(bytes))
}

/// Tile id minted for an output identified by `rid`.
pub fn tile_id_for(rid: Rid) -> TileId {
    TileId(rid.0 as u64 ^ (rid.0 >> 64) as u64)
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn same_provenance_same_rid() {
        let p = Provenance::new(vec![TileId(3), TileId(1)], 2, 0, 0);
        let q = Provenance::new(vec![TileId(1), TileId(3)], 2, 0, 0);
        assert_eq!(derive_rid(&p), derive_rid(&q));
        assert_eq!(derive_rid(&p), derive_rid(&p.clone()));
    }

    #[test]
    fn position_changes_rid() {
        let a = Provenance::new(vec![TileId(7)], 1, 1, 0);
        let b = Provenance::new(vec![TileId(7)], 1, 1, 1);
        assert_ne!(derive_rid(&a), derive_rid(&b));
    }

    #[test]
    fn no_collisions_over_random_provenance() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
        let mut seen_prov = HashSet::new();
        let mut seen_rid = HashSet::new();
        while seen_prov.len() < 100_000 {
            let n = rng.gen_range(0..4);
            let sources = (0..n).map(|_| TileId(rng.gen_range(0..1_000))).collect();
            let p = Provenance::new(sources, rng.gen_range(0..8), rng.gen_range(0..3), rng.gen_range(0..16));
            if seen_prov.insert(p.clone()) {
                assert!(seen_rid.insert(derive_rid(&p)), "rid collision for {p:?}");
            }
        }
    }
}
