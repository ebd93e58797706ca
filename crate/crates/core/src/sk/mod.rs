//! SK combinator reduction on top of the tile store.
//!
//! A term is laid out as tiles (one per node) inside a single `TileStore`
//! target that every node replicates. The owner of a redex's apex tile fires
//! it: `branch` pattern-matches, `combine` turns the match into one rewrite
//! transaction of tile increments all tagged with the same rid, and the
//! increments are multicast to every replica. Consumed spine tiles are
//! tombstoned; the apex is replaced by an indirection to the contractum.
//! `reconstruct` reads the term back out.

mod corpus;
mod distributed;
mod expr;
mod tiles;

use thiserror::Error;

use crate::ids::TileId;

pub use corpus::{duplicate_subtree_corpus, eager_reduce, generate_corpus, random_expr, CorpusSpec};
pub use distributed::{run_distributed, run_translation, SkOutcome, SkRun, SkRunConfig};
pub use expr::{parse, reduce_oracle, ExprNode, ParseError, Reduction};
pub use tiles::{
    apply, branch, combine, match_redex, reachable, reconstruct, translate, translate_collapsed, ReductionRequest,
    Rule, SkTile, Store, Translation, SK_STORE,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SkError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("corrupted reduction request: {0}")]
    CorruptRequest(String),
    #[error("tile {0} is referenced but missing")]
    Missing(TileId),
    #[error("tile {0} is referenced but tombstoned")]
    Tombstoned(TileId),
    #[error("reference cycle through tile {0}")]
    Cycle(TileId),
    #[error("replicas disagree at quiescence")]
    ReplicasDiverged,
}

#[cfg(test)]
mod tests;
