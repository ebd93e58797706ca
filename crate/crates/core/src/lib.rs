//! Deterministic simulator and runtime for self-describing parallel flows:
//! semilattice-merged, rid-idempotent, windowed, barrier-less dataflow over
//! a fair-lossy network, plus an SK-combinator reduction engine built on the
//! same primitives and an experiment harness.

pub mod driver;
pub mod experiments;
pub mod flow;
pub mod ids;
pub mod lattice;
pub mod metrics;
pub mod node;
pub mod sk;
pub mod netsim;

pub use ids::{NodeId, Rid, TargetId, TileId};
pub use lattice::{join, join_all, leq, JoinValue, LatticeError, TileCell, TileKind, VariantKind};
