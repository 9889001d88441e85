//! Simulation and verification of the shortest augmenting path algorithm on
//! online bipartite forests.

pub mod audit;
pub mod distance;
pub mod dsu;
pub mod forest;
pub mod ledger;
pub mod levels;
pub mod matching;
pub mod minimax;
pub mod oracle;
pub mod scenario;
pub mod trace;
pub mod verify;
pub mod vitality;

#[cfg(test)]
pub(crate) mod testutil;

pub use distance::Distance;
pub use forest::{Color, ForestAt, ForestError, Graph, OnlineForest, RootedView, TieBreak, VertexId};
pub use minimax::{EngineError, MiniMaxTable, Path};
