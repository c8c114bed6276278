//! Concrete stratified spaces: grid games, the space-time coin game, and
//! trajectory spaces.

pub mod coin;
pub mod grid;
pub mod trajectory;

use thiserror::Error;

use crate::poset::PosetError;

pub use coin::{
    cone_join, lightcone_leq, overlap_poset, overlap_poset_bruteforce, strat_label, Coin, CoinConfig, OverlapPoset,
    SpaceTimePoint,
};
pub use grid::{policy_tree, tree_stratification, FacePolicy, GridStratification, Move, PolicyTree};
pub use trajectory::{traj_chain, traj_label, traj_stratify, TargetSet, TrajectoryStratification};

#[derive(Debug, Error)]
pub enum SpacesError {
    #[error("config-invalid: {0}")]
    ConfigInvalid(String),
    #[error("resolution-too-coarse: {0}")]
    ResolutionTooCoarse(String),
    #[error("point-outside-domain: ({t}, {y})")]
    PointOutsideDomain { t: f64, y: f64 },
    #[error("speed-violation: step {step} moves {dy} in time {dt}")]
    SpeedViolation { step: usize, dy: f64, dt: f64 },
    #[error("not-a-spanning-tree: {0}")]
    NotASpanningTree(String),
    #[error("bad-policy: {0}")]
    BadPolicy(String),
    #[error("bad-trace: {0}")]
    BadTrace(String),
    #[error("no-traces: at least one trace is required")]
    NoTraces,
    #[error(transparent)]
    Poset(#[from] PosetError),
}
