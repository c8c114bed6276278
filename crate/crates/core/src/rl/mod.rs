//! Gridworld MDPs with delayed temporal-logic rewards: environments, an
//! online robustness monitor, value iteration, Q-learning, rollouts, policy
//! trees, and state-token clouds.

pub mod env;
pub mod monitor;
pub mod plan;
pub mod tokens;

use thiserror::Error;

use crate::detect::DetectError;
use crate::spaces::SpacesError;
use crate::stl::StlError;

pub use env::{channel_names, Action, EnvSpec, GridEnv, GridState, Heading, Mdp};
pub use monitor::Monitor;
pub use plan::{
    face_policy, first_step_actions, policy_to_tree, q_learning, rollout, value_iteration, EpisodeTrace, Learned,
    NodeKey, Plan, Policy, Product, QParams,
};
pub use tokens::{encode_state, sample_token_states, TokenCloud, CUE_WEIGHT};

#[derive(Debug, Error)]
pub enum RlError {
    #[error("bad-spec: {0}")]
    BadSpec(String),
    #[error("bad-policy: {0}")]
    BadPolicy(String),
    #[error("bad-parameters: {0}")]
    BadParameters(String),
    #[error("unsupported-formula: {0}")]
    UnsupportedFormula(String),
    #[error(transparent)]
    Stl(#[from] StlError),
    #[error(transparent)]
    Spaces(#[from] SpacesError),
    #[error(transparent)]
    Detect(#[from] DetectError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
