//! Turning fused outcome estimates into decisions: the empirical transition
//! model, finite-horizon value iteration over it, and one-step Thompson
//! sampling from the Dirichlet posterior.

mod model;
mod reward;
mod thompson;
mod value_iteration;

pub use model::{
    build_transition_model, expand_model, fused_estimate, ActionSet, Transition, TransitionModel,
    DEFAULT_NODE_CAP,
};
pub use reward::{OutcomeClass, RewardSpec};
pub use thompson::select_action_thompson;
pub use value_iteration::{value_iteration, StateValue};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    #[default]
    Thompson,
    ValueIteration,
}
