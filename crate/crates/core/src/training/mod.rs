//! Rewards, replay, rollouts and the double-Q updates for the centralized
//! and decentralized exploration policies.

use std::path::Path;

use thiserror::Error;

pub mod actions;
pub mod encoding;
pub mod replay;
pub mod rewards;
pub mod rollout;
pub mod trainer;
pub mod update;

pub use actions::{
    argmax, constrained_joint_argmax, epsilon_greedy, joint_action_count, joint_action_decode, joint_action_encode,
    joint_component, joint_epsilon_greedy, ActionError, EpsilonSchedule,
};
pub use encoding::{encode_individual, encode_joint, encode_map, EncodedObs, EncodingError};
pub use replay::{ReplayBuffer, ReplayEpisode, SequenceSample, Transition};
pub use rewards::{compute_step_rewards, proximity_penalty, RhoLedger, StepRewards, COMPLETION_BONUS, PROXIMITY_CAP};
pub use rollout::{rollout_centralized, rollout_decentralized, EpisodeMetrics};
pub use trainer::{
    dep_file_name, initial_networks, random_environment, train, train_decentralized_only, train_on, write_training_log, LogRow,
    TrainConfig, TrainedPolicies,
};
pub use update::{
    centralized_target_action, centralized_update, decentralized_update, evaluate_loss, TargetSource, TdItem,
    UpdateConfig, UpdateError,
};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid training config: {0}")]
    Config(String),
    #[error(transparent)]
    Network(#[from] crate::nn::NnError),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error(transparent)]
    Update(#[from] UpdateError),
    #[error(transparent)]
    Grid(#[from] crate::sim::GridError),
    #[error(transparent)]
    Weights(#[from] crate::nn::WeightFileError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl TrainError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        TrainError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
