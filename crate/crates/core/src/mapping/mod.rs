//! Belief maps, merging, frontier goal extraction, the teammate ledger and
//! macro-observation assembly.

mod belief;
mod frontier;
mod knowledge;

pub use belief::{merge_maps, BeliefMap, Channel, MapError};
pub use frontier::{extract_frontiers, farthest_point_order, is_frontier, select_goal_candidates, GoalCandidates, CANDIDATES};
pub use knowledge::{
    build_joint_observation, build_macro_observation, exchange_information, exchange_team, ExchangeLink,
    JointObservation, MacroObservation, RobotKnowledge, TeammateInfo,
};
