//! Decentralized multi-robot frontier exploration with macro actions.
//!
//! The crate bundles a seedable grid-world simulator with sensing noise,
//! motion noise and pairwise communication dropout; belief mapping and goal
//! extraction; an A* macro-action executor; hand-written recurrent Q-networks
//! for centralized and decentralized exploration policies; the training loop;
//! classical frontier baselines; and the evaluation harness.

pub mod sim;
pub mod mapping;
pub mod nav;
pub mod nn;
pub mod training;
pub mod world;
pub mod baselines;
pub mod harness;
