use rand::Rng;

use super::actions::{epsilon_greedy, joint_component, joint_epsilon_greedy};
use super::encoding::{encode_individual, encode_joint, EncodedObs};
use super::replay::{ReplayEpisode, Transition};
use super::TrainError;
use crate::nn::{DrqnNetwork, Hidden};
use crate::world::World;

/// Summary of one rollout.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpisodeMetrics {
    pub team_reward: f64,
    pub steps: u32,
    pub explored_cells: usize,
    pub completed: bool,
    pub decisions: usize,
}

fn metrics(world: &World, team_reward: f64, decisions: usize) -> EpisodeMetrics {
    EpisodeMetrics {
        team_reward,
        steps: world.t(),
        explored_cells: world.team_explored(),
        completed: world.completed(),
        decisions,
    }
}

/// A macro in flight: its selection-time observation, accumulating reward.
struct Open {
    obs: EncodedObs,
    joint: Option<EncodedObs>,
    action: usize,
    reward: f64,
    duration: u32,
}

impl Open {
    fn close(self) -> Transition {
        Transition {
            obs: self.obs,
            joint: self.joint,
            action: self.action,
            reward: self.reward,
            duration: self.duration,
        }
    }
}

/// Each robot picks its own macro by ε-greedy over its own network whenever
/// its previous macro ends. With `record_joint`, the joint observation at each
/// decision is stored too, for centralized targets.
pub fn rollout_decentralized<R: Rng>(
    world: &mut World,
    nets: &[&DrqnNetwork<f32>],
    epsilon: f64,
    record_joint: bool,
    rng: &mut R,
) -> Result<(Vec<ReplayEpisode>, EpisodeMetrics), TrainError> {
    let n = world.team_size();
    assert_eq!(nets.len(), n, "one network per robot");
    let mut hidden: Vec<Hidden<f32>> = nets.iter().map(|net| net.zero_hidden()).collect();
    let mut open: Vec<Option<Open>> = (0..n).map(|_| None).collect();
    let mut done: Vec<Vec<Transition>> = vec![Vec::new(); n];
    let mut team_reward = 0.0;
    let mut decisions = 0;
    while !world.done() {
        let mut joint_now: Option<EncodedObs> = None;
        for i in 0..n {
            if !world.needs_decision(i) {
                continue;
            }
            let obs = encode_individual(&world.individual_observation(i))?;
            let joint = if record_joint {
                if joint_now.is_none() {
                    joint_now = Some(encode_joint(&world.joint_observation())?);
                }
                joint_now.clone()
            } else {
                None
            };
            if let Some(prev) = open[i].take() {
                done[i].push(prev.close());
            }
            let (q, h) = nets[i].forward(&obs.map_tensor(), &obs.scalars, &hidden[i])?;
            hidden[i] = h;
            let action = epsilon_greedy(&q, epsilon, rng);
            world.assign_candidate(i, action);
            decisions += 1;
            open[i] = Some(Open {
                obs,
                joint,
                action,
                reward: 0.0,
                duration: 0,
            });
        }
        let out = world.step();
        team_reward += out.team_reward;
        for (slot, r) in open.iter_mut().zip(&out.robot_rewards) {
            let o = slot.as_mut().expect("every robot holds a macro");
            o.reward += r;
            o.duration += 1;
        }
    }
    let final_joint = if record_joint {
        Some(encode_joint(&world.joint_observation())?)
    } else {
        None
    };
    let mut episodes = Vec::with_capacity(n);
    for (i, (slot, mut transitions)) in open.into_iter().zip(done).enumerate() {
        if let Some(o) = slot {
            transitions.push(o.close());
        }
        episodes.push(ReplayEpisode {
            transitions,
            final_obs: encode_individual(&world.individual_observation(i))?,
            final_joint: final_joint.clone(),
            terminal: world.completed(),
        });
    }
    Ok((episodes, metrics(world, team_reward, decisions)))
}

/// The team acts through one joint network. Whenever any macro ends, the
/// joint argmax is restricted to the running macros of the other robots, and
/// only the finished robots receive new macros.
pub fn rollout_centralized<R: Rng>(
    world: &mut World,
    net: &DrqnNetwork<f32>,
    epsilon: f64,
    rng: &mut R,
) -> Result<(ReplayEpisode, EpisodeMetrics), TrainError> {
    let n = world.team_size();
    let mut hidden = net.zero_hidden();
    let mut open: Option<Open> = None;
    let mut transitions = Vec::new();
    let mut team_reward = 0.0;
    let mut decisions = 0;
    while !world.done() {
        let deciding: Vec<bool> = (0..n).map(|i| world.needs_decision(i)).collect();
        if deciding.iter().any(|&d| d) {
            let obs = encode_joint(&world.joint_observation())?;
            if let Some(prev) = open.take() {
                transitions.push(prev.close());
            }
            let (q, h) = net.forward(&obs.map_tensor(), &obs.scalars, &hidden)?;
            hidden = h;
            let locked: Vec<Option<usize>> = (0..n)
                .map(|i| {
                    if deciding[i] {
                        None
                    } else {
                        world.executor(i).map(|e| e.action().index)
                    }
                })
                .collect();
            let action = joint_epsilon_greedy(&q, &locked, epsilon, rng);
            for (i, &d) in deciding.iter().enumerate() {
                if d {
                    world.assign_candidate(i, joint_component(action, n, i));
                }
            }
            decisions += 1;
            open = Some(Open {
                obs,
                joint: None,
                action,
                reward: 0.0,
                duration: 0,
            });
        }
        let out = world.step();
        team_reward += out.team_reward;
        let o = open.as_mut().expect("team holds a joint macro");
        o.reward += out.team_reward;
        o.duration += 1;
    }
    if let Some(o) = open {
        transitions.push(o.close());
    }
    let episode = ReplayEpisode {
        transitions,
        final_obs: encode_joint(&world.joint_observation())?,
        final_joint: None,
        terminal: world.completed(),
    };
    Ok((episode, metrics(world, team_reward, decisions)))
}
