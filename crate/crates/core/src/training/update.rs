//! Double-Q temporal-difference updates over replayed sequences. Every step
//! but the last of a window only warms up the recurrent state; the loss and
//! its gradient come from the last step alone.

use thiserror::Error;

use super::actions::{argmax, joint_component};
use super::encoding::EncodedObs;
use super::replay::SequenceSample;
use crate::nn::{clip_grad_norm, Adam, DoubleQ, DrqnNetwork, Hidden, NetCache, NnError};

#[derive(Debug, Error)]
pub enum UpdateError {
    #[error(transparent)]
    Shape(#[from] NnError),
    #[error("non-finite loss {loss} in {network} update {update} (max |Q| {max_q}, max |target| {max_target})")]
    NonFinite {
        network: String,
        update: u64,
        loss: f64,
        max_q: f64,
        max_target: f64,
    },
    #[error("centralized targets need joint observations in the replayed sequence")]
    MissingJoint,
}

/// Hyperparameters shared by both update rules.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UpdateConfig {
    pub gamma: f64,
    /// Multiplies stored rewards before they enter the TD target.
    pub reward_scale: f64,
    /// Global gradient-norm bound; non-positive disables clipping.
    pub grad_clip: f64,
}

impl Default for UpdateConfig {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            reward_scale: 0.01,
            grad_clip: 10.0,
        }
    }
}

/// One replayed window reduced to what the loss needs.
#[derive(Clone, Debug)]
pub struct TdItem<'a> {
    /// Observations of the window plus the next observation (length ≥ 2).
    pub observations: Vec<&'a EncodedObs>,
    /// Joint observations aligned with `observations`, when available.
    pub joint: Option<Vec<&'a EncodedObs>>,
    pub action: usize,
    pub reward: f64,
    pub duration: u32,
    pub terminal: bool,
}

impl<'a> TdItem<'a> {
    pub fn from_sample(s: &SequenceSample<'a>) -> Self {
        let last = s.last();
        Self {
            observations: s.observations(),
            joint: s.joint_observations(),
            action: last.action,
            reward: last.reward,
            duration: last.duration,
            terminal: s.terminal(),
        }
    }
}

/// How a decentralized network picks its bootstrap action.
#[derive(Clone, Copy, Debug)]
pub enum TargetSource<'a> {
    /// Robot `robot`'s component of the centralized network's joint argmax.
    Centralized {
        network: &'a DrqnNetwork<f32>,
        robot: usize,
        team_size: usize,
    },
    /// The decentralized network's own argmax.
    Own,
}

fn run(net: &DrqnNetwork<f32>, obs: &[&EncodedObs], hidden: Hidden<f32>) -> Result<(Vec<f32>, Hidden<f32>), NnError> {
    let mut h = hidden;
    let mut q = Vec::new();
    for o in obs {
        let (q2, h2) = net.forward(&o.map_tensor(), &o.scalars, &h)?;
        q = q2;
        h = h2;
    }
    Ok((q, h))
}

struct Forwarded {
    q: Vec<f32>,
    cache: NetCache<f32>,
    hidden: Hidden<f32>,
}

/// Burn-in over all but the last window observation, then a cached forward.
fn forward_window(net: &DrqnNetwork<f32>, window: &[&EncodedObs]) -> Result<Forwarded, NnError> {
    let (last, burn) = window.split_last().expect("non-empty window");
    let (_, h) = run(net, burn, net.zero_hidden())?;
    let (q, hidden, cache) = net.forward_cached(&last.map_tensor(), &last.scalars, &h)?;
    Ok(Forwarded { q, cache, hidden })
}

/// TD target for one item given the action the bootstrap should value.
fn bootstrap(
    target: &DrqnNetwork<f32>,
    item: &TdItem<'_>,
    action: usize,
    cfg: &UpdateConfig,
) -> Result<f64, NnError> {
    let (q_next, _) = run(target, &item.observations, target.zero_hidden())?;
    Ok(cfg.gamma.powi(item.duration as i32) * q_next[action] as f64)
}

fn target_action(
    net: &DoubleQ<f32>,
    item: &TdItem<'_>,
    hidden: &Hidden<f32>,
    source: TargetSource<'_>,
) -> Result<usize, UpdateError> {
    match source {
        TargetSource::Own => {
            let next = item.observations[item.observations.len() - 1];
            let (q_next, _) = net.estimation.forward(&next.map_tensor(), &next.scalars, hidden)?;
            Ok(argmax(&q_next))
        }
        TargetSource::Centralized {
            network,
            robot,
            team_size,
        } => {
            let joint = item.joint.as_ref().ok_or(UpdateError::MissingJoint)?;
            Ok(centralized_target_action(network, joint, robot, team_size)?)
        }
    }
}

/// Mean squared TD error over the batch. With `grads`, also accumulates its
/// gradient with respect to the estimation parameters.
fn td_loss(
    net: &DoubleQ<f32>,
    batch: &[TdItem<'_>],
    source: TargetSource<'_>,
    cfg: &UpdateConfig,
    mut grads: Option<&mut DrqnNetwork<f32>>,
) -> Result<(f64, f64, f64), UpdateError> {
    let b = batch.len() as f64;
    let (mut loss, mut max_q, mut max_t) = (0.0, 0.0f64, 0.0f64);
    for item in batch {
        let n = item.observations.len();
        let fw = forward_window(&net.estimation, &item.observations[..n - 1])?;
        let mut y = item.reward * cfg.reward_scale;
        if !item.terminal {
            let action = target_action(net, item, &fw.hidden, source)?;
            y += bootstrap(&net.target, item, action, cfg)?;
        }
        let q = fw.q[item.action] as f64;
        let td = q - y;
        loss += td * td / b;
        max_q = max_q.max(q.abs());
        max_t = max_t.max(y.abs());
        if let Some(g) = grads.as_deref_mut() {
            let mut gq = vec![0.0f32; fw.q.len()];
            gq[item.action] = (2.0 * td / b) as f32;
            net.estimation.backward(&fw.cache, &gq, None, g);
        }
    }
    Ok((loss, max_q, max_t))
}

fn apply_update(
    net: &mut DoubleQ<f32>,
    adam: &mut Adam<f32>,
    batch: &[TdItem<'_>],
    source: TargetSource<'_>,
    cfg: &UpdateConfig,
    name: &str,
) -> Result<f64, UpdateError> {
    let mut grads = net.estimation.zeros_like();
    let (loss, max_q, max_target) = td_loss(net, batch, source, cfg, Some(&mut grads))?;
    if !loss.is_finite() {
        return Err(UpdateError::NonFinite {
            network: name.to_string(),
            update: adam.steps(),
            loss,
            max_q,
            max_target,
        });
    }
    if cfg.grad_clip > 0.0 {
        clip_grad_norm(&mut grads, cfg.grad_clip);
    }
    adam.apply(&mut net.estimation, &grads);
    Ok(loss)
}

/// Mean squared TD error with target `r + γ^τ Q′(δ′, argmax Q(δ′, ·))`.
/// Returns the loss before the parameter step.
pub fn centralized_update(
    net: &mut DoubleQ<f32>,
    adam: &mut Adam<f32>,
    batch: &[TdItem<'_>],
    cfg: &UpdateConfig,
) -> Result<f64, UpdateError> {
    apply_update(net, adam, batch, TargetSource::Own, cfg, "centralized")
}

/// Mean squared TD error for one robot's network. The bootstrap action
/// comes from `source`; its value always comes from the robot's target network.
pub fn decentralized_update(
    net: &mut DoubleQ<f32>,
    adam: &mut Adam<f32>,
    batch: &[TdItem<'_>],
    source: TargetSource<'_>,
    cfg: &UpdateConfig,
) -> Result<f64, UpdateError> {
    apply_update(net, adam, batch, source, cfg, "decentralized")
}

/// Robot `robot`'s macro within the centralized estimation network's joint
/// argmax after consuming `joint` (which ends with the next observation).
pub fn centralized_target_action(
    cep: &DrqnNetwork<f32>,
    joint: &[&EncodedObs],
    robot: usize,
    team_size: usize,
) -> Result<usize, NnError> {
    let (q, _) = run(cep, joint, cep.zero_hidden())?;
    Ok(joint_component(argmax(&q), team_size, robot))
}

/// Batch loss without a parameter step.
pub fn evaluate_loss(
    net: &DoubleQ<f32>,
    batch: &[TdItem<'_>],
    source: TargetSource<'_>,
    cfg: &UpdateConfig,
) -> Result<f64, UpdateError> {
    Ok(td_loss(net, batch, source, cfg, None)?.0)
}
