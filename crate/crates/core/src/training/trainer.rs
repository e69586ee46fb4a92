use std::io::Write;
use std::path::{Path, PathBuf};

use rand::Rng;

use super::actions::EpsilonSchedule;
use super::replay::ReplayBuffer;
use super::rollout::{rollout_centralized, rollout_decentralized, EpisodeMetrics};
use super::update::{centralized_update, decentralized_update, TargetSource, TdItem, UpdateConfig};
use super::TrainError;
use crate::nn::{save_weights, Adam, DoubleQ, DrqnNetwork, NetworkShape};
use crate::sim::{mix_seed, stream_rng, GridEnvironment, GridError, Stream};
use crate::world::{World, WorldConfig};

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub team_size: usize,
    pub width: usize,
    pub height: usize,
    pub density_min: f64,
    pub density_max: f64,
    pub episodes: usize,
    pub batch_size: usize,
    pub seq_len: usize,
    pub gamma: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Fraction of the planned episodes over which ε decays.
    pub epsilon_decay_fraction: f64,
    pub learning_rate: f64,
    /// Gradient updates between target-network syncs.
    pub target_sync: u64,
    pub step_cap: u32,
    /// Replay capacity in episodes.
    pub replay_capacity: usize,
    pub updates_per_episode: usize,
    pub reward_scale: f64,
    pub grad_clip: f64,
    pub csp: f64,
    pub seed: u64,
    /// Save checkpoints every this many episodes (0 disables).
    pub checkpoint_every: usize,
    pub checkpoint_dir: Option<PathBuf>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            team_size: 3,
            width: 20,
            height: 20,
            density_min: 0.3,
            density_max: 0.7,
            episodes: 1000,
            batch_size: 16,
            seq_len: 8,
            gamma: 1.0,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay_fraction: 0.5,
            learning_rate: 1e-3,
            target_sync: 200,
            step_cap: 300,
            replay_capacity: 2000,
            updates_per_episode: 1,
            reward_scale: 0.01,
            grad_clip: 10.0,
            csp: 1.0,
            seed: 0,
            checkpoint_every: 0,
            checkpoint_dir: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let fail = |m: &str| Err(TrainError::Config(m.to_string()));
        if self.team_size == 0 || self.team_size > 4 {
            return fail("team_size must be in 1..=4");
        }
        if self.width < 5 || self.height < 5 || self.width > 20 || self.height > 20 {
            return fail("grid sides must be in 5..=20");
        }
        if !(0.0..=0.8).contains(&self.density_min) || !(self.density_min..=0.8).contains(&self.density_max) {
            return fail("densities must satisfy 0 <= density_min <= density_max <= 0.8");
        }
        if self.batch_size == 0 || self.seq_len == 0 || self.target_sync == 0 || self.step_cap == 0 {
            return fail("batch_size, seq_len, target_sync and step_cap must be positive");
        }
        if self.replay_capacity == 0 {
            return fail("replay_capacity must be positive");
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return fail("gamma must be in (0, 1]");
        }
        if !(0.0 <= self.epsilon_end && self.epsilon_end <= self.epsilon_start && self.epsilon_start <= 1.0) {
            return fail("epsilon must satisfy 0 <= end <= start <= 1");
        }
        if !(0.0..=1.0).contains(&self.epsilon_decay_fraction) {
            return fail("epsilon_decay_fraction must be in [0, 1]");
        }
        if !(self.learning_rate > 0.0 && self.reward_scale > 0.0) {
            return fail("learning_rate and reward_scale must be positive");
        }
        if !(0.0..=1.0).contains(&self.csp) {
            return fail("csp must be in [0, 1]");
        }
        if self.checkpoint_every > 0 && self.checkpoint_dir.is_none() {
            return fail("checkpoint_every needs checkpoint_dir");
        }
        Ok(())
    }

    pub fn schedule(&self) -> EpsilonSchedule {
        let horizon = (self.episodes as f64 * self.epsilon_decay_fraction).round() as u64;
        EpsilonSchedule::new(self.epsilon_start, self.epsilon_end, horizon)
    }

    pub fn update_config(&self) -> UpdateConfig {
        UpdateConfig {
            gamma: self.gamma,
            reward_scale: self.reward_scale,
            grad_clip: self.grad_clip,
        }
    }

    pub fn world_config(&self) -> WorldConfig {
        WorldConfig {
            csp: self.csp,
            step_cap: self.step_cap,
            ..WorldConfig::default()
        }
    }
}

/// One row of the training log.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogRow {
    pub episode: usize,
    pub team_reward: f64,
    pub steps: u32,
    pub explored_cells: usize,
    pub epsilon: f64,
}

impl LogRow {
    fn new(episode: usize, m: &EpisodeMetrics, epsilon: f64) -> Self {
        Self {
            episode,
            team_reward: m.team_reward,
            steps: m.steps,
            explored_cells: m.explored_cells,
            epsilon,
        }
    }
}

pub fn write_training_log(path: &Path, rows: &[LogRow]) -> Result<(), TrainError> {
    let mut out = String::from("episode,team_reward,steps,explored_cells,epsilon\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{:.6}\n",
            r.episode, r.team_reward, r.steps, r.explored_cells, r.epsilon
        ));
    }
    let mut f = std::fs::File::create(path).map_err(|e| TrainError::io(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| TrainError::io(path, e))
}

/// Trained networks plus the per-episode log. `centralized` is absent for
/// decentralized-only training.
#[derive(Clone, Debug)]
pub struct TrainedPolicies {
    pub centralized: Option<DoubleQ<f32>>,
    pub decentralized: Vec<DoubleQ<f32>>,
    pub log: Vec<LogRow>,
    pub updates: u64,
}

impl TrainedPolicies {
    /// Writes `cep.madn` (when present) and `dep<i>.madn` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<Vec<PathBuf>, TrainError> {
        std::fs::create_dir_all(dir).map_err(|e| TrainError::io(dir, e))?;
        let mut written = Vec::new();
        if let Some(c) = &self.centralized {
            let path = dir.join("cep.madn");
            save_weights(&c.estimation, &path)?;
            written.push(path);
        }
        for (i, d) in self.decentralized.iter().enumerate() {
            let path = dir.join(dep_file_name(i));
            save_weights(&d.estimation, &path)?;
            written.push(path);
        }
        Ok(written)
    }
}

/// File name of robot `i`'s decentralized weights inside a policy directory.
pub fn dep_file_name(i: usize) -> String {
    format!("dep{i}.madn")
}

/// Networks as initialized from the config seed, before any training.
pub fn initial_networks(config: &TrainConfig) -> (DoubleQ<f32>, Vec<DoubleQ<f32>>) {
    let n = config.team_size;
    let mut rng = stream_rng(mix_seed(config.seed, 0xCE9), Stream::Policy);
    let cep = DoubleQ::new(DrqnNetwork::new(NetworkShape::centralized(n), &mut rng));
    let deps = (0..n)
        .map(|i| {
            let mut rng = stream_rng(mix_seed(config.seed, 0xDE9 + i as u64), Stream::Policy);
            DoubleQ::new(DrqnNetwork::new(NetworkShape::decentralized(n), &mut rng))
        })
        .collect();
    (cep, deps)
}

/// Training environments: a fresh random grid per episode with a density
/// drawn uniformly from the configured range.
pub fn random_environment(config: &TrainConfig, seed: u64) -> Result<GridEnvironment, GridError> {
    let mut rng = stream_rng(seed, Stream::Environment);
    let density = if config.density_max > config.density_min {
        rng.gen_range(config.density_min..=config.density_max)
    } else {
        config.density_min
    };
    GridEnvironment::generate(config.width, config.height, density, seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    Centralized,
    DecentralizedOnly,
}

/// Centralized-training loop: a centralized and a decentralized team explore
/// copies of the same environment each episode; the joint network learns from
/// team rewards and each robot network bootstraps from its component of the
/// joint argmax.
pub fn train(config: &TrainConfig) -> Result<TrainedPolicies, TrainError> {
    train_with(config, Mode::Centralized, &mut |seed| random_environment(config, seed))
}

/// Each robot network learns from its own double-Q target; no joint network.
pub fn train_decentralized_only(config: &TrainConfig) -> Result<TrainedPolicies, TrainError> {
    train_with(config, Mode::DecentralizedOnly, &mut |seed| random_environment(config, seed))
}

/// As [`train`] with caller-supplied environments.
pub fn train_on<F>(config: &TrainConfig, centralized: bool, envs: &mut F) -> Result<TrainedPolicies, TrainError>
where
    F: FnMut(u64) -> Result<GridEnvironment, GridError>,
{
    let mode = if centralized {
        Mode::Centralized
    } else {
        Mode::DecentralizedOnly
    };
    train_with(config, mode, envs)
}

fn sample_items<'a, R: Rng>(buffer: &'a ReplayBuffer, config: &TrainConfig, rng: &mut R) -> Vec<TdItem<'a>> {
    buffer
        .sample(config.batch_size, config.seq_len, rng)
        .iter()
        .map(TdItem::from_sample)
        .collect()
}

fn train_with<F>(config: &TrainConfig, mode: Mode, envs: &mut F) -> Result<TrainedPolicies, TrainError>
where
    F: FnMut(u64) -> Result<GridEnvironment, GridError>,
{
    config.validate()?;
    let n = config.team_size;
    let (mut cep, mut deps) = initial_networks(config);
    let mut cep_adam = Adam::new(&cep.estimation, config.learning_rate);
    let mut dep_adams: Vec<Adam<f32>> = deps.iter().map(|d| Adam::new(&d.estimation, config.learning_rate)).collect();
    let mut cen_buffer = ReplayBuffer::new(config.replay_capacity);
    let mut dec_buffers: Vec<ReplayBuffer> = (0..n).map(|_| ReplayBuffer::new(config.replay_capacity)).collect();
    let schedule = config.schedule();
    let update_cfg = config.update_config();
    let mut sample_rng = stream_rng(mix_seed(config.seed, 0x5A3), Stream::Policy);
    let mut log = Vec::with_capacity(config.episodes);
    let mut updates: u64 = 0;

    for episode in 0..config.episodes {
        let epsilon = schedule.epsilon(episode as u64);
        let ep_seed = mix_seed(config.seed, episode as u64);
        let env = envs(ep_seed)?;
        let spawns = env.random_spawn(n, &mut stream_rng(ep_seed, Stream::Spawn));
        let mut policy_rng = stream_rng(ep_seed, Stream::Policy);

        let mut dec_world = World::new(env.clone(), &spawns, config.world_config(), ep_seed);
        let dep_refs: Vec<&DrqnNetwork<f32>> = deps.iter().map(|d| &d.estimation).collect();
        let (dec_episodes, dec_metrics) = rollout_decentralized(
            &mut dec_world,
            &dep_refs,
            epsilon,
            mode == Mode::Centralized,
            &mut policy_rng,
        )?;
        for (buffer, ep) in dec_buffers.iter_mut().zip(dec_episodes) {
            buffer.push(ep);
        }
        if mode == Mode::Centralized {
            let mut cen_world = World::new(env, &spawns, config.world_config(), ep_seed);
            let (cen_episode, _) = rollout_centralized(&mut cen_world, &cep.estimation, epsilon, &mut policy_rng)?;
            cen_buffer.push(cen_episode);
        }

        for _ in 0..config.updates_per_episode {
            if dec_buffers.iter().any(ReplayBuffer::is_empty) {
                break;
            }
            if mode == Mode::Centralized && !cen_buffer.is_empty() {
                let batch = sample_items(&cen_buffer, config, &mut sample_rng);
                centralized_update(&mut cep, &mut cep_adam, &batch, &update_cfg)?;
            }
            for (i, (dep, adam)) in deps.iter_mut().zip(&mut dep_adams).enumerate() {
                let batch = sample_items(&dec_buffers[i], config, &mut sample_rng);
                let source = match mode {
                    Mode::Centralized => TargetSource::Centralized {
                        network: &cep.estimation,
                        robot: i,
                        team_size: n,
                    },
                    Mode::DecentralizedOnly => TargetSource::Own,
                };
                decentralized_update(dep, adam, &batch, source, &update_cfg)?;
            }
            updates += 1;
            if updates % config.target_sync == 0 {
                cep.sync_target();
                for d in &mut deps {
                    d.sync_target();
                }
            }
        }

        log.push(LogRow::new(episode, &dec_metrics, epsilon));
        if config.checkpoint_every > 0 && (episode + 1) % config.checkpoint_every == 0 {
            let dir = config.checkpoint_dir.as_ref().expect("validated");
            save_checkpoint(dir, episode + 1, (mode == Mode::Centralized).then_some(&cep), &deps)?;
        }
        log::debug!(
            "episode {episode}: reward {:.1} steps {} explored {} eps {epsilon:.3}",
            dec_metrics.team_reward,
            dec_metrics.steps,
            dec_metrics.explored_cells
        );
    }

    Ok(TrainedPolicies {
        centralized: (mode == Mode::Centralized).then_some(cep),
        decentralized: deps,
        log,
        updates,
    })
}

fn save_checkpoint(dir: &Path, episode: usize, cep: Option<&DoubleQ<f32>>, deps: &[DoubleQ<f32>]) -> Result<(), TrainError> {
    std::fs::create_dir_all(dir).map_err(|e| TrainError::io(dir, e))?;
    if let Some(c) = cep {
        save_weights(&c.estimation, &dir.join(format!("cep_ep{episode:06}.madn")))?;
    }
    for (i, d) in deps.iter().enumerate() {
        save_weights(&d.estimation, &dir.join(format!("dep{i}_ep{episode:06}.madn")))?;
    }
    Ok(())
}
