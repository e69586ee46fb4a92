use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use super::metrics::compute_ofv;
use super::output::{write_series_csv, write_timing_csv, write_trials_csv, MethodTiming};
use super::suite::load_env_suite;
use super::{ensure_dir, files, HarnessError, Method};
use crate::baselines::{classical_policy_step, PbParams, PlannerKind, UbParams};
use crate::nn::{load_weights, DrqnNetwork, NetworkShape};
use crate::sim::{mix_seed, stream_rng, GridEnvironment, Stream};
use crate::training::{argmax, dep_file_name, encode_individual};
use crate::world::{SeriesPoint, World, WorldConfig, STEP_CAP};

/// Everything an evaluation run needs besides the environments.
#[derive(Clone, Debug)]
pub struct EvalConfig {
    pub methods: Vec<Method>,
    pub suite_dir: PathBuf,
    /// Directories holding `dep<i>.madn` for the learned methods.
    pub made_net_weights: Option<PathBuf>,
    pub made_net_dt_weights: Option<PathBuf>,
    pub csps: Vec<f64>,
    pub corners: Vec<usize>,
    pub team_size: usize,
    pub step_cap: u32,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub ub: UbParams,
    pub pb: PbParams,
    /// Record per-trial wall-clock in trials.csv (breaks byte-identical reruns).
    pub wall_clock: bool,
    /// Worker threads; 0 uses the rayon default.
    pub threads: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            methods: vec![Method::Nf, Method::Ub, Method::Pb, Method::Random],
            suite_dir: PathBuf::from("envs"),
            made_net_weights: None,
            made_net_dt_weights: None,
            csps: vec![0.0, 0.5, 0.8, 1.0],
            corners: vec![0, 1, 2, 3],
            team_size: 3,
            step_cap: STEP_CAP,
            seed: 0,
            out_dir: PathBuf::from("eval"),
            ub: UbParams::default(),
            pb: PbParams::default(),
            wall_clock: false,
            threads: 0,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let fail = |m: String| Err(HarnessError::Config(m));
        if self.methods.is_empty() {
            return fail("no methods selected".into());
        }
        if self.csps.is_empty() || self.csps.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return fail(format!("csp list {:?} must be non-empty with values in [0, 1]", self.csps));
        }
        if self.corners.is_empty() || self.corners.iter().any(|&c| c > 3) {
            return fail(format!("corners {:?} must be non-empty with values in 0..=3", self.corners));
        }
        if self.team_size == 0 {
            return fail("team_size must be positive".into());
        }
        if self.step_cap == 0 {
            return fail("step_cap must be positive".into());
        }
        for m in &self.methods {
            let has = self.weights_for(*m).is_some();
            if m.is_learned() && !has {
                return fail(format!("method {m} needs a weights directory"));
            }
        }
        Ok(())
    }

    fn weights_for(&self, method: Method) -> Option<&Path> {
        match method {
            Method::MadeNet => self.made_net_weights.as_deref(),
            Method::MadeNetDt => self.made_net_dt_weights.as_deref(),
            _ => None,
        }
    }

    fn world_config(&self, csp: f64) -> WorldConfig {
        WorldConfig {
            csp,
            step_cap: self.step_cap,
            ..WorldConfig::default()
        }
    }
}

/// How a method chooses macros.
#[derive(Clone, Debug)]
pub enum Policy {
    /// One decentralized network per robot, greedy.
    Learned(Vec<DrqnNetwork<f32>>),
    Classical(PlannerKind),
    /// Uniform over the four goal candidates.
    Random,
}

impl Policy {
    /// Builds the policy for `method`, loading weights where needed.
    pub fn for_method(method: Method, config: &EvalConfig) -> Result<Self, HarnessError> {
        Ok(match method {
            Method::MadeNet | Method::MadeNetDt => {
                let dir = config
                    .weights_for(method)
                    .ok_or_else(|| HarnessError::Config(format!("method {method} needs a weights directory")))?;
                let expected = NetworkShape::decentralized(config.team_size);
                let nets = (0..config.team_size)
                    .map(|i| {
                        let path = dir.join(dep_file_name(i));
                        let net = load_weights(&path)?;
                        if net.shape() != expected {
                            return Err(HarnessError::Config(format!(
                                "{} has shape {:?}, expected {:?} for a team of {}",
                                path.display(),
                                net.shape(),
                                expected,
                                config.team_size
                            )));
                        }
                        Ok(net)
                    })
                    .collect::<Result<_, _>>()?;
                Policy::Learned(nets)
            }
            Method::Nf => Policy::Classical(PlannerKind::NearestFrontier),
            Method::Ub => Policy::Classical(PlannerKind::Utility(config.ub)),
            Method::Pb => Policy::Classical(PlannerKind::Probabilistic(config.pb)),
            Method::Random => Policy::Random,
        })
    }
}

/// One (method, environment, corner, CSP) cell of the protocol.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub method: Method,
    pub env: usize,
    pub corner: usize,
    pub csp: f64,
    pub steps: u32,
    pub distance_m: f64,
    pub interactions: u64,
    pub ofv: f64,
    pub completed: bool,
    pub wall_ms: u64,
    /// Cells that must be covered for completion.
    pub reachable: usize,
    pub series: Vec<SeriesPoint>,
}

/// Seed shared by every method in one protocol cell.
pub fn trial_seed(seed: u64, env: usize, corner: usize, csp: f64) -> u64 {
    mix_seed(mix_seed(mix_seed(seed, env as u64), corner as u64), csp.to_bits())
}

fn run_episode(policy: &Policy, world: &mut World, seed: u64) -> Result<(), HarnessError> {
    let n = world.team_size();
    match policy {
        Policy::Learned(nets) => {
            let mut hidden: Vec<_> = nets.iter().map(|net| net.zero_hidden()).collect();
            while !world.done() {
                for i in 0..n {
                    if world.needs_decision(i) {
                        let obs = encode_individual(&world.individual_observation(i))?;
                        let (q, h) = nets[i].forward(&obs.map_tensor(), &obs.scalars, &hidden[i])?;
                        hidden[i] = h;
                        world.assign_candidate(i, argmax(&q));
                    }
                }
                world.step();
            }
        }
        Policy::Classical(kind) => {
            while !world.done() {
                for i in 0..n {
                    if world.needs_decision(i) {
                        classical_policy_step(kind, world, i);
                    }
                }
                world.step();
            }
        }
        Policy::Random => {
            let mut rng = stream_rng(seed, Stream::Policy);
            while !world.done() {
                for i in 0..n {
                    if world.needs_decision(i) {
                        world.assign_candidate(i, rng.gen_range(0..crate::mapping::CANDIDATES));
                    }
                }
                world.step();
            }
        }
    }
    Ok(())
}

fn run_trial(
    method: Method,
    policy: &Policy,
    envs: &[GridEnvironment],
    (env, corner, csp): (usize, usize, f64),
    config: &EvalConfig,
) -> Result<TrialRecord, HarnessError> {
    let started = Instant::now();
    let grid = envs[env].clone();
    let spawns = grid.team_spawn(corner, config.team_size);
    if spawns.len() < config.team_size {
        return Err(HarnessError::Config(format!(
            "environment {env} has too few free cells for a team of {}",
            config.team_size
        )));
    }
    let seed = trial_seed(config.seed, env, corner, csp);
    let mut world = World::new(grid, &spawns, config.world_config(csp), seed);
    run_episode(policy, &mut world, seed)?;
    let series = world.series().to_vec();
    let explored: Vec<f64> = series.iter().map(|p| p.explored as f64).collect();
    let distance: Vec<f64> = series.iter().map(|p| p.distance_m).collect();
    Ok(TrialRecord {
        method,
        env,
        corner,
        csp,
        steps: world.t(),
        distance_m: world.distance_m(),
        interactions: world.interactions(),
        ofv: compute_ofv(&explored, &distance)?,
        completed: world.completed(),
        wall_ms: if config.wall_clock {
            started.elapsed().as_millis() as u64
        } else {
            0
        },
        reachable: world.reachable_free(),
        series,
    })
}

/// Runs every protocol cell for the given policies. Records come back
/// ordered by (method, env, corner, CSP) whatever the completion order.
pub fn run_trials_in_memory(
    envs: &[GridEnvironment],
    policies: &[(Method, Policy)],
    config: &EvalConfig,
) -> Result<(Vec<TrialRecord>, Vec<MethodTiming>), HarnessError> {
    config.validate()?;
    let cells: Vec<(usize, usize, f64)> = (0..envs.len())
        .flat_map(|e| {
            config
                .corners
                .iter()
                .flat_map(move |&c| config.csps.iter().map(move |&p| (e, c, p)))
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    let mut records = Vec::with_capacity(cells.len() * policies.len());
    let mut timing = Vec::with_capacity(policies.len());
    for (method, policy) in policies {
        let started = Instant::now();
        let batch: Vec<TrialRecord> = pool.install(|| {
            cells
                .par_iter()
                .map(|&cell| run_trial(*method, policy, envs, cell, config))
                .collect::<Result<_, _>>()
        })?;
        let total_ms = started.elapsed().as_secs_f64() * 1e3;
        log::info!("{method}: {} trials in {:.0} ms", batch.len(), total_ms);
        timing.push(MethodTiming {
            method: *method,
            trials: batch.len(),
            total_ms,
        });
        records.extend(batch);
    }
    Ok((records, timing))
}

/// Loads the suite and every policy (failing before any trial runs), runs
/// the protocol, and writes trials.csv, series.csv and timing.csv.
pub fn run_trials(config: &EvalConfig) -> Result<Vec<TrialRecord>, HarnessError> {
    config.validate()?;
    let envs = load_env_suite(&config.suite_dir)?;
    let policies = config
        .methods
        .iter()
        .map(|&m| Policy::for_method(m, config).map(|p| (m, p)))
        .collect::<Result<Vec<_>, _>>()?;
    let (records, timing) = run_trials_in_memory(&envs, &policies, config)?;
    let out = ensure_dir(&config.out_dir)?;
    write_trials_csv(&out.join(files::TRIALS), &records)?;
    write_series_csv(&out.join(files::SERIES), &records)?;
    write_timing_csv(&out.join(files::TIMING), &timing)?;
    Ok(records)
}
