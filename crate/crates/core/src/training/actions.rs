use rand::Rng;
use thiserror::Error;

use crate::mapping::CANDIDATES;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ActionError {
    #[error("macro index {index} for robot {robot} is outside 0..{CANDIDATES}")]
    MacroOutOfRange { robot: usize, index: usize },
    #[error("joint index {index} is outside 0..{limit}")]
    JointOutOfRange { index: usize, limit: usize },
}

pub fn joint_action_count(team_size: usize) -> usize {
    CANDIDATES.pow(team_size as u32)
}

/// Robot 0 is the most significant base-4 digit.
pub fn joint_action_encode(macros: &[usize]) -> Result<usize, ActionError> {
    macros.iter().enumerate().try_fold(0, |acc, (robot, &m)| {
        if m >= CANDIDATES {
            Err(ActionError::MacroOutOfRange { robot, index: m })
        } else {
            Ok(acc * CANDIDATES + m)
        }
    })
}

pub fn joint_action_decode(index: usize, team_size: usize) -> Result<Vec<usize>, ActionError> {
    let limit = joint_action_count(team_size);
    if index >= limit {
        return Err(ActionError::JointOutOfRange { index, limit });
    }
    let mut out = vec![0; team_size];
    let mut rest = index;
    for slot in out.iter_mut().rev() {
        *slot = rest % CANDIDATES;
        rest /= CANDIDATES;
    }
    Ok(out)
}

/// Component `robot` of a joint index.
pub fn joint_component(index: usize, team_size: usize, robot: usize) -> usize {
    (index / CANDIDATES.pow((team_size - 1 - robot) as u32)) % CANDIDATES
}

fn matches_locks(index: usize, locked: &[Option<usize>]) -> bool {
    let n = locked.len();
    locked
        .iter()
        .enumerate()
        .all(|(robot, lock)| lock.is_none_or(|m| joint_component(index, n, robot) == m))
}

/// Argmax over joint indices consistent with every locked robot's running
/// macro. Ties go to the smallest index.
pub fn constrained_joint_argmax<T: PartialOrd + Copy>(q: &[T], locked: &[Option<usize>]) -> usize {
    assert_eq!(q.len(), joint_action_count(locked.len()), "one Q-value per joint action");
    let mut best: Option<usize> = None;
    for (idx, &v) in q.iter().enumerate() {
        if !matches_locks(idx, locked) {
            continue;
        }
        if best.is_none_or(|b| v > q[b]) {
            best = Some(idx);
        }
    }
    best.expect("at least one joint index satisfies the locks")
}

pub fn argmax<T: PartialOrd + Copy>(q: &[T]) -> usize {
    let mut best = 0;
    for (i, &v) in q.iter().enumerate().skip(1) {
        if v > q[best] {
            best = i;
        }
    }
    best
}

/// Linear decay from `start` to `end` over `horizon` steps, then constant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub horizon: u64,
}

impl EpsilonSchedule {
    pub fn new(start: f64, end: f64, horizon: u64) -> Self {
        Self { start, end, horizon }
    }

    pub fn epsilon(&self, step: u64) -> f64 {
        if self.horizon == 0 || step >= self.horizon {
            return self.end;
        }
        let frac = step as f64 / self.horizon as f64;
        self.start + (self.end - self.start) * frac
    }
}

/// ε-greedy over a single robot's four macros.
pub fn epsilon_greedy<R: Rng>(q: &[f32], epsilon: f64, rng: &mut R) -> usize {
    if rng.gen_bool(epsilon.clamp(0.0, 1.0)) {
        rng.gen_range(0..q.len())
    } else {
        argmax(q)
    }
}

/// ε-greedy for the centralized team: exploration re-draws only the unlocked
/// components; exploitation takes the constrained argmax.
pub fn joint_epsilon_greedy<R: Rng>(q: &[f32], locked: &[Option<usize>], epsilon: f64, rng: &mut R) -> usize {
    if rng.gen_bool(epsilon.clamp(0.0, 1.0)) {
        let macros: Vec<usize> = locked
            .iter()
            .map(|lock| lock.unwrap_or_else(|| rng.gen_range(0..CANDIDATES)))
            .collect();
        joint_action_encode(&macros).expect("components in range")
    } else {
        constrained_joint_argmax(q, locked)
    }
}
