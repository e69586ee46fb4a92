use std::collections::VecDeque;

use rand::Rng;

use super::encoding::EncodedObs;

/// One macro-level experience: the observation at selection time, the chosen
/// macro (joint index for the team), and reward summed over its primitive steps.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub obs: EncodedObs,
    /// Joint observation at the same instant, kept for centralized targets.
    pub joint: Option<EncodedObs>,
    pub action: usize,
    pub reward: f64,
    pub duration: u32,
}

/// A complete episode of transitions. The next observation of transition `k`
/// is the observation of `k + 1`, or `final_obs` for the last one.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplayEpisode {
    pub transitions: Vec<Transition>,
    pub final_obs: EncodedObs,
    pub final_joint: Option<EncodedObs>,
    /// The episode reached full coverage; the last transition does not bootstrap.
    pub terminal: bool,
}

impl ReplayEpisode {
    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn obs(&self, k: usize) -> &EncodedObs {
        self.transitions.get(k).map_or(&self.final_obs, |t| &t.obs)
    }

    pub fn joint(&self, k: usize) -> Option<&EncodedObs> {
        match self.transitions.get(k) {
            Some(t) => t.joint.as_ref(),
            None => self.final_joint.as_ref(),
        }
    }

    pub fn total_reward(&self) -> f64 {
        self.transitions.iter().map(|t| t.reward).sum()
    }
}

/// A contiguous window `start..=end` of one episode; the loss is taken at `end`.
#[derive(Clone, Debug)]
pub struct SequenceSample<'a> {
    pub episode: &'a ReplayEpisode,
    pub start: usize,
    pub end: usize,
}

impl<'a> SequenceSample<'a> {
    /// Observations `start..=end + 1`, the last being the next observation.
    pub fn observations(&self) -> Vec<&'a EncodedObs> {
        (self.start..=self.end + 1).map(|k| self.episode.obs(k)).collect()
    }

    pub fn joint_observations(&self) -> Option<Vec<&'a EncodedObs>> {
        (self.start..=self.end + 1).map(|k| self.episode.joint(k)).collect()
    }

    pub fn last(&self) -> &'a Transition {
        &self.episode.transitions[self.end]
    }

    pub fn terminal(&self) -> bool {
        self.episode.terminal && self.end + 1 == self.episode.len()
    }
}

/// Ring of whole episodes.
#[derive(Clone, Debug)]
pub struct ReplayBuffer {
    capacity: usize,
    episodes: VecDeque<ReplayEpisode>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            capacity,
            episodes: VecDeque::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.episodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.episodes.is_empty()
    }

    pub fn transitions(&self) -> usize {
        self.episodes.iter().map(ReplayEpisode::len).sum()
    }

    pub fn episodes(&self) -> impl Iterator<Item = &ReplayEpisode> {
        self.episodes.iter()
    }

    /// Empty episodes carry nothing to learn from and are dropped.
    pub fn push(&mut self, episode: ReplayEpisode) {
        if episode.is_empty() {
            return;
        }
        if self.episodes.len() == self.capacity {
            self.episodes.pop_front();
        }
        self.episodes.push_back(episode);
    }

    /// Draws `batch` windows of at most `seq_len` transitions, each ending at
    /// a transition chosen uniformly over the whole buffer.
    pub fn sample<R: Rng>(&self, batch: usize, seq_len: usize, rng: &mut R) -> Vec<SequenceSample<'_>> {
        let total = self.transitions();
        if total == 0 {
            return Vec::new();
        }
        (0..batch)
            .map(|_| {
                let mut k = rng.gen_range(0..total);
                let mut it = self.episodes.iter();
                let episode = loop {
                    let e = it.next().expect("index within total");
                    if k < e.len() {
                        break e;
                    }
                    k -= e.len();
                };
                let start = (k + 1).saturating_sub(seq_len.max(1));
                SequenceSample { episode, start, end: k }
            })
            .collect()
    }
}
