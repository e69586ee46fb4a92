use rand::Rng;

/// Number of ticks a link stays silent after a failed exchange trial.
pub const DROPOUT_TICKS: u8 = 7;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinkStatus {
    Up,
    Down,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Link {
    pub status: LinkStatus,
    pub down_remaining: u8,
    in_range: bool,
}

impl Default for Link {
    fn default() -> Self {
        Self {
            status: LinkStatus::Up,
            down_remaining: 0,
            in_range: false,
        }
    }
}

impl Link {
    pub fn in_range(&self) -> bool {
        self.in_range
    }
}

/// Events produced by one [`CommLinks::tick`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TickReport {
    pub range_entries: usize,
    pub failures: usize,
    pub recoveries: usize,
}

/// Pairwise communication state for a team of `n` robots, one entry per
/// unordered pair `i < j`.
#[derive(Clone, Debug, PartialEq)]
pub struct CommLinks {
    team_size: usize,
    csp: f64,
    links: Vec<Link>,
}

impl CommLinks {
    pub fn new(team_size: usize, csp: f64) -> Self {
        assert!((0.0..=1.0).contains(&csp), "csp {csp} outside [0, 1]");
        Self {
            team_size,
            csp,
            links: vec![Link::default(); pair_count(team_size)],
        }
    }

    pub fn csp(&self) -> f64 {
        self.csp
    }

    pub fn team_size(&self) -> usize {
        self.team_size
    }

    pub fn pair_count(&self) -> usize {
        self.links.len()
    }

    pub fn link(&self, i: usize, j: usize) -> &Link {
        &self.links[pair_index(self.team_size, i, j)]
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    /// Information exchange is allowed only while in range with the link up.
    pub fn can_exchange(&self, i: usize, j: usize) -> bool {
        let link = self.link(i, j);
        link.in_range && link.status == LinkStatus::Up
    }

    /// Advances one timestep. Down links count down first (recovering at 0),
    /// then every pair that newly enters range while up runs a Bernoulli(csp)
    /// trial; a failure silences the link for [`DROPOUT_TICKS`] ticks.
    pub fn tick<R: Rng>(&mut self, pairwise_in_range: &[bool], rng: &mut R) -> TickReport {
        assert_eq!(pairwise_in_range.len(), self.links.len(), "one entry per robot pair");
        let mut report = TickReport::default();
        for (link, &now_in_range) in self.links.iter_mut().zip(pairwise_in_range) {
            if link.status == LinkStatus::Down {
                link.down_remaining -= 1;
                if link.down_remaining == 0 {
                    link.status = LinkStatus::Up;
                    report.recoveries += 1;
                }
            }
            let entered = now_in_range && !link.in_range;
            link.in_range = now_in_range;
            if entered && link.status == LinkStatus::Up {
                report.range_entries += 1;
                if !rng.gen_bool(self.csp) {
                    link.status = LinkStatus::Down;
                    link.down_remaining = DROPOUT_TICKS;
                    report.failures += 1;
                }
            }
        }
        report
    }
}

pub fn pair_count(team_size: usize) -> usize {
    team_size * team_size.saturating_sub(1) / 2
}

/// Index of the unordered pair `{i, j}` in row-major upper-triangle order.
pub fn pair_index(team_size: usize, i: usize, j: usize) -> usize {
    assert!(i != j && i < team_size && j < team_size, "bad pair ({i}, {j})");
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    a * (2 * team_size - a - 1) / 2 + (b - a - 1)
}

/// All pairs `(i, j)` with `i < j` in [`pair_index`] order.
pub fn pairs(team_size: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..team_size).flat_map(move |i| (i + 1..team_size).map(move |j| (i, j)))
}
