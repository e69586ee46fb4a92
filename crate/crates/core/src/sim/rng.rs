use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent random streams derived from one seed, so each stochastic
/// subsystem can be pinned on its own.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    Environment = 0,
    Motion = 1,
    Sensing = 2,
    Link = 3,
    Policy = 4,
    Spawn = 5,
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// SplitMix64 finalizer, used to derive per-trial seeds from coordinates.
pub fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The per-episode simulation streams.
#[derive(Clone, Debug)]
pub struct SimRngs {
    pub motion: ChaCha8Rng,
    pub sensing: ChaCha8Rng,
    pub link: ChaCha8Rng,
}

impl SimRngs {
    pub fn new(seed: u64) -> Self {
        Self {
            motion: stream_rng(seed, Stream::Motion),
            sensing: stream_rng(seed, Stream::Sensing),
            link: stream_rng(seed, Stream::Link),
        }
    }
}
