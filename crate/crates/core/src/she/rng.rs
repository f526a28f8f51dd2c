use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a random stream is used for. Different purposes never share draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    /// driving noise of the OU coefficients
    Noise,
    /// draws from the invariant law
    Invariant,
    /// random initial data
    Initial,
    /// choice of sample vertices
    Sampling,
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Noise => 1,
            Purpose::Invariant => 2,
            Purpose::Initial => 3,
            Purpose::Sampling => 4,
        }
    }
}

/// A seed plus a stream id; equal specs give identical draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngSpec {
    pub seed: u64,
    pub stream: u64,
}

impl RngSpec {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngSpec { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// Per-coefficient generators of one replica.
///
/// The ChaCha key is derived from `(seed, replica, purpose)` and mode `k`
/// reads stream `k`, so a coefficient's draws do not depend on how many
/// other modes are simulated.
#[derive(Debug, Clone)]
pub struct NoiseStreams {
    seed: u64,
    replica: u64,
    purpose: Purpose,
    base: ChaCha8Rng,
}

impl NoiseStreams {
    pub fn new(seed: u64, replica: u64, purpose: Purpose) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&replica.to_le_bytes());
        key[16..24].copy_from_slice(&purpose.tag().to_le_bytes());
        NoiseStreams {
            seed,
            replica,
            purpose,
            base: ChaCha8Rng::from_seed(key),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn replica(&self) -> u64 {
        self.replica
    }

    pub fn purpose(&self) -> Purpose {
        self.purpose
    }

    /// Generator for mode `k` (0-based), positioned at its start.
    pub fn mode(&self, k: usize) -> ChaCha8Rng {
        let mut rng = self.base.clone();
        rng.set_stream(k as u64);
        rng.set_word_pos(0);
        rng
    }
}
