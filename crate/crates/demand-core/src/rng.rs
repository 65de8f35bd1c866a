use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Domain separator so that independent stages (generation, query
/// assignment, training, ...) draw from unrelated streams even under the
/// same experiment seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamDomain {
    Generation,
    QueryAssignment,
    ModelInit,
    Shuffle,
    Custom(u64),
}

impl StreamDomain {
    fn tag(self) -> u64 {
        match self {
            StreamDomain::Generation => 1,
            StreamDomain::QueryAssignment => 2,
            StreamDomain::ModelInit => 3,
            StreamDomain::Shuffle => 4,
            StreamDomain::Custom(t) => 0x1000 + t,
        }
    }
}

/// Counter-based per-task stream: task `i` gets the same stream no matter
/// in which order (or on how many threads) tasks are generated.
pub fn task_rng(seed: u64, domain: StreamDomain, task_id: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&domain.tag().to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(task_id);
    rng
}
