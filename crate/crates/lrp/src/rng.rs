//! Reproducible random streams.
//!
//! Every random decision in the crate is drawn from a stream derived from a
//! `(master seed, trial index, sub-stream tag)` triple. Derivation is a pure
//! integer function, and the stream cipher (ChaCha8) is bit-exact on every
//! platform, so a sample is fully determined by its parameters no matter how
//! work is scheduled across threads.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Identifies an independent sub-stream within one `(seed, trial)` context.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamTag {
    /// Long-edge decisions of the cycle samplers.
    CycleEdges,
    /// Long-edge decisions of the path sampler.
    PathEdges,
    /// Long-edge decisions of the box sampler.
    BoxEdges,
    /// Shared uniforms of the coupled sampler.
    CoupledPairs,
    /// Vertex-pair selection for resistance probes.
    ResistancePairs,
}

impl StreamTag {
    fn code(self) -> u64 {
        match self {
            StreamTag::CycleEdges => 1,
            StreamTag::PathEdges => 2,
            StreamTag::BoxEdges => 3,
            StreamTag::CoupledPairs => 4,
            StreamTag::ResistancePairs => 5,
        }
    }
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function: a bijective scramble of the state word.
#[inline]
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes three words into one key; order-sensitive, so `(a,b,c)` and shuffles
/// of it land in unrelated parts of the hash space.
#[inline]
pub fn mix3(a: u64, b: u64, c: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(a) ^ b) ^ c)
}

/// Derives the independent stream for `(master, trial, tag)`.
pub fn derive_stream(master: u64, trial: u64, tag: StreamTag) -> ChaCha8Rng {
    let key = mix3(master, trial, tag.code());
    let mut seed = [0u8; 32];
    let mut state = key;
    for chunk in seed.chunks_exact_mut(8) {
        state = state.wrapping_add(GOLDEN);
        chunk.copy_from_slice(&splitmix64(state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

/// Derivation key for per-pair hashed uniforms (coupled sampler).
pub fn pair_key(master: u64, trial: u64, tag: StreamTag) -> u64 {
    mix3(master, trial, tag.code())
}

/// Uniform in `[0, 1)` from the top 53 bits of a hash.
#[inline]
pub fn unit_from_hash(h: u64) -> f64 {
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// The shared uniform attached to the unordered pair `{x, y}` under `key`.
#[inline]
pub fn pair_uniform(key: u64, x: u32, y: u32) -> f64 {
    let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
    unit_from_hash(mix3(key, lo as u64, hi as u64))
}
