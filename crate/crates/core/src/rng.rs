//! Deterministic, splittable random streams.
//!
//! Every consumer of randomness derives its own generator from a root seed
//! and a path of tags (iteration, coordinate, shift sign, ...). Two streams
//! with different paths are statistically independent, and a stream depends
//! only on its path, never on the order in which streams are created.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator type handed to samplers.
pub type StreamRng = ChaCha8Rng;

/// A position in the stream tree: a root seed refined by a sequence of tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey(u64);

impl StreamKey {
    pub fn root(seed: u64) -> Self {
        StreamKey(splitmix64(seed ^ 0x5851_f42d_4c95_7f2d))
    }

    /// Child stream identified by `tag`.
    pub fn child(self, tag: u64) -> Self {
        StreamKey(splitmix64(self.0.rotate_left(17) ^ splitmix64(tag.wrapping_add(0x9e37_79b9_7f4a_7c15))))
    }

    pub fn path(self, tags: &[u64]) -> Self {
        tags.iter().fold(self, |k, &t| k.child(t))
    }

    pub fn rng(self) -> StreamRng {
        StreamRng::seed_from_u64(self.0)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
