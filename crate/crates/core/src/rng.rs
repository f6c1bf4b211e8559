//! Seeding contract.
//!
//! Every random quantity is drawn from a ChaCha8 stream identified by
//! `(seed, purpose, index)`: the key is derived from the user seed and a
//! purpose tag, and the ChaCha stream id is the trial index. Results are
//! therefore independent of how trials are scheduled across workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose tags, one per independent use of randomness.
pub mod purpose {
    pub const MATRIX: u64 = 0x6d61_7472;
    pub const CHI0: u64 = 0x6368_6930;
    pub const HOM: u64 = 0x686f_6d00;
    pub const BOOTSTRAP: u64 = 0x626f_6f74;
    pub const SHUFFLE: u64 = 0x7368_7566;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// The stream for trial `index` of the computation `purpose` under `seed`.
pub fn substream(seed: u64, purpose: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(purpose)));
    rng.set_stream(index);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_differ_and_repeat() {
        let a: u64 = substream(1, purpose::MATRIX, 0).random();
        let b: u64 = substream(1, purpose::MATRIX, 1).random();
        let c: u64 = substream(1, purpose::CHI0, 0).random();
        let d: u64 = substream(2, purpose::MATRIX, 0).random();
        assert!(a != b && a != c && a != d);
        assert_eq!(a, substream(1, purpose::MATRIX, 0).random::<u64>());
    }
}
