//! Counter-based random streams: one independent ChaCha stream per
//! (seed, purpose, replicate, arm), so the draws a replicate sees never depend
//! on scheduling or on how many other replicates were run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What the draws are used for. Calibration and reporting runs with the same
/// user seed therefore use disjoint streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamPurpose {
    Calibration,
    Simulation,
    WeightCurve,
}

impl StreamPurpose {
    fn tag(self) -> u64 {
        match self {
            StreamPurpose::Calibration => 0x6361_6c69_6272_6174,
            StreamPurpose::Simulation => 0x7369_6d75_6c61_7465,
            StreamPurpose::WeightCurve => 0x6375_7276_6500_0000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Arm {
    Control = 0,
    Treatment = 1,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// The generator for one arm of one replicate.
pub fn replicate_rng(seed: u64, purpose: StreamPurpose, replicate: u64, arm: Arm) -> ChaCha8Rng {
    let mut state = seed ^ purpose.tag();
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream((replicate << 1) | arm as u64);
    rng
}
