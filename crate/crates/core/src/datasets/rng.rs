//! Per-cell random streams.
//!
//! Every unit of generated work (a record slot, a verification sample) gets
//! its own generator derived from the master seed and the cell coordinates,
//! so results never depend on scheduling or worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for the cell at `coords` under `seed`.
pub fn cell_rng(seed: u64, coords: &[u64]) -> ChaCha8Rng {
    let mut h = splitmix(seed);
    for &c in coords {
        h = splitmix(h ^ splitmix(c.wrapping_add(0x5851_F42D_4C95_7F2D)));
    }
    ChaCha8Rng::seed_from_u64(h)
}

/// Stable 64-bit code for a label, used as a cell coordinate.
pub fn label(text: &str) -> u64 {
    // FNV-1a; only needs to be stable across platforms and releases.
    text.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}
