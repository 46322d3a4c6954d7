//! Counter-based randomness.
//!
//! Every random draw used by the parallel algorithms is a pure function of a
//! seed and a key, so results do not depend on evaluation order or on the
//! number of worker threads.

#[inline]
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Mixes a seed with a sequence of keys.
#[inline]
pub fn hash_keys(seed: u64, keys: &[u64]) -> u64 {
    let mut h = splitmix64(seed ^ 0x6A09_E667_F3BC_C909);
    for &k in keys {
        h = splitmix64(h ^ k);
    }
    h
}

/// Uniform value in `[0, 1)` with 53 random bits.
#[inline]
pub fn unit_f64(h: u64) -> f64 {
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Domain separators so different consumers of one seed never share streams.
pub mod domain {
    pub const TRIANGLE_PRIORITY: u64 = 0x7472_6961;
    pub const VERTEX_PRIORITY: u64 = 0x7069_766F;
    pub const EDGE_COIN: u64 = 0x636F_696E;
    pub const SOLVER_ITERATION: u64 = 0x6974_6572;
    pub const REDUCTION: u64 = 0x7265_6475;
}
