//! Deterministic seed derivation.

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from a parent seed and a counter. The map is fixed:
/// `splitmix64(parent ^ splitmix64(counter))`.
pub fn mix_seed(parent: u64, counter: u64) -> u64 {
    splitmix64(parent ^ splitmix64(counter))
}
