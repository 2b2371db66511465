//! Parallelism-independent seed derivation.

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for one replication, a pure function of its coordinates.
pub fn child_seed(master: u64, rank_idx: usize, prop_idx: usize, rep: usize) -> u64 {
    [rank_idx, prop_idx, rep]
        .iter()
        .fold(mix(master), |h, &k| mix(h ^ mix(k as u64)))
}
