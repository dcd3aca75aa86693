//! Seed derivation. Every stochastic stage derives its own stream from a
//! run seed plus a stream index, so streams never overlap and every
//! artifact is a pure function of (run_seed, position).

/// splitmix64 finalizer over the combined words.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distinct_streams_do_not_collide() {
        let mut seen = std::collections::HashSet::new();
        for base in 0..4u64 {
            for stream in 0..256u64 {
                assert!(seen.insert(derive_seed(base, stream)));
            }
        }
    }

    #[test]
    fn derivation_is_stable() {
        // Frozen value: changing the mixer silently would invalidate every
        // recorded manifest.
        assert_eq!(derive_seed(0, 0), 16294208416658607535);
        assert_eq!(derive_seed(42, 7), derive_seed(42, 7));
    }
}
