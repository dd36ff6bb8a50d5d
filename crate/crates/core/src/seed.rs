//! Counter-based seed derivation.
//!
//! Every random stream in an experiment is keyed by
//! `(master_seed, role, k, placement, run)` and gets its own generator, so
//! the streams are independent of each other and of execution order.

/// Which part of an experiment a stream feeds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamRole {
    Placement = 1,
    Run = 2,
}

// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, role: StreamRole, k: u64, placement: u64, run: u64) -> u64 {
    [role as u64, k, placement, run]
        .into_iter()
        .fold(mix(master), |acc, word| mix(acc ^ mix(word)))
}
