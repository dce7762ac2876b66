//! Seeded random sources and deterministic seed derivation.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use sha2::{Digest, Sha256};

/// Random source owned by exactly one run. The generator is fixed (not
/// `StdRng`) so traces stay reproducible across dependency upgrades.
pub type LabRng = Xoshiro256PlusPlus;

pub fn rng_from_seed(seed: u64) -> LabRng {
    LabRng::seed_from_u64(seed)
}

/// Hashes an ordered tuple of integers into a 64-bit seed.
///
/// Used for every sub-stream in the crate: (base, n, seed index) for sweep
/// cells, (seed, trial block) for lemma trials, (seed, process id) for the
/// restart scheduler.
pub fn derive_seed(parts: &[u64]) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(b"cga-lab/seed/v1");
    for p in parts {
        hasher.update(p.to_le_bytes());
    }
    let digest = hasher.finalize();
    let mut word = [0u8; 8];
    word.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(word)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn derivation_is_pure_and_order_sensitive() {
        assert_eq!(derive_seed(&[1, 2, 3]), derive_seed(&[1, 2, 3]));
        assert_ne!(derive_seed(&[1, 2, 3]), derive_seed(&[3, 2, 1]));
        assert_ne!(derive_seed(&[1, 2]), derive_seed(&[1, 2, 0]));
    }

    #[test]
    fn same_seed_same_stream() {
        let mut a = rng_from_seed(42);
        let mut b = rng_from_seed(42);
        for _ in 0..16 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }
}
