//! Key arrays, deterministic input generation and output verification.

use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A sort key. Keys are unsigned 32-bit integers.
pub type Key = u32;

/// Generates `n` keys uniform over the full 32-bit range.
///
/// The generator is ChaCha8 seeded through `seed_from_u64`, which is stable
/// across platforms and crate versions, so a given `(n, seed)` pair always
/// yields the same array.
pub fn generate_uniform_keys(n: usize, seed: u64) -> Vec<Key> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.next_u32()).collect()
}

/// Derives the seed used for repetition `rep` of an experiment seeded with `seed`.
pub fn derive_seed(seed: u64, rep: u64) -> u64 {
    // splitmix64 finalizer over the combined value
    let mut z = seed ^ rep.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Returns true iff `output` is non-decreasing and a multiset permutation of `input`.
///
/// The permutation check sorts a copy of `input` with the standard library's
/// comparison sort, independent of every sorting routine in this crate.
pub fn verify_sorted_permutation(input: &[Key], output: &[Key]) -> bool {
    if input.len() != output.len() {
        return false;
    }
    if !is_sorted(output) {
        return false;
    }
    let mut expected = input.to_vec();
    expected.sort_unstable();
    expected == output
}

pub fn is_sorted(keys: &[Key]) -> bool {
    keys.windows(2).all(|w| w[0] <= w[1])
}

/// Splits `keys` into `p` contiguous blocks; the first `n mod p` blocks get one extra key.
pub fn balanced_blocks(keys: &[Key], p: usize) -> Vec<Vec<Key>> {
    assert!(p >= 1, "block count must be positive");
    let mut blocks = Vec::with_capacity(p);
    let mut start = 0;
    for w in 0..p {
        let len = balanced_len(keys.len(), p, w);
        blocks.push(keys[start..start + len].to_vec());
        start += len;
    }
    blocks
}

/// Length of block `w` when `n` keys are cut into `p` balanced contiguous blocks.
pub fn balanced_len(n: usize, p: usize, w: usize) -> usize {
    n / p + usize::from(w < n % p)
}

/// Index of the block that holds global position `pos` under [`balanced_len`].
pub fn balanced_owner(n: usize, p: usize, pos: usize) -> usize {
    debug_assert!(pos < n);
    let q = n / p;
    let rem = n % p;
    let big = rem * (q + 1);
    if pos < big {
        pos / (q + 1)
    } else {
        rem + (pos - big) / q
    }
}
