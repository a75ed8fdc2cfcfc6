//! Fixed-size subset enumeration over bit masks and exact binomials.

/// Binomial coefficient in 128-bit arithmetic; zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // exact at every step: acc * (n - i) is divisible by (i + 1)
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// All `size`-element subsets of `{0..n}` as masks, in increasing mask order
/// (Gosper's hack). Yields the empty mask once when `size == 0`.
pub fn masks_of_size(n: usize, size: usize) -> impl Iterator<Item = u64> {
    assert!(n <= 63, "subset universe too large");
    let limit = 1u64 << n;
    let first = if size > n { limit } else { (1u64 << size) - 1 };
    let mut next = Some(first).filter(|&m| m < limit);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 {
            None
        } else {
            let low = cur & cur.wrapping_neg();
            let ripple = cur + low;
            let succ = (((ripple ^ cur) >> 2) / low) | ripple;
            Some(succ).filter(|&m| m < limit)
        };
        Some(cur)
    })
}

/// Indices of the set bits of `mask`.
pub fn mask_to_indices(mask: u64) -> Vec<usize> {
    (0..64).filter(|i| mask >> i & 1 == 1).collect()
}
