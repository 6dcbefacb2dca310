//! Overflow-checked binomial coefficients and subset indexing.

/// `C(n, k)` as a `u64`, panicking loudly on overflow.
///
/// Returns 0 when `k > n`.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc
            .checked_mul((n - i) as u128)
            .expect("binomial overflow");
        acc /= (i + 1) as u128;
    }
    u64::try_from(acc).expect("binomial exceeds u64")
}

/// Position of `mask` (a p-subset of `0..g` as a bitmask) in the
/// lexicographic enumeration of sorted position tuples.
pub fn subset_rank(mask: u64) -> u64 {
    // Combinatorial number system: rank = sum C(c_i, i+1) over ascending
    // elements c_1 < c_2 < ... with 1-based slot i.
    let mut rank = 0u64;
    let mut slot = 1u64;
    let mut m = mask;
    while m != 0 {
        let c = m.trailing_zeros() as u64;
        rank += binomial(c, slot);
        slot += 1;
        m &= m - 1;
    }
    rank
}

/// Inverse of [`subset_rank`] for p-subsets of `0..g`.
pub fn subset_unrank(mut rank: u64, g: u32, p: u32) -> u64 {
    let mut mask = 0u64;
    let mut slot = p as u64;
    let mut c = g as u64;
    while slot > 0 {
        c -= 1;
        let b = binomial(c, slot);
        if b <= rank {
            rank -= b;
            mask |= 1u64 << c;
            slot -= 1;
        }
    }
    mask
}

/// Iterator over all p-subsets of `0..g` as bitmasks, in the order of
/// [`subset_rank`].
pub fn subsets(g: u32, p: u32) -> SubsetIter {
    assert!(g <= 63, "wedge generators limited to 63");
    let first = if p == 0 { 0 } else { (1u64 << p) - 1 };
    SubsetIter {
        next: Some(first),
        limit: 1u64 << g,
        p,
    }
}

pub struct SubsetIter {
    next: Option<u64>,
    limit: u64,
    p: u32,
}

impl Iterator for SubsetIter {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        let cur = self.next?;
        if cur >= self.limit {
            self.next = None;
            return None;
        }
        self.next = if self.p == 0 || cur == 0 {
            None
        } else {
            // Gosper's hack: next bitmask with the same popcount.
            let c = cur & cur.wrapping_neg();
            let r = cur + c;
            Some(r | (((r ^ cur) >> 2) / c))
        };
        Some(cur)
    }
}
