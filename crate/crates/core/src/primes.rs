//! Segmented sieve of Eratosthenes, deterministic Miller–Rabin and prime gaps.
//!
//! The sieve stores odd numbers only. Segments are independent, so counting
//! is spread across threads with rayon; every result is identical to the
//! sequential scan.

use bitvec::prelude::*;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Entries per sieving block.
pub const DEFAULT_SEGMENT_LEN: u64 = 1 << 20;
/// Largest range a single call may sieve.
pub const DEFAULT_MAX_RANGE: u64 = 1 << 36;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SieveConfig {
    pub segment_len: u64,
    pub max_range: u64,
}

impl Default for SieveConfig {
    fn default() -> Self {
        Self {
            segment_len: DEFAULT_SEGMENT_LEN,
            max_range: DEFAULT_MAX_RANGE,
        }
    }
}

impl SieveConfig {
    fn check(&self, lo: u64, hi: u64) -> Result<()> {
        if self.segment_len < 2 {
            return Err(Error::Invalid("segment length must be at least 2".into()));
        }
        let span = hi.saturating_sub(lo);
        if span > self.max_range {
            return Err(Error::RangeTooLarge {
                requested: span,
                budget: self.max_range,
            });
        }
        Ok(())
    }
}

// Witnesses 2..=37 are exact for every n < 3.3·10^24, which covers u64.
const MR_WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

#[inline]
fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic primality for the whole `u64` range.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_WITNESSES {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &MR_WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Smallest prime strictly greater than `n`, if one fits in `u64`.
pub fn next_prime(n: u64) -> Option<u64> {
    let mut c = n.checked_add(1)?;
    loop {
        if is_prime(c) {
            return Some(c);
        }
        c = c.checked_add(1)?;
    }
}

/// Largest prime strictly below `n`.
pub fn prev_prime(n: u64) -> Option<u64> {
    (2..n).rev().find(|&c| is_prime(c))
}

pub(crate) fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).is_none_or(|sq| sq > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= n) {
        r += 1;
    }
    r
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Brent's variant of Pollard rho; `n` must be an odd composite.
fn rho_split(n: u64) -> u64 {
    let mut seed = 1u64;
    loop {
        let f = |x: u64| ((x as u128 * x as u128 + seed as u128) % n as u128) as u64;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        let mut power = 1u64;
        let mut lam = 1u64;
        while d == 1 {
            if power == lam {
                x = y;
                power *= 2;
                lam = 0;
            }
            y = f(y);
            lam += 1;
            d = gcd_u64(x.abs_diff(y), n);
        }
        if d != n {
            return d;
        }
        seed += 1;
    }
}

/// Prime factorization with multiplicities, ascending.
pub fn prime_factors(n: u64) -> Vec<(u64, u32)> {
    let mut found = Vec::new();
    let mut m = n;
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        while m.is_multiple_of(p) && m > 1 {
            found.push(p);
            m /= p;
        }
    }
    let mut stack = vec![m];
    while let Some(c) = stack.pop() {
        if c == 1 {
            continue;
        }
        if is_prime(c) {
            found.push(c);
            continue;
        }
        let d = rho_split(c);
        stack.push(d);
        stack.push(c / d);
    }
    found.sort_unstable();
    let mut out: Vec<(u64, u32)> = Vec::new();
    for p in found {
        match out.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => out.push((p, 1)),
        }
    }
    out
}

/// Odd-only bit sieve for small bounds (base primes, partitions).
fn simple_sieve(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    // bit i stands for 2i + 3
    let len = ((n - 1) / 2) as usize;
    let mut odd = bitvec![1; len];
    let mut out = vec![2];
    for i in 0..len {
        if !odd[i] {
            continue;
        }
        let p = 2 * i as u64 + 3;
        out.push(p);
        let mut j = ((p * p - 3) / 2) as usize;
        while j < len {
            odd.set(j, false);
            j += p as usize;
        }
    }
    out
}

/// All primes `≤ n`.
pub fn primes_up_to(n: u64) -> Result<Vec<u64>> {
    if n < 2 {
        return Ok(Vec::new());
    }
    if n <= 1 << 22 {
        return Ok(simple_sieve(n));
    }
    let hi = n
        .checked_add(1)
        .ok_or_else(|| Error::Overflow("primes_up_to(u64::MAX)".into()))?;
    Ok(sieve_range(2, hi)?.primes().collect())
}

/// Odd-only primality flags for `[lo, hi)`. `flags[i]` describes
/// `first_odd(lo) + 2i`. `base` must hold every odd prime up to `√(hi−1)`.
fn sieve_odd_block(lo: u64, hi: u64, base: &[u64], flags: &mut Vec<bool>) -> u64 {
    let first = if lo % 2 == 1 { lo } else { lo + 1 };
    flags.clear();
    if first >= hi {
        return first;
    }
    let len = (hi - first).div_ceil(2) as usize;
    flags.resize(len, true);
    for &p in base {
        let sq = p * p;
        if sq >= hi {
            break;
        }
        let mut start = if sq >= first {
            sq
        } else {
            let rem = first % p;
            let m = if rem == 0 { first } else { first + (p - rem) };
            if m % 2 == 0 {
                m + p
            } else {
                m
            }
        };
        if start < sq {
            start = sq;
        }
        let mut idx = ((start - first) / 2) as usize;
        let step = p as usize;
        while idx < len {
            flags[idx] = false;
            idx += step;
        }
    }
    if first == 1 {
        flags[0] = false;
    }
    first
}

fn base_primes(hi: u64) -> Vec<u64> {
    // odd base primes up to √(hi − 1)
    simple_sieve(isqrt(hi.saturating_sub(1)))
        .into_iter()
        .filter(|&p| p > 2)
        .collect()
}

fn segment_bounds(lo: u64, hi: u64, seg: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut a = lo;
    while a < hi {
        let b = a.saturating_add(seg).min(hi);
        out.push((a, b));
        a = b;
    }
    out
}

/// Exact primality bits for `[lo, hi)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SieveSegment {
    pub lo: u64,
    pub hi: u64,
    pub bits: BitVec,
}

impl SieveSegment {
    pub fn contains(&self, n: u64) -> bool {
        n >= self.lo && n < self.hi
    }

    /// Panics if `n` is outside the segment.
    pub fn is_prime(&self, n: u64) -> bool {
        assert!(self.contains(n), "{n} outside [{}, {})", self.lo, self.hi);
        self.bits[(n - self.lo) as usize]
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.bits.iter_ones().map(move |i| self.lo + i as u64)
    }

    pub fn count(&self) -> u64 {
        self.bits.count_ones() as u64
    }
}

pub fn sieve_range(lo: u64, hi: u64) -> Result<SieveSegment> {
    sieve_range_with(lo, hi, &SieveConfig::default())
}

pub fn sieve_range_with(lo: u64, hi: u64, config: &SieveConfig) -> Result<SieveSegment> {
    if lo < 2 || hi <= lo {
        return Err(Error::Invalid(format!(
            "need 2 ≤ lo < hi, got [{lo}, {hi})"
        )));
    }
    config.check(lo, hi)?;
    let mut bits = bitvec![0; (hi - lo) as usize];
    if lo <= 2 && 2 < hi {
        bits.set((2 - lo) as usize, true);
    }
    let base = base_primes(hi);
    let mut flags = Vec::new();
    for (a, b) in segment_bounds(lo, hi, config.segment_len) {
        let first = sieve_odd_block(a, b, &base, &mut flags);
        for (i, &f) in flags.iter().enumerate() {
            if f {
                bits.set((first + 2 * i as u64 - lo) as usize, true);
            }
        }
    }
    Ok(SieveSegment { lo, hi, bits })
}

/// Streams the primes of `[lo, hi)` in ascending order, one block at a time.
pub fn for_each_prime<F: FnMut(u64)>(
    lo: u64,
    hi: u64,
    config: &SieveConfig,
    mut f: F,
) -> Result<()> {
    let lo = lo.max(2);
    if hi <= lo {
        return Ok(());
    }
    config.check(lo, hi)?;
    if lo <= 2 {
        f(2);
    }
    let base = base_primes(hi);
    let mut flags = Vec::new();
    for (a, b) in segment_bounds(lo, hi, config.segment_len) {
        let first = sieve_odd_block(a, b, &base, &mut flags);
        for (i, &is_p) in flags.iter().enumerate() {
            if is_p {
                f(first + 2 * i as u64);
            }
        }
    }
    Ok(())
}

/// π(x), counted segment by segment in parallel.
pub fn prime_count(x: u64) -> Result<u64> {
    prime_count_with(x, &SieveConfig::default())
}

pub fn prime_count_with(x: u64, config: &SieveConfig) -> Result<u64> {
    if x < 2 {
        return Ok(0);
    }
    let hi = x
        .checked_add(1)
        .ok_or_else(|| Error::Overflow("prime_count(u64::MAX)".into()))?;
    config.check(2, hi)?;
    if config.segment_len < 2 {
        return Err(Error::Invalid("segment length must be at least 2".into()));
    }
    let base = base_primes(hi);
    let odd = segment_bounds(3, hi, config.segment_len)
        .into_par_iter()
        .map_init(Vec::new, |flags, (a, b)| {
            sieve_odd_block(a, b, &base, flags);
            flags.iter().filter(|&&f| f).count() as u64
        })
        .sum::<u64>();
    Ok(odd + 1)
}

/// One gap `d = p' − p` between consecutive primes `p < p'`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GapSample {
    pub p: u64,
    pub d: u64,
    /// Ordinal `n` with `p = p_n`, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index_hint: Option<u64>,
}

impl GapSample {
    pub fn new(p: u64, d: u64) -> Self {
        Self {
            p,
            d,
            index_hint: None,
        }
    }

    pub fn next_prime(&self) -> u64 {
        self.p + self.d
    }
}

/// Gaps between consecutive primes that both lie in `[lo, hi]`.
pub fn gaps_in(lo: u64, hi: u64) -> Result<Vec<GapSample>> {
    if hi <= lo {
        return Err(Error::Invalid(format!("need lo < hi, got [{lo}, {hi}]")));
    }
    let end = hi
        .checked_add(1)
        .ok_or_else(|| Error::Overflow("gaps_in upper bound".into()))?;
    gaps_starting_in(lo, end, hi, &SieveConfig::default())
}

/// Gaps whose smaller prime lies in `[lo, hi)` and whose larger prime is at
/// most `end_limit`. The last gap is completed past `hi` by searching for the
/// next prime, so adjacent shards concatenate into the unsharded result.
pub fn gaps_starting_in(
    lo: u64,
    hi: u64,
    end_limit: u64,
    config: &SieveConfig,
) -> Result<Vec<GapSample>> {
    let mut out = Vec::new();
    let mut prev: Option<u64> = None;
    for_each_prime(lo, hi, config, |p| {
        if let Some(q) = prev {
            if p <= end_limit {
                out.push(GapSample::new(q, p - q));
            }
        }
        prev = Some(p);
    })?;
    if let Some(q) = prev {
        if let Some(next) = next_prime(q) {
            if next >= hi && next <= end_limit {
                out.push(GapSample::new(q, next - q));
            }
        }
    }
    Ok(out)
}

/// First-occurrence maximal gaps whose smaller prime is at most `limit`.
pub fn max_gap_records(limit: u64) -> Result<Vec<GapSample>> {
    max_gap_records_with(limit, &SieveConfig::default())
}

pub fn max_gap_records_with(limit: u64, config: &SieveConfig) -> Result<Vec<GapSample>> {
    if limit < 3 {
        return Err(Error::Invalid(format!(
            "limit must be at least 3, got {limit}"
        )));
    }
    let hi = limit
        .checked_add(1)
        .ok_or_else(|| Error::Overflow("max_gap_records limit".into()))?;
    let mut records: Vec<GapSample> = Vec::new();
    let mut best = 0;
    let mut prev: Option<(u64, u64)> = None;
    let mut ordinal = 0u64;
    let mut observe = |q: u64, n: u64, p: u64, records: &mut Vec<GapSample>| {
        if p - q > best {
            best = p - q;
            records.push(GapSample {
                p: q,
                d: p - q,
                index_hint: Some(n),
            });
        }
    };
    for_each_prime(2, hi, config, |p| {
        ordinal += 1;
        if let Some((q, n)) = prev {
            observe(q, n, p, &mut records);
        }
        prev = Some((p, ordinal));
    })?;
    if let Some((q, n)) = prev {
        let next = next_prime(q).ok_or_else(|| Error::Overflow("no prime above limit".into()))?;
        observe(q, n, next, &mut records);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn trial_division(n: u64) -> bool {
        if n < 2 {
            return false;
        }
        let mut d = 2;
        while d * d <= n {
            if n.is_multiple_of(d) {
                return false;
            }
            d += 1;
        }
        true
    }

    #[test]
    fn sieve_examples() {
        let s = sieve_range(2, 10).unwrap();
        assert_eq!(s.primes().collect::<Vec<_>>(), vec![2, 3, 5, 7]);
        let s = sieve_range(100, 130).unwrap();
        let oracle: Vec<u64> = (100..130).filter(|&n| trial_division(n)).collect();
        assert_eq!(oracle, vec![101, 103, 107, 109, 113, 127]);
        assert_eq!(s.primes().collect::<Vec<_>>(), oracle);
        assert_eq!(sieve_range(2, 1_000_001).unwrap().count(), 78_498);
    }

    #[test]
    fn sieve_rejects_bad_ranges() {
        assert!(sieve_range(1, 10).is_err());
        assert!(sieve_range(10, 10).is_err());
        let tight = SieveConfig {
            segment_len: 64,
            max_range: 100,
        };
        assert!(matches!(
            sieve_range_with(2, 1000, &tight),
            Err(Error::RangeTooLarge { .. })
        ));
    }

    #[test]
    fn sieve_bits_match_trial_division() {
        let s = sieve_range(2, 20_000).unwrap();
        for n in 2..20_000 {
            assert_eq!(s.is_prime(n), trial_division(n), "{n}");
        }
        let lo = 1_000_000_000;
        let s = sieve_range(lo, lo + 5000).unwrap();
        for n in lo..lo + 5000 {
            assert_eq!(s.is_prime(n), is_prime(n), "{n}");
        }
    }

    #[test]
    fn primality_examples() {
        assert!(!is_prime(0));
        assert!(!is_prime(1));
        assert!(is_prime(2));
        assert!(trial_division(492_227));
        assert!(is_prime(492_227));
        assert!(is_prime(18_446_744_073_709_551_557));
        assert!(!is_prime(18_446_744_073_709_551_615));
        // strong pseudoprime to bases 2..=31
        assert!(!is_prime(3_825_123_056_546_413_051));
        // Carmichael numbers
        for c in [561u64, 1105, 1729, 2465, 2821, 6601, 8911] {
            assert!(!is_prime(c));
        }
    }

    #[test]
    fn gap_examples() {
        let g: Vec<(u64, u64)> = gaps_in(2, 12).unwrap().iter().map(|g| (g.p, g.d)).collect();
        assert_eq!(g, vec![(2, 1), (3, 2), (5, 2), (7, 4)]);
        let g = gaps_in(100, 130).unwrap();
        let pairs: Vec<(u64, u64)> = g.iter().map(|g| (g.p, g.d)).collect();
        assert_eq!(
            pairs,
            vec![(101, 2), (103, 4), (107, 2), (109, 4), (113, 14)]
        );
        assert_eq!(g.iter().map(|g| g.d).sum::<u64>(), 127 - 101);
    }

    #[test]
    fn record_examples() {
        let r: Vec<(u64, u64)> = max_gap_records(10)
            .unwrap()
            .iter()
            .map(|g| (g.p, g.d))
            .collect();
        assert_eq!(r, vec![(2, 1), (3, 2), (7, 4)]);
        let r: Vec<(u64, u64)> = max_gap_records(1000)
            .unwrap()
            .iter()
            .map(|g| (g.p, g.d))
            .collect();
        assert_eq!(
            r,
            vec![
                (2, 1),
                (3, 2),
                (7, 4),
                (23, 6),
                (89, 8),
                (113, 14),
                (523, 18),
                (887, 20)
            ]
        );
        let r = max_gap_records(1_000_000).unwrap();
        let last = r.last().unwrap();
        assert_eq!((last.p, last.d), (492_113, 114));
        // p_1 = 2, p_2 = 3, p_4 = 7
        assert_eq!(r[2].index_hint, Some(4));
    }

    #[test]
    fn count_examples() {
        assert_eq!(prime_count(0).unwrap(), 0);
        assert_eq!(prime_count(1).unwrap(), 0);
        assert_eq!(prime_count(2).unwrap(), 1);
        assert_eq!(prime_count(100).unwrap(), 25);
        assert_eq!(prime_count(1_000_000).unwrap(), 78_498);
    }

    #[test]
    fn count_is_segment_size_independent() {
        for seg in [2, 3, 64, 1000, 1 << 16] {
            let config = SieveConfig {
                segment_len: seg,
                ..SieveConfig::default()
            };
            assert_eq!(
                prime_count_with(100_000, &config).unwrap(),
                9592,
                "seg {seg}"
            );
        }
    }

    #[test]
    fn factorization() {
        assert_eq!(prime_factors(1), vec![]);
        assert_eq!(prime_factors(48), vec![(2, 4), (3, 1)]);
        assert_eq!(prime_factors(4608), vec![(2, 9), (3, 2)]);
        let n = 1_000_000_007u64 * 998_244_353;
        assert_eq!(prime_factors(n), vec![(998_244_353, 1), (1_000_000_007, 1)]);
        assert_eq!(
            prime_factors(u64::MAX),
            vec![
                (3, 1),
                (5, 1),
                (17, 1),
                (257, 1),
                (641, 1),
                (65537, 1),
                (6_700_417, 1)
            ]
        );
    }

    #[test]
    fn neighbours() {
        assert_eq!(next_prime(0), Some(2));
        assert_eq!(next_prime(113), Some(127));
        assert_eq!(prev_prime(127), Some(113));
        assert_eq!(prev_prime(2), None);
        assert_eq!(next_prime(u64::MAX - 10), None);
    }

    proptest! {
        #[test]
        fn segmentation_independent(lo in 2u64..50_000, a in 1u64..5_000, b in 1u64..5_000, seg in 2u64..300) {
            let mid = lo + a;
            let hi = mid + b;
            let config = SieveConfig { segment_len: seg, ..SieveConfig::default() };
            let whole = sieve_range_with(lo, hi, &config).unwrap();
            let left = sieve_range(lo, mid).unwrap();
            let right = sieve_range(mid, hi).unwrap();
            let joined: Vec<u64> = left.primes().chain(right.primes()).collect();
            prop_assert_eq!(whole.primes().collect::<Vec<_>>(), joined);
            prop_assert_eq!(prime_count(hi - 1).unwrap(), sieve_range(2, hi).unwrap().count());
        }

        #[test]
        fn gaps_are_consecutive(lo in 2u64..100_000, span in 2u64..3000) {
            let hi = lo + span;
            let g = gaps_in(lo, hi).unwrap();
            for w in g.windows(2) {
                prop_assert_eq!(w[0].p + w[0].d, w[1].p);
            }
            for gap in &g {
                prop_assert!(is_prime(gap.p) && is_prime(gap.p + gap.d));
                prop_assert!((gap.p + 1..gap.p + gap.d).all(|n| !is_prime(n)));
                prop_assert!(gap.p >= lo && gap.p + gap.d <= hi);
            }
        }

        #[test]
        fn sharded_gaps_concatenate(lo in 2u64..50_000, a in 1u64..2000, b in 1u64..2000) {
            let mid = lo + a;
            let hi = mid + b;
            let config = SieveConfig::default();
            let mut joined = gaps_starting_in(lo, mid, hi, &config).unwrap();
            joined.extend(gaps_starting_in(mid, hi + 1, hi, &config).unwrap());
            prop_assert_eq!(joined, gaps_in(lo, hi).unwrap());
        }
    }
}
