//! Bit-string arithmetic, block partitioning, prime tables, and the
//! prime-product encoding Φ used by the reductions.
//!
//! Everything here is a pure function on immutable values. `BitString`
//! is most-significant-bit first throughout: with prefix-equal strings,
//! comparing the numeric values of two blocks is literally an integer
//! comparison at the first differing position, which is exactly what the
//! augmented-indexing decoding step relies on.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EncodingError {
    #[error("bit-string length {len} is not divisible into {blocks} equal blocks")]
    UnevenPartition { len: usize, blocks: usize },
    #[error("block count must be positive")]
    ZeroBlocks,
    #[error("invalid bit character {0:?} (expected '0' or '1')")]
    BadBitChar(char),
    #[error("prime-table bound {0} is degenerate (need M >= 2)")]
    DegenerateBound(u64),
    #[error("bit-string length {got} does not match prime-table size {expected}")]
    PhiLengthMismatch { got: usize, expected: usize },
    #[error("cannot factor zero")]
    FactorZero,
    #[error("residual factor {residual} of {input} lies outside the prime table")]
    ResidualFactor { input: u64, residual: u64 },
    #[error("gcd is undefined for zero inputs")]
    GcdZero,
}

/// A finite binary string, most-significant-bit first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    bits: Vec<bool>,
}

impl BitString {
    pub fn new(bits: Vec<bool>) -> Self {
        BitString { bits }
    }

    pub fn empty() -> Self {
        BitString { bits: Vec::new() }
    }

    /// Parses a string of '0'/'1' characters.
    pub fn parse(s: &str) -> Result<Self, EncodingError> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                other => return Err(EncodingError::BadBitChar(other)),
            }
        }
        Ok(BitString { bits })
    }

    /// The length-`len` binary expansion of `value`, MSB first.
    pub fn from_value(value: u64, len: usize) -> Self {
        assert!(len <= 63, "bit-string length {len} too large");
        assert!(
            len == 63 || value < (1u64 << len),
            "value {value} does not fit in {len} bits"
        );
        let bits = (0..len).map(|i| (value >> (len - 1 - i)) & 1 == 1).collect();
        BitString { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Bit at 1-based position `i` (position 1 is the most significant).
    pub fn bit(&self, i: usize) -> bool {
        assert!(i >= 1 && i <= self.bits.len(), "bit index {i} out of range");
        self.bits[i - 1]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Numeric value Σ xᵢ·2^(L−i), MSB first.
    pub fn val(&self) -> u64 {
        assert!(self.bits.len() <= 63, "bit string too long for u64 value");
        self.bits.iter().fold(0, |acc, &b| (acc << 1) | b as u64)
    }

    /// Splits into `blocks` contiguous equal-length pieces, in order.
    pub fn partition_blocks(&self, blocks: usize) -> Result<Vec<BitString>, EncodingError> {
        if blocks == 0 {
            return Err(EncodingError::ZeroBlocks);
        }
        if !self.bits.len().is_multiple_of(blocks) {
            return Err(EncodingError::UnevenPartition {
                len: self.bits.len(),
                blocks,
            });
        }
        let w = self.bits.len() / blocks;
        if w == 0 {
            return Ok(vec![BitString::empty(); blocks]);
        }
        Ok(self
            .bits
            .chunks(w)
            .map(|c| BitString { bits: c.to_vec() })
            .collect())
    }

    pub fn concat(parts: &[BitString]) -> BitString {
        let mut bits = Vec::new();
        for p in parts {
            bits.extend_from_slice(&p.bits);
        }
        BitString { bits }
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// The first k primes together with the bound that made k maximal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeTable {
    primes: Vec<u64>,
    bound: u64,
}

impl PrimeTable {
    /// Maximal table of first primes whose product stays within `bound`.
    pub fn first_primes_with_product_bound(bound: u64) -> Result<Self, EncodingError> {
        if bound < 2 {
            return Err(EncodingError::DegenerateBound(bound));
        }
        let mut primes = Vec::new();
        let mut product: u64 = 1;
        let mut candidate = 2u64;
        loop {
            let p = next_prime_from(candidate);
            match product.checked_mul(p) {
                Some(next) if next <= bound => {
                    primes.push(p);
                    product = next;
                    candidate = p + 1;
                }
                _ => break,
            }
        }
        Ok(PrimeTable { primes, bound })
    }

    /// The first `k` primes; the bound is set to their exact product.
    pub fn first_k(k: usize) -> Self {
        let mut primes = Vec::with_capacity(k);
        let mut candidate = 2u64;
        let mut product = 1u64;
        while primes.len() < k {
            let p = next_prime_from(candidate);
            product = product.checked_mul(p).expect("prime product overflow");
            primes.push(p);
            candidate = p + 1;
        }
        PrimeTable { primes, bound: product }
    }

    pub fn k(&self) -> usize {
        self.primes.len()
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn product(&self) -> u64 {
        self.primes.iter().product()
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn next_prime_from(start: u64) -> u64 {
    let mut n = start.max(2);
    while !is_prime(n) {
        n += 1;
    }
    n
}

/// All primes ≤ `limit`, ascending (sieve of Eratosthenes).
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2usize;
    while i * i <= n {
        if sieve[i] {
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    sieve
        .iter()
        .enumerate()
        .filter_map(|(i, &p)| p.then_some(i as u64))
        .collect()
}

/// Φ(x) = ∏ over set bits of the corresponding table primes.
///
/// Callers must size the table so the products fit their geometric
/// instance; `phi` itself does not clamp.
pub fn phi(x: &BitString, pt: &PrimeTable) -> Result<u64, EncodingError> {
    if x.len() != pt.k() {
        return Err(EncodingError::PhiLengthMismatch {
            got: x.len(),
            expected: pt.k(),
        });
    }
    let mut product = 1u64;
    for (i, p) in pt.primes().iter().enumerate() {
        if x.bit(i + 1) {
            product = product.checked_mul(*p).expect("phi overflow");
        }
    }
    Ok(product)
}

/// Exact prime factorization restricted to a known prime list.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FactorSupport {
    entries: BTreeMap<u64, u32>,
}

impl FactorSupport {
    pub fn entries(&self) -> impl Iterator<Item = (u64, u32)> + '_ {
        self.entries.iter().map(|(&p, &a)| (p, a))
    }

    /// The primes with positive exponent, ascending.
    pub fn support(&self) -> impl Iterator<Item = u64> + '_ {
        self.entries.keys().copied()
    }

    pub fn exponent(&self, p: u64) -> u32 {
        self.entries.get(&p).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// ∏ p^α over the entries.
    pub fn product(&self) -> u64 {
        self.entries
            .iter()
            .fold(1u64, |acc, (&p, &a)| acc * p.pow(a))
    }
}

/// Factors `a` over the table's primes; any residual factor is an error.
pub fn factor_support(a: u64, pt: &PrimeTable) -> Result<FactorSupport, EncodingError> {
    factor_over_primes(a, pt.primes())
}

/// Factors `a` over an explicit ascending prime list.
pub fn factor_over_primes(a: u64, primes: &[u64]) -> Result<FactorSupport, EncodingError> {
    if a == 0 {
        return Err(EncodingError::FactorZero);
    }
    let mut entries = BTreeMap::new();
    let mut rest = a;
    for &p in primes {
        if rest == 1 {
            break;
        }
        let mut alpha = 0u32;
        while rest.is_multiple_of(p) {
            rest /= p;
            alpha += 1;
        }
        if alpha > 0 {
            entries.insert(p, alpha);
        }
    }
    if rest != 1 {
        return Err(EncodingError::ResidualFactor { input: a, residual: rest });
    }
    Ok(FactorSupport { entries })
}

/// Euclid's algorithm; the trusted oracle the protocol gcd is checked against.
pub fn gcd(a: u64, b: u64) -> Result<u64, EncodingError> {
    if a == 0 || b == 0 {
        return Err(EncodingError::GcdZero);
    }
    let (mut x, mut y) = (a, b);
    while y != 0 {
        (x, y) = (y, x % y);
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bs(s: &str) -> BitString {
        BitString::parse(s).unwrap()
    }

    #[test]
    fn val_msb_first() {
        assert_eq!(BitString::empty().val(), 0);
        assert_eq!(bs("101").val(), 5);
        assert_eq!(bs("0011").val(), 3);
    }

    #[test]
    fn from_value_round_trip() {
        for len in 0..10usize {
            for v in 0..(1u64 << len) {
                let x = BitString::from_value(v, len);
                assert_eq!(x.len(), len);
                assert_eq!(x.val(), v);
            }
        }
    }

    #[test]
    fn partition_contiguous_blocks() {
        assert_eq!(bs("1001").partition_blocks(2).unwrap(), vec![bs("10"), bs("01")]);
        assert_eq!(
            bs("110011").partition_blocks(3).unwrap(),
            vec![bs("11"), bs("00"), bs("11")]
        );
        assert_eq!(bs("10").partition_blocks(1).unwrap(), vec![bs("10")]);
        assert_eq!(
            bs("101").partition_blocks(2),
            Err(EncodingError::UnevenPartition { len: 3, blocks: 2 })
        );
        assert_eq!(bs("101").partition_blocks(0), Err(EncodingError::ZeroBlocks));
    }

    #[test]
    fn prime_table_examples() {
        let pt = PrimeTable::first_primes_with_product_bound(16).unwrap();
        assert_eq!(pt.primes(), &[2, 3]);
        let pt = PrimeTable::first_primes_with_product_bound(1000).unwrap();
        assert_eq!(pt.primes(), &[2, 3, 5, 7]);
        let pt = PrimeTable::first_primes_with_product_bound(2).unwrap();
        assert_eq!(pt.primes(), &[2]);
        assert_eq!(
            PrimeTable::first_primes_with_product_bound(1),
            Err(EncodingError::DegenerateBound(1))
        );
    }

    #[test]
    fn phi_examples() {
        let pt = PrimeTable::first_k(3);
        assert_eq!(phi(&bs("000"), &pt).unwrap(), 1);
        assert_eq!(phi(&bs("101"), &pt).unwrap(), 10);
        let pt2 = PrimeTable::first_k(2);
        assert_eq!(phi(&bs("11"), &pt2).unwrap(), 6);
        assert!(matches!(
            phi(&bs("1"), &pt2),
            Err(EncodingError::PhiLengthMismatch { .. })
        ));
    }

    #[test]
    fn phi_injective_small_k() {
        for k in 1..=8usize {
            let pt = PrimeTable::first_k(k);
            let mut seen = std::collections::HashSet::new();
            for v in 0..(1u64 << k) {
                let value = phi(&BitString::from_value(v, k), &pt).unwrap();
                assert!(seen.insert(value), "phi collision at k={k}, v={v}");
            }
        }
    }

    #[test]
    fn subset_iff_divides() {
        for k in 1..=8usize {
            let pt = PrimeTable::first_k(k);
            for x in 0..(1u64 << k) {
                let px = phi(&BitString::from_value(x, k), &pt).unwrap();
                for y in 0..(1u64 << k) {
                    let py = phi(&BitString::from_value(y, k), &pt).unwrap();
                    let subset = x & !y == 0;
                    assert_eq!(subset, py.is_multiple_of(px), "k={k} x={x:b} y={y:b}");
                }
            }
        }
    }

    #[test]
    fn factor_support_examples() {
        let pt = PrimeTable::first_primes_with_product_bound(10_000).unwrap();
        let f = factor_support(12, &pt).unwrap();
        assert_eq!(f.entries().collect::<Vec<_>>(), vec![(2, 2), (3, 1)]);
        assert!(factor_support(1, &pt).unwrap().is_empty());
        let f = factor_support(60, &pt).unwrap();
        assert_eq!(f.entries().collect::<Vec<_>>(), vec![(2, 2), (3, 1), (5, 1)]);
        assert_eq!(factor_support(0, &pt), Err(EncodingError::FactorZero));
        // 13 is outside the table {2,3,5,7}.
        assert!(matches!(
            factor_support(13, &pt),
            Err(EncodingError::ResidualFactor { residual: 13, .. })
        ));
    }

    #[test]
    fn factor_support_round_trip() {
        let primes = primes_up_to(10_000);
        for a in 1u64..=10_000 {
            let f = factor_over_primes(a, &primes).unwrap();
            assert_eq!(f.product(), a);
        }
    }

    #[test]
    fn gcd_examples() {
        assert_eq!(gcd(12, 18), Ok(6));
        assert_eq!(gcd(7, 7), Ok(7));
        assert_eq!(gcd(1, 999), Ok(1));
        assert_eq!(gcd(0, 3), Err(EncodingError::GcdZero));
    }

    #[test]
    fn sieve_matches_trial_division() {
        let sieved = primes_up_to(500);
        let trial: Vec<u64> = (2..=500).filter(|&n| is_prime(n)).collect();
        assert_eq!(sieved, trial);
    }

    proptest! {
        #[test]
        fn partition_concat_round_trip(len in 0usize..=12, raw in any::<u64>()) {
            let mask = if len == 0 { 0 } else { (1u64 << len) - 1 };
            let x = BitString::from_value(raw & mask, len);
            for d in 1..=len.max(1) {
                if len % d == 0 {
                    let parts = x.partition_blocks(d).unwrap();
                    prop_assert_eq!(parts.len(), d);
                    prop_assert_eq!(BitString::concat(&parts), x.clone());
                    prop_assert_eq!(BitString::concat(&parts).val(), x.val());
                }
            }
        }

        #[test]
        fn prime_table_maximality(bound in 2u64..=1_000_000_000) {
            let pt = PrimeTable::first_primes_with_product_bound(bound).unwrap();
            let product = pt.product();
            prop_assert!(product <= bound);
            let next = next_prime_from(pt.primes().last().map_or(2, |p| p + 1));
            prop_assert!(product.checked_mul(next).is_none_or(|v| v > bound));
        }
    }
}
