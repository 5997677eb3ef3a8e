//! Two-party protocol runtime with exact bit accounting, plus the
//! concrete protocols: trivial full disclosure, sparse set
//! intersection by shared-randomness fingerprinting, factor-based gcd,
//! per-grid line disjointness, and majority amplification.
//!
//! Information-flow discipline is structural: every protocol is written
//! as a sequence of party-local steps that read only that party's
//! input, the shared randomness stream, and previously sent messages.
//! Both parties advance the same deterministic randomness stream, so a
//! replay with equal inputs and seed is transcript-identical bit for
//! bit.
//!
//! Widths of every field are derived from public parameters (or from
//! values already on the wire), never from the other party's private
//! input, so each message is parseable by its receiver.

use std::collections::{BTreeMap, BTreeSet};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::encoding::{factor_over_primes, primes_up_to, FactorSupport};
use crate::setsystems::{GridInstance, InstanceTag, LineFamilySet, LineKind};
use crate::vcdim::ceil_log2;

#[derive(Debug, Error, PartialEq)]
pub enum ProtocolError {
    #[error("input {value} outside [{lo}, {hi}]")]
    InputOutOfRange { value: u64, lo: u64, hi: u64 },
    #[error("error budget {0} outside (0, 1)")]
    BadDelta(f64),
    #[error("error bound {0} outside (0, 1)")]
    BadErrorBound(f64),
    #[error("family is empty")]
    EmptyFamily,
    #[error("Alice's member is not in the protocol's family")]
    MemberNotInFamily,
    #[error("inputs come from different instances")]
    InstanceMismatch,
    #[error("expected a {expected:?}-kind member")]
    WrongKind { expected: LineKind },
    #[error("set element {0} outside the universe")]
    ElementOutsideUniverse(u64),
    #[error("set of {got} elements exceeds the public size bound {bound}")]
    SetTooLarge { got: usize, bound: u64 },
    #[error(transparent)]
    Encoding(#[from] crate::encoding::EncodingError),
    #[error(transparent)]
    SetSystem(#[from] crate::setsystems::SetSystemError),
}

// ---------------------------------------------------------------------------
// Transcript and randomness
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Party {
    Alice,
    Bob,
}

impl std::fmt::Display for Party {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Party::Alice => "alice",
            Party::Bob => "bob",
        })
    }
}

/// One message: sender plus raw payload bits (may be empty).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub sender: Party,
    pub bits: Vec<bool>,
}

impl Message {
    /// Payload as hex, most-significant bit of each byte first;
    /// the final partial byte is zero-padded on the right.
    pub fn payload_hex(&self) -> String {
        let mut out = String::new();
        for chunk in self.bits.chunks(8) {
            let mut byte = 0u8;
            for (i, &b) in chunk.iter().enumerate() {
                if b {
                    byte |= 1 << (7 - i);
                }
            }
            out.push_str(&format!("{byte:02x}"));
        }
        out
    }
}

/// Ordered message log with exact bit totals.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Transcript {
    messages: Vec<Message>,
}

impl Transcript {
    pub fn new() -> Self {
        Transcript::default()
    }

    pub fn send(&mut self, sender: Party, bits: Vec<bool>) {
        self.messages.push(Message { sender, bits });
    }

    pub fn messages(&self) -> &[Message] {
        &self.messages
    }

    pub fn total_bits(&self) -> u64 {
        self.messages.iter().map(|m| m.bits.len() as u64).sum()
    }

    /// Number of maximal same-sender runs (1 for a one-way protocol).
    pub fn rounds(&self) -> u64 {
        let mut rounds = 0;
        let mut last: Option<Party> = None;
        for m in &self.messages {
            if last != Some(m.sender) {
                rounds += 1;
                last = Some(m.sender);
            }
        }
        rounds
    }

    /// Appends all of `other`'s messages.
    pub fn extend_from(&mut self, other: Transcript) {
        self.messages.extend(other.messages);
    }
}

/// A deterministic public coin stream both parties read in lockstep.
#[derive(Debug, Clone)]
pub struct SharedRandomness {
    rng: ChaCha20Rng,
    seed: u64,
    draws: u64,
}

impl SharedRandomness {
    pub fn new(seed: u64) -> Self {
        SharedRandomness {
            rng: ChaCha20Rng::seed_from_u64(seed),
            seed,
            draws: 0,
        }
    }

    /// Independent stream for repetition `label` of a composite run.
    pub fn derive(seed: u64, label: u64) -> Self {
        SharedRandomness::new(splitmix64(seed ^ splitmix64(label)))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Stream position in 64-bit draws.
    pub fn draws(&self) -> u64 {
        self.draws
    }

    pub fn next_u64(&mut self) -> u64 {
        self.draws += 1;
        self.rng.next_u64()
    }
}

/// SplitMix64 finalizer; used only to decorrelate derived seeds.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Answer plus the faithful message log that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolOutcome<T> {
    pub answer: T,
    pub transcript: Transcript,
}

/// A two-party protocol executable under the shared harness.
pub trait Protocol {
    type InputA;
    type InputB;
    type Answer;

    fn name(&self) -> &'static str;

    /// Runs the message exchange, appending to an existing transcript
    /// (which lets protocols nest as subroutines).
    fn execute(
        &self,
        a: &Self::InputA,
        b: &Self::InputB,
        rng: &mut SharedRandomness,
        transcript: &mut Transcript,
    ) -> Result<Self::Answer, ProtocolError>;
}

/// Execution harness: fresh transcript, seeded shared randomness.
pub fn run<P: Protocol>(
    protocol: &P,
    a: &P::InputA,
    b: &P::InputB,
    seed: u64,
) -> Result<ProtocolOutcome<P::Answer>, ProtocolError> {
    let mut rng = SharedRandomness::new(seed);
    let mut transcript = Transcript::new();
    let answer = protocol.execute(a, b, &mut rng, &mut transcript)?;
    Ok(ProtocolOutcome { answer, transcript })
}

// ---------------------------------------------------------------------------
// Wire encoding helpers
// ---------------------------------------------------------------------------

/// Fixed-width unsigned field, MSB first.
pub fn encode_uint(value: u64, width: u32) -> Vec<bool> {
    assert!(width <= 64, "field width too large");
    assert!(
        width == 64 || value < (1u64 << width),
        "value {value} does not fit in {width} bits"
    );
    (0..width).map(|i| (value >> (width - 1 - i)) & 1 == 1).collect()
}

pub fn decode_uint(bits: &[bool]) -> u64 {
    assert!(bits.len() <= 64);
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as u64)
}

/// Variable-width exponent field: unary length prefix (L ones and a
/// zero), then the L-bit binary value. α = 0 encodes as a single 0.
/// Cost is 2⌊log₂α⌋ + 3 bits for α ≥ 1, tracking Σ log α.
pub fn encode_exponent(alpha: u32) -> Vec<bool> {
    let len = 32 - alpha.leading_zeros();
    let mut bits = Vec::with_capacity(2 * len as usize + 1);
    bits.extend(std::iter::repeat_n(true, len as usize));
    bits.push(false);
    bits.extend(encode_uint(alpha as u64, len));
    bits
}

/// Reads one exponent field from a bit cursor; returns (value, consumed).
pub fn decode_exponent(bits: &[bool]) -> (u32, usize) {
    let len = bits.iter().take_while(|&&b| b).count();
    let value = decode_uint(&bits[len + 1..len + 1 + len]);
    (value as u32, 2 * len + 1)
}

// ---------------------------------------------------------------------------
// Full disclosure
// ---------------------------------------------------------------------------

/// The trivial deterministic upper bound: Alice sends her member's
/// index into a public enumeration; Bob evaluates disjointness locally.
/// One message of ⌈log₂(family size)⌉ bits.
pub struct FullDisclosureDisj<M> {
    family: Vec<M>,
}

/// Builds the protocol over Alice's public family.
pub fn full_disclosure_disj<M: crate::setsystems::FamilyMember>(
    family: Vec<M>,
) -> Result<FullDisclosureDisj<M>, ProtocolError> {
    if family.is_empty() {
        return Err(ProtocolError::EmptyFamily);
    }
    Ok(FullDisclosureDisj { family })
}

impl<M> FullDisclosureDisj<M> {
    pub fn family_size(&self) -> usize {
        self.family.len()
    }
}

impl<M: crate::setsystems::FamilyMember> Protocol for FullDisclosureDisj<M> {
    type InputA = M;
    type InputB = M;
    type Answer = bool;

    fn name(&self) -> &'static str {
        "full-disclosure"
    }

    fn execute(
        &self,
        a: &M,
        b: &M,
        _rng: &mut SharedRandomness,
        transcript: &mut Transcript,
    ) -> Result<bool, ProtocolError> {
        if a.member_tag() != b.member_tag() {
            return Err(ProtocolError::InstanceMismatch);
        }
        // Alice: locate her member in the public enumeration.
        let index = self
            .family
            .iter()
            .position(|m| m.member_points() == a.member_points())
            .ok_or(ProtocolError::MemberNotInFamily)?;
        let width = ceil_log2(self.family.len() as u64);
        transcript.send(Party::Alice, encode_uint(index as u64, width));

        // Bob: decode the index, look the member up, answer locally.
        let received = decode_uint(&transcript.messages().last().unwrap().bits) as usize;
        let alice_points = self.family[received].member_points();
        let disjoint = alice_points.intersection(b.member_points()).next().is_none();
        Ok(disjoint)
    }
}

/// Full-disclosure intersection for the grid families: both parties
/// send their index, so both can compute A ∩ B locally. This is the
/// default black-box intersection protocol for the learn reduction.
pub struct FullDisclosureInt {
    t1: Vec<LineFamilySet>,
    t2: Vec<LineFamilySet>,
}

pub fn full_disclosure_int(inst: &GridInstance) -> Result<FullDisclosureInt, ProtocolError> {
    let t1 = crate::setsystems::enumerate_line_family(
        inst,
        crate::setsystems::LineFamily::T1,
        crate::setsystems::DEFAULT_ENUM_CAP,
    )?;
    let t2 = crate::setsystems::enumerate_line_family(
        inst,
        crate::setsystems::LineFamily::T2,
        crate::setsystems::DEFAULT_ENUM_CAP,
    )?;
    if t1.is_empty() || t2.is_empty() {
        return Err(ProtocolError::EmptyFamily);
    }
    Ok(FullDisclosureInt { t1, t2 })
}

impl Protocol for FullDisclosureInt {
    type InputA = LineFamilySet;
    type InputB = LineFamilySet;
    type Answer = BTreeSet<crate::setsystems::GridPoint>;

    fn name(&self) -> &'static str {
        "full-disclosure-int"
    }

    fn execute(
        &self,
        a: &LineFamilySet,
        b: &LineFamilySet,
        _rng: &mut SharedRandomness,
        transcript: &mut Transcript,
    ) -> Result<Self::Answer, ProtocolError> {
        if a.tag() != b.tag() {
            return Err(ProtocolError::InstanceMismatch);
        }
        let ia = self
            .t1
            .iter()
            .position(|m| m.points() == a.points())
            .ok_or(ProtocolError::MemberNotInFamily)?;
        let ib = self
            .t2
            .iter()
            .position(|m| m.points() == b.points())
            .ok_or(ProtocolError::MemberNotInFamily)?;
        transcript.send(Party::Alice, encode_uint(ia as u64, ceil_log2(self.t1.len() as u64)));
        transcript.send(Party::Bob, encode_uint(ib as u64, ceil_log2(self.t2.len() as u64)));
        // Both parties now know both members; the meet is public.
        Ok(a.points().intersection(b.points()).copied().collect())
    }
}

// ---------------------------------------------------------------------------
// Sparse set intersection
// ---------------------------------------------------------------------------

/// Fingerprinting protocol for sparse sets over universe [0, U).
///
/// Alice sends a length header and one w-bit fingerprint per element of
/// her set; Bob replies with the identities of his elements whose
/// fingerprint matches one of Alice's. The returned set always contains
/// the true intersection; each extra survives with probability about
/// 2^−w, and w = ⌈log₂(|S_A| · size_bound / δ)⌉ makes the total extra
/// probability at most δ by a union bound. (The natural width would use
/// |S_B|, but Alice cannot read Bob's size, so the public `size_bound`
/// ≥ |S_B| stands in; Bob learns |S_A| from the header, so both can
/// compute w.)
pub struct SparseIntersection {
    universe: u64,
    /// Public upper bound on either party's set size, ≥ 1.
    size_bound: u64,
    delta: f64,
}

pub fn sparse_intersection(
    universe: u64,
    size_bound: u64,
    delta: f64,
) -> Result<SparseIntersection, ProtocolError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(ProtocolError::BadDelta(delta));
    }
    Ok(SparseIntersection {
        universe,
        size_bound: size_bound.max(1),
        delta,
    })
}

impl SparseIntersection {
    fn header_width(&self) -> u32 {
        ceil_log2(self.size_bound + 1)
    }

    fn id_width(&self) -> u32 {
        ceil_log2(self.universe)
    }

    fn fingerprint_width(&self, alice_size: u64) -> u32 {
        let ratio = (alice_size.max(1) * self.size_bound) as f64 / self.delta;
        (ratio.log2().ceil() as u32).clamp(1, 63)
    }

    fn check_set(&self, s: &BTreeSet<u64>) -> Result<(), ProtocolError> {
        if s.len() as u64 > self.size_bound {
            return Err(ProtocolError::SetTooLarge {
                got: s.len(),
                bound: self.size_bound,
            });
        }
        if let Some(&e) = s.iter().find(|&&e| e >= self.universe) {
            return Err(ProtocolError::ElementOutsideUniverse(e));
        }
        Ok(())
    }
}

fn fingerprint(key_a: u64, key_b: u64, width: u32, element: u64) -> u64 {
    key_a.wrapping_mul(element).wrapping_add(key_b) >> (64 - width)
}

impl Protocol for SparseIntersection {
    type InputA = BTreeSet<u64>;
    type InputB = BTreeSet<u64>;
    type Answer = BTreeSet<u64>;

    fn name(&self) -> &'static str {
        "sparse-intersection"
    }

    fn execute(
        &self,
        s_a: &BTreeSet<u64>,
        s_b: &BTreeSet<u64>,
        rng: &mut SharedRandomness,
        transcript: &mut Transcript,
    ) -> Result<Self::Answer, ProtocolError> {
        self.check_set(s_a)?;
        self.check_set(s_b)?;
        // Both parties draw the hash key from the shared stream.
        let key_a = rng.next_u64();
        let key_b = rng.next_u64();

        // Alice: header |S_A|, then w-bit fingerprints in ascending
        // element order.
        let w = self.fingerprint_width(s_a.len() as u64);
        let mut msg1 = encode_uint(s_a.len() as u64, self.header_width());
        for &e in s_a {
            msg1.extend(encode_uint(fingerprint(key_a, key_b, w, e), w));
        }
        transcript.send(Party::Alice, msg1);

        // Bob: parse the header to learn |S_A| (hence w), collect the
        // fingerprints, reply with matching identities.
        let msg1_bits = &transcript.messages().last().unwrap().bits;
        let hw = self.header_width() as usize;
        let alice_count = decode_uint(&msg1_bits[..hw]);
        let wb = self.fingerprint_width(alice_count) as usize;
        let received: BTreeSet<u64> = (0..alice_count as usize)
            .map(|i| decode_uint(&msg1_bits[hw + i * wb..hw + (i + 1) * wb]))
            .collect();
        let matched: Vec<u64> = s_b
            .iter()
            .copied()
            .filter(|&e| received.contains(&fingerprint(key_a, key_b, wb as u32, e)))
            .collect();
        let mut msg2 = encode_uint(matched.len() as u64, self.header_width());
        for &e in &matched {
            msg2.extend(encode_uint(e, self.id_width()));
        }
        transcript.send(Party::Bob, msg2);

        // Alice decodes the identities; both now hold the same set.
        let msg2_bits = &transcript.messages().last().unwrap().bits;
        let count = decode_uint(&msg2_bits[..hw]) as usize;
        let idw = self.id_width() as usize;
        let answer: BTreeSet<u64> = (0..count)
            .map(|i| decode_uint(&msg2_bits[hw + i * idw..hw + (i + 1) * idw]))
            .collect();
        debug_assert_eq!(answer, matched.iter().copied().collect());
        Ok(answer)
    }
}

// ---------------------------------------------------------------------------
// GCD protocol
// ---------------------------------------------------------------------------

/// Factor-based gcd for a, b ∈ [1, k]: both parties factor locally,
/// run sparse intersection on their prime supports, then exchange
/// exponents (variable-width) for every surviving candidate prime.
/// Extras from the fingerprinting stage are neutralized by exponent-0
/// replies, so the composite answer is exact on every seed; δ only
/// sizes the fingerprints.
pub struct GcdProtocol {
    k: u64,
    delta: f64,
    primes: Vec<u64>,
    /// Largest possible number of distinct prime factors of any value
    /// in [1, k] — the public size bound for the intersection stage.
    omega_max: u64,
}

pub fn gcd_protocol(k: u64, delta: f64) -> Result<GcdProtocol, ProtocolError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(ProtocolError::BadDelta(delta));
    }
    if k == 0 {
        return Err(ProtocolError::InputOutOfRange { value: 0, lo: 1, hi: u64::MAX });
    }
    let primes = primes_up_to(k);
    let mut omega_max = 0u64;
    let mut product = 1u64;
    for &p in &primes {
        match product.checked_mul(p) {
            Some(next) if next <= k => {
                product = next;
                omega_max += 1;
            }
            _ => break,
        }
    }
    Ok(GcdProtocol { k, delta, primes, omega_max })
}

impl GcdProtocol {
    pub fn k(&self) -> u64 {
        self.k
    }

    fn support_ids(&self, value: u64) -> Result<(FactorSupport, BTreeSet<u64>), ProtocolError> {
        let support = factor_over_primes(value, &self.primes)?;
        let ids = support
            .support()
            .map(|p| self.primes.binary_search(&p).expect("prime in table") as u64)
            .collect();
        Ok((support, ids))
    }

    /// One exponent field per candidate id, ascending.
    fn exponent_message(&self, candidates: &BTreeSet<u64>, support: &FactorSupport) -> Vec<bool> {
        let mut bits = Vec::new();
        for &id in candidates {
            let p = self.primes[id as usize];
            bits.extend(encode_exponent(support.exponent(p)));
        }
        bits
    }

    fn decode_exponents(bits: &[bool], count: usize) -> Vec<u32> {
        let mut out = Vec::with_capacity(count);
        let mut pos = 0;
        for _ in 0..count {
            let (value, used) = decode_exponent(&bits[pos..]);
            out.push(value);
            pos += used;
        }
        debug_assert_eq!(pos, bits.len());
        out
    }
}

impl Protocol for GcdProtocol {
    type InputA = u64;
    type InputB = u64;
    type Answer = u64;

    fn name(&self) -> &'static str {
        "gcd"
    }

    fn execute(
        &self,
        a: &u64,
        b: &u64,
        rng: &mut SharedRandomness,
        transcript: &mut Transcript,
    ) -> Result<u64, ProtocolError> {
        for &v in [a, b] {
            if v < 1 || v > self.k {
                return Err(ProtocolError::InputOutOfRange { value: v, lo: 1, hi: self.k });
            }
        }
        let (support_a, ids_a) = self.support_ids(*a)?;
        let (support_b, ids_b) = self.support_ids(*b)?;

        // Stage 1: candidate common primes (superset of the truth).
        let sparse = sparse_intersection(self.primes.len() as u64, self.omega_max, self.delta)?;
        let candidates = sparse.execute(&ids_a, &ids_b, rng, transcript)?;

        // Stage 2: exponents for every candidate; Alice may answer 0
        // for primes that do not divide a (the fingerprint extras).
        transcript.send(Party::Alice, self.exponent_message(&candidates, &support_a));
        let alice_exps = Self::decode_exponents(
            &transcript.messages().last().unwrap().bits,
            candidates.len(),
        );
        transcript.send(Party::Bob, self.exponent_message(&candidates, &support_b));
        let bob_exps = Self::decode_exponents(
            &transcript.messages().last().unwrap().bits,
            candidates.len(),
        );

        // Both parties compute ∏ p^min over the candidates.
        let mut g = 1u64;
        for ((&id, &ea), &eb) in candidates.iter().zip(&alice_exps).zip(&bob_exps) {
            let p = self.primes[id as usize];
            g *= p.pow(ea.min(eb));
        }
        Ok(g)
    }
}

// ---------------------------------------------------------------------------
// Line disjointness
// ---------------------------------------------------------------------------

/// Per-grid block-line shape, as Alice tags it on the wire. The T₁
/// generator only emits slopes (a−1)/a with a ≥ 1, so `Vertical` is
/// never produced today; the tag space reserves it so the wire format
/// covers the full case split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BlockLineTag {
    General = 0,
    Horizontal = 1,
    #[allow(dead_code)]
    Vertical = 2,
}

/// Decides Disj(A, B) for A ∈ T₁, B ∈ T₂ by running, per grid, a small
/// case split plus a gcd subprotocol on (slope denominator, column
/// offset) with budget δ/d. The T₁ generator never produces vertical
/// block lines, but the tag and branch exist so the full case split is
/// on the wire.
pub struct LineDisjProtocol {
    tag: InstanceTag,
    d: u64,
    m: u64,
    delta: f64,
}

pub fn line_disj_protocol(inst: &GridInstance, delta: f64) -> Result<LineDisjProtocol, ProtocolError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(ProtocolError::BadDelta(delta));
    }
    Ok(LineDisjProtocol {
        tag: inst.tag(),
        d: inst.d(),
        m: inst.m(),
        delta,
    })
}

impl Protocol for LineDisjProtocol {
    type InputA = LineFamilySet;
    type InputB = LineFamilySet;
    type Answer = bool;

    fn name(&self) -> &'static str {
        "line-disj"
    }

    fn execute(
        &self,
        a: &LineFamilySet,
        b: &LineFamilySet,
        rng: &mut SharedRandomness,
        transcript: &mut Transcript,
    ) -> Result<bool, ProtocolError> {
        if a.tag() != self.tag || b.tag() != self.tag {
            return Err(ProtocolError::InstanceMismatch);
        }
        if a.kind() != LineKind::Slope {
            return Err(ProtocolError::WrongKind { expected: LineKind::Slope });
        }
        if b.kind() != LineKind::Vertical {
            return Err(ProtocolError::WrongKind { expected: LineKind::Vertical });
        }
        let block_delta = self.delta / self.d as f64;
        let mut any_meet = false;
        for i in 0..self.d as usize {
            let ai = a.params()[i]; // Alice-private
            let r = b.params()[i]; // Bob-private
            let meets = self.block_meets(ai, r, block_delta, rng, transcript)?;
            any_meet |= meets;
        }
        Ok(!any_meet)
    }
}

impl LineDisjProtocol {
    /// One grid's exchange; both parties finish knowing the block bit.
    fn block_meets(
        &self,
        a: u64,
        r: u64,
        delta: f64,
        rng: &mut SharedRandomness,
        transcript: &mut Transcript,
    ) -> Result<bool, ProtocolError> {
        // Alice tags her block line's shape (2 bits).
        let tag = if a == 1 { BlockLineTag::Horizontal } else { BlockLineTag::General };
        transcript.send(Party::Alice, encode_uint(tag as u64, 2));

        match tag {
            BlockLineTag::Horizontal => {
                // The anchor row crosses every column inside the grid.
                Ok(true)
            }
            BlockLineTag::Vertical => {
                // Alice's line is the anchor column; Bob's column meets
                // it only if it is the same column.
                let bit = r == 0;
                transcript.send(Party::Bob, vec![bit]);
                Ok(bit)
            }
            BlockLineTag::General => {
                // Slope (a−1)/a = p/q in lowest terms (consecutive
                // integers are coprime), so q = a.
                let q = a;
                // Subprotocol: g = gcd(q, max(r, 1)) with the block's
                // error budget; both parties learn g.
                let sub = gcd_protocol(self.m - 1, delta)?;
                let g = sub.execute(&q, &r.max(1), rng, transcript)?;
                // Alice alone knows q; she announces whether g = q,
                // i.e. whether q divides Bob's r (for r ≥ 1).
                let q_divides = g == q;
                transcript.send(Party::Alice, vec![q_divides]);
                // Bob decides the block bit and announces it: the r = 0
                // column always passes through the shared anchor; for
                // r ≥ 1 the meet point is (r, r − r/q), inside the grid
                // iff the y-offset stays within [0, m−1].
                let meets = if r == 0 {
                    true
                } else if q_divides {
                    let y = r - r / g; // g = q exactly when q_divides
                    y < self.m
                } else {
                    false
                };
                transcript.send(Party::Bob, vec![meets]);
                Ok(meets)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Majority amplification
// ---------------------------------------------------------------------------

/// Number of repetitions: smallest odd integer ≥ 18·ln(1/δ), with the
/// shortcut r = 1 when the base error already meets δ.
pub fn amplification_rounds(base_error: f64, delta: f64) -> u64 {
    if delta >= base_error {
        return 1;
    }
    let mut r = (18.0 * (1.0 / delta).ln()).ceil() as u64;
    if r.is_multiple_of(2) {
        r += 1;
    }
    r.max(1)
}

/// Runs `base` r times on independent shared-randomness segments and
/// returns the majority answer; the transcript is the concatenation.
/// Chernoff brings a ≤ 1/3 per-run error down to ≤ δ.
pub fn amplify_majority<P>(
    base: &P,
    base_error: f64,
    delta: f64,
    a: &P::InputA,
    b: &P::InputB,
    seed: u64,
) -> Result<ProtocolOutcome<P::Answer>, ProtocolError>
where
    P: Protocol,
    P::Answer: Ord + Clone,
{
    if !(base_error > 0.0 && base_error < 1.0) {
        return Err(ProtocolError::BadErrorBound(base_error));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(ProtocolError::BadDelta(delta));
    }
    let rounds = amplification_rounds(base_error, delta);
    let mut transcript = Transcript::new();
    let mut tally: BTreeMap<P::Answer, u64> = BTreeMap::new();
    for rep in 0..rounds {
        let mut rng = SharedRandomness::derive(seed, rep);
        let mut sub = Transcript::new();
        let answer = base.execute(a, b, &mut rng, &mut sub)?;
        transcript.extend_from(sub);
        *tally.entry(answer).or_insert(0) += 1;
    }
    // Majority; ties (impossible for odd r over two outcomes) fall to
    // the smaller answer for determinism.
    let answer = tally
        .into_iter()
        .max_by(|(x, cx), (y, cy)| cx.cmp(cy).then_with(|| y.cmp(x)))
        .map(|(v, _)| v)
        .expect("at least one repetition");
    Ok(ProtocolOutcome { answer, transcript })
}
