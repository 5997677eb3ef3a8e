//! Executable reductions with their decode steps: augmented indexing
//! to interval disjointness, or-disjointness to grid-line
//! disjointness, and learning a set from a known set plus the
//! intersection.
//!
//! Each reduction is a pure input transformation — Alice and Bob map
//! their private inputs to family members, a disjointness (or
//! intersection) answer on the members is obtained however the caller
//! likes, and a decode step maps that answer back. The exhaustive
//! equivalence checks live in [`crate::verify`].

use std::collections::BTreeSet;

use thiserror::Error;

use crate::encoding::{phi, BitString, PrimeTable};
use crate::protocols::{Protocol, ProtocolError, SharedRandomness, Transcript};
use crate::setsystems::{
    generate_left, generate_right, generate_t1, generate_t2, intersect, AnchoredIntervalSet,
    GridInstance, GridPoint, IntervalInstance, LineFamilySet, LineKind,
};

#[derive(Debug, Error, PartialEq)]
pub enum ReductionError {
    #[error("input has {got} bits, instance wants {want}")]
    InputLengthMismatch { got: usize, want: usize },
    #[error("index {j} outside [1, {ell}]")]
    IndexOutOfRange { j: usize, ell: usize },
    #[error("prefix has {got} bits, index {j} wants {want}")]
    PrefixLengthMismatch { got: usize, j: usize, want: usize },
    #[error("block {block} has {got} strings, instance wants {want}")]
    BlockCountMismatch { got: usize, want: usize, block: usize },
    #[error("block {block} is all-zero (excluded from S_k)")]
    ZeroBlock { block: usize },
    #[error("block {block}: phi value {value} exceeds the grid bound {max}")]
    PhiOutOfRange { block: usize, value: u64, max: u64 },
    #[error("meet has {got} points, promise wants {want}")]
    MeetSize { got: usize, want: usize },
    #[error("meet point {point} lies outside every grid")]
    MeetOffGrid { point: GridPoint },
    #[error("grid {grid} holds {count} meet points, promise wants 1")]
    GridMeetMultiplicity { grid: usize, count: usize },
    #[error("grid {grid}: meet point sits on the anchor column, member underdetermined")]
    AnchorColumn { grid: usize },
    #[error("grid {grid}: meet point is not consistent with the known member")]
    MeetInconsistent { grid: usize },
    #[error("reconstructed {side} member differs from the true input")]
    ReconstructionMismatch { side: &'static str },
    #[error(transparent)]
    Encoding(#[from] crate::encoding::EncodingError),
    #[error(transparent)]
    SetSystem(#[from] crate::setsystems::SetSystemError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

// ---------------------------------------------------------------------------
// Augmented indexing → interval disjointness
// ---------------------------------------------------------------------------

/// Bits per block: the interval construction pins m to a power of two.
fn bits_per_block(inst: &IntervalInstance) -> usize {
    inst.m().trailing_zeros() as usize
}

/// Total input length ℓ = d·log₂m.
pub fn augindex_input_len(inst: &IntervalInstance) -> usize {
    inst.d() as usize * bits_per_block(inst)
}

/// Alice's encoding: split x into d blocks of log₂m bits, read each as
/// aᵢ, and take the left-anchored member with block intervals
/// [pᵢ, pᵢ+m−aᵢ].
pub fn augindex_encode_alice(
    x: &BitString,
    inst: &IntervalInstance,
) -> Result<AnchoredIntervalSet, ReductionError> {
    let ell = augindex_input_len(inst);
    if x.len() != ell {
        return Err(ReductionError::InputLengthMismatch { got: x.len(), want: ell });
    }
    let a: Vec<u64> = x
        .partition_blocks(inst.d() as usize)?
        .iter()
        .map(BitString::val)
        .collect();
    Ok(generate_left(inst, &a)?)
}

/// Bob's encoding: assemble y = x₁…x_{j−1} 1 0…0, split into blocks
/// bᵢ, and take the right-anchored member with block intervals
/// [pᵢ+m+1−bᵢ, pᵢ+m+1]. Bob only ever reads the prefix of x he is
/// given.
pub fn augindex_encode_bob(
    j: usize,
    prefix: &BitString,
    inst: &IntervalInstance,
) -> Result<AnchoredIntervalSet, ReductionError> {
    let ell = augindex_input_len(inst);
    if j < 1 || j > ell {
        return Err(ReductionError::IndexOutOfRange { j, ell });
    }
    if prefix.len() != j - 1 {
        return Err(ReductionError::PrefixLengthMismatch {
            got: prefix.len(),
            j,
            want: j - 1,
        });
    }
    let mut bits = prefix.bits().to_vec();
    bits.push(true);
    bits.resize(ell, false);
    let y = BitString::new(bits);
    let b: Vec<u64> = y
        .partition_blocks(inst.d() as usize)?
        .iter()
        .map(BitString::val)
        .collect();
    Ok(generate_right(inst, &b)?)
}

/// Decode step: report x_j = 1 exactly when the encoded pair is
/// disjoint. (Disjointness of block i* means b ≤ a there, which holds
/// iff y's 1 at position j matches a 1 of x.)
pub fn augindex_decode(disj: bool) -> bool {
    disj
}

// ---------------------------------------------------------------------------
// Or-disjointness → grid-line disjointness
// ---------------------------------------------------------------------------

fn check_block_strings(
    strings: &[BitString],
    inst: &GridInstance,
    pt: &PrimeTable,
) -> Result<(), ReductionError> {
    if strings.len() != inst.d() as usize {
        return Err(ReductionError::BlockCountMismatch {
            got: strings.len(),
            want: inst.d() as usize,
            block: 0,
        });
    }
    for (block, s) in strings.iter().enumerate() {
        if s.len() != pt.k() {
            return Err(ReductionError::InputLengthMismatch { got: s.len(), want: pt.k() });
        }
        if s.bits().iter().all(|&b| !b) {
            return Err(ReductionError::ZeroBlock { block });
        }
    }
    Ok(())
}

fn phi_in_range(
    s: &BitString,
    block: usize,
    inst: &GridInstance,
    pt: &PrimeTable,
) -> Result<u64, ReductionError> {
    let value = phi(s, pt)?;
    if value > inst.m() - 1 {
        return Err(ReductionError::PhiOutOfRange { block, value, max: inst.m() - 1 });
    }
    Ok(value)
}

/// Alice's encoding: per-grid slope parameter aᵢ = φ(xᵢ) ≥ 2 (the
/// all-zero block is excluded, so at least one prime contributes).
pub fn ordisj_encode_alice(
    x: &[BitString],
    inst: &GridInstance,
    pt: &PrimeTable,
) -> Result<LineFamilySet, ReductionError> {
    check_block_strings(x, inst, pt)?;
    let a = x
        .iter()
        .enumerate()
        .map(|(i, s)| phi_in_range(s, i, inst, pt))
        .collect::<Result<Vec<u64>, _>>()?;
    Ok(generate_t1(inst, &a)?)
}

/// Bob's encoding: complement each block first, then bᵢ = φ(ȳᵢ); the
/// complement of 1^k is all-zero and gives the valid column bᵢ = 1.
pub fn ordisj_encode_bob(
    y: &[BitString],
    inst: &GridInstance,
    pt: &PrimeTable,
) -> Result<LineFamilySet, ReductionError> {
    check_block_strings(y, inst, pt)?;
    let b = y
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let complement = BitString::new(s.bits().iter().map(|&bit| !bit).collect());
            phi_in_range(&complement, i, inst, pt)
        })
        .collect::<Result<Vec<u64>, _>>()?;
    Ok(generate_t2(inst, &b)?)
}

/// Decode step: ⋁ᵢ [xᵢ ∩ yᵢ = ∅] = 1 exactly when the encoded pair is
/// NOT disjoint. (Block i's supports are disjoint iff φ(xᵢ) divides
/// φ(ȳᵢ), which is exactly when the block lines meet.)
pub fn ordisj_decode(disj: bool) -> bool {
    !disj
}

// ---------------------------------------------------------------------------
// Learning via intersection
// ---------------------------------------------------------------------------

/// Splits a meet into exactly one point per grid, with offsets
/// (v, w) = (x − pᵢ, y − qᵢ); rejects anything the promise excludes,
/// including anchor-column points (v = 0), where the slope through the
/// point is underdetermined.
fn meet_offsets(
    meet: &BTreeSet<GridPoint>,
    inst: &GridInstance,
) -> Result<Vec<(i64, i64)>, ReductionError> {
    let d = inst.d() as usize;
    if meet.len() != d {
        return Err(ReductionError::MeetSize { got: meet.len(), want: d });
    }
    let mut offsets: Vec<Option<(i64, i64)>> = vec![None; d];
    for &point in meet {
        let grid = inst
            .grid_of(point)
            .ok_or(ReductionError::MeetOffGrid { point })?;
        if offsets[grid].is_some() {
            return Err(ReductionError::GridMeetMultiplicity { grid, count: 2 });
        }
        let (p, q) = inst.anchors()[grid];
        offsets[grid] = Some((point.x - p, point.y - q));
    }
    let offsets: Vec<(i64, i64)> = offsets
        .into_iter()
        .enumerate()
        .map(|(grid, o)| o.ok_or(ReductionError::GridMeetMultiplicity { grid, count: 0 }))
        .collect::<Result<_, _>>()?;
    if let Some(grid) = offsets.iter().position(|&(v, _)| v == 0) {
        return Err(ReductionError::AnchorColumn { grid });
    }
    Ok(offsets)
}

/// Recovers the other party's member from one's own member plus the
/// intersection, with zero communication. From a column and the meet
/// point (pᵢ+v, qᵢ+w): the slope through the anchor is w/v =
/// (aᵢ−1)/aᵢ, so aᵢ = v/(v−w). From a line: bᵢ = v directly.
pub fn reconstruct_from_intersection(
    known: &LineFamilySet,
    meet: &BTreeSet<GridPoint>,
    inst: &GridInstance,
) -> Result<LineFamilySet, ReductionError> {
    if known.tag() != inst.tag() {
        return Err(ReductionError::SetSystem(
            crate::setsystems::SetSystemError::InstanceMismatch,
        ));
    }
    for &point in meet {
        if !known.points().contains(&point) {
            let grid = inst.grid_of(point).unwrap_or(0);
            return Err(ReductionError::MeetInconsistent { grid });
        }
    }
    let offsets = meet_offsets(meet, inst)?;
    match known.kind() {
        LineKind::Vertical => {
            // Recover the T₁ slope parameters.
            let mut a = Vec::with_capacity(offsets.len());
            for (grid, &(v, w)) in offsets.iter().enumerate() {
                let denom = v - w;
                if denom <= 0 || v % denom != 0 {
                    return Err(ReductionError::MeetInconsistent { grid });
                }
                a.push((v / denom) as u64);
            }
            Ok(generate_t1(inst, &a)?)
        }
        LineKind::Slope => {
            // Recover the T₂ columns.
            let b: Vec<u64> = offsets.iter().map(|&(v, _)| v as u64).collect();
            Ok(generate_t2(inst, &b)?)
        }
    }
}

/// Whether (A, B) satisfies the learning promise: exactly one meet
/// point per grid, none of them on an anchor column.
pub fn meets_learn_promise(a: &LineFamilySet, b: &LineFamilySet, inst: &GridInstance) -> bool {
    match intersect(a, b) {
        Ok(meet) => meet_offsets(&meet, inst).is_ok(),
        Err(_) => false,
    }
}

/// Both reconstructions plus the transcript that paid for them.
#[derive(Debug, Clone)]
pub struct LearnOutcome {
    pub a_learned_by_bob: LineFamilySet,
    pub b_learned_by_alice: LineFamilySet,
    pub transcript: Transcript,
}

/// Runs the supplied intersection protocol, then each party
/// reconstructs the other's member locally — the transcript is exactly
/// the intersection protocol's transcript. The true inputs are only
/// used to verify the reconstructions; a mismatch marks the supplied
/// protocol buggy.
pub fn learn_via_intersection<P>(
    protocol: &P,
    a: &LineFamilySet,
    b: &LineFamilySet,
    inst: &GridInstance,
    seed: u64,
) -> Result<LearnOutcome, ReductionError>
where
    P: Protocol<InputA = LineFamilySet, InputB = LineFamilySet, Answer = BTreeSet<GridPoint>>,
{
    let mut rng = SharedRandomness::new(seed);
    let mut transcript = Transcript::new();
    let meet = protocol.execute(a, b, &mut rng, &mut transcript)?;

    let a_learned_by_bob = reconstruct_from_intersection(b, &meet, inst)?;
    let b_learned_by_alice = reconstruct_from_intersection(a, &meet, inst)?;
    if a_learned_by_bob.points() != a.points() {
        return Err(ReductionError::ReconstructionMismatch { side: "T1" });
    }
    if b_learned_by_alice.points() != b.points() {
        return Err(ReductionError::ReconstructionMismatch { side: "T2" });
    }
    Ok(LearnOutcome { a_learned_by_bob, b_learned_by_alice, transcript })
}
