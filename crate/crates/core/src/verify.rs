//! Brute-force oracles that independently re-derive the structural
//! claims made by the other modules and package the outcomes as
//! machine-checkable reports.
//!
//! Every oracle works from first principles — explicit point sets,
//! direct integer arithmetic, Euclid's algorithm — and never reuses a
//! derived shortcut from the module whose claim it checks. Case
//! enumeration runs in parallel; failure counts merge by summation and
//! the reported counterexample is always the one with the lowest case
//! index, so reports are deterministic.

use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::encoding::{gcd as euclid_gcd, phi, BitString, PrimeTable};
use crate::protocols::{gcd_protocol, run, splitmix64};
use crate::reductions::{
    augindex_encode_alice, augindex_encode_bob, augindex_input_len, reconstruct_from_intersection,
    ordisj_decode, ordisj_encode_alice, ordisj_encode_bob,
};
use crate::setsystems::{
    build_grid_instance, build_interval_instance, enumerate_interval_family, enumerate_line_family,
    GridInstance, IntervalFamily, IntervalInstance, LineFamily, DEFAULT_ENUM_CAP,
};

/// Hard ceiling on enumerated cases per checker; keeps the default
/// suite comfortably inside a minute.
pub const CASE_CAP: u64 = 1 << 26;

#[derive(Debug, Error, PartialEq)]
pub enum VerifyError {
    #[error("{what}: {got} cases exceed the cap {cap}")]
    CapExceeded { what: &'static str, got: u64, cap: u64 },
    #[error("unknown claim id {0:?}")]
    UnknownClaim(String),
    #[error(transparent)]
    SetSystem(#[from] crate::setsystems::SetSystemError),
    #[error(transparent)]
    Encoding(#[from] crate::encoding::EncodingError),
    #[error(transparent)]
    Reduction(#[from] crate::reductions::ReductionError),
    #[error(transparent)]
    Protocol(#[from] crate::protocols::ProtocolError),
}

/// Outcome of one exhaustive (or sampled) claim check.
#[derive(Debug, Clone)]
pub struct ClaimReport {
    pub claim: &'static str,
    /// Parameter point, e.g. "n=12 d=2 m=4".
    pub params: String,
    pub cases: u64,
    pub failures: u64,
    /// Present exactly when failures > 0; lowest case index wins.
    pub counterexample: Option<String>,
    pub wall: Duration,
}

impl ClaimReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

impl fmt::Display for ClaimReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:24} {:32} {:>8} cases {:>4} failures [{}] {}ms",
            self.claim,
            self.params,
            self.cases,
            self.failures,
            if self.passed() { "PASS" } else { "FAIL" },
            self.wall.as_millis()
        )?;
        if let Some(ce) = &self.counterexample {
            write!(f, "\n  first counterexample: {ce}")?;
        }
        Ok(())
    }
}

/// Runs `case` over 0..total in parallel. A case returns Some(text) on
/// failure; the merge keeps the failure with the smallest index.
fn run_cases<F>(total: u64, case: F) -> (u64, Option<String>)
where
    F: Fn(u64) -> Option<String> + Sync,
{
    let (failures, ce) = (0..total)
        .into_par_iter()
        .map(|i| match case(i) {
            None => (0u64, None),
            Some(text) => (1u64, Some((i, text))),
        })
        .reduce(
            || (0, None),
            |x, y| {
                let merged = match (x.1, y.1) {
                    (Some(a), Some(b)) => Some(if a.0 <= b.0 { a } else { b }),
                    (a, b) => a.or(b),
                };
                (x.0 + y.0, merged)
            },
        );
    (failures, ce.map(|(i, text)| format!("case {i}: {text}")))
}

fn finish(
    claim: &'static str,
    params: String,
    cases: u64,
    outcome: (u64, Option<String>),
    start: Instant,
) -> ClaimReport {
    ClaimReport {
        claim,
        params,
        cases,
        failures: outcome.0,
        counterexample: outcome.1,
        wall: start.elapsed(),
    }
}

fn check_cap(what: &'static str, got: u64) -> Result<(), VerifyError> {
    if got > CASE_CAP {
        return Err(VerifyError::CapExceeded { what, got, cap: CASE_CAP });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Interval claim
// ---------------------------------------------------------------------------

/// A ∩ B ≠ ∅ ⟺ some block's two intervals overlap. Exhaustive over
/// R₀ × R_{m+1}; the left side is explicit point-set intersection, the
/// right side direct endpoint arithmetic recomputed from the lengths.
pub fn check_interval_claim(inst: &IntervalInstance) -> Result<ClaimReport, VerifyError> {
    let start = Instant::now();
    let r0 = enumerate_interval_family(inst, IntervalFamily::R0, DEFAULT_ENUM_CAP)?;
    let rm1 = enumerate_interval_family(inst, IntervalFamily::Rm1, DEFAULT_ENUM_CAP)?;
    let cases = (r0.len() * rm1.len()) as u64;
    check_cap("interval-claim", cases)?;
    let m = inst.m() as i64;

    let outcome = run_cases(cases, |idx| {
        let a = &r0[(idx / rm1.len() as u64) as usize];
        let b = &rm1[(idx % rm1.len() as u64) as usize];
        let truth = a.points().intersection(b.points()).next().is_some();
        let mut exists = false;
        for (i, &p) in inst.anchors().iter().enumerate() {
            let (start_a, end_a) = (p, p + a.lengths()[i] as i64 - 1);
            let (start_b, end_b) = (p + m + 2 - b.lengths()[i] as i64, p + m + 1);
            if start_a.max(start_b) <= end_a.min(end_b) {
                exists = true;
            }
        }
        if truth == exists {
            None
        } else {
            Some(format!(
                "lengths A={:?} B={:?}: point-set says {truth}, block arithmetic says {exists}",
                a.lengths(),
                b.lengths()
            ))
        }
    });
    Ok(finish(
        "interval-claim",
        format!("n={} d={} m={}", inst.n(), inst.d(), inst.m()),
        cases,
        outcome,
        start,
    ))
}

// ---------------------------------------------------------------------------
// Observation on augmented-indexing blocks
// ---------------------------------------------------------------------------

/// For every (x, j): (i) blocks other than i* = block(j) contribute no
/// shared point; (ii) block i* intersects exactly when x_j = 0;
/// (iii) val(b_{i*}) ≤ val(a_{i*}) exactly when x_j = 1, with both
/// values re-read straight from the bit strings.
pub fn check_observation_blocks(d: u64, m: u64) -> Result<ClaimReport, VerifyError> {
    let start = Instant::now();
    let inst = build_interval_instance(d * (m + 2), d)?;
    let ell = augindex_input_len(&inst);
    let log_m = ell / d as usize;
    let cases = (1u64 << ell) * ell as u64;
    check_cap("observation-blocks", cases)?;

    let outcome = run_cases(cases, |idx| {
        let xv = idx / ell as u64;
        let j = (idx % ell as u64) as usize + 1;
        let x = BitString::from_value(xv, ell);
        let i_star = (j - 1) / log_m;
        let alice = augindex_encode_alice(&x, &inst).expect("valid input");
        let prefix = BitString::new(x.bits()[..j - 1].to_vec());
        let bob = augindex_encode_bob(j, &prefix, &inst).expect("valid input");

        // y as Bob assembles it, for the value comparison in (iii).
        let mut y_bits = prefix.bits().to_vec();
        y_bits.push(true);
        y_bits.resize(ell, false);
        let block_val = |bits: &[bool]| {
            bits[i_star * log_m..(i_star + 1) * log_m]
                .iter()
                .fold(0u64, |acc, &bit| (acc << 1) | bit as u64)
        };
        let a_star = block_val(x.bits());
        let b_star = block_val(&y_bits);

        let shared: Vec<i64> = alice
            .points()
            .intersection(bob.points())
            .copied()
            .collect();
        for &pt in &shared {
            let (lo, hi) = inst.block_range(i_star);
            if pt < lo || pt > hi {
                return Some(format!(
                    "x={x} j={j}: shared point {pt} outside target block {i_star}"
                ));
            }
        }
        let target_hit = !shared.is_empty();
        if target_hit == x.bit(j) {
            return Some(format!(
                "x={x} j={j}: block {i_star} intersection={target_hit} but x_j={}",
                x.bit(j) as u8
            ));
        }
        if (b_star <= a_star) != x.bit(j) {
            return Some(format!(
                "x={x} j={j}: b*={b_star} a*={a_star} disagrees with x_j={}",
                x.bit(j) as u8
            ));
        }
        None
    });
    Ok(finish(
        "observation-blocks",
        format!("d={d} m={m}"),
        cases,
        outcome,
        start,
    ))
}

// ---------------------------------------------------------------------------
// Grid claims
// ---------------------------------------------------------------------------

/// For every A ∈ T₁, B ∈ T₂: per grid the two block lines share at
/// most one point, existence and location match the line equations
/// solved in exact arithmetic, nothing crosses grids, and under the
/// one-point-per-grid promise (off the anchor column) both
/// reconstructions round-trip.
pub fn check_grid_claims(inst: &GridInstance) -> Result<ClaimReport, VerifyError> {
    let start = Instant::now();
    let t1 = enumerate_line_family(inst, LineFamily::T1, DEFAULT_ENUM_CAP)?;
    let t2 = enumerate_line_family(inst, LineFamily::T2, DEFAULT_ENUM_CAP)?;
    let cases = (t1.len() * t2.len()) as u64;
    check_cap("grid-claims", cases)?;
    let m = inst.m() as i64;
    let d = inst.d() as usize;

    let outcome = run_cases(cases, |idx| {
        let a = &t1[(idx / t2.len() as u64) as usize];
        let b = &t2[(idx % t2.len() as u64) as usize];
        let mut block_meets = Vec::with_capacity(d);
        for i in 0..d {
            let meet: Vec<_> = a
                .block_points(inst, i)
                .intersection(&b.block_points(inst, i))
                .copied()
                .collect();
            if meet.len() > 1 {
                return Some(format!(
                    "a={:?} b={:?}: grid {i} has {} shared points",
                    a.params(),
                    b.params(),
                    meet.len()
                ));
            }
            // Solve the line equations directly: the slope line
            // a(y−q) = (a−1)(x−p) meets the column x = p+b at
            // y = q + (a−1)b/a when that is integral and on the grid.
            let (p, q) = inst.anchors()[i];
            let (ai, bi) = (a.params()[i] as i64, b.params()[i] as i64);
            let numerator = (ai - 1) * bi;
            let predicted = if numerator % ai == 0 && (0..m).contains(&(numerator / ai)) {
                Some(crate::setsystems::GridPoint::new(p + bi, q + numerator / ai))
            } else {
                None
            };
            if meet.first().copied() != predicted {
                return Some(format!(
                    "a={:?} b={:?}: grid {i} meet {:?} but equations predict {:?}",
                    a.params(),
                    b.params(),
                    meet.first(),
                    predicted
                ));
            }
            block_meets.push(meet.first().copied());
        }
        // No cross-grid leakage: the global meet is the block meets.
        let global: Vec<_> = a.points().intersection(b.points()).copied().collect();
        let blockwise: Vec<_> = block_meets.iter().filter_map(|&pt| pt).collect();
        if global != blockwise {
            return Some(format!(
                "a={:?} b={:?}: global meet {global:?} ≠ per-grid meets {blockwise:?}",
                a.params(),
                b.params()
            ));
        }
        // Reconstruction round-trip under the promise.
        let promise = block_meets.iter().all(|pt| pt.is_some())
            && block_meets
                .iter()
                .enumerate()
                .all(|(i, pt)| pt.unwrap().x > inst.anchors()[i].0);
        if promise {
            let meet = global.iter().copied().collect();
            match (
                reconstruct_from_intersection(b, &meet, inst),
                reconstruct_from_intersection(a, &meet, inst),
            ) {
                (Ok(a_rec), Ok(b_rec)) => {
                    if a_rec.points() != a.points() || b_rec.points() != b.points() {
                        return Some(format!(
                            "a={:?} b={:?}: reconstruction returned wrong member",
                            a.params(),
                            b.params()
                        ));
                    }
                }
                (ra, rb) => {
                    return Some(format!(
                        "a={:?} b={:?}: reconstruction errored: {ra:?} / {rb:?}",
                        a.params(),
                        b.params()
                    ));
                }
            }
        }
        None
    });
    Ok(finish(
        "grid-claims",
        format!("n={} d={} m={}", inst.n(), inst.d(), inst.m()),
        cases,
        outcome,
        start,
    ))
}

// ---------------------------------------------------------------------------
// Subset ⟺ divisibility
// ---------------------------------------------------------------------------

/// supp(x) ⊆ supp(y) ⟺ φ(x) | φ(y), exhaustively over {0,1}^k pairs.
/// The subset side is raw bitmask arithmetic; the divisibility side
/// uses the φ products.
pub fn check_subset_divides(k: usize) -> Result<ClaimReport, VerifyError> {
    let start = Instant::now();
    let cases = 1u64 << (2 * k);
    check_cap("subset-divides", cases)?;
    let pt = PrimeTable::first_k(k);

    let outcome = run_cases(cases, |idx| {
        let xv = idx >> k;
        let yv = idx & ((1 << k) - 1);
        let subset = xv & !yv == 0;
        let phi_x = phi(&BitString::from_value(xv, k), &pt).expect("sized table");
        let phi_y = phi(&BitString::from_value(yv, k), &pt).expect("sized table");
        let divides = phi_y.is_multiple_of(phi_x);
        if subset == divides {
            None
        } else {
            Some(format!(
                "x={xv:0k$b} y={yv:0k$b}: subset={subset} but {phi_x} | {phi_y} = {divides}"
            ))
        }
    });
    Ok(finish("subset-divides", format!("k={k}"), cases, outcome, start))
}

// ---------------------------------------------------------------------------
// End-to-end reductions
// ---------------------------------------------------------------------------

/// Decoded augmented-indexing answer equals x_j for every (x, j),
/// with disjointness evaluated on the explicit point sets.
pub fn check_reduction_augindex(d: u64, m: u64) -> Result<ClaimReport, VerifyError> {
    let start = Instant::now();
    let inst = build_interval_instance(d * (m + 2), d)?;
    let ell = augindex_input_len(&inst);
    let cases = (1u64 << ell) * ell as u64;
    check_cap("reduction-augindex", cases)?;

    let outcome = run_cases(cases, |idx| {
        let xv = idx / ell as u64;
        let j = (idx % ell as u64) as usize + 1;
        let x = BitString::from_value(xv, ell);
        let alice = augindex_encode_alice(&x, &inst).expect("valid input");
        let prefix = BitString::new(x.bits()[..j - 1].to_vec());
        let bob = augindex_encode_bob(j, &prefix, &inst).expect("valid input");
        let disj = alice.points().intersection(bob.points()).next().is_none();
        let decoded = crate::reductions::augindex_decode(disj);
        if decoded == x.bit(j) {
            None
        } else {
            Some(format!(
                "x={x} j={j}: decoded {} but x_j={}",
                decoded as u8,
                x.bit(j) as u8
            ))
        }
    });
    Ok(finish(
        "reduction-augindex",
        format!("d={d} m={m}"),
        cases,
        outcome,
        start,
    ))
}

/// Decoded or-disjointness answer equals ⋁ᵢ[xᵢ ∩ yᵢ = ∅] over all of
/// S_k^d × S_k^d; the grid is sized so every φ value fits.
pub fn check_reduction_ordisj(d: u64, k: usize) -> Result<ClaimReport, VerifyError> {
    let start = Instant::now();
    let pt = PrimeTable::first_k(k);
    let m = pt.product() + 1;
    let inst = build_grid_instance(d * m * m, d)?;

    // S_k^d tuples in lexicographic order, shared by both sides.
    let sk: Vec<u64> = (1..(1u64 << k)).collect();
    let tuple_count = (sk.len() as u64).pow(d as u32);
    let cases = tuple_count * tuple_count;
    check_cap("reduction-ordisj", cases)?;
    let tuple = |mut t: u64| -> Vec<u64> {
        let mut blocks = vec![0u64; d as usize];
        for slot in blocks.iter_mut().rev() {
            *slot = sk[(t % sk.len() as u64) as usize];
            t /= sk.len() as u64;
        }
        blocks
    };
    let strings = |blocks: &[u64]| -> Vec<BitString> {
        blocks.iter().map(|&v| BitString::from_value(v, k)).collect()
    };

    let outcome = run_cases(cases, |idx| {
        let xs = tuple(idx / tuple_count);
        let ys = tuple(idx % tuple_count);
        let alice = ordisj_encode_alice(&strings(&xs), &inst, &pt).expect("valid input");
        let bob = ordisj_encode_bob(&strings(&ys), &inst, &pt).expect("valid input");
        let disj = alice.points().intersection(bob.points()).next().is_none();
        let decoded = ordisj_decode(disj);
        let truth = xs.iter().zip(&ys).any(|(&x, &y)| x & y == 0);
        if decoded == truth {
            None
        } else {
            Some(format!(
                "x={xs:?} y={ys:?}: decoded {} but direct OR is {}",
                decoded as u8, truth as u8
            ))
        }
    });
    Ok(finish(
        "reduction-ordisj",
        format!("d={d} k={k} m={m}"),
        cases,
        outcome,
        start,
    ))
}

// ---------------------------------------------------------------------------
// GCD protocol
// ---------------------------------------------------------------------------

/// Input coverage for [`check_gcd_protocol`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GcdMode {
    /// Every pair in [1,k]², each run under `seeds_per_pair` seeds.
    Exhaustive { seeds_per_pair: u32 },
    /// `pairs` uniform pairs, each under `seeds_per_pair` seeds.
    Sample { pairs: u64, seeds_per_pair: u32 },
}

/// Protocol output equals Euclid's gcd for every covered (pair, seed);
/// a pair counts as one case and fails if any of its seeds disagrees.
pub fn check_gcd_protocol(
    k: u64,
    mode: GcdMode,
    delta: f64,
    seed: u64,
) -> Result<ClaimReport, VerifyError> {
    let start = Instant::now();
    let proto = gcd_protocol(k, delta)?;
    let (pairs, seeds_per_pair): (Vec<(u64, u64)>, u32) = match mode {
        GcdMode::Exhaustive { seeds_per_pair } => {
            check_cap("gcd-protocol", k * k * seeds_per_pair as u64)?;
            let all = (0..k * k).map(|i| (i / k + 1, i % k + 1)).collect();
            (all, seeds_per_pair)
        }
        GcdMode::Sample { pairs, seeds_per_pair } => {
            check_cap("gcd-protocol", pairs * seeds_per_pair as u64)?;
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let drawn = (0..pairs)
                .map(|_| (rng.gen_range(1..=k), rng.gen_range(1..=k)))
                .collect();
            (drawn, seeds_per_pair)
        }
    };
    let cases = pairs.len() as u64;

    let outcome = run_cases(cases, |idx| {
        let (a, b) = pairs[idx as usize];
        let want = euclid_gcd(a, b).expect("inputs ≥ 1");
        for s in 0..seeds_per_pair {
            let run_seed = splitmix64(splitmix64(seed ^ idx) ^ s as u64);
            let outcome = run(&proto, &a, &b, run_seed).expect("inputs in range");
            if outcome.answer != want {
                return Some(format!(
                    "gcd({a},{b}) seed {run_seed}: protocol said {} want {want}",
                    outcome.answer
                ));
            }
        }
        None
    });
    let mode_str = match mode {
        GcdMode::Exhaustive { seeds_per_pair } => {
            format!("mode=exhaustive seeds={seeds_per_pair}")
        }
        GcdMode::Sample { pairs, seeds_per_pair } => {
            format!("mode=sample:{pairs} seeds={seeds_per_pair}")
        }
    };
    Ok(finish(
        "gcd-protocol",
        format!("k={k} {mode_str} delta={delta} seed={seed}"),
        cases,
        outcome,
        start,
    ))
}

// ---------------------------------------------------------------------------
// Default suite
// ---------------------------------------------------------------------------

/// Claim ids the suite knows, in suite order.
pub const SUITE_CLAIM_IDS: &[&str] = &[
    "interval-claim",
    "observation-blocks",
    "grid-claims",
    "subset-divides",
    "reduction-augindex",
    "reduction-ordisj",
    "gcd-protocol",
];

/// All reports for one claim id at its standard parameter points.
pub fn suite_claim(id: &str) -> Result<Vec<ClaimReport>, VerifyError> {
    const INTERVAL_POINTS: [(u64, u64); 3] = [(1, 4), (2, 4), (1, 8)];
    let mut reports = Vec::new();
    match id {
        "interval-claim" => {
            for (d, m) in INTERVAL_POINTS {
                reports.push(check_interval_claim(&build_interval_instance(d * (m + 2), d)?)?);
            }
        }
        "observation-blocks" => {
            for (d, m) in INTERVAL_POINTS {
                reports.push(check_observation_blocks(d, m)?);
            }
        }
        "grid-claims" => {
            for (d, m) in INTERVAL_POINTS {
                reports.push(check_grid_claims(&build_grid_instance(d * m * m, d)?)?);
            }
        }
        "subset-divides" => {
            for k in 1..=8 {
                reports.push(check_subset_divides(k)?);
            }
        }
        "reduction-augindex" => {
            for (d, m) in INTERVAL_POINTS {
                reports.push(check_reduction_augindex(d, m)?);
            }
        }
        "reduction-ordisj" => {
            for (d, k) in [(1u64, 2usize), (2, 2), (1, 3)] {
                reports.push(check_reduction_ordisj(d, k)?);
            }
        }
        "gcd-protocol" => {
            reports.push(check_gcd_protocol(
                60,
                GcdMode::Exhaustive { seeds_per_pair: 10 },
                0.1,
                1,
            )?);
        }
        other => return Err(VerifyError::UnknownClaim(other.to_string())),
    }
    Ok(reports)
}

/// The full claim suite at the standard parameter points.
pub fn default_suite() -> Result<Vec<ClaimReport>, VerifyError> {
    let mut reports = Vec::new();
    for id in SUITE_CLAIM_IDS {
        reports.extend(suite_claim(id)?);
    }
    Ok(reports)
}
