//! The two hard-instance constructions: anchored intervals on a line of
//! disjoint blocks, and lattice lines on a union of well-separated grids.
//!
//! Interval instances split the ground set into `d` blocks of `m + 2`
//! consecutive integers. The left family anchors a subinterval at each
//! block's left endpoint, the right family at its right endpoint, and
//! disjointness of two members reduces to a per-block endpoint
//! comparison.
//!
//! Grid instances place `d` axis-aligned `m × m` integer grids so far
//! apart vertically that no non-negative-slope line through two points
//! of one grid can meet such a line from another grid inside the ground
//! set (`verify_property` checks this exhaustively with exact integer
//! arithmetic). The slope family T₁ takes, per grid, the line through
//! the anchor with slope (a−1)/a; the column family T₂ takes vertical
//! columns. All point membership is decided by cross-multiplication —
//! no floating point anywhere.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// Default cap on the number of members `enumerate_*_family` will build.
pub const DEFAULT_ENUM_CAP: u64 = 1 << 20;

/// Cap on the cross-grid line-pair workload in `verify_property`.
const PROPERTY_PAIR_CAP: u128 = 100_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SetSystemError {
    #[error("block count must be positive")]
    ZeroBlocks,
    #[error("block count {d} does not divide ground size {n}")]
    NotDivisible { n: u64, d: u64 },
    #[error("interval shape: n/d - 2 = {m} must be a power of two >= 2")]
    BadIntervalShape { m: i64 },
    #[error("grid shape: n/d = {q} must be a perfect square with root >= 2")]
    BadGridShape { q: u64 },
    #[error("parameter {value} for block {block} outside [{lo}, {hi}]")]
    ParamOutOfRange { block: usize, value: u64, lo: u64, hi: u64 },
    #[error("parameter vector has {got} entries, instance has {want} blocks")]
    ParamCountMismatch { got: usize, want: usize },
    #[error("members come from different instances")]
    InstanceMismatch,
    #[error("enumeration of {members} members exceeds cap {cap}")]
    EnumerationCap { members: u128, cap: u64 },
    #[error("property-check workload {work} exceeds cap {cap}")]
    PropertyCap { work: u128, cap: u128 },
}

/// Identifies the instance a family member was generated from, so that
/// set operations can reject cross-instance mixes. The anchors are a
/// deterministic function of (kind, n, d), so this triple is enough.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum InstanceTag {
    Interval { n: u64, d: u64 },
    Grid { n: u64, d: u64 },
}

// ---------------------------------------------------------------------------
// Interval instances
// ---------------------------------------------------------------------------

/// Ground set of `d` disjoint blocks J_{pᵢ} = {pᵢ, …, pᵢ+m+1} with
/// m = n/d − 2 a power of two and anchors pᵢ = (i−1)(m+3).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalInstance {
    n: u64,
    d: u64,
    m: u64,
    anchors: Vec<i64>,
}

pub fn build_interval_instance(n: u64, d: u64) -> Result<IntervalInstance, SetSystemError> {
    if d == 0 {
        return Err(SetSystemError::ZeroBlocks);
    }
    if !n.is_multiple_of(d) {
        return Err(SetSystemError::NotDivisible { n, d });
    }
    let m = n as i64 / d as i64 - 2;
    if m < 2 || !(m as u64).is_power_of_two() {
        return Err(SetSystemError::BadIntervalShape { m });
    }
    let m = m as u64;
    let anchors = (0..d).map(|i| (i as i64) * (m as i64 + 3)).collect();
    Ok(IntervalInstance { n, d, m, anchors })
}

impl IntervalInstance {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn anchors(&self) -> &[i64] {
        &self.anchors
    }

    pub fn tag(&self) -> InstanceTag {
        InstanceTag::Interval { n: self.n, d: self.d }
    }

    /// Inclusive endpoints of block `i` (0-based): [pᵢ, pᵢ+m+1].
    pub fn block_range(&self, i: usize) -> (i64, i64) {
        let p = self.anchors[i];
        (p, p + self.m as i64 + 1)
    }

    /// All ground points, ascending.
    pub fn ground_points(&self) -> Vec<i64> {
        let mut pts = Vec::with_capacity(self.n as usize);
        for i in 0..self.d as usize {
            let (lo, hi) = self.block_range(i);
            pts.extend(lo..=hi);
        }
        pts
    }
}

/// Which endpoint the per-block subintervals are anchored at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    /// Family R₀: block-i interval starts at pᵢ.
    Left,
    /// Family R_{m+1}: block-i interval ends at pᵢ+m+1.
    Right,
}

/// One member of an anchored-interval family, with explicit points.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct AnchoredIntervalSet {
    tag: InstanceTag,
    side: Side,
    /// Number of points of the block-i subinterval, each in [1, m+2].
    lengths: Vec<u64>,
    points: BTreeSet<i64>,
}

impl AnchoredIntervalSet {
    /// Builds a member from per-block point counts in [1, m+2].
    pub fn from_lengths(
        inst: &IntervalInstance,
        side: Side,
        lengths: &[u64],
    ) -> Result<Self, SetSystemError> {
        check_params(lengths, inst.d, 1, inst.m + 2)?;
        let mut points = BTreeSet::new();
        for (i, &len) in lengths.iter().enumerate() {
            let (lo, hi) = inst.block_range(i);
            let len = len as i64;
            match side {
                Side::Left => points.extend(lo..lo + len),
                Side::Right => points.extend(hi - len + 1..=hi),
            }
        }
        Ok(AnchoredIntervalSet {
            tag: inst.tag(),
            side,
            lengths: lengths.to_vec(),
            points,
        })
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn lengths(&self) -> &[u64] {
        &self.lengths
    }

    pub fn points(&self) -> &BTreeSet<i64> {
        &self.points
    }

    pub fn tag(&self) -> InstanceTag {
        self.tag
    }
}

/// R member for Alice's side: block-i interval [pᵢ, pᵢ+m−aᵢ], aᵢ ∈ [0, m−1].
pub fn generate_left(
    inst: &IntervalInstance,
    a: &[u64],
) -> Result<AnchoredIntervalSet, SetSystemError> {
    check_params(a, inst.d, 0, inst.m - 1)?;
    let lengths: Vec<u64> = a.iter().map(|&ai| inst.m - ai + 1).collect();
    AnchoredIntervalSet::from_lengths(inst, Side::Left, &lengths)
}

/// R member for Bob's side: block-i interval [pᵢ+m+1−bᵢ, pᵢ+m+1], bᵢ ∈ [0, m−1].
pub fn generate_right(
    inst: &IntervalInstance,
    b: &[u64],
) -> Result<AnchoredIntervalSet, SetSystemError> {
    check_params(b, inst.d, 0, inst.m - 1)?;
    let lengths: Vec<u64> = b.iter().map(|&bi| bi + 1).collect();
    AnchoredIntervalSet::from_lengths(inst, Side::Right, &lengths)
}

fn check_params(params: &[u64], d: u64, lo: u64, hi: u64) -> Result<(), SetSystemError> {
    if params.len() != d as usize {
        return Err(SetSystemError::ParamCountMismatch {
            got: params.len(),
            want: d as usize,
        });
    }
    for (block, &value) in params.iter().enumerate() {
        if value < lo || value > hi {
            return Err(SetSystemError::ParamOutOfRange { block, value, lo, hi });
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Grid instances
// ---------------------------------------------------------------------------

/// An integer lattice point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GridPoint {
    pub x: i64,
    pub y: i64,
}

impl GridPoint {
    pub fn new(x: i64, y: i64) -> Self {
        GridPoint { x, y }
    }
}

impl fmt::Display for GridPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// Ground set of `d` disjoint m×m grids G_{(pᵢ,qᵢ)}, m = √(n/d).
///
/// The anchor formula pᵢ = (i−1)·2m, qᵢ = (i−1)·(m + (m−1)·(2md + m))
/// spaces the grids so that every non-negative-slope line through two
/// points of one grid clears every other grid's vertical band entirely,
/// which is what makes the cross-grid no-interior-intersection property
/// hold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridInstance {
    n: u64,
    d: u64,
    m: u64,
    anchors: Vec<(i64, i64)>,
}

pub fn build_grid_instance(n: u64, d: u64) -> Result<GridInstance, SetSystemError> {
    if d == 0 {
        return Err(SetSystemError::ZeroBlocks);
    }
    if !n.is_multiple_of(d) {
        return Err(SetSystemError::NotDivisible { n, d });
    }
    let q = n / d;
    let m = (q as f64).sqrt().round() as u64;
    if m < 2 || m * m != q {
        return Err(SetSystemError::BadGridShape { q });
    }
    let mi = m as i64;
    let di = d as i64;
    let vstep = mi + (mi - 1) * (2 * mi * di + mi);
    let anchors = (0..di).map(|i| (i * 2 * mi, i * vstep)).collect();
    Ok(GridInstance { n, d, m, anchors })
}

impl GridInstance {
    /// An instance with explicit anchors, bypassing the placement rule.
    /// Exists so that adversarial placements can be fed to
    /// `verify_property`; the shape constraints still apply.
    pub fn with_anchors(d: u64, m: u64, anchors: Vec<(i64, i64)>) -> Result<Self, SetSystemError> {
        if d == 0 {
            return Err(SetSystemError::ZeroBlocks);
        }
        if m < 2 {
            return Err(SetSystemError::BadGridShape { q: m * m });
        }
        if anchors.len() != d as usize {
            return Err(SetSystemError::ParamCountMismatch {
                got: anchors.len(),
                want: d as usize,
            });
        }
        Ok(GridInstance { n: d * m * m, d, m, anchors })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn anchors(&self) -> &[(i64, i64)] {
        &self.anchors
    }

    pub fn tag(&self) -> InstanceTag {
        InstanceTag::Grid { n: self.n, d: self.d }
    }

    /// All points of grid `i` (0-based), row-major ascending.
    pub fn grid_points(&self, i: usize) -> Vec<GridPoint> {
        let (p, q) = self.anchors[i];
        let m = self.m as i64;
        let mut pts = Vec::with_capacity((m * m) as usize);
        for dx in 0..m {
            for dy in 0..m {
                pts.push(GridPoint::new(p + dx, q + dy));
            }
        }
        pts
    }

    /// Which grid contains `pt`, if any.
    pub fn grid_of(&self, pt: GridPoint) -> Option<usize> {
        let m = self.m as i64;
        self.anchors
            .iter()
            .position(|&(p, q)| pt.x >= p && pt.x < p + m && pt.y >= q && pt.y < q + m)
    }

    /// All ground points, ascending.
    pub fn ground_points(&self) -> Vec<GridPoint> {
        let mut pts = Vec::with_capacity(self.n as usize);
        for i in 0..self.d as usize {
            pts.extend(self.grid_points(i));
        }
        pts.sort();
        pts
    }
}

/// Which per-grid generator a line-family member uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LineKind {
    /// Family T₁: per-grid line through (pᵢ,qᵢ) with slope (aᵢ−1)/aᵢ.
    Slope,
    /// Family T₂: per-grid vertical column x = pᵢ + bᵢ.
    Vertical,
}

/// One member of a line family, with explicit points.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct LineFamilySet {
    tag: InstanceTag,
    kind: LineKind,
    params: Vec<u64>,
    points: BTreeSet<GridPoint>,
}

impl LineFamilySet {
    pub fn kind(&self) -> LineKind {
        self.kind
    }

    pub fn params(&self) -> &[u64] {
        &self.params
    }

    pub fn points(&self) -> &BTreeSet<GridPoint> {
        &self.points
    }

    pub fn tag(&self) -> InstanceTag {
        self.tag
    }

    /// The member's points inside grid `i`.
    pub fn block_points(&self, inst: &GridInstance, i: usize) -> BTreeSet<GridPoint> {
        self.points
            .iter()
            .copied()
            .filter(|&pt| inst.grid_of(pt) == Some(i))
            .collect()
    }
}

/// T₁ member: per grid i the lattice points of the line through the
/// anchor with slope (aᵢ−1)/aᵢ, aᵢ ∈ [1, m−1]:
/// { (pᵢ+x, qᵢ+(aᵢ−1)x/aᵢ) : x ∈ [0, m−1], aᵢ | (aᵢ−1)x, y-offset ≤ m−1 }.
pub fn generate_t1(inst: &GridInstance, a: &[u64]) -> Result<LineFamilySet, SetSystemError> {
    check_params(a, inst.d, 1, inst.m - 1)?;
    let m = inst.m as i64;
    let mut points = BTreeSet::new();
    for (i, &ai) in a.iter().enumerate() {
        let (p, q) = inst.anchors[i];
        let ai = ai as i64;
        for x in 0..m {
            if ((ai - 1) * x) % ai == 0 {
                let y = (ai - 1) * x / ai;
                if y < m {
                    points.insert(GridPoint::new(p + x, q + y));
                }
            }
        }
    }
    Ok(LineFamilySet {
        tag: inst.tag(),
        kind: LineKind::Slope,
        params: a.to_vec(),
        points,
    })
}

/// T₂ member: per grid i the column x = pᵢ + bᵢ, bᵢ ∈ [0, m−1].
pub fn generate_t2(inst: &GridInstance, b: &[u64]) -> Result<LineFamilySet, SetSystemError> {
    check_params(b, inst.d, 0, inst.m - 1)?;
    let m = inst.m as i64;
    let mut points = BTreeSet::new();
    for (i, &bi) in b.iter().enumerate() {
        let (p, q) = inst.anchors[i];
        for y in 0..m {
            points.insert(GridPoint::new(p + bi as i64, q + y));
        }
    }
    Ok(LineFamilySet {
        tag: inst.tag(),
        kind: LineKind::Vertical,
        params: b.to_vec(),
        points,
    })
}

// ---------------------------------------------------------------------------
// Set operations and enumeration
// ---------------------------------------------------------------------------

/// Anything with explicit points over a tagged instance.
pub trait FamilyMember {
    type Point: Ord + Copy;
    fn member_points(&self) -> &BTreeSet<Self::Point>;
    fn member_tag(&self) -> InstanceTag;
}

impl FamilyMember for AnchoredIntervalSet {
    type Point = i64;
    fn member_points(&self) -> &BTreeSet<i64> {
        &self.points
    }
    fn member_tag(&self) -> InstanceTag {
        self.tag
    }
}

impl FamilyMember for LineFamilySet {
    type Point = GridPoint;
    fn member_points(&self) -> &BTreeSet<GridPoint> {
        &self.points
    }
    fn member_tag(&self) -> InstanceTag {
        self.tag
    }
}

/// Exact intersection of two members over the same instance.
pub fn intersect<M: FamilyMember>(
    a: &M,
    b: &M,
) -> Result<BTreeSet<M::Point>, SetSystemError> {
    if a.member_tag() != b.member_tag() {
        return Err(SetSystemError::InstanceMismatch);
    }
    Ok(a.member_points()
        .intersection(b.member_points())
        .copied()
        .collect())
}

/// Which interval family to enumerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntervalFamily {
    /// R₀ — all left-anchored members, lengths 1..=m+2 per block.
    R0,
    /// R_{m+1} — all right-anchored members, lengths 1..=m+2 per block.
    Rm1,
}

/// Which line family to enumerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineFamily {
    /// T₁ — slope parameters a ∈ [1, m−1] per grid.
    T1,
    /// T₂ — columns b ∈ [0, m−1] per grid.
    T2,
}

/// Every member of R₀ or R_{m+1}, one per per-block length tuple.
pub fn enumerate_interval_family(
    inst: &IntervalInstance,
    which: IntervalFamily,
    cap: u64,
) -> Result<Vec<AnchoredIntervalSet>, SetSystemError> {
    let side = match which {
        IntervalFamily::R0 => Side::Left,
        IntervalFamily::Rm1 => Side::Right,
    };
    let tuples = ParamTuples::new(1, inst.m + 2, inst.d as usize, cap)?;
    tuples
        .map(|lengths| AnchoredIntervalSet::from_lengths(inst, side, &lengths))
        .collect()
}

/// Every member of T₁ or T₂, one per per-grid parameter tuple.
pub fn enumerate_line_family(
    inst: &GridInstance,
    which: LineFamily,
    cap: u64,
) -> Result<Vec<LineFamilySet>, SetSystemError> {
    let (lo, hi) = match which {
        LineFamily::T1 => (1, inst.m - 1),
        LineFamily::T2 => (0, inst.m - 1),
    };
    let tuples = ParamTuples::new(lo, hi, inst.d as usize, cap)?;
    tuples
        .map(|params| match which {
            LineFamily::T1 => generate_t1(inst, &params),
            LineFamily::T2 => generate_t2(inst, &params),
        })
        .collect()
}

/// Odometer over [lo, hi]^d in lexicographic order.
struct ParamTuples {
    lo: u64,
    hi: u64,
    current: Option<Vec<u64>>,
}

impl ParamTuples {
    fn new(lo: u64, hi: u64, d: usize, cap: u64) -> Result<Self, SetSystemError> {
        let width = (hi - lo + 1) as u128;
        let members = width.pow(d as u32);
        if members > cap as u128 {
            return Err(SetSystemError::EnumerationCap { members, cap });
        }
        Ok(ParamTuples {
            lo,
            hi,
            current: Some(vec![lo; d]),
        })
    }
}

impl Iterator for ParamTuples {
    type Item = Vec<u64>;

    fn next(&mut self) -> Option<Vec<u64>> {
        let current = self.current.take()?;
        let mut next = current.clone();
        // Advance the odometer from the last position.
        let mut pos = next.len();
        loop {
            if pos == 0 {
                self.current = None;
                break;
            }
            pos -= 1;
            if next[pos] < self.hi {
                next[pos] += 1;
                for slot in next.iter_mut().skip(pos + 1) {
                    *slot = self.lo;
                }
                self.current = Some(next);
                break;
            }
        }
        Some(current)
    }
}

// ---------------------------------------------------------------------------
// PROPERTY verification
// ---------------------------------------------------------------------------

/// Result of the cross-grid line-intersection check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PropertyOutcome {
    Pass,
    /// Two cross-grid non-negative-slope lines meet at this ground point.
    Fail { witness: GridPoint },
}

/// A line ax + by = c in normalized integer form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Line {
    a: i128,
    b: i128,
    c: i128,
}

impl Line {
    /// The line through two distinct points, normalized (gcd 1, leading
    /// coefficient positive).
    fn through(p: GridPoint, q: GridPoint) -> Line {
        let a = (q.y - p.y) as i128;
        let b = (p.x - q.x) as i128;
        let c = a * p.x as i128 + b * p.y as i128;
        let g = gcd_i128(gcd_i128(a.abs(), b.abs()), c.abs()).max(1);
        let (mut a, mut b, mut c) = (a / g, b / g, c / g);
        if a < 0 || (a == 0 && b < 0) {
            a = -a;
            b = -b;
            c = -c;
        }
        Line { a, b, c }
    }

    /// Slope ≥ 0 (vertical counts): direction (−b, a) must not mix signs.
    fn has_nonneg_slope(&self) -> bool {
        // Slope = −a/b for ax + by = c; vertical when b = 0.
        if self.b == 0 {
            return true;
        }
        // dy/dx = -a/b; non-negative iff a and b have opposite signs or a == 0.
        self.a == 0 || (self.a > 0) != (self.b > 0)
    }
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut x, mut y) = (a.abs(), b.abs());
    while y != 0 {
        (x, y) = (y, x % y);
    }
    x
}

/// Exhaustively checks that no non-negative-slope line through two
/// points of one grid meets such a line from a different grid at a
/// point of the ground set. Exact integer arithmetic throughout.
pub fn verify_property(inst: &GridInstance) -> Result<PropertyOutcome, SetSystemError> {
    let d = inst.d as usize;
    let m = inst.m;
    // Build the deduplicated per-grid line sets.
    let per_grid_pairs = (m * m) as u128 * ((m * m - 1) as u128) / 2;
    let build_work = d as u128 * per_grid_pairs;
    if build_work > PROPERTY_PAIR_CAP {
        return Err(SetSystemError::PropertyCap {
            work: build_work,
            cap: PROPERTY_PAIR_CAP,
        });
    }
    let mut grid_lines: Vec<Vec<Line>> = Vec::with_capacity(d);
    for i in 0..d {
        let pts = inst.grid_points(i);
        let mut lines = BTreeSet::new();
        for (s, &p) in pts.iter().enumerate() {
            for &q in &pts[s + 1..] {
                let line = Line::through(p, q);
                if line.has_nonneg_slope() {
                    lines.insert(line);
                }
            }
        }
        grid_lines.push(lines.into_iter().collect());
    }
    let mut cross_work: u128 = 0;
    for i in 0..d {
        for j in i + 1..d {
            cross_work += grid_lines[i].len() as u128 * grid_lines[j].len() as u128;
        }
    }
    if cross_work > PROPERTY_PAIR_CAP {
        return Err(SetSystemError::PropertyCap {
            work: cross_work,
            cap: PROPERTY_PAIR_CAP,
        });
    }

    let ground: BTreeSet<GridPoint> = inst.ground_points().into_iter().collect();
    for i in 0..d {
        for j in i + 1..d {
            for li in &grid_lines[i] {
                for lj in &grid_lines[j] {
                    if let Some(witness) = lines_meet_in(li, lj, &ground) {
                        return Ok(PropertyOutcome::Fail { witness });
                    }
                }
            }
        }
    }
    Ok(PropertyOutcome::Pass)
}

/// If the two lines share a point of `ground`, returns it.
fn lines_meet_in(l1: &Line, l2: &Line, ground: &BTreeSet<GridPoint>) -> Option<GridPoint> {
    let det = l1.a * l2.b - l2.a * l1.b;
    if det == 0 {
        if l1 == l2 {
            // Coincident lines: every ground point on the common line is
            // a shared point. Both generating grids contribute points on
            // it, so scan the ground set.
            return ground
                .iter()
                .copied()
                .find(|pt| l1.a * pt.x as i128 + l1.b * pt.y as i128 == l1.c);
        }
        return None; // Parallel, distinct.
    }
    let xn = l1.c * l2.b - l2.c * l1.b;
    let yn = l1.a * l2.c - l2.a * l1.c;
    // The intersection (xn/det, yn/det) is in the ground set only if it
    // is an integer lattice point.
    if xn % det != 0 || yn % det != 0 {
        return None;
    }
    let pt = GridPoint::new((xn / det) as i64, (yn / det) as i64);
    ground.contains(&pt).then_some(pt)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[i64]) -> BTreeSet<i64> {
        v.iter().copied().collect()
    }

    fn gpts(v: &[(i64, i64)]) -> BTreeSet<GridPoint> {
        v.iter().map(|&(x, y)| GridPoint::new(x, y)).collect()
    }

    #[test]
    fn interval_instance_shapes() {
        let inst = build_interval_instance(12, 2).unwrap();
        assert_eq!(inst.m(), 4);
        assert_eq!(inst.anchors(), &[0, 7]);
        assert_eq!(inst.block_range(0), (0, 5));
        assert_eq!(inst.block_range(1), (7, 12));

        let inst = build_interval_instance(6, 1).unwrap();
        assert_eq!(inst.m(), 4);
        assert_eq!(inst.anchors(), &[0]);

        assert_eq!(
            build_interval_instance(10, 3),
            Err(SetSystemError::NotDivisible { n: 10, d: 3 })
        );
        // n/d - 2 = 6 is not a power of two.
        assert_eq!(
            build_interval_instance(8, 1),
            Err(SetSystemError::BadIntervalShape { m: 6 })
        );
    }

    #[test]
    fn generate_left_examples() {
        let inst = build_interval_instance(6, 1).unwrap();
        assert_eq!(*generate_left(&inst, &[0]).unwrap().points(), pts(&[0, 1, 2, 3, 4]));
        assert_eq!(*generate_left(&inst, &[3]).unwrap().points(), pts(&[0, 1]));
        assert!(matches!(
            generate_left(&inst, &[4]),
            Err(SetSystemError::ParamOutOfRange { .. })
        ));

        let inst2 = build_interval_instance(12, 2).unwrap();
        assert_eq!(
            *generate_left(&inst2, &[2, 0]).unwrap().points(),
            pts(&[0, 1, 2, 7, 8, 9, 10, 11])
        );
    }

    #[test]
    fn generate_right_examples() {
        let inst = build_interval_instance(6, 1).unwrap();
        assert_eq!(*generate_right(&inst, &[0]).unwrap().points(), pts(&[5]));
        assert_eq!(*generate_right(&inst, &[3]).unwrap().points(), pts(&[2, 3, 4, 5]));

        let inst2 = build_interval_instance(12, 2).unwrap();
        assert_eq!(
            *generate_right(&inst2, &[1, 1]).unwrap().points(),
            pts(&[4, 5, 11, 12])
        );
    }

    #[test]
    fn grid_instance_shapes() {
        let inst = build_grid_instance(16, 1).unwrap();
        assert_eq!(inst.m(), 4);
        assert_eq!(inst.anchors(), &[(0, 0)]);

        let inst = build_grid_instance(32, 2).unwrap();
        assert_eq!(inst.m(), 4);
        assert_eq!(inst.anchors(), &[(0, 0), (8, 64)]);

        assert_eq!(
            build_grid_instance(12, 2),
            Err(SetSystemError::BadGridShape { q: 6 })
        );
    }

    #[test]
    fn generate_t1_examples() {
        let inst = build_grid_instance(16, 1).unwrap();
        assert_eq!(*generate_t1(&inst, &[2]).unwrap().points(), gpts(&[(0, 0), (2, 1)]));
        assert_eq!(
            *generate_t1(&inst, &[1]).unwrap().points(),
            gpts(&[(0, 0), (1, 0), (2, 0), (3, 0)])
        );
        assert_eq!(*generate_t1(&inst, &[3]).unwrap().points(), gpts(&[(0, 0), (3, 2)]));
        assert!(generate_t1(&inst, &[0]).is_err());
        assert!(generate_t1(&inst, &[4]).is_err());
    }

    #[test]
    fn generate_t2_examples() {
        let inst = build_grid_instance(16, 1).unwrap();
        assert_eq!(
            *generate_t2(&inst, &[2]).unwrap().points(),
            gpts(&[(2, 0), (2, 1), (2, 2), (2, 3)])
        );
        assert_eq!(
            *generate_t2(&inst, &[0]).unwrap().points(),
            gpts(&[(0, 0), (0, 1), (0, 2), (0, 3)])
        );

        let inst2 = build_grid_instance(32, 2).unwrap();
        let member = generate_t2(&inst2, &[1, 3]).unwrap();
        let expected: BTreeSet<GridPoint> = (0..4)
            .map(|y| GridPoint::new(1, y))
            .chain((0..4).map(|y| GridPoint::new(11, 64 + y)))
            .collect();
        assert_eq!(*member.points(), expected);
    }

    #[test]
    fn intersect_examples() {
        let inst = build_interval_instance(6, 1).unwrap();
        let a = generate_left(&inst, &[2]).unwrap();
        let b = generate_right(&inst, &[3]).unwrap();
        assert_eq!(intersect(&a, &b).unwrap(), pts(&[2]));
        assert_eq!(intersect(&a, &a).unwrap(), *a.points());

        let gi = build_grid_instance(16, 1).unwrap();
        let t1 = generate_t1(&gi, &[2]).unwrap();
        let t2 = generate_t2(&gi, &[2]).unwrap();
        assert_eq!(intersect(&t1, &t2).unwrap(), gpts(&[(2, 1)]));

        let other = build_interval_instance(12, 2).unwrap();
        let c = generate_left(&other, &[0, 0]).unwrap();
        assert_eq!(intersect(&a, &c), Err(SetSystemError::InstanceMismatch));
    }

    #[test]
    fn enumeration_counts() {
        let inst = build_interval_instance(6, 1).unwrap();
        let r0 = enumerate_interval_family(&inst, IntervalFamily::R0, DEFAULT_ENUM_CAP).unwrap();
        assert_eq!(r0.len(), 6);
        assert_eq!(*r0[0].points(), pts(&[0]));
        assert_eq!(*r0[5].points(), pts(&[0, 1, 2, 3, 4, 5]));

        let gi = build_grid_instance(16, 1).unwrap();
        assert_eq!(
            enumerate_line_family(&gi, LineFamily::T2, DEFAULT_ENUM_CAP).unwrap().len(),
            4
        );

        let gi2 = build_grid_instance(32, 2).unwrap();
        assert_eq!(
            enumerate_line_family(&gi2, LineFamily::T1, DEFAULT_ENUM_CAP).unwrap().len(),
            9
        );

        assert!(matches!(
            enumerate_interval_family(&inst, IntervalFamily::R0, 3),
            Err(SetSystemError::EnumerationCap { members: 6, cap: 3 })
        ));
    }

    #[test]
    fn members_stay_inside_their_blocks() {
        let inst = build_interval_instance(12, 2).unwrap();
        for which in [IntervalFamily::R0, IntervalFamily::Rm1] {
            for member in enumerate_interval_family(&inst, which, DEFAULT_ENUM_CAP).unwrap() {
                for &pt in member.points() {
                    let in_block = (0..2).any(|i| {
                        let (lo, hi) = inst.block_range(i);
                        pt >= lo && pt <= hi
                    });
                    assert!(in_block, "point {pt} escapes its block");
                }
            }
        }

        let gi = build_grid_instance(32, 2).unwrap();
        for which in [LineFamily::T1, LineFamily::T2] {
            for member in enumerate_line_family(&gi, which, DEFAULT_ENUM_CAP).unwrap() {
                for &pt in member.points() {
                    assert!(gi.grid_of(pt).is_some(), "point {pt} outside every grid");
                }
            }
        }
    }

    #[test]
    fn lattice_divisibility_rule() {
        // Block lines meet at a grid point iff a | b (with the in-range
        // conditions holding automatically for parameters in range).
        for m in [4u64, 8] {
            let inst = build_grid_instance(m * m, 1).unwrap();
            for a in 1..m {
                let t1 = generate_t1(&inst, &[a]).unwrap();
                for b in 0..m {
                    let t2 = generate_t2(&inst, &[b]).unwrap();
                    let meet = intersect(&t1, &t2).unwrap();
                    let rule = b % a == 0 && b.saturating_sub(b / a) < m && b < m;
                    assert_eq!(!meet.is_empty(), rule, "m={m} a={a} b={b}");
                    if rule {
                        let y = (b - b / a) as i64;
                        assert_eq!(meet, gpts(&[(b as i64, y)]));
                    }
                }
            }
        }
    }

    #[test]
    fn property_holds_for_placement() {
        let inst = build_grid_instance(32, 2).unwrap();
        assert_eq!(verify_property(&inst).unwrap(), PropertyOutcome::Pass);
        let single = build_grid_instance(16, 1).unwrap();
        assert_eq!(verify_property(&single).unwrap(), PropertyOutcome::Pass);
    }

    #[test]
    fn property_fails_for_adversarial_anchors() {
        let inst = GridInstance::with_anchors(2, 4, vec![(0, 0), (8, 0)]).unwrap();
        match verify_property(&inst).unwrap() {
            PropertyOutcome::Fail { witness } => {
                assert!(inst.grid_of(witness).is_some());
            }
            PropertyOutcome::Pass => panic!("expected a violation witness"),
        }
    }

    #[test]
    fn interval_disjointness_is_per_block_endpoint_comparison() {
        // Members from the generator ranges: block i disjoint iff bᵢ ≤ aᵢ.
        let inst = build_interval_instance(12, 2).unwrap();
        for a0 in 0..4u64 {
            for a1 in 0..4u64 {
                let left = generate_left(&inst, &[a0, a1]).unwrap();
                for b0 in 0..4u64 {
                    for b1 in 0..4u64 {
                        let right = generate_right(&inst, &[b0, b1]).unwrap();
                        let blocks_disjoint = b0 <= a0 && b1 <= a1;
                        let empty = intersect(&left, &right).unwrap().is_empty();
                        assert_eq!(empty, blocks_disjoint);
                    }
                }
            }
        }
    }
}
