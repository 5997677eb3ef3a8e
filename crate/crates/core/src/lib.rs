//! Workbench for anchored set systems and bit-exact two-party protocols.
//!
//! The crate builds two families of hard instances for set disjointness —
//! anchored intervals on a line and lattice lines on a union of grids —
//! computes exact VC dimensions and communication-matrix rank floors for
//! them, and runs the associated reductions and randomized protocols with
//! exact transcript bit accounting.
//!
//! Module layout:
//!
//! * [`encoding`] — bit strings, prime tables, the prime-product map Φ.
//! * [`setsystems`] — interval and grid instances plus their set families.
//! * [`vcdim`] — shattering search, Sauer–Shelah check, log-rank floors.
//! * [`protocols`] — protocol runtime, transcripts, and the concrete
//!   protocols (full disclosure, sparse intersection, gcd, line
//!   disjointness, majority amplification).
//! * [`reductions`] — augmented-indexing, or-disjointness, and
//!   learn-via-intersection input transformations with decoders.
//! * [`verify`] — brute-force oracles re-deriving every structural claim.
//! * [`cli`] — command-line front end.

pub mod cli;
pub mod encoding;
pub mod protocols;
pub mod reductions;
pub mod setsystems;
pub mod vcdim;
pub mod verify;
