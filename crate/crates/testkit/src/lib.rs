//! Test-only oracles and fixture builders.
//!
//! The oracles here are deliberately independent re-implementations of
//! the rules the production code implements: plain triple arithmetic and
//! exhaustive pairwise scans, with none of the interval or grouping
//! machinery. Tests compare the two routes.

pub mod fixtures;
pub mod gen;
pub mod oracle;

pub use fixtures::{build_tarball, PackumentBuilder};
