//! Core library for historical analysis of semantic versioning in
//! npm-style package ecosystems.
//!
//! The pieces fit together as a pipeline:
//!
//! 1. [`store`] ingests registry change feeds and OSV advisories into an
//!    append-only metadata store with time-scoped queries.
//! 2. [`miner`] extracts chronologically consistent updates from each
//!    package's history and tags their increment type and security effect.
//! 3. [`proxy`] serves time-filtered packuments over HTTP so a stock npm
//!    client resolves dependencies as of any past instant.
//! 4. [`resolver`] is a deterministic flat resolver for offline
//!    experiments where driving a real client is impractical.
//! 5. [`analysis`] computes constraint-usage, technical-lag, and
//!    update-flow statistics; [`diff`] classifies what updates change.

pub mod advisory;
pub mod analysis;
pub mod diff;
pub mod miner;
pub mod proxy;
pub mod report;
pub mod resolver;
pub mod semver;
pub mod store;
pub mod synth;
pub mod time;

pub use advisory::{Advisory, Severity};
pub use miner::{MiningReport, SecurityEffect, Update, UpdateKind};
pub use semver::{
    compare_versions, increment_type, parse_constraint, parse_version, satisfies, Constraint,
    ConstraintCategory, IncrementType, Version,
};
pub use store::{PackageHistory, Store, StoreError, VersionRecord};
pub use time::Timestamp;
