//! Semantic versions and npm-style version constraints.
//!
//! Versions follow the `major.minor.bug` scheme with optional prerelease
//! identifiers and build metadata. The third component is called `bug`
//! throughout this codebase to avoid confusion with security patches.
//!
//! Constraints are classified into six mutually exclusive categories by
//! their surface syntax (`Exact`, `Bug`, `Minor`, `Geq`, `Any`, `Other`)
//! and normalized into half-open version intervals that drive
//! satisfaction checks and resolution.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// A single prerelease identifier. Numeric identifiers order below
/// alphanumeric ones, numerics compare by value, alphanumerics byte-wise.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PrereleaseId {
    Numeric(u64),
    Alpha(String),
}

impl fmt::Display for PrereleaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrereleaseId::Numeric(n) => write!(f, "{n}"),
            PrereleaseId::Alpha(s) => f.write_str(s),
        }
    }
}

/// A parsed semantic version.
///
/// Structural equality includes build metadata so that `parse(render(v)) == v`
/// holds exactly; [`compare_versions`] (the precedence order) ignores it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Version {
    pub major: u64,
    pub minor: u64,
    pub bug: u64,
    pub prerelease: Vec<PrereleaseId>,
    pub build: Option<String>,
}

impl Version {
    pub fn new(major: u64, minor: u64, bug: u64) -> Self {
        Version {
            major,
            minor,
            bug,
            prerelease: Vec::new(),
            build: None,
        }
    }

    pub fn with_prerelease(mut self, ids: &[&str]) -> Self {
        self.prerelease = ids
            .iter()
            .map(|s| match s.parse::<u64>() {
                Ok(n) if !(s.len() > 1 && s.starts_with('0')) => PrereleaseId::Numeric(n),
                _ => PrereleaseId::Alpha((*s).to_string()),
            })
            .collect();
        self
    }

    pub fn is_prerelease(&self) -> bool {
        !self.prerelease.is_empty()
    }

    /// The `(major, minor, bug)` triple.
    pub fn triple(&self) -> (u64, u64, u64) {
        (self.major, self.minor, self.bug)
    }

    /// Render to canonical string form, `major.minor.bug[-pre][+build]`.
    pub fn render(&self) -> String {
        self.to_string()
    }

    /// The smallest version strictly greater than `self` in precedence
    /// order: append a `0` prerelease identifier, or for a release version
    /// step to the next bug number's first prerelease.
    pub fn immediate_successor(&self) -> Version {
        let mut v = self.clone();
        v.build = None;
        if v.prerelease.is_empty() {
            v.bug += 1;
            v.prerelease = vec![PrereleaseId::Numeric(0)];
        } else {
            v.prerelease.push(PrereleaseId::Numeric(0));
        }
        v
    }
}

/// The smallest expressible version, `0.0.0-0`; used as the closed lower
/// bound of unbounded-below intervals.
pub(crate) fn min_version() -> Version {
    Version {
        major: 0,
        minor: 0,
        bug: 0,
        prerelease: vec![PrereleaseId::Numeric(0)],
        build: None,
    }
}

/// Compare two versions by semver precedence. Build metadata is ignored:
/// versions differing only in build compare equal.
pub fn compare_versions(a: &Version, b: &Version) -> Ordering {
    a.major
        .cmp(&b.major)
        .then(a.minor.cmp(&b.minor))
        .then(a.bug.cmp(&b.bug))
        .then_with(|| match (a.prerelease.is_empty(), b.prerelease.is_empty()) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Greater,
            (false, true) => Ordering::Less,
            (false, false) => a.prerelease.cmp(&b.prerelease),
        })
}

impl Ord for Version {
    /// Total order for collections: precedence first, then build metadata
    /// as a final tiebreak so `Ord` stays consistent with `Eq`.
    fn cmp(&self, other: &Self) -> Ordering {
        compare_versions(self, other).then_with(|| self.build.cmp(&other.build))
    }
}

impl PartialOrd for Version {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Version {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}.{}", self.major, self.minor, self.bug)?;
        if !self.prerelease.is_empty() {
            write!(f, "-")?;
            for (i, id) in self.prerelease.iter().enumerate() {
                if i > 0 {
                    write!(f, ".")?;
                }
                write!(f, "{id}")?;
            }
        }
        if let Some(build) = &self.build {
            write!(f, "+{build}")?;
        }
        Ok(())
    }
}

impl FromStr for Version {
    type Err = MalformedVersion;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_version(s)
    }
}

impl Serialize for Version {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Version {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_version(&s).map_err(serde::de::Error::custom)
    }
}

/// Error for version text that does not conform to the semver grammar.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed version {text:?} at offset {offset}: {reason}")]
pub struct MalformedVersion {
    pub text: String,
    pub offset: usize,
    pub reason: String,
}

fn malformed(text: &str, offset: usize, reason: impl Into<String>) -> MalformedVersion {
    MalformedVersion {
        text: text.to_string(),
        offset,
        reason: reason.into(),
    }
}

fn numeric_component(text: &str, body: &str, start: usize) -> Result<(u64, usize), MalformedVersion> {
    let digits: String = body[start..].chars().take_while(|c| c.is_ascii_digit()).collect();
    if digits.is_empty() {
        return Err(malformed(text, start, "expected a numeric component"));
    }
    if digits.len() > 1 && digits.starts_with('0') {
        return Err(malformed(text, start, "numeric component has a leading zero"));
    }
    let value = digits
        .parse::<u64>()
        .map_err(|_| malformed(text, start, "numeric component out of range"))?;
    Ok((value, start + digits.len()))
}

fn parse_prerelease_ids(text: &str, part: &str, offset: usize) -> Result<Vec<PrereleaseId>, MalformedVersion> {
    let mut ids = Vec::new();
    let mut at = offset;
    for id in part.split('.') {
        if id.is_empty() {
            return Err(malformed(text, at, "empty prerelease identifier"));
        }
        if !id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-') {
            return Err(malformed(text, at, "invalid character in prerelease identifier"));
        }
        if id.chars().all(|c| c.is_ascii_digit()) {
            if id.len() > 1 && id.starts_with('0') {
                return Err(malformed(text, at, "numeric prerelease identifier has a leading zero"));
            }
            let n = id
                .parse::<u64>()
                .map_err(|_| malformed(text, at, "numeric prerelease identifier out of range"))?;
            ids.push(PrereleaseId::Numeric(n));
        } else {
            ids.push(PrereleaseId::Alpha(id.to_string()));
        }
        at += id.len() + 1;
    }
    Ok(ids)
}

/// Parse a semantic version string.
///
/// Leading/trailing whitespace and a `v`/`V` prefix are tolerated and
/// normalized away; they are pervasive in real registry data. Partial
/// triples such as `1.2` are range syntax, not versions, and are rejected.
pub fn parse_version(text: &str) -> Result<Version, MalformedVersion> {
    let trimmed = text.trim();
    let lead = text.len() - text.trim_start().len();
    let body = trimmed.strip_prefix(['v', 'V']).unwrap_or(trimmed);
    let v_skip = trimmed.len() - body.len();
    let base = lead + v_skip;

    if body.is_empty() {
        return Err(malformed(text, base, "empty version"));
    }

    let (major, pos) = numeric_component(text, body, 0).map_err(|e| shift(e, base))?;
    let pos = expect_dot(text, body, pos, base)?;
    let (minor, pos) = numeric_component(text, body, pos).map_err(|e| shift(e, base))?;
    let pos = expect_dot(text, body, pos, base)?;
    let (bug, mut pos) = numeric_component(text, body, pos).map_err(|e| shift(e, base))?;

    let mut prerelease = Vec::new();
    if body[pos..].starts_with('-') {
        pos += 1;
        let end = body[pos..].find('+').map(|i| pos + i).unwrap_or(body.len());
        prerelease = parse_prerelease_ids(text, &body[pos..end], base + pos)?;
        pos = end;
    }

    let mut build = None;
    if body[pos..].starts_with('+') {
        pos += 1;
        let meta = &body[pos..];
        if meta.is_empty()
            || !meta
                .split('.')
                .all(|id| !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-'))
        {
            return Err(malformed(text, base + pos, "invalid build metadata"));
        }
        build = Some(meta.to_string());
        pos = body.len();
    }

    if pos != body.len() {
        return Err(malformed(text, base + pos, "trailing characters after version"));
    }

    Ok(Version {
        major,
        minor,
        bug,
        prerelease,
        build,
    })
}

fn shift(mut e: MalformedVersion, by: usize) -> MalformedVersion {
    e.offset += by;
    e
}

fn expect_dot(text: &str, body: &str, pos: usize, base: usize) -> Result<usize, MalformedVersion> {
    if body[pos..].starts_with('.') {
        Ok(pos + 1)
    } else {
        Err(malformed(text, base + pos, "expected '.' and a further component"))
    }
}

/// The six mutually exclusive constraint categories, assigned purely from
/// the surface syntax of the constraint text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintCategory {
    /// `=1.2.3` or a bare full triple.
    Exact,
    /// `~1.2.3`: flexible in the bug component.
    Bug,
    /// `^1.2.3`: flexible in the minor component.
    Minor,
    /// `>=1.2.3`.
    Geq,
    /// `*`, `x`, or the empty string.
    Any,
    /// Disjunctions, conjunctions, hyphen ranges, x-ranges, strict
    /// comparators, tags, URLs, and anything else.
    Other,
}

impl ConstraintCategory {
    pub const ALL: [ConstraintCategory; 6] = [
        ConstraintCategory::Exact,
        ConstraintCategory::Bug,
        ConstraintCategory::Minor,
        ConstraintCategory::Geq,
        ConstraintCategory::Any,
        ConstraintCategory::Other,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            ConstraintCategory::Exact => "exact",
            ConstraintCategory::Bug => "bug",
            ConstraintCategory::Minor => "minor",
            ConstraintCategory::Geq => "geq",
            ConstraintCategory::Any => "any",
            ConstraintCategory::Other => "other",
        }
    }
}

/// A half-open version interval `[lo, hi)`; `hi == None` means unbounded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: Version,
    pub hi: Option<Version>,
}

impl Interval {
    fn contains(&self, v: &Version) -> bool {
        compare_versions(&self.lo, v) != Ordering::Greater
            && match &self.hi {
                Some(hi) => compare_versions(v, hi) == Ordering::Less,
                None => true,
            }
    }

    fn is_empty(&self) -> bool {
        match &self.hi {
            Some(hi) => compare_versions(&self.lo, hi) != Ordering::Less,
            None => false,
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.hi {
            Some(hi) => write!(f, "[{}, {})", self.lo, hi),
            None => write!(f, "[{}, inf)", self.lo),
        }
    }
}

/// A parsed version constraint: the raw text, its syntactic category, and
/// the normalized interval set giving its version semantics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    raw: String,
    category: ConstraintCategory,
    intervals: Vec<Interval>,
    /// Triples that the raw text names together with a prerelease
    /// component; a prerelease version may only satisfy the constraint
    /// when its own triple is listed here.
    prerelease_triples: Vec<(u64, u64, u64)>,
    /// Set when the text is not interval syntax (URL, tag, alias, ...).
    diagnostic: Option<String>,
}

impl Constraint {
    pub fn raw(&self) -> &str {
        &self.raw
    }

    pub fn category(&self) -> ConstraintCategory {
        self.category
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    /// True when the text parsed as version-range syntax, even if the
    /// resulting interval set is empty (an unsatisfiable range).
    pub fn is_interval_syntax(&self) -> bool {
        self.diagnostic.is_none()
    }

    pub fn diagnostic(&self) -> Option<&str> {
        self.diagnostic.as_deref()
    }

    /// True iff `v` satisfies this constraint. Prerelease versions are
    /// opted in only by constraints whose text names the identical triple
    /// with a prerelease component.
    pub fn satisfies(&self, v: &Version) -> bool {
        if v.is_prerelease() && !self.prerelease_triples.contains(&v.triple()) {
            return false;
        }
        self.intervals.iter().any(|i| i.contains(v))
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.raw)
    }
}

// Parsing is deterministic, so raw-text order is consistent with the
// derived structural equality.
impl Ord for Constraint {
    fn cmp(&self, other: &Self) -> Ordering {
        self.raw.cmp(&other.raw)
    }
}

impl PartialOrd for Constraint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl FromStr for Constraint {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(parse_constraint(s))
    }
}

impl Serialize for Constraint {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.raw)
    }
}

impl<'de> Deserialize<'de> for Constraint {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Ok(parse_constraint(&s))
    }
}

/// True iff `v` satisfies `c`; free-function form of [`Constraint::satisfies`].
pub fn satisfies(v: &Version, c: &Constraint) -> bool {
    c.satisfies(v)
}

// ---------------------------------------------------------------------------
// Constraint parsing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CompOp {
    None,
    Eq,
    Gt,
    Gte,
    Lt,
    Lte,
    Tilde,
    Caret,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Part {
    Num(u64),
    Wild,
}

#[derive(Debug, Clone)]
struct PartialVersion {
    major: Part,
    minor: Option<Part>,
    bug: Option<Part>,
    prerelease: Vec<PrereleaseId>,
}

impl PartialVersion {
    fn is_full(&self) -> bool {
        matches!(
            (self.major, self.minor, self.bug),
            (Part::Num(_), Some(Part::Num(_)), Some(Part::Num(_)))
        )
    }

    fn full_version(&self) -> Option<Version> {
        match (self.major, self.minor, self.bug) {
            (Part::Num(major), Some(Part::Num(minor)), Some(Part::Num(bug))) => Some(Version {
                major,
                minor,
                bug,
                prerelease: self.prerelease.clone(),
                build: None,
            }),
            _ => None,
        }
    }

    /// Fill missing or wildcard components with zero; drops prerelease
    /// unless the triple is fully specified.
    fn floor(&self) -> Version {
        match self.full_version() {
            Some(v) => v,
            None => {
                let major = match self.major {
                    Part::Num(n) => n,
                    Part::Wild => 0,
                };
                let minor = match self.minor {
                    Some(Part::Num(n)) => n,
                    _ => 0,
                };
                let bug = match self.bug {
                    Some(Part::Num(n)) => n,
                    _ => 0,
                };
                Version::new(major, minor, bug)
            }
        }
    }

    /// Exclusive upper bound of the x-range this partial denotes, or
    /// `None` when it spans everything (wildcard major).
    fn xrange_upper(&self) -> Option<Version> {
        match (self.major, self.minor, self.bug) {
            (Part::Wild, _, _) => None,
            (Part::Num(major), None, _) | (Part::Num(major), Some(Part::Wild), _) => {
                Some(bound(major + 1, 0, 0))
            }
            (Part::Num(major), Some(Part::Num(minor)), None)
            | (Part::Num(major), Some(Part::Num(minor)), Some(Part::Wild)) => {
                Some(bound(major, minor + 1, 0))
            }
            (Part::Num(major), Some(Part::Num(minor)), Some(Part::Num(bug))) => Some(Version {
                major,
                minor,
                bug,
                prerelease: self.prerelease.clone(),
                build: None,
            })
            .map(|v| v.immediate_successor()),
        }
    }
}

/// An exclusive range bound: the first prerelease of the given triple,
/// so that no prerelease of the bound itself slips inside the interval.
fn bound(major: u64, minor: u64, bug: u64) -> Version {
    Version {
        major,
        minor,
        bug,
        prerelease: vec![PrereleaseId::Numeric(0)],
        build: None,
    }
}

fn parse_part(s: &str) -> Option<(Part, usize)> {
    let first = s.chars().next()?;
    if matches!(first, 'x' | 'X' | '*') {
        return Some((Part::Wild, first.len_utf8()));
    }
    let digits: String = s.chars().take_while(|c| c.is_ascii_digit()).collect();
    if digits.is_empty() || (digits.len() > 1 && digits.starts_with('0')) {
        return None;
    }
    digits.parse::<u64>().ok().map(|n| (Part::Num(n), digits.len()))
}

fn parse_partial_version(s: &str) -> Option<PartialVersion> {
    let s = s.strip_prefix(['v', 'V']).unwrap_or(s);
    let (major, mut pos) = parse_part(s)?;
    let mut minor = None;
    let mut bug = None;

    for slot in [&mut minor, &mut bug] {
        if s[pos..].starts_with('.') {
            let (part, used) = parse_part(&s[pos + 1..])?;
            *slot = Some(part);
            pos += 1 + used;
        } else {
            break;
        }
    }

    let mut prerelease = Vec::new();
    if s[pos..].starts_with('-') {
        let end = s[pos + 1..].find('+').map(|i| pos + 1 + i).unwrap_or(s.len());
        prerelease = parse_prerelease_ids(s, &s[pos + 1..end], 0).ok()?;
        pos = end;
    }
    if s[pos..].starts_with('+') {
        let meta = &s[pos + 1..];
        if meta.is_empty() || !meta.split('.').all(|id| {
            !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-')
        }) {
            return None;
        }
        pos = s.len();
    }
    if pos != s.len() {
        return None;
    }
    Some(PartialVersion {
        major,
        minor,
        bug,
        prerelease,
    })
}

fn split_op(token: &str) -> (CompOp, &str) {
    for (text, op) in [
        (">=", CompOp::Gte),
        ("<=", CompOp::Lte),
        ("~>", CompOp::Tilde),
        (">", CompOp::Gt),
        ("<", CompOp::Lt),
        ("=", CompOp::Eq),
        ("~", CompOp::Tilde),
        ("^", CompOp::Caret),
    ] {
        if let Some(rest) = token.strip_prefix(text) {
            return (op, rest.trim_start());
        }
    }
    (CompOp::None, token)
}

/// One comparator reduced to a single interval ([lo, hi)), or `None` for
/// syntax that is not a version range.
fn comparator_interval(op: CompOp, pv: &PartialVersion) -> Interval {
    match op {
        CompOp::None | CompOp::Eq => match pv.full_version() {
            Some(v) => {
                let hi = v.immediate_successor();
                Interval { lo: v, hi: Some(hi) }
            }
            None => Interval {
                lo: if matches!(pv.major, Part::Wild) {
                    min_version()
                } else {
                    pv.floor()
                },
                hi: pv.xrange_upper(),
            },
        },
        CompOp::Gte => Interval {
            lo: if matches!(pv.major, Part::Wild) {
                min_version()
            } else {
                pv.floor()
            },
            hi: None,
        },
        CompOp::Gt => match pv.full_version() {
            Some(v) => Interval {
                lo: v.immediate_successor(),
                hi: None,
            },
            // ">1.2" admits nothing in 1.2.x: it means ">=1.3.0".
            None => match pv.xrange_upper() {
                Some(mut up) => {
                    up.prerelease.clear();
                    Interval { lo: up, hi: None }
                }
                None => Interval {
                    lo: min_version(),
                    hi: Some(min_version()),
                },
            },
        },
        CompOp::Lt => Interval {
            lo: min_version(),
            hi: Some(match pv.full_version() {
                Some(v) => v,
                None => {
                    let mut lo = pv.floor();
                    lo.prerelease = vec![PrereleaseId::Numeric(0)];
                    lo
                }
            }),
        },
        CompOp::Lte => Interval {
            lo: min_version(),
            hi: match pv.full_version() {
                Some(v) => Some(v.immediate_successor()),
                None => pv.xrange_upper(),
            },
        },
        CompOp::Tilde => {
            let lo = pv.floor();
            let hi = match (pv.major, pv.minor) {
                (Part::Wild, _) => None,
                (Part::Num(major), None) | (Part::Num(major), Some(Part::Wild)) => {
                    Some(bound(major + 1, 0, 0))
                }
                (Part::Num(major), Some(Part::Num(minor))) => Some(bound(major, minor + 1, 0)),
            };
            Interval { lo, hi }
        }
        CompOp::Caret => {
            let lo = pv.floor();
            let hi = match (pv.major, pv.minor, pv.bug) {
                (Part::Wild, _, _) => None,
                (Part::Num(0), Some(Part::Num(0)), Some(Part::Num(b))) => Some(bound(0, 0, b + 1)),
                (Part::Num(0), Some(Part::Num(minor)), _) => Some(bound(0, minor + 1, 0)),
                (Part::Num(major), _, _) if major > 0 => Some(bound(major + 1, 0, 0)),
                // ^0, ^0.x
                (Part::Num(_), _, _) => Some(bound(1, 0, 0)),
            };
            Interval { lo, hi }
        }
    }
}

fn intersect(a: &Interval, b: &Interval) -> Interval {
    let lo = if compare_versions(&a.lo, &b.lo) == Ordering::Less {
        b.lo.clone()
    } else {
        a.lo.clone()
    };
    let hi = match (&a.hi, &b.hi) {
        (None, None) => None,
        (Some(h), None) | (None, Some(h)) => Some(h.clone()),
        (Some(x), Some(y)) => Some(if compare_versions(x, y) == Ordering::Less {
            x.clone()
        } else {
            y.clone()
        }),
    };
    Interval { lo, hi }
}

struct ParsedAlternative {
    interval: Interval,
    prerelease_triples: Vec<(u64, u64, u64)>,
}

/// Split a comparator-set string into comparator tokens, rejoining an
/// operator that is separated from its version by whitespace.
fn tokenize(set: &str) -> Vec<String> {
    let words: Vec<&str> = set.split_whitespace().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < words.len() {
        let w = words[i];
        let bare_op = matches!(w, "=" | ">" | "<" | ">=" | "<=" | "~" | "^" | "~>");
        if bare_op && i + 1 < words.len() {
            tokens.push(format!("{}{}", w, words[i + 1]));
            i += 2;
        } else {
            tokens.push(w.to_string());
            i += 1;
        }
    }
    tokens
}

/// Parse one `||`-free comparator set ("range") into an interval.
fn parse_comparator_set(set: &str) -> Option<ParsedAlternative> {
    let tokens = tokenize(set);
    let mut triples = Vec::new();

    if tokens.is_empty() {
        return Some(ParsedAlternative {
            interval: Interval {
                lo: min_version(),
                hi: None,
            },
            prerelease_triples: triples,
        });
    }

    // Hyphen ranges: "a - b", inclusive on both named ends.
    if let Some(dash) = tokens.iter().position(|t| t == "-") {
        if dash == 0 || dash != tokens.len() - 2 || tokens.len() != 3 {
            return None;
        }
        let lo_pv = parse_partial_version(&tokens[0])?;
        let hi_pv = parse_partial_version(&tokens[2])?;
        record_triple(&mut triples, &lo_pv);
        record_triple(&mut triples, &hi_pv);
        let lo = if matches!(lo_pv.major, Part::Wild) {
            min_version()
        } else {
            lo_pv.floor()
        };
        let hi = hi_pv.xrange_upper();
        return Some(ParsedAlternative {
            interval: Interval { lo, hi },
            prerelease_triples: triples,
        });
    }

    let mut acc = Interval {
        lo: min_version(),
        hi: None,
    };
    for token in &tokens {
        let (op, rest) = split_op(token);
        let pv = parse_partial_version(rest)?;
        record_triple(&mut triples, &pv);
        acc = intersect(&acc, &comparator_interval(op, &pv));
    }
    Some(ParsedAlternative {
        interval: acc,
        prerelease_triples: triples,
    })
}

fn record_triple(triples: &mut Vec<(u64, u64, u64)>, pv: &PartialVersion) {
    if !pv.prerelease.is_empty() {
        if let Some(v) = pv.full_version() {
            triples.push(v.triple());
        }
    }
}

/// Lenient version parse for registry-adjacent data: fills partial
/// triples with zeros ("1.2" -> 1.2.0) and tolerates a `v` prefix.
pub(crate) fn parse_version_lenient(text: &str) -> Option<Version> {
    let pv = parse_partial_version(text.trim())?;
    match pv.major {
        Part::Wild => None,
        Part::Num(_) => Some(pv.floor()),
    }
}

pub(crate) fn normalize_intervals(mut intervals: Vec<Interval>) -> Vec<Interval> {
    intervals.retain(|i| !i.is_empty());
    intervals.sort_by(|a, b| {
        compare_versions(&a.lo, &b.lo).then_with(|| match (&a.hi, &b.hi) {
            (None, None) => Ordering::Equal,
            (None, Some(_)) => Ordering::Greater,
            (Some(_), None) => Ordering::Less,
            (Some(x), Some(y)) => compare_versions(x, y),
        })
    });
    let mut out: Vec<Interval> = Vec::new();
    for iv in intervals {
        match out.last_mut() {
            Some(last) => {
                let touches = match &last.hi {
                    None => true,
                    Some(hi) => compare_versions(&iv.lo, hi) != Ordering::Greater,
                };
                if touches {
                    last.hi = match (&last.hi, &iv.hi) {
                        (None, _) | (_, None) => None,
                        (Some(x), Some(y)) => Some(if compare_versions(x, y) == Ordering::Less {
                            y.clone()
                        } else {
                            x.clone()
                        }),
                    };
                } else {
                    out.push(iv);
                }
            }
            None => out.push(iv),
        }
    }
    out
}

fn categorize(trimmed: &str) -> ConstraintCategory {
    if trimmed.is_empty() || trimmed == "*" || trimmed.eq_ignore_ascii_case("x") {
        return ConstraintCategory::Any;
    }
    if trimmed.contains("||") {
        return ConstraintCategory::Other;
    }
    let tokens = tokenize(trimmed);
    if tokens.len() != 1 {
        return ConstraintCategory::Other;
    }
    let token = &tokens[0];
    if let Some(rest) = token.strip_prefix(">=") {
        let _ = rest;
        return ConstraintCategory::Geq;
    }
    if token.starts_with('^') {
        return ConstraintCategory::Minor;
    }
    if token.starts_with('~') {
        return ConstraintCategory::Bug;
    }
    if token.starts_with('=') {
        return ConstraintCategory::Exact;
    }
    if token.starts_with('>') || token.starts_with('<') {
        return ConstraintCategory::Other;
    }
    // A bare, fully specified triple is exact; partial triples, x-ranges,
    // tags, and URLs fall through to Other.
    match parse_partial_version(token) {
        Some(pv) if pv.is_full() => ConstraintCategory::Exact,
        _ => ConstraintCategory::Other,
    }
}

/// Parse an npm-style constraint string. Total: every input yields a
/// `Constraint`; unrecognized syntax is category `Other` with an empty
/// interval set and a diagnostic describing the failure.
pub fn parse_constraint(text: &str) -> Constraint {
    let trimmed = text.trim();
    let category = categorize(trimmed);

    if category == ConstraintCategory::Any {
        return Constraint {
            raw: text.to_string(),
            category,
            intervals: vec![Interval {
                lo: min_version(),
                hi: None,
            }],
            prerelease_triples: Vec::new(),
            diagnostic: None,
        };
    }

    let mut intervals = Vec::new();
    let mut triples = Vec::new();
    let mut diagnostic = None;

    for alt in trimmed.split("||") {
        match parse_comparator_set(alt) {
            Some(parsed) => {
                intervals.push(parsed.interval);
                triples.extend(parsed.prerelease_triples);
            }
            None => {
                diagnostic = Some(format!("unrecognized constraint syntax: {:?}", alt.trim()));
                intervals.clear();
                triples.clear();
                break;
            }
        }
    }

    triples.sort_unstable();
    triples.dedup();

    Constraint {
        raw: text.to_string(),
        category,
        intervals: if diagnostic.is_some() {
            Vec::new()
        } else {
            normalize_intervals(intervals)
        },
        prerelease_triples: triples,
        diagnostic,
    }
}

/// Which semver component an update increments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IncrementType {
    Bug,
    Minor,
    Major,
}

impl IncrementType {
    pub const ALL: [IncrementType; 3] = [IncrementType::Bug, IncrementType::Minor, IncrementType::Major];

    pub fn label(&self) -> &'static str {
        match self {
            IncrementType::Bug => "bug",
            IncrementType::Minor => "minor",
            IncrementType::Major => "major",
        }
    }
}

impl fmt::Display for IncrementType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IncrementError {
    #[error("not an upgrade: {from} >= {to}")]
    NotAnUpgrade { from: Version, to: Version },
    #[error("increment type undefined for prerelease endpoint: {from} -> {to}")]
    PrereleaseEndpoint { from: Version, to: Version },
}

/// Classify the semver increment from `a` to `b`. Defined only for
/// non-prerelease versions with `a < b`.
#[allow(clippy::result_large_err)]
pub fn increment_type(a: &Version, b: &Version) -> Result<IncrementType, IncrementError> {
    if a.is_prerelease() || b.is_prerelease() {
        return Err(IncrementError::PrereleaseEndpoint {
            from: a.clone(),
            to: b.clone(),
        });
    }
    if compare_versions(a, b) != Ordering::Less {
        return Err(IncrementError::NotAnUpgrade {
            from: a.clone(),
            to: b.clone(),
        });
    }
    Ok(if a.major != b.major {
        IncrementType::Major
    } else if a.minor != b.minor {
        IncrementType::Minor
    } else {
        IncrementType::Bug
    })
}
