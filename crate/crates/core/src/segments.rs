//! Symbolic cuspidal lines, segments and multisegments.
//!
//! A cuspidal line is an opaque label together with the block size `r0` and
//! the reducibility invariant `l`. Twists on a line are plain integers and are
//! treated as pairwise distinct (the line is a free `Z`-torsor).

use std::cmp::{Ordering, Reverse};
use std::fmt;

use serde::{Serialize, Serializer};

use crate::covers::CoverSpec;
use crate::error::{Error, Result};

/// A supercuspidal datum `rho` of `GL_{r0}` with invariant `l(rho)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CuspidalDatum {
    id: String,
    r0: u64,
    l: u64,
}

impl CuspidalDatum {
    pub fn new(id: impl Into<String>, r0: u64, l: u64) -> Result<Self> {
        let id = id.into();
        if r0 == 0 || l == 0 {
            return Err(Error::InvalidCuspidal {
                id,
                reason: "r0 and l must be positive".into(),
            });
        }
        Ok(Self { id, r0, l })
    }

    /// Builds the datum and checks it against `cover`.
    pub fn for_cover(id: impl Into<String>, r0: u64, l: u64, cover: &CoverSpec) -> Result<Self> {
        let datum = Self::new(id, r0, l)?;
        datum.validate(cover)?;
        Ok(datum)
    }

    /// `l` must divide `n`, and for KP covers also `r0`.
    pub fn validate(&self, cover: &CoverSpec) -> Result<()> {
        if !cover.n().is_multiple_of(self.l) {
            return Err(Error::InvalidCuspidal {
                id: self.id.clone(),
                reason: format!("l={} does not divide n={}", self.l, cover.n()),
            });
        }
        if cover.is_kp() && !self.r0.is_multiple_of(self.l) {
            return Err(Error::InvalidCuspidal {
                id: self.id.clone(),
                reason: format!("KP cover requires l={} to divide r0={}", self.l, self.r0),
            });
        }
        Ok(())
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn r0(&self) -> u64 {
        self.r0
    }

    pub fn l(&self) -> u64 {
        self.l
    }

    /// Twist period `n(rho) = n / l(rho)`.
    pub fn n_rho(&self, cover: &CoverSpec) -> Result<u64> {
        if !cover.n().is_multiple_of(self.l) {
            return Err(Error::InvalidCuspidal {
                id: self.id.clone(),
                reason: format!("l={} does not divide n={}", self.l, cover.n()),
            });
        }
        Ok(cover.n() / self.l)
    }
}

/// The segment `[a, b]_rho`, always nonempty.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Segment {
    rho: CuspidalDatum,
    a: i64,
    b: i64,
}

impl Segment {
    pub fn new(rho: CuspidalDatum, a: i64, b: i64) -> Result<Self> {
        if b < a {
            return Err(Error::InvalidSegment(format!(
                "[{a},{b}]_{} is empty",
                rho.id
            )));
        }
        Ok(Self { rho, a, b })
    }

    /// `[a, b]_rho`, or `None` for the empty segment `b < a`.
    pub fn new_or_empty(rho: CuspidalDatum, a: i64, b: i64) -> Option<Self> {
        (b >= a).then_some(Self { rho, a, b })
    }

    pub fn rho(&self) -> &CuspidalDatum {
        &self.rho
    }

    pub fn a(&self) -> i64 {
        self.a
    }

    pub fn b(&self) -> i64 {
        self.b
    }

    /// Number of twists `b - a + 1`.
    pub fn len(&self) -> u64 {
        (self.b - self.a + 1) as u64
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `GL` rank `len * r0`.
    pub fn size(&self) -> u64 {
        self.len() * self.rho.r0
    }

    pub fn same_line(&self, other: &Segment) -> bool {
        self.rho.id == other.rho.id
    }

    /// Degree of the highest derivative of `Z(self)`: `r0 * min(len, n(rho))`.
    pub fn top_degree(&self, cover: &CoverSpec) -> Result<u64> {
        Ok(self.rho.r0 * self.len().min(self.rho.n_rho(cover)?))
    }

    /// `Delta^-`: the right endpoint moves left by `min(len, n(rho))`.
    pub fn minus(&self, cover: &CoverSpec) -> Result<Option<Segment>> {
        let step = self.len().min(self.rho.n_rho(cover)?) as i64;
        Ok(Segment::new_or_empty(
            self.rho.clone(),
            self.a,
            self.b - step,
        ))
    }

    fn contains_twist(&self, t: i64) -> bool {
        self.a <= t && t <= self.b
    }
}

/// Union is a segment strictly larger than both.
pub fn linked(d1: &Segment, d2: &Segment) -> bool {
    if !d1.same_line(d2) {
        return false;
    }
    let touching = d2.a <= d1.b + 1 && d1.a <= d2.b + 1;
    let nested = (d1.a <= d2.a && d2.b <= d1.b) || (d2.a <= d1.a && d1.b <= d2.b);
    touching && !nested
}

/// `d1` precedes `d2`: same line, `a1 < a2`, `b1 < b2` and `b1 >= a2 - 1`.
pub fn precedes(d1: &Segment, d2: &Segment) -> bool {
    d1.same_line(d2) && d1.a < d2.a && d1.b < d2.b && d1.b >= d2.a - 1
}

fn normal_key(s: &Segment) -> (&str, Reverse<i64>, Reverse<i64>) {
    (s.rho.id.as_str(), Reverse(s.b), Reverse(s.a))
}

/// A finite multiset of segments, stored in normal order: lines by id, then
/// right endpoint descending, then left endpoint descending.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Multisegment {
    segments: Vec<Segment>,
}

impl Multisegment {
    pub fn new(mut segments: Vec<Segment>) -> Self {
        segments.sort_by(|x, y| normal_key(x).cmp(&normal_key(y)));
        Self { segments }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Total rank `sum len_i * r0_i`.
    pub fn total_size(&self) -> u64 {
        self.segments.iter().map(Segment::size).sum()
    }

    pub fn validate(&self, cover: &CoverSpec) -> Result<()> {
        self.segments.iter().try_for_each(|s| s.rho.validate(cover))
    }

    /// `k_m = sum r0_i * min(l_i, n(rho_i))`.
    pub fn k_m(&self, cover: &CoverSpec) -> Result<u64> {
        self.segments.iter().map(|s| s.top_degree(cover)).sum()
    }

    /// `m^-`: every segment contracted, empties dropped.
    pub fn minus(&self, cover: &CoverSpec) -> Result<Multisegment> {
        let mut out = Vec::with_capacity(self.segments.len());
        for s in &self.segments {
            if let Some(t) = s.minus(cover)? {
                out.push(t);
            }
        }
        Ok(Multisegment::new(out))
    }
}

/// Re-sorts an arbitrary arrangement into normal order.
pub fn normal_order(segments: &[Segment]) -> Multisegment {
    Multisegment::new(segments.to_vec())
}

/// Whether the arrangement satisfies the hypothesis under which the socle
/// of the top derivative of the standard module is isotypic: no segment
/// precedes a later one, and for each `i` the twists
/// `[b_i + 1 - min(l_i, n_i) + n_i, b_i + n_i]` on its line avoid every later
/// segment.
pub fn homogeneity_hypothesis(segments: &[Segment], cover: &CoverSpec) -> Result<bool> {
    for (i, di) in segments.iter().enumerate() {
        let n_i = di.rho.n_rho(cover)? as i64;
        let step = (di.len() as i64).min(n_i);
        let lo = di.b + 1 - step + n_i;
        let hi = di.b + n_i;
        for dj in &segments[i + 1..] {
            if precedes(di, dj) {
                return Ok(false);
            }
            if di.same_line(dj) && (lo..=hi).any(|t| dj.contains_twist(t)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

impl fmt::Display for CuspidalDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cuspidal {} r0={} l={}", self.id, self.r0, self.l)
    }
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]_{}", self.a, self.b, self.rho.id)
    }
}

impl fmt::Display for Multisegment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.segments.is_empty() {
            return write!(f, "[]");
        }
        for (i, s) in self.segments.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl PartialOrd for Multisegment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Multisegment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.segments.cmp(&other.segments)
    }
}

impl Serialize for Multisegment {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}
