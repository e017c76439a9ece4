//! Bernstein–Zelevinsky derivatives, Whittaker dimensions and the iterated
//! highest-derivative partition.
//!
//! Everything here lives at the level of symbols: a derivative is reported as
//! a formal sum of `Z`- or `L`-multisegments with non-negative multiplicities.
//! For KP covers the statements hold up to `n`-equivalence class, which is
//! what symbol equality models.

use std::collections::BTreeMap;
use std::fmt;

use serde::ser::{SerializeMap, SerializeStruct};
use serde::{Serialize, Serializer};

use crate::arith::{binomial, checked_mul, exact_div};
use crate::covers::CoverSpec;
use crate::error::{Error, Result};
use crate::partitions::{Composition, Partition};
use crate::segments::{homogeneity_hypothesis, Multisegment, Segment};

/// Which family of irreducible symbols a formal sum is written in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Tag {
    Z,
    L,
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tag::Z => "Z",
            Tag::L => "L",
        })
    }
}

/// Non-negative integer combination of `Z(m)` (or `L(m)`) symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormalSum {
    tag: Tag,
    terms: BTreeMap<Multisegment, u64>,
}

impl FormalSum {
    pub fn zero(tag: Tag) -> Self {
        Self {
            tag,
            terms: BTreeMap::new(),
        }
    }

    pub fn single(tag: Tag, m: Multisegment, mult: u64) -> Self {
        let mut sum = Self::zero(tag);
        sum.add(m, mult);
        sum
    }

    pub fn add(&mut self, m: Multisegment, mult: u64) {
        if mult > 0 {
            *self.terms.entry(m).or_insert(0) += mult;
        }
    }

    pub fn tag(&self) -> Tag {
        self.tag
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Multisegment, u64)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

impl fmt::Display for FormalSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            if c != 1 {
                write!(f, "{c}*")?;
            }
            write!(f, "{}({m})", self.tag)?;
        }
        Ok(())
    }
}

struct TermsJson<'a>(&'a FormalSum);

impl Serialize for TermsJson<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = serializer.serialize_seq(Some(self.0.terms.len()))?;
        for (m, mult) in self.0.terms() {
            seq.serialize_element(&TermJson { mult, m })?;
        }
        seq.end()
    }
}

struct TermJson<'a> {
    mult: u64,
    m: &'a Multisegment,
}

impl Serialize for TermJson<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(2))?;
        map.serialize_entry("mult", &self.mult)?;
        map.serialize_entry("m", self.m)?;
        map.end()
    }
}

impl Serialize for FormalSum {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("FormalSum", 2)?;
        st.serialize_field("terms", &TermsJson(self))?;
        st.serialize_field("tag", &self.tag)?;
        st.end()
    }
}

/// The `k`-th derivative: an isotypic `scalar` multiple of the terms in `value`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivativeResult {
    pub degree: u64,
    pub value: FormalSum,
    pub scalar: u64,
}

impl DerivativeResult {
    fn zero(degree: u64, tag: Tag) -> Self {
        Self {
            degree,
            value: FormalSum::zero(tag),
            scalar: 0,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.scalar == 0 || self.value.is_zero()
    }

    /// The single term of a nonzero segment derivative.
    pub fn term(&self) -> Option<&Multisegment> {
        self.value.terms.keys().next()
    }
}

impl Serialize for DerivativeResult {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("DerivativeResult", 4)?;
        st.serialize_field("degree", &self.degree)?;
        st.serialize_field("scalar", &self.scalar)?;
        st.serialize_field("terms", &TermsJson(&self.value))?;
        st.serialize_field("tag", &self.value.tag)?;
        st.end()
    }
}

fn kp_divide(cover: &CoverSpec, numerator: u64, r: u64, what: &'static str) -> Result<u64> {
    if cover.is_kp() {
        exact_div(numerator, cover.d_r(r)?, what)
    } else {
        Ok(numerator)
    }
}

/// `dim Wh(Z(Delta)) = C(n(rho), len)`, divided by `d_{size}` on KP covers.
pub fn wh_dim_z(seg: &Segment, cover: &CoverSpec) -> Result<u64> {
    cover.require_tame()?;
    let binom = binomial(seg.rho().n_rho(cover)?, seg.len())?;
    kp_divide(cover, binom, seg.size(), "dim Wh(Z(Delta))")
}

/// `dim Wh(L(Delta)) = C(n(rho) + len - 1, len)`, divided by `d_{size}` on KP covers.
pub fn wh_dim_l(seg: &Segment, cover: &CoverSpec) -> Result<u64> {
    cover.require_tame()?;
    let binom = binomial(seg.rho().n_rho(cover)? + seg.len() - 1, seg.len())?;
    kp_divide(cover, binom, seg.size(), "dim Wh(L(Delta))")
}

/// Derivative of `Z(Delta)` or `L(Delta)` of degree `k`.
pub fn derivative(seg: &Segment, k: u64, tag: Tag, cover: &CoverSpec) -> Result<DerivativeResult> {
    cover.require_tame()?;
    let r = seg.size();
    if k > r {
        return Err(Error::InvalidArgument(format!(
            "derivative degree {k} exceeds segment size {r}"
        )));
    }
    if k == 0 {
        return Ok(DerivativeResult {
            degree: 0,
            value: FormalSum::single(tag, Multisegment::new(vec![seg.clone()]), 1),
            scalar: 1,
        });
    }
    let r0 = seg.rho().r0();
    if !k.is_multiple_of(r0) {
        return Ok(DerivativeResult::zero(k, tag));
    }
    let s = k / r0;
    let n_rho = seg.rho().n_rho(cover)?;
    let (binom, rest) = match tag {
        Tag::Z => (
            binomial(n_rho, s)?,
            Segment::new_or_empty(seg.rho().clone(), seg.a(), seg.b() - s as i64),
        ),
        Tag::L => (
            binomial(n_rho + s - 1, s)?,
            Segment::new_or_empty(seg.rho().clone(), seg.a() + s as i64, seg.b()),
        ),
    };
    let scalar = if cover.is_kp() {
        let num = checked_mul(cover.d_r(r - k)?, binom, "derivative scalar")?;
        exact_div(num, cover.d_r(r)?, "derivative scalar d_{r-k} C / d_r")?
    } else {
        binom
    };
    if scalar == 0 {
        return Ok(DerivativeResult::zero(k, tag));
    }
    let term = Multisegment::new(rest.into_iter().collect());
    Ok(DerivativeResult {
        degree: k,
        value: FormalSum::single(tag, term, 1),
        scalar,
    })
}

pub fn derivative_z(seg: &Segment, k: u64, cover: &CoverSpec) -> Result<DerivativeResult> {
    derivative(seg, k, Tag::Z, cover)
}

pub fn derivative_l(seg: &Segment, k: u64, cover: &CoverSpec) -> Result<DerivativeResult> {
    derivative(seg, k, Tag::L, cover)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HighestDerivative {
    pub degree: u64,
    pub socle: Multisegment,
    pub socle_multiplicity: u64,
}

/// Degree, socle symbol and socle multiplicity of the highest derivative of `Z(m)`.
pub fn highest_derivative(m: &Multisegment, cover: &CoverSpec) -> Result<HighestDerivative> {
    cover.require_tame()?;
    if m.is_empty() {
        return Err(Error::InvalidArgument(
            "highest derivative of the empty multisegment".into(),
        ));
    }
    Ok(HighestDerivative {
        degree: m.k_m(cover)?,
        socle: m.minus(cover)?,
        socle_multiplicity: c_m(m, cover)?,
    })
}

/// Total multiplicity of `Z(m^-)` in the top derivative of the standard module:
/// `prod C(n_i, min(l_i, n_i))`, times `d_{r - k_m} / d_r` on KP covers.
pub fn c_m(m: &Multisegment, cover: &CoverSpec) -> Result<u64> {
    cover.require_tame()?;
    if !homogeneity_hypothesis(m.segments(), cover)? {
        return Err(Error::HomogeneityFailed);
    }
    let mut product = 1u64;
    for s in m.segments() {
        let n_rho = s.rho().n_rho(cover)?;
        product = checked_mul(product, binomial(n_rho, s.len().min(n_rho))?, "c_m")?;
    }
    if cover.is_kp() {
        let r = m.total_size();
        let k = m.k_m(cover)?;
        let num = checked_mul(cover.d_r(r - k)?, product, "c_m")?;
        exact_div(num, cover.d_r(r)?, "c_m d_{r-k} prod / d_r")
    } else {
        Ok(product)
    }
}

/// The chain of top degrees `k_m, k_{m^-}, ...` together with the
/// multisegments it passes through (the last one is empty).
pub fn lambda_chain(m: &Multisegment, cover: &CoverSpec) -> Result<Vec<(u64, Multisegment)>> {
    cover.require_tame()?;
    let mut chain = Vec::new();
    let mut current = m.clone();
    while !current.is_empty() {
        let k = current.k_m(cover)?;
        let next = current.minus(cover)?;
        if next.total_size() + k != current.total_size() {
            return Err(Error::Integrity {
                what: "size(m) = size(m^-) + k_m",
                numerator: current.total_size(),
                denominator: k,
            });
        }
        chain.push((k, next.clone()));
        current = next;
    }
    Ok(chain)
}

/// `lambda_m = (k_1, k_2, ...)`, the degrees of the iterated highest derivatives.
pub fn lambda_of(m: &Multisegment, cover: &CoverSpec) -> Result<Partition> {
    let parts = lambda_chain(m, cover)?
        .into_iter()
        .map(|(k, _)| k)
        .collect();
    Partition::new(parts)
}

/// `Z(m)` is generic iff every segment is no longer than its twist period.
pub fn is_generic(m: &Multisegment, cover: &CoverSpec) -> Result<bool> {
    cover.require_tame()?;
    for s in m.segments() {
        if s.len() > s.rho().n_rho(cover)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether the `lam`-semi-Whittaker model of `Z(Delta)` is nonzero.
pub fn semi_whittaker_nonzero(seg: &Segment, lam: &Composition, cover: &CoverSpec) -> Result<bool> {
    cover.require_tame()?;
    if lam.size() != seg.size() {
        return Err(Error::IncomparableSizes(lam.size(), seg.size()));
    }
    let r0 = seg.rho().r0();
    let bound = seg.rho().n_rho(cover)? * r0;
    Ok(lam.parts().iter().all(|&p| p % r0 == 0 && p <= bound))
}

/// Whittaker dimension of a product from the dimensions and ranks of its
/// factors; KP covers rescale by `prod d_{r_i} / d_r`.
pub fn wh_dim_product(dims: &[(u64, u64)], cover: &CoverSpec) -> Result<u64> {
    cover.require_tame()?;
    if dims.iter().any(|&(_, size)| size == 0) {
        return Err(Error::InvalidArgument(
            "factor sizes must be positive".into(),
        ));
    }
    let mut product = 1u64;
    let mut r = 0u64;
    for &(dim, size) in dims {
        let factor = if cover.is_kp() {
            checked_mul(dim, cover.d_r(size)?, "wh_dim_product")?
        } else {
            dim
        };
        product = checked_mul(product, factor, "wh_dim_product")?;
        r += size;
    }
    kp_divide(cover, product, r, "dim Wh of a product")
}

/// Top derivative degree of the standard module, summed over segments.
pub fn top_derivative_degree_of_product(m: &Multisegment, cover: &CoverSpec) -> Result<u64> {
    cover.require_tame()?;
    let total = m
        .segments()
        .iter()
        .map(|s| s.top_degree(cover))
        .sum::<Result<u64>>()?;
    let k = m.k_m(cover)?;
    if total != k {
        return Err(Error::Integrity {
            what: "k of the product equals k_m",
            numerator: total,
            denominator: k,
        });
    }
    Ok(total)
}

/// Degrees `k` at which the standard module can have a nonzero derivative:
/// sums `sum r0_i s_i` with `0 <= s_i <= min(l_i, n_i)`.
pub fn product_derivative_degrees(m: &Multisegment, cover: &CoverSpec) -> Result<Vec<u64>> {
    cover.require_tame()?;
    let mut reachable = vec![true];
    for s in m.segments() {
        let steps = s.len().min(s.rho().n_rho(cover)?);
        let r0 = s.rho().r0() as usize;
        let mut next = vec![false; reachable.len() + steps as usize * r0];
        for (deg, _) in reachable.iter().enumerate().filter(|(_, &ok)| ok) {
            for j in 0..=steps as usize {
                next[deg + j * r0] = true;
            }
        }
        reachable = next;
    }
    Ok(reachable
        .iter()
        .enumerate()
        .filter(|(_, &ok)| ok)
        .map(|(d, _)| d as u64)
        .collect())
}

/// A Whittaker dimension that may not be determined by the closed forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WhDim {
    Known(u64),
    Unknown,
}

impl fmt::Display for WhDim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WhDim::Known(d) => write!(f, "{d}"),
            WhDim::Unknown => f.write_str("unknown"),
        }
    }
}

impl Serialize for WhDim {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            WhDim::Known(d) => serializer.serialize_u64(*d),
            WhDim::Unknown => serializer.serialize_str("unknown"),
        }
    }
}

/// `dim Wh(Z(m))` where it is known: a single segment, a non-generic `m`
/// (zero), or every `l_i = n(rho_i)` (one).
pub fn wh_dim_z_multisegment(m: &Multisegment, cover: &CoverSpec) -> Result<WhDim> {
    cover.require_tame()?;
    match m.segments() {
        [] => Ok(WhDim::Known(1)),
        [single] => wh_dim_z(single, cover).map(WhDim::Known),
        segs => {
            let mut all_equal = true;
            for s in segs {
                let n_rho = s.rho().n_rho(cover)?;
                if s.len() > n_rho {
                    return Ok(WhDim::Known(0));
                }
                all_equal &= s.len() == n_rho;
            }
            Ok(if all_equal {
                WhDim::Known(1)
            } else {
                WhDim::Unknown
            })
        }
    }
}
