//! Kazhdan–Patterson and Savin covers of `GL_r` and their numerical invariants.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::{checked_mul, exact_div, gcd};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    /// Kazhdan–Patterson cover with twist `a` (so `Q(alpha^vee) = -1`).
    KazhdanPatterson { a: i64 },
    /// Savin cover, the pair `(a, b) = (-1, 0)`.
    Savin,
}

/// An `n`-fold cover from one of the two supported families.
///
/// `tame` records the standing assumption `gcd(p, n) = 1`; the residue
/// characteristic itself never enters a formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CoverSpec {
    family: Family,
    n: u64,
    tame: bool,
}

impl CoverSpec {
    pub fn kp(n: u64, a: i64) -> Result<Self> {
        Self::new(Family::KazhdanPatterson { a }, n, true)
    }

    pub fn savin(n: u64) -> Result<Self> {
        Self::new(Family::Savin, n, true)
    }

    pub fn new(family: Family, n: u64, tame: bool) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidCover("degree n must be at least 1".into()));
        }
        Ok(Self { family, n, tame })
    }

    pub fn with_tame(self, tame: bool) -> Self {
        Self { tame, ..self }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn is_tame(&self) -> bool {
        self.tame
    }

    pub fn is_kp(&self) -> bool {
        matches!(self.family, Family::KazhdanPatterson { .. })
    }

    /// The KP twist, `None` for Savin covers.
    pub fn twist(&self) -> Option<i64> {
        match self.family {
            Family::KazhdanPatterson { a } => Some(a),
            Family::Savin => None,
        }
    }

    pub fn require_tame(&self) -> Result<()> {
        if self.tame {
            Ok(())
        } else {
            Err(Error::NotTame)
        }
    }

    /// Column height of the covering Barbasch–Vogan duality.
    pub fn n_alpha(&self) -> u64 {
        match self.family {
            Family::KazhdanPatterson { .. } => self.n,
            Family::Savin => self.n / gcd(self.n, 2),
        }
    }

    /// `d_r = gcd(n, 2ra - r + 1)`, evaluated literally for every `r >= 0`
    /// (so `d_0 = 1`).
    pub fn d_r(&self, r: u64) -> Result<u64> {
        let Family::KazhdanPatterson { a } = self.family else {
            return Err(Error::DrUndefinedForSavin);
        };
        let r = i128::from(r);
        let value = 2 * r * i128::from(a) - r + 1;
        let value = u64::try_from(value.unsigned_abs()).map_err(|_| Error::Overflow("d_r"))?;
        Ok(gcd(self.n, value))
    }

    /// Multiplicity constants of the two-block metaplectic tensor product
    /// `G_{r-k} x G_k` inside `G_r`.
    pub fn mtp_multiplicities(&self, r: u64, k: u64) -> Result<MtpMultiplicities> {
        if !self.is_kp() {
            return Err(Error::RequiresKazhdanPatterson("mtp_multiplicities"));
        }
        self.require_tame()?;
        if k == 0 || k >= r {
            return Err(Error::InvalidArgument(format!(
                "block split requires 0 < k < r, got r={r}, k={k}"
            )));
        }
        let (d_r, d_k, d_rk) = (self.d_r(r)?, self.d_r(k)?, self.d_r(r - k)?);
        let n2 = checked_mul(self.n, self.n, "mtp_multiplicities")?;
        let n4 = checked_mul(n2, n2, "mtp_multiplicities")?;
        let m = exact_div(
            checked_mul(n4, d_r, "mtp_multiplicities")?,
            d_rk * d_k,
            "n^4 d_r / (d_{r-k} d_k)",
        )?;
        // The ratio is rational in general: KP n=3, a=0, r=4, k=2 gives 1/3.
        let g = gcd(d_k * d_rk, d_r);
        let ratio = (d_k * d_rk / g, d_r / g);
        // m1 m2 / m must agree with the d-ratio.
        let lhs = checked_mul(
            checked_mul(n2, n2, "mtp_multiplicities")?,
            ratio.1,
            "mtp_multiplicities",
        )?;
        if lhs != checked_mul(m, ratio.0, "mtp_multiplicities")? {
            return Err(Error::Integrity {
                what: "m1 m2 = m * ratio",
                numerator: lhs,
                denominator: m,
            });
        }
        Ok(MtpMultiplicities {
            m1: n2,
            m2: n2,
            m,
            ratio,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MtpMultiplicities {
    pub m1: u64,
    pub m2: u64,
    pub m: u64,
    /// `m1 * m2 / m = d_k d_{r-k} / d_r` as a reduced fraction `(numerator, denominator)`.
    pub ratio: (u64, u64),
}

impl fmt::Display for CoverSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::KazhdanPatterson { a } => write!(f, "KP n={} a={a}", self.n),
            Family::Savin => write!(f, "S n={}", self.n),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct CoverJson {
    family: String,
    n: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tame: Option<bool>,
}

impl Serialize for CoverSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let family = if self.is_kp() { "KP" } else { "S" };
        CoverJson {
            family: family.to_owned(),
            n: self.n,
            a: self.twist(),
            tame: (!self.tame).then_some(false),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CoverSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = CoverJson::deserialize(deserializer)?;
        let family = match (raw.family.as_str(), raw.a) {
            ("KP", Some(a)) => Family::KazhdanPatterson { a },
            ("KP", None) => return Err(D::Error::custom("KP cover requires a twist \"a\"")),
            ("S", None) => Family::Savin,
            ("S", Some(_)) => return Err(D::Error::custom("S cover carries no twist")),
            (other, _) => return Err(D::Error::custom(format!("unknown family {other:?}"))),
        };
        CoverSpec::new(family, raw.n, raw.tame.unwrap_or(true)).map_err(D::Error::custom)
    }
}
