//! Parameter-side computations for KP covers: the nilpotent orbit of the
//! L-parameter of `L(m)`, the wavefront set of `Z(m)` and their comparison
//! through the covering Barbasch–Vogan duality.
//!
//! The metaplectic correspondence enters only through its numerical shadow:
//! a cuspidal `rho` of `GL_{r0}` with invariant `l` lifts to a segment of
//! length `l` over a cuspidal of `GL_{r0 / l}`.

use serde::Serialize;

use crate::arith::lcm;
use crate::covers::CoverSpec;
use crate::derivatives::{is_generic, lambda_of};
use crate::error::{Error, Result};
use crate::partitions::{bv_dual, Partition};
use crate::segments::{CuspidalDatum, Multisegment, Segment};

/// One segment's contribution: the part `seg_len * l_rho` repeated `r_sharp` times.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct OrbitBlock {
    pub seg_len: u64,
    pub l_rho: u64,
    pub r_sharp: u64,
}

impl OrbitBlock {
    pub fn part(&self) -> u64 {
        self.seg_len * self.l_rho
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ParameterOrbit {
    partition: Partition,
    provenance: Vec<OrbitBlock>,
}

impl ParameterOrbit {
    pub fn from_blocks(provenance: Vec<OrbitBlock>) -> Result<Self> {
        if provenance
            .iter()
            .any(|b| b.seg_len == 0 || b.l_rho == 0 || b.r_sharp == 0)
        {
            return Err(Error::InvalidArgument(
                "orbit blocks must be positive".into(),
            ));
        }
        let partition = Partition::from_unsorted(
            provenance
                .iter()
                .flat_map(|b| std::iter::repeat_n(b.part(), b.r_sharp as usize)),
        );
        Ok(Self {
            partition,
            provenance,
        })
    }

    /// Reads every part of `p` as a segment over an `l = 1` line.
    pub fn from_partition(p: &Partition) -> Self {
        let provenance = p
            .parts()
            .iter()
            .map(|&part| OrbitBlock {
                seg_len: part,
                l_rho: 1,
                r_sharp: 1,
            })
            .collect();
        Self {
            partition: p.clone(),
            provenance,
        }
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn provenance(&self) -> &[OrbitBlock] {
        &self.provenance
    }

    /// `sum r_sharp`, which equals the number of parts.
    pub fn height(&self) -> u64 {
        self.provenance.iter().map(|b| b.r_sharp).sum()
    }
}

/// `WF(Z(m)) = {lambda_m}`; returns the single orbit.
pub fn wavefront(m: &Multisegment, cover: &CoverSpec) -> Result<Partition> {
    cover.require_tame()?;
    lambda_of(m, cover)
}

/// The orbit `((l_i l(rho_i))^{r_i^sharp})` of the L-parameter of `L(m)`.
pub fn parameter_orbit(m: &Multisegment, cover: &CoverSpec) -> Result<ParameterOrbit> {
    if !cover.is_kp() {
        return Err(Error::RequiresKazhdanPatterson(
            "parameter orbit defined only for KP covers",
        ));
    }
    m.validate(cover)?;
    let blocks = m
        .segments()
        .iter()
        .map(|s| OrbitBlock {
            seg_len: s.len(),
            l_rho: s.rho().l(),
            r_sharp: s.rho().r0() / s.rho().l(),
        })
        .collect();
    ParameterOrbit::from_blocks(blocks)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BvCheck {
    pub lambda: Partition,
    pub bv: Partition,
    pub equal: bool,
    pub orbit: Partition,
}

/// Compares `lambda_m` with the covering BV dual of the parameter orbit.
///
/// The leading part `sum r_sharp * min(n, l_i l(rho_i))` of the dual is also
/// checked against `k_m`; a mismatch is reported as an integrity error.
pub fn bv_consistency(m: &Multisegment, cover: &CoverSpec) -> Result<BvCheck> {
    let orbit = parameter_orbit(m, cover)?;
    let lambda = wavefront(m, cover)?;
    let bv = bv_dual(orbit.partition(), cover.n_alpha());
    let leading: u64 = orbit
        .provenance()
        .iter()
        .map(|b| b.r_sharp * cover.n().min(b.part()))
        .sum();
    let k_m = m.k_m(cover)?;
    if leading != k_m || bv.part(0) != leading {
        return Err(Error::Integrity {
            what: "leading part of the BV dual equals k_m",
            numerator: leading,
            denominator: k_m,
        });
    }
    Ok(BvCheck {
        equal: lambda == bv,
        lambda,
        bv,
        orbit: orbit.partition,
    })
}

/// The same comparison on a Savin cover, where no theorem backs it. The
/// orbit is built by the KP recipe, so every `l(rho)` must divide `r0`.
pub fn bv_comparison_conjectural(m: &Multisegment, cover: &CoverSpec) -> Result<BvCheck> {
    if cover.is_kp() {
        return bv_consistency(m, cover);
    }
    m.validate(cover)?;
    let mut blocks = Vec::with_capacity(m.len());
    for s in m.segments() {
        let rho = s.rho();
        if rho.r0() % rho.l() != 0 {
            return Err(Error::InvalidCuspidal {
                id: rho.id().to_owned(),
                reason: format!("l={} does not divide r0={}", rho.l(), rho.r0()),
            });
        }
        blocks.push(OrbitBlock {
            seg_len: s.len(),
            l_rho: rho.l(),
            r_sharp: rho.r0() / rho.l(),
        });
    }
    let orbit = ParameterOrbit::from_blocks(blocks)?;
    let lambda = wavefront(m, cover)?;
    let bv = bv_dual(orbit.partition(), cover.n_alpha());
    Ok(BvCheck {
        equal: lambda == bv,
        lambda,
        bv,
        orbit: orbit.partition,
    })
}

/// Smallest cover degree at which the lift of the orbit's representation is
/// generic, checked level by level with the derivative engine. Levels where
/// some `l(rho)` does not divide the degree are skipped.
pub fn min_generic_level(orbit: &ParameterOrbit) -> Result<u64> {
    let blocks = orbit.provenance();
    if blocks.is_empty() {
        return Ok(1);
    }
    let step = blocks.iter().fold(1, |acc, b| lcm(acc, b.l_rho));
    let width = orbit.partition().width();
    // The first admissible level at or above the width is generic, so the
    // search terminates there.
    let limit = width.div_ceil(step) * step;
    for level in 1..=limit {
        if level % step != 0 {
            continue;
        }
        let cover = CoverSpec::kp(level, 0)?;
        let lifted = lift(blocks, &cover)?;
        if is_generic(&lifted, &cover)? {
            if step == 1 && level != width {
                return Err(Error::Integrity {
                    what: "minimal generic level equals the orbit width",
                    numerator: level,
                    denominator: width,
                });
            }
            return Ok(level);
        }
    }
    Err(Error::Integrity {
        what: "a generic level exists at or below the padded width",
        numerator: limit,
        denominator: step,
    })
}

fn lift(blocks: &[OrbitBlock], cover: &CoverSpec) -> Result<Multisegment> {
    let mut segments = Vec::with_capacity(blocks.len());
    for (i, b) in blocks.iter().enumerate() {
        let rho =
            CuspidalDatum::for_cover(format!("lift{i}"), b.r_sharp * b.l_rho, b.l_rho, cover)?;
        segments.push(Segment::new(rho, 0, b.seg_len as i64 - 1)?);
    }
    Ok(Multisegment::new(segments))
}
