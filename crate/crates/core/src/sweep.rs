//! Exhaustive enumeration of small instances and verification of the
//! combinatorial identities on each of them.
//!
//! Cuspidal data are generated canonically: one line per admissible
//! `(r0, l)` class, since every formula factors through `(r0, l)`. Segments
//! are anchored at `0`; the quantities checked here depend only on segment
//! lengths.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::covers::CoverSpec;
use crate::derivatives::{
    c_m, derivative, derivative_z, is_generic, lambda_chain, lambda_of, wh_dim_l, wh_dim_product,
    wh_dim_z, wh_dim_z_multisegment, Tag, WhDim,
};
use crate::error::{Error, Result};
use crate::langlands::bv_consistency;
use crate::partitions::Partition;
use crate::segments::{CuspidalDatum, Multisegment, Segment};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    /// `lambda_m` is a partition of the total size.
    Lambda,
    /// Generic iff `lambda_m` has one part.
    Generic,
    /// `lambda_m` equals the BV dual of the parameter orbit (KP only).
    Bv,
    /// Every KP division by `d_r` is exact.
    Integrity,
    /// Single segments: the top-degree derivative chain matches `lambda_m`;
    /// `c_m = 1` when every `l_i >= n(rho_i)`.
    Chain,
    /// `n = 1`: `lambda_m` is the transpose of the length multiset.
    N1,
}

impl Check {
    pub const ALL: [Check; 6] = [
        Check::Lambda,
        Check::Generic,
        Check::Bv,
        Check::Integrity,
        Check::Chain,
        Check::N1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Lambda => "lambda",
            Check::Generic => "generic",
            Check::Bv => "bv",
            Check::Integrity => "integrity",
            Check::Chain => "chain",
            Check::N1 => "n1",
        }
    }

    /// Comma-separated list; `all` selects every check.
    pub fn parse_list(text: &str) -> Result<Vec<Check>> {
        let mut out = Vec::new();
        for word in text.split(',').map(str::trim).filter(|w| !w.is_empty()) {
            if word == "all" {
                out.extend(Check::ALL);
            } else {
                out.push(word.parse()?);
            }
        }
        out.sort();
        out.dedup();
        Ok(out)
    }
}

impl FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Check::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown check '{s}'")))
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parses a cover range such as `KP:n<=4,a in -1..1` or `S:n<=6`; several
/// ranges may be joined with `;`.
pub fn parse_cover_ranges(text: &str) -> Result<Vec<CoverSpec>> {
    let mut covers = Vec::new();
    for clause in text.split(';').map(str::trim).filter(|c| !c.is_empty()) {
        let bad = |why: &str| Error::InvalidArgument(format!("cover range '{clause}': {why}"));
        let (family, rest) = clause.split_once(':').unwrap_or((clause, ""));
        let family = family.trim();
        let mut n_range = None;
        let mut a_range = None;
        for cond in rest.split(',').map(str::trim).filter(|c| !c.is_empty()) {
            let (var, range) = parse_condition(cond).ok_or_else(|| bad("malformed condition"))?;
            match var {
                "n" => n_range = Some(range),
                "a" => a_range = Some(range),
                _ => return Err(bad("unknown variable")),
            }
        }
        let (n_lo, n_hi) = n_range.ok_or_else(|| bad("missing bound on n"))?;
        if n_lo < 1 {
            return Err(bad("n must be at least 1"));
        }
        for n in n_lo..=n_hi {
            match family {
                "KP" => {
                    let (a_lo, a_hi) = a_range.unwrap_or((0, 0));
                    for a in a_lo..=a_hi {
                        covers.push(CoverSpec::kp(n as u64, a)?);
                    }
                }
                "S" => {
                    if a_range.is_some() {
                        return Err(bad("S covers carry no twist"));
                    }
                    covers.push(CoverSpec::savin(n as u64)?);
                }
                _ => return Err(bad("family must be KP or S")),
            }
        }
    }
    if covers.is_empty() {
        return Err(Error::InvalidArgument("empty cover range".into()));
    }
    Ok(covers)
}

fn parse_condition(cond: &str) -> Option<(&str, (i64, i64))> {
    if let Some((var, hi)) = cond.split_once("<=") {
        let lo = if var.trim() == "n" { 1 } else { return None };
        return Some((var.trim(), (lo, hi.trim().parse().ok()?)));
    }
    if let Some((var, range)) = cond.split_once(" in ") {
        let (lo, hi) = range.trim().split_once("..")?;
        let lo = lo.trim().parse().ok()?;
        let hi = hi.trim().trim_start_matches('=').parse().ok()?;
        return Some((var.trim(), (lo, hi)));
    }
    if let Some((var, value)) = cond.split_once('=') {
        let v = value.trim().parse().ok()?;
        return Some((var.trim(), (v, v)));
    }
    None
}

/// One canonical cuspidal line per `(r0, l)` with `l | n`, and `l | r0` on KP covers.
pub fn canonical_lines(cover: &CoverSpec, max_r0: u64) -> Vec<CuspidalDatum> {
    let mut lines = Vec::new();
    for r0 in 1..=max_r0 {
        for l in (1..=cover.n()).filter(|l| cover.n().is_multiple_of(*l)) {
            if cover.is_kp() && r0 % l != 0 {
                continue;
            }
            let datum = CuspidalDatum::new(format!("r{r0}l{l}"), r0, l).expect("positive r0 and l");
            lines.push(datum);
        }
    }
    lines
}

/// Every multisegment of total size exactly `size` built from segments
/// `[0, len - 1]` on the given lines, in a fixed deterministic order.
pub fn multisegments_of_size(lines: &[CuspidalDatum], size: u64) -> Vec<Multisegment> {
    let mut kinds: Vec<(usize, u64, u64)> = Vec::new();
    for (idx, line) in lines.iter().enumerate() {
        for len in 1..=size / line.r0() {
            kinds.push((idx, len, len * line.r0()));
        }
    }
    let mut out = Vec::new();
    let mut chosen = Vec::new();
    fill(&kinds, 0, size, &mut chosen, &mut |picked: &[(
        usize,
        u64,
    )]| {
        let segments = picked
            .iter()
            .map(|&(idx, len)| {
                Segment::new(lines[idx].clone(), 0, len as i64 - 1).expect("positive length")
            })
            .collect();
        out.push(Multisegment::new(segments));
    });
    out
}

/// A chosen `(line index, length)` pair.
type Pick = (usize, u64);

fn fill(
    kinds: &[(usize, u64, u64)],
    start: usize,
    remaining: u64,
    chosen: &mut Vec<Pick>,
    emit: &mut dyn FnMut(&[Pick]),
) {
    if remaining == 0 {
        emit(chosen);
        return;
    }
    for k in start..kinds.len() {
        let (idx, len, weight) = kinds[k];
        if weight <= remaining {
            chosen.push((idx, len));
            fill(kinds, k, remaining - weight, chosen, emit);
            chosen.pop();
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub covers: Vec<CoverSpec>,
    pub max_size: u64,
    pub max_r0: u64,
    pub checks: Vec<Check>,
    /// Keep one record per instance (needed for CSV output).
    pub keep_records: bool,
    /// Worker threads; `None` lets rayon decide.
    pub threads: Option<usize>,
}

impl SweepConfig {
    pub fn new(covers: Vec<CoverSpec>, max_size: u64) -> Self {
        Self {
            covers,
            max_size,
            max_r0: 3,
            checks: Check::ALL.to_vec(),
            keep_records: false,
            threads: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InstanceRecord {
    pub multisegment: String,
    pub n: u64,
    pub family: &'static str,
    pub a: Option<i64>,
    pub lambda: Partition,
    pub bv: Option<Partition>,
    pub equal: Option<bool>,
    pub generic: bool,
    #[serde(rename = "whdimZ")]
    pub whdim_z: WhDim,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub check: Check,
    pub cover: CoverSpec,
    pub multisegment: String,
    pub detail: String,
}

/// Counts for one `(cover, size)` cell.
#[derive(Clone, Debug, Serialize)]
pub struct CellSummary {
    pub cover: CoverSpec,
    pub size: u64,
    pub instances: u64,
    pub failures: BTreeMap<Check, u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub checks: Vec<Check>,
    pub cells: Vec<CellSummary>,
    pub instances: u64,
    pub checks_run: BTreeMap<Check, u64>,
    pub failures_by_check: BTreeMap<Check, u64>,
    pub failures: Vec<Failure>,
    #[serde(skip)]
    pub records: Vec<InstanceRecord>,
}

impl SweepReport {
    pub fn total_failures(&self) -> u64 {
        self.failures_by_check.values().sum()
    }

    pub fn passed(&self) -> bool {
        self.total_failures() == 0
    }
}

struct CellOutcome {
    summary: CellSummary,
    runs: BTreeMap<Check, u64>,
    failures: Vec<Failure>,
    records: Vec<InstanceRecord>,
}

/// Runs the configured checks over every `(cover, size)` cell. Cells are
/// processed in parallel and aggregated in a fixed order.
pub fn run(config: &SweepConfig) -> Result<SweepReport> {
    let cells: Vec<(CoverSpec, u64)> = config
        .covers
        .iter()
        .flat_map(|c| (1..=config.max_size).map(move |s| (*c, s)))
        .collect();
    let work = || -> Result<Vec<CellOutcome>> {
        cells
            .par_iter()
            .map(|&(cover, size)| run_cell(config, cover, size))
            .collect()
    };
    let outcomes = match config.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };

    let mut report = SweepReport {
        checks: config.checks.clone(),
        cells: Vec::with_capacity(outcomes.len()),
        instances: 0,
        checks_run: BTreeMap::new(),
        failures_by_check: config.checks.iter().map(|&c| (c, 0)).collect(),
        failures: Vec::new(),
        records: Vec::new(),
    };
    for outcome in outcomes {
        report.instances += outcome.summary.instances;
        for (check, count) in &outcome.summary.failures {
            *report.failures_by_check.entry(*check).or_insert(0) += count;
        }
        for (check, count) in outcome.runs {
            *report.checks_run.entry(check).or_insert(0) += count;
        }
        report.failures.extend(outcome.failures);
        report.records.extend(outcome.records);
        report.cells.push(outcome.summary);
    }
    Ok(report)
}

fn run_cell(config: &SweepConfig, cover: CoverSpec, size: u64) -> Result<CellOutcome> {
    let lines = canonical_lines(&cover, config.max_r0);
    let family = if cover.is_kp() { "KP" } else { "S" };
    let mut outcome = CellOutcome {
        summary: CellSummary {
            cover,
            size,
            instances: 0,
            failures: config.checks.iter().map(|&c| (c, 0)).collect(),
        },
        runs: BTreeMap::new(),
        failures: Vec::new(),
        records: Vec::new(),
    };
    for m in multisegments_of_size(&lines, size) {
        outcome.summary.instances += 1;
        for &check in &config.checks {
            let verdict = match check_instance(check, &m, &cover) {
                Ok(v) => v,
                Err(e) => Verdict::Fail(e.to_string()),
            };
            match verdict {
                Verdict::Skip => {}
                Verdict::Pass => *outcome.runs.entry(check).or_insert(0) += 1,
                Verdict::Fail(detail) => {
                    *outcome.runs.entry(check).or_insert(0) += 1;
                    *outcome.summary.failures.entry(check).or_insert(0) += 1;
                    outcome.failures.push(Failure {
                        check,
                        cover,
                        multisegment: m.to_string(),
                        detail,
                    });
                }
            }
        }
        if config.keep_records {
            let lambda = lambda_of(&m, &cover)?;
            let (bv, equal) = if cover.is_kp() {
                let check = bv_consistency(&m, &cover)?;
                (Some(check.bv), Some(check.equal))
            } else {
                (None, None)
            };
            outcome.records.push(InstanceRecord {
                multisegment: m.to_string(),
                n: cover.n(),
                family,
                a: cover.twist(),
                lambda,
                bv,
                equal,
                generic: is_generic(&m, &cover)?,
                whdim_z: wh_dim_z_multisegment(&m, &cover)?,
            });
        }
    }
    Ok(outcome)
}

enum Verdict {
    Pass,
    Skip,
    Fail(String),
}

fn pass_if(ok: bool, detail: impl FnOnce() -> String) -> Verdict {
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail(detail())
    }
}

fn check_instance(check: Check, m: &Multisegment, cover: &CoverSpec) -> Result<Verdict> {
    Ok(match check {
        Check::Lambda => {
            let lambda = lambda_of(m, cover)?;
            let decreasing = lambda.parts().windows(2).all(|w| w[0] >= w[1]);
            pass_if(decreasing && lambda.size() == m.total_size(), || {
                format!("lambda {lambda} is not a partition of {}", m.total_size())
            })
        }
        Check::Generic => {
            let generic = is_generic(m, cover)?;
            let lambda = lambda_of(m, cover)?;
            pass_if(generic == (lambda.height() == 1), || {
                format!("generic={generic} but lambda={lambda}")
            })
        }
        Check::Bv => {
            if !cover.is_kp() {
                return Ok(Verdict::Skip);
            }
            let check = bv_consistency(m, cover)?;
            pass_if(check.equal, || {
                format!(
                    "lambda {} != bv {} of orbit {}",
                    check.lambda, check.bv, check.orbit
                )
            })
        }
        Check::Integrity => {
            integrity(m, cover)?;
            Verdict::Pass
        }
        Check::Chain => chain(m, cover)?,
        Check::N1 => {
            if cover.n() != 1 {
                return Ok(Verdict::Skip);
            }
            let lengths = Partition::from_unsorted(
                m.segments()
                    .iter()
                    .flat_map(|s| std::iter::repeat_n(s.len(), s.rho().r0() as usize)),
            );
            let expected = lengths.transpose();
            let lambda = lambda_of(m, cover)?;
            pass_if(lambda == expected, || {
                format!("lambda {lambda} != {expected}")
            })
        }
    })
}

/// Evaluates every formula that divides by `d_r`; any remainder surfaces as
/// an integrity error.
fn integrity(m: &Multisegment, cover: &CoverSpec) -> Result<()> {
    let mut factors = Vec::with_capacity(m.len());
    for s in m.segments() {
        factors.push((wh_dim_z(s, cover)?, s.size()));
        wh_dim_l(s, cover)?;
        for k in 0..=s.size() {
            derivative(s, k, Tag::Z, cover)?;
            derivative(s, k, Tag::L, cover)?;
        }
    }
    wh_dim_product(&factors, cover)?;
    c_m(m, cover)?;
    Ok(())
}

fn chain(m: &Multisegment, cover: &CoverSpec) -> Result<Verdict> {
    let saturated = m
        .segments()
        .iter()
        .map(|s| Ok(s.len() >= s.rho().n_rho(cover)?))
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .all(|b| b);
    if saturated {
        let c = c_m(m, cover)?;
        if c != 1 {
            return Ok(Verdict::Fail(format!(
                "c_m = {c} although every l_i >= n(rho_i)"
            )));
        }
    }
    let [single] = m.segments() else {
        return Ok(if saturated {
            Verdict::Pass
        } else {
            Verdict::Skip
        });
    };
    let expected = lambda_chain(m, cover)?;
    let mut current = Some(single.clone());
    for (step, (k, next)) in expected.iter().enumerate() {
        let Some(seg) = current.take() else {
            return Ok(Verdict::Fail(format!(
                "derivative chain ended early at step {step}"
            )));
        };
        let top = seg.top_degree(cover)?;
        let res = derivative_z(&seg, top, cover)?;
        if top != *k || res.is_zero() || res.term() != Some(next) {
            return Ok(Verdict::Fail(format!(
                "step {step}: derivative of degree {top} gives {}, chain expects degree {k} and {next}",
                res.value
            )));
        }
        // nothing above the top degree survives
        for above in top + 1..=seg.size() {
            if !derivative_z(&seg, above, cover)?.is_zero() {
                return Ok(Verdict::Fail(format!(
                    "nonzero derivative above degree {top}"
                )));
            }
        }
        current = next.segments().first().cloned();
    }
    Ok(if current.is_none() {
        Verdict::Pass
    } else {
        Verdict::Fail("derivative chain outlived the lambda chain".into())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cover_range_parsing() {
        let covers = parse_cover_ranges("KP:n<=4,a in -1..1").unwrap();
        assert_eq!(covers.len(), 12);
        assert_eq!(covers[0], CoverSpec::kp(1, -1).unwrap());
        let both = parse_cover_ranges("KP:n=2,a=0; S:n<=3").unwrap();
        assert_eq!(
            both,
            vec![
                CoverSpec::kp(2, 0).unwrap(),
                CoverSpec::savin(1).unwrap(),
                CoverSpec::savin(2).unwrap(),
                CoverSpec::savin(3).unwrap()
            ]
        );
        assert!(parse_cover_ranges("S:n<=2,a in 0..1").is_err());
        assert!(parse_cover_ranges("X:n<=2").is_err());
        assert!(parse_cover_ranges("KP:a=0").is_err());
        assert!(parse_cover_ranges("").is_err());
    }

    #[test]
    fn check_list_parsing() {
        assert_eq!(
            Check::parse_list("bv,lambda").unwrap(),
            vec![Check::Lambda, Check::Bv]
        );
        assert_eq!(Check::parse_list("all").unwrap().len(), 6);
        assert!(Check::parse_list("bogus").is_err());
    }

    #[test]
    fn canonical_lines_respect_divisibility() {
        let kp6 = CoverSpec::kp(6, 0).unwrap();
        let ids: Vec<String> = canonical_lines(&kp6, 3)
            .iter()
            .map(|d| d.id().to_owned())
            .collect();
        assert_eq!(ids, vec!["r1l1", "r2l1", "r2l2", "r3l1", "r3l3"]);
        assert_eq!(canonical_lines(&CoverSpec::savin(6).unwrap(), 3).len(), 12);
    }

    #[test]
    fn enumeration_counts_match_partition_numbers() {
        // A single r0 = 1 line: multisegments of size s are partitions of s.
        let line = vec![CuspidalDatum::new("p", 1, 1).unwrap()];
        let counts: Vec<usize> = (1..=8)
            .map(|s| multisegments_of_size(&line, s).len())
            .collect();
        assert_eq!(counts, vec![1, 2, 3, 5, 7, 11, 15, 22]);
        // Two r0 = 1 lines: bipartitions 2, 5, 10, 20.
        let two = vec![
            CuspidalDatum::new("p", 1, 1).unwrap(),
            CuspidalDatum::new("q", 1, 1).unwrap(),
        ];
        let counts: Vec<usize> = (1..=4)
            .map(|s| multisegments_of_size(&two, s).len())
            .collect();
        assert_eq!(counts, vec![2, 5, 10, 20]);
    }

    #[test]
    fn small_sweep_passes_every_check() {
        let mut config =
            SweepConfig::new(parse_cover_ranges("KP:n<=3,a in -1..1;S:n<=3").unwrap(), 5);
        config.keep_records = true;
        let report = run(&config).unwrap();
        assert!(report.passed(), "{:?}", report.failures);
        assert_eq!(report.records.len() as u64, report.instances);
    }
}
