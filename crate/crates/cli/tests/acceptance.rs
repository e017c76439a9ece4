//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.
//!
//! Expected values come from oracles written here, independent of the
//! library code paths they check.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use covseg::derivatives::{
    c_m, derivative, derivative_z, is_generic, lambda_of, wh_dim_l, wh_dim_product, wh_dim_z, Tag,
};
use covseg::langlands::parameter_orbit;
use covseg::partitions::{bv_dual, sum};
use covseg::sweep::{canonical_lines, multisegments_of_size};
use covseg::{CoverSpec, CuspidalDatum, Multisegment, Partition, Segment, Session};
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;

struct Verdict {
    failures: Vec<String>,
    checked: u64,
}

impl Verdict {
    fn new() -> Self {
        Self {
            failures: Vec::new(),
            checked: 0,
        }
    }

    fn check(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures.push(detail());
        }
    }
}

struct Report {
    all_passed: bool,
}

impl Report {
    fn record(
        &mut self,
        id: u32,
        title: &str,
        limit: Option<Duration>,
        elapsed: Duration,
        v: Verdict,
    ) {
        let in_time = limit.is_none_or(|l| elapsed < l);
        let pass = v.failures.is_empty() && in_time && v.checked > 0;
        self.all_passed &= pass;
        let limit_text = limit.map_or(String::new(), |l| format!(", limit {l:?}"));
        println!(
            "{} criterion {id}: {title} ({} checked, {} failures, {:.3?}{limit_text})",
            if pass { "PASS" } else { "FAIL" },
            v.checked,
            v.failures.len(),
            elapsed,
        );
        for f in v.failures.iter().take(5) {
            println!("    {f}");
        }
    }
}

// ---- oracles ----

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn d_oracle(n: u64, a: i64, r: u64) -> u64 {
    gcd(n, (2 * a * r as i64 - r as i64 + 1).unsigned_abs())
}

fn partitions_oracle(n: u64, max: u64, prefix: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
    if n == 0 {
        out.push(prefix.clone());
        return;
    }
    for first in (1..=n.min(max)).rev() {
        prefix.push(first);
        partitions_oracle(n - first, first, prefix, out);
        prefix.pop();
    }
}

fn transpose_oracle(parts: &[u64]) -> Vec<u64> {
    let width = parts.iter().copied().max().unwrap_or(0);
    (1..=width)
        .map(|j| parts.iter().filter(|&&p| p >= j).count() as u64)
        .collect()
}

fn sorted_desc(mut v: Vec<u64>) -> Vec<u64> {
    v.sort_unstable_by(|a, b| b.cmp(a));
    v.retain(|&x| x > 0);
    v
}

/// Segment data reduced to what the identities consume.
#[derive(Clone, Copy)]
struct Seg {
    len: u64,
    r0: u64,
    l_rho: u64,
}

fn segs(m: &Multisegment) -> Vec<Seg> {
    m.segments()
        .iter()
        .map(|s| Seg {
            len: s.len(),
            r0: s.rho().r0(),
            l_rho: s.rho().l(),
        })
        .collect()
}

/// `lambda` by shortening every segment by `min(len, n/l_rho)` until empty.
fn lambda_oracle(segs: &[Seg], n: u64) -> Vec<u64> {
    let mut lens: Vec<u64> = segs.iter().map(|s| s.len).collect();
    let mut out = Vec::new();
    while lens.iter().any(|&l| l > 0) {
        let mut k = 0;
        for (l, s) in lens.iter_mut().zip(segs) {
            let step = (*l).min(n / s.l_rho);
            k += s.r0 * step;
            *l -= step;
        }
        out.push(k);
    }
    out
}

/// Covering BV dual: split each part into columns of height `n_alpha`, sort
/// each, add componentwise.
fn bv_oracle(parts: &[u64], n_alpha: u64) -> Vec<u64> {
    let mut acc: Vec<u64> = Vec::new();
    for &p in parts {
        let mut cols = vec![n_alpha; (p / n_alpha) as usize];
        if p % n_alpha > 0 {
            cols.push(p % n_alpha);
        }
        if acc.len() < cols.len() {
            acc.resize(cols.len(), 0);
        }
        for (a, c) in acc.iter_mut().zip(cols) {
            *a += c;
        }
    }
    sorted_desc(acc)
}

/// Number of multisegments of a given size: coefficient extraction from
/// `prod 1/(1 - x^(r0 * len))` over lines and lengths.
fn count_oracle(lines: &[CuspidalDatum], size: u64) -> u64 {
    let mut ways = vec![0u64; size as usize + 1];
    ways[0] = 1;
    for line in lines {
        for len in 1..=size {
            let w = (line.r0() * len) as usize;
            for t in w..=size as usize {
                ways[t] += ways[t - w];
            }
        }
    }
    ways[size as usize]
}

// ---- sweep ----

struct Instance {
    cover: CoverSpec,
    m: Multisegment,
}

fn sweep_covers() -> Vec<CoverSpec> {
    let mut covers = Vec::new();
    for n in 1..=6 {
        for a in -2..=2 {
            covers.push(CoverSpec::kp(n, a).unwrap());
        }
    }
    for n in 1..=6 {
        covers.push(CoverSpec::savin(n).unwrap());
    }
    covers
}

fn build_sweep(v: &mut Verdict) -> Vec<Instance> {
    let mut out = Vec::new();
    for cover in sweep_covers() {
        let lines = canonical_lines(&cover, 3);
        for size in 1..=10 {
            let ms = multisegments_of_size(&lines, size);
            v.check(ms.len() as u64 == count_oracle(&lines, size), || {
                format!("{cover} size {size}: enumerated {} multisegments", ms.len())
            });
            out.extend(ms.into_iter().map(|m| Instance { cover, m }));
        }
    }
    out
}

fn criterion3(instances: &[Instance], v: &mut Verdict) {
    for inst in instances {
        match lambda_of(&inst.m, &inst.cover) {
            Ok(l) => {
                let decreasing = l.parts().windows(2).all(|w| w[0] >= w[1]);
                let total: u64 = l.parts().iter().sum();
                v.check(decreasing && total == inst.m.total_size(), || {
                    format!("{} on {}: lambda {l}", inst.m, inst.cover)
                });
                v.check(
                    l.parts() == lambda_oracle(&segs(&inst.m), inst.cover.n()),
                    || {
                        format!(
                            "{} on {}: lambda {l} disagrees with the oracle",
                            inst.m, inst.cover
                        )
                    },
                );
            }
            Err(e) => v.check(false, || format!("{} on {}: {e}", inst.m, inst.cover)),
        }
    }
}

fn criterion4(instances: &[Instance], v: &mut Verdict) {
    for inst in instances.iter().filter(|i| i.cover.is_kp()) {
        let (m, cover) = (&inst.m, &inst.cover);
        let n = cover.n();
        let (lambda, orbit) = match (lambda_of(m, cover), parameter_orbit(m, cover)) {
            (Ok(l), Ok(o)) => (l, o),
            (Err(e), _) | (_, Err(e)) => {
                v.check(false, || format!("{m} on {cover}: {e}"));
                continue;
            }
        };
        let s = segs(m);
        let orbit_oracle = sorted_desc(
            s.iter()
                .flat_map(|g| std::iter::repeat_n(g.len * g.l_rho, (g.r0 / g.l_rho) as usize))
                .collect(),
        );
        v.check(orbit.partition().parts() == orbit_oracle, || {
            format!("{m} on {cover}: orbit {}", orbit.partition())
        });
        let bv = bv_dual(orbit.partition(), cover.n_alpha());
        v.check(bv.parts() == bv_oracle(&orbit_oracle, n), || {
            format!("{m} on {cover}: bv_dual {bv} disagrees with the oracle")
        });
        v.check(lambda == bv, || {
            format!("{m} on {cover}: lambda {lambda} != bv {bv}")
        });
        let leading: u64 = s
            .iter()
            .map(|g| (g.r0 / g.l_rho) * n.min(g.len * g.l_rho))
            .sum();
        let k_m: u64 = s.iter().map(|g| g.r0 * g.len.min(n / g.l_rho)).sum();
        v.check(
            leading == k_m && bv.part(0) == k_m && m.k_m(cover) == Ok(k_m),
            || format!("{m} on {cover}: leading {leading}, k_m {k_m}, bv {bv}"),
        );
    }
}

fn criterion5(instances: &[Instance], v: &mut Verdict) {
    for inst in instances {
        let (m, cover) = (&inst.m, &inst.cover);
        match (is_generic(m, cover), lambda_of(m, cover)) {
            (Ok(g), Ok(l)) => {
                let oracle = segs(m).iter().all(|s| s.len <= cover.n() / s.l_rho);
                v.check(g == (l.height() == 1) && g == oracle, || {
                    format!("{m} on {cover}: generic={g}, lambda={l}, oracle={oracle}")
                });
            }
            (Err(e), _) | (_, Err(e)) => v.check(false, || format!("{m} on {cover}: {e}")),
        }
    }
}

fn criterion6(instances: &[Instance], v: &mut Verdict) {
    for inst in instances.iter().filter(|i| i.cover.n() == 1) {
        let weighted: Vec<u64> = segs(&inst.m)
            .iter()
            .flat_map(|s| std::iter::repeat_n(s.len, s.r0 as usize))
            .collect();
        let expected = transpose_oracle(&weighted);
        match lambda_of(&inst.m, &inst.cover) {
            Ok(l) => v.check(l.parts() == expected, || {
                format!(
                    "{} on {}: lambda {l}, expected {expected:?}",
                    inst.m, inst.cover
                )
            }),
            Err(e) => v.check(false, || format!("{} on {}: {e}", inst.m, inst.cover)),
        }
    }
}

fn binom(n: u64, k: u64) -> u64 {
    if k > n {
        0
    } else {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }
}

fn criterion7(instances: &[Instance], v: &mut Verdict) {
    for inst in instances {
        let (m, cover) = (&inst.m, &inst.cover);
        let run = || -> covseg::Result<()> {
            let mut factors = Vec::new();
            for s in m.segments() {
                let z = wh_dim_z(s, cover)?;
                let l = wh_dim_l(s, cover)?;
                if let Some(a) = cover.twist() {
                    let n_rho = cover.n() / s.rho().l();
                    let d = d_oracle(cover.n(), a, s.size());
                    let (bz, bl) = (binom(n_rho, s.len()), binom(n_rho + s.len() - 1, s.len()));
                    if bz % d != 0 || bl % d != 0 || z != bz / d || l != bl / d {
                        return Err(covseg::Error::InvalidArgument(format!(
                            "{s}: wh dims {z}, {l}"
                        )));
                    }
                }
                factors.push((z, s.size()));
                for k in 0..=s.size() {
                    derivative(s, k, Tag::Z, cover)?;
                    derivative(s, k, Tag::L, cover)?;
                }
            }
            wh_dim_product(&factors, cover)?;
            c_m(m, cover)?;
            Ok(())
        };
        let outcome = run();
        v.check(outcome.is_ok(), || {
            format!("{m} on {cover}: {}", outcome.unwrap_err())
        });
    }
}

fn criterion8(instances: &[Instance], v: &mut Verdict) {
    for inst in instances {
        let (m, cover) = (&inst.m, &inst.cover);
        let s = segs(m);
        if s.iter().all(|g| g.len >= cover.n() / g.l_rho) {
            let c = c_m(m, cover);
            v.check(c == Ok(1), || format!("{m} on {cover}: c_m = {c:?}"));
        }
        let [seg] = m.segments() else { continue };
        let n_rho = cover.n() / seg.rho().l();
        let r0 = seg.rho().r0();
        let mut current = Some(seg.clone());
        let mut remaining = seg.len();
        while remaining > 0 {
            let step = remaining.min(n_rho);
            let expected_next = Segment::new_or_empty(
                seg.rho().clone(),
                seg.a(),
                seg.a() + (remaining - step) as i64 - 1,
            );
            let cur = current.take().expect("chain alive");
            let ok = derivative_z(&cur, r0 * step, cover).map(|res| {
                let term = Multisegment::new(expected_next.clone().into_iter().collect());
                !res.is_zero() && res.term() == Some(&term) && res.degree == r0 * step
            });
            let above_zero = (r0 * step + 1..=cur.size())
                .all(|k| derivative_z(&cur, k, cover).is_ok_and(|r| r.is_zero()));
            v.check(ok == Ok(true) && above_zero, || {
                format!("{m} on {cover}: chain step at length {remaining} failed ({ok:?}, above zero {above_zero})")
            });
            remaining -= step;
            current = expected_next;
        }
    }
}

// ---- criterion 9 ----

/// Degree, optional KP twist, cuspidal `(r0, l)` pairs, multisegments as
/// `(cuspidal index, start, length)` lists.
type SessionSpec = (
    u64,
    Option<i64>,
    Vec<(u64, u64)>,
    Vec<Vec<(usize, i64, u64)>>,
);

fn session_strategy() -> impl Strategy<Value = SessionSpec> {
    (1u64..=8, proptest::option::of(-3i64..=3)).prop_flat_map(|(n, a)| {
        let divisors: Vec<u64> = (1..=n).filter(|l| n % l == 0).collect();
        let cusp = proptest::collection::vec((1u64..=4, proptest::sample::select(divisors)), 1..4);
        let ms = proptest::collection::vec(
            proptest::collection::vec((0usize..4, -5i64..=5, 1u64..=4), 1..4),
            0..4,
        );
        (
            proptest::strategy::Just(n),
            proptest::strategy::Just(a),
            cusp,
            ms,
        )
    })
}

fn build_session(params: &SessionSpec) -> Session {
    let (n, a, cusp, ms) = params;
    let cover = match a {
        Some(a) => CoverSpec::kp(*n, *a).unwrap(),
        None => CoverSpec::savin(*n).unwrap(),
    };
    let mut session = Session::new(cover);
    let mut data = Vec::new();
    for (i, &(r0, l)) in cusp.iter().enumerate() {
        // KP needs l | r0
        let r0 = if cover.is_kp() { r0 * l } else { r0 };
        let datum = CuspidalDatum::for_cover(format!("rho{i}"), r0, l, &cover).unwrap();
        session
            .cuspidals
            .insert(datum.id().to_owned(), datum.clone());
        data.push(datum);
    }
    for (j, segs) in ms.iter().enumerate() {
        let segments = segs
            .iter()
            .map(|&(idx, start, len)| {
                Segment::new(
                    data[idx % data.len()].clone(),
                    start,
                    start + len as i64 - 1,
                )
                .unwrap()
            })
            .collect();
        session
            .multisegments
            .insert(format!("M{j}"), Multisegment::new(segments));
    }
    session
}

fn noisy(text: &str) -> String {
    let mut out = String::from("# generated\n\n");
    for line in text.lines() {
        out.push_str("  ");
        out.push_str(&line.replace(' ', " \t ").replace(',', " , "));
        out.push_str("   # trailing comment\n");
    }
    out
}

fn criterion9(v: &mut Verdict) {
    let mut runner = TestRunner::deterministic();
    let strategy = session_strategy();
    for _ in 0..1000 {
        let params = strategy.new_tree(&mut runner).unwrap().current();
        let session = build_session(&params);
        let printed = session.to_string();
        match Session::parse(&printed) {
            Ok(parsed) => {
                v.check(parsed == session, || {
                    format!("round trip changed:\n{printed}")
                });
                v.check(parsed.to_string() == printed, || {
                    format!("print not stable:\n{printed}")
                });
            }
            Err(e) => v.check(false, || format!("{e}:\n{printed}")),
        }
        let noisy_text = noisy(&printed);
        v.check(Session::parse(&noisy_text).as_ref() == Ok(&session), || {
            format!("whitespace/comments changed the session:\n{noisy_text}")
        });
    }
    for format in ["table", "json", "csv"] {
        let args = [
            "enumerate",
            "--max-size",
            "7",
            "--covers",
            "KP:n<=6,a in -2..2;S:n<=6",
            "--format",
            format,
        ];
        let run = || {
            Command::new(env!("CARGO_BIN_EXE_covseg"))
                .args(args)
                .output()
                .unwrap()
        };
        let (first, second) = (run(), run());
        v.check(first.status.success() && !first.stdout.is_empty(), || {
            format!(
                "enumerate --format {format} exited with {:?}",
                first.status.code()
            )
        });
        v.check(first.stdout == second.stdout, || {
            format!("enumerate --format {format} differs between runs")
        });
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn main() -> ExitCode {
    let mut report = Report { all_passed: true };

    let ps = [vec![5, 4, 2, 2], vec![6, 3], vec![5, 2, 2]].map(|p| Partition::new(p).unwrap());
    let (total, t) = timed(|| sum(&ps));
    let mut v = Verdict::new();
    v.check(total.parts() == [16, 9, 4, 2], || format!("sum = {total}"));
    report.record(
        1,
        "partition sum example",
        Some(Duration::from_millis(1)),
        t,
        v,
    );

    let (v, t) = timed(|| {
        let mut v = Verdict::new();
        for n in 0..=20 {
            let mut expected = Vec::new();
            partitions_oracle(n, n, &mut Vec::new(), &mut expected);
            let ours: Vec<Partition> = Partition::all_of(n).collect();
            v.check(ours.len() == expected.len(), || {
                format!("size {n}: {} partitions", ours.len())
            });
            for (p, e) in ours.iter().zip(&expected) {
                let dual = bv_dual(p, 1);
                v.check(
                    p.parts() == e.as_slice() && dual.parts() == transpose_oracle(e),
                    || format!("bv_dual({p}, 1) = {dual}"),
                );
            }
        }
        v
    });
    report.record(
        2,
        "bv_dual(p, 1) = transpose(p), size <= 20",
        Some(Duration::from_secs(10)),
        t,
        v,
    );

    let minute = Some(Duration::from_secs(60));
    let ((instances, v), t) = timed(|| {
        let mut v = Verdict::new();
        let instances = build_sweep(&mut v);
        criterion3(&instances, &mut v);
        (instances, v)
    });
    report.record(3, "lambda is a partition of the total size", minute, t, v);

    type Criterion = fn(&[Instance], &mut Verdict);
    let sweep_criteria: [(u32, &str, Criterion); 5] = [
        (
            4,
            "lambda = BV dual of the parameter orbit, leading part = k_m (KP)",
            criterion4,
        ),
        (5, "generic iff lambda has one part", criterion5),
        (
            6,
            "n = 1: lambda is the transpose of the weighted lengths",
            criterion6,
        ),
        (7, "KP integrality of every d_r division", criterion7),
        (
            8,
            "segment derivative chain and c_m = 1 when saturated",
            criterion8,
        ),
    ];
    for (id, title, f) in sweep_criteria {
        let (v, t) = timed(|| {
            let mut v = Verdict::new();
            f(&instances, &mut v);
            v
        });
        report.record(id, title, minute, t, v);
    }

    let (v, t) = timed(|| {
        let mut v = Verdict::new();
        criterion9(&mut v);
        v
    });
    report.record(
        9,
        "session round trip and deterministic enumerate",
        None,
        t,
        v,
    );

    if report.all_passed {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: FAILED");
        ExitCode::FAILURE
    }
}
