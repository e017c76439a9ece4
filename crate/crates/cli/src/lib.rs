//! Command-line front end: argument model, command dispatch and the
//! table/JSON/CSV emitters.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use covseg::derivatives::{
    derivative, highest_derivative, is_generic, lambda_of, semi_whittaker_nonzero, wh_dim_l,
    wh_dim_z_multisegment, WhDim,
};
use covseg::langlands::{bv_comparison_conjectural, bv_consistency, wavefront};
use covseg::partitions::{bv_dual, sum};
use covseg::sweep::{self, Check, SweepConfig, SweepReport};
use covseg::{Composition, CoverSpec, Multisegment, Partition, Segment, Session, Tag};
use serde_json::{json, Value};

/// Exit code for a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit code for usage, input and parse errors.
pub const EXIT_USAGE: i32 = 1;
/// Exit code for a failed verification.
pub const EXIT_VERIFY: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "covseg",
    version,
    about = "Derivative, Whittaker and wavefront calculator for KP and S covers of GL_r"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Write the report to FILE instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    #[value(name = "Z", alias = "z")]
    Z,
    #[value(name = "L", alias = "l")]
    L,
}

#[derive(Args, Debug, Clone)]
pub struct SessionArgs {
    /// Session file; `-` reads stdin.
    pub file: PathBuf,
    /// Restrict to one named multisegment.
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Highest-derivative partition lambda_m, with k_m, the socle and c_m.
    Lambda(SessionArgs),
    /// Wavefront set of Z(m).
    Wf(SessionArgs),
    /// Whether Z(m) is generic.
    Generic(SessionArgs),
    /// Whittaker dimensions of Z(m), and of L(m) for single segments.
    Whdim(SessionArgs),
    /// k-th derivative of one segment.
    Derive {
        #[command(flatten)]
        session: SessionArgs,
        /// Derivative degree.
        #[arg(long)]
        k: u64,
        #[arg(long, value_enum, default_value_t = Kind::Z)]
        kind: Kind,
        /// Segment index within the multisegment, in normal order.
        #[arg(long)]
        segment: Option<usize>,
    },
    /// Compare lambda_m with the BV dual of the parameter orbit.
    Bvcheck(SessionArgs),
    /// Whether Z(segment) has a nonzero semi-Whittaker model of type LAMBDA.
    Semiwh {
        #[command(flatten)]
        session: SessionArgs,
        /// Composition such as `2,1`.
        #[arg(long)]
        lambda: String,
        #[arg(long)]
        segment: Option<usize>,
    },
    /// Exhaustive sweep verifying the identities on all small instances.
    Enumerate {
        #[arg(long, default_value_t = 6)]
        max_size: u64,
        /// Cover ranges, e.g. `KP:n<=4,a in -1..1;S:n<=6`.
        #[arg(long, default_value = "KP:n<=4,a in -1..1")]
        covers: String,
        /// Comma-separated checks: lambda,generic,bv,integrity,chain,n1 or all.
        #[arg(long, default_value = "all")]
        check: String,
        /// Largest cuspidal block size r0.
        #[arg(long, default_value_t = 3)]
        max_r0: u64,
    },
    /// Built-in consistency checks.
    Selftest,
}

/// A failed run: message for stderr plus exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<covseg::Error> for CliError {
    fn from(e: covseg::Error) -> Self {
        let code = match e {
            covseg::Error::Integrity { .. } => EXIT_VERIFY,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

/// Rendered report and its exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub text: String,
    pub code: i32,
}

struct Field {
    /// Column name in JSON and CSV.
    key: &'static str,
    /// Label in table output.
    label: &'static str,
    text: String,
    json: Value,
}

impl Field {
    fn new(key: &'static str, label: &'static str, text: impl ToString, json: Value) -> Self {
        Self {
            key,
            label,
            text: text.to_string(),
            json,
        }
    }

    fn plain<T: ToString + serde::Serialize>(key: &'static str, value: T) -> Self {
        let json = serde_json::to_value(&value).expect("serializable");
        Self::new(key, key, value.to_string(), json)
    }
}

struct Row {
    name: String,
    multisegment: String,
    fields: Vec<Field>,
}

struct RowReport {
    command: &'static str,
    cover: CoverSpec,
    rows: Vec<Row>,
    ok: bool,
    note: Option<&'static str>,
}

/// Runs a parsed command line and renders its report.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let (text, ok) = match &cli.command {
        Command::Enumerate {
            max_size,
            covers,
            check,
            max_r0,
        } => {
            let report = enumerate(*max_size, covers, check, *max_r0, cli.format == Format::Csv)?;
            (render_sweep(&report, cli.format)?, report.passed())
        }
        Command::Selftest => {
            let checks = selftest();
            let ok = checks.iter().all(|c| c.pass);
            (render_selftest(&checks, cli.format)?, ok)
        }
        command => {
            let report = session_command(command)?;
            (render_rows(&report, cli.format)?, report.ok)
        }
    };
    Ok(Outcome {
        text,
        code: if ok { EXIT_OK } else { EXIT_VERIFY },
    })
}

fn load_session(args: &SessionArgs) -> Result<Session, CliError> {
    let text = if args.file.as_os_str() == "-" {
        std::io::read_to_string(std::io::stdin())
    } else {
        std::fs::read_to_string(&args.file)
    }
    .map_err(|e| CliError::usage(format!("{}: {e}", args.file.display())))?;
    Session::parse(&text).map_err(|e| CliError::usage(format!("{}: {e}", args.file.display())))
}

fn selected<'s>(
    session: &'s Session,
    args: &SessionArgs,
) -> Result<Vec<(&'s String, &'s Multisegment)>, CliError> {
    match &args.name {
        Some(name) => session
            .multisegments
            .get_key_value(name)
            .map(|kv| vec![kv])
            .ok_or_else(|| CliError::usage(format!("no multisegment named '{name}'"))),
        None => Ok(session.multisegments.iter().collect()),
    }
}

fn pick_segment<'m>(
    name: &str,
    m: &'m Multisegment,
    index: Option<usize>,
) -> Result<&'m Segment, CliError> {
    match (index, m.segments()) {
        (None, [single]) => Ok(single),
        (None, segs) => Err(CliError::usage(format!(
            "multisegment {name} has {} segments; pass --segment",
            segs.len()
        ))),
        (Some(i), segs) => segs
            .get(i)
            .ok_or_else(|| CliError::usage(format!("multisegment {name} has no segment {i}"))),
    }
}

fn partition_field(key: &'static str, label: &'static str, p: &Partition) -> Field {
    Field::new(key, label, p, json!(p.parts()))
}

fn session_command(command: &Command) -> Result<RowReport, CliError> {
    let args = match command {
        Command::Lambda(a)
        | Command::Wf(a)
        | Command::Generic(a)
        | Command::Whdim(a)
        | Command::Bvcheck(a) => a,
        Command::Derive { session, .. } | Command::Semiwh { session, .. } => session,
        Command::Enumerate { .. } | Command::Selftest => unreachable!("handled by run"),
    };
    let session = load_session(args)?;
    let cover = session.cover;
    let mut report = RowReport {
        command: "",
        cover,
        rows: Vec::new(),
        ok: true,
        note: None,
    };
    for (name, m) in selected(&session, args)? {
        let fields = match command {
            Command::Lambda(_) => {
                report.command = "lambda";
                let top = highest_derivative(m, &cover)?;
                vec![
                    partition_field("lambda", "lambda", &lambda_of(m, &cover)?),
                    Field::plain("k", top.degree),
                    Field::new("socle", "socle", &top.socle, json!(top.socle.to_string())),
                    Field::plain("c_m", top.socle_multiplicity),
                ]
            }
            Command::Wf(_) => {
                report.command = "wf";
                vec![partition_field("wf", "WF", &wavefront(m, &cover)?)]
            }
            Command::Generic(_) => {
                report.command = "generic";
                vec![Field::plain("generic", is_generic(m, &cover)?)]
            }
            Command::Whdim(_) => {
                report.command = "whdim";
                let l_dim = match m.segments() {
                    [single] => WhDim::Known(wh_dim_l(single, &cover)?),
                    _ => WhDim::Unknown,
                };
                let z_dim = wh_dim_z_multisegment(m, &cover)?;
                vec![
                    Field::new(
                        "whdimZ",
                        "whdimZ",
                        z_dim,
                        serde_json::to_value(z_dim).expect("serializable"),
                    ),
                    Field::new(
                        "whdimL",
                        "whdimL",
                        l_dim,
                        serde_json::to_value(l_dim).expect("serializable"),
                    ),
                ]
            }
            Command::Derive {
                k, kind, segment, ..
            } => {
                report.command = "derive";
                let seg = pick_segment(name, m, *segment)?;
                let tag = match kind {
                    Kind::Z => Tag::Z,
                    Kind::L => Tag::L,
                };
                let res = derivative(seg, *k, tag, &cover)?;
                let shown = if res.is_zero() {
                    "0".to_owned()
                } else if res.scalar == 1 {
                    res.value.to_string()
                } else {
                    format!("{}*{}", res.scalar, res.value)
                };
                vec![
                    Field::new("segment", "segment", seg, json!(seg.to_string())),
                    Field::plain("degree", res.degree),
                    Field::plain("scalar", res.scalar),
                    Field::new(
                        "derivative",
                        "D",
                        shown,
                        serde_json::to_value(&res).expect("serializable"),
                    ),
                ]
            }
            Command::Bvcheck(_) => {
                report.command = "bvcheck";
                let check = if cover.is_kp() {
                    bv_consistency(m, &cover)?
                } else {
                    report.note = Some(
                        "S cover: comparison is conjectural and does not affect the exit code",
                    );
                    bv_comparison_conjectural(m, &cover)?
                };
                if cover.is_kp() && !check.equal {
                    report.ok = false;
                }
                vec![
                    partition_field("lambda", "lambda", &check.lambda),
                    partition_field("orbit", "orbit", &check.orbit),
                    partition_field("bv", "bv", &check.bv),
                    Field::plain("equal", check.equal),
                ]
            }
            Command::Semiwh {
                lambda, segment, ..
            } => {
                report.command = "semiwh";
                let seg = pick_segment(name, m, *segment)?;
                let comp = parse_composition(lambda)?;
                if comp.size() != seg.size() {
                    return Err(CliError::usage(format!(
                        "composition {comp} has size {}, segment {seg} has size {}",
                        comp.size(),
                        seg.size()
                    )));
                }
                vec![
                    Field::new("segment", "segment", seg, json!(seg.to_string())),
                    Field::new("lambda", "lambda", &comp, json!(comp.parts())),
                    Field::plain("nonzero", semi_whittaker_nonzero(seg, &comp, &cover)?),
                ]
            }
            Command::Enumerate { .. } | Command::Selftest => unreachable!("handled by run"),
        };
        report.rows.push(Row {
            name: name.clone(),
            multisegment: m.to_string(),
            fields,
        });
    }
    if report.command.is_empty() {
        report.command = command_name(command);
    }
    Ok(report)
}

fn command_name(command: &Command) -> &'static str {
    match command {
        Command::Lambda(_) => "lambda",
        Command::Wf(_) => "wf",
        Command::Generic(_) => "generic",
        Command::Whdim(_) => "whdim",
        Command::Derive { .. } => "derive",
        Command::Bvcheck(_) => "bvcheck",
        Command::Semiwh { .. } => "semiwh",
        Command::Enumerate { .. } => "enumerate",
        Command::Selftest => "selftest",
    }
}

fn parse_composition(text: &str) -> Result<Composition, CliError> {
    let parts = text
        .split(',')
        .map(|p| p.trim().parse::<u64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| CliError::usage(format!("malformed composition '{text}'")))?;
    Ok(Composition::new(parts)?)
}

fn csv_text(
    header: &[&str],
    records: impl IntoIterator<Item = Vec<String>>,
) -> Result<String, CliError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::usage(format!("csv: {e}"));
    writer.write_record(header).map_err(io)?;
    for record in records {
        writer.write_record(&record).map_err(io)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| CliError::usage(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn json_text(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    text
}

fn render_rows(report: &RowReport, format: Format) -> Result<String, CliError> {
    match format {
        Format::Table => {
            let mut out = String::new();
            for row in &report.rows {
                let cells: Vec<String> = row
                    .fields
                    .iter()
                    .map(|f| format!("{}={}", f.label, f.text))
                    .collect();
                writeln!(out, "{}  {}", row.name, cells.join("  ")).expect("write to String");
            }
            if let Some(note) = report.note {
                writeln!(out, "note: {note}").expect("write to String");
            }
            Ok(out)
        }
        Format::Json => {
            let results: Vec<Value> = report
                .rows
                .iter()
                .map(|row| {
                    let mut obj = serde_json::Map::new();
                    obj.insert("name".into(), json!(row.name));
                    obj.insert("multisegment".into(), json!(row.multisegment));
                    for f in &row.fields {
                        obj.insert(f.key.into(), f.json.clone());
                    }
                    Value::Object(obj)
                })
                .collect();
            let mut doc = json!({
                "command": report.command,
                "cover": report.cover,
                "ok": report.ok,
                "results": results,
            });
            if let Some(note) = report.note {
                doc["note"] = json!(note);
            }
            Ok(json_text(&doc))
        }
        Format::Csv => {
            let mut header = vec!["name", "multisegment"];
            if let Some(first) = report.rows.first() {
                header.extend(first.fields.iter().map(|f| f.key));
            }
            let records = report.rows.iter().map(|row| {
                let mut rec = vec![row.name.clone(), row.multisegment.clone()];
                rec.extend(row.fields.iter().map(|f| f.text.clone()));
                rec
            });
            csv_text(&header, records)
        }
    }
}

fn enumerate(
    max_size: u64,
    covers: &str,
    check: &str,
    max_r0: u64,
    keep_records: bool,
) -> Result<SweepReport, CliError> {
    if max_r0 == 0 {
        return Err(CliError::usage("--max-r0 must be positive"));
    }
    let mut config = SweepConfig::new(sweep::parse_cover_ranges(covers)?, max_size);
    config.max_r0 = max_r0;
    config.checks = Check::parse_list(check)?;
    config.keep_records = keep_records;
    config.threads = threads_from_env()?;
    Ok(sweep::run(&config)?)
}

/// Worker count from `COVSEG_THREADS`, if set.
pub fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var("COVSEG_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&t| t > 0)
            .map(Some)
            .ok_or_else(|| {
                CliError::usage(format!(
                    "COVSEG_THREADS must be a positive integer, got '{v}'"
                ))
            }),
        Err(_) => Ok(None),
    }
}

/// CSV header of `enumerate --format csv`.
pub const ENUMERATE_CSV_COLUMNS: [&str; 9] = [
    "multisegment",
    "n",
    "family",
    "a",
    "lambda",
    "bv",
    "equal",
    "generic",
    "whdimZ",
];

fn render_sweep(report: &SweepReport, format: Format) -> Result<String, CliError> {
    match format {
        Format::Table => {
            let mut out = String::new();
            let names: Vec<&str> = report.checks.iter().map(|c| c.name()).collect();
            let w = &mut out;
            writeln!(w, "checks: {}", names.join(",")).expect("write to String");
            writeln!(
                w,
                "{:<16} {:>4} {:>10} {:>9}",
                "cover", "size", "instances", "failures"
            )
            .expect("write to String");
            for cell in &report.cells {
                let failed: u64 = cell.failures.values().sum();
                writeln!(
                    w,
                    "{:<16} {:>4} {:>10} {:>9}",
                    cell.cover.to_string(),
                    cell.size,
                    cell.instances,
                    failed
                )
                .expect("write to String");
            }
            writeln!(w, "total instances: {}", report.instances).expect("write to String");
            for (check, failed) in &report.failures_by_check {
                let ran = report.checks_run.get(check).copied().unwrap_or(0);
                writeln!(w, "{check}: {ran} checked, {failed} failed").expect("write to String");
            }
            for f in report.failures.iter().take(20) {
                writeln!(
                    w,
                    "FAIL {} [{}] {}: {}",
                    f.check, f.cover, f.multisegment, f.detail
                )
                .expect("write to String");
            }
            writeln!(
                w,
                "result: {}",
                if report.passed() { "PASS" } else { "FAIL" }
            )
            .expect("write to String");
            Ok(out)
        }
        Format::Json => {
            let mut doc = serde_json::to_value(report).expect("serializable");
            doc["command"] = json!("enumerate");
            doc["ok"] = json!(report.passed());
            Ok(json_text(&doc))
        }
        Format::Csv => {
            let opt = |v: Option<String>| v.unwrap_or_default();
            let records = report.records.iter().map(|r| {
                vec![
                    r.multisegment.clone(),
                    r.n.to_string(),
                    r.family.to_owned(),
                    opt(r.a.map(|a| a.to_string())),
                    r.lambda.to_string(),
                    opt(r.bv.as_ref().map(Partition::to_string)),
                    opt(r.equal.map(|e| e.to_string())),
                    r.generic.to_string(),
                    r.whdim_z.to_string(),
                ]
            });
            csv_text(&ENUMERATE_CSV_COLUMNS, records)
        }
    }
}

/// One built-in check.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SelfCheck {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

const EXAMPLE_SESSION: &str = "cover KP n=2 a=0\ncuspidal rho1 r0=1 l=1\nm M1 = [0,2]_rho1\n";

/// Runs the built-in checks.
pub fn selftest() -> Vec<SelfCheck> {
    let mut out = Vec::new();
    let mut record = |name: &'static str, result: Result<(bool, String), String>| {
        let (pass, detail) = result.unwrap_or_else(|e| (false, e));
        out.push(SelfCheck { name, pass, detail });
    };

    record("partition sum example", {
        let ps = [vec![5, 4, 2, 2], vec![6, 3], vec![5, 2, 2]]
            .map(|p| Partition::new(p).expect("valid partition"));
        let total = sum(&ps);
        Ok((total.parts() == [16, 9, 4, 2], format!("sum = {total}")))
    });

    record("bv_dual(p, 1) = transpose(p), size <= 12", {
        let bad = (0..=12)
            .flat_map(Partition::all_of)
            .filter(|p| bv_dual(p, 1) != p.transpose())
            .count();
        Ok((bad == 0, format!("{bad} mismatches")))
    });

    let session = Session::parse(EXAMPLE_SESSION).map_err(|e| e.to_string());
    record("session round trip", {
        session.clone().and_then(|s| {
            let again = Session::parse(&s.to_string()).map_err(|e| e.to_string())?;
            Ok((again == s, s.to_string().trim_end().replace('\n', "; ")))
        })
    });

    record("wavefront of [0,2] on KP n=2", {
        session.clone().and_then(|s| {
            let m = &s.multisegments["M1"];
            let wf = wavefront(m, &s.cover).map_err(|e| e.to_string())?;
            Ok((wf.parts() == [2, 1], format!("WF = {wf}")))
        })
    });

    record("BV consistency of [0,2] on KP n=2", {
        session.and_then(|s| {
            let check =
                bv_consistency(&s.multisegments["M1"], &s.cover).map_err(|e| e.to_string())?;
            Ok((
                check.equal,
                format!("lambda = {}, bv = {}", check.lambda, check.bv),
            ))
        })
    });

    record("sweep KP n<=3 a in -1..1 and S n<=3, size <= 6", {
        let report = sweep::parse_cover_ranges("KP:n<=3,a in -1..1;S:n<=3")
            .and_then(|covers| sweep::run(&SweepConfig::new(covers, 6)))
            .map_err(|e| e.to_string());
        report.map(|r| {
            (
                r.passed(),
                format!("{} instances, {} failures", r.instances, r.total_failures()),
            )
        })
    });
    out
}

fn render_selftest(checks: &[SelfCheck], format: Format) -> Result<String, CliError> {
    let ok = checks.iter().all(|c| c.pass);
    match format {
        Format::Table => {
            let mut out = String::new();
            for c in checks {
                let verdict = if c.pass { "PASS" } else { "FAIL" };
                writeln!(out, "{verdict}  {}  ({})", c.name, c.detail).expect("write to String");
            }
            writeln!(out, "result: {}", if ok { "PASS" } else { "FAIL" }).expect("write to String");
            Ok(out)
        }
        Format::Json => Ok(json_text(&json!({
            "command": "selftest",
            "ok": ok,
            "checks": checks,
        }))),
        Format::Csv => csv_text(
            &["name", "pass", "detail"],
            checks
                .iter()
                .map(|c| vec![c.name.to_owned(), c.pass.to_string(), c.detail.clone()]),
        ),
    }
}
