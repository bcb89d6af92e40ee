//! Command-line front end: kernel tables, identity suites, kernel bases and
//! basic dimension counts, rendered as text, CSV or JSON.

use std::ffi::OsString;
use std::fmt::{self, Write as _};
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::combinatorics::{closed_form_K0, killing_bound, sym_rank};
use crate::error::Error;
use crate::kernel::{
    bounded_kernel_with_basis, default_q_max, generate_table, kernel_basis_m0, BlockDim, BlockVector, K_total_m0,
    KernelReport, Status,
};
use crate::ladder::LadderFactory;
use crate::model::ModelSpec;
use crate::scalar::Field;
use crate::verify::{run_suite, CheckResult, Suite, VerifyConfig};
use crate::Rational;

pub const SCHEMA_VERSION: u32 = 1;

const GUARD_N: usize = 8;
const GUARD_P: usize = 5;
const GUARD_Q: usize = 12;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// An inclusive range written `a..b`, `a..=b` or a single value `a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RangeArg {
    pub start: usize,
    pub end: usize,
}

impl RangeArg {
    pub fn range(self) -> RangeInclusive<usize> {
        self.start..=self.end
    }

    pub fn is_empty(self) -> bool {
        self.start > self.end
    }
}

impl FromStr for RangeArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("invalid range {s:?}"));
        match s.split_once("..") {
            Some((a, b)) => Ok(RangeArg { start: num(a)?, end: num(b.strip_prefix('=').unwrap_or(b))? }),
            None => {
                let v = num(s)?;
                Ok(RangeArg { start: v, end: v })
            }
        }
    }
}

impl fmt::Display for RangeArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.start == self.end {
            write!(f, "{}", self.start)
        } else {
            write!(f, "{}..{}", self.start, self.end)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Parser, Debug)]
#[command(
    name = "killing-dims",
    version,
    about = "Exact kernel dimensions of the Witten-deformed model operator on symmetric tensors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Kernel dimensions over a grid of (n, p, m)
    Table(TableArgs),
    /// Run exact identity suites
    Verify(VerifyArgs),
    /// Kernel dimension and optional basis for a single (n, p, m)
    Kernel(KernelArgs),
    /// Symmetric ranks, the classical Killing bound and closed-form kernel dimensions
    Dims(DimsArgs),
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// write to this file instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
    /// worker threads (default: all cores)
    #[arg(long)]
    jobs: Option<usize>,
    /// skip the size guard
    #[arg(long)]
    force: bool,
}

#[derive(Args, Debug)]
struct TableArgs {
    #[arg(long)]
    n: RangeArg,
    #[arg(long)]
    p: RangeArg,
    /// Morse indices (default: 0..n)
    #[arg(long)]
    m: Option<RangeArg>,
    /// degree bound for nonzero indices (default: 2p+2)
    #[arg(long)]
    qmax: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long)]
    n: RangeArg,
    #[arg(long, default_value = "0..2")]
    p: RangeArg,
    #[arg(long)]
    m: Option<RangeArg>,
    #[arg(long, default_value_t = 3)]
    qmax: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct KernelArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: usize,
    #[arg(long, default_value_t = 0)]
    m: usize,
    /// degree bound for nonzero indices (default: 2p+2)
    #[arg(long)]
    qmax: Option<usize>,
    /// include the canonical kernel basis
    #[arg(long)]
    basis: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct DimsArgs {
    #[arg(long)]
    n: RangeArg,
    #[arg(long)]
    p: RangeArg,
    #[command(flatten)]
    common: Common,
}

/// The parameters a run was invoked with, echoed into JSON output.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub n: String,
    pub p: String,
    pub m: Option<String>,
    pub q_max: Option<usize>,
    pub suite: Option<String>,
    pub basis: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    pub n: usize,
    pub p: usize,
    pub m: usize,
    pub q_max: usize,
    pub dim: usize,
    pub status: Status,
}

impl From<&KernelReport> for TableRow {
    fn from(r: &KernelReport) -> Self {
        TableRow { n: r.spec.n, p: r.spec.p, m: r.spec.m, q_max: r.spec.q_max, dim: r.total, status: r.status() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableDocument {
    pub schema_version: u32,
    pub config: RunConfig,
    pub rows: Vec<TableRow>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckDocument {
    pub schema_version: u32,
    pub config: RunConfig,
    pub checks: Vec<CheckResult>,
}

/// One basis coefficient with its rational value as `"num/den"`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryRow {
    pub vector: usize,
    pub q: usize,
    pub p: usize,
    pub hermite: Vec<u32>,
    pub sym: Vec<u32>,
    pub coeff: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelDocument {
    pub schema_version: u32,
    pub config: RunConfig,
    pub row: TableRow,
    pub per_block: Vec<BlockDim>,
    pub basis: Option<Vec<Vec<EntryRow>>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimsRow {
    pub n: usize,
    pub p: usize,
    pub sym_rank: u64,
    pub killing_bound: Option<u64>,
    pub closed_form_k0: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimsDocument {
    pub schema_version: u32,
    pub config: RunConfig,
    pub rows: Vec<DimsRow>,
}

/// Exit code and message of a failed run.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParameters(_) | Error::NoClosedForm(_) => EXIT_USAGE,
            _ => EXIT_FAILURE,
        };
        Failure { code, message: e.to_string() }
    }
}

fn guard(force: bool, n: usize, p: usize, q: Option<usize>) -> Result<(), Failure> {
    if force {
        return Ok(());
    }
    if n > GUARD_N || p > GUARD_P || q.is_some_and(|q| q > GUARD_Q) {
        return Err(Failure::usage(format!(
            "size guard exceeded (n <= {GUARD_N}, p <= {GUARD_P}, qmax <= {GUARD_Q}); pass --force to override"
        )));
    }
    Ok(())
}

fn nonempty(name: &str, r: RangeArg) -> Result<RangeInclusive<usize>, Failure> {
    if r.is_empty() {
        return Err(Failure::usage(format!("empty range for --{name}: {}..{}", r.start, r.end)));
    }
    Ok(r.range())
}

fn positive_n(r: &RangeInclusive<usize>) -> Result<(), Failure> {
    if *r.start() == 0 {
        return Err(Failure::usage("--n must be positive"));
    }
    Ok(())
}

fn to_json<S: Serialize>(doc: &S) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("serializable");
    s.push('\n');
    s
}

fn to_csv<S: Serialize>(rows: &[S], header: &[&str]) -> Result<String, Failure> {
    let fail = |e: &dyn fmt::Display| Failure { code: EXIT_FAILURE, message: e.to_string() };
    // serialize writes the header itself from the first row
    let mut w = csv::WriterBuilder::new().has_headers(!rows.is_empty()).from_writer(Vec::new());
    if rows.is_empty() {
        w.write_record(header).map_err(|e| fail(&e))?;
    }
    for r in rows {
        w.serialize(r).map_err(|e| fail(&e))?;
    }
    let bytes = w.into_inner().map_err(|e| fail(&e))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

/// Parses CSV produced by `table --format csv`.
pub fn parse_table_csv(data: &str) -> Result<Vec<TableRow>, csv::Error> {
    csv::Reader::from_reader(data.as_bytes()).deserialize().collect()
}

const TABLE_HEADER: [&str; 6] = ["n", "p", "m", "q_max", "dim", "status"];

fn render_table_text(rows: &[TableRow]) -> String {
    let mut s = format!("{:>3} {:>3} {:>3} {:>5} {:>8}  {}\n", "n", "p", "m", "q_max", "dim", "status");
    for r in rows {
        let _ = writeln!(s, "{:>3} {:>3} {:>3} {:>5} {:>8}  {}", r.n, r.p, r.m, r.q_max, r.dim, r.status);
    }
    s
}

fn render_rows(rows: &[TableRow], format: Format, config: RunConfig) -> Result<String, Failure> {
    Ok(match format {
        Format::Json => to_json(&TableDocument { schema_version: SCHEMA_VERSION, config, rows: rows.to_vec() }),
        Format::Csv => to_csv(rows, &TABLE_HEADER)?,
        Format::Text => render_table_text(rows),
    })
}

fn table(args: &TableArgs) -> Result<(String, i32), Failure> {
    let n = nonempty("n", args.n)?;
    positive_n(&n)?;
    let p = nonempty("p", args.p)?;
    let m = match args.m {
        Some(m) => nonempty("m", m)?,
        None => 0..=*n.end(),
    };
    let q_check = args.qmax.or(Some(default_q_max(*p.end())));
    guard(args.common.force, *n.end(), *p.end(), q_check)?;
    let reports = generate_table::<Rational>(n, p, m, args.qmax)?;
    let rows: Vec<TableRow> = reports.iter().map(TableRow::from).collect();
    let config = RunConfig {
        command: "table".into(),
        n: args.n.to_string(),
        p: args.p.to_string(),
        m: args.m.map(|m| m.to_string()),
        q_max: args.qmax,
        suite: None,
        basis: false,
    };
    Ok((render_rows(&rows, args.common.format, config)?, EXIT_OK))
}

fn verify(args: &VerifyArgs) -> Result<(String, i32), Failure> {
    let suite: Suite = args.suite.parse().map_err(|e: Error| Failure::usage(e.to_string()))?;
    let n = nonempty("n", args.n)?;
    positive_n(&n)?;
    let p = nonempty("p", args.p)?;
    let m = args.m.map(|m| nonempty("m", m)).transpose()?;
    guard(args.common.force, *n.end(), *p.end(), Some(args.qmax))?;
    let checks = run_suite(suite, &VerifyConfig { n, p, m, q_max: args.qmax })?;
    let code = if checks.iter().all(|c| c.passed) { EXIT_OK } else { EXIT_FAILURE };
    let config = RunConfig {
        command: "verify".into(),
        n: args.n.to_string(),
        p: args.p.to_string(),
        m: args.m.map(|m| m.to_string()),
        q_max: Some(args.qmax),
        suite: Some(suite.to_string()),
        basis: false,
    };
    let text = match args.common.format {
        Format::Json => to_json(&CheckDocument { schema_version: SCHEMA_VERSION, config, checks }),
        Format::Csv => to_csv(&checks, &["suite", "check", "n", "p", "m", "q_max", "passed", "detail"])?,
        Format::Text => {
            let mut s = String::new();
            for c in &checks {
                let opt = |v: Option<usize>| v.map_or("-".to_string(), |v| v.to_string());
                let _ = write!(
                    s,
                    "{} {:<14} {:<32} n={} p={} m={} q_max={}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.suite.name(),
                    c.check,
                    c.n,
                    opt(c.p),
                    opt(c.m),
                    opt(c.q_max)
                );
                if !c.passed {
                    let _ = write!(s, "  [{}]", c.detail);
                }
                s.push('\n');
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            let _ = writeln!(s, "{} checks, {} failed", checks.len(), failed);
            s
        }
    };
    Ok((text, code))
}

fn entry_rows(basis: &[BlockVector<Rational>]) -> Vec<Vec<EntryRow>> {
    basis
        .iter()
        .enumerate()
        .map(|(i, v)| {
            v.iter()
                .map(|e| EntryRow {
                    vector: i,
                    q: e.block.q,
                    p: e.block.p,
                    hermite: e.hermite.components().to_vec(),
                    sym: e.sym.components().to_vec(),
                    coeff: e.coeff.to_fraction_string(),
                })
                .collect()
        })
        .collect()
}

fn index_text(v: &[u32]) -> String {
    let parts: Vec<String> = v.iter().map(u32::to_string).collect();
    format!("({})", parts.join(","))
}

fn kernel(args: &KernelArgs) -> Result<(String, i32), Failure> {
    if args.n == 0 {
        return Err(Failure::usage("--n must be positive"));
    }
    if args.m > args.n {
        return Err(Failure::usage(format!("--m {} exceeds --n {}", args.m, args.n)));
    }
    let q_max = args.qmax.unwrap_or_else(|| default_q_max(args.p));
    guard(args.common.force, args.n, args.p, Some(q_max))?;
    let factory = LadderFactory::<Rational>::new(args.n);
    let (report, basis) = if args.m == 0 {
        let report = K_total_m0(&factory, args.p)?;
        let basis = if args.basis { kernel_basis_m0(&factory, args.p)? } else { Vec::new() };
        (report, basis)
    } else {
        bounded_kernel_with_basis(&factory, &ModelSpec::new(args.n, args.p, args.m, q_max)?)?
    };
    let row = TableRow::from(&report);
    let entries = args.basis.then(|| entry_rows(&basis));
    let config = RunConfig {
        command: "kernel".into(),
        n: args.n.to_string(),
        p: args.p.to_string(),
        m: Some(args.m.to_string()),
        q_max: args.qmax,
        suite: None,
        basis: args.basis,
    };
    let text = match args.common.format {
        Format::Json => to_json(&KernelDocument {
            schema_version: SCHEMA_VERSION,
            config,
            row,
            per_block: report.per_block.clone(),
            basis: entries,
        }),
        Format::Csv => match entries {
            Some(e) => {
                let flat: Vec<EntryRow> = e.into_iter().flatten().collect();
                let csv_rows: Vec<CsvEntry> = flat.iter().map(CsvEntry::from).collect();
                to_csv(&csv_rows, &["vector", "q", "p", "hermite", "sym", "coeff"])?
            }
            None => to_csv(&[row], &TABLE_HEADER)?,
        },
        Format::Text => {
            let mut s =
                format!("n={} p={} m={} q_max={}\ndim {} ({})\n", row.n, row.p, row.m, row.q_max, row.dim, row.status);
            for b in &report.per_block {
                let _ = writeln!(s, "  q={}: {}", b.q, b.dim);
            }
            if let Some(e) = entries {
                for (i, v) in e.iter().enumerate() {
                    let terms: Vec<String> = v
                        .iter()
                        .map(|t| format!("{} H{} e{}", t.coeff, index_text(&t.hermite), index_text(&t.sym)))
                        .collect();
                    let _ = writeln!(s, "v{i} = {}", terms.join(" + "));
                }
            }
            s
        }
    };
    Ok((text, EXIT_OK))
}

/// Basis entry flattened for CSV, with multi-indices written as `(a,b,..)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvEntry {
    pub vector: usize,
    pub q: usize,
    pub p: usize,
    pub hermite: String,
    pub sym: String,
    pub coeff: String,
}

impl From<&EntryRow> for CsvEntry {
    fn from(e: &EntryRow) -> Self {
        CsvEntry {
            vector: e.vector,
            q: e.q,
            p: e.p,
            hermite: index_text(&e.hermite),
            sym: index_text(&e.sym),
            coeff: e.coeff.clone(),
        }
    }
}

fn dims(args: &DimsArgs) -> Result<(String, i32), Failure> {
    let n = nonempty("n", args.n)?;
    positive_n(&n)?;
    let p = nonempty("p", args.p)?;
    guard(args.common.force, *n.end(), *p.end(), None)?;
    let mut rows = Vec::new();
    for n in n {
        for p in p.clone() {
            rows.push(DimsRow {
                n,
                p,
                sym_rank: sym_rank(n, p),
                killing_bound: (p >= 1).then(|| killing_bound(n, p)),
                closed_form_k0: closed_form_K0(n, p).ok(),
            });
        }
    }
    let config = RunConfig {
        command: "dims".into(),
        n: args.n.to_string(),
        p: args.p.to_string(),
        m: None,
        q_max: None,
        suite: None,
        basis: false,
    };
    let text = match args.common.format {
        Format::Json => to_json(&DimsDocument { schema_version: SCHEMA_VERSION, config, rows }),
        Format::Csv => to_csv(&rows, &["n", "p", "sym_rank", "killing_bound", "closed_form_k0"])?,
        Format::Text => {
            let opt = |v: Option<u64>| v.map_or("-".to_string(), |v| v.to_string());
            let mut s = format!("{:>3} {:>3} {:>10} {:>14} {:>8}\n", "n", "p", "sym_rank", "killing_bound", "K0");
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{:>3} {:>3} {:>10} {:>14} {:>8}",
                    r.n,
                    r.p,
                    r.sym_rank,
                    opt(r.killing_bound),
                    opt(r.closed_form_k0)
                );
            }
            s
        }
    };
    Ok((text, EXIT_OK))
}

fn dispatch(command: &Command) -> Result<(String, i32), Failure> {
    let common = match command {
        Command::Table(a) => &a.common,
        Command::Verify(a) => &a.common,
        Command::Kernel(a) => &a.common,
        Command::Dims(a) => &a.common,
    };
    let work = || match command {
        Command::Table(a) => table(a),
        Command::Verify(a) => verify(a),
        Command::Kernel(a) => kernel(a),
        Command::Dims(a) => dims(a),
    };
    let (text, code) = match common.jobs {
        Some(0) => return Err(Failure::usage("--jobs must be positive")),
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map_err(|e| Failure { code: EXIT_FAILURE, message: e.to_string() })?
            .install(work)?,
        None => work()?,
    };
    if let Some(path) = &common.out {
        std::fs::write(path, &text)
            .map_err(|e| Failure { code: EXIT_FAILURE, message: format!("writing {}: {e}", path.display()) })?;
        return Ok((String::new(), code));
    }
    Ok((text, code))
}

/// Runs the command line `args` (including the program name) and returns
/// the exit code. All output is produced in one write after the work is done.
pub fn run<I, A>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
                EXIT_USAGE
            } else {
                let _ = out.write_all(text.as_bytes());
                EXIT_OK
            };
        }
    };
    match dispatch(&cli.command) {
        Ok((text, code)) => {
            if out.write_all(text.as_bytes()).is_err() {
                return EXIT_FAILURE;
            }
            code
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("killing-dims").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn ranges_parse() {
        assert_eq!("1..5".parse::<RangeArg>().unwrap(), RangeArg { start: 1, end: 5 });
        assert_eq!("1..=5".parse::<RangeArg>().unwrap(), RangeArg { start: 1, end: 5 });
        assert_eq!("3".parse::<RangeArg>().unwrap(), RangeArg { start: 3, end: 3 });
        assert!("a..2".parse::<RangeArg>().is_err());
        assert!("5..2".parse::<RangeArg>().unwrap().is_empty());
        assert_eq!(RangeArg { start: 2, end: 4 }.to_string(), "2..4");
    }

    #[test]
    fn table_csv_single_row() {
        let (code, out, _) = call(&["table", "--n", "3", "--p", "1", "--m", "0", "--format", "csv"]);
        assert_eq!(code, 0);
        assert_eq!(out, "n,p,m,q_max,dim,status\n3,1,0,1,6,exact\n");
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(call(&["table", "--n", "5..1", "--p", "2"]).0, 2);
        assert_eq!(call(&["verify", "--suite", "bogus", "--n", "2"]).0, 2);
        assert_eq!(call(&["kernel", "--n", "9", "--p", "1"]).0, 2);
        assert_eq!(call(&["kernel", "--n", "2", "--p", "1", "--m", "3"]).0, 2);
        assert_eq!(call(&["frobnicate"]).0, 2);
        let (code, _, err) = call(&["table", "--n", "1", "--p", "6"]);
        assert_eq!(code, 2);
        assert!(err.contains("--force"));
    }

    #[test]
    fn kernel_basis_pattern() {
        let (code, out, _) = call(&["kernel", "--n", "2", "--p", "1", "--m", "0", "--basis", "--format", "json"]);
        assert_eq!(code, 0);
        let doc: KernelDocument = serde_json::from_str(&out).unwrap();
        assert_eq!(doc.row.dim, 3);
        let basis = doc.basis.unwrap();
        // H_1 e^2 - H_2 e^1 up to scale, in 0-based axes
        let antisym = basis.iter().any(|v| {
            v.len() == 2
                && v.iter().any(|e| e.hermite == [1, 0] && e.sym == [0, 1])
                && v.iter().any(|e| e.hermite == [0, 1] && e.sym == [1, 0])
                && Rational::parse_fraction(&v[0].coeff).unwrap() == -Rational::parse_fraction(&v[1].coeff).unwrap()
        });
        assert!(antisym, "{basis:?}");
    }

    #[test]
    fn dims_lists_closed_forms() {
        let (code, out, _) = call(&["dims", "--n", "3", "--p", "1..3", "--format", "csv"]);
        assert_eq!(code, 0);
        assert_eq!(out, "n,p,sym_rank,killing_bound,closed_form_k0\n3,1,3,6,6\n3,2,6,20,11\n3,3,10,50,\n");
    }
}
