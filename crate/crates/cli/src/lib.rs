//! Command-line front end. [`run`] parses arguments, executes one
//! subcommand and returns the process exit status:
//! 0 on success, 1 when a verification fails, 2 on bad arguments.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::builder::{PossibleValuesParser, TypedValueParser};
use clap::{Parser, Subcommand};

use idconc::certify::{
    certify_interval_0p5_200, infimum_certificate_with, infimum_claim, Certificate,
    CertifyOptions, LipschitzGridBound, C_DEFAULT,
};
use idconc::concentration::concentration;
use idconc::fmt::{sig17, to_json_string};
use idconc::oracle::{oracle_g1, oracle_g2, verify_corpus, Precision, VerifyRow, DEFAULT_DIGITS};
use idconc::search::{
    figure_data, grid_scan_q, FigureTable, grid_table, scan_g1, scan_g2, scan_table, Direction,
    GridScanResult, ScanKind, ScanResult,
};
use idconc::{FamilyKind, Mode};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

fn family_parser() -> impl TypedValueParser<Value = FamilyKind> {
    PossibleValuesParser::new(FamilyKind::ALL.map(FamilyKind::as_str))
        .map(|s| s.parse::<FamilyKind>().expect("listed family"))
}

fn mode_parser() -> impl TypedValueParser<Value = Mode> {
    PossibleValuesParser::new(Mode::BOTH.map(Mode::as_str))
        .map(|s| s.parse::<Mode>().expect("listed mode"))
}

fn scan_parser() -> impl TypedValueParser<Value = ScanKind> {
    PossibleValuesParser::new(["g1", "g2"]).map(|s| match s.as_str() {
        "g1" => ScanKind::G1,
        _ => ScanKind::G2,
    })
}

#[derive(Debug, Parser)]
#[command(name = "idconc", version, about = "One-sigma concentration probabilities and their infima")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Threads {
    /// Worker threads; defaults to all cores.
    #[arg(long, env = "IDCONC_THREADS", value_parser = clap::value_parser!(u64).range(1..))]
    threads: Option<u64>,
}

#[derive(Debug, clap::Args)]
struct GridArgs {
    #[arg(long = "from", default_value_t = 0.5)]
    lo: f64,
    #[arg(long = "to", default_value_t = 200.0)]
    hi: f64,
    #[arg(long, default_value_t = 0.0005)]
    step: f64,
    /// Inner series terms per Skellam mass.
    #[arg(long, default_value_t = 250, value_parser = clap::value_parser!(u64).range(1..))]
    terms: u64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Concentration probability at one parameter.
    Eval {
        #[arg(long, value_parser = family_parser())]
        family: FamilyKind,
        #[arg(long, allow_negative_numbers = true)]
        param: f64,
        #[arg(long, value_parser = mode_parser())]
        mode: Mode,
        #[arg(long)]
        json: bool,
    },
    /// Infimum over the family and whether it is attained.
    Inf {
        #[arg(long, value_parser = family_parser())]
        family: FamilyKind,
        #[arg(long, value_parser = mode_parser())]
        mode: Mode,
    },
    /// Extremum of the breakpoint sequences g1 (min) or g2 (max).
    Scan {
        #[arg(value_parser = scan_parser())]
        which: ScanKind,
        #[arg(long = "from")]
        lo: u64,
        #[arg(long = "to")]
        hi: u64,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        threads: Threads,
    },
    /// Minimum of the truncated symmetric Poisson series over a grid.
    Grid {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        threads: Threads,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Builds and checks an infimum certificate.
    Certify {
        #[arg(long, value_parser = family_parser())]
        family: FamilyKind,
        #[arg(long, value_parser = mode_parser())]
        mode: Mode,
        #[arg(long)]
        out: PathBuf,
        /// Berry–Esseen constant.
        #[arg(long = "be-constant", default_value_t = C_DEFAULT)]
        c: f64,
        /// Grid step for the symmetric Poisson interval bound.
        #[arg(long = "grid-step", default_value_t = 0.0005)]
        grid_step: f64,
        #[command(flatten)]
        threads: Threads,
    },
    /// Plot data for figure 1 to 4.
    Figure {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=4))]
        which: u8,
        /// Output file; stdout when absent.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        threads: Threads,
    },
    /// Cross-checks the main build against the high-precision oracle.
    Verify {
        #[arg(long, default_value_t = DEFAULT_DIGITS, value_parser = clap::value_parser!(u32).range(50..))]
        digits: u32,
    },
    /// Writes every certificate, figure, scan and the infima summary.
    ReproduceAll {
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        threads: Threads,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Io(String),
    /// The reader of stdout went away, e.g. `idconc figure 3 | head`.
    ClosedPipe,
}

impl From<idconc::Error> for Failure {
    fn from(e: idconc::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        if e.kind() == io::ErrorKind::BrokenPipe {
            return Failure::ClosedPipe;
        }
        Failure::Io(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type Outcome = Result<i32, Failure>;

/// Runs the command line `args` (including the program name), writing
/// normal output to `out` and diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Io(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_FAILED
        }
        Err(Failure::ClosedPipe) => EXIT_OK,
    }
}

fn with_threads<T: Send>(threads: &Threads, f: impl FnOnce() -> T + Send) -> Result<T, Failure> {
    match threads.threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n as usize)
                .build()
                .map_err(|e| Failure::Io(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    match command {
        Command::Eval { family, param, mode, json } => eval(family, param, mode, json, out),
        Command::Inf { family, mode } => {
            writeln!(out, "{}", inf_line(family, mode))?;
            Ok(EXIT_OK)
        }
        Command::Scan { which, lo, hi, csv, threads } => {
            let min_lo = match which {
                ScanKind::G1 => 8,
                ScanKind::G2 => 3,
            };
            if lo < min_lo || hi < lo {
                return Err(Failure::Usage(format!(
                    "scan range must satisfy {min_lo} <= from <= to, got {lo}..{hi}"
                )));
            }
            let (result, table) = with_threads(&threads, || -> idconc::Result<_> {
                let result = match which {
                    ScanKind::G1 => scan_g1(lo, hi)?,
                    ScanKind::G2 => scan_g2(lo, hi)?,
                };
                let table = match &csv {
                    Some(_) => Some(scan_table(which, lo, hi)?),
                    None => None,
                };
                Ok((result, table))
            })??;
            writeln!(out, "{}", scan_line(&result))?;
            if let (Some(path), Some(table)) = (csv, table) {
                write_scan_csv(&path, &table)?;
            }
            Ok(EXIT_OK)
        }
        Command::Grid { grid, threads, csv } => {
            let result = with_threads(&threads, || grid_scan_q(grid.lo, grid.hi, grid.step, grid.terms))??;
            writeln!(out, "{}", grid_line(&result))?;
            if result.lo <= 0.5 && result.hi >= 200.0 {
                let bound = certify_interval_0p5_200(&result)?;
                writeln!(out, "{}", lipschitz_line(&bound))?;
            }
            if let Some(path) = csv {
                let table = with_threads(&threads, || grid_table(grid.lo, grid.hi, grid.step, grid.terms))??;
                write_grid_csv(&path, &table)?;
            }
            Ok(EXIT_OK)
        }
        Command::Certify { family, mode, out: path, c, grid_step, threads } => {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Failure::Usage(format!("Berry–Esseen constant must be positive, got {c}")));
            }
            let cert = with_threads(&threads, || -> idconc::Result<Certificate> {
                let grid = match family {
                    FamilyKind::SymPoisson => Some(grid_scan_q(0.5, 200.0, grid_step, 250)?),
                    _ => None,
                };
                infimum_certificate_with(family, mode, &CertifyOptions { c, grid })
            })??;
            write_file(&path, &to_json_string(&cert)?)?;
            Ok(report_certificate(&cert, out, err)?)
        }
        Command::Figure { which, csv, threads } => {
            let table = with_threads(&threads, || figure_data(which))??;
            match csv {
                Some(path) => {
                    let mut buf = Vec::new();
                    table.write_csv(&mut buf)?;
                    write_file(&path, std::str::from_utf8(&buf).expect("csv is UTF-8"))?;
                    writeln!(out, "figure {which}: {} rows -> {}", table.rows.len(), path.display())?;
                }
                None => table.write_csv(&mut *out)?,
            }
            Ok(EXIT_OK)
        }
        Command::Verify { digits } => {
            let rows = verify_corpus(Precision::new(digits)?)?;
            let mut failed = 0;
            for r in &rows {
                writeln!(out, "{r}")?;
                failed += usize::from(!r.passed);
            }
            writeln!(out, "{} checks, {failed} failed", rows.len())?;
            Ok(if failed == 0 { EXIT_OK } else { EXIT_FAILED })
        }
        Command::ReproduceAll { out: dir, threads } => {
            let all = with_threads(&threads, compute_all)??;
            reproduce_all(&all, &dir, out, err)
        }
    }
}

fn eval(family: FamilyKind, param: f64, mode: Mode, json: bool, out: &mut dyn Write) -> Outcome {
    let fam = family.with_param(param)?;
    let v = concentration(fam, mode)?;
    if json {
        let doc = serde_json::json!({
            "family": family,
            "param": param,
            "mode": mode,
            "value": v.value,
            "abs_err": v.abs_err,
        });
        write!(out, "{}", to_json_string(&doc)?)?;
    } else {
        writeln!(out, "{} ± {:.1e}", v.value, v.abs_err)?;
    }
    Ok(EXIT_OK)
}

fn param_name(kind: FamilyKind) -> &'static str {
    match kind {
        FamilyKind::Geometric | FamilyKind::SymGeometric => "p",
        FamilyKind::Poisson | FamilyKind::SymPoisson => "lambda",
    }
}

/// `3/4 (0.75), not attained` or `1/e (0.36787944117144233), attained at lambda=1`.
pub fn inf_line(kind: FamilyKind, mode: Mode) -> String {
    let claim = infimum_claim(kind, mode);
    match claim.attained_at {
        Some(at) if claim.attained => {
            format!("{}, attained at {}={at}", claim.inf_exact, param_name(kind))
        }
        _ => format!("{}, not attained", claim.inf_exact),
    }
}

/// `min 0.793450747058153 at n=8`. The printed value is re-evaluated at
/// the extremal `n` with the breakpoint at oracle precision, so the last
/// printed digit does not inherit the rounding of the `f64` breakpoint.
pub fn scan_line(r: &ScanResult) -> String {
    let (word, value) = match r.direction {
        Direction::Min => ("min", oracle_g1(r.arg as u64, Precision::default())),
        Direction::Max => ("max", oracle_g2(r.arg as u64, Precision::default())),
    };
    let value = value.map(|v| v.to_f64()).unwrap_or(r.extremum);
    format!("{word} {value:.15} at n={}", r.arg)
}

pub fn grid_line(r: &GridScanResult) -> String {
    format!(
        "min {:.15} at lambda={} ({} points, step {}, K={}, abs_err {:.1e})",
        r.min_value, r.lambda_star, r.points, r.step, r.truncation_k, r.min_abs_err
    )
}

pub fn lipschitz_line(b: &LipschitzGridBound) -> String {
    format!(
        "certified lower bound {:.5} on [{}, {}] (grid min {:.6} - {} x {} = {:.6})",
        b.bound, b.lo, b.hi, b.grid_min, b.lipschitz, b.step, b.raw_bound
    )
}

fn write_file(path: &Path, text: &str) -> io::Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, text)
}

fn write_scan_csv(path: &Path, table: &[(u64, f64)]) -> Result<(), Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["n", "prob"])?;
    for &(n, v) in table {
        w.write_record([n.to_string(), sig17(v)])?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Io(e.to_string()))?;
    write_file(path, std::str::from_utf8(&bytes).expect("csv is UTF-8"))?;
    Ok(())
}

fn write_grid_csv(path: &Path, table: &[(f64, f64)]) -> Result<(), Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["lambda", "q"])?;
    for &(l, q) in table {
        w.write_record([sig17(l), sig17(q)])?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Io(e.to_string()))?;
    write_file(path, std::str::from_utf8(&bytes).expect("csv is UTF-8"))?;
    Ok(())
}

/// Prints the certificate verdict and any failed quote replays; exit 1 when
/// the certificate itself does not hold.
fn report_certificate(cert: &Certificate, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let holds = cert.holds()?;
    writeln!(
        out,
        "{} {}: inf {} {}",
        cert.family,
        cert.mode,
        cert.inf_exact,
        if holds { "certified" } else { "NOT certified" }
    )?;
    for r in cert.failed_replays() {
        writeln!(err, "warning: quoted value not reproduced: {r}")?;
    }
    Ok(if holds { EXIT_OK } else { EXIT_FAILED })
}

struct Reproduction {
    grid: GridScanResult,
    bound: LipschitzGridBound,
    certificates: Vec<Certificate>,
    figures: Vec<FigureTable>,
    scans: Vec<(&'static str, u64, u64, ScanResult)>,
    oracle: Vec<VerifyRow>,
}

fn compute_all() -> idconc::Result<Reproduction> {
    let grid = grid_scan_q(0.5, 200.0, 0.0005, 250)?;
    let bound = certify_interval_0p5_200(&grid)?;
    let opts = CertifyOptions {
        c: C_DEFAULT,
        grid: Some(grid),
    };
    let mut certificates = Vec::new();
    for kind in FamilyKind::ALL {
        for mode in Mode::BOTH {
            certificates.push(infimum_certificate_with(kind, mode, &opts)?);
        }
    }
    let figures = (1..=4u8).map(figure_data).collect::<idconc::Result<Vec<_>>>()?;
    let scans = vec![
        ("g1", 8, 629, scan_g1(8, 629)?),
        ("g2", 3, 579, scan_g2(3, 579)?),
        ("g1", 8, 119, scan_g1(8, 119)?),
        ("g2", 3, 97, scan_g2(3, 97)?),
    ];
    let oracle = verify_corpus(Precision::default())?;
    Ok(Reproduction {
        grid,
        bound,
        certificates,
        figures,
        scans,
        oracle,
    })
}

fn reproduce_all(all: &Reproduction, dir: &Path, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    fs::create_dir_all(dir)?;
    let mut failures = Vec::new();

    writeln!(out, "{}", grid_line(&all.grid))?;
    writeln!(out, "{}", lipschitz_line(&all.bound))?;
    write_file(&dir.join("grid.json"), &to_json_string(&all.bound)?)?;
    failures.extend(all.bound.checks.iter().filter(|r| !r.passed).map(|r| format!("grid: {r}")));

    let mut summary = csv::Writer::from_writer(Vec::new());
    summary.write_record(["family", "mode", "inf_exact", "inf_decimal", "attained", "attained_at", "certified", "failed_replays"])?;
    for cert in &all.certificates {
        let (kind, mode) = (cert.family, cert.mode);
        let holds = cert.holds()?;
        let failed = cert.failed_replays();
        write_file(&dir.join(format!("certificate-{kind}-{mode}.json")), &to_json_string(cert)?)?;
        writeln!(
            out,
            "{kind} {mode}: {} {}, {} replays failed",
            inf_line(kind, mode),
            if holds { "certified" } else { "NOT certified" },
            failed.len()
        )?;
        if !holds {
            failures.push(format!("{kind} {mode}: certificate does not hold"));
        }
        failures.extend(failed.iter().map(|r| format!("{kind} {mode}: {r}")));
        summary.write_record([
            kind.to_string(),
            mode.to_string(),
            cert.inf_exact.tag.exact_form().to_string(),
            sig17(cert.inf_decimal()),
            cert.attained.to_string(),
            cert.attained_at.map(sig17).unwrap_or_default(),
            holds.to_string(),
            failed.len().to_string(),
        ])?;
    }
    let bytes = summary.into_inner().map_err(|e| Failure::Io(e.to_string()))?;
    write_file(&dir.join("infima.csv"), std::str::from_utf8(&bytes).expect("csv is UTF-8"))?;

    for table in &all.figures {
        let mut buf = Vec::new();
        table.write_csv(&mut buf)?;
        write_file(&dir.join(format!("figure{}.csv", table.figure)), std::str::from_utf8(&buf).expect("csv is UTF-8"))?;
    }

    let mut scans = String::new();
    for (name, lo, hi, r) in &all.scans {
        let line = format!("scan {name} {lo}..{hi}: {}", scan_line(r));
        writeln!(out, "{line}")?;
        scans.push_str(&line);
        scans.push('\n');
    }
    write_file(&dir.join("scans.txt"), &scans)?;

    let mut oracle = String::new();
    for r in &all.oracle {
        oracle.push_str(&r.to_string());
        oracle.push('\n');
    }
    write_file(&dir.join("oracle.txt"), &oracle)?;
    failures.extend(all.oracle.iter().filter(|r| !r.passed).map(|r| format!("oracle: {r}")));

    for f in &failures {
        writeln!(err, "FAIL {f}")?;
    }
    writeln!(out, "outputs written to {}; {} failed comparisons", dir.display(), failures.len())?;
    Ok(if failures.is_empty() { EXIT_OK } else { EXIT_FAILED })
}
