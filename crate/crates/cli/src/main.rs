use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use relchar_core::error::Error;
use relchar_core::exec::ExecMode;
use relchar_core::verify::config::PairSelect;
use relchar_core::verify::corpus::{case_dirs, corpus_run, freeze_case, CaseOutcome};
use relchar_core::verify::{run, Case, JobConfig, Report, Suite};

/// Verify relative characters of PGL(2) x GL(1) over Q_p.
///
/// Exit status: 0 when every record passes, 1 when any fails, 2 on a
/// configuration error. `RELCHAR_THREADS` sets the worker count.
#[derive(Parser, Debug)]
#[command(name = "relchar", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Brute force, table and hyperbola integrals on every grid point.
    VerifyMain(JobArgs),
    /// Root numbers, Gauss sums, the twist law and the GL(1) functional equation.
    VerifyFactors(JobArgs),
    /// Operator orderings, microlocalization, the star character and the Weyl action.
    VerifyOpcalc(JobArgs),
    /// The main comparison over all pairs up to the configured conductors.
    Sweep(JobArgs),
    /// Re-run the frozen corpus and compare byte for byte.
    CorpusRun(CorpusArgs),
}

#[derive(Args, Debug)]
struct JobArgs {
    /// JSON job file; omitted fields take their defaults.
    config: Option<PathBuf>,
    #[arg(long)]
    p: Option<u64>,
    /// A single level N.
    #[arg(long = "N")]
    level: Option<u32>,
    #[arg(long, value_parser = parse_case)]
    case: Option<Case>,
    #[arg(long)]
    tol: Option<f64>,
    /// Output prefix for `<out>.ndjson` and `<out>.csv`; NDJSON goes to stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CorpusArgs {
    #[arg(long, default_value = "cases")]
    dir: PathBuf,
    /// Rewrite the expected report of the named cases instead of comparing.
    #[arg(long)]
    freeze: Vec<String>,
}

fn parse_case(s: &str) -> Result<Case, String> {
    match s {
        "ps" => Ok(Case::Ps),
        "sc" => Ok(Case::Sc),
        _ => Err(format!("expected ps or sc, got {s}")),
    }
}

fn load(args: &JobArgs, suite: Suite) -> Result<JobConfig, Error> {
    let mut cfg = match &args.config {
        Some(p) => JobConfig::from_path(p)?,
        None => JobConfig::default(),
    };
    cfg.suite = suite;
    if let Some(p) = args.p {
        cfg.p = p;
    }
    if let Some(n) = args.level {
        cfg.levels = Some(vec![n]);
    }
    if let Some(c) = args.case {
        cfg.case = c;
    }
    if let Some(t) = args.tol {
        cfg.tol = t;
    }
    if let Some(o) = &args.out {
        cfg.out = Some(o.display().to_string());
    }
    Ok(cfg)
}

fn emit(report: &Report, out: Option<&str>) -> Result<(), Error> {
    match out {
        Some(prefix) => report.write(Path::new(prefix))?,
        None => std::io::stdout().write_all(report.to_ndjson().as_bytes())?,
    }
    for row in report.summary.iter().filter(|r| !r.pass) {
        eprintln!("FAIL {} {}: {}/{} passed, worst {:e}", row.suite, row.name, row.passed, row.count, row.worst);
    }
    eprintln!("{} records, {} failed", report.records.len(), report.failures());
    Ok(())
}

fn job(args: &JobArgs, suite: Suite, force_sweep: bool) -> ExitCode {
    let mut cfg = match load(args, suite) {
        Ok(c) => c,
        Err(e) => return config_error(e),
    };
    if force_sweep && matches!(cfg.pairs, PairSelect::Explicit { .. }) {
        cfg.pairs = JobConfig::default().pairs;
    }
    if let Err(e) = cfg.check() {
        return config_error(e);
    }
    let report = match run(&cfg, ExecMode::from_env()) {
        Ok(r) => r,
        Err(e) => return config_error(e),
    };
    if let Err(e) = emit(&report, cfg.out.as_deref()) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn config_error(e: Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(2)
}

fn corpus(args: &CorpusArgs) -> ExitCode {
    if !args.freeze.is_empty() {
        let dirs = match case_dirs(&args.dir) {
            Ok(d) => d,
            Err(e) => return config_error(e),
        };
        for name in &args.freeze {
            let Some(d) = dirs.iter().find(|d| d.file_name().is_some_and(|f| f == name.as_str())) else {
                return config_error(Error::Config(format!("no case named {name}")));
            };
            if let Err(e) = freeze_case(d) {
                return config_error(e);
            }
            eprintln!("froze {name}");
        }
        return ExitCode::SUCCESS;
    }
    let results = match corpus_run(&args.dir) {
        Ok(r) => r,
        Err(e) => return config_error(e),
    };
    let mut ok = true;
    for r in &results {
        match &r.outcome {
            CaseOutcome::Match => println!("pass {}", r.name),
            CaseOutcome::Diff { line, expected, actual } => {
                ok = false;
                println!("FAIL {}: line {line} differs\n  expected: {expected}\n  actual:   {actual}", r.name);
            }
            CaseOutcome::Missing(p) => {
                ok = false;
                println!("FAIL {}: missing {p}", r.name);
            }
            CaseOutcome::Error(e) => {
                ok = false;
                println!("FAIL {}: {e}", r.name);
            }
        }
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.cmd {
        Cmd::VerifyMain(a) => job(a, Suite::Main, false),
        Cmd::VerifyFactors(a) => job(a, Suite::Factors, false),
        Cmd::VerifyOpcalc(a) => job(a, Suite::Opcalc, false),
        Cmd::Sweep(a) => job(a, Suite::Main, true),
        Cmd::CorpusRun(a) => corpus(a),
    }
}
