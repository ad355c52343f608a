//! Command-line front end.
//!
//! Exit codes: 0 when every verdict passes, 1 when a verdict fails, 2 for
//! configuration, validation, domain and I/O errors, 3 when a hypothesis gate
//! fails (or a kernel lacks the cancellation its operator needs).

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{LoadedConfig, NormKind};
use crate::error::{Error, Result};
use crate::function::fmt_f64;
use crate::harness::{self, VerificationReport};
use crate::presets::{self, SuiteReport};
use crate::report;
use crate::scan::BallRow;
use crate::spaces::{self, NormReport};
use crate::weights;

#[derive(Debug, Parser)]
#[command(name = "rough-morrey", version, about = "Rough-kernel operators on weighted Morrey spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ConfigArgs {
    /// TOML experiment file.
    #[arg(long, short)]
    config: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Apply the configured operator to `f`.
    Apply(ConfigArgs),
    /// Evaluate the configured norm of `f`.
    Norm(ConfigArgs),
    /// Muckenhoupt characteristic of the weight.
    Ap(ConfigArgs),
    /// BMO norm, John-Nirenberg ratio and log-growth fit of `b`.
    Bmo(ConfigArgs),
    /// Run the configured harness cases.
    Verify(ConfigArgs),
    /// Run a named battery.
    Suite {
        #[arg(long, default_value = "paper-core")]
        preset: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (default `out`, overridden by ROUGH_MORREY_OUT).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_GATE: i32 = 3;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Gate { .. } | Error::NonCancelling { .. } => EXIT_GATE,
        _ => EXIT_CONFIG,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
        }
    };
    match execute(cli.command) {
        Ok(pass) => {
            if pass {
                EXIT_PASS
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Apply(a) => apply(&LoadedConfig::read(&a.config)?),
        Command::Norm(a) => norm(&LoadedConfig::read(&a.config)?),
        Command::Ap(a) => ap(&LoadedConfig::read(&a.config)?),
        Command::Bmo(a) => bmo(&LoadedConfig::read(&a.config)?),
        Command::Verify(a) => verify(&LoadedConfig::read(&a.config)?),
        Command::Suite { preset, seed, out } => suite(&preset, seed, out.as_deref()),
    }
}

fn out_dir(cfg: &LoadedConfig) -> PathBuf {
    report::output_dir(cfg.config.output.as_deref())
}

fn emit<T: Serialize>(dir: &Path, command: &str, body: &T) -> Result<PathBuf> {
    let path = dir.join(format!("{command}.json"));
    report::write_json(&path, &report::summary(command, body)?)?;
    Ok(path)
}

fn write_rows(path: &Path, rows: &[BallRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(report::create(path)?);
    w.write_record(["x", "y", "radius", "value"])?;
    for r in rows {
        w.write_record([fmt_f64(r.center[0]), fmt_f64(r.center[1]), fmt_f64(r.radius), fmt_f64(r.value)])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct ApplySummary {
    operator: &'static str,
    cells: usize,
    sup_norm: f64,
    input_sup_norm: f64,
    csv: String,
}

fn apply(cfg: &LoadedConfig) -> Result<bool> {
    let grid = cfg.grid()?;
    let op = cfg.operator(&grid)?;
    let f = cfg.f(&grid)?;
    let tf = op.apply(&f, &grid)?;
    let dir = out_dir(cfg);
    tf.write_csv(&grid, report::create(&dir.join("apply.csv"))?)?;
    let body = ApplySummary {
        operator: op.kind.name(),
        cells: grid.len(),
        sup_norm: tf.sup_norm(),
        input_sup_norm: f.sup_norm(),
        csv: "apply.csv".into(),
    };
    emit(&dir, "apply", &body)?;
    println!("{}: sup |Tf| = {}", op.kind.name(), fmt_f64(body.sup_norm));
    Ok(true)
}

#[derive(Serialize)]
struct NormSummary {
    kind: &'static str,
    p: f64,
    weak: bool,
    value: f64,
    argmax: Option<BallRow>,
}

fn norm(cfg: &LoadedConfig) -> Result<bool> {
    let Some(nc) = &cfg.config.norm else {
        return Err(Error::config("`norm` needs a [norm] block"));
    };
    let grid = cfg.grid()?;
    let f = cfg.f(&grid)?;
    let sp = &cfg.config.space;
    let p = sp.p;
    let w = cfg.weight(&grid)?;
    let (kind, report): (&'static str, Option<NormReport>) = match nc.kind {
        NormKind::Lebesgue => ("lebesgue", None),
        NormKind::WeightedLebesgue => ("weighted_lebesgue", None),
        NormKind::ClassicalMorrey => {
            let lambda = sp
                .lambda
                .ok_or_else(|| Error::config("classical_morrey needs space.lambda"))?;
            let r = spaces::classical_morrey_norm(&f, p, lambda, &cfg.family()?, &grid, nc.weak)?;
            ("classical_morrey", Some(r))
        }
        NormKind::WeightedMorrey => {
            let r = spaces::weighted_morrey_norm(&f, p, sp.kappa, &w, &cfg.family()?, &grid, nc.weak)?;
            ("weighted_morrey", Some(r))
        }
        NormKind::GeneralizedWeightedMorrey => {
            let r = spaces::generalized_weighted_morrey_norm(&f, p, &sp.phi1, &w, &cfg.family()?, &grid, nc.weak)?;
            ("generalized_weighted_morrey", Some(r))
        }
    };
    let value = match (&report, nc.kind) {
        (Some(r), _) => r.value,
        (None, k) => {
            let all: Vec<usize> = (0..grid.len()).collect();
            let w = if k == NormKind::Lebesgue { None } else { Some(&w) };
            match (nc.weak, w) {
                (true, w) => spaces::weak_lp_w_norm(&f, w, p, &all, &grid),
                (false, Some(w)) => spaces::lp_w_norm(&f, w, p, &all, &grid),
                (false, None) => spaces::lp_norm(&f, p, &all, &grid),
            }
        }
    };
    let dir = out_dir(cfg);
    if let Some(r) = &report {
        write_rows(&dir.join("norm.csv"), &r.rows)?;
    }
    let body = NormSummary {
        kind,
        p,
        weak: nc.weak,
        value,
        argmax: report.map(|r| r.argmax),
    };
    emit(&dir, "norm", &body)?;
    println!("{kind} norm = {}", fmt_f64(value));
    Ok(true)
}

#[derive(Serialize)]
struct ApSummary {
    p: f64,
    characteristic: f64,
    argmax: BallRow,
    a_infinity: f64,
    a_infinity_p: f64,
}

fn ap(cfg: &LoadedConfig) -> Result<bool> {
    let grid = cfg.grid()?;
    let w = cfg.weight(&grid)?;
    let fam = cfg.family()?;
    let p = cfg.config.space.p;
    let r = if p == 1.0 {
        weights::a1_characteristic(&w, &fam, &grid)?
    } else {
        weights::ap_characteristic(&w, p, &fam, &grid)?
    };
    let ainf = weights::a_infinity_characteristic(&w, &fam, &grid)?;
    let dir = out_dir(cfg);
    write_rows(&dir.join("ap.csv"), &r.rows)?;
    emit(
        &dir,
        "ap",
        &ApSummary {
            p,
            characteristic: r.characteristic,
            argmax: r.argmax,
            a_infinity: ainf.characteristic,
            a_infinity_p: ainf.p,
        },
    )?;
    println!("[w]_A{} = {}", p, fmt_f64(r.characteristic));
    Ok(true)
}

#[derive(Serialize)]
struct BmoSummary {
    bmo: f64,
    argmax: BallRow,
    weighted_bmo: Option<f64>,
    jn: spaces::JnReport,
    fit: Option<spaces::LogFit>,
}

fn bmo(cfg: &LoadedConfig) -> Result<bool> {
    let grid = cfg.grid()?;
    let Some(b) = cfg.b(&grid)? else {
        return Err(Error::config("`bmo` needs a [b] block"));
    };
    let bc = cfg.config.bmo.clone().unwrap_or(crate::config::BmoConfig {
        jn_p: 2.0,
        weighted: false,
        fit_center: None,
        fit_radius: None,
        fit_dilations: (1..=6).collect(),
    });
    let fam = cfg.family()?;
    let n = spaces::bmo_norm(&b, &fam, &grid)?;
    let w = if bc.weighted { Some(cfg.weight(&grid)?) } else { None };
    let weighted_bmo = match &w {
        Some(w) => Some(spaces::bmo_w_norm(&b, w, &fam, &grid)?.value),
        None => None,
    };
    let jn = spaces::jn_lp_equivalence(&b, w.as_ref(), bc.jn_p, &fam, &grid)?;
    let fit = match (bc.fit_center, bc.fit_radius) {
        (Some(x), Some(r)) => Some(spaces::log_growth_fit(&b, x, r, &bc.fit_dilations, n.value, &grid)?),
        (None, None) => None,
        _ => return Err(Error::config("bmo.fit_center and bmo.fit_radius go together")),
    };
    let dir = out_dir(cfg);
    write_rows(&dir.join("bmo.csv"), &n.rows)?;
    let body = BmoSummary {
        bmo: n.value,
        argmax: n.argmax,
        weighted_bmo,
        jn,
        fit,
    };
    emit(&dir, "bmo", &body)?;
    println!("||b||_* = {}", fmt_f64(body.bmo));
    Ok(true)
}

#[derive(Serialize)]
struct VerifySummary<'a> {
    pass: bool,
    cases: &'a [VerificationReport],
}

fn verify(cfg: &LoadedConfig) -> Result<bool> {
    let grid = cfg.grid()?;
    let cases = cfg.cases(&grid)?;
    if cases.is_empty() {
        return Err(Error::config("`verify` needs at least one [[case]]"));
    }
    // every gate before any computation
    for case in &cases {
        harness::check_gates(case, &grid)?;
    }
    let mut reports = Vec::with_capacity(cases.len());
    for case in &cases {
        reports.push(harness::run_case(case, &grid)?);
    }
    let dir = out_dir(cfg);
    let names = csv_names("verify", &reports);
    for (r, name) in reports.iter().zip(&names) {
        r.write_csv(report::create(&dir.join(name))?)?;
    }
    let pass = reports.iter().all(|r| r.pass);
    emit(&dir, "verify", &VerifySummary { pass, cases: &reports })?;
    let mut out = std::io::stdout().lock();
    for r in &reports {
        let _ = writeln!(
            out,
            "{}: C_emp = {} drift = {} spread = {} {}",
            r.case,
            fmt_f64(r.c_emp),
            fmt_f64(r.drift),
            fmt_f64(r.spread),
            if r.pass { "PASS" } else { "FAIL" }
        );
    }
    Ok(pass)
}

/// `<prefix>_<case>.csv`, with the case position appended to repeated ids.
fn csv_names(prefix: &str, reports: &[VerificationReport]) -> Vec<String> {
    reports
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let repeated = reports.iter().filter(|o| o.case == r.case).count() > 1;
            if repeated {
                format!("{prefix}_{}_{i}.csv", r.case)
            } else {
                format!("{prefix}_{}.csv", r.case)
            }
        })
        .collect()
}

fn suite(preset: &str, seed: Option<u64>, out: Option<&Path>) -> Result<bool> {
    let seed = seed.unwrap_or(presets::DEFAULT_SEED);
    let r = presets::run_preset(preset, seed)?;
    let dir = report::output_dir(out);
    write_suite_csv(&dir.join("suite.csv"), &r)?;
    let names = csv_names("suite", &r.cases);
    for (c, name) in r.cases.iter().zip(&names) {
        c.write_csv(report::create(&dir.join(name))?)?;
    }
    emit(&dir, "suite", &r)?;
    let mut stdout = std::io::stdout().lock();
    for c in &r.criteria {
        let _ = writeln!(stdout, "criterion {:>2} {:<32} {}", c.index, c.name, if c.pass { "PASS" } else { "FAIL" });
    }
    Ok(r.pass)
}

fn write_suite_csv(path: &Path, r: &SuiteReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(report::create(path)?);
    w.write_record(["criterion", "name", "pass", "metric", "value"])?;
    for c in &r.criteria {
        for (k, v) in &c.metrics {
            w.write_record([c.index.to_string(), c.name.clone(), c.pass.to_string(), k.clone(), fmt_f64(*v)])?;
        }
    }
    w.flush()?;
    Ok(())
}

