//! `maxbv`: command-line front end.
//!
//! Exit status: 0 on success with every check passing, 1 when a check fails
//! or a computation does not finish, 2 on usage or input errors.

mod output;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use maxbv::grid2d::{self, GridFn2D, ResolutionPolicy};
use maxbv::maximal1d::{self, ProfileError, Radius, SampledProfile};
use maxbv::orlicz::{self, OrliczParams};
use maxbv::rat::Rat;
use maxbv::report::CheckReport;
use maxbv::step::StepFn;
use maxbv::verify::{self, SuiteResult};
use output::{dec, emit, exact, exact_f64, json, Table};
use serde::Deserialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "maxbv", version, about = "Local maximal operators on functions of bounded variation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate M_R f at one point, with a maximizing interval.
    Eval {
        #[arg(long = "f")]
        f: PathBuf,
        /// Radius: a rational literal or `inf`.
        #[arg(long = "R", allow_hyphen_values = true)]
        r: String,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_rat)]
        x: Rat,
        /// Print JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Adaptive profile of M_R f as CSV.
    Profile {
        #[arg(long = "f")]
        f: PathBuf,
        #[arg(long = "R", allow_hyphen_values = true)]
        r: String,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check one inequality and emit its report as JSON.
    #[command(subcommand)]
    Check(CheckCmd),
    /// Two-dimensional experiments.
    #[command(subcommand)]
    Grid(GridCmd),
    /// Orlicz norms.
    #[command(subcommand)]
    Orlicz(OrliczCmd),
    /// Run a named verification suite.
    Suite {
        /// One of remark-log, bd, weak-type, poincare, counterexample, charact,
        /// blowup, growth, orlicz, all.
        name: String,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run failing checks from a report or suite result file.
    Replay {
        report: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct FnRadius {
    #[arg(long = "f")]
    f: PathBuf,
    #[arg(long = "R", allow_hyphen_values = true, value_parser = parse_rat)]
    r: Rat,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum CheckCmd {
    /// L¹ and variation bound for M_R f.
    Bd(FnRadius),
    /// Weak type (1,1) at the given thresholds.
    Weak {
        #[arg(long = "f")]
        f: PathBuf,
        #[arg(long = "t", value_delimiter = ',', value_parser = parse_rat, required = true)]
        t: Vec<Rat>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Poincaré-type inequality for compactly supported f.
    Poincare(FnRadius),
    /// Dyadic set: V(M_R f) against the explicit bound.
    Counterexample {
        #[arg(long = "n-max", default_value_t = 20)]
        n_max: u32,
        #[arg(long = "R", allow_hyphen_values = true, value_parser = parse_rat)]
        r: Rat,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// M_a f → f in L¹ and lower semicontinuity of the variation.
    Convergence {
        #[arg(long = "f")]
        f: PathBuf,
        /// Decreasing scales; default 2^-1..2^-8.
        #[arg(long, value_delimiter = ',', value_parser = parse_rat)]
        scales: Vec<Rat>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// ‖M_R f‖₁ across radii as a CSV table.
    Growth1d {
        #[arg(long = "f")]
        f: PathBuf,
        #[arg(long = "Rs", value_delimiter = ',', value_parser = parse_rat, required = true)]
        rs: Vec<Rat>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Where to write the report JSON; omitted means not written.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GridCmd {
    /// Variation of M¹, iterated and strong maximal functions of χ_{[0,δ]²}.
    Blowup {
        /// Comma list or a dyadic range such as `2^-3..2^-6`.
        #[arg(long, default_value = "2^-3..2^-6")]
        deltas: String,
        #[arg(long = "R", default_value_t = 4.0)]
        r: f64,
        #[arg(long = "cells-per-delta", default_value_t = 8)]
        cells_per_delta: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// L¹ norms of the 2D maximal functions across radii.
    Growth {
        #[arg(long = "f")]
        f: PathBuf,
        #[arg(long = "Rs", value_delimiter = ',', required = true)]
        rs: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Discrete total variation, directly and by the coarea sum.
    Tv {
        #[arg(long = "f")]
        f: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum OrliczCmd {
    /// Luxemburg norm of a step or grid function.
    Norm {
        #[arg(long = "f")]
        f: PathBuf,
        #[arg(long = "r", default_value_t = 1.0)]
        r: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Embedding bound for a grid function (d = 2).
    Embedding {
        #[arg(long = "f")]
        f: PathBuf,
        #[arg(long = "r", default_value_t = 1.0)]
        r: f64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

type Outcome = Result<bool, Failure>;

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Usage(e.into())
}

fn runtime(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Runtime(e.into())
}

fn parse_rat(s: &str) -> Result<Rat, String> {
    s.parse::<Rat>().map_err(|e| e.to_string())
}

fn parse_radius(s: &str) -> Result<Radius, Failure> {
    let r: Radius = s.parse().map_err(|e| usage(anyhow!("--R: {e}")))?;
    match &r {
        Radius::Finite(v) if !v.is_positive() => Err(usage(anyhow!("--R must be positive, got {v}"))),
        _ => Ok(r),
    }
}

fn positive(name: &str, r: &Rat) -> Result<(), Failure> {
    if r.is_positive() {
        Ok(())
    } else {
        Err(usage(anyhow!("{name} must be positive, got {r}")))
    }
}

fn tolerance(tol: f64) -> Result<(), Failure> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(usage(anyhow!("--tol must be positive, got {tol}")))
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display())).map_err(usage)?;
    serde_json::from_str(&text).with_context(|| format!("{} is not valid input", path.display())).map_err(usage)
}

fn write(path: Option<&Path>, bytes: anyhow::Result<Vec<u8>>) -> Result<(), Failure> {
    emit(path, &bytes.map_err(runtime)?).map_err(runtime)
}

fn report_out(path: Option<&Path>, rep: &CheckReport) -> Outcome {
    write(path, json(rep))?;
    Ok(rep.passed)
}

fn check_env() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("MAXBV_MAX_DEPTH") {
        match v.trim().parse::<u32>() {
            Ok(d) if d > 0 => {}
            _ => return Err(usage(anyhow!("MAXBV_MAX_DEPTH must be a positive integer, got `{v}`"))),
        }
    }
    Ok(())
}

fn profile_table(p: &SampledProfile) -> anyhow::Result<Vec<u8>> {
    let mut t = Table::new(&["node_exact", "node_decimal", "value_exact", "value_decimal"], "plumbing")?;
    for (x, y) in p.nodes.iter().zip(&p.values) {
        t.row(vec![exact(x), dec(x.to_f64()), exact(y), dec(y.to_f64())])?;
    }
    t.finish()
}

/// Expands `2^a..2^b` into the powers of two from `a` to `b`, or parses a
/// comma-separated list.
fn parse_deltas(s: &str) -> Result<Vec<f64>, Failure> {
    let bad = || usage(anyhow!("--deltas: expected `2^a..2^b` or a comma list, got `{s}`"));
    if let Some((a, b)) = s.split_once("..") {
        let exp = |t: &str| t.trim().strip_prefix("2^").and_then(|e| e.trim_matches(|c| c == '(' || c == ')').parse::<i32>().ok());
        let (a, b) = (exp(a).ok_or_else(bad)?, exp(b).ok_or_else(bad)?);
        let step = if b >= a { 1 } else { -1 };
        let mut out = vec![];
        let mut e = a;
        loop {
            out.push(2f64.powi(e));
            if e == b {
                break;
            }
            e += step;
        }
        return Ok(out);
    }
    s.split(',').map(|t| t.parse::<Rat>().map(|r| r.to_f64()).map_err(|_| bad())).collect()
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AnyFn {
    Step(StepFn),
    Grid(GridFn2D),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ReplayInput {
    Suite(SuiteResult),
    Report(CheckReport),
}

fn run(cli: Cli) -> Outcome {
    check_env()?;
    match cli.command {
        Command::Eval { f, r, x, json: as_json } => {
            let radius = parse_radius(&r)?;
            let f: StepFn = read_json(&f)?;
            let q = maximal1d::maximal_eval(&f, &x, &radius).map_err(usage)?;
            if as_json {
                write(None, json(&q))?;
            } else {
                let note = if q.degenerate { " (limit of shrinking intervals)" } else { "" };
                let text = format!("{} ≈ {}\nwitness {}{note}\n", q.value, q.value.to_f64(), q.witness);
                write(None, Ok(text.into_bytes()))?;
            }
            Ok(true)
        }
        Command::Profile { f, r, tol, out } => {
            let radius = parse_radius(&r)?;
            tolerance(tol)?;
            let f: StepFn = read_json(&f)?;
            match maximal1d::maximal_profile(&f, &radius, tol) {
                Ok(p) => {
                    write(out.as_deref(), profile_table(&p))?;
                    Ok(true)
                }
                Err(ProfileError::BudgetExceeded { partial, achieved_tol }) => {
                    write(out.as_deref(), profile_table(&partial))?;
                    eprintln!("maxbv: depth budget reached at tolerance {achieved_tol:e}; partial profile written");
                    Ok(false)
                }
                Err(e) => Err(runtime(e)),
            }
        }
        Command::Check(c) => run_check(c),
        Command::Grid(g) => run_grid(g),
        Command::Orlicz(o) => run_orlicz(o),
        Command::Suite { name, seed, out } => {
            let res = verify::run_suite(&name, seed).map_err(|e| match e {
                verify::VerifyError::UnknownSuite(_) => usage(e),
                other => runtime(other),
            })?;
            write(out.as_deref(), json(&res))?;
            let failed = res.failures().count();
            eprintln!("maxbv: suite {name}: {} checks, {failed} failed", res.reports.len());
            Ok(failed == 0)
        }
        Command::Replay { report, out } => {
            let input: ReplayInput = read_json(&report)?;
            let todo: Vec<CheckReport> = match input {
                ReplayInput::Report(r) => vec![r],
                ReplayInput::Suite(s) => s.reports.into_iter().filter(|r| r.instance.is_some()).collect(),
            };
            if todo.is_empty() {
                eprintln!("maxbv: nothing to replay");
                write(out.as_deref(), json(&Vec::<CheckReport>::new()))?;
                return Ok(true);
            }
            let mut again = Vec::new();
            for r in &todo {
                again.push(verify::replay(r).map_err(usage)?);
            }
            write(out.as_deref(), json(&again))?;
            Ok(again.iter().all(|r| r.passed))
        }
    }
}

fn run_check(c: CheckCmd) -> Outcome {
    match c {
        CheckCmd::Bd(a) => {
            positive("--R", &a.r)?;
            tolerance(a.tol)?;
            let f: StepFn = read_json(&a.f)?;
            report_out(a.out.as_deref(), &maximal1d::check_bd_bound(&f, &a.r, a.tol).map_err(runtime)?)
        }
        CheckCmd::Weak { f, t, out } => {
            for x in &t {
                positive("--t", x)?;
            }
            let f: StepFn = read_json(&f)?;
            report_out(out.as_deref(), &maximal1d::check_weak_type(&f, &t).map_err(runtime)?)
        }
        CheckCmd::Poincare(a) => {
            positive("--R", &a.r)?;
            tolerance(a.tol)?;
            let f: StepFn = read_json(&a.f)?;
            let rep = maximal1d::check_poincare(&f, &a.r, a.tol).map_err(|e| match e {
                maximal1d::CheckError::MarginTooSmall { .. } | maximal1d::CheckError::BadParameters(_) => usage(e),
                other => runtime(other),
            })?;
            report_out(a.out.as_deref(), &rep)
        }
        CheckCmd::Counterexample { n_max, r, tol, out } => {
            tolerance(tol)?;
            let rep = maximal1d::check_counterexample(n_max, &r, tol).map_err(|e| match e {
                maximal1d::CheckError::RadiusOutOfRange(_) | maximal1d::CheckError::BadParameters(_) => usage(e),
                other => runtime(other),
            })?;
            report_out(out.as_deref(), &rep)
        }
        CheckCmd::Convergence { f, scales, out } => {
            let scales = if scales.is_empty() { verify::dyadic_scales() } else { scales };
            let f: StepFn = read_json(&f)?;
            let rep = maximal1d::check_convergence(&f, &scales).map_err(|e| match e {
                maximal1d::CheckError::BadParameters(_) => usage(e),
                other => runtime(other),
            })?;
            report_out(out.as_deref(), &rep)
        }
        CheckCmd::Growth1d { f, rs, out, report } => {
            let f: StepFn = read_json(&f)?;
            let (rows, rep) = maximal1d::growth_table_1d(&f, &rs).map_err(|e| match e {
                maximal1d::CheckError::BadParameters(_) => usage(e),
                other => runtime(other),
            })?;
            let table = (|| {
                let mut t = Table::new(&["R_exact", "R_decimal", "l1", "variation", "ratio"], "growth-1d")?;
                for r in &rows {
                    t.row(vec![exact(&r.radius), dec(r.radius.to_f64()), dec(r.l1), dec(r.variation), dec(r.ratio)])?;
                }
                t.finish()
            })();
            write(out.as_deref(), table)?;
            if let Some(p) = report {
                write(Some(&p), json(&rep))?;
            }
            Ok(rep.passed)
        }
    }
}

fn grid_usage(e: grid2d::GridError) -> Failure {
    match e {
        grid2d::GridError::Check(_) => runtime(e),
        other => usage(other),
    }
}

fn run_grid(g: GridCmd) -> Outcome {
    match g {
        GridCmd::Blowup { deltas, r, cells_per_delta, out, report } => {
            let deltas = parse_deltas(&deltas)?;
            let (rows, rep) =
                grid2d::blowup_experiment(&deltas, r, ResolutionPolicy { cells_per_delta }).map_err(grid_usage)?;
            let table = (|| {
                let mut t = Table::new(
                    &[
                        "delta_exact", "delta_decimal", "n", "bv", "tv_directional", "tv_iterated", "tv_strong",
                        "tv_oracle", "ratio_directional", "ratio_oracle", "ratio_iterated", "ratio_strong",
                        "directional_over_bv", "iterated_over_bv", "strong_over_bv", "strip_rel_err",
                    ],
                    "blowup",
                )?;
                for w in &rows {
                    t.row(vec![
                        exact_f64(w.delta),
                        dec(w.delta),
                        w.n.to_string(),
                        dec(w.bv),
                        dec(w.tv_directional),
                        dec(w.tv_iterated),
                        dec(w.tv_strong),
                        dec(w.tv_oracle),
                        dec(w.ratio_directional),
                        dec(w.ratio_oracle),
                        dec(w.ratio_iterated),
                        dec(w.ratio_strong),
                        dec(w.directional_over_bv),
                        dec(w.iterated_over_bv),
                        dec(w.strong_over_bv),
                        dec(w.strip_rel_err),
                    ])?;
                }
                t.finish()
            })();
            write(out.as_deref(), table)?;
            if let Some(p) = report {
                write(Some(&p), json(&rep))?;
            }
            Ok(rep.passed)
        }
        GridCmd::Growth { f, rs, out, report } => {
            let g: GridFn2D = read_json(&f)?;
            let (rows, rep) = grid2d::growth_table_2d(&g, &rs).map_err(grid_usage)?;
            let table = (|| {
                let mut t = Table::new(&["R_exact", "R_decimal", "strong", "iterated", "square", "directional"], "growth-2d")?;
                for w in &rows {
                    t.row(vec![exact_f64(w.r), dec(w.r), dec(w.strong), dec(w.iterated), dec(w.square), dec(w.directional)])?;
                }
                t.finish()
            })();
            write(out.as_deref(), table)?;
            if let Some(p) = report {
                write(Some(&p), json(&rep))?;
            }
            Ok(rep.passed)
        }
        GridCmd::Tv { f, out } => {
            let g: GridFn2D = read_json(&f)?;
            write(out.as_deref(), json(&grid2d::discrete_tv(&g, None)))?;
            Ok(true)
        }
    }
}

fn run_orlicz(o: OrliczCmd) -> Outcome {
    match o {
        OrliczCmd::Norm { f, r, tol, out } => {
            tolerance(tol)?;
            let g: AnyFn = read_json(&f)?;
            let (norm, modular) = match &g {
                AnyFn::Step(s) => {
                    let n = orlicz::luxemburg_norm(s, r, tol).map_err(usage)?;
                    (n, if n > 0.0 { orlicz::orlicz_modular(s, n, r).map_err(runtime)? } else { 0.0 })
                }
                AnyFn::Grid(s) => {
                    let n = orlicz::luxemburg_norm(s, r, tol).map_err(usage)?;
                    (n, if n > 0.0 { orlicz::orlicz_modular(s, n, r).map_err(runtime)? } else { 0.0 })
                }
            };
            let mut rep = CheckReport::new("orlicz-norm");
            rep.measure("norm", norm)
                .measure("modular_at_norm", modular)
                .measure("r", r)
                .headline(modular, 1.0)
                .require(modular <= 1.0 && (norm == 0.0 || modular >= 1.0 - tol))
                .tag("bisection");
            report_out(out.as_deref(), &rep)
        }
        OrliczCmd::Embedding { f, r, tol, out } => {
            tolerance(tol)?;
            let g: GridFn2D = read_json(&f)?;
            report_out(out.as_deref(), &orlicz::check_embedding(&g, OrliczParams { r, d: 2 }, tol).map_err(usage)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(e)) => {
            eprintln!("maxbv: {e:#}\nhint: run `maxbv --help` for usage");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("maxbv: {e:#}");
            ExitCode::from(1)
        }
    }
}
