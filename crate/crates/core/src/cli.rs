//! Experiment runner: single solves, (s, j) tables and error curves.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::Error;
use crate::frbspline::DEFAULT_TAIL_TOL;
use crate::problems::{example1, example2, ProblemSpec};
use crate::solver::{error_report, solve, SolveConfig, CONDITION_WARNING};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

/// Environment variable that sets the worker count when `--threads` is absent.
pub const THREADS_ENV: &str = "FRACSPLINE_THREADS";

const MIN_LEVEL: u32 = 2;
const MAX_LEVEL: u32 = 8;

#[derive(Debug, Parser)]
#[command(name = "fracspline", version, about = "Time-fractional diffusion solver experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve once and report the error.
    Solve(CommonArgs),
    /// Sweep every (s, j) pair.
    Table(CommonArgs),
    /// Error against s for several degrees, one data file per gamma.
    Curves(CommonArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Built-in problem.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub example: u8,
    /// Derivative order(s), comma separated.
    #[arg(long, value_delimiter = ',')]
    pub gamma: Vec<f64>,
    /// Temporal spline degree(s).
    #[arg(long, value_delimiter = ',')]
    pub beta: Vec<f64>,
    /// Spatial spline degree.
    #[arg(long, default_value_t = 3)]
    pub alpha: usize,
    /// Spatial level(s).
    #[arg(short = 'j', value_delimiter = ',')]
    pub j: Vec<u32>,
    /// Temporal level(s).
    #[arg(short = 's', value_delimiter = ',')]
    pub s: Vec<u32>,
    /// Collocation level; s+1 when omitted.
    #[arg(short = 'q')]
    pub q: Option<u32>,
    /// Time horizon.
    #[arg(short = 'T', default_value_t = 1)]
    pub horizon: u32,
    #[arg(long, default_value_t = DEFAULT_TAIL_TOL)]
    pub tail_tol: f64,
    /// Gauss points per quadrature cell.
    #[arg(long, default_value_t = 8)]
    pub quad_points: usize,
    /// Drop the least-squares row enforcing u(0, x) = 0.
    #[arg(long)]
    pub no_ic_row: bool,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file (directory for `curves`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Write runtime_ms as 0 so output files are reproducible byte for byte.
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Single,
    Table,
    Curves,
}

/// Validated experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub example: u8,
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
    pub alpha: usize,
    pub js: Vec<u32>,
    pub ss: Vec<u32>,
    pub q: Option<u32>,
    pub horizon: u32,
    pub tail_tol: f64,
    pub quad_points: usize,
    pub include_ic_row: bool,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub threads: Option<usize>,
    pub timing: bool,
}

fn config_error(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}

impl ExperimentConfig {
    pub fn from_args(args: &CommonArgs, mode: Mode) -> Result<Self, Error> {
        let defaults = |given: &Vec<f64>, fallback: &[f64]| {
            if given.is_empty() && mode == Mode::Curves {
                fallback.to_vec()
            } else {
                given.clone()
            }
        };
        let curve_gammas: &[f64] = if args.example == 1 {
            &[1.0, 0.75, 0.5, 0.25]
        } else {
            &[0.75, 0.5, 0.25]
        };
        let js = if args.j.is_empty() && mode == Mode::Curves {
            vec![5]
        } else {
            args.j.clone()
        };
        let ss = if args.s.is_empty() && mode == Mode::Curves {
            (3..=7).collect()
        } else {
            args.s.clone()
        };
        let threads = match args.threads {
            Some(n) => Some(n),
            None => match std::env::var(THREADS_ENV) {
                Ok(v) => Some(v.trim().parse().map_err(|_| {
                    config_error(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))
                })?),
                Err(_) => None,
            },
        };
        let cfg = Self {
            example: args.example,
            gammas: defaults(&args.gamma, curve_gammas),
            betas: defaults(&args.beta, &[2.0, 2.5, 3.0, 3.5, 4.0]),
            alpha: args.alpha,
            js,
            ss,
            q: args.q,
            horizon: args.horizon,
            tail_tol: args.tail_tol,
            quad_points: args.quad_points,
            include_ic_row: !args.no_ic_row,
            out: args.out.clone(),
            format: args.format.unwrap_or(Format::Csv),
            threads,
            timing: !args.no_timing,
        };
        cfg.validate(mode)?;
        Ok(cfg)
    }

    pub fn validate(&self, mode: Mode) -> Result<(), Error> {
        for (name, empty) in [
            ("gamma", self.gammas.is_empty()),
            ("beta", self.betas.is_empty()),
            ("j", self.js.is_empty()),
            ("s", self.ss.is_empty()),
        ] {
            if empty {
                return Err(config_error(format!("the {name} list is empty")));
            }
        }
        if mode == Mode::Single
            && (self.gammas.len() > 1 || self.betas.len() > 1 || self.js.len() > 1 || self.ss.len() > 1)
        {
            return Err(config_error("solve takes a single value per parameter; use table"));
        }
        for &l in self.js.iter().chain(&self.ss) {
            if !(MIN_LEVEL..=MAX_LEVEL).contains(&l) {
                return Err(config_error(format!(
                    "level {l} outside {MIN_LEVEL}..={MAX_LEVEL}"
                )));
            }
        }
        if let Some(q) = self.q {
            if let Some(&s) = self.ss.iter().find(|&&s| q < s) {
                return Err(config_error(format!("q = {q} is below s = {s}")));
            }
        }
        if self.threads == Some(0) {
            return Err(config_error("thread count must be positive"));
        }
        if let Some(out) = &self.out {
            if mode == Mode::Curves && out.is_file() {
                return Err(config_error(format!("{} is a file, not a directory", out.display())));
            }
            if mode != Mode::Curves && out.is_dir() {
                return Err(config_error(format!("{} is a directory", out.display())));
            }
        }
        for &g in &self.gammas {
            self.problem(g)?;
            for &b in &self.betas {
                for &j in &self.js {
                    for &s in &self.ss {
                        self.solve_config(g, b, j, s).validate()?;
                        self.solve_config(g, b, j, s).spatial_basis()?;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn problem(&self, gamma: f64) -> Result<ProblemSpec, Error> {
        let p = match self.example {
            1 => example1(gamma)?,
            2 => example2(gamma)?,
            e => return Err(config_error(format!("unknown example {e}"))),
        };
        Ok(p.with_horizon(self.horizon as f64))
    }

    pub fn solve_config(&self, gamma: f64, beta: f64, j: u32, s: u32) -> SolveConfig {
        SolveConfig {
            gamma,
            alpha: self.alpha,
            beta,
            j,
            s,
            q: self.q,
            horizon: self.horizon,
            tail_tol: self.tail_tol,
            support: None,
            quad_points: self.quad_points,
            include_ic_row: self.include_ic_row,
        }
    }
}

/// One line of a results table. Failed cells carry NaN errors, written as
/// `NaN` in CSV and `null` in JSON.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub s: u32,
    pub j: u32,
    pub beta: f64,
    pub gamma: f64,
    pub l2_error: f64,
    pub dof: usize,
    pub condition_estimate: f64,
    pub runtime_ms: u64,
}

/// A table row plus what did not fit in the fixed columns.
#[derive(Debug, Clone)]
pub struct CellResult {
    pub row: TableRow,
    pub final_time_error: f64,
    pub failure: Option<String>,
}

impl CellResult {
    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }
}

fn run_cell(cfg: &ExperimentConfig, gamma: f64, beta: f64, j: u32, s: u32) -> CellResult {
    let start = Instant::now();
    let scfg = cfg.solve_config(gamma, beta, j, s);
    let dof = match (scfg.spatial_basis(), scfg.temporal_basis()) {
        (Ok(a), Ok(b)) => a.size() * b.size(),
        _ => 0,
    };
    let outcome = cfg.problem(gamma).and_then(|p| {
        let (sol, rep) = solve(&p, &scfg)?;
        error_report(&sol, &rep, &p)
    });
    let runtime_ms = if cfg.timing {
        start.elapsed().as_millis() as u64
    } else {
        0
    };
    let mut row = TableRow {
        s,
        j,
        beta,
        gamma,
        l2_error: f64::NAN,
        dof,
        condition_estimate: f64::NAN,
        runtime_ms,
    };
    match outcome {
        Ok(er) => {
            row.l2_error = er.l2_error;
            row.dof = er.dof;
            row.condition_estimate = er.condition_estimate;
            CellResult {
                row,
                final_time_error: er.final_time_error,
                failure: None,
            }
        }
        Err(e) => CellResult {
            row,
            final_time_error: f64::NAN,
            failure: Some(e.to_string()),
        },
    }
}

fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        None => f(),
    }
}

fn run_cells(cfg: &ExperimentConfig, cells: Vec<(f64, f64, u32, u32)>) -> Vec<CellResult> {
    use rayon::prelude::*;
    with_pool(cfg.threads, || {
        cells
            .into_par_iter()
            .map(|(g, b, j, s)| run_cell(cfg, g, b, j, s))
            .collect()
    })
}

/// Single solve.
pub fn run_single(cfg: &ExperimentConfig) -> CellResult {
    run_cell(cfg, cfg.gammas[0], cfg.betas[0], cfg.js[0], cfg.ss[0])
}

/// Every (gamma, beta, s, j), s ascending outside j ascending.
pub fn run_table(cfg: &ExperimentConfig) -> Vec<CellResult> {
    let mut ss = cfg.ss.clone();
    ss.sort_unstable();
    ss.dedup();
    let mut js = cfg.js.clone();
    js.sort_unstable();
    js.dedup();
    let mut cells = Vec::new();
    for &g in &cfg.gammas {
        for &b in &cfg.betas {
            for &s in &ss {
                for &j in &js {
                    cells.push((g, b, j, s));
                }
            }
        }
    }
    run_cells(cfg, cells)
}

/// Curve data for one gamma: error per (s, beta).
#[derive(Debug, Clone)]
pub struct Curve {
    pub gamma: f64,
    pub betas: Vec<f64>,
    pub ss: Vec<u32>,
    /// `errors[i][k]` for `ss[i]`, `betas[k]`.
    pub errors: Vec<Vec<f64>>,
}

/// Error against s at fixed j, one curve family per gamma.
pub fn run_curves(cfg: &ExperimentConfig) -> Vec<Curve> {
    let mut ss = cfg.ss.clone();
    ss.sort_unstable();
    ss.dedup();
    let j = cfg.js[0];
    let mut cells = Vec::new();
    for &g in &cfg.gammas {
        for &s in &ss {
            for &b in &cfg.betas {
                cells.push((g, b, j, s));
            }
        }
    }
    let results = run_cells(cfg, cells);
    let mut it = results.into_iter();
    cfg.gammas
        .iter()
        .map(|&gamma| Curve {
            gamma,
            betas: cfg.betas.clone(),
            ss: ss.clone(),
            errors: ss
                .iter()
                .map(|_| {
                    cfg.betas
                        .iter()
                        .map(|_| it.next().map_or(f64::NAN, |c| c.row.l2_error))
                        .collect()
                })
                .collect(),
        })
        .collect()
}

pub fn write_csv<W: std::io::Write>(rows: &[TableRow], out: W) -> Result<(), Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

pub fn write_json<W: std::io::Write>(rows: &[TableRow], single: bool, mut out: W) -> Result<(), Error> {
    let text = if single && rows.len() == 1 {
        serde_json::to_string_pretty(&rows[0])
    } else {
        serde_json::to_string_pretty(rows)
    }
    .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    writeln!(out, "{text}")?;
    Ok(())
}

/// Whitespace-separated columns: `s` then one error per beta, 17 significant
/// digits.
pub fn format_curve(curve: &Curve) -> String {
    let mut text = format!("# gamma = {}\n# s", curve.gamma);
    for b in &curve.betas {
        let _ = write!(text, " beta={b}");
    }
    text.push('\n');
    for (s, errs) in curve.ss.iter().zip(&curve.errors) {
        let _ = write!(text, "{s}");
        for e in errs {
            let _ = write!(text, " {e:.16e}");
        }
        text.push('\n');
    }
    text
}

pub fn curve_file_name(gamma: f64) -> String {
    format!("curve_gamma_{gamma}.dat")
}

fn sci6(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.5e}")
    } else {
        "n/a".to_string()
    }
}

fn human_line(c: &CellResult) -> String {
    let r = &c.row;
    match &c.failure {
        None => format!(
            "s={} j={} beta={} gamma={}  L2 error {}  final-time error {}  dof {}  condition {}  {} ms",
            r.s,
            r.j,
            r.beta,
            r.gamma,
            sci6(r.l2_error),
            sci6(c.final_time_error),
            r.dof,
            sci6(r.condition_estimate),
            r.runtime_ms
        ),
        Some(msg) => format!(
            "s={} j={} beta={} gamma={}  FAILED: {msg}",
            r.s, r.j, r.beta, r.gamma
        ),
    }
}

fn warn_conditioning(cells: &[CellResult]) {
    for c in cells {
        if c.row.condition_estimate > CONDITION_WARNING {
            eprintln!(
                "warning: condition estimate {} at s={} j={} beta={} gamma={}",
                sci6(c.row.condition_estimate),
                c.row.s,
                c.row.j,
                c.row.beta,
                c.row.gamma
            );
        }
    }
}

// Writes to a sibling temporary file first so no partial output survives.
fn write_atomically(path: &Path, contents: &[u8]) -> Result<(), Error> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn emit_rows(cfg: &ExperimentConfig, rows: &[TableRow], single: bool, machine: bool) -> Result<(), Error> {
    let mut buf = Vec::new();
    match cfg.format {
        Format::Csv => write_csv(rows, &mut buf)?,
        Format::Json => write_json(rows, single, &mut buf)?,
    }
    match &cfg.out {
        Some(path) => write_atomically(path, &buf),
        None if machine => {
            std::io::stdout().write_all(&buf)?;
            Ok(())
        }
        None => Ok(()),
    }
}

/// Parses `args` (program name first) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let (args, mode) = match &cli.command {
        Command::Solve(a) => (a, Mode::Single),
        Command::Table(a) => (a, Mode::Table),
        Command::Curves(a) => (a, Mode::Curves),
    };
    let cfg = match ExperimentConfig::from_args(args, mode) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let machine = args.format.is_some();
    let result = match mode {
        Mode::Single => {
            let cell = run_single(&cfg);
            warn_conditioning(std::slice::from_ref(&cell));
            if let Some(msg) = &cell.failure {
                eprintln!("error: solver failed: {msg}");
                return EXIT_SOLVER;
            }
            if machine {
                eprintln!("{}", human_line(&cell));
            } else {
                println!("{}", human_line(&cell));
            }
            emit_rows(&cfg, &[cell.row], true, machine)
        }
        Mode::Table => {
            let cells = run_table(&cfg);
            warn_conditioning(&cells);
            for c in &cells {
                if machine || cfg.out.is_some() {
                    eprintln!("{}", human_line(c));
                } else {
                    println!("{}", human_line(c));
                }
            }
            let rows: Vec<TableRow> = cells.into_iter().map(|c| c.row).collect();
            emit_rows(&cfg, &rows, false, machine)
        }
        Mode::Curves => {
            let curves = run_curves(&cfg);
            let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("."));
            fs::create_dir_all(&dir).map_err(Error::from).and_then(|_| {
                for c in &curves {
                    let path = dir.join(curve_file_name(c.gamma));
                    write_atomically(&path, format_curve(c).as_bytes())?;
                    println!("wrote {}", path.display());
                }
                Ok(())
            })
        }
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_SOLVER
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> CommonArgs {
        let cli = Cli::try_parse_from(std::iter::once("fracspline").chain(args.iter().copied())).unwrap();
        match cli.command {
            Command::Solve(a) | Command::Table(a) | Command::Curves(a) => a,
        }
    }

    #[test]
    fn comma_lists() {
        let a = parse(&["table", "--gamma", "0.5", "--beta", "3,3.5", "-j", "3,4,5", "-s", "5,6"]);
        assert_eq!(a.beta, vec![3.0, 3.5]);
        assert_eq!(a.j, vec![3, 4, 5]);
        let cfg = ExperimentConfig::from_args(&a, Mode::Table).unwrap();
        assert!(cfg.include_ic_row && cfg.timing);
    }

    #[test]
    fn curve_defaults() {
        let a = parse(&["curves"]);
        let cfg = ExperimentConfig::from_args(&a, Mode::Curves).unwrap();
        assert_eq!(cfg.betas, vec![2.0, 2.5, 3.0, 3.5, 4.0]);
        assert_eq!(cfg.js, vec![5]);
        assert_eq!(cfg.gammas, vec![1.0, 0.75, 0.5, 0.25]);
    }

    #[test]
    fn rejects_bad_configs() {
        for args in [
            vec!["table", "--gamma", "0.5", "--beta", "3", "-s", "5"],
            vec!["solve", "--gamma", "0.5", "--beta", "3", "-j", "3,4", "-s", "5"],
            vec!["solve", "--gamma", "0.5", "--beta", "3", "-j", "9", "-s", "5"],
            vec!["solve", "--gamma", "1.5", "--beta", "3", "-j", "3", "-s", "5"],
            vec!["solve", "--example", "2", "--gamma", "1", "--beta", "3", "-j", "3", "-s", "5"],
            vec!["solve", "--gamma", "0.5", "--beta", "3", "-j", "3", "-s", "5", "-q", "4"],
        ] {
            let a = parse(&args);
            let mode = if args[0] == "table" { Mode::Table } else { Mode::Single };
            assert!(ExperimentConfig::from_args(&a, mode).is_err(), "{args:?}");
        }
    }

    #[test]
    fn sentinel_rows() {
        let row = TableRow {
            s: 5,
            j: 3,
            beta: 3.0,
            gamma: 0.5,
            l2_error: f64::NAN,
            dof: 315,
            condition_estimate: f64::NAN,
            runtime_ms: 0,
        };
        let mut csv = Vec::new();
        write_csv(std::slice::from_ref(&row), &mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(
            text,
            "s,j,beta,gamma,l2_error,dof,condition_estimate,runtime_ms\n5,3,3.0,0.5,NaN,315,NaN,0\n"
        );
        let mut json = Vec::new();
        write_json(&[row], true, &mut json).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&json).unwrap();
        assert!(v["l2_error"].is_null());
    }

    #[test]
    fn curve_text() {
        let c = Curve {
            gamma: 0.5,
            betas: vec![3.0, 3.5],
            ss: vec![4, 5],
            errors: vec![vec![0.1, 0.2], vec![0.125, f64::NAN]],
        };
        let text = format_curve(&c);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[1], "# s beta=3 beta=3.5");
        assert_eq!(lines[2], "4 1.0000000000000001e-1 2.0000000000000001e-1");
        assert!(lines[3].ends_with("NaN"));
    }
}
