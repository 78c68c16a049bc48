//! The `loopwave` command-line front end.
//!
//! Exit codes: 0 pass, 1 mathematical failure, 2 I/O or format error.

pub mod format;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::cuntz_rep::{build_rep, commutant_diagnostic, verify_cuntz, Band};
use crate::error::Error;
use crate::irreducibility::{classify, equivalent};
use crate::loopgroup::{filters_to_loop, loop_to_filters, random_paraunitary, FilterSystem, Loop};
use crate::qmf::{complete, verify_qmf, Completion, CompletionMode, DEFAULT_GRID};
use crate::wavelet::{cascade, wavelets, CascadeSummary};

use format::{FilterFileV1, InputFile, LoopFileV1, SampledFileV1};

/// Default for exact coefficient-level checks.
pub const ALGEBRA_TOL: f64 = 1e-10;
/// Default for grid and cascade checks.
pub const GRID_TOL: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "loopwave", version, about = "Wavelet filter banks as loops in U(N)")]
pub struct Cli {
    /// Emit machine-readable JSON reports.
    #[arg(long, global = true)]
    pub json: bool,

    /// Tolerance override for the command's checks.
    #[arg(long, global = true, env = "LOOPWAVE_TOL")]
    pub tol: Option<f64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Loop,
    Filters,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Fir2,
    Grid,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check that a filter system is a QMF system.
    Verify {
        path: PathBuf,
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
    },
    /// Convert between filter files and loop files.
    Convert {
        path: PathBuf,
        #[arg(long, value_enum)]
        to: Target,
        /// Output file; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide irreducibility by searching for a monomial corner.
    Classify { path: PathBuf },
    /// Sample the scaling function and wavelets by the cascade algorithm.
    Cascade {
        path: PathBuf,
        /// Refinement levels J (grid step N^-J).
        #[arg(long = "iters", default_value_t = 8)]
        iters: u32,
        /// CSV output file; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the Cuntz relations on a truncated Fourier band.
    CuntzCheck {
        path: PathBuf,
        /// Input band [-K, K].
        #[arg(long, default_value_t = 8)]
        band: i64,
    },
    /// Compare two loops under the irreducibility criterion.
    Equiv { a: PathBuf, b: PathBuf },
    /// Complete a low-pass filter m_0 to a full QMF system.
    Complete {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Fir2)]
        mode: Mode,
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
        /// Output file; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Heuristic commutant dimension of the truncated representation.
    Commutant {
        path: PathBuf,
        #[arg(long, default_value_t = 8)]
        band: i64,
    },
    /// Write a seeded random paraunitary loop.
    Random {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        degree: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// A command failure with its exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    /// The input was read but a mathematical check failed (exit 1).
    Math(String),
    /// I/O, format or usage error (exit 2).
    Input(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Math(_) => 1,
            Failure::Input(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Math(m) | Failure::Input(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NotOnUnitCircle { .. }
            | Error::SizeMismatch { .. }
            | Error::InvalidScale(_)
            | Error::Fir2RequiresScaleTwo(_)
            | Error::InvalidGrid { .. }
            | Error::BandMismatch(_)
            | Error::InvalidBand(..)
            | Error::InvalidIndex { .. }
            | Error::OutsideInterior
            | Error::InvalidInput(_) => Failure::Input(e.to_string()),
            _ => Failure::Math(e.to_string()),
        }
    }
}

type CmdResult = Result<i32, Failure>;

/// Parses `std::env::args` and runs the command; returns the exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message());
            f.code()
        }
    }
}

pub fn run(cli: &Cli) -> CmdResult {
    if let Some(t) = cli.tol {
        if !(t.is_finite() && t > 0.0) {
            return Err(Failure::Input(format!(
                "tolerance must be positive and finite, got {t}"
            )));
        }
    }
    let tol = |default: f64| cli.tol.unwrap_or(default);
    match &cli.command {
        Command::Verify { path, grid } => cmd_verify(path, tol(ALGEBRA_TOL), *grid, cli.json),
        Command::Convert { path, to, out } => cmd_convert(path, *to, out.as_deref(), tol(ALGEBRA_TOL)),
        Command::Classify { path } => cmd_classify(path, tol(ALGEBRA_TOL), cli.json),
        Command::Cascade { path, iters, out } => cmd_cascade(path, *iters, out.as_deref(), tol(ALGEBRA_TOL), cli.json),
        Command::CuntzCheck { path, band } => cmd_cuntz_check(path, *band, tol(ALGEBRA_TOL), cli.json),
        Command::Equiv { a, b } => cmd_equiv(a, b, tol(ALGEBRA_TOL), cli.json),
        Command::Complete { path, mode, grid, out } => cmd_complete(path, *mode, *grid, out.as_deref(), cli.json),
        Command::Commutant { path, band } => cmd_commutant(path, *band, tol(GRID_TOL), cli.json),
        Command::Random { n, degree, seed, out } => cmd_random(*n, *degree, *seed, out.as_deref()),
    }
}

fn read(path: &Path) -> Result<InputFile, Failure> {
    format::read_input(path).map_err(Failure::Input)
}

fn filter_system(file: &InputFile, tol: f64) -> Result<FilterSystem, Failure> {
    match file {
        InputFile::Filters(f) => {
            let polys = f.polys(false).map_err(Failure::Input)?;
            Ok(FilterSystem::verified(polys, tol)?)
        }
        InputFile::Loop(_) => Ok(loop_to_filters(&certified_loop(file, tol)?)?),
    }
}

fn verified_filters(file: &InputFile, tol: f64) -> Result<FilterSystem, Failure> {
    let sys = filter_system(file, tol)?;
    if !sys.is_verified() {
        return Err(Failure::Math(format!(
            "filters do not form a QMF system at tolerance {tol:e}"
        )));
    }
    Ok(sys)
}

fn certified_loop(file: &InputFile, tol: f64) -> Result<Loop, Failure> {
    let a = match file {
        InputFile::Loop(l) => Loop::checked(l.matrix().map_err(Failure::Input)?, tol),
        InputFile::Filters(_) => Loop::checked(filters_to_loop(&filter_system(file, tol)?).into_mat(), tol),
    };
    if !a.is_certified() {
        let residual = a.mat().is_paraunitary(tol).residual;
        return Err(Failure::Math(format!(
            "loop is not paraunitary: residual {residual:e} exceeds {tol:e}"
        )));
    }
    Ok(a)
}

fn emit_text(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<(), Failure> {
    match out {
        Some(p) => format::write_json(value, p).map_err(Failure::Input),
        None => {
            print_json(value);
            Ok(())
        }
    }
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("report serializes"));
}

fn verdict_code(passed: bool) -> i32 {
    if passed {
        0
    } else {
        1
    }
}

fn pass_word(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

#[derive(Serialize)]
struct VerifyOutput {
    n: usize,
    tol: f64,
    grid: usize,
    #[serde(flatten)]
    report: crate::qmf::QmfReport,
}

fn cmd_verify(path: &Path, tol: f64, grid: usize, json: bool) -> CmdResult {
    let file = read(path)?;
    let sys = match &file {
        InputFile::Filters(f) => FilterSystem::new(f.polys(false).map_err(Failure::Input)?)?,
        InputFile::Loop(_) => filter_system(&file, tol)?,
    };
    let report = verify_qmf(&sys, tol, grid)?;
    let passed = report.passed;
    if json {
        print_json(&VerifyOutput {
            n: sys.n(),
            tol,
            grid,
            report,
        });
    } else {
        println!("{}: QMF system at scale {}", pass_word(passed), sys.n());
        println!("unitary residual   {:e}", report.unitary_residual);
        println!("scalar residual    {:e}", report.scalar_residual);
        println!("grid residual      {:e} ({grid} points)", report.grid_residual);
        println!("low-pass           {}", report.low_pass);
        println!("tolerance          {tol:e}");
    }
    Ok(verdict_code(passed))
}

fn cmd_convert(path: &Path, to: Target, out: Option<&Path>, tol: f64) -> CmdResult {
    let file = read(path)?;
    match (to, &file) {
        (Target::Loop, InputFile::Filters(_)) => {
            let a = certified_loop(&file, tol)?;
            emit_json(out, &LoopFileV1::from_matrix(a.mat()))?;
        }
        (Target::Filters, InputFile::Loop(_)) => {
            let m = loop_to_filters(&certified_loop(&file, tol)?)?;
            emit_json(out, &FilterFileV1::from_polys(m.filters()))?;
        }
        (Target::Loop, InputFile::Loop(_)) => return Err(Failure::Input("input is already a loop file".into())),
        (Target::Filters, InputFile::Filters(_)) => {
            return Err(Failure::Input("input is already a filter file".into()))
        }
    }
    if let Some(p) = out {
        eprintln!("wrote {}", p.display());
    }
    Ok(0)
}

fn cmd_classify(path: &Path, tol: f64, json: bool) -> CmdResult {
    let a = certified_loop(&read(path)?, tol)?;
    let verdict = classify(&a)?;
    if json {
        print_json(&verdict);
        return Ok(0);
    }
    println!("{:?}", verdict.status);
    if let Some(w) = &verdict.witness {
        println!("corner rank M = {} of N = {}", w.m, a.n());
        println!("exponents n_k = {:?}", w.exponents);
        println!("witness residual {:e}", w.residual);
        println!("basis vectors (columns):");
        print_matrix(&w.vectors);
        println!("V:");
        print_matrix(&w.v_matrix);
    }
    println!("note: {}", verdict.semantics_note);
    Ok(0)
}

fn print_matrix(m: &nalgebra::DMatrix<num_complex::Complex64>) {
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|j| format!("{:+.12}{:+.12}i", m[(i, j)].re, m[(i, j)].im))
            .collect();
        println!("  [{}]", row.join(", "));
    }
}

fn cmd_cascade(path: &Path, levels: u32, out: Option<&Path>, tol: f64, json: bool) -> CmdResult {
    let sys = verified_filters(&read(path)?, tol)?;
    let phi = cascade(sys.filter(0), sys.n(), levels)?;
    if !phi.converged {
        return Err(Error::CascadeNotConverged(phi.convergence_delta).into());
    }
    let psi = wavelets(&sys, &phi)?;
    let csv = format::cascade_csv(&phi, &psi);
    emit_text(out, &csv)?;
    if out.is_some() {
        let summary = CascadeSummary::from(&phi);
        if json {
            print_json(&summary);
        } else {
            println!(
                "scale {} level {}: support [{}, {}], integral {}, {} rows",
                summary.n,
                summary.level,
                summary.support.0,
                summary.support.1,
                summary.integral,
                csv.lines().count() - 1
            );
        }
    }
    Ok(0)
}

#[derive(Serialize)]
struct CuntzOutput {
    passed: bool,
    tol: f64,
    #[serde(flatten)]
    report: crate::cuntz_rep::CuntzReport,
}

fn cmd_cuntz_check(path: &Path, band: i64, tol: f64, json: bool) -> CmdResult {
    let sys = verified_filters(&read(path)?, tol)?;
    let rep = build_rep(&sys, Band::symmetric(band)?)?;
    let report = verify_cuntz(&rep);
    let passed = report.isometry_residual <= tol && report.completeness_residual <= tol && report.interior.is_some();
    if json {
        print_json(&CuntzOutput { passed, tol, report });
    } else {
        println!("{}: Cuntz relations at scale {}", pass_word(passed), sys.n());
        println!(
            "input band         [{}, {}]",
            report.in_band.k_min, report.in_band.k_max
        );
        println!(
            "output band        [{}, {}]",
            report.out_band.k_min, report.out_band.k_max
        );
        match report.interior {
            Some(b) => println!("interior band      [{}, {}]", b.k_min, b.k_max),
            None => println!("interior band      empty"),
        }
        println!("isometry residual  {:e}", report.isometry_residual);
        println!("completeness       {:e}", report.completeness_residual);
    }
    Ok(verdict_code(passed))
}

#[derive(Serialize)]
struct EquivOutput {
    result: crate::irreducibility::Equivalence,
    tol: f64,
}

fn cmd_equiv(a: &Path, b: &Path, tol: f64, json: bool) -> CmdResult {
    let la = certified_loop(&read(a)?, tol)?;
    let lb = certified_loop(&read(b)?, tol)?;
    let result = equivalent(&la, &lb, tol)?;
    if json {
        print_json(&EquivOutput { result, tol });
    } else {
        println!("{result:?}");
    }
    Ok(0)
}

fn cmd_complete(path: &Path, mode: Mode, grid: usize, out: Option<&Path>, json: bool) -> CmdResult {
    let (n, m0) = match read(path)? {
        InputFile::Filters(f) => {
            let polys = f.polys(true).map_err(Failure::Input)?;
            (f.n, polys.into_iter().next().expect("at least one record"))
        }
        InputFile::Loop(_) => return Err(Failure::Input("complete expects a filter file holding m_0".into())),
    };
    let mode = match mode {
        Mode::Fir2 => CompletionMode::Fir2,
        Mode::Grid => CompletionMode::Grid,
    };
    match complete(&m0, n, mode, grid)? {
        Completion::Fir(sys) => {
            let file = FilterFileV1::from_polys(sys.filters());
            emit_json(out, &file)?;
        }
        Completion::Sampled(s) => {
            let c = |z: &num_complex::Complex64| [z.re, z.im];
            let file = SampledFileV1 {
                version: format::FORMAT_VERSION,
                n: s.n,
                grid: s.points.len(),
                max_unitarity_residual: s.max_unitarity_residual,
                points: s.points.iter().map(c).collect(),
                loop_values: s
                    .loop_values
                    .iter()
                    .map(|a| (0..s.n).map(|i| (0..s.n).map(|j| c(&a[(i, j)])).collect()).collect())
                    .collect(),
            };
            emit_json(out, &file)?;
        }
    }
    if let Some(p) = out {
        if json {
            print_json(&serde_json::json!({ "written": p.display().to_string() }));
        } else {
            println!("wrote {}", p.display());
        }
    }
    Ok(0)
}

fn cmd_commutant(path: &Path, band: i64, tol: f64, json: bool) -> CmdResult {
    let sys = verified_filters(&read(path)?, ALGEBRA_TOL)?;
    let rep = build_rep(&sys, Band::symmetric(band)?)?;
    let report = commutant_diagnostic(&rep, tol)?;
    if json {
        print_json(&report);
    } else {
        println!("approximate commutant dimension {}", report.approximate_dimension);
        println!(
            "band [{}, {}], tolerance {:e}",
            report.band.k_min, report.band.k_max, report.tol
        );
        // values at rounding level are printed as 0 to keep the text stable
        let sv: Vec<String> = report
            .smallest_singular_values
            .iter()
            .map(|&s| if s < 1e-13 { "0".to_string() } else { format!("{s:.3e}") })
            .collect();
        println!("smallest singular values {}", sv.join(" "));
        println!("note: {}", report.note);
    }
    Ok(0)
}

fn cmd_random(n: usize, degree: usize, seed: u64, out: Option<&Path>) -> CmdResult {
    let a = random_paraunitary(n, degree, seed)?;
    emit_json(out, &LoopFileV1::from_matrix(a.mat()))?;
    Ok(0)
}
