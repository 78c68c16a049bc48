//! Shared helpers for the CLI golden suite.
//!
//! Set `UPDATE_GOLDEN=1` to rewrite the files under `tests/golden/`.

#![allow(dead_code)]

pub mod oracle;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn fixture(name: &str) -> PathBuf {
    manifest_dir().join("tests/fixtures").join(name)
}

/// Runs the binary from the crate root with a clean tolerance environment.
pub fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_loopwave"))
        .args(args)
        .current_dir(manifest_dir())
        .env_remove("LOOPWAVE_TOL")
        .output()
        .expect("spawn loopwave")
}

pub struct GoldenCase {
    pub name: &'static str,
    /// `{out}` is replaced by a temporary output path; the golden file then
    /// holds the written file instead of stdout.
    pub args: &'static [&'static str],
    pub code: i32,
}

const fn case(name: &'static str, args: &'static [&'static str], code: i32) -> GoldenCase {
    GoldenCase { name, args, code }
}

pub const GOLDEN_CASES: &[GoldenCase] = &[
    case("verify-haar", &["verify", "tests/fixtures/haar.json"], 0),
    case("verify-haar-json", &["--json", "verify", "tests/fixtures/haar.json"], 0),
    case("verify-d4", &["verify", "tests/fixtures/d4.json", "--grid", "64"], 0),
    case("verify-scaled-haar", &["verify", "tests/fixtures/scaled-haar.json"], 1),
    case("verify-missing", &["verify", "tests/fixtures/missing.json"], 2),
    case("verify-malformed", &["verify", "tests/fixtures/malformed.json"], 2),
    case("verify-wrong-count", &["verify", "tests/fixtures/wrong-count.json"], 2),
    case(
        "convert-haar-to-loop",
        &["convert", "tests/fixtures/haar.json", "--to", "loop", "--out", "{out}"],
        0,
    ),
    case(
        "convert-identity-to-filters",
        &[
            "convert",
            "tests/fixtures/identity-loop.json",
            "--to",
            "filters",
            "--out",
            "{out}",
        ],
        0,
    ),
    case(
        "convert-d4-to-loop",
        &["convert", "tests/fixtures/d4.json", "--to", "loop"],
        0,
    ),
    case(
        "convert-not-paraunitary",
        &["convert", "tests/fixtures/not-paraunitary-loop.json", "--to", "filters"],
        1,
    ),
    case(
        "convert-same-kind",
        &["convert", "tests/fixtures/haar.json", "--to", "filters"],
        2,
    ),
    case(
        "classify-identity",
        &["classify", "tests/fixtures/identity-loop.json"],
        0,
    ),
    case(
        "classify-identity-3-json",
        &["--json", "classify", "tests/fixtures/identity-loop-3.json"],
        0,
    ),
    case(
        "classify-diag-z2-z5-json",
        &["--json", "classify", "tests/fixtures/diag-z2-z5.json"],
        0,
    ),
    case("classify-d4-json", &["--json", "classify", "tests/fixtures/d4.json"], 0),
    case(
        "classify-not-paraunitary",
        &["classify", "tests/fixtures/not-paraunitary-loop.json"],
        1,
    ),
    case("classify-malformed", &["classify", "tests/fixtures/malformed.json"], 2),
    case(
        "cascade-haar-j6",
        &["cascade", "tests/fixtures/haar.json", "--iters", "6"],
        0,
    ),
    case(
        "cascade-haar-j0",
        &["cascade", "tests/fixtures/haar.json", "--iters", "0"],
        0,
    ),
    case(
        "cascade-d4-j4",
        &["cascade", "tests/fixtures/d4.json", "--iters", "4", "--out", "{out}"],
        0,
    ),
    case(
        "cascade-not-low-pass",
        &["cascade", "tests/fixtures/haar-swapped.json", "--iters", "3"],
        1,
    ),
    case("cascade-not-qmf", &["cascade", "tests/fixtures/scaled-haar.json"], 1),
    case(
        "cuntz-check-haar",
        &["cuntz-check", "tests/fixtures/haar.json", "--band", "8"],
        0,
    ),
    case(
        "cuntz-check-d4-json",
        &["--json", "cuntz-check", "tests/fixtures/d4.json", "--band", "4"],
        0,
    ),
    case(
        "cuntz-check-not-qmf",
        &["cuntz-check", "tests/fixtures/scaled-haar.json"],
        1,
    ),
    case(
        "equiv-haar-haar",
        &["equiv", "tests/fixtures/haar.json", "tests/fixtures/haar.json"],
        0,
    ),
    case(
        "equiv-identity-haar",
        &["equiv", "tests/fixtures/identity-loop.json", "tests/fixtures/haar.json"],
        0,
    ),
    case(
        "equiv-haar-d4-json",
        &["--json", "equiv", "tests/fixtures/haar.json", "tests/fixtures/d4.json"],
        0,
    ),
    case(
        "equiv-size-mismatch",
        &[
            "equiv",
            "tests/fixtures/haar.json",
            "tests/fixtures/identity-loop-3.json",
        ],
        2,
    ),
    case(
        "complete-haar-m0-fir2",
        &[
            "complete",
            "tests/fixtures/haar-m0.json",
            "--mode",
            "fir2",
            "--out",
            "{out}",
        ],
        0,
    ),
    case(
        "complete-d4-m0-fir2",
        &["complete", "tests/fixtures/d4-m0.json", "--mode", "fir2"],
        0,
    ),
    case(
        "complete-haar-m0-grid",
        &[
            "complete",
            "tests/fixtures/haar-m0.json",
            "--mode",
            "grid",
            "--grid",
            "4",
        ],
        0,
    ),
    case(
        "complete-scaled-haar",
        &["complete", "tests/fixtures/scaled-haar.json"],
        1,
    ),
    case(
        "commutant-haar",
        &["commutant", "tests/fixtures/haar.json", "--band", "4"],
        0,
    ),
    case(
        "commutant-identity-json",
        &[
            "--json",
            "commutant",
            "tests/fixtures/identity-loop.json",
            "--band",
            "4",
        ],
        0,
    ),
    case(
        "random-n2-d2-s7",
        &["random", "--n", "2", "--degree", "2", "--seed", "7", "--out", "{out}"],
        0,
    ),
];

fn golden_path(name: &str) -> PathBuf {
    manifest_dir().join("tests/golden").join(format!("{name}.out"))
}

/// Compares `actual` with the stored golden file, or rewrites it when
/// `UPDATE_GOLDEN` is set.
pub fn check_golden(name: &str, actual: &str) -> Result<(), String> {
    let path = golden_path(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).map_err(|e| format!("{}: {e}", path.display()))?;
        return Ok(());
    }
    let expected = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if expected != actual {
        return Err(format!(
            "{name}: output differs from {}\n--- expected\n{expected}\n--- actual\n{actual}",
            path.display()
        ));
    }
    Ok(())
}

/// Runs one golden case; the error explains the first mismatch.
pub fn run_case(c: &GoldenCase, scratch: &Path) -> Result<(), String> {
    let out_path = scratch.join(format!("{}.out", c.name));
    let out_str = out_path.to_str().expect("utf-8 temp path").to_string();
    let args: Vec<String> = c.args.iter().map(|a| a.replace("{out}", &out_str)).collect();
    let argv: Vec<&str> = args.iter().map(String::as_str).collect();
    let output = run(&argv);
    let code = output.status.code().unwrap_or(-1);
    if code != c.code {
        return Err(format!(
            "{}: exit code {code}, expected {}; stderr: {}",
            c.name,
            c.code,
            String::from_utf8_lossy(&output.stderr)
        ));
    }
    if c.code != 0 && output.stderr.is_empty() && output.stdout.is_empty() {
        return Err(format!("{}: failing command printed no diagnostic", c.name));
    }
    let actual = if c.args.contains(&"{out}") {
        std::fs::read_to_string(&out_path).map_err(|e| format!("{}: {e}", c.name))?
    } else {
        let mut text = String::from_utf8(output.stdout).map_err(|e| format!("{}: {e}", c.name))?;
        if !output.stderr.is_empty() {
            text.push_str("--- stderr\n");
            text.push_str(&String::from_utf8_lossy(&output.stderr));
        }
        text
    };
    check_golden(c.name, &actual)
}

/// Runs every golden case and returns the failures.
pub fn run_golden_suite() -> Vec<String> {
    let scratch = tempfile::tempdir().expect("tempdir");
    GOLDEN_CASES
        .iter()
        .filter_map(|c| run_case(c, scratch.path()).err())
        .collect()
}
