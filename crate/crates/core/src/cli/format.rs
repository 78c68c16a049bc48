//! Versioned JSON file formats and CSV emission.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::laurent::{LaurentPoly, MatrixLaurent};
use crate::wavelet::{ScalingFunctionSamples, WaveletSamples};

pub const FORMAT_VERSION: u32 = 1;

/// A Laurent polynomial as stored on disk: `Σ_k coeffs[k] z^{offset + k}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyRecord {
    pub offset: i64,
    pub coeffs: Vec<[f64; 2]>,
}

impl PolyRecord {
    pub fn from_poly(p: &LaurentPoly) -> Self {
        Self {
            offset: p.offset(),
            coeffs: p.coeffs().iter().map(|c| [c.re + 0.0, c.im + 0.0]).collect(),
        }
    }

    pub fn to_poly(&self, what: &str) -> Result<LaurentPoly, String> {
        if let Some(bad) = self.coeffs.iter().flatten().find(|v| !v.is_finite()) {
            return Err(format!("{what}: non-finite coefficient {bad}"));
        }
        let coeffs = self.coeffs.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        Ok(LaurentPoly::new(self.offset, coeffs))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterFileV1 {
    pub version: u32,
    pub n: usize,
    pub filters: Vec<PolyRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopFileV1 {
    pub version: u32,
    pub n: usize,
    pub entries: Vec<Vec<PolyRecord>>,
}

/// Any of the input files the commands accept.
#[derive(Clone, Debug, PartialEq)]
pub enum InputFile {
    Filters(FilterFileV1),
    Loop(LoopFileV1),
}

impl FilterFileV1 {
    pub fn from_polys(polys: &[LaurentPoly]) -> Self {
        Self {
            version: FORMAT_VERSION,
            n: polys.len(),
            filters: polys.iter().map(PolyRecord::from_poly).collect(),
        }
    }

    /// The filters, with exactly `n` records required unless `partial`
    /// (then one record, `m_0`, is enough).
    pub fn polys(&self, partial: bool) -> Result<Vec<LaurentPoly>, String> {
        check_version(self.version)?;
        if self.n < 2 {
            return Err(format!("scale n must be at least 2, got {}", self.n));
        }
        let count = self.filters.len();
        let ok = count == self.n || (partial && (1..=self.n).contains(&count));
        if !ok {
            return Err(format!("expected {} filter records, found {count}", self.n));
        }
        self.filters
            .iter()
            .enumerate()
            .map(|(i, r)| r.to_poly(&format!("filter {i}")))
            .collect()
    }
}

impl LoopFileV1 {
    pub fn from_matrix(m: &MatrixLaurent) -> Self {
        let n = m.n();
        Self {
            version: FORMAT_VERSION,
            n,
            entries: (0..n)
                .map(|i| (0..n).map(|j| PolyRecord::from_poly(m.get(i, j))).collect())
                .collect(),
        }
    }

    pub fn matrix(&self) -> Result<MatrixLaurent, String> {
        check_version(self.version)?;
        if self.n == 0 {
            return Err("loop size n must be positive".into());
        }
        if self.entries.len() != self.n || self.entries.iter().any(|row| row.len() != self.n) {
            return Err(format!("entries must form a {0}x{0} grid", self.n));
        }
        let mut polys = Vec::with_capacity(self.n * self.n);
        for (i, row) in self.entries.iter().enumerate() {
            for (j, r) in row.iter().enumerate() {
                polys.push(r.to_poly(&format!("entry ({i},{j})"))?);
            }
        }
        MatrixLaurent::new(self.n, polys).map_err(|e| e.to_string())
    }
}

fn check_version(v: u32) -> Result<(), String> {
    if v != FORMAT_VERSION {
        return Err(format!("unsupported format version {v}"));
    }
    Ok(())
}

pub fn parse_input(text: &str) -> Result<InputFile, String> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| format!("malformed JSON: {e}"))?;
    let obj = value.as_object().ok_or("top-level JSON value must be an object")?;
    let kind = (obj.contains_key("filters"), obj.contains_key("entries"));
    match kind {
        (true, false) => serde_json::from_value(value)
            .map(InputFile::Filters)
            .map_err(|e| format!("invalid filter file: {e}")),
        (false, true) => serde_json::from_value(value)
            .map(InputFile::Loop)
            .map_err(|e| format!("invalid loop file: {e}")),
        _ => Err("expected exactly one of the keys \"filters\" or \"entries\"".into()),
    }
}

pub fn read_input(path: &Path) -> Result<InputFile, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_input(&text).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), String> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| e.to_string())?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

/// Sampled completion as written by `complete --mode grid`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampledFileV1 {
    pub version: u32,
    pub n: usize,
    pub grid: usize,
    pub max_unitarity_residual: f64,
    /// Base points `exp(2πi g / grid)` as `[re, im]`.
    pub points: Vec<[f64; 2]>,
    /// Loop values `A(x_g)`, row-major `n × n` per point.
    pub loop_values: Vec<Vec<Vec<[f64; 2]>>>,
}

/// Shortest round-trip form, in exponent notation for tiny or huge values.
pub fn number(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{}", v + 0.0)
    } else {
        format!("{v:e}")
    }
}

/// Rows on `φ`'s grid covering the supports of `φ` and every `ψ_i`; `ψ_i`
/// (one level finer) is sampled at every `N`-th point. Imaginary parts get
/// their own `_im` column when any exceeds `1e-12`.
pub fn cascade_csv(phi: &ScalingFunctionSamples, psi: &WaveletSamples) -> String {
    let s = &phi.samples;
    let n = s.n as i64;
    let mut lo = s.first_index;
    let mut hi = s.last_index();
    for g in &psi.generators {
        lo = lo.min(g.first_index.div_euclid(n) + i64::from(g.first_index.rem_euclid(n) != 0));
        hi = hi.max(g.last_index().div_euclid(n));
    }
    let mut columns: Vec<(String, Vec<Complex64>)> = vec![("phi".into(), (lo..=hi).map(|j| s.at(j)).collect())];
    for (i, g) in psi.generators.iter().enumerate() {
        columns.push((format!("psi_{}", i + 1), (lo..=hi).map(|j| g.at(j * n)).collect()));
    }

    let mut header = vec!["x".to_string()];
    let mut with_im = Vec::new();
    for (name, vals) in &columns {
        header.push(name.clone());
        let im = vals.iter().any(|v| v.im.abs() > 1e-12);
        if im {
            header.push(format!("{name}_im"));
        }
        with_im.push(im);
    }
    let mut out = header.join(",");
    out.push('\n');
    for (r, j) in (lo..=hi).enumerate() {
        out.push_str(&number(s.x(j)));
        for ((_, vals), &im) in columns.iter().zip(&with_im) {
            out.push(',');
            out.push_str(&number(vals[r].re));
            if im {
                out.push(',');
                out.push_str(&number(vals[r].im));
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn input_kind_is_detected() {
        let f = r#"{"version":1,"n":2,"filters":[{"offset":0,"coeffs":[[0.5,0],[0.5,0]]},{"offset":0,"coeffs":[[0.5,0],[-0.5,0]]}]}"#;
        assert!(matches!(parse_input(f), Ok(InputFile::Filters(_))));
        let l = r#"{"version":1,"n":1,"entries":[[{"offset":0,"coeffs":[[1,0]]}]]}"#;
        assert!(matches!(parse_input(l), Ok(InputFile::Loop(_))));
        assert!(parse_input("{\"version\":1}").is_err());
        assert!(parse_input("[1,2").is_err());
    }

    #[test]
    fn record_counts_are_enforced() {
        let f = FilterFileV1::from_polys(&[LaurentPoly::one()]);
        let wide = FilterFileV1 { n: 2, ..f };
        assert!(wide.polys(false).is_err());
        assert_eq!(wide.polys(true).unwrap().len(), 1);
        let bad_version = FilterFileV1 { version: 2, ..wide };
        assert!(bad_version.polys(true).is_err());
    }

    #[test]
    fn loop_grid_must_be_square() {
        let m = MatrixLaurent::identity(2);
        let mut file = LoopFileV1::from_matrix(&m);
        assert_eq!(file.matrix().unwrap(), m);
        file.entries[1].pop();
        assert!(file.matrix().is_err());
    }
}
