//! Matrix models of the weighted shifts `S_i f = sqrt(N) m_i · (f ∘ σ)`,
//! `σ(z) = z^N`, on band-limited Fourier coefficient spaces.
//!
//! With `m_i = Σ_t c_{i,t} z^t`, `S_i e_k = sqrt(N) Σ_t c_{i,t} e_{Nk+t}`.
//! The output band is chosen so that nothing is lost going forward, which
//! makes `S_i* S_j = δ_ij I` exact on the whole input band. The relation
//! `Σ S_i S_i* = I` holds exactly on the interior rows: those output
//! indices `p` for which every `k` with `p - Nk` in the filter support
//! lies in the input band.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::laurent::{LaurentPoly, MatrixLaurent};
use crate::loopgroup::{complex_gaussian, fiber_sum, FilterSystem};

/// Tolerance below which the truncated operator product must match the
/// multiplication operator of its symbol.
pub const SYMBOL_TOL: f64 = 1e-9;

/// Inclusive range of Fourier indices `[k_min, k_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Band {
    pub k_min: i64,
    pub k_max: i64,
}

impl Band {
    pub fn new(k_min: i64, k_max: i64) -> Result<Self> {
        if k_min > k_max {
            return Err(Error::InvalidBand(k_min, k_max));
        }
        Ok(Self { k_min, k_max })
    }

    /// `[-k, k]`.
    pub fn symmetric(k: i64) -> Result<Self> {
        Self::new(-k, k)
    }

    pub fn len(&self) -> usize {
        (self.k_max - self.k_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, k: i64) -> bool {
        (self.k_min..=self.k_max).contains(&k)
    }

    /// Position of index `k` in coefficient vectors over this band.
    pub fn position(&self, k: i64) -> Option<usize> {
        self.contains(k).then(|| (k - self.k_min) as usize)
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> {
        self.k_min..=self.k_max
    }

    fn intersect(&self, other: &Band) -> Option<Band> {
        let lo = self.k_min.max(other.k_min);
        let hi = self.k_max.min(other.k_max);
        (lo <= hi).then_some(Band { k_min: lo, k_max: hi })
    }
}

#[derive(Clone, Debug)]
pub struct TruncatedRep {
    n: usize,
    filters: FilterSystem,
    in_band: Band,
    out_band: Band,
    ops: Vec<DMatrix<Complex64>>,
}

impl TruncatedRep {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn filters(&self) -> &FilterSystem {
        &self.filters
    }

    pub fn in_band(&self) -> Band {
        self.in_band
    }

    pub fn out_band(&self) -> Band {
        self.out_band
    }

    /// `S_i` as an `out × in` matrix.
    pub fn op(&self, i: usize) -> &DMatrix<Complex64> {
        &self.ops[i]
    }

    pub fn ops(&self) -> &[DMatrix<Complex64>] {
        &self.ops
    }

    /// Output indices on which `Σ S_i S_i* = I` is exact, if any.
    pub fn interior(&self) -> Option<Band> {
        let (t_min, t_max) = self.filters.support()?;
        let n = self.n as i64;
        let lo = n * (self.in_band.k_min - 1) + t_max + 1;
        let hi = n * (self.in_band.k_max + 1) + t_min - 1;
        if lo > hi {
            return None;
        }
        Band { k_min: lo, k_max: hi }.intersect(&self.out_band)
    }
}

/// Builds `S_0, ..., S_{N-1}` on `in_band` with the minimal lossless
/// output band.
pub fn build_rep(m: &FilterSystem, in_band: Band) -> Result<TruncatedRep> {
    if !m.is_verified() {
        return Err(Error::UnverifiedFilters);
    }
    let n = m.n();
    let (t_min, t_max) = m.support().ok_or(Error::UnverifiedFilters)?;
    let n_i = n as i64;
    let out_band = Band {
        k_min: n_i * in_band.k_min + t_min,
        k_max: n_i * in_band.k_max + t_max,
    };
    let sqrt_n = (n as f64).sqrt();
    let ops = m
        .filters()
        .iter()
        .map(|f| {
            let mut s = DMatrix::zeros(out_band.len(), in_band.len());
            for (col, k) in in_band.indices().enumerate() {
                for (t, c) in f.terms() {
                    let row = out_band.position(n_i * k + t).expect("lossless output band");
                    s[(row, col)] = c * sqrt_n;
                }
            }
            s
        })
        .collect();
    Ok(TruncatedRep {
        n,
        filters: m.clone(),
        in_band,
        out_band,
        ops,
    })
}

/// `(S_i* f)_k = sqrt(N) Σ_t conj(c_{i,t}) f_{Nk+t}` for `f` on the output band.
pub fn adjoint_apply(rep: &TruncatedRep, i: usize, f: &[Complex64]) -> Result<Vec<Complex64>> {
    if i >= rep.n {
        return Err(Error::InvalidIndex { index: i, n: rep.n });
    }
    if f.len() != rep.out_band.len() {
        return Err(Error::BandMismatch(format!(
            "vector of length {} on output band of length {}",
            f.len(),
            rep.out_band.len()
        )));
    }
    let n = rep.n as i64;
    let sqrt_n = (rep.n as f64).sqrt();
    let filter = rep.filters.filter(i);
    Ok(rep
        .in_band
        .indices()
        .map(|k| {
            filter
                .terms()
                .filter_map(|(t, c)| rep.out_band.position(n * k + t).map(|p| c.conj() * f[p]))
                .sum::<Complex64>()
                * sqrt_n
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CuntzReport {
    /// `max_{i,j} ‖S_i* S_j - δ_ij I‖_max` on the input band.
    pub isometry_residual: f64,
    /// `‖Σ_i S_i S_i* - I‖_max` over interior rows; 0 when there are none.
    pub completeness_residual: f64,
    pub in_band: Band,
    pub out_band: Band,
    pub interior: Option<Band>,
}

fn max_entry(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

pub fn verify_cuntz(rep: &TruncatedRep) -> CuntzReport {
    let dim = rep.in_band.len();
    let eye = DMatrix::<Complex64>::identity(dim, dim);
    let mut isometry_residual = 0.0f64;
    for (i, si) in rep.ops.iter().enumerate() {
        for (j, sj) in rep.ops.iter().enumerate() {
            let prod = si.adjoint() * sj;
            let d = if i == j { prod - &eye } else { prod };
            isometry_residual = isometry_residual.max(max_entry(&d));
        }
    }
    let interior = rep.interior();
    let completeness_residual = match interior {
        None => 0.0,
        Some(band) => {
            let out = rep.out_band.len();
            let mut sum = DMatrix::<Complex64>::zeros(out, out);
            for s in &rep.ops {
                sum += s * s.adjoint();
            }
            let mut worst = 0.0f64;
            for p in band.indices() {
                let row = rep.out_band.position(p).expect("interior inside output band");
                for col in 0..out {
                    let expect = if col == row { 1.0 } else { 0.0 };
                    worst = worst.max((sum[(row, col)] - expect).norm());
                }
            }
            worst
        }
    };
    CuntzReport {
        isometry_residual,
        completeness_residual,
        in_band: rep.in_band,
        out_band: rep.out_band,
        interior,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Reconstruction {
    /// `Σ_i S_i S_i* f` on the output band.
    pub value: Vec<Complex64>,
    /// `max_p |value_p - f_p|`.
    pub residual: f64,
}

/// `f = Σ_i S_i S_i* f = Σ_i m_i · (k_i ∘ σ)` with `k_i = sqrt(N) S_i* f`.
pub fn reconstruct(rep: &TruncatedRep, f: &[Complex64]) -> Result<Reconstruction> {
    if f.len() != rep.out_band.len() {
        return Err(Error::BandMismatch(format!(
            "vector of length {} on output band of length {}",
            f.len(),
            rep.out_band.len()
        )));
    }
    let interior = rep.interior();
    for (p, v) in rep.out_band.indices().zip(f) {
        let inside = interior.is_some_and(|b| b.contains(p));
        if !inside && v.norm() != 0.0 {
            return Err(Error::OutsideInterior);
        }
    }
    let mut value = DVector::<Complex64>::zeros(f.len());
    for i in 0..rep.n {
        let k = DVector::from_vec(adjoint_apply(rep, i, f)?);
        value += &rep.ops[i] * k;
    }
    let residual = value.iter().zip(f).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    Ok(Reconstruction {
        value: value.as_slice().to_vec(),
        residual,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransitionSymbols {
    /// Entry `(i, j)` is the symbol of `S_i^{(n)*} S_j^{(m)}`:
    /// `Σ_{y^N = x} conj(n_i(y)) m_j(y)`.
    pub symbols: MatrixLaurent,
    /// Largest deviation between the truncated product and the
    /// multiplication matrix of its symbol on the input band.
    pub agreement_residual: f64,
}

/// Symbols of the operators `S_i^{(n)*} S_j^{(m)}`, cross-checked against
/// the truncated matrices.
pub fn transition_operator_matrix(rep_n: &TruncatedRep, rep_m: &TruncatedRep) -> Result<TransitionSymbols> {
    if rep_n.n != rep_m.n {
        return Err(Error::SizeMismatch {
            expected: rep_n.n,
            found: rep_m.n,
        });
    }
    if rep_n.in_band != rep_m.in_band {
        return Err(Error::BandMismatch("input bands differ".into()));
    }
    let n = rep_n.n;
    let symbols = MatrixLaurent::from_fn(n, |i, j| {
        fiber_sum(&(&rep_n.filters.filter(i).star() * rep_m.filters.filter(j)), n)
    });

    let band = rep_n.in_band;
    let common = rep_n.out_band.intersect(&rep_m.out_band);
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let sym = symbols.get(i, j);
            for (r, k1) in band.indices().enumerate() {
                for (c, k2) in band.indices().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    if let Some(common) = common {
                        for p in common.indices() {
                            let a = rep_n.ops[i][(rep_n.out_band.position(p).unwrap(), r)];
                            let b = rep_m.ops[j][(rep_m.out_band.position(p).unwrap(), c)];
                            acc += a.conj() * b;
                        }
                    }
                    worst = worst.max((acc - sym.coeff(k1 - k2)).norm());
                }
            }
        }
    }
    if worst > SYMBOL_TOL {
        return Err(Error::SymbolMismatch(worst));
    }
    Ok(TransitionSymbols {
        symbols,
        agreement_residual: worst,
    })
}

/// Compression of `S_i` to `band × band`, built from the filter taps.
fn compress(filter: &LaurentPoly, n: usize, band: Band) -> DMatrix<Complex64> {
    let sqrt_n = (n as f64).sqrt();
    let n = n as i64;
    let mut s = DMatrix::zeros(band.len(), band.len());
    for (col, k) in band.indices().enumerate() {
        for (t, c) in filter.terms() {
            if let Some(row) = band.position(n * k + t) {
                s[(row, col)] = c * sqrt_n;
            }
        }
    }
    s
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommutantReport {
    /// Number of singular values of the commutation constraint at or below
    /// `tol`. Heuristic: edge effects of the truncation can inflate it.
    pub approximate_dimension: usize,
    /// Smallest singular values, ascending (at most 16).
    pub smallest_singular_values: Vec<f64>,
    pub band: Band,
    pub tol: f64,
    pub note: &'static str,
}

const COMMUTANT_SEED: u64 = 0x5eed;

/// Relative gap below which eigenvalues of the probe `H` are merged.
const EIGEN_CLUSTER_TOL: f64 = 1e-8;

pub const COMMUTANT_NOTE: &str =
    "heuristic: dimension of the joint commutant of the band compressions of S_i and S_i*; \
     truncation edge effects may inflate it, and it does not decide irreducibility";

/// Approximate commutant dimension of the compressed representation.
///
/// Solves `X T_i = T_i X`, `X T_i* = T_i* X` for `X` on the input band,
/// where `T_i` is the compression of `S_i` to that band. Every solution
/// commutes with the self-adjoint `H = Σ_i (α_i T_i + conj(α_i) T_i*)` for
/// seeded random `α_i`, so `X` is block diagonal over the eigenspaces of
/// `H`; the constraint map is restricted to that block space (orthonormal
/// in the Frobenius norm) and its singular values are reported.
pub fn commutant_diagnostic(rep: &TruncatedRep, tol: f64) -> Result<CommutantReport> {
    if rep.interior().is_none() {
        return Err(Error::InvalidBand(rep.in_band.k_min, rep.in_band.k_max));
    }
    let band = rep.in_band;
    let d = band.len();
    let mut rng = ChaCha8Rng::seed_from_u64(COMMUTANT_SEED);
    let mut gens: Vec<DMatrix<Complex64>> = Vec::with_capacity(2 * rep.n);
    let mut h = DMatrix::<Complex64>::zeros(d, d);
    for f in rep.filters.filters() {
        let t = compress(f, rep.n, band);
        let alpha = complex_gaussian(&mut rng);
        h += &t * alpha + t.adjoint() * alpha.conj();
        gens.push(t.adjoint());
        gens.push(t);
    }

    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let scale = eig.eigenvalues.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for &k in &order {
        let lam = eig.eigenvalues[k];
        match clusters.last_mut() {
            Some(c) if lam - last <= EIGEN_CLUSTER_TOL * scale => c.push(k),
            _ => clusters.push(vec![k]),
        }
        last = lam;
    }

    // basis X = q_a q_b* within each cluster; [X, T] = q_a (q_b* T) - (T q_a) q_b*
    let q = &eig.eigenvectors;
    let rows = gens.len() * d * d;
    let unknowns: Vec<(usize, usize)> = clusters
        .iter()
        .flat_map(|c| c.iter().flat_map(move |&a| c.iter().map(move |&b| (a, b))))
        .collect();
    let mut constraint = DMatrix::<Complex64>::zeros(rows.max(unknowns.len()), unknowns.len());
    for (col, &(a, b)) in unknowns.iter().enumerate() {
        let qa = q.column(a);
        let qb = q.column(b);
        for (g, t) in gens.iter().enumerate() {
            let left = qb.adjoint() * t;
            let right = t * qa;
            for j in 0..d {
                for i in 0..d {
                    constraint[(g * d * d + j * d + i, col)] = qa[i] * left[j] - right[i] * qb[j].conj();
                }
            }
        }
    }
    let mut sv: Vec<f64> = constraint.singular_values().iter().copied().collect();
    sv.truncate(unknowns.len());
    sv.sort_by(f64::total_cmp);
    let approximate_dimension = sv.iter().take_while(|&&s| s <= tol).count();
    sv.truncate(16);
    Ok(CommutantReport {
        approximate_dimension,
        smallest_singular_values: sv,
        band,
        tol,
        note: COMMUTANT_NOTE,
    })
}
