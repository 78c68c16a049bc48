//! Irreducibility of the representation attached to a loop, decided by
//! searching for a monomial corner `V · diag(z^{n_0}, ..., z^{n_{M-1}})`,
//! `n_k ≥ 0`.
//!
//! A corner is read as a constant subspace `S ⊆ C^N` with an orthonormal
//! basis `v_k` such that `A(z) v_k = z^{n_k} Σ_j V[j,k] v_j`. Each such
//! `v_k` lies in the graded kernel `K_{n_k} = ∩_{c ≠ n_k} ker A_c`, and `S`
//! is mapped onto itself by `Φ`, the map acting as `A_n` on `K_n`. The
//! largest such `S` is found by shrinking `⊕_{n ≥ 0} K_n` until it is
//! `Φ`-invariant.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::loopgroup::Loop;

/// Singular values at or below `RANK_TOL · max(1, σ_max)` count as zero.
pub const RANK_TOL: f64 = 1e-10;

/// Coefficient-level tolerance for witness self-verification.
pub const WITNESS_TOL: f64 = 1e-10;

pub const SEMANTICS_NOTE: &str =
    "corner = constant subspace S with orthonormal basis v_k, v_k in the graded kernel K_{n_k} (n_k >= 0), \
     such that A(z) v_k = z^{n_k} sum_j V[j,k] v_j; Irreducible means no nonzero such S exists";

/// Orthonormal basis (as columns) of the null space of `m`.
pub fn null_space(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let cols = m.ncols();
    if cols == 0 {
        return DMatrix::zeros(0, 0);
    }
    // pad to at least square so that V is complete
    let rows = m.nrows().max(cols);
    let mut padded = DMatrix::<Complex64>::zeros(rows, cols);
    padded.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let sigma = &svd.singular_values;
    let smax = sigma.iter().copied().fold(0.0, f64::max);
    let thr = RANK_TOL * smax.max(1.0);
    let null_rows: Vec<usize> = (0..sigma.len()).filter(|&k| sigma[k] <= thr).collect();
    let mut out = DMatrix::zeros(cols, null_rows.len());
    for (c, &r) in null_rows.iter().enumerate() {
        for i in 0..cols {
            out[(i, c)] = v_t[(r, i)].conj();
        }
    }
    out
}

/// `K_n = ∩_{c ≠ n} ker A_c` for every `n ≥ 0` in the support of `A`;
/// only nonzero kernels are returned, as orthonormal column bases.
pub fn graded_kernels(a: &Loop) -> Result<BTreeMap<i64, DMatrix<Complex64>>> {
    a.require_certified()?;
    let n = a.n();
    let coeffs = a.mat().coefficients();
    let Some((lo, hi)) = a.mat().support() else {
        return Ok(BTreeMap::new());
    };
    let mut out = BTreeMap::new();
    for e in lo.max(0)..=hi {
        let others: Vec<&DMatrix<Complex64>> = coeffs
            .iter()
            .filter(|(c, m)| *c != e && m.iter().any(|x| x.norm() > 0.0))
            .map(|(_, m)| m)
            .collect();
        let basis = if others.is_empty() {
            DMatrix::identity(n, n)
        } else {
            let mut stacked = DMatrix::zeros(n * others.len(), n);
            for (b, m) in others.iter().enumerate() {
                stacked.view_mut((b * n, 0), (n, n)).copy_from(*m);
            }
            null_space(&stacked)
        };
        if basis.ncols() > 0 {
            out.insert(e, basis);
        }
    }
    let keys: Vec<i64> = out.keys().copied().collect();
    for (x, &p) in keys.iter().enumerate() {
        for &q in &keys[x + 1..] {
            let overlap = (out[&p].adjoint() * &out[&q])
                .iter()
                .map(|c| c.norm())
                .fold(0.0, f64::max);
            if overlap > 1e-8 {
                return Err(Error::KernelOverlap(overlap));
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CornerWitness {
    /// Corner rank `M`.
    pub m: usize,
    /// `N × M`, orthonormal columns `v_k`.
    #[serde(serialize_with = "ser_matrix")]
    pub vectors: DMatrix<Complex64>,
    /// `n_k ≥ 0`, ascending.
    pub exponents: Vec<i64>,
    /// `M × M` unitary, `V[j,k] = <v_j, A_{n_k} v_k>`.
    #[serde(serialize_with = "ser_matrix")]
    pub v_matrix: DMatrix<Complex64>,
    /// Largest coefficient residual of the defining Laurent identity.
    pub residual: f64,
}

fn ser_matrix<S: serde::Serializer>(m: &DMatrix<Complex64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(m.nrows()))?;
    for i in 0..m.nrows() {
        let row: Vec<[f64; 2]> = (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect();
        seq.serialize_element(&row)?;
    }
    seq.end()
}

impl CornerWitness {
    /// `max_{c,k} |A_c v_k - δ_{c,n_k} Σ_j V[j,k] v_j|`.
    pub fn verify(&self, a: &Loop) -> f64 {
        let mut worst = 0.0f64;
        let Some((lo, hi)) = a.mat().support() else {
            return f64::INFINITY;
        };
        let target = &self.vectors * &self.v_matrix;
        for c in lo.min(0)..=hi.max(*self.exponents.iter().max().unwrap_or(&0)) {
            let ac = a.mat().coefficient(c);
            for k in 0..self.m {
                let lhs = &ac * self.vectors.column(k);
                for i in 0..lhs.len() {
                    let rhs = if c == self.exponents[k] {
                        target[(i, k)]
                    } else {
                        Complex64::new(0.0, 0.0)
                    };
                    worst = worst.max((lhs[i] - rhs).norm());
                }
            }
        }
        worst
    }

    /// Deviation of the basis from orthonormality and of `V` from unitarity.
    pub fn orthonormality_residual(&self) -> f64 {
        let eye = DMatrix::<Complex64>::identity(self.m, self.m);
        let g = self.vectors.adjoint() * &self.vectors - &eye;
        let u = self.v_matrix.adjoint() * &self.v_matrix - &eye;
        g.iter().chain(u.iter()).map(|c| c.norm()).fold(0.0, f64::max)
    }
}

fn hstack(blocks: &[&DMatrix<Complex64>], rows: usize) -> DMatrix<Complex64> {
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        out.view_mut((0, at), (rows, b.ncols())).copy_from(*b);
        at += b.ncols();
    }
    out
}

/// The largest monomial corner of `A`, if any.
pub fn detect_corner(a: &Loop) -> Result<Option<CornerWitness>> {
    let kernels = graded_kernels(a)?;
    let n = a.n();
    let mut graded: BTreeMap<i64, DMatrix<Complex64>> = kernels;
    let eye = DMatrix::<Complex64>::identity(n, n);

    for _ in 0..=n {
        let blocks: Vec<&DMatrix<Complex64>> = graded.values().collect();
        let s = hstack(&blocks, n);
        let complement = &eye - &s * s.adjoint();
        let mut changed = false;
        let mut next = BTreeMap::new();
        for (&e, basis) in &graded {
            let image = a.mat().coefficient(e) * basis;
            let leak = &complement * image;
            let keep = null_space(&leak);
            if keep.ncols() != basis.ncols() {
                changed = true;
            }
            if keep.ncols() > 0 {
                next.insert(e, basis * keep);
            }
        }
        graded = next;
        if !changed {
            break;
        }
    }

    if graded.is_empty() {
        return Ok(None);
    }
    let mut exponents = Vec::new();
    let mut columns = Vec::new();
    for (&e, basis) in &graded {
        for c in 0..basis.ncols() {
            exponents.push(e);
            columns.push(basis.column(c).into_owned());
        }
    }
    let m = columns.len();
    let vectors = DMatrix::from_columns(&columns);
    let v_matrix = DMatrix::from_fn(m, m, |j, k| {
        let w = a.mat().coefficient(exponents[k]) * vectors.column(k);
        vectors.column(j).dotc(&w)
    });
    let mut witness = CornerWitness {
        m,
        vectors,
        exponents,
        v_matrix,
        residual: 0.0,
    };
    witness.residual = witness.verify(a);
    let ortho = witness.orthonormality_residual();
    if witness.residual > WITNESS_TOL || ortho > WITNESS_TOL {
        return Err(Error::WitnessRejected(witness.residual.max(ortho)));
    }
    Ok(Some(witness))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    Irreducible,
    Reducible,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub status: Status,
    pub witness: Option<CornerWitness>,
    pub semantics_note: &'static str,
}

pub fn classify(a: &Loop) -> Result<Verdict> {
    let witness = detect_corner(a)?;
    let status = if witness.is_some() {
        Status::Reducible
    } else {
        Status::Irreducible
    };
    Ok(Verdict {
        status,
        witness,
        semantics_note: SEMANTICS_NOTE,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Equivalence {
    Equal,
    /// `A · star(B)` is a full-rank monomial corner. A certificate for the
    /// exceptional clause of the criterion, not a proof of equivalence.
    EqualModuloCorner,
    InequivalentPerTheorem,
}

pub fn equivalent(a: &Loop, b: &Loop, tol: f64) -> Result<Equivalence> {
    if a.n() != b.n() {
        return Err(Error::SizeMismatch {
            expected: a.n(),
            found: b.n(),
        });
    }
    a.require_certified()?;
    b.require_certified()?;
    if a.mat().approx_eq(b.mat(), tol) {
        return Ok(Equivalence::Equal);
    }
    let c = Loop::checked(a.mat().mul(&b.mat().star())?, crate::loopgroup::CERT_TOL);
    match detect_corner(&c)? {
        Some(w) if w.m == a.n() => Ok(Equivalence::EqualModuloCorner),
        _ => Ok(Equivalence::InequivalentPerTheorem),
    }
}
