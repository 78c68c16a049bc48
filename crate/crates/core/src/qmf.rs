//! QMF verification, the scalar condition on `m_0`, low-pass checks,
//! filter completion and the Haar-measure transfer identity.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::laurent::LaurentPoly;
use crate::loopgroup::{fiber_sum, filters_to_loop, FilterSystem, CERT_TOL};

/// Default number of sample points for grid checks.
pub const DEFAULT_GRID: usize = 256;

/// Tolerance of [`low_pass_check`].
pub const LOW_PASS_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QmfReport {
    /// Largest coefficient modulus of `star(A)A - I` for the loop of `m`.
    pub unitary_residual: f64,
    /// Autocorrelation residual of `m_0` (see [`verify_scalar_qmf`]).
    pub scalar_residual: f64,
    pub low_pass: bool,
    /// `max_x ‖M(x) M(x)* - I‖_max` over the sampled fibers.
    pub grid_residual: f64,
    pub passed: bool,
}

/// `exp(2πi t)`.
fn cis(t: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * t)
}

/// The `N` points `w` with `w^N = x`: the principal root `exp(iθ/N)`,
/// `θ = arg(x) ∈ [0, 2π)`, times powers of `exp(2πi/N)`.
pub fn fiber_representatives(x: Complex64, n: usize) -> Vec<Complex64> {
    let theta = x.arg().rem_euclid(2.0 * PI);
    let root = Complex64::from_polar(1.0, theta / n as f64);
    (0..n).map(|k| root * cis(k as f64 / n as f64)).collect()
}

/// The fiber matrix `(m_j(w_k))_{j,k}` over the representatives of `x`.
pub fn fiber_matrix(m: &FilterSystem, x: Complex64) -> DMatrix<Complex64> {
    let reps = fiber_representatives(x, m.n());
    DMatrix::from_fn(m.n(), m.n(), |j, k| m.filter(j).eval_unchecked(reps[k]))
}

fn unitarity_residual(u: &DMatrix<Complex64>) -> f64 {
    let n = u.nrows();
    let d = u * u.adjoint() - DMatrix::<Complex64>::identity(n, n);
    d.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Exact and sampled QMF checks for a filter system.
pub fn verify_qmf(m: &FilterSystem, tol: f64, grid_size: usize) -> Result<QmfReport> {
    let n = m.n();
    if grid_size == 0 || !grid_size.is_multiple_of(n) {
        return Err(Error::InvalidGrid { grid: grid_size, n });
    }
    let unitary_residual = filters_to_loop(m).mat().is_paraunitary(tol).residual;
    let scalar_residual = verify_scalar_qmf(m.filter(0), n)?;
    let low_pass = low_pass_check(m.filter(0));
    let grid_residual = (0..grid_size)
        .map(|g| unitarity_residual(&fiber_matrix(m, cis(g as f64 / grid_size as f64))))
        .fold(0.0, f64::max);
    Ok(QmfReport {
        unitary_residual,
        scalar_residual,
        low_pass,
        grid_residual,
        passed: unitary_residual <= tol,
    })
}

/// `max_l |Σ_k c_k conj(c_{k-lN}) - δ_{l,0}/N|`; zero iff
/// `Σ_{w^N = x} |m_0(w)|^2 ≡ 1`.
pub fn verify_scalar_qmf(m0: &LaurentPoly, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidScale(n));
    }
    let auto = m0 * &m0.star();
    let Some((lo, hi)) = auto.support() else {
        return Ok(1.0 / n as f64);
    };
    let n_i = n as i64;
    let target = 1.0 / n as f64;
    let mut residual = 0.0f64;
    for l in lo.div_euclid(n_i)..=hi.div_euclid(n_i) + 1 {
        let expect = if l == 0 { target } else { 0.0 };
        residual = residual.max((auto.coeff(l * n_i) - Complex64::new(expect, 0.0)).norm());
    }
    Ok(residual)
}

/// `|m_0(1) - 1| ≤ 1e-10`.
pub fn low_pass_check(m0: &LaurentPoly) -> bool {
    (m0.eval_unchecked(Complex64::new(1.0, 0.0)) - 1.0).norm() <= LOW_PASS_TOL
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CompletionMode {
    /// Alternating conjugate flip, scale 2 only, exact FIR output.
    Fir2,
    /// Pointwise Gram–Schmidt on sampled polyphase rows, any scale.
    Grid,
}

/// A completion known only at sample points of the circle.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledSystem {
    pub n: usize,
    /// Base points `x_g = exp(2πi g / G)`.
    pub points: Vec<Complex64>,
    /// Completed unitary loop values `A(x_g)`; row 0 is the polyphase row of `m_0`.
    pub loop_values: Vec<DMatrix<Complex64>>,
    /// `max_g ‖A(x_g) A(x_g)* - I‖_max`.
    pub max_unitarity_residual: f64,
}

impl SampledSystem {
    /// Filter values `(m_j(w_k))_{j,k}` on the fiber over `points[g]`.
    pub fn fiber_matrix(&self, g: usize) -> DMatrix<Complex64> {
        let n = self.n;
        let reps = fiber_representatives(self.points[g], n);
        let scale = 1.0 / (n as f64).sqrt();
        let f = DMatrix::from_fn(n, n, |k, col| reps[col].powi(k as i32) * scale);
        &self.loop_values[g] * f
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Completion {
    Fir(FilterSystem),
    Sampled(SampledSystem),
}

/// Multiplies by the unimodular constant making the first entry of `row`
/// with modulus above `1e-12` positive real.
fn normalize_phase(row: &[Complex64]) -> Complex64 {
    row.iter()
        .find(|c| c.norm() > 1e-12)
        .map(|c| c.conj() / c.norm())
        .unwrap_or(Complex64::new(1.0, 0.0))
}

fn complete_fir2(m0: &LaurentPoly) -> Result<FilterSystem> {
    let (lo, hi) = m0.support().ok_or(Error::ScalarQmfViolation(0.5))?;
    // m_1(z) = z^K conj(m_0(-z)) with K odd
    let mut k = lo + hi;
    if k.rem_euclid(2) == 0 {
        k += 1;
    }
    let coeffs: Vec<Complex64> = (lo..=hi)
        .rev()
        .map(|t| {
            let sign = if t.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            m0.coeff(t).conj() * sign
        })
        .collect();
    let m1 = LaurentPoly::new(k - hi, coeffs);
    let one = Complex64::new(1.0, 0.0);
    let row: Vec<Complex64> = (0..2).map(|j| m1.polyphase(2, j).eval_unchecked(one)).collect();
    let m1 = m1.scale(normalize_phase(&row));
    FilterSystem::verified(vec![m0.clone(), m1], CERT_TOL)
}

/// Orthonormal completion of the unit row `u`: Gram–Schmidt over the
/// canonical basis vectors, skipping the one with the largest overlap.
fn complete_row(u: &DVector<Complex64>) -> DMatrix<Complex64> {
    let n = u.len();
    let skip = (0..n)
        .max_by(|&a, &b| u[a].norm().total_cmp(&u[b].norm()))
        .expect("nonempty");
    let mut rows: Vec<DVector<Complex64>> = vec![u.clone()];
    for p in (0..n).filter(|&p| p != skip) {
        let mut v = DVector::from_fn(n, |i, _| {
            if i == p {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        for _ in 0..2 {
            for r in &rows {
                // <v, r> with rows as vectors: Σ v_i conj(r_i)
                let proj = v.iter().zip(r.iter()).map(|(a, b)| a * b.conj()).sum::<Complex64>();
                v -= r * proj;
            }
        }
        let norm = v.norm();
        v /= Complex64::new(norm, 0.0);
        let phase = normalize_phase(v.as_slice());
        rows.push(v * phase);
    }
    DMatrix::from_fn(n, n, |i, j| rows[i][j])
}

/// Completes `m_0` to a full QMF system.
pub fn complete(m0: &LaurentPoly, n: usize, mode: CompletionMode, grid_size: usize) -> Result<Completion> {
    let residual = verify_scalar_qmf(m0, n)?;
    if residual > CERT_TOL {
        return Err(Error::ScalarQmfViolation(residual));
    }
    match mode {
        CompletionMode::Fir2 => {
            if n != 2 {
                return Err(Error::Fir2RequiresScaleTwo(n));
            }
            Ok(Completion::Fir(complete_fir2(m0)?))
        }
        CompletionMode::Grid => {
            if grid_size == 0 {
                return Err(Error::InvalidGrid { grid: grid_size, n });
            }
            let sqrt_n = Complex64::new((n as f64).sqrt(), 0.0);
            let phases: Vec<LaurentPoly> = (0..n).map(|j| m0.polyphase(n, j).scale(sqrt_n)).collect();
            let mut points = Vec::with_capacity(grid_size);
            let mut loop_values = Vec::with_capacity(grid_size);
            let mut max_residual = 0.0f64;
            for g in 0..grid_size {
                let x = cis(g as f64 / grid_size as f64);
                let u = DVector::from_fn(n, |j, _| phases[j].eval_unchecked(x));
                let a = complete_row(&u);
                max_residual = max_residual.max(unitarity_residual(&a));
                points.push(x);
                loop_values.push(a);
            }
            Ok(Completion::Sampled(SampledSystem {
                n,
                points,
                loop_values,
                max_unitarity_residual: max_residual,
            }))
        }
    }
}

/// The transfer operator `(1/N) Σ_{w^N = z} p(w)` on Laurent polynomials.
pub fn transfer(p: &LaurentPoly, n: usize) -> LaurentPoly {
    fiber_sum(p, n).scale(Complex64::new(1.0 / n as f64, 0.0))
}

/// Integral against normalized Haar measure: the constant coefficient.
pub fn haar_integral(p: &LaurentPoly) -> Complex64 {
    p.coeff(0)
}

/// Checks `∫ (1/N) Σ_{w^N = z} f(w) dμ(z) = ∫ f dμ` for `f = z^k`,
/// `|k| ≤ k_max`, and returns the largest deviation.
pub fn verify_measure_invariance(n: usize, k_max: i64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidScale(n));
    }
    if k_max < 1 {
        return Err(Error::InvalidInput(format!("k_max must be at least 1, got {k_max}")));
    }
    let one = Complex64::new(1.0, 0.0);
    Ok((-k_max..=k_max)
        .map(|k| {
            let f = LaurentPoly::monomial(k, one);
            (haar_integral(&transfer(&f, n)) - haar_integral(&f)).norm()
        })
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn haar_m0() -> LaurentPoly {
        LaurentPoly::from_real(0, &[0.5, 0.5])
    }

    fn d4_m0() -> LaurentPoly {
        let s = 3f64.sqrt();
        LaurentPoly::from_real(0, &[(1.0 + s) / 8.0, (3.0 + s) / 8.0, (3.0 - s) / 8.0, (1.0 - s) / 8.0])
    }

    #[test]
    fn haar_passes() {
        let m = FilterSystem::verified(vec![haar_m0(), LaurentPoly::from_real(0, &[0.5, -0.5])], 1e-10).unwrap();
        let rep = verify_qmf(&m, 1e-10, 256).unwrap();
        assert!(rep.passed);
        assert!(rep.unitary_residual <= 1e-12 && rep.grid_residual <= 1e-12 && rep.scalar_residual <= 1e-12);
        assert!(rep.low_pass);
    }

    #[test]
    fn base_monomials_pass_exactly() {
        for n in 2..5 {
            let rep = verify_qmf(&FilterSystem::base(n).unwrap(), 1e-10, 4 * n).unwrap();
            assert!(rep.passed);
            assert!(rep.unitary_residual < 1e-15);
            assert!(!rep.low_pass);
        }
    }

    #[test]
    fn scaled_haar_fails() {
        let m = FilterSystem::new(vec![
            LaurentPoly::from_real(0, &[FRAC_1_SQRT_2, FRAC_1_SQRT_2]),
            LaurentPoly::from_real(0, &[FRAC_1_SQRT_2, -FRAC_1_SQRT_2]),
        ])
        .unwrap();
        let rep = verify_qmf(&m, 1e-10, 64).unwrap();
        assert!(!rep.passed);
        // Σ|c|^2 = 1 against 1/N = 1/2
        assert!((rep.scalar_residual - 0.5).abs() < 1e-12);
        // |m0(z)|^2 + |m0(-z)|^2 ≡ 2
        let x = Complex64::new(0.0, 1.0);
        let s: f64 = fiber_representatives(x * x, 2)
            .iter()
            .map(|w| m.filter(0).eval_unchecked(*w).norm_sqr())
            .sum();
        assert!((s - 2.0).abs() < 1e-12);
    }

    #[test]
    fn grid_must_be_multiple_of_scale() {
        let m = FilterSystem::base(3).unwrap();
        assert!(matches!(verify_qmf(&m, 1e-10, 10), Err(Error::InvalidGrid { .. })));
        assert!(matches!(verify_qmf(&m, 1e-10, 0), Err(Error::InvalidGrid { .. })));
    }

    #[test]
    fn scalar_qmf_examples() {
        assert!(verify_scalar_qmf(&haar_m0(), 2).unwrap() < 1e-16);
        for n in 2..5 {
            let m0 = LaurentPoly::monomial(3, Complex64::new(1.0 / (n as f64).sqrt(), 0.0));
            assert!(verify_scalar_qmf(&m0, n).unwrap() < 1e-15);
        }
        assert!(verify_scalar_qmf(&d4_m0(), 2).unwrap() <= 1e-12);
        // independent: |m0(z)|^2 + |m0(-z)|^2 on 256 points
        let worst = (0..256)
            .map(|g| {
                let z = cis(g as f64 / 256.0);
                (d4_m0().eval_unchecked(z).norm_sqr() + d4_m0().eval_unchecked(-z).norm_sqr() - 1.0).abs()
            })
            .fold(0.0, f64::max);
        assert!(worst < 1e-12);
    }

    #[test]
    fn low_pass_examples() {
        assert!(low_pass_check(&haar_m0()));
        assert!(low_pass_check(&d4_m0()));
        assert!(!low_pass_check(&LaurentPoly::monomial(
            1,
            Complex64::new(FRAC_1_SQRT_2, 0.0)
        )));
    }

    #[test]
    fn fir2_haar_and_constant() {
        let Completion::Fir(m) = complete(&haar_m0(), 2, CompletionMode::Fir2, 0).unwrap() else {
            panic!("expected FIR output");
        };
        assert!(m.is_verified());
        assert!(m.filter(1).approx_eq(&LaurentPoly::from_real(0, &[0.5, -0.5]), 1e-15));

        let c = LaurentPoly::constant(Complex64::new(FRAC_1_SQRT_2, 0.0));
        let Completion::Fir(m) = complete(&c, 2, CompletionMode::Fir2, 0).unwrap() else {
            panic!("expected FIR output");
        };
        assert!(m.is_verified());
        assert_eq!(m.filter(1).support(), Some((1, 1)));
        assert!((m.filter(1).coeff(1).norm() - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn fir2_d4() {
        let Completion::Fir(m) = complete(&d4_m0(), 2, CompletionMode::Fir2, 0).unwrap() else {
            panic!("expected FIR output");
        };
        assert_eq!(m.filter(1).len(), 4);
        let rep = verify_qmf(&m, 1e-12, 256).unwrap();
        assert!(rep.passed, "{rep:?}");
    }

    #[test]
    fn fir2_rejections() {
        let bad = LaurentPoly::from_real(0, &[1.0, 1.0]);
        assert!(matches!(
            complete(&bad, 2, CompletionMode::Fir2, 0),
            Err(Error::ScalarQmfViolation(_))
        ));
        let m0 = LaurentPoly::from_real(0, &[1.0 / 3.0; 3]);
        // (1+z+z^2)/3 is not scalar-QMF at N=3: Σ|c|^2 = 1/3 = 1/N, lags ±3 absent
        assert!(verify_scalar_qmf(&m0, 3).unwrap() < 1e-15);
        assert_eq!(
            complete(&m0, 3, CompletionMode::Fir2, 0),
            Err(Error::Fir2RequiresScaleTwo(3))
        );
    }

    #[test]
    fn grid_completion_is_unitary() {
        let m0 = LaurentPoly::from_real(0, &[1.0 / 3.0; 3]);
        let Completion::Sampled(s) = complete(&m0, 3, CompletionMode::Grid, 96).unwrap() else {
            panic!("expected sampled output");
        };
        assert!(s.max_unitarity_residual <= 1e-10);
        for g in 0..s.points.len() {
            assert!(unitarity_residual(&s.fiber_matrix(g)) <= 1e-10);
            // row 0 of the fiber matrix is m0 on the fiber
            let f = s.fiber_matrix(g);
            for (k, w) in fiber_representatives(s.points[g], 3).into_iter().enumerate() {
                assert!((f[(0, k)] - m0.eval_unchecked(w)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn fiber_sections() {
        for g in 0..50 {
            let x = cis(g as f64 / 50.0);
            for n in 2..6 {
                for w in fiber_representatives(x, n) {
                    assert!((w.powi(n as i32) - x).norm() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn measure_invariance() {
        for n in 2..6 {
            assert_eq!(verify_measure_invariance(n, 20).unwrap(), 0.0);
        }
        let one = Complex64::new(1.0, 0.0);
        assert_eq!(haar_integral(&transfer(&LaurentPoly::one(), 3)), one);
        assert_eq!(
            transfer(&LaurentPoly::monomial(3, one), 3),
            LaurentPoly::monomial(1, one)
        );
        assert!(transfer(&LaurentPoly::monomial(2, one), 3).is_zero());
        assert!(verify_measure_invariance(2, 0).is_err());
    }
}
