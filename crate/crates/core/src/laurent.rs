//! Complex Laurent polynomials and matrix-valued Laurent polynomials on the
//! unit circle.
//!
//! Polynomials are stored densely over their support interval: the
//! coefficient of `z^(offset + k)` sits at position `k`. Leading and trailing
//! coefficients with modulus at or below [`TRIM_TOL`] are dropped on
//! construction, and the zero polynomial is always `(offset 0, [])`, so
//! structural equality coincides with equality as functions.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Coefficients with modulus at or below this are trimmed from either end.
pub const TRIM_TOL: f64 = 1e-14;

/// Allowed deviation of `|z|` from 1 for evaluation points.
pub const CIRCLE_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct LaurentPoly {
    offset: i64,
    coeffs: Vec<Complex64>,
}

impl LaurentPoly {
    /// Builds `Σ_k coeffs[k] z^(offset + k)`, trimming negligible end terms.
    ///
    /// Panics if any coefficient is NaN or infinite.
    pub fn new(offset: i64, coeffs: Vec<Complex64>) -> Self {
        assert!(
            coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite()),
            "Laurent coefficients must be finite"
        );
        let mut p = Self { offset, coeffs };
        p.trim();
        p
    }

    pub fn from_real(offset: i64, coeffs: &[f64]) -> Self {
        Self::new(offset, coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self {
            offset: 0,
            coeffs: Vec::new(),
        }
    }

    pub fn one() -> Self {
        Self::constant(ONE)
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(0, vec![c])
    }

    /// `c · z^k`.
    pub fn monomial(k: i64, c: Complex64) -> Self {
        Self::new(k, vec![c])
    }

    fn trim(&mut self) {
        let first = self.coeffs.iter().position(|c| c.norm() > TRIM_TOL);
        match first {
            None => {
                self.coeffs.clear();
                self.offset = 0;
            }
            Some(start) => {
                let end = self
                    .coeffs
                    .iter()
                    .rposition(|c| c.norm() > TRIM_TOL)
                    .expect("a nonzero coefficient exists");
                self.coeffs.truncate(end + 1);
                self.coeffs.drain(..start);
                self.offset += start as i64;
            }
        }
    }

    /// Lowest stored exponent (0 for the zero polynomial).
    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Number of stored coefficients (support length).
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `(lowest, highest)` exponent, `None` for zero.
    pub fn support(&self) -> Option<(i64, i64)> {
        if self.is_zero() {
            None
        } else {
            Some((self.offset, self.offset + self.coeffs.len() as i64 - 1))
        }
    }

    /// Coefficient of `z^k`.
    pub fn coeff(&self, k: i64) -> Complex64 {
        let idx = k - self.offset;
        if idx < 0 {
            return ZERO;
        }
        self.coeffs.get(idx as usize).copied().unwrap_or(ZERO)
    }

    /// Iterator over `(exponent, coefficient)` for the stored range.
    pub fn terms(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(k, &c)| (self.offset + k as i64, c))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(self.offset, self.coeffs.iter().map(|&a| a * c).collect())
    }

    /// Multiplication by `z^k`.
    pub fn shift(&self, k: i64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        Self {
            offset: self.offset + k,
            coeffs: self.coeffs.clone(),
        }
    }

    /// Circle adjoint: `star(p)(z) = conj(p(z))` for `|z| = 1`.
    pub fn star(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let top = self.offset + self.coeffs.len() as i64 - 1;
        Self {
            offset: -top,
            coeffs: self.coeffs.iter().rev().map(|c| c.conj()).collect(),
        }
    }

    /// Evaluates at a point of the unit circle.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let deviation = z.norm() - 1.0;
        if deviation.abs() > CIRCLE_TOL {
            return Err(Error::NotOnUnitCircle {
                re: z.re,
                im: z.im,
                deviation,
            });
        }
        Ok(self.eval_unchecked(z))
    }

    /// Horner evaluation without the unit-circle check.
    pub(crate) fn eval_unchecked(&self, z: Complex64) -> Complex64 {
        if self.is_zero() {
            return ZERO;
        }
        let mut acc = ZERO;
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc * z.powi(self.offset as i32)
    }

    /// `p(z^n)`.
    pub fn compose_zn(&self, n: usize) -> Self {
        if self.is_zero() || n == 1 {
            return self.clone();
        }
        let n_i = n as i64;
        let mut coeffs = vec![ZERO; (self.coeffs.len() - 1) * n + 1];
        for (k, &c) in self.coeffs.iter().enumerate() {
            coeffs[k * n] = c;
        }
        Self::new(self.offset * n_i, coeffs)
    }

    /// Keeps the coefficients at exponents `l·n + residue` and reindexes them
    /// to `l`: the `residue`-th polyphase component.
    pub fn polyphase(&self, n: usize, residue: usize) -> Self {
        let Some((lo, hi)) = self.support() else {
            return Self::zero();
        };
        let n_i = n as i64;
        let r = residue as i64;
        let l_lo = (lo - r).div_euclid(n_i) + i64::from((lo - r).rem_euclid(n_i) != 0);
        let l_hi = (hi - r).div_euclid(n_i);
        if l_hi < l_lo {
            return Self::zero();
        }
        let coeffs = (l_lo..=l_hi).map(|l| self.coeff(l * n_i + r)).collect();
        Self::new(l_lo, coeffs)
    }

    /// Largest coefficient-wise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let (lo, hi) = match (self.support(), other.support()) {
            (None, None) => return 0.0,
            (Some(a), None) | (None, Some(a)) => a,
            (Some(a), Some(b)) => (a.0.min(b.0), a.1.max(b.1)),
        };
        (lo..=hi)
            .map(|k| (self.coeff(k) - other.coeff(k)).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    /// Largest coefficient modulus.
    pub fn max_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.terms() {
            if c.norm() <= TRIM_TOL {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:.6}{:+.6}i)", c.re, c.im)?;
            match k {
                0 => {}
                1 => write!(f, "z")?,
                _ => write!(f, "z^{k}")?,
            }
        }
        Ok(())
    }
}

fn add_scaled(p: &LaurentPoly, q: &LaurentPoly, sign: f64) -> LaurentPoly {
    let (lo, hi) = match (p.support(), q.support()) {
        (None, None) => return LaurentPoly::zero(),
        (Some(_), None) => return p.clone(),
        (None, Some(_)) => return q.scale(Complex64::new(sign, 0.0)),
        (Some(a), Some(b)) => (a.0.min(b.0), a.1.max(b.1)),
    };
    let coeffs = (lo..=hi).map(|k| p.coeff(k) + q.coeff(k) * sign).collect();
    LaurentPoly::new(lo, coeffs)
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        add_scaled(self, rhs, 1.0)
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        add_scaled(self, rhs, -1.0)
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        if self.is_zero() || rhs.is_zero() {
            return LaurentPoly::zero();
        }
        let mut coeffs = vec![ZERO; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        LaurentPoly::new(self.offset + rhs.offset, coeffs)
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for LaurentPoly {
            type Output = LaurentPoly;
            fn $m(self, rhs: LaurentPoly) -> LaurentPoly {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// Residual report of a paraunitarity check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParaunitaryCheck {
    pub ok: bool,
    /// Largest coefficient modulus of `star(A)·A - I`.
    pub residual: f64,
}

/// Square matrix of Laurent polynomials, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixLaurent {
    n: usize,
    entries: Vec<LaurentPoly>,
}

impl MatrixLaurent {
    pub fn new(n: usize, entries: Vec<LaurentPoly>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("matrix size must be positive".into()));
        }
        if entries.len() != n * n {
            return Err(Error::SizeMismatch {
                expected: n * n,
                found: entries.len(),
            });
        }
        Ok(Self { n, entries })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> LaurentPoly) -> Self {
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(f(i, j));
            }
        }
        Self { n, entries }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| {
            if i == j {
                LaurentPoly::one()
            } else {
                LaurentPoly::zero()
            }
        })
    }

    /// A constant loop.
    pub fn from_constant(m: &DMatrix<Complex64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "constant matrix must be square");
        Self::from_fn(m.nrows(), |i, j| LaurentPoly::constant(m[(i, j)]))
    }

    /// `diag(z^e_0, z^e_1, ...)`.
    pub fn diag_monomials(exponents: &[i64]) -> Self {
        Self::from_fn(exponents.len(), |i, j| {
            if i == j {
                LaurentPoly::monomial(exponents[i], ONE)
            } else {
                LaurentPoly::zero()
            }
        })
    }

    /// `Σ_c coeffs[c] z^c` from per-exponent constant matrices.
    pub fn from_coefficients<'a>(n: usize, terms: impl IntoIterator<Item = (i64, &'a DMatrix<Complex64>)>) -> Self {
        let mut out = Self::from_fn(n, |_, _| LaurentPoly::zero());
        for (c, m) in terms {
            let term = Self::from_fn(n, |i, j| LaurentPoly::monomial(c, m[(i, j)]));
            out = out.add(&term).expect("sizes agree");
        }
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &LaurentPoly {
        &self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[LaurentPoly] {
        &self.entries
    }

    fn check_size(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::SizeMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_size(other)?;
        Ok(Self::from_fn(self.n, |i, j| self.get(i, j) + other.get(i, j)))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_size(other)?;
        Ok(Self::from_fn(self.n, |i, j| self.get(i, j) - other.get(i, j)))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_size(other)?;
        let n = self.n;
        Ok(Self::from_fn(n, |i, j| {
            let mut acc = LaurentPoly::zero();
            for k in 0..n {
                let (a, b) = (self.get(i, k), other.get(k, j));
                if !a.is_zero() && !b.is_zero() {
                    acc = &acc + &(a * b);
                }
            }
            acc
        }))
    }

    /// Conjugate transpose with the circle adjoint on every entry.
    pub fn star(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(j, i).star())
    }

    /// Entrywise circle adjoint without transposition.
    pub fn conj_entries(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(i, j).star())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::from_fn(self.n, |i, j| self.get(i, j).scale(c))
    }

    /// Union of the entry supports as `(lowest, highest)` exponent.
    pub fn support(&self) -> Option<(i64, i64)> {
        self.entries
            .iter()
            .filter_map(LaurentPoly::support)
            .reduce(|a, b| (a.0.min(b.0), a.1.max(b.1)))
    }

    /// The constant matrix `A_c` in `A(z) = Σ_c A_c z^c`.
    pub fn coefficient(&self, c: i64) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j).coeff(c))
    }

    /// `(c, A_c)` for every exponent in the support interval.
    pub fn coefficients(&self) -> Vec<(i64, DMatrix<Complex64>)> {
        match self.support() {
            None => Vec::new(),
            Some((lo, hi)) => (lo..=hi).map(|c| (c, self.coefficient(c))).collect(),
        }
    }

    pub fn eval(&self, z: Complex64) -> Result<DMatrix<Complex64>> {
        let deviation = z.norm() - 1.0;
        if deviation.abs() > CIRCLE_TOL {
            return Err(Error::NotOnUnitCircle {
                re: z.re,
                im: z.im,
                deviation,
            });
        }
        Ok(DMatrix::from_fn(self.n, self.n, |i, j| {
            self.get(i, j).eval_unchecked(z)
        }))
    }

    /// Entrywise `A(z^n)`.
    pub fn compose_zn(&self, n: usize) -> Self {
        Self::from_fn(self.n, |i, j| self.get(i, j).compose_zn(n))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.n != other.n {
            return f64::INFINITY;
        }
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    /// Certifies `star(A)·A = I` at the coefficient level.
    pub fn is_paraunitary(&self, tol: f64) -> ParaunitaryCheck {
        let product = self.star().mul(self).expect("same size");
        let residual = product.max_abs_diff(&Self::identity(self.n));
        ParaunitaryCheck {
            ok: residual <= tol,
            residual,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn difference_of_squares() {
        let p = LaurentPoly::from_real(0, &[0.5, 0.5]);
        let q = LaurentPoly::from_real(0, &[0.5, -0.5]);
        assert_eq!(&p * &q, LaurentPoly::from_real(0, &[0.25, 0.0, -0.25]));
    }

    #[test]
    fn add_zero_and_cancellation() {
        let p = LaurentPoly::new(-2, vec![c(1.0, 2.0), c(0.0, 0.0), c(-3.0, 0.5)]);
        assert_eq!(&p + &LaurentPoly::zero(), p);
        let zinv = LaurentPoly::monomial(-1, ONE);
        let z = LaurentPoly::monomial(1, ONE);
        assert_eq!(&zinv * &z, LaurentPoly::one());
        assert!((&p - &p).is_zero());
        assert_eq!((&p - &p).offset(), 0);
    }

    #[test]
    fn trimming_canonicalizes() {
        let p = LaurentPoly::new(3, vec![c(1e-16, 0.0), ONE, c(0.0, 1e-15)]);
        assert_eq!(p.support(), Some((4, 4)));
        let z = LaurentPoly::new(7, vec![c(1e-15, 0.0)]);
        assert_eq!(z, LaurentPoly::zero());
    }

    #[test]
    fn star_examples() {
        assert_eq!(LaurentPoly::monomial(1, ONE).star(), LaurentPoly::monomial(-1, ONE));
        let haar = LaurentPoly::from_real(0, &[0.5, 0.5]);
        assert_eq!(haar.star(), LaurentPoly::from_real(-1, &[0.5, 0.5]));
        let p = LaurentPoly::new(-1, vec![c(1.0, 2.0), c(3.0, -1.0)]);
        assert_eq!(p.star().coeff(1), c(1.0, -2.0));
        assert_eq!(p.star().star(), p);
    }

    #[test]
    fn eval_examples() {
        let haar = LaurentPoly::from_real(0, &[0.5, 0.5]);
        assert!((haar.eval(ONE).unwrap() - ONE).norm() < 1e-15);
        assert!(haar.eval(c(-1.0, 0.0)).unwrap().norm() < 1e-15);
        let z3 = LaurentPoly::monomial(3, ONE);
        assert!((z3.eval(c(0.0, 1.0)).unwrap() - c(0.0, -1.0)).norm() < 1e-15);
        assert!(matches!(haar.eval(c(2.0, 0.0)), Err(Error::NotOnUnitCircle { .. })));
    }

    #[test]
    fn compose_examples() {
        assert_eq!(
            LaurentPoly::monomial(1, ONE).compose_zn(2),
            LaurentPoly::monomial(2, ONE)
        );
        assert_eq!(LaurentPoly::one().compose_zn(5), LaurentPoly::one());
        let p = LaurentPoly::from_real(-1, &[1.0, 2.0, 3.0]);
        assert_eq!(
            p.compose_zn(3),
            LaurentPoly::from_real(-3, &[1.0, 0.0, 0.0, 2.0, 0.0, 0.0, 3.0])
        );
    }

    #[test]
    fn polyphase_split_reassembles() {
        let p = LaurentPoly::from_real(-3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]);
        let n = 3;
        let mut sum = LaurentPoly::zero();
        for r in 0..n {
            sum = &sum + &p.polyphase(n, r).compose_zn(n).shift(r as i64);
        }
        assert_eq!(sum, p);
        assert_eq!(p.polyphase(3, 0), LaurentPoly::from_real(-1, &[1.0, 4.0, 7.0]));
    }

    #[test]
    fn matrix_examples() {
        let a = MatrixLaurent::from_fn(2, |i, j| LaurentPoly::from_real(i as i64 - 1, &[1.0, j as f64]));
        assert_eq!(MatrixLaurent::identity(2).mul(&a).unwrap(), a);
        assert_eq!(
            MatrixLaurent::diag_monomials(&[1, 2]).star(),
            MatrixLaurent::diag_monomials(&[-1, -2])
        );
        assert!(matches!(
            a.mul(&MatrixLaurent::identity(3)),
            Err(Error::SizeMismatch { .. })
        ));
    }

    #[test]
    fn paraunitary_examples() {
        let h = DMatrix::from_row_slice(
            2,
            2,
            &[
                c(FRAC_1_SQRT_2, 0.0),
                c(FRAC_1_SQRT_2, 0.0),
                c(FRAC_1_SQRT_2, 0.0),
                c(-FRAC_1_SQRT_2, 0.0),
            ],
        );
        let hl = MatrixLaurent::from_constant(&h);
        let check = hl.is_paraunitary(1e-12);
        assert!(check.ok, "residual {}", check.residual);
        assert!(hl
            .mul(&hl.star())
            .unwrap()
            .approx_eq(&MatrixLaurent::identity(2), 1e-15));

        assert!(MatrixLaurent::diag_monomials(&[1, 5]).is_paraunitary(0.0).ok);

        let d = DMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, c(2.0, 0.0)]);
        let check = MatrixLaurent::from_constant(&d).is_paraunitary(1e-10);
        assert!(!check.ok);
        assert!((check.residual - 3.0).abs() < 1e-15);
    }

    #[test]
    fn coefficient_extraction() {
        let a = MatrixLaurent::diag_monomials(&[0, 1]);
        assert_eq!(
            a.coefficient(0),
            DMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ZERO])
        );
        assert_eq!(
            a.coefficient(1),
            DMatrix::from_row_slice(2, 2, &[ZERO, ZERO, ZERO, ONE])
        );
        assert_eq!(a.coefficient(7), DMatrix::zeros(2, 2));
    }
}
