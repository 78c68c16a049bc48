//! The loop group `G_N(T)` of paraunitary Laurent matrices, its action on
//! filter systems and the loop <-> filter bijection.
//!
//! A loop `A` and a filter system `(m_0, ..., m_{N-1})` determine each other
//! through
//!
//! ```text
//! m_i(z)    = N^{-1/2} Σ_j A_{i,j}(z^N) z^j
//! A_{i,j}(z) = N^{1/2} Σ_l c_{i, lN + j} z^l        (m_i = Σ_t c_{i,t} z^t)
//! ```
//!
//! The second line is the fiber sum `N^{-1/2} Σ_{w^N = z} m_i(w) w^{-j}`
//! evaluated exactly through `Σ_{w^N = z} w^r = N z^{r/N}` when `N | r`
//! and `0` otherwise.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::laurent::{LaurentPoly, MatrixLaurent};

/// Tolerance used to certify loops and verify filter systems.
pub const CERT_TOL: f64 = 1e-10;

/// Ordered filters `(m_0, ..., m_{N-1})` at scale `N`.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterSystem {
    n: usize,
    filters: Vec<LaurentPoly>,
    verified: bool,
}

impl FilterSystem {
    /// An unverified system; the scale is the number of filters.
    pub fn new(filters: Vec<LaurentPoly>) -> Result<Self> {
        if filters.len() < 2 {
            return Err(Error::InvalidScale(filters.len()));
        }
        Ok(Self {
            n: filters.len(),
            filters,
            verified: false,
        })
    }

    /// Builds the system and grants the verified flag if its loop is
    /// paraunitary within `tol`.
    pub fn verified(filters: Vec<LaurentPoly>, tol: f64) -> Result<Self> {
        let mut sys = Self::new(filters)?;
        sys.verified = filters_to_loop_matrix(&sys).is_paraunitary(tol).ok;
        Ok(sys)
    }

    /// The base system `m_k(z) = z^k / sqrt(N)`.
    pub fn base(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidScale(n));
        }
        let s = 1.0 / (n as f64).sqrt();
        let filters = (0..n)
            .map(|k| LaurentPoly::monomial(k as i64, Complex64::new(s, 0.0)))
            .collect();
        Ok(Self {
            n,
            filters,
            verified: true,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn filters(&self) -> &[LaurentPoly] {
        &self.filters
    }

    pub fn filter(&self, i: usize) -> &LaurentPoly {
        &self.filters[i]
    }

    pub fn is_verified(&self) -> bool {
        self.verified
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.n != other.n {
            return f64::INFINITY;
        }
        self.filters
            .iter()
            .zip(&other.filters)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    /// `(lowest, highest)` exponent over all filters.
    pub fn support(&self) -> Option<(i64, i64)> {
        self.filters
            .iter()
            .filter_map(LaurentPoly::support)
            .reduce(|a, b| (a.0.min(b.0), a.1.max(b.1)))
    }
}

/// An element of the loop group, optionally certified paraunitary.
#[derive(Clone, Debug, PartialEq)]
pub struct Loop {
    mat: MatrixLaurent,
    certified: bool,
}

impl Loop {
    /// Certifies `mat` at `tol`; fails if it is not paraunitary.
    pub fn certify(mat: MatrixLaurent, tol: f64) -> Result<Self> {
        let check = mat.is_paraunitary(tol);
        if !check.ok {
            return Err(Error::UncertifiedLoop);
        }
        Ok(Self { mat, certified: true })
    }

    /// Wraps `mat` without any check; most operations reject the result.
    pub fn uncertified(mat: MatrixLaurent) -> Self {
        Self { mat, certified: false }
    }

    /// Certified if paraunitary at `tol`, uncertified otherwise.
    pub fn checked(mat: MatrixLaurent, tol: f64) -> Self {
        let certified = mat.is_paraunitary(tol).ok;
        Self { mat, certified }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            mat: MatrixLaurent::identity(n),
            certified: true,
        }
    }

    pub fn mat(&self) -> &MatrixLaurent {
        &self.mat
    }

    pub fn n(&self) -> usize {
        self.mat.n()
    }

    pub fn is_certified(&self) -> bool {
        self.certified
    }

    pub fn into_mat(self) -> MatrixLaurent {
        self.mat
    }

    /// Group product `self · other`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let mat = self.mat.mul(&other.mat)?;
        Ok(Self::checked(mat, CERT_TOL))
    }

    /// Group inverse `star(A)`.
    pub fn inverse(&self) -> Self {
        Self {
            mat: self.mat.star(),
            certified: self.certified,
        }
    }

    pub(crate) fn require_certified(&self) -> Result<()> {
        if self.certified {
            Ok(())
        } else {
            Err(Error::UncertifiedLoop)
        }
    }
}

fn inv_sqrt(n: usize) -> Complex64 {
    Complex64::new(1.0 / (n as f64).sqrt(), 0.0)
}

fn sqrt_n(n: usize) -> Complex64 {
    Complex64::new((n as f64).sqrt(), 0.0)
}

/// `m_i(z) = N^{-1/2} Σ_j A_{i,j}(z^N) z^j`.
pub fn loop_to_filters(a: &Loop) -> Result<FilterSystem> {
    a.require_certified()?;
    let n = a.n();
    if n < 2 {
        return Err(Error::InvalidScale(n));
    }
    let filters = (0..n)
        .map(|i| {
            let mut m = LaurentPoly::zero();
            for j in 0..n {
                m = &m + &a.mat.get(i, j).compose_zn(n).shift(j as i64);
            }
            m.scale(inv_sqrt(n))
        })
        .collect();
    Ok(FilterSystem {
        n,
        filters,
        verified: true,
    })
}

fn filters_to_loop_matrix(m: &FilterSystem) -> MatrixLaurent {
    let n = m.n;
    MatrixLaurent::from_fn(n, |i, j| m.filters[i].polyphase(n, j).scale(sqrt_n(n)))
}

/// Polyphase extraction `A_{i,j}(z) = N^{1/2} Σ_l c_{i, lN+j} z^l`. The
/// returned loop is certified exactly when the system is QMF at
/// [`CERT_TOL`].
pub fn filters_to_loop(m: &FilterSystem) -> Loop {
    Loop::checked(filters_to_loop_matrix(m), CERT_TOL)
}

/// `n_i(z) = Σ_j A_{i,j}(z^N) m_j(z)`.
pub fn act(a: &Loop, m: &FilterSystem) -> Result<FilterSystem> {
    a.require_certified()?;
    if a.n() != m.n {
        return Err(Error::SizeMismatch {
            expected: m.n,
            found: a.n(),
        });
    }
    let n = m.n;
    let filters = (0..n)
        .map(|i| {
            let mut out = LaurentPoly::zero();
            for j in 0..n {
                let aij = a.mat.get(i, j);
                if !aij.is_zero() {
                    out = &out + &(&aij.compose_zn(n) * &m.filters[j]);
                }
            }
            out
        })
        .collect();
    Ok(FilterSystem {
        n,
        filters,
        verified: m.verified,
    })
}

/// Exact fiber sum `Σ_{y^N = x} p(y)` as a Laurent polynomial in `x`.
pub fn fiber_sum(p: &LaurentPoly, n: usize) -> LaurentPoly {
    p.polyphase(n, 0).scale(Complex64::new(n as f64, 0.0))
}

/// The loop carrying `m` onto `n`: `act(transition(n, m), m) = n`.
///
/// Entries are the module inner products
/// `T_{i,j}(x) = Σ_{y^N = x} n_i(y) conj(m_j(y))`, computed exactly by
/// [`fiber_sum`]. The conjugate sits on `m_j`; placing it on `n_i` yields
/// the entrywise conjugate loop, which is the symbol of
/// `S_i^{(n)*} S_j^{(m)}` (see [`crate::cuntz_rep::transition_operator_matrix`]).
pub fn transition(n_sys: &FilterSystem, m_sys: &FilterSystem) -> Result<Loop> {
    if !n_sys.verified || !m_sys.verified {
        return Err(Error::UnverifiedFilters);
    }
    if n_sys.n != m_sys.n {
        return Err(Error::SizeMismatch {
            expected: n_sys.n,
            found: m_sys.n,
        });
    }
    let n = n_sys.n;
    let starred: Vec<LaurentPoly> = m_sys.filters.iter().map(LaurentPoly::star).collect();
    let mat = MatrixLaurent::from_fn(n, |i, j| fiber_sum(&(&n_sys.filters[i] * &starred[j]), n));
    Ok(Loop::checked(mat, CERT_TOL))
}

pub(crate) fn complex_gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im)
}

/// Haar-distributed unitary from the QR factorization of a complex
/// Gaussian matrix, with the phases of `R`'s diagonal folded into `Q`.
pub(crate) fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(n, n, |_, _| complex_gaussian(rng));
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random unit vector in `C^n`.
pub(crate) fn random_unit_vector(n: usize, rng: &mut ChaCha8Rng) -> nalgebra::DVector<Complex64> {
    let v = nalgebra::DVector::from_fn(n, |_, _| complex_gaussian(rng));
    let norm = v.norm();
    v / Complex64::new(norm, 0.0)
}

/// The elementary factor `I - P + zP` for the rank-1 projection `P = v v*`.
pub fn elementary_factor(v: &nalgebra::DVector<Complex64>) -> MatrixLaurent {
    let n = v.len();
    let p = v * v.adjoint();
    let i_minus_p = DMatrix::<Complex64>::identity(n, n) - &p;
    MatrixLaurent::from_coefficients(n, [(0, &i_minus_p), (1, &p)])
}

/// Seeded random paraunitary loop
/// `U_0 · Π_{k=1}^{degree} (I - P_k + z P_k) U_k`.
pub fn random_paraunitary(n: usize, degree: usize, seed: u64) -> Result<Loop> {
    if n == 0 {
        return Err(Error::InvalidScale(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mat = MatrixLaurent::from_constant(&random_unitary(n, &mut rng));
    for _ in 0..degree {
        let v = random_unit_vector(n, &mut rng);
        let u = MatrixLaurent::from_constant(&random_unitary(n, &mut rng));
        mat = mat.mul(&elementary_factor(&v))?.mul(&u)?;
    }
    Loop::certify(mat, CERT_TOL)
}
