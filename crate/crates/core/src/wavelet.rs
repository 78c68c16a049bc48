//! Scaling functions by the cascade algorithm, wavelet generators, the
//! synthesis operator `W ξ = Σ_k ξ_k φ(x - k)` and the intertwining
//! `U_N W = W S_0` with `U_N f(x) = N^{-1/2} f(x / N)`.
//!
//! The refinement equation is used in the form `φ(x) = N Σ_k a_k φ(Nx - k)`
//! with `Σ_k a_k = m_0(1) = 1`, so that `∫ φ = 1`.
//!
//! Samples live on the grid `x = j / N^level`. The cascade first runs the
//! refinement from the box seed on the integer lattice (which it maps to
//! itself) until successive iterates agree, then refines the grid `J`
//! times. Every returned sample therefore satisfies the refinement
//! equation against the coarser level up to the integer-stage residual.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::laurent::LaurentPoly;
use crate::loopgroup::{FilterSystem, CERT_TOL};
use crate::qmf::{low_pass_check, verify_scalar_qmf};

/// Sup-norm bound on iterates before the cascade gives up.
pub const DIVERGENCE_GUARD: f64 = 1e6;

/// Successive-iterate difference regarded as converged.
pub const CONVERGENCE_TOL: f64 = 1e-6;

const INTEGER_STAGE_TOL: f64 = 1e-15;
const INTEGER_STAGE_MAX_ITERS: usize = 10_000;

pub const NORMALIZATION_NOTE: &str = "phi(x) = N * sum_k a_k phi(N x - k) with sum_k a_k = m_0(1) = 1";

/// Samples `values[i] = f((first_index + i) / N^level)`; zero elsewhere.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction {
    pub n: usize,
    pub level: u32,
    pub first_index: i64,
    pub values: Vec<Complex64>,
}

impl SampledFunction {
    pub fn step(&self) -> f64 {
        (self.n as f64).powi(-(self.level as i32))
    }

    /// Value at grid index `j` (zero outside the stored range).
    pub fn at(&self, j: i64) -> Complex64 {
        let i = j - self.first_index;
        if i < 0 {
            return Complex64::new(0.0, 0.0);
        }
        self.values.get(i as usize).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn last_index(&self) -> i64 {
        self.first_index + self.values.len() as i64 - 1
    }

    pub fn x(&self, j: i64) -> f64 {
        j as f64 * self.step()
    }

    /// Riemann sum `h Σ_j |f_j|^2`.
    pub fn l2_norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.step()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Samples on the grid coarser by `N^k` (every `N^k`-th point).
    pub fn coarsen(&self, k: u32) -> Result<SampledFunction> {
        if k > self.level {
            return Err(Error::GridIncompatible(format!(
                "cannot coarsen level {} by {k}",
                self.level
            )));
        }
        let stride = (self.n as i64).pow(k);
        let lo = self.first_index.div_euclid(stride) + i64::from(self.first_index.rem_euclid(stride) != 0);
        let hi = self.last_index().div_euclid(stride);
        let values = (lo..=hi).map(|j| self.at(j * stride)).collect();
        Ok(SampledFunction {
            n: self.n,
            level: self.level - k,
            first_index: lo,
            values,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingFunctionSamples {
    pub n: usize,
    /// Refinement level `J`: grid step `N^{-J}`.
    pub level: u32,
    /// The (shifted) filter `m_0` that was iterated.
    pub filter: LaurentPoly,
    /// Exponent shift applied to `m_0` to start its support at 0.
    pub shift: i64,
    /// Filter length `L`.
    pub filter_length: usize,
    /// `[0, (L - 1)/(N - 1)]`.
    pub support: (f64, f64),
    /// Samples at `x = j / N^J`, `j = 0, 1, ...`.
    pub samples: SampledFunction,
    /// Riemann sum of the samples.
    pub integral: f64,
    /// Largest successive-iterate difference on common grid points.
    pub convergence_delta: f64,
    pub converged: bool,
    /// Iterations spent on the integer lattice.
    pub integer_iterations: usize,
}

impl ScalingFunctionSamples {
    pub fn values(&self) -> &[Complex64] {
        &self.samples.values
    }
}

/// Last grid index inside `[0, S]` at the given level.
fn support_indices(n: usize, s_num: i64, s_den: i64, level: u32) -> i64 {
    // floor(S · N^level) with S = s_num / s_den
    (s_num * (n as i64).pow(level)).div_euclid(s_den)
}

/// `out[j] = N Σ_k a_k prev[j - k N^t]`: one refinement of a level-`t`
/// sample array onto level `t + 1`.
fn refine(a: &[Complex64], n: usize, prev: &SampledFunction, len: usize) -> SampledFunction {
    let stride = (n as i64).pow(prev.level);
    let scale = n as f64;
    let values = (0..len as i64)
        .map(|j| {
            a.iter()
                .enumerate()
                .map(|(k, &ak)| ak * prev.at(j - k as i64 * stride))
                .sum::<Complex64>()
                * scale
        })
        .collect();
    SampledFunction {
        n,
        level: prev.level + 1,
        first_index: 0,
        values,
    }
}

/// Scaling function of `m_0` at scale `N` sampled on the `N^{-J}` grid.
pub fn cascade(m0: &LaurentPoly, n: usize, levels: u32) -> Result<ScalingFunctionSamples> {
    let residual = verify_scalar_qmf(m0, n)?;
    if residual > CERT_TOL {
        return Err(Error::ScalarQmfViolation(residual));
    }
    if !low_pass_check(m0) {
        let v = m0.eval_unchecked(Complex64::new(1.0, 0.0));
        return Err(Error::NotLowPass { re: v.re, im: v.im });
    }
    let shift = -m0.offset();
    let filter = m0.shift(shift);
    let a = filter.coeffs().to_vec();
    let len = a.len();
    let (s_num, s_den) = ((len - 1) as i64, (n - 1) as i64);
    let support = (0.0, s_num as f64 / s_den as f64);

    // integer lattice: φ(m) = N Σ_k a_k φ(Nm - k)
    let int_len = support_indices(n, s_num, s_den, 0) as usize + 1;
    let mut current = vec![Complex64::new(0.0, 0.0); int_len];
    current[0] = Complex64::new(1.0, 0.0);
    let mut delta = f64::INFINITY;
    let mut iterations = 0;
    while iterations < INTEGER_STAGE_MAX_ITERS && delta > INTEGER_STAGE_TOL {
        let next: Vec<Complex64> = (0..int_len as i64)
            .map(|m| {
                (0..int_len as i64)
                    .filter_map(|k| {
                        let t = n as i64 * m - k;
                        (0..len as i64)
                            .contains(&t)
                            .then(|| a[t as usize] * current[k as usize])
                    })
                    .sum::<Complex64>()
                    * n as f64
            })
            .collect();
        delta = next
            .iter()
            .zip(&current)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        let sup = next.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if sup > DIVERGENCE_GUARD {
            return Err(Error::CascadeDiverged(sup));
        }
        current = next;
        iterations += 1;
    }
    let mut convergence_delta = delta;

    let mut samples = SampledFunction {
        n,
        level: 0,
        first_index: 0,
        values: current,
    };
    for _ in 0..levels {
        let next_len = support_indices(n, s_num, s_den, samples.level + 1) as usize + 1;
        let next = refine(&a, n, &samples, next_len);
        let sup = next.sup_norm();
        if sup > DIVERGENCE_GUARD {
            return Err(Error::CascadeDiverged(sup));
        }
        let d = (samples.first_index..=samples.last_index())
            .map(|j| (next.at(j * n as i64) - samples.at(j)).norm())
            .fold(0.0, f64::max);
        convergence_delta = convergence_delta.max(d);
        samples = next;
    }
    let integral = (samples.values.iter().sum::<Complex64>() * samples.step()).re;
    Ok(ScalingFunctionSamples {
        n,
        level: levels,
        filter,
        shift,
        filter_length: len,
        support,
        samples,
        integral,
        convergence_delta,
        converged: convergence_delta <= CONVERGENCE_TOL,
        integer_iterations: iterations,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct WaveletSamples {
    pub n: usize,
    /// `ψ_1, ..., ψ_{N-1}` on the grid one level finer than `φ`.
    pub generators: Vec<SampledFunction>,
    /// False unless `m_0` is low-pass and is the filter `φ` came from.
    pub orthonormal_case: bool,
}

/// `ψ_i(x) = N Σ_k b^{(i)}_k φ(Nx - k)` for `m_i = Σ_k b^{(i)}_k z^k`.
pub fn wavelets(m: &FilterSystem, phi: &ScalingFunctionSamples) -> Result<WaveletSamples> {
    if !m.is_verified() {
        return Err(Error::UnverifiedFilters);
    }
    if m.n() != phi.n {
        return Err(Error::GridIncompatible(format!(
            "scale {} against phi at scale {}",
            m.n(),
            phi.n
        )));
    }
    let n = phi.n;
    let stride = (n as i64).pow(phi.level);
    let scale = n as f64;
    let generators = m.filters()[1..]
        .iter()
        .map(|b| {
            let (t_lo, t_hi) = b.support().unwrap_or((0, 0));
            let first = t_lo * stride + phi.samples.first_index;
            let last = t_hi * stride + phi.samples.last_index();
            let values = (first..=last)
                .map(|j| {
                    b.terms()
                        .map(|(t, c)| c * phi.samples.at(j - t * stride))
                        .sum::<Complex64>()
                        * scale
                })
                .collect();
            SampledFunction {
                n,
                level: phi.level + 1,
                first_index: first,
                values,
            }
        })
        .collect();
    let shifted_m0 = m.filter(0).shift(phi.shift);
    let orthonormal_case = low_pass_check(m.filter(0)) && shifted_m0.approx_eq(&phi.filter, 1e-12);
    Ok(WaveletSamples {
        n,
        generators,
        orthonormal_case,
    })
}

/// Samples of `W ξ = Σ_k ξ_k φ(x - k)` for `ξ = Σ_k ξ_k z^k`.
pub fn synthesize_w(xi: &LaurentPoly, phi: &SampledFunction) -> SampledFunction {
    let Some((k_lo, k_hi)) = xi.support() else {
        return SampledFunction {
            n: phi.n,
            level: phi.level,
            first_index: 0,
            values: Vec::new(),
        };
    };
    let stride = (phi.n as i64).pow(phi.level);
    let first = k_lo * stride + phi.first_index;
    let last = k_hi * stride + phi.last_index();
    let values = (first..=last)
        .map(|j| xi.terms().map(|(k, c)| c * phi.at(j - k * stride)).sum())
        .collect();
    SampledFunction {
        n: phi.n,
        level: phi.level,
        first_index: first,
        values,
    }
}

/// `(S_0 ξ)_p = sqrt(N) Σ_k a_{p - Nk} ξ_k`, i.e. `sqrt(N) m_0(z) ξ(z^N)`.
pub fn apply_s0(m0: &LaurentPoly, n: usize, xi: &LaurentPoly) -> LaurentPoly {
    (m0 * &xi.compose_zn(n)).scale(Complex64::new((n as f64).sqrt(), 0.0))
}

/// Sup over the `N^{-(J-1)}` grid of `|U_N(W ξ) - W(S_0 ξ)|`.
pub fn check_intertwine(m: &FilterSystem, phi: &ScalingFunctionSamples, xi: &LaurentPoly) -> Result<f64> {
    if !phi.converged {
        return Err(Error::CascadeNotConverged(phi.convergence_delta));
    }
    if m.n() != phi.n {
        return Err(Error::GridIncompatible(format!(
            "scale {} against phi at scale {}",
            m.n(),
            phi.n
        )));
    }
    let m0 = m.filter(0).shift(phi.shift);
    if !m0.approx_eq(&phi.filter, 1e-12) {
        return Err(Error::GridIncompatible("phi was not computed from this m_0".into()));
    }
    let n = phi.n as i64;
    let w_xi = synthesize_w(xi, &phi.samples);
    let w_s0 = synthesize_w(&apply_s0(&m0, phi.n, xi), &phi.samples);
    if w_xi.values.is_empty() && w_s0.values.is_empty() {
        return Ok(0.0);
    }
    let inv_sqrt = 1.0 / (phi.n as f64).sqrt();
    // x = j N^{-(J-1)}: x/N is index j at level J, x is index N j at level J
    let lo = w_xi.first_index.min(w_s0.first_index.div_euclid(n));
    let hi = w_xi.last_index().max(w_s0.last_index().div_euclid(n) + 1);
    Ok((lo..=hi)
        .map(|j| (w_xi.at(j) * inv_sqrt - w_s0.at(n * j)).norm())
        .fold(0.0, f64::max))
}

/// `max_{|k| ≤ k_range} |<φ, φ(· - k)> - δ_{k,0}|` by grid quadrature.
pub fn orthonormality_check(phi: &ScalingFunctionSamples, k_range: i64) -> f64 {
    let s = &phi.samples;
    let stride = (phi.n as i64).pow(phi.level);
    (-k_range..=k_range)
        .map(|k| {
            let ip: Complex64 = (s.first_index..=s.last_index())
                .map(|j| s.at(j) * s.at(j - k * stride).conj())
                .sum::<Complex64>()
                * s.step();
            let target = if k == 0 { 1.0 } else { 0.0 };
            (ip - target).norm()
        })
        .fold(0.0, f64::max)
}

/// Report-friendly summary of a cascade run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CascadeSummary {
    pub n: usize,
    pub level: u32,
    pub filter_length: usize,
    pub shift: i64,
    pub support: (f64, f64),
    pub integral: f64,
    pub convergence_delta: f64,
    pub converged: bool,
    pub normalization: &'static str,
}

impl From<&ScalingFunctionSamples> for CascadeSummary {
    fn from(p: &ScalingFunctionSamples) -> Self {
        Self {
            n: p.n,
            level: p.level,
            filter_length: p.filter_length,
            shift: p.shift,
            support: p.support,
            integral: p.integral,
            convergence_delta: p.convergence_delta,
            converged: p.converged,
            normalization: NORMALIZATION_NOTE,
        }
    }
}
