//! Loop-group parametrization of wavelet filter banks.
//!
//! Paraunitary Laurent loops `A: T -> U_N(C)` correspond one-to-one with
//! quadrature mirror filter systems `(m_0, ..., m_{N-1})`; each system
//! defines a representation of the Cuntz algebra `O_N` on `L^2(T)` by the
//! weighted shifts `S_i f(z) = sqrt(N) m_i(z) f(z^N)`. This crate converts
//! between the two pictures, verifies and completes filters, models the
//! representation on truncated Fourier bands, classifies irreducibility by
//! the monomial-corner criterion and synthesizes scaling functions and
//! wavelets with the cascade algorithm.

pub mod cli;
pub mod cuntz_rep;
pub mod error;
pub mod irreducibility;
pub mod laurent;
pub mod loopgroup;
pub mod qmf;
pub mod wavelet;

pub use error::{Error, Result};
pub use laurent::{LaurentPoly, MatrixLaurent};
pub use loopgroup::{FilterSystem, Loop};
pub use num_complex::Complex64;
