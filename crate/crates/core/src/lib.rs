//! Elliptic Racah polynomials.
//!
//! A truncation of the difference Heun equation onto the finite lattice
//! `u1, u1+1, …, u1+M` yields a tridiagonal matrix whose entries are ratios of
//! Jacobi theta functions. This crate builds that matrix, computes its simple
//! real spectrum, evaluates the eigenbasis of elliptic Racah polynomials with
//! its orthogonality measure, and checks the trigonometric degeneration onto
//! the q-Racah polynomials.
//!
//! ```
//! use elliptic_racah::{CouplingParams, HeunMatrix, RawParams, spectra};
//!
//! let params = CouplingParams::validate(RawParams::desk_default())?;
//! let h = HeunMatrix::build(&params)?;
//! let spectrum = spectra::eigenvalues(&h)?;
//! assert_eq!(spectrum.len(), params.m() + 1);
//! # Ok::<(), elliptic_racah::Error>(())
//! ```

pub mod cli;
pub mod coeffs;
pub mod error;
pub mod matrix;
pub mod params;
pub mod qracah;
pub mod racah;
pub mod sampling;
pub mod spectra;
pub mod theta;
pub mod verify;

pub use coeffs::{CoefficientSet, DifferenceHeun};
pub use error::{DomainConstraint, Error, Result};
pub use matrix::HeunMatrix;
pub use params::{CouplingParams, HalfPeriodPermutation, RawParams};
pub use racah::RacahTable;
pub use spectra::Spectrum;
pub use theta::ThetaContext;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/theta.md")]
    mod theta {}
    #[doc = include_str!("../../../book/src/heun-matrix.md")]
    mod heun_matrix {}
    #[doc = include_str!("../../../book/src/spectrum.md")]
    mod spectrum {}
    #[doc = include_str!("../../../book/src/racah-polynomials.md")]
    mod racah_polynomials {}
    #[doc = include_str!("../../../book/src/orthogonality.md")]
    mod orthogonality {}
    #[doc = include_str!("../../../book/src/q-racah-limit.md")]
    mod q_racah_limit {}
    #[doc = include_str!("../../../book/src/lame.md")]
    mod lame {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
