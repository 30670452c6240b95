//! Elliptic Racah polynomials and the eigenbasis of the Heun matrix.

pub mod eigenbasis;
pub mod measure;
pub mod poly;

use serde::Serialize;

use crate::coeffs::CoefficientSet;
use crate::error::Result;
use crate::matrix::HeunMatrix;
use crate::params::{CouplingParams, HalfPeriodPermutation};
use crate::spectra::{self, Spectrum};

pub use eigenbasis::{racah_matrix, racah_matrix_unchecked, RacahMatrix};
pub use measure::{
    christoffel_darboux_check, eigenvector, epsilons, heun_functions, heun_weight, norms,
    normalized_values, twisted_values, weights, CdResidual, Epsilons, GramResidual,
};
pub use poly::{poly_expansion, poly_expansion_with_scale, poly_recurrence};

/// Every quantity of the spectral solution for one parameter set.
/// Two-index tables are indexed `[k][j]`: degree first, eigenvalue second.
#[derive(Clone, Debug, Serialize)]
pub struct RacahTable {
    pub params: CouplingParams,
    pub coefficients: CoefficientSet,
    pub spectrum: Spectrum,
    /// `p_k(E_j)`, k = 0..M.
    pub p: Vec<Vec<f64>>,
    /// `|p_{M+1}(E_j)|` relative to the recurrence scale.
    pub p_top_residual: Vec<f64>,
    pub f: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub norms: Vec<f64>,
    pub eps: Vec<f64>,
    pub eps_tilde: Vec<f64>,
    pub h: Vec<Vec<f64>>,
    pub matrix: RacahMatrix,
    #[serde(skip)]
    pub heun: HeunMatrix,
    #[serde(skip)]
    pub tilde: CoefficientSet,
}

impl RacahTable {
    pub fn compute(params: &CouplingParams) -> Result<Self> {
        let h = HeunMatrix::build(params)?;
        let spectrum = spectra::eigenvalues(&h)?;
        let tilde_params = params.permute(HalfPeriodPermutation::Pi2)?;
        let tilde = HeunMatrix::build(&tilde_params)?.coefficients().clone();
        Self::assemble(params, h, spectrum, tilde)
    }

    fn assemble(params: &CouplingParams, h: HeunMatrix, spectrum: Spectrum, tilde: CoefficientSet) -> Result<Self> {
        let coeffs = h.coefficients().clone();
        let m = coeffs.m();
        let ctx = params.theta_context()?;

        let mut columns = Vec::with_capacity(m + 1);
        let mut p_top_residual = Vec::with_capacity(m + 1);
        for &e in spectrum.values() {
            columns.push(eigenvector(&coeffs, e)?);
            p_top_residual.push(poly::evaluate(&coeffs, e, m + 1).relative_last());
        }
        let f = measure::transpose(&columns);
        // p_k = f_k ∏_{l<k} ã_{M-l}
        let mut p = f.clone();
        let mut norm = 1.0;
        for (k, row) in p.iter_mut().enumerate() {
            if k > 0 {
                norm *= coeffs.a_tilde()[m + 1 - k];
            }
            row.iter_mut().for_each(|x| *x *= norm);
        }
        let w = weights(&coeffs, params, &ctx)?;
        let eps = epsilons(&coeffs, &tilde, &spectrum)?;
        let n = norms(&coeffs, params, &ctx, &spectrum, &eps.eps)?;
        let hf = heun_functions(&f, &eps.eps);
        let matrix = racah_matrix(&h, &spectrum, f.clone(), &w, &n)?;
        Ok(RacahTable {
            params: params.clone(),
            coefficients: coeffs,
            spectrum,
            p,
            p_top_residual,
            f,
            weights: w,
            norms: n,
            eps: eps.eps,
            eps_tilde: eps.eps_tilde,
            h: hf,
            matrix,
            heun: h,
            tilde,
        })
    }

    pub fn m(&self) -> usize {
        self.coefficients.m()
    }
}
