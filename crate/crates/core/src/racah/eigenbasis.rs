//! The elliptic Racah matrix `F = [f(E_0), …, f(E_M)]`, its inverse from the
//! orthogonality relation, and its determinant computed three ways.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::coeffs::CoefficientSet;
use crate::error::{Error, Result};
use crate::matrix::HeunMatrix;
use crate::spectra::Spectrum;

/// Agreement required between the three determinant evaluations.
pub const DET_TOL: f64 = 1e-7;
/// Largest accepted entry of `F⁻¹F - I`.
pub const INVERSE_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RacahMatrix {
    /// `F[k][j] = f_k(E_j)`.
    pub f: Vec<Vec<f64>>,
    /// `N⁻¹ Fᵀ Δ`, indexed `[j][k]`.
    pub inverse: Vec<Vec<f64>>,
    pub det_elimination: f64,
    pub det_vandermonde: f64,
    pub det_norm_weight: f64,
    /// `max |F⁻¹F - I|`.
    pub inverse_residual: f64,
    /// `max |F⁻¹HF - E| / max(1, max|E_j|)`.
    pub diagonalization_residual: f64,
}

impl RacahMatrix {
    /// Largest pairwise relative difference of the three determinants.
    pub fn det_residual(&self) -> f64 {
        let d = [self.det_elimination, self.det_vandermonde, self.det_norm_weight];
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..i {
                let s = d[i].abs().max(d[j].abs());
                if s > 0.0 {
                    worst = worst.max((d[i] - d[j]).abs() / s);
                }
            }
        }
        worst
    }
}

fn sign_m(m: usize) -> f64 {
    if (m * (m + 1) / 2) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `(-1)^{M(M+1)/2} ∏_l ã_l^{-l} ∏_{j<k} (E_j - E_k)`.
pub fn det_vandermonde(coeffs: &CoefficientSet, spectrum: &Spectrum) -> f64 {
    let m = coeffs.m();
    let e = spectrum.values();
    let mut det = sign_m(m);
    for l in 1..=m {
        det *= coeffs.a_tilde()[l].powi(-(l as i32));
    }
    for k in 0..=m {
        for j in 0..k {
            det *= e[j] - e[k];
        }
    }
    det
}

/// `(-1)^{M(M+1)/2} ∏_l (N_l/Δ_l)^{1/2}`.
pub fn det_norm_weight(norms: &[f64], weights: &[f64]) -> f64 {
    let m = norms.len() - 1;
    sign_m(m) * norms.iter().zip(weights).map(|(n, w)| (n / w).sqrt()).product::<f64>()
}

/// Assembles `F` from the table `f_k(E_j)` (indexed `[k][j]`) and checks the
/// inverse and determinant identities.
pub fn racah_matrix(
    h: &HeunMatrix,
    spectrum: &Spectrum,
    f: Vec<Vec<f64>>,
    weights: &[f64],
    norms: &[f64],
) -> Result<RacahMatrix> {
    let result = racah_matrix_unchecked(h, spectrum, f, weights, norms);
    if !(result.inverse_residual <= INVERSE_TOL) {
        return Err(Error::FormMismatch {
            quantity: "inverse Racah matrix",
            residual: result.inverse_residual,
        });
    }
    let det_residual = result.det_residual();
    if !(det_residual <= DET_TOL) {
        return Err(Error::FormMismatch {
            quantity: "Racah matrix determinant",
            residual: det_residual,
        });
    }
    Ok(result)
}

/// As [`racah_matrix`], reporting residuals without judging them.
pub fn racah_matrix_unchecked(
    h: &HeunMatrix,
    spectrum: &Spectrum,
    f: Vec<Vec<f64>>,
    weights: &[f64],
    norms: &[f64],
) -> RacahMatrix {
    let n = spectrum.len();
    let coeffs = h.coefficients();
    let fm = DMatrix::from_fn(n, n, |k, j| f[k][j]);
    let inv = DMatrix::from_fn(n, n, |j, k| f[k][j] * weights[k] / norms[j]);

    let ident = &inv * &fm;
    let mut inverse_residual: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            inverse_residual = inverse_residual.max((ident[(i, j)] - target).abs());
        }
    }
    let hd = DMatrix::from_fn(n, n, |i, j| h.entry(i, j));
    let diag = &inv * hd * &fm;
    let e = spectrum.values();
    let e_scale = e.iter().fold(1.0f64, |s, x| s.max(x.abs()));
    let mut diagonalization_residual: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { e[j] } else { 0.0 };
            diagonalization_residual = diagonalization_residual.max((diag[(i, j)] - target).abs() / e_scale);
        }
    }

    RacahMatrix {
        det_elimination: fm.clone().lu().determinant(),
        det_vandermonde: det_vandermonde(coeffs, spectrum),
        det_norm_weight: det_norm_weight(norms, weights),
        inverse: (0..n).map(|j| (0..n).map(|k| inv[(j, k)]).collect()).collect(),
        f,
        inverse_residual,
        diagonalization_residual,
    }
}
