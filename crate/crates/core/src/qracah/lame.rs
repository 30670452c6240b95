//! The Lamé slice: all `u_r` equal to `u` and all `v_r = 0`.

use serde::Serialize;

use crate::coeffs::CoefficientSet;
use crate::error::{Error, Result};
use crate::matrix::HeunMatrix;
use crate::params::{CouplingParams, RawParams};
use crate::racah::measure::max_relative;
use crate::spectra::{self, Spectrum};
use crate::theta::ThetaContext;

/// Agreement required between the Lamé display and the specialized general matrix.
pub const LAME_FORM_TOL: f64 = 1e-10;
/// Virtual parameter used for the general matrix; `B` vanishes on this slice
/// so its value does not matter as long as it is regular.
const LAME_VIRTUAL: f64 = 0.5;

#[derive(Clone, Debug, Serialize)]
pub struct LameSlice {
    pub u: f64,
    /// Scale of the Lamé display, `2π/(2u+M)`.
    pub alpha_display: f64,
    /// Scale of the general construction, `π/(2u+M)`.
    pub alpha_general: f64,
    pub matrix: HeunMatrix,
    #[serde(skip)]
    pub general: HeunMatrix,
    pub offdiag_residual: f64,
    pub spectrum: Spectrum,
    /// `max_j |E_j + E_{M-j}| / max(1, max|E|)`.
    pub antisymmetry_residual: f64,
}

/// The matrix with `H[k][k+1] = [M-k]_1/[u+M-k]_1`, `H[k][k-1] = [k]_1/[u+k]_1`
/// and zero diagonal, theta functions taken at `α = 2π/(2u+M)`.
pub fn lame_display(u: f64, m: usize, p: f64) -> Result<HeunMatrix> {
    if !(u > 0.0) || !u.is_finite() {
        return Err(Error::InvalidContext(format!("Lamé parameter u must be positive, got {u}")));
    }
    let alpha = 2.0 * std::f64::consts::PI / (2.0 * u + m as f64);
    let ctx = ThetaContext::new(p, alpha)?;
    let mut a = vec![0.0; m + 1];
    for k in 1..=m {
        let k = k as f64;
        a[k as usize] = ctx.scaled(1, k) / ctx.scaled(1, u + k);
    }
    let coeffs = CoefficientSet::from_parts(a.clone(), a, vec![0.0; m + 1])?;
    Ok(HeunMatrix::from_coefficients(coeffs))
}

/// Builds the Lamé matrix, compares it with the general construction at
/// `u_r = u`, `v_r = 0`, and computes its spectrum.
pub fn lame_matrix(u: f64, m: usize, p: f64) -> Result<LameSlice> {
    let matrix = lame_display(u, m, p)?;
    let params = CouplingParams::validate(RawParams {
        u: [u; 4],
        v: [0.0; 4],
        u_virtual: LAME_VIRTUAL,
        m,
        p,
    })?;
    let general = HeunMatrix::build(&params)?;
    let offdiag_residual = max_relative(matrix.sub(), general.sub())
        .max(max_relative(matrix.sup(), general.sup()))
        .max(general.diag().iter().fold(0.0, |w, b| w.max(b.abs())));
    if !(offdiag_residual <= LAME_FORM_TOL) {
        return Err(Error::FormMismatch {
            quantity: "Lamé matrix",
            residual: offdiag_residual,
        });
    }
    let spectrum = spectra::eigenvalues(&matrix)?;
    let e = spectrum.values();
    let scale = e.iter().fold(1.0f64, |s, x| s.max(x.abs()));
    let antisymmetry_residual = (0..=m).map(|j| (e[j] + e[m - j]).abs()).fold(0.0, f64::max) / scale;
    Ok(LameSlice {
        u,
        alpha_display: 2.0 * params.alpha(),
        alpha_general: params.alpha(),
        matrix,
        general,
        offdiag_residual,
        spectrum,
        antisymmetry_residual,
    })
}
