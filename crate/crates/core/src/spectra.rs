//! Spectrum of the Heun matrix by Sturm-sequence bisection on the symmetrized
//! matrix, polished with Newton steps on the characteristic polynomial.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::HeunMatrix;
use crate::racah::poly;

/// Relative bracket width at which bisection stops.
pub const BISECTION_TOL: f64 = 1e-13;
/// Minimum gap between neighbours, relative to the spread of the spectrum.
pub const SEPARATION_TOL: f64 = 1e-9;
/// Largest accepted `|p_{M+1}(E)|` relative to the recurrence scale.
pub const ON_SHELL_TOL: f64 = 1e-8;
const NEWTON_STEPS: usize = 5;

/// Eigenvalues `E_0 > E_1 > … > E_M`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    /// Wraps values that are already strictly descending.
    pub fn from_descending(values: Vec<f64>) -> Result<Self> {
        for (i, w) in values.windows(2).enumerate() {
            if !(w[0] > w[1]) {
                return Err(Error::DegenerateSpectrum {
                    index: i,
                    gap: w[0] - w[1],
                });
            }
        }
        Ok(Spectrum { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, j: usize) -> f64 {
        self.values[j]
    }

    /// `∏_{l≠j} (E_j - E_l)`, which equals `p'_{M+1}(E_j)`.
    pub fn vandermonde_derivative(&self, j: usize) -> f64 {
        let ej = self.values[j];
        self.values
            .iter()
            .enumerate()
            .filter(|&(l, _)| l != j)
            .map(|(_, el)| ej - el)
            .product()
    }
}

/// Number of eigenvalues of the symmetric tridiagonal `(diag, off)` strictly below `x`.
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64, pivmin: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for (i, &d) in diag.iter().enumerate() {
        q = if i == 0 {
            d - x
        } else {
            d - x - off[i - 1] * off[i - 1] / q
        };
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// All eigenvalues of `h`, strictly descending.
pub fn eigenvalues(h: &HeunMatrix) -> Result<Spectrum> {
    let n = h.size();
    if n == 1 {
        return Ok(Spectrum {
            values: vec![h.diag()[0]],
        });
    }
    let s = h.symmetrize()?;
    let (diag, off) = (&s.diag, &s.off);

    // Gershgorin interval
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1] } else { 0.0 } + if i + 1 < n { off[i] } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let norm = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    let pad = 4.0 * f64::EPSILON * norm + f64::MIN_POSITIVE;
    lo -= pad;
    hi += pad;
    let pivmin = f64::MIN_POSITIVE * off.iter().fold(1.0f64, |m, e| m.max(e * e));
    let abs_floor = 2.0 * f64::EPSILON * norm;

    let coeffs = h.coefficients();
    let mut values = Vec::with_capacity(n);
    // the j-th largest eigenvalue is the (n-1-j)-th smallest
    for j in 0..n {
        let target = n - 1 - j;
        let (mut a, mut b) = (lo, hi);
        for _ in 0..400 {
            let mid = 0.5 * (a + b);
            if sturm_count(diag, off, mid, pivmin) > target {
                b = mid;
            } else {
                a = mid;
            }
            if b - a <= BISECTION_TOL * a.abs().max(b.abs()) || b - a <= abs_floor {
                break;
            }
        }
        values.push(newton_polish(coeffs, 0.5 * (a + b), a, b));
    }

    let spread = values[0] - values[n - 1];
    for i in 0..n - 1 {
        let gap = values[i] - values[i + 1];
        if !(gap > SEPARATION_TOL * spread) {
            return Err(Error::DegenerateSpectrum { index: i, gap });
        }
    }
    let spectrum = Spectrum { values };
    for &e in spectrum.values() {
        let shell = poly::evaluate(coeffs, e, n).relative_last();
        if !(shell <= ON_SHELL_TOL) {
            return Err(Error::OffShell {
                energy: e,
                residual: shell,
            });
        }
    }
    Ok(spectrum)
}

/// Up to five Newton steps on `p_{M+1}`, kept inside a slightly widened bracket
/// and only while the residual decreases.
fn newton_polish(coeffs: &crate::CoefficientSet, start: f64, a: f64, b: f64) -> f64 {
    let n = coeffs.m() + 1;
    let width = (b - a).max(f64::EPSILON * start.abs());
    let (lo, hi) = (a - width, b + width);
    let mut e = start;
    let mut eval = poly::evaluate(coeffs, e, n);
    for _ in 0..NEWTON_STEPS {
        let p = eval.values[n];
        let dp = eval.derivatives[n];
        if p.mantissa == 0.0 || dp.mantissa == 0.0 {
            break;
        }
        let step = p.mantissa / dp.mantissa * 2f64.powi(p.exp2 - dp.exp2);
        let next = e - step;
        if !(next > lo && next < hi) || next == e {
            break;
        }
        let next_eval = poly::evaluate(coeffs, next, n);
        if next_eval.values[n].log2_abs() >= eval.values[n].log2_abs() {
            break;
        }
        e = next;
        eval = next_eval;
    }
    e
}

/// `max_k |(H f)_k - E f_k| / ((1 + |E|) · max_k |f_k|)`; zero for a null vector.
pub fn residual(h: &HeunMatrix, e: f64, f: &[f64]) -> f64 {
    let fmax = f.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if fmax == 0.0 {
        return 0.0;
    }
    let hf = h.apply(f);
    let worst = hf
        .iter()
        .zip(f)
        .map(|(y, x)| (y - e * x).abs())
        .fold(0.0, f64::max);
    worst / ((1.0 + e.abs()) * fmax)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::CoefficientSet;
    use crate::params::{CouplingParams, RawParams};

    fn matrix(m: usize) -> HeunMatrix {
        let mut raw = RawParams::desk_default();
        raw.m = m;
        HeunMatrix::build(&CouplingParams::validate(raw).unwrap()).unwrap()
    }

    #[test]
    fn single_eigenvalue() {
        let h = matrix(0);
        assert_eq!(eigenvalues(&h).unwrap().values(), &[h.diag()[0]]);
    }

    #[test]
    fn two_by_two_matches_quadratic_formula() {
        let h = matrix(1);
        let c = h.coefficients();
        let (b0, b1) = (c.b()[0], c.b()[1]);
        let w = c.a()[1] * c.a_tilde()[1];
        // (E-b0)(E-b1) - w = 0
        let mean = 0.5 * (b0 + b1);
        let disc = (0.25 * (b0 - b1).powi(2) + w).sqrt();
        let spec = eigenvalues(&h).unwrap();
        assert!((spec.get(0) - (mean + disc)).abs() < 1e-13);
        assert!((spec.get(1) - (mean - disc)).abs() < 1e-13);
    }

    #[test]
    fn sturm_counts_all_eigenvalues() {
        let h = matrix(6);
        let s = h.symmetrize().unwrap();
        assert_eq!(sturm_count(&s.diag, &s.off, -1e300, 1e-300), 0);
        assert_eq!(sturm_count(&s.diag, &s.off, 1e300, 1e-300), 7);
    }

    #[test]
    fn trace_identities() {
        let h = matrix(7);
        let spec = eigenvalues(&h).unwrap();
        let sum: f64 = spec.values().iter().sum();
        let sum2: f64 = spec.values().iter().map(|e| e * e).sum();
        assert!((sum - h.trace()).abs() <= 1e-10 * h.trace().abs().max(1.0));
        assert!((sum2 - h.trace_of_square()).abs() <= 1e-10 * h.trace_of_square());
    }

    #[test]
    fn virtual_parameter_shifts_spectrum_uniformly() {
        let mut raw = RawParams::desk_default();
        let a = eigenvalues(&HeunMatrix::build(&CouplingParams::validate(raw.clone()).unwrap()).unwrap()).unwrap();
        raw.u_virtual = 1.9;
        let b = eigenvalues(&HeunMatrix::build(&CouplingParams::validate(raw).unwrap()).unwrap()).unwrap();
        let shift = a.get(0) - b.get(0);
        for j in 1..a.len() {
            assert!((a.get(j) - b.get(j) - shift).abs() < 1e-9);
        }
    }

    #[test]
    fn residual_cases() {
        let h = matrix(2);
        assert_eq!(residual(&h, 1.0, &[0.0, 0.0, 0.0]), 0.0);
        // a 1x1 matrix has the exact eigenvector (1)
        let one = HeunMatrix::from_coefficients(
            CoefficientSet::from_parts(vec![0.0], vec![0.0], vec![2.5]).unwrap(),
        );
        assert_eq!(residual(&one, 2.5, &[1.0]), 0.0);
        let r = residual(&one, 2.5 + 1e-3, &[1.0]);
        assert!((r - 1e-3 / 3.501).abs() < 1e-15);
    }

    #[test]
    fn degenerate_input_is_rejected() {
        assert!(matches!(
            Spectrum::from_descending(vec![1.0, 1.0]),
            Err(Error::DegenerateSpectrum { index: 0, .. })
        ));
    }
}
