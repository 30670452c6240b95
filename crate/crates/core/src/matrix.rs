//! The tridiagonal Heun matrix `H` and its symmetrization.

use serde::Serialize;

use crate::coeffs::{CoefficientSet, DifferenceHeun};
use crate::error::{Error, Result};
use crate::params::CouplingParams;

/// `(M+1)×(M+1)` tridiagonal matrix with `H[k][k-1] = a_k`, `H[k][k] = b_k`
/// and `H[k][k+1] = ã_{M-k}`, stored as three bands.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HeunMatrix {
    sub: Vec<f64>,
    diag: Vec<f64>,
    sup: Vec<f64>,
    #[serde(skip)]
    coeffs: CoefficientSet,
}

impl HeunMatrix {
    pub fn build(params: &CouplingParams) -> Result<Self> {
        let coeffs = DifferenceHeun::new(params)?.lattice()?;
        Ok(Self::from_coefficients(coeffs))
    }

    pub fn from_coefficients(coeffs: CoefficientSet) -> Self {
        let m = coeffs.m();
        let sub = coeffs.a()[1..].to_vec();
        let sup = (0..m).map(|k| coeffs.a_tilde()[m - k]).collect();
        HeunMatrix {
            sub,
            diag: coeffs.b().to_vec(),
            sup,
            coeffs,
        }
    }

    pub fn size(&self) -> usize {
        self.diag.len()
    }

    /// Entries `H[k][k-1]`, k = 1..M.
    pub fn sub(&self) -> &[f64] {
        &self.sub
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    /// Entries `H[k][k+1]`, k = 0..M-1.
    pub fn sup(&self) -> &[f64] {
        &self.sup
    }

    pub fn coefficients(&self) -> &CoefficientSet {
        &self.coeffs
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diag[i]
        } else if i == j + 1 {
            self.sub[j]
        } else if j == i + 1 {
            self.sup[i]
        } else {
            0.0
        }
    }

    /// `J H J` by index reflection.
    pub fn reflected(&self) -> HeunMatrix {
        HeunMatrix::from_coefficients(self.coeffs.reflected())
    }

    /// `H f`.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let n = self.size();
        assert_eq!(f.len(), n, "vector length must equal the matrix size");
        (0..n)
            .map(|k| {
                let mut y = self.diag[k] * f[k];
                if k > 0 {
                    y += self.sub[k - 1] * f[k - 1];
                }
                if k + 1 < n {
                    y += self.sup[k] * f[k + 1];
                }
                y
            })
            .collect()
    }

    pub fn trace(&self) -> f64 {
        self.diag.iter().sum()
    }

    /// `tr(H²) = Σ b_k² + 2 Σ a_{k+1} ã_{M-k}`.
    pub fn trace_of_square(&self) -> f64 {
        let d: f64 = self.diag.iter().map(|b| b * b).sum();
        let o: f64 = self.sub.iter().zip(&self.sup).map(|(a, c)| a * c).sum();
        d + 2.0 * o
    }

    /// Symmetrizes by the diagonal similarity `D = diag(√Δ_k)`,
    /// `Δ_k = ∏_{l≤k} ã_{M+1-l}/a_l`.
    pub fn symmetrize(&self) -> Result<Symmetrized> {
        for (i, (&a, &c)) in self.sub.iter().zip(&self.sup).enumerate() {
            if !(a > 0.0) {
                return Err(Error::PositivityViolation { index: i + 1, value: a });
            }
            if !(c > 0.0) {
                return Err(Error::PositivityViolation { index: i + 1, value: c });
            }
        }
        let n = self.size();
        let mut weights = vec![1.0; n];
        for k in 1..n {
            weights[k] = weights[k - 1] * self.sup[k - 1] / self.sub[k - 1];
        }
        let scale: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
        let off: Vec<f64> = self
            .sub
            .iter()
            .zip(&self.sup)
            .map(|(a, c)| (a * c).sqrt())
            .collect();
        let mut residual = 0.0f64;
        for k in 1..n {
            let lower = scale[k] * self.sub[k - 1] / scale[k - 1];
            let upper = scale[k - 1] * self.sup[k - 1] / scale[k];
            residual = residual.max((lower - upper).abs() / lower.abs().max(upper.abs()));
        }
        Ok(Symmetrized {
            weights,
            scale,
            diag: self.diag.clone(),
            off,
            residual,
        })
    }

    /// Row-major dense copy, for small test oracles and output.
    pub fn dense(&self) -> Vec<Vec<f64>> {
        let n = self.size();
        (0..n).map(|i| (0..n).map(|j| self.entry(i, j)).collect()).collect()
    }
}

/// Symmetric tridiagonal `S = D H D⁻¹`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Symmetrized {
    /// `Δ_0..Δ_M`.
    pub weights: Vec<f64>,
    /// `√Δ_k`, the diagonal of `D`.
    pub scale: Vec<f64>,
    pub diag: Vec<f64>,
    /// `√(a_k ã_{M+1-k})`, k = 1..M.
    pub off: Vec<f64>,
    /// Largest relative asymmetry of the scaled off-diagonal pairs.
    pub residual: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{HalfPeriodPermutation, RawParams};

    fn params(m: usize) -> CouplingParams {
        let mut raw = RawParams::desk_default();
        raw.m = m;
        CouplingParams::validate(raw).unwrap()
    }

    #[test]
    fn one_by_one() {
        let h = HeunMatrix::build(&params(0)).unwrap();
        assert_eq!(h.size(), 1);
        assert!(h.sub().is_empty() && h.sup().is_empty());
        assert_eq!(h.dense(), vec![vec![h.coefficients().b()[0]]]);
    }

    #[test]
    fn band_layout_for_m2() {
        let h = HeunMatrix::build(&params(2)).unwrap();
        let c = h.coefficients();
        assert_eq!(h.sup(), &[c.a_tilde()[2], c.a_tilde()[1]]);
        assert_eq!(h.sub(), &[c.a()[1], c.a()[2]]);
        assert_eq!(h.entry(0, 1), c.a_tilde()[2]);
        assert_eq!(h.entry(2, 1), c.a()[2]);
        assert_eq!(h.entry(0, 2), 0.0);
    }

    #[test]
    fn reflection_equals_permuted_parameters() {
        let p = params(4);
        let h = HeunMatrix::build(&p).unwrap();
        let tilde = HeunMatrix::build(&p.permute(HalfPeriodPermutation::Pi2).unwrap()).unwrap();
        let jhj = h.reflected();
        let n = h.size();
        for i in 0..n {
            for j in 0..n {
                let (x, y) = (jhj.entry(i, j), tilde.entry(i, j));
                assert_eq!(x, h.entry(n - 1 - i, n - 1 - j));
                assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0), "({i},{j}): {x} vs {y}");
            }
        }
        assert_eq!(jhj.reflected(), h);
    }

    #[test]
    fn symmetrization() {
        let h = HeunMatrix::build(&params(5)).unwrap();
        let s = h.symmetrize().unwrap();
        let c = h.coefficients();
        let m = c.m();
        assert_eq!(s.weights[0], 1.0);
        assert!((s.off[0] - (c.a()[1] * c.a_tilde()[m]).sqrt()).abs() < 1e-15);
        for k in 0..m {
            let ratio = s.weights[k + 1] / s.weights[k];
            let expected = c.a_tilde()[m - k] / c.a()[k + 1];
            assert!((ratio - expected).abs() <= 1e-14 * expected);
        }
        assert!(s.residual < 1e-12);
    }

    #[test]
    fn apply_and_traces() {
        let h = HeunMatrix::build(&params(3)).unwrap();
        let dense = h.dense();
        let f = [0.3, -1.2, 0.5, 2.0];
        let hf = h.apply(&f);
        for i in 0..4 {
            let expected: f64 = (0..4).map(|j| dense[i][j] * f[j]).sum();
            assert!((hf[i] - expected).abs() < 1e-13);
        }
        let mut tr2 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                tr2 += dense[i][j] * dense[j][i];
            }
        }
        assert!((h.trace_of_square() - tr2).abs() < 1e-12 * tr2.abs());
    }
}
