//! The `p → 0` degeneration of the Heun coefficients, spectrum and
//! orthogonality measure, in closed trigonometric form.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::coeffs::CoefficientSet;
use crate::error::{Error, Result};
use crate::matrix::HeunMatrix;
use crate::params::{CouplingParams, HalfPeriodPermutation};
use crate::qracah::basic::{qpochhammer_multi, qpow};
use crate::qracah::params::{base, qracah_poly, real_part, QRacahParams};
use crate::qracah::precise::{terminating_sum, QPower};
use crate::racah::measure::{max_relative, twisted_values};
use crate::spectra;

/// Agreement required between the closed forms of the palindromic constants.
pub const EPSILON_FORM_TOL: f64 = 1e-10;
/// Agreement required between the evaluations of the total weight and norms.
pub const NORM_FORM_TOL: f64 = 1e-9;
/// Agreement required between the trigonometric and q-Racah weights.
pub const WEIGHT_FORM_TOL: f64 = 1e-10;
/// Agreement required between the closed and numerically computed spectrum.
pub const SPECTRUM_TOL: f64 = 1e-9;

/// Coefficients of the difference Heun operator at `p = 0`.
#[derive(Clone, Debug)]
pub struct TrigOperator {
    u: [f64; 4],
    v: [f64; 4],
    u_virtual: f64,
    m: usize,
    h: f64,
    c: [f64; 4],
}

impl TrigOperator {
    pub fn new(params: &CouplingParams) -> Self {
        let (u, v) = (*params.u(), *params.v());
        let h = params.alpha() / 2.0;
        let uu = params.u_virtual();
        let mut c = [0.0; 4];
        for (r, slot) in c.iter_mut().enumerate() {
            let perm = HalfPeriodPermutation::from_index(r + 1);
            let (s1, s2) = (perm.apply(1) - 1, perm.apply(2) - 1);
            *slot = 2.0 * (h * (u[s1] - 0.5)).sin() * (h * v[s1]).sin() * (h * (u[s2] - 0.5)).cos() * (h * v[s2]).cos()
                / ((h * uu).sin() * (h * (uu + 1.0)).sin());
        }
        TrigOperator {
            u,
            v,
            u_virtual: uu,
            m: params.m(),
            h,
            c,
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `c_{t,r}`, r = 1..4.
    pub fn c(&self, r: usize) -> f64 {
        self.c[r - 1]
    }

    /// `A_t(z)`.
    pub fn a(&self, z: f64) -> f64 {
        let (h, u, v) = (self.h, &self.u, &self.v);
        (h * (z + u[0])).sin() / (h * z).sin() * (h * (z + u[1])).cos() / (h * z).cos()
            * (h * (z + 0.5 + v[0])).sin()
            / (h * (z + 0.5)).sin()
            * (h * (z + 0.5 + v[1])).cos()
            / (h * (z + 0.5)).cos()
    }

    /// `B_t(z)`.
    pub fn b(&self, z: f64) -> f64 {
        let (h, uu) = (self.h, self.u_virtual);
        let sin_part = (h * (z + 0.5 + uu)).sin() / (h * (z + 0.5)).sin() * (h * (z - 0.5 - uu)).sin()
            / (h * (z - 0.5)).sin();
        let cos_part = (h * (z + 0.5 + uu)).cos() / (h * (z + 0.5)).cos() * (h * (z - 0.5 - uu)).cos()
            / (h * (z - 0.5)).cos();
        self.c[0] * sin_part + self.c[1] * cos_part + self.c[2] + self.c[3]
    }

    /// `s = u1 + u2 + v1 + v2`.
    fn s(&self) -> f64 {
        self.u[0] + self.u[1] + self.v[0] + self.v[1]
    }

    /// `C_t = 2 cos(α s/2) + Σ c_{t,r}`, the constant value of `A_t(z) + A_t(-z) + B_t(z)`.
    pub fn total(&self) -> f64 {
        2.0 * (self.h * self.s()).cos() + self.c.iter().sum::<f64>()
    }

    /// `a_{t,k}` as the displayed product of sines and cosines.
    pub fn a_closed(&self, k: usize) -> f64 {
        let (h, u, v) = (self.h, &self.u, &self.v);
        let k = k as f64;
        (h * k).sin() / (h * (u[0] + k)).sin() * (h * (u[0] - v[0] - 0.5 + k)).sin() / (h * (u[0] - 0.5 + k)).sin()
            * (h * (u[0] - u[1] + k)).cos()
            / (h * (u[0] + k)).cos()
            * (h * (u[0] - v[1] - 0.5 + k)).cos()
            / (h * (u[0] - 0.5 + k)).cos()
    }

    /// `ã_{t,k}` as the displayed product of sines and cosines.
    pub fn a_tilde_closed(&self, k: usize) -> f64 {
        let (h, u, v) = (self.h, &self.u, &self.v);
        let k = k as f64;
        (h * k).sin() / (h * (u[1] + k)).sin() * (h * (u[1] - v[1] - 0.5 + k)).sin() / (h * (u[1] - 0.5 + k)).sin()
            * (h * (u[1] - u[0] + k)).cos()
            / (h * (u[1] + k)).cos()
            * (h * (u[1] - v[0] - 0.5 + k)).cos()
            / (h * (u[1] - 0.5 + k)).cos()
    }

    /// Lattice values `a_{t,k} = A_t(-u1-k)`, `ã_{t,k} = A_t(u1+M-k)`,
    /// `b_{t,k} = B_t(u1+k)`.
    pub fn coefficient_set(&self) -> Result<CoefficientSet> {
        let m = self.m;
        let u1 = self.u[0];
        let mut a = vec![0.0; m + 1];
        let mut at = vec![0.0; m + 1];
        for k in 1..=m {
            a[k] = self.a(-u1 - k as f64);
            at[k] = self.a(u1 + (m - k) as f64);
        }
        let b = (0..=m).map(|k| self.b(u1 + k as f64)).collect();
        CoefficientSet::from_parts(a, at, b)
    }

    /// `E_{t,j} = 2 cos(α(2j + s)/2) + Σ c_{t,r}`.
    pub fn spectrum(&self) -> Vec<f64> {
        let shift: f64 = self.c.iter().sum();
        (0..=self.m)
            .map(|j| 2.0 * (self.h * (2.0 * j as f64 + self.s())).cos() + shift)
            .collect()
    }
}

/// The closed-form trigonometric spectral data and their cross-checks.
#[derive(Clone, Debug, Serialize)]
pub struct TrigTables {
    pub c: [f64; 4],
    pub total: f64,
    /// `E_{t,j}` from the closed formula.
    pub spectrum: Vec<f64>,
    /// Eigenvalues of the `p = 0` Heun matrix.
    pub spectrum_numeric: Vec<f64>,
    /// `f_{t,k}(E_{t,j})` from the ₄φ₃, indexed `[k][j]`.
    pub f: Vec<Vec<f64>>,
    /// The same values from the recurrence with the `p = 0` coefficients.
    pub f_recurrence: Vec<Vec<f64>>,
    pub delta: Vec<f64>,
    pub delta_hat: Vec<f64>,
    pub delta_q: Vec<f64>,
    pub delta_hat_q: Vec<f64>,
    pub total_weight: f64,
    pub total_weight_q: f64,
    pub total_weight_sum: f64,
    pub total_weight_hat_sum: f64,
    /// `1/ε_{t,j}` as the top-degree ₄φ₃, the reduced ₃φ₂, the Pochhammer
    /// quotient and the trigonometric product.
    pub eps_inv_phi43: Vec<f64>,
    pub eps_inv_phi32: Vec<f64>,
    pub eps_inv_pochhammer: Vec<f64>,
    pub eps_inv_trig: Vec<f64>,
    /// `N_{t,j}` from the spectrum, its expanded form, and `N_{t,0}/Δ̂_{t,j}`.
    pub norms: Vec<f64>,
    pub norms_expanded: Vec<f64>,
    pub norms_hat: Vec<f64>,
    /// `N_{t,0}⁻¹ Δ̂ F_tᵀ Δ`, indexed `[j][k]`.
    pub inverse: Vec<Vec<f64>>,
    pub det_elimination: f64,
    pub det_closed: f64,
}

impl TrigTables {
    pub fn m(&self) -> usize {
        self.spectrum.len() - 1
    }

    /// `max |F_t⁻¹ F_t - I|`.
    pub fn inverse_residual(&self) -> f64 {
        let n = self.spectrum.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let x: f64 = (0..n).map(|k| self.inverse[i][k] * self.f[k][j]).sum();
                worst = worst.max((x - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        worst
    }

    pub fn det_residual(&self) -> f64 {
        (self.det_elimination - self.det_closed).abs() / self.det_closed.abs()
    }

    /// Closed spectrum against the eigenvalues of the `p = 0` matrix, relative
    /// to `max(1, max|E|)`.
    pub fn spectrum_residual(&self) -> f64 {
        max_abs_diff(&self.spectrum, &self.spectrum_numeric) / self.spectrum.iter().fold(1.0f64, |a, e| a.max(e.abs()))
    }

    /// ₄φ₃ values against the `p = 0` recurrence.
    pub fn polynomial_residual(&self) -> f64 {
        self.f
            .iter()
            .zip(&self.f_recurrence)
            .flat_map(|(x, y)| x.iter().zip(y).map(|(a, b)| (a - b).abs() / a.abs().max(1.0)))
            .fold(0.0, f64::max)
    }

    pub fn weight_residual(&self) -> f64 {
        max_relative(&self.delta, &self.delta_q).max(max_relative(&self.delta_hat, &self.delta_hat_q))
    }

    pub fn total_weight_residual(&self) -> f64 {
        let n0 = self.total_weight;
        max_relative(
            &[n0, n0, n0],
            &[self.total_weight_q, self.total_weight_sum, self.total_weight_hat_sum],
        )
    }

    pub fn epsilon_residual(&self) -> f64 {
        max_relative(&self.eps_inv_trig, &self.eps_inv_phi43)
            .max(max_relative(&self.eps_inv_trig, &self.eps_inv_phi32))
            .max(max_relative(&self.eps_inv_trig, &self.eps_inv_pochhammer))
    }

    pub fn norm_residual(&self) -> f64 {
        max_relative(&self.norms, &self.norms_expanded).max(max_relative(&self.norms, &self.norms_hat))
    }

    /// Compares the closed forms that must agree identically.
    pub fn check(&self) -> Result<()> {
        let checks = [
            ("trigonometric spectrum", self.spectrum_residual(), SPECTRUM_TOL),
            ("trigonometric weights", self.weight_residual(), WEIGHT_FORM_TOL),
            ("total trigonometric weight", self.total_weight_residual(), NORM_FORM_TOL),
            ("trigonometric palindromic constants", self.epsilon_residual(), EPSILON_FORM_TOL),
            ("trigonometric norms", self.norm_residual(), NORM_FORM_TOL),
        ];
        for (quantity, residual, tol) in checks {
            if !(residual <= tol) {
                return Err(Error::FormMismatch { quantity, residual });
            }
        }
        Ok(())
    }
}

fn sign(n: usize) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Evaluates every closed form of the trigonometric limit and checks the
/// forms that must agree identically.
pub fn trig_tables(params: &CouplingParams) -> Result<TrigTables> {
    let tables = trig_tables_unchecked(params)?;
    tables.check()?;
    Ok(tables)
}

/// Evaluates every closed form of the trigonometric limit without comparing them.
pub fn trig_tables_unchecked(params: &CouplingParams) -> Result<TrigTables> {
    let op = TrigOperator::new(params);
    let qp = QRacahParams::from_coupling(params);
    let m = params.m();
    let n = m + 1;
    let h = params.alpha() / 2.0;
    let alpha = params.alpha();
    let (u, v) = (params.u(), params.v());
    let (u1, u2, v1, v2) = (u[0], u[1], v[0], v[1]);
    let s = u1 + u2 + v1 + v2;
    let q = |x: f64| qpow(alpha, x);
    let sin = |x: f64| (h * x).sin();
    let cos = |x: f64| (h * x).cos();

    let spectrum = op.spectrum();
    let coeffs = op.coefficient_set()?;
    let spectrum_numeric = spectra::eigenvalues(&HeunMatrix::from_coefficients(coeffs.clone()))?
        .values()
        .to_vec();

    let mut f = vec![vec![0.0; n]; n];
    for (k, row) in f.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = qracah_poly(k, j, params)?;
        }
    }
    let columns: Vec<Vec<f64>> = spectrum.iter().map(|&e| twisted_values(&coeffs, e)).collect();
    let f_recurrence: Vec<Vec<f64>> = (0..n).map(|k| (0..n).map(|j| columns[j][k]).collect()).collect();

    let mut delta = vec![1.0; n];
    let mut delta_hat = vec![1.0; n];
    let (mut prod, mut prod_hat) = (1.0, 1.0);
    let mf = m as f64;
    for k in 1..=m {
        let l = k as f64;
        prod *= sin(mf + 1.0 - l) * sin(u2 - v2 + mf + 0.5 - l) / (sin(l) * sin(u1 - v1 - 0.5 + l))
            * cos(u2 - u1 + mf + 1.0 - l)
            * cos(u2 - v1 + mf + 0.5 - l)
            / (cos(u1 - u2 + l) * cos(u1 - v2 - 0.5 + l));
        delta[k] = (alpha * (u1 + l)).sin() / (alpha * u1).sin() * prod;
        prod_hat *= sin(mf + 1.0 - l) * sin(u2 - v2 + mf + 0.5 - l) / (sin(l) * sin(u2 + v2 - 0.5 + l))
            * cos(-v1 - v2 + mf + 1.0 - l)
            * cos(u2 - v1 + mf + 0.5 - l)
            / (cos(v1 + v2 + l) * cos(u2 + v1 - 0.5 + l));
        delta_hat[k] = sin(s + 2.0 * l) / sin(s) * prod_hat;
    }
    let dual = qp.dual();
    let delta_q: Vec<f64> = (0..n).map(|k| real_part(qp.weight(k))).collect::<Result<_>>()?;
    let delta_hat_q: Vec<f64> = (0..n).map(|k| real_part(dual.weight(k))).collect::<Result<_>>()?;

    let total_weight: f64 = (1..=m)
        .map(|l| {
            let l = l as f64;
            sin(2.0 * u1 + l) * sin(s + l) / (sin(u1 - v1 - 0.5 + l) * sin(u2 + v2 - 0.5 + l))
        })
        .product();
    let total_weight_q = real_part(qp.total_weight())?;
    let total_weight_sum: f64 = delta.iter().sum();
    let total_weight_hat_sum: f64 = delta_hat.iter().sum();

    let mut eps_inv_phi43 = Vec::with_capacity(n);
    let mut eps_inv_phi32 = Vec::with_capacity(n);
    let mut eps_inv_pochhammer = Vec::with_capacity(n);
    let mut eps_inv_trig = Vec::with_capacity(n);
    for j in 0..n {
        let jf = j as f64;
        eps_inv_phi43.push(f[m][j]);
        let (phi32, _) = terminating_sum(
            &base(params),
            &[
                QPower::new(true, &[u1, -u2]),
                QPower::pow(-jf),
                QPower::new(false, &[u1, u2, v1, v2, jf]),
            ],
            &[QPower::new(false, &[u1, v1, 0.5]), QPower::new(true, &[u1, v2, 0.5])],
            &QPower::pow(1.0),
            j,
        )?;
        eps_inv_phi32.push(real_part(phi32)?);
        let poch = qpochhammer_multi(&[-q(u2 + v1 + 0.5), q(-u2 - v2 + 0.5 - jf)], q(1.0), j)
            / qpochhammer_multi(&[q(u1 + v1 + 0.5), -q(-u1 - v2 + 0.5 - jf)], q(1.0), j);
        eps_inv_pochhammer.push(real_part(poch)?);
        let trig: f64 = (0..j)
            .map(|l| {
                let l = l as f64;
                sin(u2 + v2 + 0.5 + l) / sin(u1 + v1 + 0.5 + l) * cos(u2 + v1 + 0.5 + l) / cos(u1 + v2 + 0.5 + l)
            })
            .product();
        eps_inv_trig.push(sign(j) * trig);
    }

    let vandermonde = |j: usize| -> f64 {
        (0..n)
            .filter(|&l| l != j)
            .map(|l| spectrum[j] - spectrum[l])
            .product()
    };
    let a_prod: f64 = (1..=m).map(|k| op.a_closed(k)).product();
    let expanded: f64 = (1..=m)
        .map(|k| {
            let k = k as f64;
            sin(u1 + k) / sin(k) * sin(u1 - 0.5 + k) / sin(u1 - v1 - 0.5 + k) * cos(u1 + k) / cos(u1 - u2 + k)
                * cos(u1 - 0.5 + k)
                / cos(u1 - v2 - 0.5 + k)
        })
        .product();
    let norms: Vec<f64> = (0..n).map(|j| eps_inv_trig[j] * vandermonde(j) / a_prod).collect();
    let norms_expanded: Vec<f64> = (0..n).map(|j| eps_inv_trig[j] * expanded * vandermonde(j)).collect();
    let norms_hat: Vec<f64> = delta_hat.iter().map(|d| total_weight / d).collect();

    let inverse: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|k| delta_hat[j] * f[k][j] * delta[k] / total_weight).collect())
        .collect();
    let det_elimination = DMatrix::from_fn(n, n, |k, j| f[k][j]).lu().determinant();
    let det_closed = sign(m * (m + 1) / 2) * total_weight.powf(0.5 * n as f64)
        / delta.iter().zip(&delta_hat).map(|(a, b)| a * b).product::<f64>().sqrt();

    Ok(TrigTables {
        c: op.c,
        total: op.total(),
        spectrum,
        spectrum_numeric,
        f,
        f_recurrence,
        delta,
        delta_hat,
        delta_q,
        delta_hat_q,
        total_weight,
        total_weight_q,
        total_weight_sum,
        total_weight_hat_sum,
        eps_inv_phi43,
        eps_inv_phi32,
        eps_inv_pochhammer,
        eps_inv_trig,
        norms,
        norms_expanded,
        norms_hat,
        inverse,
        det_elimination,
        det_closed,
    })
}

fn max_abs_diff(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}
