//! Eigenvectors, orthogonality weights, palindromic constants, norms and the
//! discrete Heun functions.

use crate::coeffs::CoefficientSet;
use crate::error::{Error, Result};
use crate::params::{CouplingParams, HalfPeriodPermutation};
use crate::racah::poly;
use crate::spectra::{Spectrum, ON_SHELL_TOL};
use crate::theta::ThetaContext;

/// Agreement required between the ratio and theta forms of the weights.
pub const WEIGHT_FORM_TOL: f64 = 1e-10;
/// Agreement required between the compact and expanded norm formulas.
pub const NORM_FORM_TOL: f64 = 1e-9;
/// Tolerance on `ε_j ε̃_j = 1`.
pub const EPSILON_PRODUCT_TOL: f64 = 1e-10;

/// `f_k(E) = p_k(E) ∏_{j<k} ã_{M-j}^{-1}` for k = 0..M, via the rows of `H f = E f`.
pub fn normalized_values(coeffs: &CoefficientSet, e: f64) -> Vec<f64> {
    let m = coeffs.m();
    let (a, at, b) = (coeffs.a(), coeffs.a_tilde(), coeffs.b());
    let mut f = Vec::with_capacity(m + 1);
    f.push(1.0);
    for k in 0..m {
        let prev = if k == 0 { 0.0 } else { a[k] * f[k - 1] };
        f.push(((e - b[k]) * f[k] - prev) / at[m - k]);
    }
    f
}

/// `f(E)` with `f_0 = 1` from a twisted solve of `H f = E f`: ratios
/// `f_k/f_{k-1}` are run down from the top row and `f_k/f_{k+1}` up from the
/// bottom row, and the two meet at the row where they agree best.
///
/// Each recursion only runs towards the bulk of the vector, so components in
/// an exponentially small tail keep their relative accuracy; plain forward
/// recurrence loses it.
pub fn twisted_values(coeffs: &CoefficientSet, e: f64) -> Vec<f64> {
    let m = coeffs.m();
    if m == 0 {
        return vec![1.0];
    }
    let (a, at, b) = (coeffs.a(), coeffs.a_tilde(), coeffs.b());
    let scale = b.iter().fold(e.abs(), |s, x| s.max(x.abs())).max(f64::MIN_POSITIVE);
    let guard = |x: f64| if x == 0.0 { f64::EPSILON * scale } else { x };

    // rho[k] = f_k / f_{k-1}, k = 1..M
    let mut rho = vec![0.0; m + 1];
    rho[1] = guard((e - b[0]) / at[m]);
    for k in 2..=m {
        rho[k] = guard((e - b[k - 1] - a[k - 1] / rho[k - 1]) / at[m + 1 - k]);
    }
    // sigma[k] = f_k / f_{k+1}, k = 0..M-1
    let mut sigma = vec![0.0; m + 1];
    sigma[m - 1] = guard((e - b[m]) / a[m]);
    for k in (0..m - 1).rev() {
        sigma[k] = guard((e - b[k + 1] - at[m - k - 1] / sigma[k + 1]) / a[k + 1]);
    }

    let mut twist = 0;
    let mut best = f64::INFINITY;
    for r in 0..=m {
        let mut gamma = b[r] - e;
        if r > 0 {
            gamma += a[r] / rho[r];
        }
        if r < m {
            gamma += at[m - r] / sigma[r];
        }
        if gamma.abs() < best {
            best = gamma.abs();
            twist = r;
        }
    }

    let mut g = vec![0.0; m + 1];
    g[twist] = 1.0;
    for k in (0..twist).rev() {
        g[k] = g[k + 1] / rho[k + 1];
    }
    for k in twist + 1..=m {
        g[k] = g[k - 1] / sigma[k - 1];
    }
    let g0 = g[0];
    g.iter().map(|x| x / g0).collect()
}

/// The eigenvector `f(E)` with `f_0 = 1`; `E` must be a root of `p_{M+1}`.
pub fn eigenvector(coeffs: &CoefficientSet, e: f64) -> Result<Vec<f64>> {
    let shell = poly::evaluate(coeffs, e, coeffs.m() + 1).relative_last();
    if !(shell <= ON_SHELL_TOL) {
        return Err(Error::OffShell {
            energy: e,
            residual: shell,
        });
    }
    Ok(twisted_values(coeffs, e))
}

/// `Δ_k = ∏_{l≤k} ã_{M+1-l}/a_l`.
pub fn weights_ratio(coeffs: &CoefficientSet) -> Vec<f64> {
    let m = coeffs.m();
    let mut w = vec![1.0; m + 1];
    for k in 1..=m {
        w[k] = w[k - 1] * coeffs.a_tilde()[m + 1 - k] / coeffs.a()[k];
    }
    w
}

/// The weights written directly as theta ratios of the coupling parameters.
pub fn weights_closed(params: &CouplingParams, ctx: &ThetaContext) -> Vec<f64> {
    let m = params.m();
    let (u, v) = (params.u(), params.v());
    let pi2 = HalfPeriodPermutation::Pi2;
    let th = |r: usize, z: f64| ctx.scaled(r, z);
    let mut w = vec![1.0; m + 1];
    let mut prod = 1.0;
    for k in 1..=m {
        let l = k as f64;
        for r in 1..=4 {
            let s = pi2.apply(r) - 1;
            let num = th(r, u[1] - u[s] + m as f64 + 1.0 - l) * th(r, u[1] - v[s] + m as f64 + 0.5 - l);
            let den = th(r, u[0] - u[r - 1] + l) * th(r, u[0] - v[r - 1] - 0.5 + l);
            prod *= num / den;
        }
        w[k] = th(1, 2.0 * u[0] + 2.0 * l) / th(1, 2.0 * u[0]) * prod;
    }
    w
}

/// Weights in the ratio form, cross-checked against the theta form.
pub fn weights(coeffs: &CoefficientSet, params: &CouplingParams, ctx: &ThetaContext) -> Result<Vec<f64>> {
    let ratio = weights_ratio(coeffs);
    let closed = weights_closed(params, ctx);
    let residual = max_relative(&ratio, &closed);
    if !(residual <= WEIGHT_FORM_TOL) {
        return Err(Error::FormMismatch {
            quantity: "weights",
            residual,
        });
    }
    for (k, &w) in ratio.iter().enumerate() {
        if !(w > 0.0) {
            return Err(Error::PositivityViolation { index: k, value: w });
        }
    }
    Ok(ratio)
}

/// `ε_j = p̃_M(E_j)/(a_1⋯a_M)` and `ε̃_j = p_M(E_j)/(ã_1⋯ã_M)`.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct Epsilons {
    pub eps: Vec<f64>,
    pub eps_tilde: Vec<f64>,
}

impl Epsilons {
    /// `max_j |ε_j ε̃_j - 1|`.
    pub fn product_residual(&self) -> f64 {
        self.eps
            .iter()
            .zip(&self.eps_tilde)
            .map(|(e, t)| (e * t - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Evaluates the palindromic constants. `tilde` is the coefficient set of the
/// `π_2`-permuted parameters.
pub fn epsilons(coeffs: &CoefficientSet, tilde: &CoefficientSet, spectrum: &Spectrum) -> Result<Epsilons> {
    let m = coeffs.m();
    let mut eps = Vec::with_capacity(m + 1);
    let mut eps_tilde = Vec::with_capacity(m + 1);
    for (j, &e) in spectrum.values().iter().enumerate() {
        // p_M = f_M ∏ã and p̃_M = f̃_M ∏a, so both constants are top components
        let (x, y) = (twisted_values(tilde, e)[m], twisted_values(coeffs, e)[m]);
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        if !(x * sign > 0.0) {
            return Err(Error::SignPatternViolation { index: j, value: x });
        }
        if !(y * sign > 0.0) {
            return Err(Error::SignPatternViolation { index: j, value: y });
        }
        let residual = (x * y - 1.0).abs();
        if !(residual <= EPSILON_PRODUCT_TOL) {
            return Err(Error::ProductIdentityViolation { index: j, residual });
        }
        eps.push(x);
        eps_tilde.push(y);
    }
    Ok(Epsilons { eps, eps_tilde })
}

/// `N_j = ∏_{l≠j}|E_j - E_l| / (|ε_j| a_1⋯a_M)`.
pub fn norms_compact(coeffs: &CoefficientSet, spectrum: &Spectrum, eps: &[f64]) -> Vec<f64> {
    let a_prod = coeffs.a_product();
    (0..spectrum.len())
        .map(|j| spectrum.vandermonde_derivative(j).abs() / (eps[j].abs() * a_prod))
        .collect()
}

/// The norms with `1/(a_1⋯a_M)` written out as theta ratios.
pub fn norms_expanded(params: &CouplingParams, ctx: &ThetaContext, spectrum: &Spectrum, eps: &[f64]) -> Vec<f64> {
    let (u, v) = (params.u(), params.v());
    let mut prod = 1.0;
    for k in 1..=params.m() {
        let k = k as f64;
        for r in 1..=4 {
            prod *= ctx.scaled(r, u[0] + k) * ctx.scaled(r, u[0] - 0.5 + k)
                / (ctx.scaled(r, u[0] - u[r - 1] + k) * ctx.scaled(r, u[0] - v[r - 1] - 0.5 + k));
        }
    }
    (0..spectrum.len())
        .map(|j| prod * spectrum.vandermonde_derivative(j).abs() / eps[j].abs())
        .collect()
}

/// Quadratic norms, compact form checked against the expanded form.
pub fn norms(
    coeffs: &CoefficientSet,
    params: &CouplingParams,
    ctx: &ThetaContext,
    spectrum: &Spectrum,
    eps: &[f64],
) -> Result<Vec<f64>> {
    let compact = norms_compact(coeffs, spectrum, eps);
    let expanded = norms_expanded(params, ctx, spectrum, eps);
    let residual = max_relative(&compact, &expanded);
    if !(residual <= NORM_FORM_TOL) {
        return Err(Error::FormMismatch {
            quantity: "norms",
            residual,
        });
    }
    Ok(compact)
}

/// Relative residuals of the two Christoffel–Darboux identities.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct CdResidual {
    /// Kernel form at `(x, y)`.
    pub kernel: f64,
    /// Confluent form at `x`.
    pub confluent: f64,
}

/// Evaluates both sides of the Christoffel–Darboux kernel identity at `(x, y)`
/// and of its confluent form at `x`, for the partial sum up to `n ≤ M`.
pub fn christoffel_darboux_check(coeffs: &CoefficientSet, x: f64, y: f64, n: usize) -> CdResidual {
    assert!(n <= coeffs.m(), "n must not exceed M");
    let (px, dx) = poly::poly_and_derivative(coeffs, x, n + 1);
    let py = poly::poly_recurrence(coeffs, y, n + 1);
    let mut norm = 1.0;
    let (mut lhs, mut scale) = (0.0, 0.0);
    let (mut lhs_c, mut scale_c) = (0.0, 0.0);
    for k in 0..=n {
        if k > 0 {
            norm *= coeffs.recurrence_weight(k);
        }
        let t = px[k] * py[k] / norm;
        lhs += t;
        scale += t.abs();
        let tc = px[k] * px[k] / norm;
        lhs_c += tc;
        scale_c += tc;
    }
    let rhs = (px[n + 1] * py[n] - px[n] * py[n + 1]) / ((x - y) * norm);
    let rhs_c = (dx[n + 1] * px[n] - dx[n] * px[n + 1]) / norm;
    CdResidual {
        kernel: (lhs - rhs).abs() / scale.max(f64::MIN_POSITIVE),
        confluent: (lhs_c - rhs_c).abs() / scale_c.max(f64::MIN_POSITIVE),
    }
}

/// `∏_{l≤k} ã_{M+1-l} ∏_{l>k} a_l`, the weight of the Heun-function orthogonality.
pub fn heun_weight(coeffs: &CoefficientSet, k: usize) -> f64 {
    let m = coeffs.m();
    let lower: f64 = (1..=k).map(|l| coeffs.a_tilde()[m + 1 - l]).product();
    let upper: f64 = (k + 1..=m).map(|l| coeffs.a()[l]).product();
    lower * upper
}

/// `h_k(E_j) = |ε_j|^{1/2} f_k(E_j)`, indexed `[k][j]`.
pub fn heun_functions(f: &[Vec<f64>], eps: &[f64]) -> Vec<Vec<f64>> {
    f.iter()
        .map(|row| row.iter().zip(eps).map(|(x, e)| e.abs().sqrt() * x).collect())
        .collect()
}

/// Largest deviations of a Gram matrix from its expected diagonal form.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct GramResidual {
    /// `max_{i≠j} |G_ij| / √(D_i D_j)`.
    pub off_diagonal: f64,
    /// `max_j |G_jj - D_j| / D_j`.
    pub diagonal: f64,
}

/// Compares `G_ij = Σ_k x_k[i] x_k[j] w_k` against `diag(expected)`.
/// `x` is indexed `[k][i]`.
pub fn gram_residual(x: &[Vec<f64>], w: &[f64], expected: &[f64]) -> GramResidual {
    let n = expected.len();
    let mut off: f64 = 0.0;
    let mut diag: f64 = 0.0;
    for i in 0..n {
        for j in 0..=i {
            let g: f64 = x.iter().zip(w).map(|(row, wk)| row[i] * row[j] * wk).sum();
            if i == j {
                diag = diag.max((g - expected[j]).abs() / expected[j].abs());
            } else {
                off = off.max(g.abs() / (expected[i] * expected[j]).abs().sqrt());
            }
        }
    }
    GramResidual {
        off_diagonal: off,
        diagonal: diag,
    }
}

/// Transpose of a `[row][col]` table.
pub fn transpose(x: &[Vec<f64>]) -> Vec<Vec<f64>> {
    if x.is_empty() {
        return Vec::new();
    }
    (0..x[0].len()).map(|c| x.iter().map(|row| row[c]).collect()).collect()
}

pub(crate) fn max_relative(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| {
            let s = a.abs().max(b.abs());
            if s == 0.0 {
                0.0
            } else {
                (a - b).abs() / s
            }
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::HeunMatrix;
    use crate::params::RawParams;
    use crate::spectra::{eigenvalues, residual};

    struct Setup {
        params: CouplingParams,
        coeffs: CoefficientSet,
        tilde: CoefficientSet,
        h: HeunMatrix,
        spectrum: Spectrum,
    }

    fn setup(raw: RawParams) -> Setup {
        let params = CouplingParams::validate(raw).unwrap();
        let h = HeunMatrix::build(&params).unwrap();
        let tilde = HeunMatrix::build(&params.permute(HalfPeriodPermutation::Pi2).unwrap())
            .unwrap()
            .coefficients()
            .clone();
        let spectrum = eigenvalues(&h).unwrap();
        Setup {
            params,
            coeffs: h.coefficients().clone(),
            tilde,
            h,
            spectrum,
        }
    }

    fn desk(m: usize) -> Setup {
        let mut raw = RawParams::desk_default();
        raw.m = m;
        setup(raw)
    }

    #[test]
    fn eigenvectors_solve_the_eigenproblem() {
        let s = desk(8);
        for &e in s.spectrum.values() {
            let f = eigenvector(&s.coeffs, e).unwrap();
            assert_eq!(f[0], 1.0);
            assert!(residual(&s.h, e, &f) < 1e-9);
        }
        let off = s.spectrum.get(0) + 0.1;
        assert!(matches!(eigenvector(&s.coeffs, off), Err(Error::OffShell { .. })));
    }

    #[test]
    fn normalized_values_match_scaled_polynomials() {
        let s = desk(5);
        let e = 0.123;
        let p = poly::poly_recurrence(&s.coeffs, e, 5);
        let f = normalized_values(&s.coeffs, e);
        let mut norm = 1.0;
        for k in 0..=5 {
            if k > 0 {
                norm *= s.coeffs.a_tilde()[5 - (k - 1)];
            }
            assert!((f[k] - p[k] / norm).abs() <= 1e-12 * f[k].abs().max(1.0));
        }
    }

    #[test]
    fn m1_eigenvector_by_hand() {
        let s = desk(1);
        for &e in s.spectrum.values() {
            let f = eigenvector(&s.coeffs, e).unwrap();
            let (a, at, b) = (s.coeffs.a(), s.coeffs.a_tilde(), s.coeffs.b());
            assert!((f[1] - (e - b[0]) / at[1]).abs() < 1e-14);
            assert!((a[1] * f[0] + b[1] * f[1] - e * f[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn weight_forms_agree() {
        let s = desk(7);
        let ctx = s.params.theta_context().unwrap();
        let w = weights(&s.coeffs, &s.params, &ctx).unwrap();
        assert_eq!(w[0], 1.0);
        assert!(w.iter().all(|&x| x > 0.0));
        let sym = s.h.symmetrize().unwrap().weights;
        assert!(max_relative(&w, &sym) < 1e-14);
    }

    #[test]
    fn palindromic_constants() {
        let s = desk(6);
        let eps = epsilons(&s.coeffs, &s.tilde, &s.spectrum).unwrap();
        assert!(eps.product_residual() < 1e-10);
        for (j, e) in eps.eps.iter().enumerate() {
            assert_eq!(e.signum(), if j % 2 == 0 { 1.0 } else { -1.0 });
        }
        // f_M(E_j) = ε̃_j
        for (j, &e) in s.spectrum.values().iter().enumerate() {
            let f = twisted_values(&s.coeffs, e);
            assert!((f[6] - eps.eps_tilde[j]).abs() <= 1e-10 * f[6].abs());
        }
    }

    #[test]
    fn centrosymmetric_slice_has_unit_epsilons() {
        let raw = RawParams {
            u: [1.1, 1.1, 0.3, 0.3],
            v: [0.2, 0.2, -0.4, -0.4],
            u_virtual: 0.41,
            m: 6,
            p: 0.12,
        };
        let s = setup(raw);
        assert!(s.params.is_centrosymmetric());
        let eps = epsilons(&s.coeffs, &s.tilde, &s.spectrum).unwrap();
        for (j, e) in eps.eps.iter().enumerate() {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            assert!((e - sign).abs() < 1e-10, "j={j}: {e}");
        }
    }

    #[test]
    fn norm_forms_and_orthogonality() {
        let s = desk(9);
        let ctx = s.params.theta_context().unwrap();
        let w = weights(&s.coeffs, &s.params, &ctx).unwrap();
        let eps = epsilons(&s.coeffs, &s.tilde, &s.spectrum).unwrap();
        let n = norms(&s.coeffs, &s.params, &ctx, &s.spectrum, &eps.eps).unwrap();
        let f: Vec<Vec<f64>> = transpose(
            &s.spectrum
                .values()
                .iter()
                .map(|&e| twisted_values(&s.coeffs, e))
                .collect::<Vec<_>>(),
        );
        let g = gram_residual(&f, &w, &n);
        assert!(g.off_diagonal < 1e-8 && g.diagonal < 1e-8, "{g:?}");
    }

    #[test]
    fn trivial_norm_for_m0() {
        let s = desk(0);
        let ctx = s.params.theta_context().unwrap();
        let eps = epsilons(&s.coeffs, &s.tilde, &s.spectrum).unwrap();
        assert_eq!(eps.eps, vec![1.0]);
        let n = norms(&s.coeffs, &s.params, &ctx, &s.spectrum, &eps.eps).unwrap();
        assert_eq!(n, vec![1.0]);
    }

    #[test]
    fn christoffel_darboux() {
        let s = desk(6);
        let r0 = christoffel_darboux_check(&s.coeffs, 0.3, -0.8, 0);
        assert!(r0.kernel < 1e-15 && r0.confluent < 1e-15);
        for n in 0..=6 {
            let r = christoffel_darboux_check(&s.coeffs, 1.7, -0.45, n);
            assert!(r.kernel < 1e-10 && r.confluent < 1e-10, "n={n}: {r:?}");
        }
    }

    #[test]
    fn confluent_sum_at_eigenvalue() {
        let s = desk(5);
        let m = 5;
        let mut norm = 1.0;
        for k in 1..=m {
            norm *= s.coeffs.recurrence_weight(k);
        }
        for (j, &e) in s.spectrum.values().iter().enumerate() {
            let p = poly::poly_recurrence(&s.coeffs, e, m);
            let lhs: f64 = {
                let mut acc = 0.0;
                let mut wn = 1.0;
                for k in 0..=m {
                    if k > 0 {
                        wn *= s.coeffs.recurrence_weight(k);
                    }
                    acc += p[k] * p[k] / wn;
                }
                acc
            };
            let rhs = s.spectrum.vandermonde_derivative(j) * p[m] / norm;
            assert!((lhs - rhs).abs() <= 1e-9 * lhs, "j={j}");
        }
    }

    #[test]
    fn heun_function_orthogonality() {
        let s = desk(7);
        let eps = epsilons(&s.coeffs, &s.tilde, &s.spectrum).unwrap();
        let f = transpose(
            &s.spectrum
                .values()
                .iter()
                .map(|&e| twisted_values(&s.coeffs, e))
                .collect::<Vec<_>>(),
        );
        let h = heun_functions(&f, &eps.eps);
        for j in 0..8 {
            assert!((h[0][j] - eps.eps[j].abs().sqrt()).abs() < 1e-15);
        }
        let w: Vec<f64> = (0..8).map(|k| heun_weight(&s.coeffs, k)).collect();
        let d: Vec<f64> = (0..8).map(|j| s.spectrum.vandermonde_derivative(j).abs()).collect();
        let g = gram_residual(&h, &w, &d);
        assert!(g.off_diagonal < 1e-8 && g.diagonal < 1e-8, "{g:?}");
        let inv_d: Vec<f64> = d.iter().map(|x| 1.0 / x).collect();
        let inv_w: Vec<f64> = w.iter().map(|x| 1.0 / x).collect();
        let dual = gram_residual(&transpose(&h), &inv_d, &inv_w);
        assert!(dual.off_diagonal < 1e-8 && dual.diagonal < 1e-8, "{dual:?}");
    }
}
