//! Numerical verification of every structural identity, reported as one
//! residual per identity (maximized over the main parameter set and a batch
//! of seeded random draws).

use num_complex::Complex64;
use serde::Serialize;

use crate::coeffs::{covariance_residual, DifferenceHeun};
use crate::error::Result;
use crate::matrix::HeunMatrix;
use crate::params::{CouplingParams, HalfPeriodPermutation};
use crate::qracah::basic::qpow;
use crate::qracah::{trig_tables_unchecked, QRacahParams, TrigOperator};
use crate::racah::eigenbasis::racah_matrix_unchecked;
use crate::racah::measure::{
    christoffel_darboux_check, gram_residual, heun_functions, heun_weight, max_relative, norms_compact,
    norms_expanded, transpose, twisted_values, weights_closed, weights_ratio,
};
use crate::racah::poly::{self, poly_expansion_with_scale, EXPANSION_CAP};
use crate::sampling::{self, MAX_DESK_M};
use crate::spectra::{self, Spectrum};
use crate::theta::ThetaContext;

/// Largest degree compared between the recurrence and the explicit expansion.
pub const EXPANSION_CHECK_DEGREE: usize = 12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityReport {
    pub name: &'static str,
    pub max_residual: f64,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub draws: usize,
    pub identities: Vec<IdentityReport>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.identities.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> Vec<&'static str> {
        self.identities.iter().filter(|r| !r.passed).map(|r| r.name).collect()
    }

    pub fn get(&self, name: &str) -> Option<&IdentityReport> {
        self.identities.iter().find(|r| r.name == name)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Random parameter draws checked in addition to the main set.
    pub draws: usize,
    pub max_m: usize,
    /// Replaces every tolerance except the exact sign and positivity counts.
    pub tol_override: Option<f64>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 0,
            draws: 8,
            max_m: MAX_DESK_M,
            tol_override: None,
        }
    }
}

struct Entry {
    name: &'static str,
    threshold: f64,
    exact: bool,
    worst: f64,
}

#[derive(Default)]
struct Accumulator {
    entries: Vec<Entry>,
}

impl Accumulator {
    fn put(&mut self, name: &'static str, threshold: f64, residual: f64) {
        self.insert(name, threshold, false, residual);
    }

    /// A count of violations that must be zero.
    fn count(&mut self, name: &'static str, violations: usize) {
        self.insert(name, 0.0, true, violations as f64);
    }

    fn insert(&mut self, name: &'static str, threshold: f64, exact: bool, residual: f64) {
        let entry = match self.entries.iter_mut().find(|e| e.name == name) {
            Some(e) => e,
            None => {
                self.entries.push(Entry {
                    name,
                    threshold,
                    exact,
                    worst: 0.0,
                });
                self.entries.last_mut().unwrap()
            }
        };
        if residual.is_nan() || residual > entry.worst {
            entry.worst = residual;
        }
    }

    fn finish(self, tol_override: Option<f64>, seed: u64, draws: usize) -> VerifyReport {
        let identities = self
            .entries
            .into_iter()
            .map(|e| {
                let threshold = match tol_override {
                    Some(t) if !e.exact => t,
                    _ => e.threshold,
                };
                IdentityReport {
                    name: e.name,
                    max_residual: e.worst,
                    threshold,
                    passed: e.worst <= threshold,
                }
            })
            .collect();
        VerifyReport { seed, draws, identities }
    }
}

/// Runs every identity on `params` and on `options.draws` seeded random draws.
pub fn verify_all(params: &CouplingParams, options: &VerifyOptions) -> Result<VerifyReport> {
    let mut acc = Accumulator::default();
    theta_identities(&mut acc, params.alpha())?;
    let mut sets = vec![params.clone()];
    sets.extend(sampling::draws(options.seed, options.draws, options.max_m));
    for p in &sets {
        elliptic_identities(&mut acc, p)?;
        trig_identities(&mut acc, p)?;
    }
    if params.is_centrosymmetric() {
        centrosymmetric_identities(&mut acc, params)?;
    }
    Ok(acc.finish(options.tol_override, options.seed, options.draws))
}

/// Residuals of the series/product agreement, the duplication formula and the
/// half-period shift on a 20×10 grid of `(z, p)`.
pub fn theta_grid_residuals(alpha: f64) -> Result<[f64; 3]> {
    let mut worst = [0.0f64; 3];
    for pi in 0..10 {
        // geometric in [0.01, 0.5]
        let p = 0.01 * 50f64.powf(pi as f64 / 9.0);
        let ctx = ThetaContext::new(p, alpha)?;
        let perm = HalfPeriodPermutation::Pi2;
        for zi in 0..20 {
            let w = 0.05 + 1.4 * zi as f64 / 19.0;
            for r in 1..=4 {
                let s = ctx.theta(r, w);
                let t = ctx.theta_product(r, w)?;
                worst[0] = worst[0].max((s - t).abs() / s.abs().max(t.abs()));
            }
            let z = 2.0 * w / alpha;
            let dup = ctx.scaled(1, 2.0 * z);
            let prod = 2.0 * (1..=4).map(|r| ctx.scaled(r, z)).product::<f64>();
            worst[1] = worst[1].max((dup - prod).abs() / dup.abs().max(prod.abs()));
            let half = std::f64::consts::PI / alpha;
            for r in 1..=4 {
                let lhs = ctx.scaled(r, z + half);
                let rhs = ctx.half_period_factor(r) * ctx.scaled(perm.apply(r), -z);
                let scale = lhs.abs().max(rhs.abs()).max(ctx.half_period_factor(r).abs() * 1e-3);
                worst[2] = worst[2].max((lhs - rhs).abs() / scale);
            }
        }
    }
    Ok(worst)
}

fn theta_identities(acc: &mut Accumulator, alpha: f64) -> Result<()> {
    let [series, dup, half] = theta_grid_residuals(alpha)?;
    acc.put("theta-series-vs-product", 1e-12, series);
    acc.put("theta-duplication", 1e-12, dup);
    acc.put("theta-half-period-shift", 1e-12, half);
    Ok(())
}

fn sign(n: usize) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn rel(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

/// Points away from the spectrum: the midpoints and one unit beyond each end.
fn probe_points(spectrum: &Spectrum) -> Vec<f64> {
    let e = spectrum.values();
    let mut pts = vec![e[0] + 1.0];
    pts.extend(e.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    pts.push(e[e.len() - 1] - 1.0);
    pts
}

fn elliptic_identities(acc: &mut Accumulator, params: &CouplingParams) -> Result<()> {
    let m = params.m();
    let n = m + 1;
    let ctx = params.theta_context()?;
    let coeffs = DifferenceHeun::new(params)?.unchecked_lattice()?;
    let tilde_params = params.permute(HalfPeriodPermutation::Pi2)?;
    let tilde = DifferenceHeun::new(&tilde_params)?.unchecked_lattice()?;

    // coefficient structure
    let nonpositive = (1..=m)
        .filter(|&k| !(coeffs.a()[k] > 0.0 && coeffs.a_tilde()[k] > 0.0))
        .count();
    let corners = usize::from(coeffs.a()[0] != 0.0) + usize::from(coeffs.a_tilde()[0] != 0.0);
    acc.count("coefficient-positivity", nonpositive + corners);
    let mut b_rev = coeffs.b().to_vec();
    b_rev.reverse();
    let b_scale = coeffs.b().iter().fold(0.0f64, |s, x| s.max(x.abs()));
    let cov = covariance_residual(coeffs.a_tilde(), tilde.a(), None)
        .max(covariance_residual(coeffs.a(), tilde.a_tilde(), None))
        .max(covariance_residual(&b_rev, tilde.b(), Some(b_scale)));
    acc.put("coefficient-covariance", 1e-12, cov);

    let h = HeunMatrix::from_coefficients(coeffs.clone());
    let spectrum = spectra::eigenvalues(&h)?;
    let e = spectrum.values();

    // virtual parameter
    let mut shifted = None;
    for delta in [0.61, -0.43, 1.37] {
        if let Ok(p) = params.with_virtual(params.u_virtual() + delta) {
            if let Ok(c) = DifferenceHeun::new(&p).and_then(|d| d.unchecked_lattice()) {
                shifted = Some(c);
                break;
            }
        }
    }
    if let Some(shifted) = shifted {
        let d0 = shifted.b()[0] - coeffs.b()[0];
        let scale = b_scale.max(1.0);
        let res = (0..n)
            .map(|k| (shifted.b()[k] - coeffs.b()[k] - d0).abs() / scale)
            .fold(0.0, f64::max);
        acc.put("virtual-parameter-shift", 1e-10, res);
        let shifted_h = HeunMatrix::from_coefficients(shifted);
        let es = spectra::eigenvalues(&shifted_h)?;
        let res = (0..n).map(|j| (es.get(j) - e[j] - d0).abs()).fold(0.0, f64::max);
        acc.put("spectrum-virtual-shift", 1e-9, res);
    }

    // spectrum
    let sum: f64 = e.iter().sum();
    let abs_sum: f64 = e.iter().map(|x| x.abs()).sum();
    acc.put("trace", 1e-10, (sum - h.trace()).abs() / abs_sum.max(h.trace().abs()).max(f64::MIN_POSITIVE));
    let sum2: f64 = e.iter().map(|x| x * x).sum();
    acc.put("trace-of-square", 1e-10, rel(sum2, h.trace_of_square()));
    let descending = e.windows(2).filter(|w| !(w[0] > w[1])).count();
    acc.count("spectrum-descending", descending);
    let e_scale = e.iter().fold(1.0f64, |s, x| s.max(x.abs()));
    let tilde_h = HeunMatrix::from_coefficients(tilde.clone());
    let et = spectra::eigenvalues(&tilde_h)?;
    acc.put("spectrum-reflection-invariance", 1e-10, max_abs(e, et.values()) / e_scale);

    // polynomials
    let probes = probe_points(&spectrum);
    let top = (m + 1).min(EXPANSION_CHECK_DEGREE).min(EXPANSION_CAP);
    let mut worst: f64 = 0.0;
    for &x in &probes {
        let rec = poly::poly_recurrence(&coeffs, x, top);
        for (k, r) in rec.iter().enumerate() {
            let (v, scale) = poly_expansion_with_scale(&coeffs, x, k)?;
            worst = worst.max((v - r).abs() / scale.max(r.abs()).max(f64::MIN_POSITIVE));
        }
    }
    acc.put("recurrence-vs-expansion", 1e-10, worst);
    let mut cd: f64 = 0.0;
    for w in probes.windows(2) {
        for nn in [m / 2, m] {
            let r = christoffel_darboux_check(&coeffs, w[0], w[1], nn);
            cd = cd.max(r.kernel).max(r.confluent);
        }
    }
    acc.put("christoffel-darboux", 1e-10, cd);
    let shell = e.iter().map(|&x| poly::evaluate(&coeffs, x, n).relative_last()).fold(0.0, f64::max);
    acc.put("characteristic-roots", 1e-8, shell);

    // eigenvectors and measure
    let columns: Vec<Vec<f64>> = e.iter().map(|&x| twisted_values(&coeffs, x)).collect();
    let vec_res = e
        .iter()
        .zip(&columns)
        .map(|(&x, f)| spectra::residual(&h, x, f))
        .fold(0.0, f64::max);
    acc.put("eigenvector-residual", 1e-9, vec_res);
    let f = transpose(&columns);
    let w = weights_ratio(&coeffs);
    acc.put("weight-forms", 1e-10, max_relative(&w, &weights_closed(params, &ctx)));
    acc.count("weight-positivity", w.iter().filter(|&&x| !(x > 0.0)).count());

    let a_prod = coeffs.a_product();
    let at_prod = coeffs.a_tilde_product();
    let mut eps = Vec::with_capacity(n);
    let mut eps_t = Vec::with_capacity(n);
    let (mut sign_bad, mut prod_res, mut poly_prod_res) = (0usize, 0.0f64, 0.0f64);
    let aa: f64 = (1..=m).map(|k| coeffs.a()[k] * coeffs.a_tilde()[k]).product();
    let mut pm_all = 1.0;
    for (j, &x) in e.iter().enumerate() {
        let (etj, ej) = (twisted_values(&coeffs, x)[m], twisted_values(&tilde, x)[m]);
        let (pm, pmt) = (etj * at_prod, ej * a_prod);
        if !(ej * sign(j) > 0.0 && etj * sign(j) > 0.0) {
            sign_bad += 1;
        }
        prod_res = prod_res.max((ej * etj - 1.0).abs());
        poly_prod_res = poly_prod_res.max(rel(pm * pmt, aa));
        pm_all *= pm;
        eps.push(ej);
        eps_t.push(etj);
    }
    acc.count("palindromic-sign", sign_bad);
    acc.put("palindromic-product", 1e-10, prod_res);
    acc.put("palindromic-polynomial-product", 1e-9, poly_prod_res);
    let s = sign(m * (m + 1) / 2);
    let eps_prod: f64 = eps.iter().product();
    let eps_closed = s * (1..=m)
        .map(|l| (coeffs.a_tilde()[l] / coeffs.a()[l]).powi(l as i32))
        .product::<f64>();
    let pm_closed = s * (1..=m)
        .map(|l| coeffs.recurrence_weight(l).powi(l as i32))
        .product::<f64>();
    acc.put(
        "palindromic-constant-product",
        1e-9,
        rel(eps_prod, eps_closed).max(rel(pm_all, pm_closed)),
    );

    let nc = norms_compact(&coeffs, &spectrum, &eps);
    acc.put("norm-forms", 1e-9, max_relative(&nc, &norms_expanded(params, &ctx, &spectrum, &eps)));
    let g = gram_residual(&f, &w, &nc);
    acc.put("orthogonality-off-diagonal", 1e-8, g.off_diagonal);
    acc.put("orthogonality-diagonal", 1e-8, g.diagonal);

    let hf = heun_functions(&f, &eps);
    let hw: Vec<f64> = (0..n).map(|k| heun_weight(&coeffs, k)).collect();
    let vd: Vec<f64> = (0..n).map(|j| spectrum.vandermonde_derivative(j).abs()).collect();
    let g = gram_residual(&hf, &hw, &vd);
    acc.put("heun-orthogonality-off-diagonal", 1e-8, g.off_diagonal);
    acc.put("heun-orthogonality-diagonal", 1e-8, g.diagonal);
    let inv_vd: Vec<f64> = vd.iter().map(|x| 1.0 / x).collect();
    let inv_hw: Vec<f64> = hw.iter().map(|x| 1.0 / x).collect();
    let g = gram_residual(&transpose(&hf), &inv_vd, &inv_hw);
    acc.put("heun-dual-orthogonality-off-diagonal", 1e-8, g.off_diagonal);
    acc.put("heun-dual-orthogonality-diagonal", 1e-8, g.diagonal);
    let h_pos = (0..n).filter(|&j| !(hf[0][j] > 0.0)).count();
    acc.count("heun-ground-positivity", h_pos);

    let f_tilde = transpose(&e.iter().map(|&x| twisted_values(&tilde, x)).collect::<Vec<_>>());
    let h_tilde = heun_functions(&f_tilde, &eps_t);
    let mut pqs: f64 = 0.0;
    for j in 0..n {
        let scale = (0..n).fold(0.0f64, |s, k| s.max(hf[k][j].abs()));
        for k in 0..n {
            pqs = pqs.max((h_tilde[k][j] - sign(j) * hf[m - k][j]).abs() / scale);
        }
    }
    acc.put("palindromic-quasi-symmetry", 1e-9, pqs);

    let rm = racah_matrix_unchecked(&h, &spectrum, f, &w, &nc);
    acc.put("racah-inverse", 1e-8, rm.inverse_residual);
    acc.put("racah-diagonalization", 1e-8, rm.diagonalization_residual);
    acc.put("racah-determinant", 1e-7, rm.det_residual());
    Ok(())
}

fn centrosymmetric_identities(acc: &mut Accumulator, params: &CouplingParams) -> Result<()> {
    let m = params.m();
    let h = HeunMatrix::build(params)?;
    let coeffs = h.coefficients();
    let spectrum = spectra::eigenvalues(&h)?;
    let a_prod = coeffs.a_product();
    // the permuted parameters coincide with the original ones here
    let res = spectrum
        .values()
        .iter()
        .enumerate()
        .map(|(j, &x)| (poly::evaluate(coeffs, x, m).values[m].value() / a_prod - sign(j)).abs())
        .fold(0.0, f64::max);
    acc.put("centrosymmetric-epsilon", 1e-10, res);
    Ok(())
}

fn trig_identities(acc: &mut Accumulator, params: &CouplingParams) -> Result<()> {
    let m = params.m();
    let qp = QRacahParams::from_coupling(params);
    acc.put("qracah-truncation", 1e-12, qp.truncation_residual());
    let dual = qp.dual();
    let mut duality: f64 = 0.0;
    let mut recurrence: f64 = 0.0;
    for j in 0..=m {
        for k in 0..=m {
            let (x, y) = (qp.r(k, j)?, dual.r(j, k)?);
            duality = duality.max((x - y).norm() / x.norm().max(1.0));
        }
        recurrence = recurrence.max(qp.recurrence_residual(j)?);
    }
    acc.put("qracah-duality", 1e-10, duality);
    acc.put("qracah-recurrence", 1e-10, recurrence);

    let op = TrigOperator::new(params);
    let c = op.coefficient_set()?;
    let (u, v) = (params.u(), params.v());
    let scale = qpow(params.alpha(), -(u[0] + u[1] + v[0] + v[1]) / 2.0);
    let mut map: f64 = 0.0;
    for k in 0..m {
        let at = scale * qp.recurrence_a(k);
        map = map.max((at - Complex64::new(c.a_tilde()[m - k], 0.0)).norm() / c.a_tilde()[m - k].abs());
    }
    for k in 1..=m {
        let a = scale * qp.recurrence_c(k);
        map = map.max((a - Complex64::new(c.a()[k], 0.0)).norm() / c.a()[k].abs());
    }
    acc.put("qracah-coefficient-map", 1e-10, map);
    let total = op.total();
    let sum_res = (0..7)
        .map(|i| {
            let z = 0.13 + 0.71 * i as f64;
            (op.a(z) + op.a(-z) + op.b(z) - total).abs() / total.abs().max(1.0)
        })
        .fold(0.0, f64::max);
    acc.put("trig-constant-sum", 1e-10, sum_res);

    let t = trig_tables_unchecked(params)?;
    acc.put("trig-spectrum", 1e-9, t.spectrum_residual());
    acc.put("trig-polynomials", 1e-10, t.polynomial_residual());
    acc.put("trig-palindromic-constants", 1e-10, t.epsilon_residual());
    acc.count(
        "trig-palindromic-sign",
        t.eps_inv_trig.iter().enumerate().filter(|&(j, x)| !(x * sign(j) > 0.0)).count(),
    );
    acc.put("trig-total-weight", 1e-9, t.total_weight_residual());
    acc.put("trig-weights-vs-qracah", 1e-10, t.weight_residual());
    acc.put("trig-norms", 1e-9, t.norm_residual());
    let g = gram_residual(&t.f, &t.delta, &t.norms);
    acc.put("trig-orthogonality", 1e-9, g.off_diagonal.max(g.diagonal));
    acc.put("trig-inverse", 1e-8, t.inverse_residual());
    acc.put("trig-determinant", 1e-7, t.det_residual());
    Ok(())
}

fn max_abs(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}
