//! Jacobi theta functions on the real line and their rescaled variants `[z]_r`.
//!
//! The nome convention is `θ_3(z) = 1 + 2 Σ p^{n²} cos 2nz`. Every function is
//! available both as a q-series (the implementation path) and as a Jacobi
//! triple product (an independent evaluator used for self-checks).

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest number of series terms a context may require.
const MAX_SERIES_TERMS: usize = 100_000;
/// Largest number of factors the product evaluator will multiply.
const MAX_PRODUCT_FACTORS: usize = 10_000_000;

/// Elliptic nome, period scale and truncation tolerance.
///
/// The normalizers `θ_1'(0)`, `θ_2(0)`, `θ_3(0)`, `θ_4(0)` are computed once on
/// construction; evaluation afterwards is infallible.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThetaContext {
    p: f64,
    alpha: f64,
    tol: f64,
    #[serde(skip)]
    quarter: f64,
    #[serde(skip)]
    norms: [f64; 4],
}

impl ThetaContext {
    pub const DEFAULT_TOL: f64 = 1e-16;

    pub fn new(p: f64, alpha: f64) -> Result<Self> {
        Self::with_tol(p, alpha, Self::DEFAULT_TOL)
    }

    pub fn with_tol(p: f64, alpha: f64, tol: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidContext(format!("nome p = {p} outside (0, 1)")));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidContext(format!("scale alpha = {alpha} must be positive")));
        }
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Error::InvalidContext(format!("tolerance {tol} outside (0, 1)")));
        }
        // terms needed by the slowest series (theta_3/theta_4): p^{n^2} < tol / 2
        let needed = ((2.0 / tol).ln() / (-p.ln())).sqrt().ceil();
        if !(needed < MAX_SERIES_TERMS as f64) {
            return Err(Error::InvalidContext(format!(
                "theta series for p = {p} would need {needed} terms"
            )));
        }
        let mut ctx = ThetaContext {
            p,
            alpha,
            tol,
            quarter: p.powf(0.25),
            norms: [1.0; 4],
        };
        ctx.norms = [
            ctx.theta1_prime_zero(),
            ctx.theta(2, 0.0),
            ctx.theta(3, 0.0),
            ctx.theta(4, 0.0),
        ];
        Ok(ctx)
    }

    pub fn nome(&self) -> f64 {
        self.p
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Same nome and tolerance, different period scale.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::with_tol(self.p, alpha, self.tol)
    }

    /// `θ_r(z; p)` by its q-series.
    ///
    /// # Panics
    /// If `r` is not in `1..=4`.
    pub fn theta(&self, r: usize, z: f64) -> f64 {
        match r {
            1 => 2.0 * self.quarter * self.odd_series(|n| (-1.0f64).powi(n as i32) * ((2 * n + 1) as f64 * z).sin()),
            2 => 2.0 * self.quarter * self.odd_series(|n| ((2 * n + 1) as f64 * z).cos()),
            3 => self.even_series(|n| (2.0 * n as f64 * z).cos()),
            4 => self.even_series(|n| (-1.0f64).powi(n as i32) * (2.0 * n as f64 * z).cos()),
            _ => panic!("theta index {r} not in 1..=4"),
        }
    }

    /// `θ_1'(0; p)` from the term-by-term differentiated series.
    pub fn theta1_prime_zero(&self) -> f64 {
        2.0 * self.quarter * self.odd_series(|n| (-1.0f64).powi(n as i32) * (2 * n + 1) as f64)
    }

    /// Σ_{n≥0} p^{n(n+1)} t(n), where |t(n)| ≤ 2n+1.
    fn odd_series(&self, term: impl Fn(usize) -> f64) -> f64 {
        let mut sum = 0.0f64;
        let mut coef = 1.0; // p^{n(n+1)}
        for n in 0..MAX_SERIES_TERMS {
            let bound = coef * (2 * n + 1) as f64;
            if n > 0 && bound < self.tol * sum.abs().max(1.0) {
                break;
            }
            sum += coef * term(n);
            coef *= self.p.powi(2 * (n as i32 + 1));
            if coef == 0.0 {
                break;
            }
        }
        sum
    }

    /// 1 + 2 Σ_{n≥1} p^{n²} t(n), where |t(n)| ≤ 1.
    fn even_series(&self, term: impl Fn(usize) -> f64) -> f64 {
        let mut sum = 1.0f64;
        let mut coef = self.p; // p^{n^2} at n = 1
        for n in 1..MAX_SERIES_TERMS {
            if 2.0 * coef < self.tol * sum.abs().max(1.0) {
                break;
            }
            sum += 2.0 * coef * term(n);
            coef *= self.p.powi(2 * n as i32 + 1);
            if coef == 0.0 {
                break;
            }
        }
        sum
    }

    /// `θ_r(z; p)` by the Jacobi triple product.
    pub fn theta_product(&self, r: usize, z: f64) -> Result<f64> {
        let p = self.p;
        let c2 = (2.0 * z).cos();
        let (mut value, odd_power) = match r {
            1 => (2.0 * self.quarter * z.sin(), false),
            2 => (2.0 * self.quarter * z.cos(), false),
            3 | 4 => (1.0, true),
            _ => panic!("theta index {r} not in 1..=4"),
        };
        let sign = if r == 1 || r == 4 { -1.0 } else { 1.0 };
        let p2 = p * p;
        let mut p2n = 1.0; // p^{2n}
        for n in 1..=MAX_PRODUCT_FACTORS {
            p2n *= p2;
            let x = if odd_power { p2n / p } else { p2n };
            if 4.0 * x < self.tol * 1e-1 {
                return Ok(value);
            }
            value *= (1.0 - p2n) * (1.0 + sign * 2.0 * x * c2 + x * x);
            if n == MAX_PRODUCT_FACTORS {
                break;
            }
        }
        Err(Error::InvalidContext(format!(
            "theta product for p = {p} did not converge"
        )))
    }

    /// The rescaled, normalized theta function `[z]_r`.
    ///
    /// `[z]_1 = θ_1(αz/2) / (α/2 · θ_1'(0))` and `[z]_r = θ_r(αz/2) / θ_r(0)` otherwise.
    pub fn scaled(&self, r: usize, z: f64) -> f64 {
        let w = 0.5 * self.alpha * z;
        match r {
            1 => self.theta(1, w) / (0.5 * self.alpha * self.norms[0]),
            2..=4 => self.theta(r, w) / self.norms[r - 1],
            _ => panic!("theta index {r} not in 1..=4"),
        }
    }

    /// Constant `κ_r` with `[z + π/α]_r = κ_r · [-z]_{π_2(r)}` for all z.
    pub fn half_period_factor(&self, r: usize) -> f64 {
        let [d1, t2, t3, t4] = self.norms;
        let h = 0.5 * self.alpha;
        match r {
            1 => t2 / (h * d1),
            2 => h * d1 / t2,
            3 => t4 / t3,
            4 => t3 / t4,
            _ => panic!("theta index {r} not in 1..=4"),
        }
    }
}
