//! Coefficients `A(z)`, `B(z)`, `c_r` of the difference Heun operator and their
//! restriction to the lattice `u1, u1+1, …, u1+M`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{CouplingParams, HalfPeriodPermutation};
use crate::theta::ThetaContext;

/// Default lower bound on the magnitude of any denominator theta factor.
pub const POLE_TOL: f64 = 1e-12;
/// Tolerance for the structural checks run while assembling a [`CoefficientSet`].
pub const INVARIANT_TOL: f64 = 1e-10;

/// Lattice coefficients: `a_k = A(-u1-k)`, `ã_k = A(u1+M-k)`, `b_k = B(u1+k)`.
///
/// `a[0]` and `a_tilde[0]` are zero; every other `a`, `ã` is positive.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoefficientSet {
    a: Vec<f64>,
    a_tilde: Vec<f64>,
    b: Vec<f64>,
    c: Option<[f64; 4]>,
}

impl CoefficientSet {
    /// Assembles a coefficient set from its three arrays (each of length M+1).
    pub fn from_parts(a: Vec<f64>, a_tilde: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let n = b.len();
        if n == 0 || a.len() != n || a_tilde.len() != n {
            return Err(Error::InvariantViolation {
                check: "array lengths",
                residual: f64::NAN,
            });
        }
        if a[0] != 0.0 || a_tilde[0] != 0.0 {
            return Err(Error::InvariantViolation {
                check: "a_0 = ã_0 = 0",
                residual: a[0].abs().max(a_tilde[0].abs()),
            });
        }
        for k in 1..n {
            for value in [a[k], a_tilde[k]] {
                if !(value > 0.0 && value.is_finite()) {
                    return Err(Error::PositivityViolation { index: k, value });
                }
            }
        }
        if b.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvariantViolation {
                check: "finite diagonal",
                residual: f64::NAN,
            });
        }
        Ok(CoefficientSet {
            a,
            a_tilde,
            b,
            c: None,
        })
    }

    pub fn m(&self) -> usize {
        self.b.len() - 1
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn a_tilde(&self) -> &[f64] {
        &self.a_tilde
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// The constants `c_1..c_4`, when the set came from an elliptic operator.
    pub fn c(&self) -> Option<[f64; 4]> {
        self.c
    }

    /// `a_k ã_{M+1-k}`, the product entering the three-term recurrence (k ≥ 1).
    pub fn recurrence_weight(&self, k: usize) -> f64 {
        self.a[k] * self.a_tilde[self.m() + 1 - k]
    }

    /// The coefficient set of `J H J`: `a ↔ ã` and `b` reversed.
    pub fn reflected(&self) -> CoefficientSet {
        let mut b = self.b.clone();
        b.reverse();
        CoefficientSet {
            a: self.a_tilde.clone(),
            a_tilde: self.a.clone(),
            b,
            c: self.c,
        }
    }

    /// Product `a_1 ⋯ a_M`.
    pub fn a_product(&self) -> f64 {
        self.a[1..].iter().product()
    }

    /// Product `ã_1 ⋯ ã_M`.
    pub fn a_tilde_product(&self) -> f64 {
        self.a_tilde[1..].iter().product()
    }
}

/// The elliptic coefficient functions for one parameter set.
#[derive(Clone, Debug)]
pub struct DifferenceHeun {
    params: CouplingParams,
    ctx: ThetaContext,
    c: [f64; 4],
    pole_tol: f64,
}

impl DifferenceHeun {
    pub fn new(params: &CouplingParams) -> Result<Self> {
        let ctx = params.theta_context()?;
        let mut c = [0.0; 4];
        for (r, slot) in c.iter_mut().enumerate() {
            *slot = coeff_c(r + 1, params, &ctx)?;
        }
        Ok(DifferenceHeun {
            params: params.clone(),
            ctx,
            c,
            pole_tol: POLE_TOL,
        })
    }

    pub fn with_pole_tolerance(mut self, tol: f64) -> Self {
        self.pole_tol = tol;
        self
    }

    pub fn params(&self) -> &CouplingParams {
        &self.params
    }

    pub fn context(&self) -> &ThetaContext {
        &self.ctx
    }

    /// `c_r` for `r` in `1..=4`.
    pub fn c(&self, r: usize) -> f64 {
        self.c[r - 1]
    }

    fn denominator(&self, r: usize, z: f64, label: &str) -> Result<f64> {
        let value = self.ctx.scaled(r, z);
        if value.abs() < self.pole_tol {
            return Err(Error::PoleProximity {
                factor: format!("[{label}]_{r}"),
                z,
                magnitude: value.abs(),
            });
        }
        Ok(value)
    }

    /// `A(z) = ∏_r [z+u_r]_r/[z]_r · [z+1/2+v_r]_r/[z+1/2]_r`.
    pub fn a(&self, z: f64) -> Result<f64> {
        let (u, v) = (self.params.u(), self.params.v());
        let mut value = 1.0;
        for r in 1..=4 {
            let den = self.denominator(r, z, "z")? * self.denominator(r, z + 0.5, "z+1/2")?;
            value *= self.ctx.scaled(r, z + u[r - 1]) * self.ctx.scaled(r, z + 0.5 + v[r - 1]) / den;
        }
        Ok(value)
    }

    /// `B(z) = Σ_r c_r [z+1/2+u]_r/[z+1/2]_r · [z-1/2-u]_r/[z-1/2]_r`.
    ///
    /// Terms with `c_r = 0` are dropped, which removes the removable
    /// singularities at `u1 = 1/2` or `u2 = 1/2`.
    pub fn b(&self, z: f64) -> Result<f64> {
        let uu = self.params.u_virtual();
        let mut value = 0.0;
        for r in 1..=4 {
            let c = self.c[r - 1];
            if c == 0.0 {
                continue;
            }
            let den = self.denominator(r, z + 0.5, "z+1/2")? * self.denominator(r, z - 0.5, "z-1/2")?;
            value += c * self.ctx.scaled(r, z + 0.5 + uu) * self.ctx.scaled(r, z - 0.5 - uu) / den;
        }
        Ok(value)
    }

    /// The lattice coefficients without the positivity and covariance checks.
    pub fn unchecked_lattice(&self) -> Result<CoefficientSet> {
        let m = self.params.m();
        let u1 = self.params.u()[0];
        let mut a = vec![0.0; m + 1];
        let mut a_tilde = vec![0.0; m + 1];
        let mut b = vec![0.0; m + 1];
        for k in 1..=m {
            a[k] = self.a(-u1 - k as f64)?;
            a_tilde[k] = self.a(u1 + (m - k) as f64)?;
        }
        for (k, bk) in b.iter_mut().enumerate() {
            *bk = self.b(u1 + k as f64)?;
        }
        Ok(CoefficientSet {
            a,
            a_tilde,
            b,
            c: Some(self.c),
        })
    }

    /// The lattice coefficients, checked for positivity and `π_2`-covariance
    /// (`ã_k = π_2(a_k)`, `b_{M-k} = π_2(b_k)`).
    pub fn lattice(&self) -> Result<CoefficientSet> {
        let set = self.unchecked_lattice()?;
        for k in 1..=set.m() {
            for value in [set.a[k], set.a_tilde[k]] {
                if !(value > 0.0) {
                    return Err(Error::InvariantViolation {
                        check: "positivity of a_k and ã_k",
                        residual: value,
                    });
                }
            }
        }
        let swapped = DifferenceHeun::new(&self.params.permute(HalfPeriodPermutation::Pi2)?)?
            .with_pole_tolerance(self.pole_tol)
            .unchecked_lattice()?;
        let a_res = covariance_residual(&set.a_tilde, &swapped.a, None);
        if a_res > INVARIANT_TOL {
            return Err(Error::InvariantViolation {
                check: "ã_k = π2(a_k)",
                residual: a_res,
            });
        }
        let mut b_rev = set.b.clone();
        b_rev.reverse();
        let b_scale = set.b.iter().fold(0.0f64, |s, x| s.max(x.abs()));
        let b_res = covariance_residual(&b_rev, &swapped.b, Some(b_scale));
        if b_res > INVARIANT_TOL {
            return Err(Error::InvariantViolation {
                check: "b_{M-k} = π2(b_k)",
                residual: b_res,
            });
        }
        CoefficientSet::from_parts(set.a, set.a_tilde, set.b).map(|s| CoefficientSet {
            c: Some(self.c),
            ..s
        })
    }

    /// The trigonometric factor whose sign equals the sign of `a_k`.
    pub fn principal_trig_factor(&self, k: usize) -> f64 {
        let h = 0.5 * self.params.alpha();
        let (u, v) = (self.params.u(), self.params.v());
        let k = k as f64;
        let s = |x: f64| (h * x).sin();
        let c = |x: f64| (h * x).cos();
        s(k) / s(u[0] + k) * c(u[0] - u[1] + k) / c(u[0] + k) * s(u[0] - v[0] - 0.5 + k)
            / s(u[0] - 0.5 + k)
            * c(u[0] - v[1] - 0.5 + k)
            / c(u[0] - 0.5 + k)
    }
}

/// Largest relative deviation between two arrays; `floor` replaces the
/// pointwise magnitude when given.
pub fn covariance_residual(x: &[f64], y: &[f64], floor: Option<f64>) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| {
            let scale = floor.unwrap_or_else(|| a.abs().max(b.abs()));
            if scale == 0.0 {
                (a - b).abs()
            } else {
                (a - b).abs() / scale
            }
        })
        .fold(0.0, f64::max)
}

/// `c_r = 2/([u]_1 [u+1]_1) ∏_s [u_{π_r(s)} - 1/2]_s [v_{π_r(s)}]_s`.
pub fn coeff_c(r: usize, params: &CouplingParams, ctx: &ThetaContext) -> Result<f64> {
    let perm = HalfPeriodPermutation::from_index(r);
    let uu = params.u_virtual();
    let den = ctx.scaled(1, uu) * ctx.scaled(1, uu + 1.0);
    if den.abs() < POLE_TOL {
        let period = 2.0 * std::f64::consts::PI / ctx.alpha();
        return Err(Error::VirtualParamSingular {
            value: uu,
            shift: if ctx.scaled(1, uu).abs() < POLE_TOL { 0.0 } else { 1.0 },
            distance: (uu - period * (uu / period).round()).abs(),
        });
    }
    let (u, v) = (params.u(), params.v());
    let mut value = 2.0 / den;
    for s in 1..=4 {
        let t = perm.apply(s) - 1;
        value *= ctx.scaled(s, u[t] - 0.5) * ctx.scaled(s, v[t]);
    }
    Ok(value)
}
