//! q-Racah parameters `(a, b, c, d; q)` attached to a coupling parameter set.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::CouplingParams;
use crate::qracah::basic::{qpochhammer, qpochhammer_multi, qpow};
use crate::qracah::precise::{terminating_sum, QBase, QPower};

/// Largest accepted imaginary part of a value that is real on shell.
pub const IMAGINARY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QRacahParams {
    pub alpha: f64,
    pub q: Complex64,
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
    pub m: usize,
    /// `a, b, c, d` as exact signed powers of `q`, for the extended-precision sums.
    #[serde(skip)]
    pub powers: [QPower; 4],
    /// `α = π/(u1+u2+M)` in pieces.
    #[serde(skip)]
    pub base: QBase,
}

impl QRacahParams {
    /// `a = -q^{u1+u2-1}`, `b = -q^{u1-u2}`, `c = -q^{u1+v2-1/2}`,
    /// `d = -q^{u2+v1-1/2}` with `q = e^{iα}`.
    pub fn from_coupling(params: &CouplingParams) -> Self {
        let alpha = params.alpha();
        let (u, v) = (params.u(), params.v());
        let powers = [
            QPower::new(true, &[u[0], u[1], -1.0]),
            QPower::new(true, &[u[0], -u[1]]),
            QPower::new(true, &[u[0], v[1], -0.5]),
            QPower::new(true, &[u[1], v[0], -0.5]),
        ];
        QRacahParams {
            alpha,
            q: qpow(alpha, 1.0),
            a: powers[0].value(alpha),
            b: powers[1].value(alpha),
            c: powers[2].value(alpha),
            d: powers[3].value(alpha),
            m: params.m(),
            powers,
            base: base(params),
        }
    }

    /// Parameters with `a ↔ c`, `b ↔ d`.
    pub fn dual(&self) -> Self {
        let [a, b, c, d] = self.powers.clone();
        QRacahParams {
            a: self.c,
            b: self.d,
            c: self.a,
            d: self.b,
            powers: [c, d, a, b],
            ..self.clone()
        }
    }

    fn qn(&self, n: i32) -> Complex64 {
        qpow(self.alpha, n as f64)
    }

    /// `|a q^{M+1} - 1|`.
    pub fn truncation_residual(&self) -> f64 {
        (self.a * self.qn(self.m as i32 + 1) - 1.0).norm()
    }

    /// `x(j) = cd q^{j+1} + q^{-j}`.
    pub fn x(&self, j: usize) -> Complex64 {
        self.c * self.d * self.qn(j as i32 + 1) + self.qn(-(j as i32))
    }

    /// `R_k(x(j); a, b, c, d | q)`.
    pub fn r(&self, k: usize, j: usize) -> Result<Complex64> {
        self.r_with_scale(k, j).map(|(value, _)| value)
    }

    /// `R_k(x(j))` together with the sum of the magnitudes of its terms.
    pub fn r_with_scale(&self, k: usize, j: usize) -> Result<(Complex64, f64)> {
        let [a, b, c, d] = &self.powers;
        let (kf, jf) = (k as f64, j as f64);
        terminating_sum(
            &self.base,
            &[
                QPower::pow(-kf),
                a.times(b).shifted(kf + 1.0),
                QPower::pow(-jf),
                c.times(d).shifted(jf + 1.0),
            ],
            &[a.shifted(1.0), b.times(d).shifted(1.0), c.shifted(1.0)],
            &QPower::pow(1.0),
            k.min(j),
        )
    }

    /// The coefficient of `R_{k+1}` in the three-term recurrence.
    pub fn recurrence_a(&self, k: usize) -> Complex64 {
        let k = k as i32;
        let ab = self.a * self.b;
        (1.0 - self.a * self.qn(k + 1)) * (1.0 - ab * self.qn(k + 1)) * (1.0 - self.b * self.d * self.qn(k + 1))
            * (1.0 - self.c * self.qn(k + 1))
            / ((1.0 - ab * self.qn(2 * k + 1)) * (1.0 - ab * self.qn(2 * k + 2)))
    }

    /// The coefficient of `R_{k-1}` in the three-term recurrence.
    pub fn recurrence_c(&self, k: usize) -> Complex64 {
        let k = k as i32;
        let ab = self.a * self.b;
        self.q * (1.0 - self.qn(k)) * (1.0 - self.b * self.qn(k)) * (self.c - ab * self.qn(k)) * (self.d - self.a * self.qn(k))
            / ((1.0 - ab * self.qn(2 * k)) * (1.0 - ab * self.qn(2 * k + 1)))
    }

    /// Largest residual of `A_k R_{k+1} + C_k R_{k-1} + (cdq + 1 - A_k - C_k) R_k = x R_k`
    /// over `0 ≤ k ≤ M` at `x = x(j)`, relative to the size of the terms.
    pub fn recurrence_residual(&self, j: usize) -> Result<f64> {
        let m = self.m;
        let r: Vec<Complex64> = (0..=m).map(|k| self.r(k, j)).collect::<Result<_>>()?;
        let x = self.x(j);
        let cdq1 = self.c * self.d * self.q + 1.0;
        let mut worst: f64 = 0.0;
        for k in 0..=m {
            let ak = if k == m { Complex64::new(0.0, 0.0) } else { self.recurrence_a(k) };
            let ck = if k == 0 { Complex64::new(0.0, 0.0) } else { self.recurrence_c(k) };
            let up = if k == m { Complex64::new(0.0, 0.0) } else { ak * r[k + 1] };
            let down = if k == 0 { Complex64::new(0.0, 0.0) } else { ck * r[k - 1] };
            let mid = (cdq1 - ak - ck) * r[k];
            let rhs = x * r[k];
            let scale = up.norm() + down.norm() + mid.norm() + rhs.norm();
            worst = worst.max((up + down + mid - rhs).norm() / scale.max(1.0));
        }
        Ok(worst)
    }

    /// `Δ_k(a, b, c, d; q)`, the q-Racah orthogonality weight.
    pub fn weight(&self, k: usize) -> Complex64 {
        let (a, b, c, d, q) = (self.a, self.b, self.c, self.d, self.q);
        let ab = a * b;
        qpochhammer_multi(&[c * q, b * d * q, a * q, ab * q], q, k)
            / qpochhammer_multi(&[q, ab * q / c, a * q / d, b * q], q, k)
            * (1.0 - ab * self.qn(2 * k as i32 + 1))
            / ((c * d * q).powu(k as u32) * (1.0 - ab * q))
    }

    /// `N_0 = (b^{-1}, cdq²; q)_M / (b^{-1}cq, dq; q)_M`.
    pub fn total_weight(&self) -> Complex64 {
        let (b, c, d, q) = (self.b, self.c, self.d, self.q);
        let m = self.m;
        qpochhammer(1.0 / b, q, m) * qpochhammer(c * d * q * q, q, m)
            / (qpochhammer(c * q / b, q, m) * qpochhammer(d * q, q, m))
    }
}

/// Real part of `z` after checking that its imaginary part is negligible.
/// `α = π/(u1+u2+M)` for the extended-precision sums.
pub fn base(params: &CouplingParams) -> QBase {
    let u = params.u();
    QBase::PiOver(vec![u[0], u[1], params.m() as f64])
}

pub fn real_part(z: Complex64) -> Result<f64> {
    if !(z.im.abs() <= IMAGINARY_TOL * z.re.abs().max(1.0)) {
        return Err(Error::ImaginaryLeak { imag: z.im });
    }
    Ok(z.re)
}

/// `f_{t,k}(E_{t,j})`: the ₄φ₃ with upper parameters `q^{-k}, q^{2u1+k}, q^{-j},
/// q^{s+j}` and lower parameters `-q^{u1+u2}, q^{u1+v1+1/2}, -q^{u1+v2+1/2}`,
/// where `s = u1+u2+v1+v2`.
pub fn qracah_poly(k: usize, j: usize, params: &CouplingParams) -> Result<f64> {
    let (u, v) = (params.u(), params.v());
    let (kf, jf) = (k as f64, j as f64);
    let (value, _) = terminating_sum(
        &base(params),
        &[
            QPower::pow(-kf),
            QPower::new(false, &[2.0 * u[0], kf]),
            QPower::pow(-jf),
            QPower::new(false, &[u[0], u[1], v[0], v[1], jf]),
        ],
        &[
            QPower::new(true, &[u[0], u[1]]),
            QPower::new(false, &[u[0], v[0], 0.5]),
            QPower::new(true, &[u[0], v[1], 0.5]),
        ],
        &QPower::pow(1.0),
        k.min(j),
    )?;
    real_part(value)
}
