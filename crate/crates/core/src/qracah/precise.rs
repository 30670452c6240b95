//! Terminating basic hypergeometric sums in 128-bit arithmetic.
//!
//! The q-Racah polynomials are alternating sums whose terms can exceed the
//! result by ten orders of magnitude once `M` is in the teens, so every term
//! is formed and accumulated in extended precision and only the final value
//! is rounded to `f64`. Parameters are signed powers of `q = e^{iα}` whose
//! exponents are kept as sums of exact `f64` pieces, and `α = π/(u1+u2+M)` is
//! formed at full width so that the truncation `q^{u1+u2+M} = -1` holds to
//! the working precision rather than to the rounding of `α`.

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qracah::basic::{DENOMINATOR_POLE_TOL, TERMINATION_TOL};

/// Mantissa bits of the intermediate arithmetic.
pub const PRECISION: usize = 128;
const RM: RoundingMode = RoundingMode::ToEven;

/// `±q^x` with `x` stored as a sum of exact pieces.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QPower {
    pub negative: bool,
    pub exponent: Vec<f64>,
}

impl QPower {
    pub fn new(negative: bool, exponent: &[f64]) -> Self {
        QPower {
            negative,
            exponent: exponent.to_vec(),
        }
    }

    /// `q^x`.
    pub fn pow(x: f64) -> Self {
        Self::new(false, &[x])
    }

    pub fn times(&self, other: &QPower) -> Self {
        let mut exponent = self.exponent.clone();
        exponent.extend_from_slice(&other.exponent);
        QPower {
            negative: self.negative != other.negative,
            exponent,
        }
    }

    /// `self · q^n`.
    pub fn shifted(&self, n: f64) -> Self {
        self.times(&Self::pow(n))
    }

    pub fn inverse(&self) -> Self {
        QPower {
            negative: self.negative,
            exponent: self.exponent.iter().map(|x| -x).collect(),
        }
    }

    /// The value in double precision.
    pub fn value(&self, alpha: f64) -> Complex64 {
        let x: f64 = self.exponent.iter().sum();
        let z = Complex64::from_polar(1.0, alpha * x);
        if self.negative {
            -z
        } else {
            z
        }
    }
}

/// The angle `α` of `q = e^{iα}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum QBase {
    /// `α` given directly.
    Angle(f64),
    /// `α = π / Σ pieces`.
    PiOver(Vec<f64>),
}

#[derive(Clone, Debug)]
struct Wide {
    re: BigFloat,
    im: BigFloat,
}

fn big(x: f64) -> BigFloat {
    BigFloat::from_f64(x, PRECISION)
}

/// Nearest `f64` of a finite `BigFloat`.
fn to_f64(x: &BigFloat) -> f64 {
    match x.as_raw_parts() {
        None => f64::NAN,
        Some((words, _, sign, exp, _)) => {
            if words.iter().all(|w| *w == 0) {
                return 0.0;
            }
            // mantissa is 0.w_{n-1} w_{n-2} … in binary, most significant word last
            let top = words[words.len() - 1] as f64;
            let next = if words.len() > 1 { words[words.len() - 2] as f64 } else { 0.0 };
            let frac = (top + next * 2f64.powi(-64)) * 2f64.powi(-64);
            // two factors so that neither under- nor overflows on its own
            let half = exp / 2;
            let mag = frac * 2f64.powi(half) * 2f64.powi(exp - half);
            if sign == Sign::Neg {
                -mag
            } else {
                mag
            }
        }
    }
}

impl Wide {
    fn real(x: f64) -> Self {
        Wide { re: big(x), im: big(0.0) }
    }

    fn polar(theta: &BigFloat, negative: bool, cc: &mut Consts) -> Self {
        let (re, im) = (theta.cos(PRECISION, RM, cc), theta.sin(PRECISION, RM, cc));
        if negative {
            Wide { re: re.neg(), im: im.neg() }
        } else {
            Wide { re, im }
        }
    }

    fn add(&self, o: &Wide) -> Wide {
        Wide {
            re: self.re.add(&o.re, PRECISION, RM),
            im: self.im.add(&o.im, PRECISION, RM),
        }
    }

    fn mul(&self, o: &Wide) -> Wide {
        let rr = self.re.mul(&o.re, PRECISION, RM);
        let ii = self.im.mul(&o.im, PRECISION, RM);
        let ri = self.re.mul(&o.im, PRECISION, RM);
        let ir = self.im.mul(&o.re, PRECISION, RM);
        Wide {
            re: rr.sub(&ii, PRECISION, RM),
            im: ri.add(&ir, PRECISION, RM),
        }
    }

    fn div(&self, o: &Wide) -> Wide {
        let den = o.re.mul(&o.re, PRECISION, RM).add(&o.im.mul(&o.im, PRECISION, RM), PRECISION, RM);
        let conj = Wide {
            re: o.re.clone(),
            im: o.im.neg(),
        };
        let n = self.mul(&conj);
        Wide {
            re: n.re.div(&den, PRECISION, RM),
            im: n.im.div(&den, PRECISION, RM),
        }
    }

    /// `1 - self`.
    fn one_minus(&self) -> Wide {
        Wide {
            re: big(1.0).sub(&self.re, PRECISION, RM),
            im: self.im.neg(),
        }
    }

    fn to_complex(&self) -> Complex64 {
        Complex64::new(to_f64(&self.re), to_f64(&self.im))
    }

    fn norm(&self) -> f64 {
        self.to_complex().norm()
    }
}

struct Powers {
    alpha: BigFloat,
    cc: Consts,
}

impl Powers {
    fn new(base: &QBase) -> Self {
        let mut cc = Consts::new().expect("constant cache allocation");
        let alpha = match base {
            QBase::Angle(alpha) => big(*alpha),
            QBase::PiOver(pieces) => {
                let mut den = big(0.0);
                for &x in pieces {
                    den = den.add(&big(x), PRECISION, RM);
                }
                cc.pi(PRECISION, RM).div(&den, PRECISION, RM)
            }
        };
        Powers { alpha, cc }
    }

    fn get(&mut self, x: &QPower) -> Wide {
        let mut e = big(0.0);
        for &piece in &x.exponent {
            e = e.add(&big(piece), PRECISION, RM);
        }
        let theta = e.mul(&self.alpha, PRECISION, RM);
        Wide::polar(&theta, x.negative, &mut self.cc)
    }
}

/// `Σ_{n=0}^{terms} ∏(a_i;q)_n / ((q;q)_n ∏(b_j;q)_n) z^n` with `q = e^{iα}`,
/// stopping when a numerator factor vanishes. Returns the sum and `Σ|term|`.
pub fn terminating_sum(
    base: &QBase,
    upper: &[QPower],
    lower: &[QPower],
    z: &QPower,
    terms: usize,
) -> Result<(Complex64, f64)> {
    let mut powers = Powers::new(base);
    let q = powers.get(&QPower::pow(1.0));
    let z = powers.get(z);
    let mut ups: Vec<Wide> = upper.iter().map(|a| powers.get(a)).collect();
    let mut lows: Vec<Wide> = lower.iter().map(|b| powers.get(b)).collect();
    let mut qn1 = q.clone();

    let mut sum = Wide::real(1.0);
    let mut term = Wide::real(1.0);
    let mut scale = 1.0;
    for n in 0..terms {
        let mut num = z.clone();
        for a in &ups {
            let f = a.one_minus();
            if f.norm() < TERMINATION_TOL {
                return Ok((sum.to_complex(), scale));
            }
            num = num.mul(&f);
        }
        let mut den = qn1.one_minus();
        let mut smallest = den.norm();
        for b in &lows {
            let f = b.one_minus();
            smallest = smallest.min(f.norm());
            den = den.mul(&f);
        }
        if smallest < DENOMINATOR_POLE_TOL {
            return Err(Error::DenominatorPoleBeforeTermination { term: n + 1 });
        }
        term = term.mul(&num).div(&den);
        sum = sum.add(&term);
        scale += term.norm();
        for a in ups.iter_mut() {
            *a = a.mul(&q);
        }
        for b in lows.iter_mut() {
            *b = b.mul(&q);
        }
        qn1 = qn1.mul(&q);
    }
    Ok((sum.to_complex(), scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qracah::basic::basic_hypergeometric;

    #[test]
    fn conversion_round_trips() {
        for x in [1.0, -1.5, 0.1, 3.0e-200, -7.25e150, 2f64.powi(-1000), 1.0 + f64::EPSILON] {
            assert_eq!(to_f64(&big(x)), x);
        }
        assert_eq!(to_f64(&big(0.0)), 0.0);
    }

    #[test]
    fn agrees_with_double_sum_when_well_conditioned() {
        let alpha = 0.37;
        let upper = [QPower::pow(-3.0), QPower::new(true, &[0.4, 0.2]), QPower::pow(1.3)];
        let lower = [QPower::new(true, &[0.7]), QPower::pow(2.1)];
        let z = QPower::pow(1.0);
        let (wide, scale) = terminating_sum(&QBase::Angle(alpha), &upper, &lower, &z, 3).unwrap();
        let up: Vec<Complex64> = upper.iter().map(|p| p.value(alpha)).collect();
        let lo: Vec<Complex64> = lower.iter().map(|p| p.value(alpha)).collect();
        let double = basic_hypergeometric(&up, &lo, z.value(alpha), z.value(alpha), 3).unwrap();
        assert!((wide - double).norm() < 1e-13 * scale);
        assert!(scale >= wide.norm());
    }

    #[test]
    fn q_chu_vandermonde() {
        // ₂φ₁(q^{-n}, b; c; q, q) = (c/b; q)_n b^n / (c; q)_n
        let alpha = 0.23;
        let n = 6;
        let b = QPower::new(true, &[0.45]);
        let c = QPower::pow(1.7);
        let (sum, _) = terminating_sum(&QBase::Angle(alpha), &[QPower::pow(-(n as f64)), b.clone()], &[c.clone()], &QPower::pow(1.0), n).unwrap();
        let q = Complex64::from_polar(1.0, alpha);
        let (bv, cv) = (b.value(alpha), c.value(alpha));
        let poch = |z: Complex64| (0..n).map(|l| 1.0 - z * q.powu(l as u32)).product::<Complex64>();
        let closed = poch(cv / bv) * bv.powu(n as u32) / poch(cv);
        assert!((sum - closed).norm() < 1e-13 * closed.norm(), "{sum} vs {closed}");
    }

    #[test]
    fn exact_base_truncates() {
        // x = q^{u1+u2+M} = -1 makes 1 + (1-x)q/(1-q) = i·cot(α/2) purely imaginary
        let pieces = [0.3, 1.1, 7.0];
        let x = QPower::new(false, &pieces);
        let (sum, _) = terminating_sum(&QBase::PiOver(pieces.to_vec()), &[x], &[], &QPower::pow(1.0), 1).unwrap();
        let alpha = std::f64::consts::PI / 8.4;
        assert!(sum.re.abs() < 1e-30, "{sum}");
        assert!((sum.im - 1.0 / (alpha / 2.0).tan()).abs() < 1e-14);
    }

    #[test]
    fn pole_before_termination() {
        let r = terminating_sum(&QBase::Angle(0.3), &[QPower::pow(-4.0)], &[QPower::pow(-2.0)], &QPower::pow(1.0), 4);
        assert!(matches!(r, Err(Error::DenominatorPoleBeforeTermination { term: 3 })));
    }
}
