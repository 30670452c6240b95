//! q-Pochhammer symbols and terminating basic hypergeometric series.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A denominator factor `1 - b q^n` smaller than this counts as a pole.
pub const DENOMINATOR_POLE_TOL: f64 = 1e-12;
/// A numerator factor `1 - a q^n` smaller than this is treated as the
/// terminating zero.
pub const TERMINATION_TOL: f64 = 1e-12;

/// `q^x = e^{iαx}` for `q = e^{iα}` and real `x`.
pub fn qpow(alpha: f64, x: f64) -> Complex64 {
    Complex64::from_polar(1.0, alpha * x)
}

/// `(z; q)_n = ∏_{0≤l<n} (1 - z q^l)`.
pub fn qpochhammer(z: Complex64, q: Complex64, n: usize) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    let mut zq = z;
    for _ in 0..n {
        acc *= 1.0 - zq;
        zq *= q;
    }
    acc
}

/// `(z_1, …, z_s; q)_n`.
pub fn qpochhammer_multi(zs: &[Complex64], q: Complex64, n: usize) -> Complex64 {
    zs.iter().map(|&z| qpochhammer(z, q, n)).product()
}

/// `Σ_{n=0}^{terms} ∏(a_i;q)_n / ((q;q)_n ∏(b_j;q)_n) z^n`, stopping early when a
/// numerator factor vanishes.
pub fn basic_hypergeometric(
    upper: &[Complex64],
    lower: &[Complex64],
    q: Complex64,
    z: Complex64,
    terms: usize,
) -> Result<Complex64> {
    basic_hypergeometric_with_scale(upper, lower, q, z, terms).map(|(sum, _)| sum)
}

/// As [`basic_hypergeometric`], also returning `Σ|term|`, the scale of the
/// rounding error left by cancellation.
pub fn basic_hypergeometric_with_scale(
    upper: &[Complex64],
    lower: &[Complex64],
    q: Complex64,
    z: Complex64,
    terms: usize,
) -> Result<(Complex64, f64)> {
    let mut sum = Complex64::new(1.0, 0.0);
    let mut scale = 1.0;
    let mut term = Complex64::new(1.0, 0.0);
    let mut qn = Complex64::new(1.0, 0.0);
    for n in 0..terms {
        let mut num = z;
        let mut terminated = false;
        for &a in upper {
            let f = 1.0 - a * qn;
            if f.norm() < TERMINATION_TOL {
                terminated = true;
            }
            num *= f;
        }
        if terminated {
            break;
        }
        let mut den = 1.0 - qn * q;
        for &b in lower {
            den *= 1.0 - b * qn;
        }
        let smallest = lower
            .iter()
            .map(|&b| (1.0 - b * qn).norm())
            .fold((1.0 - qn * q).norm(), f64::min);
        if smallest < DENOMINATOR_POLE_TOL {
            return Err(Error::DenominatorPoleBeforeTermination { term: n + 1 });
        }
        term *= num / den;
        sum += term;
        scale += term.norm();
        qn *= q;
    }
    Ok((sum, scale))
}

/// Terminating `₄φ₃(a_1..a_4; b_1..b_3; q, z)` summed up to term `k`.
pub fn phi43(upper: [Complex64; 4], lower: [Complex64; 3], q: Complex64, z: Complex64, k: usize) -> Result<Complex64> {
    basic_hypergeometric(&upper, &lower, q, z, k)
}
