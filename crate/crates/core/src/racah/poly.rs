//! Monic elliptic Racah polynomials `p_k(E)`: the leading principal minors of
//! `E·I - H`.

use crate::coeffs::CoefficientSet;
use crate::error::{Error, Result};

/// Largest degree accepted by [`poly_expansion`]; the sum has Fibonacci many terms.
pub const EXPANSION_CAP: usize = 20;

const RESCALE_HI: f64 = 1.157_920_892_373_162e77; // 2^256
const RESCALE_LO: f64 = 8.636_168_555_094_445e-78; // 2^-256
const RESCALE_BITS: i32 = 256;

/// A value `mantissa · 2^exp2`, used to carry polynomial values past the
/// binary64 exponent range.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scaled {
    pub mantissa: f64,
    pub exp2: i32,
}

impl Scaled {
    pub fn value(self) -> f64 {
        if self.exp2 == 0 {
            self.mantissa
        } else {
            // split to avoid overflow of the intermediate power
            let half = self.exp2 / 2;
            self.mantissa * 2f64.powi(half) * 2f64.powi(self.exp2 - half)
        }
    }

    pub fn log2_abs(self) -> f64 {
        self.mantissa.abs().log2() + self.exp2 as f64
    }
}

/// Values of `p_0..p_upto` (and optionally derivatives) at one energy.
#[derive(Clone, Debug)]
pub struct PolyEval {
    pub values: Vec<Scaled>,
    pub derivatives: Vec<Scaled>,
    /// log2 of the largest term magnitude met in the recurrence.
    pub scale_log2: f64,
}

impl PolyEval {
    /// `|p_upto| / scale`, the relative size of the last value against the
    /// terms that produced it.
    pub fn relative_last(&self) -> f64 {
        let last = *self.values.last().expect("at least p_0");
        if last.mantissa == 0.0 {
            0.0
        } else {
            (last.log2_abs() - self.scale_log2).exp2()
        }
    }
}

/// Runs `p_{k+1} = (E - b_k) p_k - a_k ã_{M+1-k} p_{k-1}` with `p_0 = 1`,
/// together with the differentiated recurrence, rescaling by powers of two.
pub fn evaluate(coeffs: &CoefficientSet, e: f64, upto: usize) -> PolyEval {
    assert!(upto <= coeffs.m() + 1, "degree {upto} beyond M+1");
    let b = coeffs.b();
    let mut values = Vec::with_capacity(upto + 1);
    let mut derivatives = Vec::with_capacity(upto + 1);
    let (mut p_prev, mut p_cur) = (0.0f64, 1.0f64);
    let (mut d_prev, mut d_cur) = (0.0f64, 0.0f64);
    let mut exp2 = 0i32;
    let mut scale_log2 = 0.0f64;
    values.push(Scaled { mantissa: 1.0, exp2: 0 });
    derivatives.push(Scaled { mantissa: 0.0, exp2: 0 });
    for k in 0..upto {
        let w = if k == 0 { 0.0 } else { coeffs.recurrence_weight(k) };
        let t1 = (e - b[k]) * p_cur;
        let t2 = w * p_prev;
        let magnitude = t1.abs() + t2.abs();
        if magnitude > 0.0 {
            scale_log2 = scale_log2.max(magnitude.log2() + exp2 as f64);
        }
        let p_next = t1 - t2;
        let d_next = p_cur + (e - b[k]) * d_cur - w * d_prev;
        p_prev = p_cur;
        p_cur = p_next;
        d_prev = d_cur;
        d_cur = d_next;
        values.push(Scaled { mantissa: p_cur, exp2 });
        derivatives.push(Scaled { mantissa: d_cur, exp2 });

        let big = p_cur.abs().max(p_prev.abs()).max(d_cur.abs()).max(d_prev.abs());
        if big > RESCALE_HI {
            let f = RESCALE_LO;
            p_prev *= f;
            p_cur *= f;
            d_prev *= f;
            d_cur *= f;
            exp2 += RESCALE_BITS;
        } else if big < RESCALE_LO && big > 0.0 {
            let f = RESCALE_HI;
            p_prev *= f;
            p_cur *= f;
            d_prev *= f;
            d_cur *= f;
            exp2 -= RESCALE_BITS;
        }
    }
    PolyEval {
        values,
        derivatives,
        scale_log2,
    }
}

/// `p_0(E), …, p_upto(E)` by the three-term recurrence.
pub fn poly_recurrence(coeffs: &CoefficientSet, e: f64, upto: usize) -> Vec<f64> {
    evaluate(coeffs, e, upto)
        .values
        .into_iter()
        .map(Scaled::value)
        .collect()
}

/// `p_k(E)` and `p_k'(E)` for k = 0..=upto.
pub fn poly_and_derivative(coeffs: &CoefficientSet, e: f64, upto: usize) -> (Vec<f64>, Vec<f64>) {
    let eval = evaluate(coeffs, e, upto);
    (
        eval.values.into_iter().map(Scaled::value).collect(),
        eval.derivatives.into_iter().map(Scaled::value).collect(),
    )
}

/// `p_k(E)` from the explicit alternating sum over sets of non-adjacent
/// transpositions `(j, j+1)`, `1 ≤ j < k`.
pub fn poly_expansion(coeffs: &CoefficientSet, e: f64, k: usize) -> Result<f64> {
    poly_expansion_with_scale(coeffs, e, k).map(|(value, _)| value)
}

/// [`poly_expansion`] together with the sum of the absolute values of its terms.
pub fn poly_expansion_with_scale(coeffs: &CoefficientSet, e: f64, k: usize) -> Result<(f64, f64)> {
    if k > EXPANSION_CAP {
        return Err(Error::ExpansionTooLarge {
            degree: k,
            cap: EXPANSION_CAP,
        });
    }
    assert!(k <= coeffs.m() + 1, "degree {k} beyond M+1");
    let b = coeffs.b();
    if k < 2 {
        let v = if k == 0 { 1.0 } else { e - b[0] };
        return Ok((v, v.abs()));
    }
    // bit (j-1) of `mask` marks the transposition (j, j+1), j = 1..k-1
    let mut total = 0.0;
    let mut scale = 0.0;
    for mask in 0u32..(1u32 << (k - 1)) {
        if mask & (mask >> 1) != 0 {
            continue;
        }
        let mut term = if mask.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        let mut moved = 0u32; // positions 1..=k touched by a transposition
        for j in 1..k {
            if mask & (1 << (j - 1)) != 0 {
                term *= coeffs.recurrence_weight(j);
                moved |= (1 << (j - 1)) | (1 << j);
            }
        }
        for j in 1..=k {
            if moved & (1 << (j - 1)) == 0 {
                term *= e - b[j - 1];
            }
        }
        total += term;
        scale += term.abs();
    }
    Ok((total, scale))
}
