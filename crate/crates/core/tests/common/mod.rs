//! Independent reference computations shared by the integration tests.
//!
//! The Heun matrix is rebuilt here from the product expansions of the theta
//! functions, eigenvalues are located by Sturm bisection with the leading
//! minors evaluated in 256-bit arithmetic, and eigenvectors come from a dense
//! symmetric eigensolver. None of this goes through the library's own series,
//! recurrences or root finder.

#![allow(dead_code)]

use astro_float::{BigFloat, RoundingMode};
use nalgebra::{DMatrix, SymmetricEigen};

use elliptic_racah::RawParams;

const WIDE: usize = 256;
const RM: RoundingMode = RoundingMode::ToEven;

/// `θ_r(z)` from the Jacobi triple products, up to the `r`-dependent constant
/// prefactor that cancels in every normalized ratio.
fn theta_product(r: usize, z: f64, p: f64) -> f64 {
    let c = (2.0 * z).cos();
    let mut value = match r {
        1 => z.sin(),
        2 => z.cos(),
        _ => 1.0,
    };
    for n in 1..200 {
        let (p2n, p2n1) = (p.powi(2 * n), p.powi(2 * n - 1));
        let factor = match r {
            1 => 1.0 - 2.0 * p2n * c + p2n * p2n,
            2 => 1.0 + 2.0 * p2n * c + p2n * p2n,
            3 => 1.0 + 2.0 * p2n1 * c + p2n1 * p2n1,
            _ => 1.0 - 2.0 * p2n1 * c + p2n1 * p2n1,
        };
        value *= factor;
        if p2n1 < 1e-18 {
            break;
        }
    }
    value
}

/// `θ_1'(0)` relative to the same prefactor as [`theta_product`].
fn theta1_prime_zero(p: f64) -> f64 {
    let mut value = 1.0;
    let mut p2n = p * p;
    while p2n > 1e-18 {
        value *= (1.0 - p2n).powi(2);
        p2n *= p * p;
    }
    value
}

/// `[z]_1 = θ_1(αz/2)/((α/2)θ_1'(0))`, `[z]_r = θ_r(αz/2)/θ_r(0)`.
pub fn bracket(r: usize, z: f64, p: f64, alpha: f64) -> f64 {
    let x = 0.5 * alpha * z;
    if r == 1 {
        theta_product(1, x, p) / (0.5 * alpha * theta1_prime_zero(p))
    } else {
        theta_product(r, x, p) / theta_product(r, 0.0, p)
    }
}

/// `s ↦ π_r(s)` for the half-period permutations, 1-based.
fn pi(r: usize, s: usize) -> usize {
    const TABLE: [[usize; 4]; 4] = [[1, 2, 3, 4], [2, 1, 4, 3], [3, 4, 1, 2], [4, 3, 2, 1]];
    TABLE[r - 1][s - 1]
}

/// Bands of the Heun matrix: `(sub, diag, sup)` with `sub[k-1] = H[k][k-1]`
/// and `sup[k] = H[k][k+1]`.
pub struct Bands {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
}

pub fn alpha(raw: &RawParams) -> f64 {
    std::f64::consts::PI / (raw.u[0] + raw.u[1] + raw.m as f64)
}

/// The Heun matrix of `raw` at nome `p` (which may be zero).
pub fn heun_bands(raw: &RawParams, p: f64) -> Bands {
    let al = alpha(raw);
    let br = |r: usize, z: f64| bracket(r, z, p, al);
    let (u, v, uu, m) = (raw.u, raw.v, raw.u_virtual, raw.m);
    let big_a = |z: f64| {
        (1..=4)
            .map(|r| br(r, z + u[r - 1]) / br(r, z) * br(r, z + 0.5 + v[r - 1]) / br(r, z + 0.5))
            .product::<f64>()
    };
    let c: Vec<f64> = (1..=4)
        .map(|r| {
            let prod: f64 = (1..=4)
                .map(|s| br(s, u[pi(r, s) - 1] - 0.5) * br(s, v[pi(r, s) - 1]))
                .product();
            2.0 / (br(1, uu) * br(1, uu + 1.0)) * prod
        })
        .collect();
    let big_b = |z: f64| {
        (1..=4)
            .filter(|&r| c[r - 1] != 0.0)
            .map(|r| c[r - 1] * br(r, z + 0.5 + uu) / br(r, z + 0.5) * br(r, z - 0.5 - uu) / br(r, z - 0.5))
            .sum::<f64>()
    };
    let u1 = u[0];
    let a = |k: usize| big_a(-u1 - k as f64);
    let a_tilde = |k: usize| big_a(u1 + (m - k) as f64);
    Bands {
        sub: (1..=m).map(a).collect(),
        diag: (0..=m).map(|k| big_b(u1 + k as f64)).collect(),
        sup: (0..m).map(|k| a_tilde(m - k)).collect(),
    }
}

fn wide(x: f64) -> BigFloat {
    BigFloat::from_f64(x, WIDE)
}

/// Number of eigenvalues greater than `x`, from the sign changes of the
/// leading principal minors of `x·I - H` evaluated in 256-bit arithmetic.
fn count_above(bands: &Bands, x: f64) -> usize {
    let n = bands.diag.len();
    let xw = wide(x);
    let mut prev = wide(1.0);
    let mut cur = xw.sub(&wide(bands.diag[0]), WIDE, RM);
    let mut signs = vec![true];
    let push = |v: &BigFloat, signs: &mut Vec<bool>| {
        let last = *signs.last().unwrap();
        // an exact zero takes the sign opposite to its predecessor
        signs.push(if v.is_zero() { !last } else { v.is_positive() });
    };
    push(&cur, &mut signs);
    for k in 1..n {
        let shift = xw.sub(&wide(bands.diag[k]), WIDE, RM);
        let coupling = wide(bands.sub[k - 1]).mul(&wide(bands.sup[k - 1]), WIDE, RM);
        let next = shift.mul(&cur, WIDE, RM).sub(&coupling.mul(&prev, WIDE, RM), WIDE, RM);
        prev = cur;
        cur = next;
        push(&cur, &mut signs);
    }
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Eigenvalues in descending order by bisection to full `f64` resolution.
pub fn bisection_eigenvalues(bands: &Bands) -> Vec<f64> {
    let n = bands.diag.len();
    let mut radius: f64 = 0.0;
    for k in 0..n {
        let mut r = bands.diag[k].abs();
        if k > 0 {
            r += bands.sub[k - 1].abs();
        }
        if k + 1 < n {
            r += bands.sup[k].abs();
        }
        radius = radius.max(r);
    }
    (0..n)
        .map(|j| {
            // E_j is the point where the count above drops from j+1 to j
            let (mut lo, mut hi) = (-radius - 1.0, radius + 1.0);
            loop {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if count_above(bands, mid) > j {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

/// Eigenpairs `(E_j, f(E_j))` in descending order with `f_0 = 1`, from the
/// dense eigensolver applied to the symmetrized matrix.
pub fn dense_eigenpairs(bands: &Bands) -> Vec<(f64, Vec<f64>)> {
    let n = bands.diag.len();
    let off: Vec<f64> = (0..n - 1).map(|k| (bands.sub[k] * bands.sup[k]).sqrt()).collect();
    let s = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            bands.diag[i]
        } else if j == i + 1 {
            off[i]
        } else if i == j + 1 {
            off[j]
        } else {
            0.0
        }
    });
    // H = D S D⁻¹ with d_{k+1}/d_k = off_k / sup_k
    let mut d = vec![1.0; n];
    for k in 0..n - 1 {
        d[k + 1] = d[k] * off[k] / bands.sup[k];
    }
    let eig = SymmetricEigen::new(s);
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|j| {
            let col = eig.eigenvectors.column(j);
            let f: Vec<f64> = (0..n).map(|k| d[k] * col[k]).collect();
            let f0 = f[0];
            (eig.eigenvalues[j], f.into_iter().map(|x| x / f0).collect())
        })
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    pairs
}

/// The closed trigonometric spectrum
/// `E_{t,j} = 2cos(α/2 (2j + u1+u2+v1+v2)) + Σ_r c_{t,r}`.
pub fn trig_spectrum(raw: &RawParams) -> Vec<f64> {
    let al = alpha(raw);
    let h = 0.5 * al;
    let c_sum: f64 = (1..=4)
        .map(|r| {
            let (s1, s2) = (pi(r, 1) - 1, pi(r, 2) - 1);
            2.0 * (h * (raw.u[s1] - 0.5)).sin() * (h * raw.v[s1]).sin() * (h * (raw.u[s2] - 0.5)).cos() * (h * raw.v[s2]).cos()
                / ((h * raw.u_virtual).sin() * (h * (raw.u_virtual + 1.0)).sin())
        })
        .sum();
    let s = raw.u[0] + raw.u[1] + raw.v[0] + raw.v[1];
    (0..=raw.m)
        .map(|j| 2.0 * (h * (2.0 * j as f64 + s)).cos() + c_sum)
        .collect()
}

pub fn max_abs_diff(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}
