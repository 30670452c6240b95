//! Numerical approach of the elliptic spectrum and eigenbasis to their
//! trigonometric limits as the nome decreases.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::HeunMatrix;
use crate::params::CouplingParams;
use crate::qracah::params::qracah_poly;
use crate::qracah::trig::TrigOperator;
use crate::racah::measure::twisted_values;
use crate::spectra;

/// Nome values used when no sweep is given.
pub const DEFAULT_SWEEP: [f64; 4] = [1e-2, 5e-3, 2.5e-3, 1.25e-3];
/// Largest accepted ratio between deviations at consecutive sweep points.
pub const MAX_DECAY_RATIO: f64 = 0.75;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub p: f64,
    pub j: usize,
    /// `|E_j(p) - E_{t,j}|`.
    pub abs_de: f64,
    /// `max_k |f_k(E_j; p) - f_{t,k}(E_{t,j})|`.
    pub max_abs_df: f64,
}

/// The first sweep step at which a deviation failed to decay.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayFailure {
    pub step: usize,
    pub j: usize,
    pub quantity: &'static str,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    /// Rows ordered by sweep point, then by `j`.
    pub rows: Vec<ConvergenceRow>,
    pub worst_ratio: f64,
    pub failure: Option<DecayFailure>,
}

impl ConvergenceReport {
    pub fn check(&self) -> Result<()> {
        match self.failure {
            None => Ok(()),
            Some(f) => Err(Error::NonConvergence {
                step: f.step,
                j: f.j,
                quantity: f.quantity,
            }),
        }
    }
}

/// Deviations of the elliptic quantities at nome `p` from the `p = 0` values.
pub fn deviations_at(params: &CouplingParams, p: f64) -> Result<Vec<ConvergenceRow>> {
    let m = params.m();
    let trig = TrigOperator::new(params);
    let e_t = trig.spectrum();
    let f_t: Vec<Vec<f64>> = (0..=m)
        .map(|j| (0..=m).map(|k| qracah_poly(k, j, params)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let at_p = params.with_nome(p)?;
    let h = HeunMatrix::build(&at_p)?;
    let spectrum = spectra::eigenvalues(&h)?;
    Ok((0..=m)
        .map(|j| {
            let e = spectrum.get(j);
            let f = twisted_values(h.coefficients(), e);
            let df = f.iter().zip(&f_t[j]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            ConvergenceRow {
                p,
                j,
                abs_de: (e - e_t[j]).abs(),
                max_abs_df: df,
            }
        })
        .collect())
}

/// Runs the sweep and checks that every deviation shrinks by at least
/// [`MAX_DECAY_RATIO`] from one point to the next.
pub fn trig_limit_convergence(params: &CouplingParams, ps: &[f64]) -> Result<ConvergenceReport> {
    if ps.is_empty() {
        return Err(Error::InvalidContext("empty nome sweep".into()));
    }
    for w in ps.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::InvalidContext(format!(
                "nome sweep must be strictly decreasing, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    let mut per_p = Vec::with_capacity(ps.len());
    for &p in ps {
        per_p.push(deviations_at(params, p)?);
    }
    let mut worst_ratio: f64 = 0.0;
    let mut failure = None;
    for step in 1..per_p.len() {
        for j in 0..per_p[step].len() {
            let (prev, cur) = (per_p[step - 1][j], per_p[step][j]);
            for (quantity, a, b) in [("eigenvalue", prev.abs_de, cur.abs_de), ("eigenvector", prev.max_abs_df, cur.max_abs_df)] {
                let ratio = if a == 0.0 { if b == 0.0 { 0.0 } else { f64::INFINITY } } else { b / a };
                worst_ratio = worst_ratio.max(ratio);
                if failure.is_none() && !(ratio <= MAX_DECAY_RATIO) {
                    failure = Some(DecayFailure { step, j, quantity, ratio });
                }
            }
        }
    }
    Ok(ConvergenceReport {
        rows: per_p.into_iter().flatten().collect(),
        worst_ratio,
        failure,
    })
}
