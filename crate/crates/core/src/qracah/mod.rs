//! The trigonometric limit `p → 0`: q-Racah polynomials, closed-form spectra
//! and weights, numerical convergence, and the Lamé slice.

pub mod basic;
pub mod convergence;
pub mod lame;
pub mod params;
pub mod precise;
pub mod trig;

pub use basic::{basic_hypergeometric, phi43, qpochhammer};
pub use convergence::{trig_limit_convergence, ConvergenceReport, ConvergenceRow, DEFAULT_SWEEP};
pub use lame::{lame_display, lame_matrix, LameSlice};
pub use params::{qracah_poly, QRacahParams};
pub use trig::{trig_tables, trig_tables_unchecked, TrigOperator, TrigTables};
