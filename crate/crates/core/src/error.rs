use std::fmt;

use serde::Serialize;

/// A single violated inequality of the coupling-parameter domain.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum DomainConstraint {
    /// `u1 > 0` or `u2 > 0` failed (index is 1 or 2).
    PositiveU(usize),
    /// `|v_r| < u_r + 1/2` failed for r = 1 or 2.
    VBound(usize),
    /// The elliptic nome must satisfy `0 < p < 1`.
    NomeRange,
    /// A parameter was NaN or infinite.
    NonFinite(&'static str),
}

impl fmt::Display for DomainConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainConstraint::PositiveU(r) => write!(f, "u{r} > 0"),
            DomainConstraint::VBound(r) => write!(f, "|v{r}| < u{r} + 1/2"),
            DomainConstraint::NomeRange => write!(f, "0 < p < 1"),
            DomainConstraint::NonFinite(name) => write!(f, "{name} is finite"),
        }
    }
}

fn join(constraints: &[DomainConstraint]) -> String {
    constraints
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid theta context: {0}")]
    InvalidContext(String),

    #[error("parameter domain violated: {}", join(.0))]
    DomainViolation(Vec<DomainConstraint>),

    #[error("virtual parameter {value} (shifted by {shift}) is {distance:e} from the lattice 2π/α·ℤ")]
    VirtualParamSingular { value: f64, shift: f64, distance: f64 },

    #[error("pole proximity at z = {z}: factor {factor} has magnitude {magnitude:e}")]
    PoleProximity {
        factor: String,
        z: f64,
        magnitude: f64,
    },

    #[error("coefficient invariant `{check}` violated (residual {residual:e})")]
    InvariantViolation { check: &'static str, residual: f64 },

    #[error("off-diagonal entry {index} is not positive ({value})")]
    PositivityViolation { index: usize, value: f64 },

    #[error("eigenvalues {index} and {} are separated by only {gap:e}", .index + 1)]
    DegenerateSpectrum { index: usize, gap: f64 },

    #[error("energy {energy} is off shell (relative characteristic residual {residual:e})")]
    OffShell { energy: f64, residual: f64 },

    #[error("explicit expansion of degree {degree} exceeds the cap {cap}")]
    ExpansionTooLarge { degree: usize, cap: usize },

    #[error("two forms of `{quantity}` disagree (residual {residual:e})")]
    FormMismatch {
        quantity: &'static str,
        residual: f64,
    },

    #[error("sign of epsilon_{index} is wrong (value {value})")]
    SignPatternViolation { index: usize, value: f64 },

    #[error("epsilon_{index} * epsilon~_{index} deviates from 1 by {residual:e}")]
    ProductIdentityViolation { index: usize, residual: f64 },

    #[error("denominator Pochhammer symbol vanishes at term {term} before termination")]
    DenominatorPoleBeforeTermination { term: usize },

    #[error("q-Racah value has imaginary part {imag:e}")]
    ImaginaryLeak { imag: f64 },

    #[error("trigonometric limit not converging at sweep point {step}, j = {j} ({quantity})")]
    NonConvergence {
        step: usize,
        j: usize,
        quantity: &'static str,
    },
}

impl Error {
    /// True for errors caused by inadmissible input parameters rather than
    /// numerical breakdown.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::DomainViolation(_) | Error::VirtualParamSingular { .. } | Error::InvalidContext(_)
        )
    }

    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidContext(_) => "invalid_context",
            Error::DomainViolation(_) => "domain_violation",
            Error::VirtualParamSingular { .. } => "virtual_param_singular",
            Error::PoleProximity { .. } => "pole_proximity",
            Error::InvariantViolation { .. } => "invariant_violation",
            Error::PositivityViolation { .. } => "positivity_violation",
            Error::DegenerateSpectrum { .. } => "degenerate_spectrum",
            Error::OffShell { .. } => "off_shell",
            Error::ExpansionTooLarge { .. } => "expansion_too_large",
            Error::FormMismatch { .. } => "form_mismatch",
            Error::SignPatternViolation { .. } => "sign_pattern_violation",
            Error::ProductIdentityViolation { .. } => "product_identity_violation",
            Error::DenominatorPoleBeforeTermination { .. } => "denominator_pole_before_termination",
            Error::ImaginaryLeak { .. } => "imaginary_leak",
            Error::NonConvergence { .. } => "non_convergence",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
