//! Coupling parameters of the finite discrete Heun equation.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{DomainConstraint, Error, Result};
use crate::theta::ThetaContext;

/// Lattice distance below which the virtual parameter counts as singular.
pub const VIRTUAL_SINGULAR_TOL: f64 = 1e-10;

/// Unvalidated parameter values as read from flags or a config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawParams {
    pub u: [f64; 4],
    pub v: [f64; 4],
    /// The virtual regularization parameter; it only shifts the spectrum.
    pub u_virtual: f64,
    pub m: usize,
    /// Elliptic nome.
    pub p: f64,
}

impl RawParams {
    /// Parameter set used by the examples, the CLI defaults and the limit tests.
    pub fn desk_default() -> Self {
        RawParams {
            u: [1.3, 0.9, 0.4, -0.2],
            v: [0.5, -0.3, 0.7, 0.1],
            u_virtual: 0.37,
            m: 5,
            p: 0.05,
        }
    }

    pub fn permuted(&self, perm: HalfPeriodPermutation) -> RawParams {
        let mut out = self.clone();
        for s in 0..4 {
            let t = perm.apply(s + 1) - 1;
            out.u[s] = self.u[t];
            out.v[s] = self.v[t];
        }
        out
    }
}

/// The half-period permutations `π_1 = id`, `π_2 = (12)(34)`,
/// `π_3 = (13)(24)`, `π_4 = (14)(23)` acting on parameter indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HalfPeriodPermutation {
    Identity,
    Pi2,
    Pi3,
    Pi4,
}

impl HalfPeriodPermutation {
    pub const ALL: [HalfPeriodPermutation; 4] = [
        HalfPeriodPermutation::Identity,
        HalfPeriodPermutation::Pi2,
        HalfPeriodPermutation::Pi3,
        HalfPeriodPermutation::Pi4,
    ];

    /// `π_r` for `r` in `1..=4`.
    ///
    /// # Panics
    /// If `r` is out of range.
    pub fn from_index(r: usize) -> Self {
        match r {
            1 => Self::Identity,
            2 => Self::Pi2,
            3 => Self::Pi3,
            4 => Self::Pi4,
            _ => panic!("permutation index {r} not in 1..=4"),
        }
    }

    pub fn index(self) -> usize {
        match self {
            Self::Identity => 1,
            Self::Pi2 => 2,
            Self::Pi3 => 3,
            Self::Pi4 => 4,
        }
    }

    /// Image of the 1-based index `s`.
    pub fn apply(self, s: usize) -> usize {
        assert!((1..=4).contains(&s), "index {s} not in 1..=4");
        // Klein four-group acting on {1,2,3,4}: zero-based XOR with r - 1
        ((s - 1) ^ (self.index() - 1)) + 1
    }

    /// `self ∘ other`.
    pub fn compose(self, other: Self) -> Self {
        Self::from_index(self.apply(other.index()))
    }
}

/// A validated parameter set together with the derived scale `α = π/(u1+u2+M)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CouplingParams {
    raw: RawParams,
    alpha: f64,
}

impl CouplingParams {
    /// Checks the domain `u1,u2 > 0`, `|v_r| < u_r + 1/2` (r = 1,2), `0 < p < 1`,
    /// and that neither `u` nor `u+1` lies on `(2π/α)ℤ`.
    pub fn validate(raw: RawParams) -> Result<Self> {
        let mut violated = Vec::new();
        let names = ["u1", "u2", "u3", "u4"];
        let vnames = ["v1", "v2", "v3", "v4"];
        for i in 0..4 {
            if !raw.u[i].is_finite() {
                violated.push(DomainConstraint::NonFinite(names[i]));
            }
            if !raw.v[i].is_finite() {
                violated.push(DomainConstraint::NonFinite(vnames[i]));
            }
        }
        if !raw.u_virtual.is_finite() {
            violated.push(DomainConstraint::NonFinite("uu"));
        }
        if !raw.p.is_finite() {
            violated.push(DomainConstraint::NonFinite("p"));
        } else if !(raw.p > 0.0 && raw.p < 1.0) {
            violated.push(DomainConstraint::NomeRange);
        }
        for r in 0..2 {
            if !(raw.u[r] > 0.0) {
                violated.push(DomainConstraint::PositiveU(r + 1));
            }
            if !(raw.v[r].abs() < raw.u[r] + 0.5) {
                violated.push(DomainConstraint::VBound(r + 1));
            }
        }
        if !violated.is_empty() {
            return Err(Error::DomainViolation(violated));
        }

        let alpha = PI / (raw.u[0] + raw.u[1] + raw.m as f64);
        let period = 2.0 * PI / alpha;
        for shift in [0.0, 1.0] {
            let x = raw.u_virtual + shift;
            let distance = (x - period * (x / period).round()).abs();
            if distance < VIRTUAL_SINGULAR_TOL {
                return Err(Error::VirtualParamSingular {
                    value: raw.u_virtual,
                    shift,
                    distance,
                });
            }
        }
        Ok(CouplingParams { raw, alpha })
    }

    /// Parameters with `u_s ↦ u_{π(s)}`, `v_s ↦ v_{π(s)}`, revalidated.
    ///
    /// `π_2` preserves the domain; `π_3` and `π_4` generally do not.
    pub fn permute(&self, perm: HalfPeriodPermutation) -> Result<Self> {
        Self::validate(self.raw.permuted(perm))
    }

    pub fn with_virtual(&self, u_virtual: f64) -> Result<Self> {
        Self::validate(RawParams {
            u_virtual,
            ..self.raw.clone()
        })
    }

    pub fn with_nome(&self, p: f64) -> Result<Self> {
        Self::validate(RawParams {
            p,
            ..self.raw.clone()
        })
    }

    pub fn theta_context(&self) -> Result<ThetaContext> {
        ThetaContext::new(self.raw.p, self.alpha)
    }

    pub fn raw(&self) -> &RawParams {
        &self.raw
    }

    pub fn u(&self) -> &[f64; 4] {
        &self.raw.u
    }

    pub fn v(&self) -> &[f64; 4] {
        &self.raw.v
    }

    pub fn u_virtual(&self) -> f64 {
        self.raw.u_virtual
    }

    pub fn m(&self) -> usize {
        self.raw.m
    }

    pub fn nome(&self) -> f64 {
        self.raw.p
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// True on the palindromic manifold `(u1,v1) = (u2,v2)`, `(u3,v3) = (u4,v4)`.
    pub fn is_centrosymmetric(&self) -> bool {
        let (u, v) = (&self.raw.u, &self.raw.v);
        u[0] == u[1] && v[0] == v[1] && u[2] == u[3] && v[2] == v[3]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use HalfPeriodPermutation::*;

    fn base() -> RawParams {
        RawParams {
            u: [1.0, 1.0, 0.0, 0.0],
            v: [0.0; 4],
            u_virtual: 0.3,
            m: 3,
            p: 0.1,
        }
    }

    #[test]
    fn alpha_from_truncation() {
        let params = CouplingParams::validate(base()).unwrap();
        assert!((params.alpha() - PI / 5.0).abs() < 1e-15);
        let raw = RawParams::desk_default();
        let params = CouplingParams::validate(raw.clone()).unwrap();
        let total = params.alpha() * (raw.u[0] + raw.u[1] + raw.m as f64);
        assert!((total - PI).abs() <= 2.0 * f64::EPSILON * PI);
    }

    #[test]
    fn negative_u1_is_reported() {
        let mut raw = base();
        raw.u[0] = -0.5;
        match CouplingParams::validate(raw) {
            Err(Error::DomainViolation(list)) => {
                assert!(list.contains(&DomainConstraint::PositiveU(1)))
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn v_bound_is_strict() {
        let mut raw = base();
        raw.v[0] = raw.u[0] + 0.5;
        assert_eq!(
            CouplingParams::validate(raw),
            Err(Error::DomainViolation(vec![DomainConstraint::VBound(1)]))
        );
    }

    #[test]
    fn collects_every_violation() {
        let mut raw = base();
        raw.u[1] = 0.0;
        raw.v[1] = 3.0;
        raw.p = 1.5;
        let Err(Error::DomainViolation(list)) = CouplingParams::validate(raw) else {
            panic!("expected domain violation");
        };
        assert_eq!(list.len(), 3);
    }

    #[test]
    fn virtual_parameter_on_lattice_is_singular() {
        let mut raw = base();
        raw.u_virtual = 0.0;
        assert!(matches!(
            CouplingParams::validate(raw.clone()),
            Err(Error::VirtualParamSingular { .. })
        ));
        // u + 1 = 2π/α = 10
        raw.u_virtual = 9.0;
        assert!(matches!(
            CouplingParams::validate(raw),
            Err(Error::VirtualParamSingular { shift, .. }) if shift == 1.0
        ));
    }

    #[test]
    fn m_zero_is_admitted() {
        let mut raw = base();
        raw.m = 0;
        assert!(CouplingParams::validate(raw).is_ok());
    }

    #[test]
    fn permutations_form_klein_group() {
        for a in HalfPeriodPermutation::ALL {
            assert_eq!(a.compose(a), Identity);
            for b in HalfPeriodPermutation::ALL {
                assert_eq!(a.compose(b), b.compose(a));
                // π_r ∘ π_s = π_{π_r(s)}
                assert_eq!(a.compose(b).index(), a.apply(b.index()));
            }
        }
        assert_eq!(Pi2.compose(Pi3), Pi4);
        assert_eq!((1..=4).map(|s| Pi3.apply(s)).collect::<Vec<_>>(), [3, 4, 1, 2]);
        assert_eq!((1..=4).map(|s| Pi4.apply(s)).collect::<Vec<_>>(), [4, 3, 2, 1]);
    }

    #[test]
    fn permute_acts_on_parameters() {
        let params = CouplingParams::validate(RawParams::desk_default()).unwrap();
        assert_eq!(params.permute(Identity).unwrap(), params);
        let twice = params.permute(Pi2).unwrap().permute(Pi2).unwrap();
        assert_eq!(twice, params);
        let swapped = params.permute(Pi2).unwrap();
        assert_eq!(swapped.u(), &[0.9, 1.3, -0.2, 0.4]);
        assert_eq!(swapped.alpha(), params.alpha());
        // composition as parameter maps
        let raw = params.raw();
        assert_eq!(raw.permuted(Pi3).permuted(Pi2), raw.permuted(Pi4));
    }

    #[test]
    fn permuting_may_leave_the_domain() {
        let params = CouplingParams::validate(RawParams::desk_default()).unwrap();
        // π_4 moves u4 = -0.2 into slot 1
        assert!(matches!(
            params.permute(Pi4),
            Err(Error::DomainViolation(_))
        ));
    }
}
