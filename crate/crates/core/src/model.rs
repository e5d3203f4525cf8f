//! Model parameters, reaction terms, equilibria, and derived constants.
//!
//! The derived constants are the building blocks of the smallness thresholds
//! for the taxis coefficients:
//!
//! ```text
//! ρ = min{d1, d2, b1, b2}
//! σ = max{d1, d2, b1, b2, a1, 3a2/ρ, 3c1/ρ, ‖u0‖^{1/2}, ‖v0‖}
//! ```
//!
//! together with `h1..h4` and the computable branch `R̂ = 3ρ/(σ+σ³)` of the
//! admissibility radius. The remaining branches depend on non-constructive
//! Schauder constants and are not evaluated; `R̂` is an upper bound for the
//! true radius, so the admissibility flags are necessary-style checks only.

use crate::{Result, SimError};

/// The nine PDE coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Predator diffusivity (> 0).
    pub d1: f64,
    /// Prey diffusivity (> 0).
    pub d2: f64,
    /// Prey-taxis coefficient χ (≥ 0).
    pub chi: f64,
    /// Predator-taxis coefficient ξ (≥ 0).
    pub xi: f64,
    /// Predator mortality rate (≥ 0).
    pub a1: f64,
    /// Predator density-dependent mortality (> 0).
    pub b1: f64,
    /// Prey intrinsic growth (≥ 0).
    pub a2: f64,
    /// Prey self-limitation (> 0).
    pub b2: f64,
    /// Conversion rate (≥ 0).
    pub c1: f64,
}

impl ModelParams {
    /// Validates positivity/non-negativity constraints on the coefficients.
    ///
    /// `chi` and `xi` may be arbitrarily large (blow-up exploration is a
    /// supported use); admissibility is reported separately by
    /// [`check_taxis_admissible`].
    pub fn validate(&self) -> Result<()> {
        let strictly_positive = [
            ("d1", self.d1),
            ("d2", self.d2),
            ("b1", self.b1),
            ("b2", self.b2),
        ];
        for (name, value) in strictly_positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(SimError::InvalidParam {
                    name: name.into(),
                    reason: format!("must be strictly positive and finite, got {value}"),
                });
            }
        }
        let non_negative = [
            ("chi", self.chi),
            ("xi", self.xi),
            ("a1", self.a1),
            ("a2", self.a2),
            ("c1", self.c1),
        ];
        for (name, value) in non_negative {
            if !(value >= 0.0) || !value.is_finite() {
                return Err(SimError::InvalidParam {
                    name: name.into(),
                    reason: format!("must be non-negative and finite, got {value}"),
                });
            }
        }
        Ok(())
    }
}

/// User-supplied bounds on the initial-data Hölder norms.
///
/// The true `C^{2+α}` norms are not recoverable from grid samples; the
/// caller supplies bounds (a grid-scale proxy is available in
/// [`crate::norms::c2alpha_norm_proxy`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialDataNorms {
    /// Bound for the `C^{2+α}` norm of the initial predator density.
    pub norm_u0_c2alpha: f64,
    /// Bound for the `C^{2+α}` norm of the initial prey density.
    pub norm_v0_c2alpha: f64,
    /// Hölder exponent, strictly inside (0, 1).
    pub alpha: f64,
}

impl InitialDataNorms {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(SimError::InvalidParam {
                name: "alpha".into(),
                reason: format!("must lie strictly inside (0,1), got {}", self.alpha),
            });
        }
        for (name, value) in [
            ("norm_u0_c2alpha", self.norm_u0_c2alpha),
            ("norm_v0_c2alpha", self.norm_v0_c2alpha),
        ] {
            if !(value >= 0.0) || !value.is_finite() {
                return Err(SimError::InvalidParam {
                    name: name.into(),
                    reason: format!("must be non-negative and finite, got {value}"),
                });
            }
        }
        Ok(())
    }
}

/// Constants derived from the model parameters and the initial-data norms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    /// min{d1, d2, b1, b2}.
    pub rho: f64,
    /// max{d1, d2, b1, b2, a1, 3a2/ρ, 3c1/ρ, ‖u0‖^{1/2}, ‖v0‖}.
    pub sigma: f64,
    /// σ(1 + ρ + 2σ).
    pub h1: f64,
    /// σ(1 + ρ).
    pub h2: f64,
    /// σ(1 + ρσ + σ²).
    pub h3: f64,
    /// σ(1 + ρσ).
    pub h4: f64,
    /// 3ρ/(σ + σ³), the computable branch of the admissibility radius.
    pub r_upper: f64,
    /// σ·r_upper/3, the prey-taxis threshold.
    pub chi_max: f64,
    /// r_upper/3, the predator-taxis threshold.
    pub xi_max: f64,
    /// Optional user-supplied stand-in for the Schauder constant P.
    /// Reporting only; never gates simulation.
    pub schauder_p: Option<f64>,
}

/// Upper-bound admissibility report for the taxis coefficients.
///
/// `r_upper ≥ R`, so a failing flag is a necessary-condition failure only
/// when the true radius equals `r_upper`; a passing flag does not by itself
/// certify admissibility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissibilityReport {
    /// 0 < χ ≤ chi_max.
    pub chi_ok: bool,
    /// 0 < ξ ≤ xi_max.
    pub xi_ok: bool,
    /// chi_max − χ.
    pub chi_margin: f64,
    /// xi_max − ξ.
    pub xi_margin: f64,
}

/// Computes ρ, σ, h1..h4, the computable admissibility radius, and the
/// taxis thresholds.
pub fn derive_constants(p: &ModelParams, n: &InitialDataNorms) -> Result<DerivedConstants> {
    p.validate()?;
    n.validate()?;

    let rho = p.d1.min(p.d2).min(p.b1).min(p.b2);
    let sigma = [
        p.d1,
        p.d2,
        p.b1,
        p.b2,
        p.a1,
        3.0 * p.a2 / rho,
        3.0 * p.c1 / rho,
        n.norm_u0_c2alpha.sqrt(),
        n.norm_v0_c2alpha,
    ]
    .into_iter()
    .fold(f64::NEG_INFINITY, f64::max);

    let h1 = sigma * (1.0 + rho + 2.0 * sigma);
    let h2 = sigma * (1.0 + rho);
    let h3 = sigma * (1.0 + rho * sigma + sigma * sigma);
    let h4 = sigma * (1.0 + rho * sigma);
    let r_upper = 3.0 * rho / (sigma + sigma.powi(3));
    let xi_max = r_upper / 3.0;
    let chi_max = sigma * r_upper / 3.0;

    let dc = DerivedConstants {
        rho,
        sigma,
        h1,
        h2,
        h3,
        h4,
        r_upper,
        chi_max,
        xi_max,
        schauder_p: None,
    };
    for (name, value) in [
        ("rho", dc.rho),
        ("sigma", dc.sigma),
        ("h1", dc.h1),
        ("h2", dc.h2),
        ("h3", dc.h3),
        ("h4", dc.h4),
        ("r_upper", dc.r_upper),
        ("chi_max", dc.chi_max),
        ("xi_max", dc.xi_max),
    ] {
        if !value.is_finite() {
            return Err(SimError::NonFiniteConstant { name: name.into() });
        }
    }
    Ok(dc)
}

/// Predator reaction term u(−a1 − b1·u + c1·v).
#[inline]
pub fn reaction_u(u: f64, v: f64, p: &ModelParams) -> f64 {
    u * (-p.a1 - p.b1 * u + p.c1 * v)
}

/// Prey reaction term v(a2 − b2·v − u).
#[inline]
pub fn reaction_v(u: f64, v: f64, p: &ModelParams) -> f64 {
    v * (p.a2 - p.b2 * v - u)
}

/// Strictly positive coexistence equilibrium of the reaction terms, when it
/// exists: both reaction zeros solved simultaneously.
///
/// Returns `Some((u*, v*))` iff `c1·a2 > a1·b2` (which forces `c1 > 0`);
/// otherwise the predator cannot persist and there is no coexistence state.
pub fn coexistence_equilibrium(p: &ModelParams) -> Option<(f64, f64)> {
    if p.c1 * p.a2 <= p.a1 * p.b2 {
        return None;
    }
    let u_star = (p.c1 * p.a2 - p.a1 * p.b2) / (p.c1 + p.b1 * p.b2);
    let v_star = (p.a1 + p.b1 * u_star) / p.c1;
    Some((u_star, v_star))
}

/// Compares χ and ξ against the thresholds σR̂/3 and R̂/3.
pub fn check_taxis_admissible(p: &ModelParams, dc: &DerivedConstants) -> AdmissibilityReport {
    AdmissibilityReport {
        chi_ok: p.chi > 0.0 && p.chi <= dc.chi_max,
        xi_ok: p.xi > 0.0 && p.xi <= dc.xi_max,
        chi_margin: dc.chi_max - p.chi,
        xi_margin: dc.xi_max - p.xi,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_params() -> ModelParams {
        ModelParams {
            d1: 1.0,
            d2: 1.0,
            chi: 0.05,
            xi: 0.01,
            a1: 0.5,
            b1: 1.0,
            a2: 1.0,
            b2: 1.0,
            c1: 1.0,
        }
    }

    fn unit_norms() -> InitialDataNorms {
        InitialDataNorms {
            norm_u0_c2alpha: 1.0,
            norm_v0_c2alpha: 1.0,
            alpha: 0.5,
        }
    }

    #[test]
    fn derive_constants_unit_example() {
        let dc = derive_constants(&unit_params(), &unit_norms()).unwrap();
        assert_eq!(dc.rho, 1.0);
        assert_eq!(dc.sigma, 3.0);
        assert!((dc.r_upper - 0.1).abs() < 1e-15);
        assert!((dc.xi_max - 0.1 / 3.0).abs() < 1e-15);
        assert!((dc.chi_max - 0.1).abs() < 1e-15);
        assert_eq!(dc.h1, 24.0);
        assert_eq!(dc.h2, 6.0);
        assert_eq!(dc.h3, 39.0);
        assert_eq!(dc.h4, 12.0);
    }

    #[test]
    fn derive_constants_mixed_example() {
        let p = ModelParams {
            d1: 2.0,
            d2: 1.0,
            chi: 0.0,
            xi: 0.0,
            a1: 1.0,
            b1: 3.0,
            a2: 2.0,
            b2: 1.0,
            c1: 1.0,
        };
        let n = InitialDataNorms {
            norm_u0_c2alpha: 4.0,
            norm_v0_c2alpha: 1.0,
            alpha: 0.3,
        };
        let dc = derive_constants(&p, &n).unwrap();
        assert_eq!(dc.rho, 1.0);
        assert_eq!(dc.sigma, 6.0);
        assert!((dc.r_upper - 3.0 / 222.0).abs() < 1e-15);
    }

    #[test]
    fn rho_is_min_and_sigma_dominates_arguments() {
        let p = unit_params();
        let n = unit_norms();
        let dc = derive_constants(&p, &n).unwrap();
        assert_eq!(dc.rho, p.d1.min(p.d2).min(p.b1).min(p.b2));
        for arg in [
            p.d1,
            p.d2,
            p.b1,
            p.b2,
            p.a1,
            3.0 * p.a2 / dc.rho,
            3.0 * p.c1 / dc.rho,
            n.norm_u0_c2alpha.sqrt(),
            n.norm_v0_c2alpha,
        ] {
            assert!(dc.sigma >= arg);
        }
        assert!(dc.rho <= dc.sigma);
    }

    #[test]
    fn h_identities() {
        // h1 − h2 = 2σ² and h3 − h4 = σ³, exactly up to a few ulp.
        for (rho_seed, sigma_seed) in [(0.5, 2.0), (1.0, 3.0), (0.1, 17.0), (2.5, 2.5)] {
            let p = ModelParams {
                d1: rho_seed,
                d2: sigma_seed,
                chi: 0.0,
                xi: 0.0,
                a1: 0.0,
                b1: sigma_seed,
                a2: 0.0,
                b2: sigma_seed,
                c1: 0.0,
            };
            let n = InitialDataNorms {
                norm_u0_c2alpha: 0.0,
                norm_v0_c2alpha: 0.0,
                alpha: 0.5,
            };
            let dc = derive_constants(&p, &n).unwrap();
            let s2 = dc.sigma * dc.sigma;
            let s3 = s2 * dc.sigma;
            assert!((dc.h1 - dc.h2 - 2.0 * s2).abs() <= 4.0 * f64::EPSILON * (dc.h1.abs() + s2));
            assert!((dc.h3 - dc.h4 - s3).abs() <= 4.0 * f64::EPSILON * (dc.h3.abs() + s3));
        }
    }

    #[test]
    fn sigma_monotone_r_upper_antitone() {
        let n = unit_norms();
        let base = derive_constants(&unit_params(), &n).unwrap();
        for bump in [
            |p: &mut ModelParams| p.a2 += 1.0,
            |p: &mut ModelParams| p.c1 += 2.0,
        ] {
            let mut p = unit_params();
            bump(&mut p);
            let dc = derive_constants(&p, &n).unwrap();
            assert!(dc.sigma >= base.sigma);
            assert!(dc.r_upper <= base.r_upper);
        }
        let mut n2 = n;
        n2.norm_u0_c2alpha = 100.0;
        let dc = derive_constants(&unit_params(), &n2).unwrap();
        assert!(dc.sigma >= base.sigma);
        assert!(dc.r_upper <= base.r_upper);
    }

    #[test]
    fn reaction_terms_basic() {
        let p = ModelParams {
            a1: 1.0,
            b1: 1.0,
            c1: 1.0,
            ..unit_params()
        };
        assert_eq!(reaction_u(0.0, 3.7, &p), 0.0);
        assert_eq!(reaction_v(5.0, 0.0, &p), 0.0);
        assert_eq!(reaction_u(1.0, 1.0, &p), -1.0);
        // logistic carrying capacity: v = a2/b2 with no predation
        assert_eq!(reaction_v(0.0, 1.0, &p), 0.0);
    }

    #[test]
    fn equilibrium_zeroes_both_reactions() {
        let cases = [
            (1.0, 1.0, 3.0, 1.0, 2.0, Some((5.0 / 3.0, 4.0 / 3.0))),
            (10.0, 1.0, 1.0, 1.0, 1.0, None),
            (0.0, 1.0, 2.0, 1.0, 1.0, Some((1.0, 1.0))),
        ];
        for (a1, b1, a2, b2, c1, expected) in cases {
            let p = ModelParams {
                d1: 1.0,
                d2: 1.0,
                chi: 0.0,
                xi: 0.0,
                a1,
                b1,
                a2,
                b2,
                c1,
            };
            let eq = coexistence_equilibrium(&p);
            match (eq, expected) {
                (Some((u, v)), Some((ue, ve))) => {
                    assert!((u - ue).abs() < 1e-12 && (v - ve).abs() < 1e-12);
                    let scale = 1e-12 * (1.0 + u.abs() + v.abs());
                    assert!(reaction_u(u, v, &p).abs() <= scale);
                    assert!(reaction_v(u, v, &p).abs() <= scale);
                    assert!(u > 0.0 && v > 0.0);
                }
                (None, None) => {}
                other => panic!("equilibrium mismatch: {other:?}"),
            }
        }
    }

    #[test]
    fn equilibrium_never_exists_without_conversion() {
        let p = ModelParams {
            c1: 0.0,
            ..unit_params()
        };
        assert!(coexistence_equilibrium(&p).is_none());
    }

    #[test]
    fn admissibility_flags_and_margins() {
        let dc = derive_constants(&unit_params(), &unit_norms()).unwrap();
        let ok = check_taxis_admissible(
            &ModelParams {
                chi: 0.05,
                xi: 0.01,
                ..unit_params()
            },
            &dc,
        );
        assert!(ok.chi_ok && ok.xi_ok);

        let too_big = check_taxis_admissible(
            &ModelParams {
                chi: 0.2,
                xi: 0.01,
                ..unit_params()
            },
            &dc,
        );
        assert!(!too_big.chi_ok);
        assert!((too_big.chi_margin - (-0.1)).abs() < 1e-15);

        // strict positivity required: zero taxis is inadmissible
        let zero = check_taxis_admissible(
            &ModelParams {
                chi: 0.0,
                xi: 0.0,
                ..unit_params()
            },
            &dc,
        );
        assert!(!zero.chi_ok && !zero.xi_ok);
        assert!((dc.chi_max - dc.sigma * dc.xi_max).abs() <= 1e-15 * dc.chi_max);
    }

    #[test]
    fn scaling_identity_for_reaction_u() {
        // reaction_u((σ/R̂)û, (σ/R̂)v̂) = (σ/R̂)·û·(−a1 + (σc1/R̂)v̂ − (σb1/R̂)û)
        let p = unit_params();
        let dc = derive_constants(&p, &unit_norms()).unwrap();
        let s_over_r = dc.sigma / dc.r_upper;
        for (uh, vh) in [(0.2, 0.3), (1.5, 0.01), (0.0, 1.0), (3.0, 2.0)] {
            let lhs = reaction_u(s_over_r * uh, s_over_r * vh, &p);
            let rhs =
                s_over_r * (uh * (-p.a1 + s_over_r * p.c1 * vh - s_over_r * p.b1 * uh));
            assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs() + rhs.abs()));
        }
    }

    #[test]
    fn overflow_names_the_offending_constant() {
        let p = ModelParams {
            d1: 1e308,
            d2: 1e308,
            chi: 0.0,
            xi: 0.0,
            a1: 0.0,
            b1: 1e308,
            a2: 0.0,
            b2: 1e308,
            c1: 0.0,
        };
        let n = InitialDataNorms {
            norm_u0_c2alpha: 0.0,
            norm_v0_c2alpha: 0.0,
            alpha: 0.5,
        };
        match derive_constants(&p, &n) {
            Err(SimError::NonFiniteConstant { name }) => {
                assert_eq!(name, "h1");
            }
            other => panic!("expected overflow error, got {other:?}"),
        }
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = unit_params();
        p.d1 = 0.0;
        assert!(p.validate().is_err());
        let mut p = unit_params();
        p.b2 = -1.0;
        assert!(p.validate().is_err());
        let mut p = unit_params();
        p.chi = f64::NAN;
        assert!(p.validate().is_err());
        let n = InitialDataNorms {
            norm_u0_c2alpha: 1.0,
            norm_v0_c2alpha: 1.0,
            alpha: 1.0,
        };
        assert!(n.validate().is_err());
    }
}
