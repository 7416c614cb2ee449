//! Builtin curve families.

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Deserializer, Serialize};

use super::ode::{integrate_frenet, FrenetLaw};
use crate::error::{Error, Result};
use crate::lie::{compose, exp_group, AlgebraVector, GroupKind, GroupPoint, GroupStructure};

/// One sinusoidal term `amp · sin(freq · t + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Harmonic {
    pub amp: f64,
    pub freq: f64,
    #[serde(default)]
    pub phase: f64,
}

/// A scalar function of the curve parameter:
/// `(Σ poly[k] tᵏ + Σ amp sin(freq t + phase)) / Σ den[k] tᵏ`.
///
/// An empty denominator means 1. In JSON a bare number is accepted as a
/// constant profile.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Profile {
    pub poly: Vec<f64>,
    pub sin: Vec<Harmonic>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub den: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileFields {
    #[serde(default)]
    poly: Vec<f64>,
    #[serde(default)]
    sin: Vec<Harmonic>,
    #[serde(default)]
    den: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ProfileRepr {
    Constant(f64),
    Full(ProfileFields),
}

impl<'de> Deserialize<'de> for Profile {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        Ok(match ProfileRepr::deserialize(deserializer)? {
            ProfileRepr::Constant(c) => Profile::constant(c),
            ProfileRepr::Full(f) => Profile {
                poly: f.poly,
                sin: f.sin,
                den: f.den,
            },
        })
    }
}

fn horner(coeffs: &[f64], t: f64) -> (f64, f64) {
    let mut value = 0.0;
    let mut slope = 0.0;
    for &c in coeffs.iter().rev() {
        slope = slope * t + value;
        value = value * t + c;
    }
    (value, slope)
}

impl Profile {
    pub fn constant(c: f64) -> Self {
        Self::polynomial(vec![c])
    }

    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        Self {
            poly: coeffs,
            ..Self::default()
        }
    }

    pub fn sine(offset: f64, amp: f64, freq: f64) -> Self {
        Self {
            poly: vec![offset],
            sin: vec![Harmonic {
                amp,
                freq,
                phase: 0.0,
            }],
            den: Vec::new(),
        }
    }

    pub fn over(mut self, den: Vec<f64>) -> Self {
        self.den = den;
        self
    }

    /// Value and first derivative at `t`.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let (mut num, mut dnum) = horner(&self.poly, t);
        for h in &self.sin {
            let arg = h.freq * t + h.phase;
            num += h.amp * arg.sin();
            dnum += h.amp * h.freq * arg.cos();
        }
        if self.den.is_empty() {
            return (num, dnum);
        }
        let (den, dden) = horner(&self.den, t);
        (num / den, (dnum * den - num * dden) / (den * den))
    }

    pub fn value(&self, t: f64) -> f64 {
        self.eval(t).0
    }

    fn check(&self, name: &str) -> Result<()> {
        let finite = self.poly.iter().chain(&self.den).all(|x| x.is_finite())
            && self
                .sin
                .iter()
                .all(|h| h.amp.is_finite() && h.freq.is_finite() && h.phase.is_finite());
        if finite {
            Ok(())
        } else {
            Err(Error::InvalidSpec(format!(
                "profile `{name}` has non-finite coefficients"
            )))
        }
    }
}

/// Builtin curve families. The tag `family` selects the variant in JSON and
/// the remaining fields are the family parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Family {
    /// `(a cos t, a sin t, b t)` in ℝ³.
    AbelianHelix { a: f64, b: f64 },
    /// `(x(t), y(t), z(t))` in ℝ³.
    AbelianCoords { x: Profile, y: Profile, z: Profile },
    /// `exp(f1 X1) · exp(f2 X2) · exp(f3 X3)`.
    ExpProduct {
        f1: Profile,
        f2: Profile,
        f3: Profile,
    },
    /// `exp(t v)`.
    OneParamSubgroup { v: [f64; 3] },
    /// Unit-speed curve with prescribed curvature and torsion.
    FrenetOde { kappa: Profile, tau: Profile },
    /// Unit-speed curve with `λκ + μκH = 1` for the given curvature.
    BertrandOde {
        kappa: Profile,
        lambda: f64,
        mu: f64,
    },
    /// Unit-speed curve with `λκ(1 + H²) = 1` for the given harmonic curvature.
    MannheimOde { lambda: f64, h: Profile },
    /// Unit-speed curve with `κ(1 + H²)^{3/2} / H' = sigma` for the given `H`.
    SlantHelixOde { sigma: f64, h: Profile },
    /// Unit-speed curve that is both a Bertrand curve (`λκ + μκH = 1`) and a
    /// slant helix with constant `sigma`; `H` starts at `h0`.
    BertrandSlantOde {
        lambda: f64,
        mu: f64,
        sigma: f64,
        h0: f64,
    },
}

/// Static description of a family for listings and validation.
#[derive(Debug, Clone, Copy)]
pub struct FamilyInfo {
    pub name: &'static str,
    pub params: &'static [&'static str],
    pub groups: &'static [GroupKind],
    pub default_domain: [f64; 2],
    pub summary: &'static str,
}

const ALL_GROUPS: &[GroupKind] = &[GroupKind::AbelianR3, GroupKind::So3, GroupKind::Su2];
const ABELIAN_ONLY: &[GroupKind] = &[GroupKind::AbelianR3];

pub const FAMILIES: &[FamilyInfo] = &[
    FamilyInfo {
        name: "abelian_helix",
        params: &["a", "b"],
        groups: ABELIAN_ONLY,
        default_domain: [0.0, 4.0 * PI],
        summary: "circular helix (a cos t, a sin t, b t)",
    },
    FamilyInfo {
        name: "abelian_coords",
        params: &["x", "y", "z"],
        groups: ABELIAN_ONLY,
        default_domain: [0.0, 2.0 * PI],
        summary: "curve (x(t), y(t), z(t)) from three profiles",
    },
    FamilyInfo {
        name: "exp_product",
        params: &["f1", "f2", "f3"],
        groups: ALL_GROUPS,
        default_domain: [0.0, 2.0 * PI],
        summary: "exp(f1(t) X1) exp(f2(t) X2) exp(f3(t) X3)",
    },
    FamilyInfo {
        name: "one_param_subgroup",
        params: &["v"],
        groups: ALL_GROUPS,
        default_domain: [0.0, 2.0 * PI],
        summary: "one-parameter subgroup exp(t v) (a geodesic)",
    },
    FamilyInfo {
        name: "frenet_ode",
        params: &["kappa", "tau"],
        groups: ALL_GROUPS,
        default_domain: [0.0, 10.0],
        summary: "unit-speed curve integrated from curvature kappa(s) and torsion tau(s)",
    },
    FamilyInfo {
        name: "bertrand_ode",
        params: &["kappa", "lambda", "mu"],
        groups: ALL_GROUPS,
        default_domain: [0.0, 10.0],
        summary: "Bertrand curve: kappa(s) given, torsion from lambda*kappa + mu*kappa*H = 1",
    },
    FamilyInfo {
        name: "mannheim_ode",
        params: &["lambda", "h"],
        groups: ALL_GROUPS,
        default_domain: [0.0, 10.0],
        summary: "Mannheim curve: H(s) given, kappa = 1 / (lambda (1 + H^2))",
    },
    FamilyInfo {
        name: "slant_helix_ode",
        params: &["sigma", "h"],
        groups: ALL_GROUPS,
        default_domain: [0.0, 5.0],
        summary: "slant helix: H(s) given, kappa = sigma H' / (1 + H^2)^(3/2)",
    },
    FamilyInfo {
        name: "bertrand_slant_ode",
        params: &["lambda", "mu", "sigma", "h0"],
        groups: ALL_GROUPS,
        default_domain: [0.0, 2.0],
        summary: "curve that is both a Bertrand curve and a slant helix",
    },
];

impl Family {
    pub fn name(&self) -> &'static str {
        self.info().name
    }

    pub fn info(&self) -> &'static FamilyInfo {
        let idx = match self {
            Family::AbelianHelix { .. } => 0,
            Family::AbelianCoords { .. } => 1,
            Family::ExpProduct { .. } => 2,
            Family::OneParamSubgroup { .. } => 3,
            Family::FrenetOde { .. } => 4,
            Family::BertrandOde { .. } => 5,
            Family::MannheimOde { .. } => 6,
            Family::SlantHelixOde { .. } => 7,
            Family::BertrandSlantOde { .. } => 8,
        };
        &FAMILIES[idx]
    }

    pub fn lookup(name: &str) -> Result<&'static FamilyInfo> {
        FAMILIES
            .iter()
            .find(|f| f.name == name)
            .ok_or_else(|| Error::UnknownFamily(name.to_string()))
    }

    fn check_params(&self) -> Result<()> {
        let scalars: Vec<f64> = match self {
            Family::AbelianHelix { a, b } => vec![*a, *b],
            Family::OneParamSubgroup { v } => v.to_vec(),
            Family::BertrandOde { lambda, mu, .. } => vec![*lambda, *mu],
            Family::MannheimOde { lambda, .. } => vec![*lambda],
            Family::SlantHelixOde { sigma, .. } => vec![*sigma],
            Family::BertrandSlantOde {
                lambda,
                mu,
                sigma,
                h0,
            } => vec![*lambda, *mu, *sigma, *h0],
            _ => Vec::new(),
        };
        if scalars.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "family {} has non-finite parameters",
                self.name()
            )));
        }
        match self {
            Family::AbelianCoords { x, y, z } => {
                x.check("x")?;
                y.check("y")?;
                z.check("z")?;
            }
            Family::ExpProduct { f1, f2, f3 } => {
                f1.check("f1")?;
                f2.check("f2")?;
                f3.check("f3")?;
            }
            Family::FrenetOde { kappa, tau } => {
                kappa.check("kappa")?;
                tau.check("tau")?;
            }
            Family::BertrandOde { kappa, mu, .. } => {
                kappa.check("kappa")?;
                if *mu == 0.0 {
                    return Err(Error::InvalidSpec("bertrand_ode needs mu != 0".into()));
                }
            }
            Family::MannheimOde { lambda, h } => {
                h.check("h")?;
                if *lambda == 0.0 {
                    return Err(Error::InvalidSpec("mannheim_ode needs lambda != 0".into()));
                }
            }
            Family::SlantHelixOde { h, .. } => h.check("h")?,
            Family::BertrandSlantOde { sigma, .. } if *sigma == 0.0 => {
                return Err(Error::InvalidSpec(
                    "bertrand_slant_ode needs sigma != 0".into(),
                ));
            }
            _ => {}
        }
        Ok(())
    }

    /// Evaluates the family on the given parameter grid.
    pub fn sample(&self, g: &GroupStructure, t: &[f64]) -> Result<Vec<GroupPoint>> {
        self.check_params()?;
        let law = match self {
            Family::AbelianHelix { a, b } => {
                return Ok(t
                    .iter()
                    .map(|&t| GroupPoint::AbelianR3(Vector3::new(a * t.cos(), a * t.sin(), b * t)))
                    .collect())
            }
            Family::AbelianCoords { x, y, z } => {
                return Ok(t
                    .iter()
                    .map(|&t| {
                        GroupPoint::AbelianR3(Vector3::new(x.value(t), y.value(t), z.value(t)))
                    })
                    .collect())
            }
            Family::ExpProduct { f1, f2, f3 } => {
                return t
                    .iter()
                    .map(|&t| {
                        let a = exp_group(&AlgebraVector::new(f1.value(t), 0.0, 0.0), g);
                        let b = exp_group(&AlgebraVector::new(0.0, f2.value(t), 0.0), g);
                        let c = exp_group(&AlgebraVector::new(0.0, 0.0, f3.value(t)), g);
                        compose(&compose(&a, &b)?, &c)
                    })
                    .collect()
            }
            Family::OneParamSubgroup { v } => {
                let v = AlgebraVector::from_array(*v);
                return Ok(t.iter().map(|&t| exp_group(&(v * t), g)).collect());
            }
            Family::FrenetOde { kappa, tau } => FrenetLaw::Direct {
                kappa,
                tau,
                tau_g: 0.5 * g.bracket_scale(),
            },
            Family::BertrandOde { kappa, lambda, mu } => FrenetLaw::Bertrand {
                kappa,
                lambda: *lambda,
                mu: *mu,
            },
            Family::MannheimOde { lambda, h } => FrenetLaw::Mannheim { lambda: *lambda, h },
            Family::SlantHelixOde { sigma, h } => FrenetLaw::Slant { sigma: *sigma, h },
            Family::BertrandSlantOde {
                lambda,
                mu,
                sigma,
                h0,
            } => FrenetLaw::BertrandSlant {
                lambda: *lambda,
                mu: *mu,
                sigma: *sigma,
                h0: *h0,
            },
        };
        integrate_frenet(&law, g, t)
    }
}
