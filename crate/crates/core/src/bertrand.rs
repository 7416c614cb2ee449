//! Bertrand couples: coefficient fit, mate construction, predicted mate
//! curvatures and numerical verification of the couple theorems.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::curve::{body_velocity, interpolate_uniform, reparametrize_arclength, RawSamples};
use crate::error::{Error, Result};
use crate::frenet::{self, ClassifyOptions, FrenetData, FrenetOptions, MIN_STATISTIC_SAMPLES};
use crate::lie::{
    compose, distance, exp_group, transport_to_base, AlgebraVector, GroupKind, GroupPoint,
};
use crate::stats;

/// Relative singular value below which the two-column design matrix is
/// treated as rank one.
pub const RANK_THRESHOLD: f64 = 1e-8;
/// Smallest admissible transfer speed `ψ'`.
pub const MIN_TRANSFER_SPEED: f64 = 1e-8;
/// `|H|` at or below which predicted mate curvatures are masked.
pub const MIN_HARMONIC: f64 = 1e-10;
/// Samples of α dropped at each end before offsetting: the normal there
/// comes from the lower-order boundary stencils of two nested derivatives.
pub const OFFSET_TRIM: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BertrandFit {
    pub lambda: f64,
    pub mu: f64,
    /// RMS of `λκ + μκH - 1` over the fitted samples.
    pub residual: f64,
    pub degenerate: bool,
    /// Angle between corresponding tangents, `cos θ = μ/√(λ² + μ²)`.
    pub theta: f64,
    pub samples: usize,
}

fn finite_pairs(kappa: &[f64], harmonic: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if kappa.len() != harmonic.len() {
        return Err(Error::GridMismatch(format!(
            "kappa has {} samples, H has {}",
            kappa.len(),
            harmonic.len()
        )));
    }
    let (k, h): (Vec<f64>, Vec<f64>) = kappa
        .iter()
        .zip(harmonic)
        .filter(|(k, h)| k.is_finite() && h.is_finite())
        .map(|(k, h)| (*k, *h))
        .unzip();
    if k.len() < MIN_STATISTIC_SAMPLES {
        return Err(Error::TooFewSamples {
            needed: MIN_STATISTIC_SAMPLES,
            got: k.len(),
        });
    }
    Ok((k, h))
}

fn residual(kappa: &[f64], harmonic: &[f64], lambda: f64, mu: f64) -> f64 {
    let r: Vec<f64> = kappa
        .iter()
        .zip(harmonic)
        .map(|(k, h)| lambda * k + mu * k * h - 1.0)
        .collect();
    stats::rms(&r)
}

fn tangent_angle(lambda: f64, mu: f64) -> f64 {
    (mu / lambda.hypot(mu)).clamp(-1.0, 1.0).acos()
}

/// Singular values `s1 ≥ s2` of `[[a, b], [0, d]]` and the unit right
/// singular vector of `s1`. `s2` comes from the determinant so that it keeps
/// full relative accuracy when it is tiny.
fn svd_upper2(a: f64, b: f64, d: f64) -> (f64, f64, [f64; 2]) {
    let p = (a + d).hypot(b);
    let q = (a - d).hypot(b);
    let s1 = 0.5 * (p + q);
    if !(s1 > 0.0) {
        return (0.0, 0.0, [1.0, 0.0]);
    }
    let s2 = (a * d).abs() / s1;
    // eigenvector of [[a², ab], [ab, b² + d²]] for s1², from whichever row
    // of the shifted matrix is larger
    let l = s1 * s1;
    let e1 = [a * b, l - a * a];
    let e2 = [l - b * b - d * d, a * b];
    let e = if e1[0].hypot(e1[1]) >= e2[0].hypot(e2[1]) {
        e1
    } else {
        e2
    };
    let n = e[0].hypot(e[1]);
    let v = if n > 0.0 {
        [e[0] / n, e[1] / n]
    } else {
        [1.0, 0.0]
    };
    (s1, s2, v)
}

/// Least-squares fit of `λκ + μκH = 1`. Non-finite samples are skipped.
pub fn fit_bertrand_coefficients(kappa: &[f64], harmonic: &[f64]) -> Result<BertrandFit> {
    let (k, h) = finite_pairs(kappa, harmonic)?;
    let n = k.len();
    let a = DMatrix::from_fn(n, 2, |i, j| if j == 0 { k[i] } else { k[i] * h[i] });
    let b = DVector::from_element(n, 1.0);
    // reduce to the 2×2 triangular factor, whose singular values are those
    // of the design matrix
    let qr = a.qr();
    let mut qtb = b;
    qr.q_tr_mul(&mut qtb);
    let r = qr.r();
    let (r11, r12, r22) = (r[(0, 0)], r[(0, 1)], r[(1, 1)]);
    let (c1, c2) = (qtb[0], qtb[1]);
    let (s1, s2, v) = svd_upper2(r11, r12, r22);
    let degenerate = !(s1 > 0.0) || s2 / s1 < RANK_THRESHOLD;
    let x = if !(s1 > 0.0) {
        [0.0, 0.0]
    } else if degenerate {
        // minimum-norm solution of the rank-one truncation
        let u = [(r11 * v[0] + r12 * v[1]) / s1, r22 * v[1] / s1];
        let coef = (u[0] * c1 + u[1] * c2) / s1;
        [v[0] * coef, v[1] * coef]
    } else {
        let x2 = c2 / r22;
        [(c1 - r12 * x2) / r11, x2]
    };
    let [lambda, mu] = x;
    Ok(BertrandFit {
        lambda,
        mu,
        residual: residual(&k, &h, lambda, mu),
        degenerate,
        theta: tangent_angle(lambda, mu),
        samples: n,
    })
}

impl BertrandFit {
    /// Fit with `λ` prescribed; `μ` is the mean of `(1 - λκ)/(κH)`.
    pub fn with_lambda(kappa: &[f64], harmonic: &[f64], lambda: f64) -> Result<BertrandFit> {
        let (k, h) = finite_pairs(kappa, harmonic)?;
        let ratios: Vec<f64> = k
            .iter()
            .zip(&h)
            .filter(|(_, h)| h.abs() > MIN_HARMONIC)
            .map(|(k, h)| (1.0 - lambda * k) / (k * h))
            .collect();
        if ratios.len() < MIN_STATISTIC_SAMPLES {
            return Err(Error::DegenerateMate(
                "harmonic curvature vanishes, μ is not identifiable".into(),
            ));
        }
        let mu = stats::mean(&ratios);
        Ok(BertrandFit {
            lambda,
            mu,
            residual: residual(&k, &h, lambda, mu),
            degenerate: false,
            theta: tangent_angle(lambda, mu),
            samples: k.len(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MateMode {
    /// `β = α · exp(λN)`.
    #[default]
    Geodesic,
    /// `β = α + λN` in coordinates; abelian only.
    Ambient,
}

impl MateMode {
    pub fn name(self) -> &'static str {
        match self {
            MateMode::Geodesic => "geodesic",
            MateMode::Ambient => "ambient",
        }
    }
}

#[derive(Debug, Clone)]
pub struct MateCurve {
    pub mode: MateMode,
    pub lambda: f64,
    /// Samples of α that were offset.
    pub range: std::ops::Range<usize>,
    /// Offset points `β(s_i)` for the samples in `range`.
    pub offset_points: Vec<GroupPoint>,
    pub frenet_beta: FrenetData,
    /// Arc length of β at each sample of α; NaN outside `range`.
    pub s_bar: Vec<f64>,
    /// `‖dβ/ds‖` on the grid of α; NaN outside `range`.
    pub psi_prime: Vec<f64>,
    /// `κH√(λ² + μ²)`, when a fit was supplied.
    pub psi_prime_predicted: Option<Vec<f64>>,
}

impl MateCurve {
    pub fn beta(&self) -> &crate::curve::CurveSamples {
        self.frenet_beta.curve()
    }
}

/// Offsets α along its principal normal by `λ` and runs the Frenet analysis
/// on the result.
pub fn construct_mate(
    alpha: &FrenetData,
    lambda: f64,
    mode: MateMode,
    fit: Option<&BertrandFit>,
    options: &FrenetOptions,
) -> Result<MateCurve> {
    if !(lambda != 0.0 && lambda.is_finite()) {
        return Err(Error::DegenerateMate(format!(
            "offset λ = {lambda} must be finite and nonzero"
        )));
    }
    let g = *alpha.group();
    if mode == MateMode::Ambient && g.kind() != GroupKind::AbelianR3 {
        return Err(Error::ModeUnsupported {
            mode: mode.name(),
            kind: g.kind(),
        });
    }
    let n = alpha.len();
    let range = OFFSET_TRIM.min(n / 2)..n.saturating_sub(OFFSET_TRIM).max(n / 2);
    if let Some(i) = range
        .clone()
        .find(|&i| !(alpha.kappa()[i] >= alpha.kappa_min()))
    {
        return Err(Error::DegenerateMate(format!(
            "principal normal of α undefined at sample {i} (κ = {:e})",
            alpha.kappa()[i]
        )));
    }
    let curve = alpha.curve();
    let offset_points = curve.points()[range.clone()]
        .iter()
        .zip(&alpha.normal()[range.clone()])
        .map(|(p, n)| match mode {
            MateMode::Geodesic => compose(p, &exp_group(&(*n * lambda), &g)),
            MateMode::Ambient => {
                let mut c = p.coords();
                for (ci, ni) in c.iter_mut().zip(n.to_array()) {
                    *ci += lambda * ni;
                }
                GroupPoint::from_coords(g.kind(), &c)
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let speed: Vec<f64> = body_velocity(&offset_points, curve.step(), &g)?
        .iter()
        .map(AlgebraVector::norm)
        .collect();
    if let Some((i, v)) = speed
        .iter()
        .enumerate()
        .find(|(_, v)| !(**v > MIN_TRANSFER_SPEED))
    {
        return Err(Error::DegenerateMate(format!(
            "mate is not regular: ψ' = {v:e} at sample {}",
            i + range.start
        )));
    }
    let spread = |v: &[f64]| -> Vec<f64> {
        let mut out = vec![f64::NAN; n];
        out[range.clone()].copy_from_slice(v);
        out
    };
    let psi_prime = spread(&speed);

    let raw = RawSamples::new(g, curve.s()[range.clone()].to_vec(), offset_points.clone())?;
    let beta = reparametrize_arclength(&raw)?;
    let frenet_beta = match frenet::analyze(&beta, options) {
        Ok(fd) => fd,
        Err(Error::EverywhereDegenerate) => {
            return Err(Error::DegenerateMate("mate is a geodesic".into()))
        }
        Err(e) => return Err(e),
    };
    if let Some(i) = frenet_beta
        .window()
        .find(|&i| !(frenet_beta.kappa()[i] >= options.kappa_min))
    {
        return Err(Error::DegenerateMate(format!(
            "mate curvature {:e} below κ_min at sample {i}",
            frenet_beta.kappa()[i]
        )));
    }

    let psi_prime_predicted = match (fit, alpha.torsion()) {
        (Some(f), Some(t)) => {
            let norm = lambda.hypot(f.mu);
            Some(
                alpha
                    .kappa()
                    .iter()
                    .zip(&t.harmonic)
                    .map(|(k, h)| k * h * norm)
                    .collect(),
            )
        }
        _ => None,
    };
    Ok(MateCurve {
        mode,
        lambda,
        s_bar: spread(beta.source_arclength()),
        range,
        offset_points,
        frenet_beta,
        psi_prime,
        psi_prime_predicted,
    })
}

/// Mate curvature and torsion predicted from α alone:
/// `κ_β = (μ - λH)/((λ² + μ²)H)`, `τ_β = (λ + μH)/((λ² + μ²)H) + τ_G`.
///
/// An uncorrected variant of these formulas keeps an extra factor `κ`; on
/// the circular helix `a = 3, b = 4` with `λ = 1` it gives `0.012` and
/// `0.024` where the mate measures `0.1` and `0.2`.
pub fn predicted_mate_curvatures(
    fit: &BertrandFit,
    alpha: &FrenetData,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let t = alpha.require_torsion()?;
    let (l, m) = (fit.lambda, fit.mu);
    let norm2 = l * l + m * m;
    Ok(t.harmonic
        .iter()
        .zip(&t.tau_g)
        .map(|(h, tg)| {
            if h.abs() > MIN_HARMONIC {
                ((m - l * h) / (norm2 * h), (l + m * h) / (norm2 * h) + tg)
            } else {
                (f64::NAN, f64::NAN)
            }
        })
        .unzip())
}

/// Helix and slant-helix booleans of one curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CurveFlags {
    pub is_general_helix: bool,
    pub is_slant_helix: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoupleCheck {
    pub name: &'static str,
    pub statistic: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Whether the check is expected to hold: the theorems are asserted for
    /// abelian couples and only reported elsewhere.
    pub asserted: bool,
}

/// Couple series on the grid of α. Samples where α or its partner on β
/// is not retained are NaN.
#[derive(Debug, Clone)]
pub struct CoupleReport {
    pub s: Vec<f64>,
    pub retained: Vec<bool>,
    pub distance: Vec<f64>,
    pub tangent_angle: Vec<f64>,
    pub normal_alignment: Vec<f64>,
    pub tau_g_alpha: Vec<f64>,
    pub tau_g_beta: Vec<f64>,
    pub product: Vec<f64>,
    pub harmonic_beta: Vec<f64>,
    pub kappa_beta_predicted: Vec<f64>,
    pub kappa_beta_measured: Vec<f64>,
    pub tau_beta_predicted: Vec<f64>,
    pub tau_beta_measured: Vec<f64>,
    pub psi_prime_measured: Vec<f64>,
    pub psi_prime_predicted: Vec<f64>,
    pub lambda: f64,
    pub mu: f64,
    pub expected_tangent_angle: f64,
    pub alpha_flags: CurveFlags,
    pub beta_flags: CurveFlags,
    pub checks: Vec<CoupleCheck>,
}

impl CoupleReport {
    pub fn check(&self, name: &str) -> Option<&CoupleCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Named series, for reporting.
    pub fn series(&self) -> Vec<(&'static str, &[f64])> {
        vec![
            ("distance", &self.distance),
            ("tangent_angle", &self.tangent_angle),
            ("normal_alignment", &self.normal_alignment),
            ("tau_g_alpha", &self.tau_g_alpha),
            ("tau_g_beta", &self.tau_g_beta),
            ("product", &self.product),
            ("harmonic_beta", &self.harmonic_beta),
            ("kappa_beta_predicted", &self.kappa_beta_predicted),
            ("kappa_beta_measured", &self.kappa_beta_measured),
            ("tau_beta_predicted", &self.tau_beta_predicted),
            ("tau_beta_measured", &self.tau_beta_measured),
            ("psi_prime_measured", &self.psi_prime_measured),
            ("psi_prime_predicted", &self.psi_prime_predicted),
        ]
    }
}

pub const DISTANCE_TOL: f64 = 1e-5;
pub const ANGLE_TOL: f64 = 1e-5;
pub const ALIGNMENT_TOL: f64 = 1e-6;
pub const CURVATURE_TOL: f64 = 1e-4;
pub const GROUP_TORSION_TOL: f64 = 1e-6;
pub const PRODUCT_TOL: f64 = 1e-4;
pub const TRANSFER_SPEED_TOL: f64 = 1e-5;

fn flags(fd: &FrenetData, options: &ClassifyOptions) -> Result<CurveFlags> {
    let r = frenet::classify(fd, options)?;
    Ok(CurveFlags {
        is_general_helix: r.is_general_helix,
        is_slant_helix: r.is_slant_helix,
    })
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    stats::max_abs(&stats::finite(
        &a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>(),
    ))
}

/// Compares α with its mate sample by sample. β quantities are interpolated
/// at the corresponding arc length `s̄`, and β's frame vectors are brought
/// back to α by parallel transport along the connecting geodesic.
pub fn verify_couple(
    alpha: &FrenetData,
    mate: &MateCurve,
    fit: &BertrandFit,
    options: &ClassifyOptions,
) -> Result<CoupleReport> {
    let g = *alpha.group();
    let beta = &mate.frenet_beta;
    let alpha_t = alpha.require_torsion()?;
    let beta_t = beta.require_torsion()?;
    let step = beta.curve().step();
    let at = &mate.s_bar;
    let alpha_retained = alpha.retained();

    let beta_kappa = interpolate_uniform(&beta.masked(beta.kappa()), step, at);
    let beta_tau = interpolate_uniform(&beta.masked(&beta_t.tau), step, at);
    let beta_tau_g = interpolate_uniform(&beta.masked(&beta_t.tau_g), step, at);
    let beta_h = interpolate_uniform(&beta.masked(&beta_t.harmonic), step, at);
    let beta_retained = beta.retained();
    let masked_frame = |v: &[AlgebraVector]| -> Vec<AlgebraVector> {
        v.iter()
            .zip(&beta_retained)
            .map(|(x, r)| if *r { *x } else { AlgebraVector::nan() })
            .collect()
    };
    let beta_tangent = interpolate_uniform(&masked_frame(beta.tangent()), step, at);
    let beta_normal = interpolate_uniform(&masked_frame(beta.normal()), step, at);

    // points of the resampled mate, read back at s̄
    let kind = g.kind();
    let coords: Vec<Vec<f64>> = beta
        .curve()
        .points()
        .iter()
        .map(GroupPoint::coords)
        .collect();
    let beta_coords: Vec<Vec<f64>> = (0..kind.point_dimension())
        .map(|d| {
            let column: Vec<f64> = coords.iter().map(|c| c[d]).collect();
            interpolate_uniform(&column, step, at)
        })
        .collect();

    let n = alpha.len();
    let mut dist = Vec::with_capacity(n);
    let mut angle = Vec::with_capacity(n);
    let mut align = Vec::with_capacity(n);
    for i in 0..n {
        if !alpha_retained[i] || !beta_tangent[i].is_finite() || !beta_normal[i].is_finite() {
            dist.push(f64::NAN);
            angle.push(f64::NAN);
            align.push(f64::NAN);
            continue;
        }
        let c: Vec<f64> = beta_coords.iter().map(|col| col[i]).collect();
        let p = GroupPoint::from_coords(kind, &c)?;
        dist.push(distance(&alpha.curve().points()[i], &p, &g)?);
        let w = alpha.normal()[i] * mate.lambda;
        let tb = transport_to_base(&w, &beta_tangent[i], &g);
        let nb = transport_to_base(&w, &beta_normal[i], &g);
        angle.push(alpha.tangent()[i].dot(&tb).clamp(-1.0, 1.0).acos());
        align.push(alpha.normal()[i].dot(&nb).abs());
    }

    // samples retained in α whose partner is retained in β
    let retained: Vec<bool> = (0..n)
        .map(|i| {
            dist[i].is_finite()
                && beta_kappa[i].is_finite()
                && beta_tau[i].is_finite()
                && beta_h[i].is_finite()
        })
        .collect();
    let mask = |v: Vec<f64>| -> Vec<f64> {
        v.into_iter()
            .zip(&retained)
            .map(|(x, r)| if *r { x } else { f64::NAN })
            .collect()
    };
    let dist = mask(dist);
    let angle = mask(angle);
    let align = mask(align);

    let (kp, tp) = predicted_mate_curvatures(fit, alpha)?;
    let kappa_beta_predicted = mask(kp);
    let tau_beta_predicted = mask(tp);
    let kappa_beta_measured = mask(beta_kappa);
    let tau_beta_measured = mask(beta_tau);
    let harmonic_beta = mask(beta_h);
    let product = mask(
        (0..n)
            .map(|i| {
                alpha.kappa()[i] * kappa_beta_measured[i] * alpha_t.harmonic[i] * harmonic_beta[i]
            })
            .collect(),
    );
    let psi_prime_measured = mask(mate.psi_prime.clone());
    let psi_prime_predicted = mask(match &mate.psi_prime_predicted {
        Some(p) => p.clone(),
        None => {
            let norm = fit.lambda.hypot(fit.mu);
            (0..n)
                .map(|i| alpha.kappa()[i] * alpha_t.harmonic[i] * norm)
                .collect()
        }
    });
    let tau_g_alpha = mask(alpha_t.tau_g.clone());
    let tau_g_beta = mask(beta_tau_g);

    let asserted = g.is_abelian();
    let expected_tangent_angle = fit.theta;
    let alpha_flags = flags(alpha, options)?;
    let beta_flags = flags(beta, options)?;

    let finite_angle = stats::finite(&angle);
    let kappa_pred_abs: Vec<f64> = kappa_beta_predicted.iter().map(|x| x.abs()).collect();
    let statistics = [
        ("fixed_distance", relative_stddev(&dist), DISTANCE_TOL),
        (
            "tangent_angle_constant",
            stats::stddev(&finite_angle),
            ANGLE_TOL,
        ),
        (
            "tangent_angle_value",
            (stats::mean(&finite_angle) - expected_tangent_angle).abs(),
            ANGLE_TOL,
        ),
        (
            "normal_alignment",
            1.0 - stats::min(&stats::finite(&align)),
            ALIGNMENT_TOL,
        ),
        (
            "mate_curvature",
            max_abs_diff(&kappa_beta_measured, &kappa_pred_abs),
            CURVATURE_TOL,
        ),
        (
            "mate_torsion",
            max_abs_diff(&tau_beta_measured, &tau_beta_predicted),
            CURVATURE_TOL,
        ),
        (
            "group_torsion_pair",
            max_abs_diff(&tau_g_beta, &tau_g_alpha),
            GROUP_TORSION_TOL,
        ),
        ("torsion_product", relative_stddev(&product), PRODUCT_TOL),
        (
            "transfer_speed",
            max_abs_diff(&psi_prime_measured, &psi_prime_predicted),
            TRANSFER_SPEED_TOL,
        ),
        (
            "helix_preserved",
            f64::from(u8::from(
                alpha_flags.is_general_helix != beta_flags.is_general_helix,
            )),
            0.0,
        ),
        (
            "slant_preserved",
            f64::from(u8::from(
                alpha_flags.is_slant_helix != beta_flags.is_slant_helix,
            )),
            0.0,
        ),
    ];
    let checks = statistics
        .into_iter()
        .map(|(name, statistic, tolerance)| CoupleCheck {
            name,
            statistic,
            tolerance,
            passed: statistic <= tolerance,
            asserted,
        })
        .collect();

    Ok(CoupleReport {
        s: alpha.s().to_vec(),
        retained,
        distance: dist,
        tangent_angle: angle,
        normal_alignment: align,
        tau_g_alpha,
        tau_g_beta,
        product,
        harmonic_beta,
        kappa_beta_predicted,
        kappa_beta_measured,
        tau_beta_predicted,
        tau_beta_measured,
        psi_prime_measured,
        psi_prime_predicted,
        lambda: mate.lambda,
        mu: fit.mu,
        expected_tangent_angle,
        alpha_flags,
        beta_flags,
        checks,
    })
}

/// Population standard deviation over |mean| of the finite entries.
fn relative_stddev(x: &[f64]) -> f64 {
    stats::Summary::of(x).relative_stddev()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{build_curve, CurveSpec, Family, Profile};
    use crate::lie::GroupStructure;

    // mate torsion goes through five nested derivatives; a coarser grid
    // keeps their roundoff below the truncation error
    fn helix(a: f64, b: f64) -> FrenetData {
        let spec = CurveSpec::family(GroupStructure::abelian(), Family::AbelianHelix { a, b })
            .with_samples(512);
        frenet::analyze(&build_curve(&spec).unwrap(), &FrenetOptions::default()).unwrap()
    }

    fn retained_kh(fd: &FrenetData) -> (Vec<f64>, Vec<f64>) {
        (
            fd.retained_values(fd.kappa()),
            fd.retained_values(&fd.torsion().unwrap().harmonic),
        )
    }

    #[test]
    fn constant_curvatures_give_the_minimum_norm_fit() {
        // helix (a, b): κ = a/(a² + b²), H = b/a, minimum-norm fit (a, b)
        for (a, b) in [(3.0, 4.0), (2.0, 1.0), (1.0, 3.0), (0.5, 7.0)] {
            for n in [50, 2048] {
                let r2: f64 = a * a + b * b;
                let fit = fit_bertrand_coefficients(&vec![a / r2; n], &vec![b / a; n]).unwrap();
                assert!(fit.degenerate);
                assert!((fit.lambda - a).abs() < 1e-10, "{a} {b} {n}: {fit:?}");
                assert!((fit.mu - b).abs() < 1e-10, "{a} {b} {n}: {fit:?}");
                assert!(fit.residual <= 1e-10);
            }
        }
    }

    #[test]
    fn triangular_singular_values() {
        for (a, b, d) in [
            (5.43, 7.24, 1.2e-14),
            (1.0, 0.0, 2.0),
            (-2.0, 3.0, 0.5),
            (0.0, 1.0, 0.0),
        ] {
            let (s1, s2, v) = svd_upper2(a, b, d);
            let m = nalgebra::Matrix2::new(a, b, 0.0, d);
            assert!((s1 * s1 + s2 * s2 - m.norm_squared()).abs() < 1e-12 * m.norm_squared());
            assert!((s1 * s2 - (a * d).abs()).abs() < 1e-12 * m.norm_squared());
            let mv = m * nalgebra::Vector2::new(v[0], v[1]);
            assert!((mv.norm() - s1).abs() < 1e-12 * s1);
        }
    }

    #[test]
    fn generic_fit_recovers_coefficients() {
        let kappa: Vec<f64> = (0..100)
            .map(|i| 0.2 + 0.1 * (i as f64 * 0.05).sin())
            .collect();
        let h: Vec<f64> = kappa.iter().map(|k| (1.0 - 1.5 * k) / (2.5 * k)).collect();
        let fit = fit_bertrand_coefficients(&kappa, &h).unwrap();
        assert!(!fit.degenerate);
        assert!((fit.lambda - 1.5).abs() < 1e-9 && (fit.mu - 2.5).abs() < 1e-9);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn planar_curve_is_rank_one() {
        let kappa: Vec<f64> = (0..40).map(|i| 1.0 + 0.01 * i as f64).collect();
        let fit = fit_bertrand_coefficients(&kappa, &vec![0.0; 40]).unwrap();
        assert!(fit.degenerate);
        assert_eq!(fit.mu, 0.0);
        assert!(fit.residual > 1e-3);
    }

    #[test]
    fn fit_needs_eight_samples() {
        assert!(matches!(
            fit_bertrand_coefficients(&[1.0; 7], &[1.0; 7]),
            Err(Error::TooFewSamples { needed: 8, got: 7 })
        ));
    }

    #[test]
    fn helix_mate_is_the_radius_two_helix() {
        let fd = helix(3.0, 4.0);
        let (k, h) = retained_kh(&fd);
        let fit = BertrandFit::with_lambda(&k, &h, 1.0).unwrap();
        assert!((fit.mu - 5.5).abs() < 1e-6);
        let mate = construct_mate(
            &fd,
            1.0,
            MateMode::Geodesic,
            Some(&fit),
            &FrenetOptions::default(),
        )
        .unwrap();
        let beta = &mate.frenet_beta;
        let bt = beta.torsion().unwrap();
        for i in beta.window() {
            assert!((beta.kappa()[i] - 0.1).abs() < 1e-5);
            assert!((bt.tau[i] - 0.2).abs() < 1e-5);
        }
        let predicted = mate.psi_prime_predicted.as_ref().unwrap();
        for i in fd.window() {
            assert!((mate.psi_prime[i] - 0.894427191).abs() < 1e-6);
            assert!((predicted[i] - mate.psi_prime[i]).abs() < 1e-6);
        }
    }

    #[test]
    fn ambient_and_geodesic_offsets_agree_in_r3() {
        let fd = helix(3.0, 4.0);
        let a = construct_mate(
            &fd,
            1.0,
            MateMode::Geodesic,
            None,
            &FrenetOptions::default(),
        )
        .unwrap();
        let b =
            construct_mate(&fd, 1.0, MateMode::Ambient, None, &FrenetOptions::default()).unwrap();
        for (p, q) in a.offset_points.iter().zip(&b.offset_points) {
            for (x, y) in p.coords().iter().zip(q.coords()) {
                assert!((x - y).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn offset_by_the_radius_collapses_the_mate() {
        let fd = helix(3.0, 4.0);
        let err = construct_mate(
            &fd,
            3.0,
            MateMode::Geodesic,
            None,
            &FrenetOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::DegenerateMate(_)), "{err:?}");
    }

    #[test]
    fn ambient_offset_is_abelian_only() {
        let spec = CurveSpec::family(
            GroupStructure::su2(),
            Family::FrenetOde {
                kappa: Profile::constant(0.5),
                tau: Profile::constant(1.3),
            },
        );
        let fd = frenet::analyze(&build_curve(&spec).unwrap(), &FrenetOptions::default()).unwrap();
        assert!(matches!(
            construct_mate(&fd, 0.5, MateMode::Ambient, None, &FrenetOptions::default()),
            Err(Error::ModeUnsupported { .. })
        ));
    }

    #[test]
    fn uncorrected_mate_curvatures_are_off_by_kappa() {
        let fd = helix(3.0, 4.0);
        let (k, h) = retained_kh(&fd);
        let fit = BertrandFit::with_lambda(&k, &h, 1.0).unwrap();
        let (kb, tb) = predicted_mate_curvatures(&fit, &fd).unwrap();
        let i = fd.len() / 2;
        assert!((kb[i] - 0.1).abs() < 1e-6);
        assert!((tb[i] - 0.2).abs() < 1e-6);
        // the uncorrected variant keeps a factor κ in the numerator
        assert!((fd.kappa()[i] * kb[i] - 0.012).abs() < 1e-6);
        assert!((fd.kappa()[i] * tb[i] - 0.024).abs() < 1e-6);
    }

    #[test]
    fn helix_couple_checks() {
        let fd = helix(3.0, 4.0);
        let (k, h) = retained_kh(&fd);
        let fit = BertrandFit::with_lambda(&k, &h, 1.0).unwrap();
        let mate = construct_mate(
            &fd,
            1.0,
            MateMode::Geodesic,
            Some(&fit),
            &FrenetOptions::default(),
        )
        .unwrap();
        let report = verify_couple(&fd, &mate, &fit, &ClassifyOptions::default()).unwrap();
        for c in &report.checks {
            assert!(c.passed, "{c:?}");
        }
        let i = fd.len() / 2;
        assert!((report.distance[i] - 1.0).abs() < 1e-5);
        assert!((report.tangent_angle[i].cos() - 0.98387).abs() < 1e-5);
        assert!((report.product[i] - 0.032).abs() < 1e-5);
        assert!((report.harmonic_beta[i] - 2.0).abs() < 1e-5);
    }
}
