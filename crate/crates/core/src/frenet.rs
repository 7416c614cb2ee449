//! Frenet apparatus under the bi-invariant connection, the invariants
//! `τ_G`, `H`, `σ_N`, and the helix / slant helix / Mannheim / Bertrand
//! classifiers.
//!
//! All series live on the arc-length grid of the parent curve. Samples where
//! a quantity is undefined hold NaN; because every stencil touching a NaN
//! produces NaN, masks widen automatically through each derivative.
//! Statistics only ever use the *retained* samples: those inside the trimmed
//! window whose curvature is above `kappa_min` and whose invariants are
//! finite.

use std::ops::Range;

use serde::Serialize;

use crate::bertrand::{fit_bertrand_coefficients, BertrandFit};
use crate::curve::{derivative, CurveSamples};
use crate::error::{Error, Result};
use crate::lie::{
    bracket, covariant_derivative, frame_complete, metric, AlgebraVector, GroupStructure,
};
use crate::stats;

pub const DEFAULT_KAPPA_MIN: f64 = 1e-6;
pub const DEFAULT_H_MIN: f64 = 1e-6;
pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-3;

/// Samples excluded at each end of the grid from every statistic. Four
/// nested stencil applications (T, Ṫ, Ṅ, H') each reach two samples further
/// in from the lower-order boundary rule.
pub const TRIM: usize = 8;

/// Smallest number of samples a constancy test or fit is run on.
pub const MIN_STATISTIC_SAMPLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrenetOptions {
    pub kappa_min: f64,
    pub h_min: f64,
}

impl Default for FrenetOptions {
    fn default() -> Self {
        Self {
            kappa_min: DEFAULT_KAPPA_MIN,
            h_min: DEFAULT_H_MIN,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TorsionSeries {
    pub tau: Vec<f64>,
    pub tau_g: Vec<f64>,
    pub harmonic: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SigmaSeries {
    pub values: Vec<f64>,
    pub defined: Vec<bool>,
}

#[derive(Debug, Clone)]
pub struct FrenetData {
    curve: CurveSamples,
    normal: Vec<AlgebraVector>,
    binormal: Vec<AlgebraVector>,
    kappa: Vec<f64>,
    kappa_min: f64,
    window: Range<usize>,
    torsion: Option<TorsionSeries>,
    sigma: Option<SigmaSeries>,
}

impl FrenetData {
    pub fn curve(&self) -> &CurveSamples {
        &self.curve
    }

    pub fn group(&self) -> &GroupStructure {
        self.curve.group()
    }

    pub fn s(&self) -> &[f64] {
        self.curve.s()
    }

    pub fn len(&self) -> usize {
        self.kappa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kappa.is_empty()
    }

    pub fn tangent(&self) -> &[AlgebraVector] {
        self.curve.tangent()
    }

    pub fn normal(&self) -> &[AlgebraVector] {
        &self.normal
    }

    pub fn binormal(&self) -> &[AlgebraVector] {
        &self.binormal
    }

    pub fn kappa(&self) -> &[f64] {
        &self.kappa
    }

    pub fn kappa_min(&self) -> f64 {
        self.kappa_min
    }

    /// Index range that survives boundary trimming.
    pub fn window(&self) -> Range<usize> {
        self.window.clone()
    }

    pub fn torsion(&self) -> Option<&TorsionSeries> {
        self.torsion.as_ref()
    }

    pub fn sigma(&self) -> Option<&SigmaSeries> {
        self.sigma.as_ref()
    }

    pub fn require_torsion(&self) -> Result<&TorsionSeries> {
        self.torsion.as_ref().ok_or(Error::MissingStage("torsion"))
    }

    pub fn require_sigma(&self) -> Result<&SigmaSeries> {
        self.sigma.as_ref().ok_or(Error::MissingStage("sigma_n"))
    }

    pub fn is_retained(&self, i: usize) -> bool {
        if !self.window.contains(&i) || !(self.kappa[i] >= self.kappa_min) {
            return false;
        }
        match &self.torsion {
            Some(t) => t.tau[i].is_finite() && t.harmonic[i].is_finite(),
            None => self.normal[i].is_finite(),
        }
    }

    pub fn retained(&self) -> Vec<bool> {
        (0..self.len()).map(|i| self.is_retained(i)).collect()
    }

    pub fn retained_count(&self) -> usize {
        (0..self.len()).filter(|&i| self.is_retained(i)).count()
    }

    /// Copy of `values` with non-retained samples replaced by NaN.
    pub fn masked(&self, values: &[f64]) -> Vec<f64> {
        values
            .iter()
            .enumerate()
            .map(|(i, v)| if self.is_retained(i) { *v } else { f64::NAN })
            .collect()
    }

    /// Values at retained samples only.
    pub fn retained_values(&self, values: &[f64]) -> Vec<f64> {
        values
            .iter()
            .enumerate()
            .filter(|(i, _)| self.is_retained(*i))
            .map(|(_, v)| *v)
            .collect()
    }
}

/// Frame and curvature: `κ = ‖Ṫ‖`, `N = Ṫ/κ`, `B = T × N`. Since
/// `½[T, T] = 0` the covariant derivative `D_T T` equals `Ṫ`.
pub fn frenet_apparatus(curve: &CurveSamples, kappa_min: f64) -> Result<FrenetData> {
    let n = curve.len();
    let t = curve.tangent();
    let tdot = derivative(t, curve.step())?;
    let mut normal = Vec::with_capacity(n);
    let mut binormal = Vec::with_capacity(n);
    let mut kappa = Vec::with_capacity(n);
    for (ti, di) in t.iter().zip(&tdot) {
        let k = di.norm();
        kappa.push(k);
        if k >= kappa_min {
            // drop the O(h⁴) tangential leak of the stencil
            let ni = (*di - *ti * di.dot(ti)).normalized();
            binormal.push(frame_complete(ti, &ni)?);
            normal.push(ni);
        } else {
            normal.push(AlgebraVector::nan());
            binormal.push(AlgebraVector::nan());
        }
    }
    let window = TRIM.min(n / 2)..n.saturating_sub(TRIM).max(n / 2);
    if !window.clone().any(|i| kappa[i] >= kappa_min) {
        return Err(Error::EverywhereDegenerate);
    }
    Ok(FrenetData {
        curve: curve.clone(),
        normal,
        binormal,
        kappa,
        kappa_min,
        window,
        torsion: None,
        sigma: None,
    })
}

/// Fills `τ = ⟨D_T N, B⟩`, `τ_G = ½⟨[T, N], B⟩` and `H = (τ - τ_G)/κ`.
pub fn torsion_and_invariants(mut fd: FrenetData) -> Result<FrenetData> {
    let g = *fd.group();
    let t = fd.tangent();
    let dn = covariant_derivative(&fd.normal, t, fd.s(), &g)?;
    let n = fd.len();
    let mut tau = Vec::with_capacity(n);
    let mut tau_g = Vec::with_capacity(n);
    let mut harmonic = Vec::with_capacity(n);
    for i in 0..n {
        let b = &fd.binormal[i];
        let tg = 0.5 * metric(&bracket(&t[i], &fd.normal[i], &g), b);
        let ta = metric(&dn[i], b);
        tau.push(ta);
        tau_g.push(tg);
        harmonic.push((ta - tg) / fd.kappa[i]);
    }
    fd.torsion = Some(TorsionSeries {
        tau,
        tau_g,
        harmonic,
    });
    Ok(fd)
}

/// Multiple of the estimated roundoff level of `H'` below which `σ_N` is
/// left undefined.
pub const NOISE_SIGMAS: f64 = 8.0;

/// Roundoff level of a differentiated series, estimated from the median
/// absolute second difference (white noise of deviation σ has
/// second differences of deviation `σ√6`).
fn noise_floor(dh: &[f64]) -> f64 {
    let mut d2: Vec<f64> = dh
        .windows(3)
        .map(|w| (w[0] - 2.0 * w[1] + w[2]).abs())
        .filter(|x| x.is_finite())
        .collect();
    if d2.is_empty() {
        return 0.0;
    }
    let mid = d2.len() / 2;
    let (_, median, _) = d2.select_nth_unstable_by(mid, f64::total_cmp);
    1.4826 * *median / 6f64.sqrt()
}

/// `σ_N = κ(1 + H²)^{3/2} / H'` on a uniform grid, defined where `|H'|`
/// exceeds both `h_min` and [`NOISE_SIGMAS`] times the roundoff level of
/// `H'`. A constant `H` carries a roundoff `H'` that can reach `1e-6` on
/// long abelian curves, so the absolute threshold alone is not enough.
pub fn sigma_n_series(
    kappa: &[f64],
    harmonic: &[f64],
    step: f64,
    h_min: f64,
) -> Result<SigmaSeries> {
    if kappa.len() != harmonic.len() {
        return Err(Error::GridMismatch(format!(
            "kappa has {} samples, H has {}",
            kappa.len(),
            harmonic.len()
        )));
    }
    let dh = derivative(harmonic, step)?;
    let threshold = h_min.max(NOISE_SIGMAS * noise_floor(&dh));
    let mut values = Vec::with_capacity(kappa.len());
    let mut defined = Vec::with_capacity(kappa.len());
    for ((k, h), d) in kappa.iter().zip(harmonic).zip(&dh) {
        let ok = d.is_finite() && d.abs() > threshold && k.is_finite();
        defined.push(ok);
        values.push(if ok {
            k * (1.0 + h * h).powf(1.5) / d
        } else {
            f64::NAN
        });
    }
    Ok(SigmaSeries { values, defined })
}

pub fn sigma_n(mut fd: FrenetData, h_min: f64) -> Result<FrenetData> {
    let torsion = fd.require_torsion()?;
    let kappa = fd.masked(&fd.kappa);
    let mut sigma = sigma_n_series(&kappa, &torsion.harmonic, fd.curve.step(), h_min)?;
    for (i, d) in sigma.defined.iter_mut().enumerate() {
        if !fd.window.contains(&i) {
            *d = false;
            sigma.values[i] = f64::NAN;
        }
    }
    fd.sigma = Some(sigma);
    Ok(fd)
}

/// Frame, torsion and `σ_N` in one pass.
pub fn analyze(curve: &CurveSamples, options: &FrenetOptions) -> Result<FrenetData> {
    let fd = frenet_apparatus(curve, options.kappa_min)?;
    let fd = torsion_and_invariants(fd)?;
    sigma_n(fd, options.h_min)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions {
    pub tol: f64,
    /// Count general helices (fully masked `σ_N`) as degenerate slant helices.
    pub helix_as_slant: bool,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_CLASSIFY_TOL,
            helix_as_slant: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub is_general_helix: bool,
    /// Mean of `H`, the constant `c` in `τ = cκ + τ_G`.
    pub helix_constant: f64,
    pub helix_residual: f64,
    pub is_slant_helix: bool,
    /// Mean of `σ_N` (`tan θ`).
    pub slant_constant: f64,
    pub slant_residual: f64,
    pub slant_samples: usize,
    pub is_mannheim: bool,
    pub mannheim_lambda: f64,
    pub mannheim_residual: f64,
    pub is_bertrand: bool,
    pub bertrand: Option<BertrandFit>,
    pub tolerance: f64,
}

pub fn classify(fd: &FrenetData, options: &ClassifyOptions) -> Result<ClassificationReport> {
    let tol = options.tol;
    let torsion = fd.require_torsion()?;
    let sigma = fd.require_sigma()?;
    let h = fd.retained_values(&torsion.harmonic);
    let kappa = fd.retained_values(&fd.kappa);

    let (helix_constant, helix_residual) = if h.len() >= MIN_STATISTIC_SAMPLES {
        (stats::mean(&h), stats::relative_spread(&h))
    } else {
        (f64::NAN, f64::NAN)
    };
    let is_general_helix = helix_residual <= tol;

    let sig: Vec<f64> = sigma
        .values
        .iter()
        .zip(&sigma.defined)
        .filter(|(_, d)| **d)
        .map(|(v, _)| *v)
        .collect();
    let (slant_constant, slant_residual) = if sig.len() >= MIN_STATISTIC_SAMPLES {
        (stats::mean(&sig), stats::relative_spread(&sig))
    } else {
        (f64::NAN, f64::NAN)
    };
    let is_slant_helix =
        slant_residual <= tol || (options.helix_as_slant && is_general_helix && sig.is_empty());

    let g: Vec<f64> = kappa
        .iter()
        .zip(&h)
        .map(|(k, h)| k * (1.0 + h * h))
        .collect();
    let (mannheim_lambda, mannheim_residual) = if g.len() >= MIN_STATISTIC_SAMPLES {
        let lambda = g.iter().sum::<f64>() / g.iter().map(|x| x * x).sum::<f64>();
        let r: Vec<f64> = g.iter().map(|x| lambda * x - 1.0).collect();
        (lambda, stats::rms(&r))
    } else {
        (f64::NAN, f64::NAN)
    };
    let is_mannheim = mannheim_residual <= tol;

    let bertrand = match fit_bertrand_coefficients(&kappa, &h) {
        Ok(fit) => Some(fit),
        Err(Error::TooFewSamples { .. }) => None,
        Err(e) => return Err(e),
    };
    let is_bertrand = bertrand.as_ref().is_some_and(|f| f.residual <= tol);

    Ok(ClassificationReport {
        is_general_helix,
        helix_constant,
        helix_residual,
        is_slant_helix,
        slant_constant,
        slant_residual,
        slant_samples: sig.len(),
        is_mannheim,
        mannheim_lambda,
        mannheim_residual,
        is_bertrand,
        bertrand,
        tolerance: tol,
    })
}
