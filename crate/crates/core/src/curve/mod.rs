//! Curve sampling, body velocity, arc-length reparametrization and the one
//! finite-difference rule shared by every later stage.

pub mod family;
mod ode;
mod table;

use std::ops::{Add, Mul, Sub};
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::lie::{relative_log, AlgebraVector, GroupKind, GroupPoint, GroupStructure};

pub use family::{Family, FamilyInfo, Harmonic, Profile, FAMILIES};

/// Smallest sample count accepted for a curve.
pub const MIN_SAMPLES: usize = 16;
pub const DEFAULT_SAMPLES: usize = 2048;
/// Minimum number of samples for one application of [`derivative`].
pub const STENCIL_SAMPLES: usize = 5;
/// Speeds at or below this make a curve irregular.
pub const MIN_SPEED: f64 = 1e-10;
/// Relative spacing tolerance for a grid to count as uniform.
pub const GRID_TOLERANCE: f64 = 1e-9;

/// Nodes used by the resampling interpolant.
const INTERP_NODES: usize = 6;

/// Values that can be differentiated and interpolated sample by sample.
pub trait SeriesValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn nan() -> Self;
}

impl SeriesValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn nan() -> Self {
        f64::NAN
    }
}

impl SeriesValue for AlgebraVector {
    fn zero() -> Self {
        AlgebraVector::zero()
    }
    fn nan() -> Self {
        AlgebraVector::nan()
    }
}

/// Derivative on a uniform grid: fourth-order central differences in the
/// interior, second-order stencils on the two samples at each end.
pub fn derivative<V: SeriesValue>(f: &[V], step: f64) -> Result<Vec<V>> {
    let n = f.len();
    if n < STENCIL_SAMPLES {
        return Err(Error::TooFewSamples {
            needed: STENCIL_SAMPLES,
            got: n,
        });
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::GridMismatch(format!("invalid grid step {step}")));
    }
    let mut out = vec![V::zero(); n];
    let half = 0.5 / step;
    let twelfth = 1.0 / (12.0 * step);
    out[0] = (f[1] * 4.0 - f[0] * 3.0 - f[2]) * half;
    out[1] = (f[2] - f[0]) * half;
    for i in 2..n - 2 {
        out[i] = ((f[i + 1] - f[i - 1]) * 8.0 - (f[i + 2] - f[i - 2])) * twelfth;
    }
    out[n - 2] = (f[n - 1] - f[n - 3]) * half;
    out[n - 1] = (f[n - 1] * 3.0 - f[n - 2] * 4.0 + f[n - 3]) * half;
    Ok(out)
}

/// Returns the spacing of a strictly increasing, uniform grid.
pub fn uniform_step(s: &[f64]) -> Result<f64> {
    if s.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: s.len(),
        });
    }
    let step = (s[s.len() - 1] - s[0]) / (s.len() - 1) as f64;
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::GridMismatch(
            "grid is not strictly increasing".into(),
        ));
    }
    for (i, w) in s.windows(2).enumerate() {
        let d = w[1] - w[0];
        if !(d > 0.0) || ((d - step) / step).abs() > GRID_TOLERANCE {
            return Err(Error::GridMismatch(format!(
                "grid spacing at sample {i} is {d}, expected uniform {step}"
            )));
        }
    }
    Ok(step)
}

fn lagrange_weights(nodes: &[f64], x: f64) -> [f64; INTERP_NODES] {
    let mut w = [1.0; INTERP_NODES];
    for (j, wj) in w.iter_mut().enumerate() {
        for (m, node) in nodes.iter().enumerate() {
            if m != j {
                *wj *= (x - node) / (nodes[j] - node);
            }
        }
    }
    w
}

/// First node of the interpolation window around interval `j`.
fn window_start(j: usize, n: usize) -> usize {
    j.saturating_sub(INTERP_NODES / 2 - 1).min(n - INTERP_NODES)
}

/// Interpolates a series given on the uniform grid `k * step` at arbitrary
/// abscissae. Points outside the grid, or whose stencil touches a NaN, come
/// back as NaN.
pub fn interpolate_uniform<V: SeriesValue>(values: &[V], step: f64, at: &[f64]) -> Vec<V> {
    let n = values.len();
    if n < INTERP_NODES {
        return vec![V::nan(); at.len()];
    }
    let end = step * (n - 1) as f64;
    let slack = GRID_TOLERANCE * end;
    at.iter()
        .map(|&x| {
            if !(x >= -slack && x <= end + slack) {
                return V::nan();
            }
            let j = ((x / step).floor().max(0.0) as usize).min(n - 2);
            let start = window_start(j, n);
            let nodes: Vec<f64> = (start..start + INTERP_NODES)
                .map(|k| k as f64 * step)
                .collect();
            let w = lagrange_weights(&nodes, x);
            let mut acc = V::zero();
            for (k, wk) in w.iter().enumerate() {
                acc = acc + values[start + k] * *wk;
            }
            acc
        })
        .collect()
}

/// Where the curve data comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum CurveSource {
    Family(Family),
    /// Rows of `t` followed by the group coordinates.
    Points(Vec<Vec<f64>>),
    Csv(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveSpec {
    pub group: GroupStructure,
    pub source: CurveSource,
    /// Parameter interval; tables carry their own and leave this `None`.
    pub t_domain: Option<[f64; 2]>,
    pub n_samples: usize,
}

impl CurveSpec {
    pub fn family(group: GroupStructure, family: Family) -> Self {
        Self {
            group,
            t_domain: Some(family.info().default_domain),
            source: CurveSource::Family(family),
            n_samples: DEFAULT_SAMPLES,
        }
    }

    pub fn with_domain(mut self, t0: f64, t1: f64) -> Self {
        self.t_domain = Some([t0, t1]);
        self
    }

    pub fn with_samples(mut self, n: usize) -> Self {
        self.n_samples = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples < MIN_SAMPLES {
            return Err(Error::InvalidSpec(format!(
                "n_samples must be at least {MIN_SAMPLES}, got {}",
                self.n_samples
            )));
        }
        if let Some([t0, t1]) = self.t_domain {
            if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
                return Err(Error::InvalidSpec(format!(
                    "t_domain [{t0}, {t1}] must satisfy t1 > t0"
                )));
            }
        }
        if let CurveSource::Family(f) = &self.source {
            let info = f.info();
            if !info.groups.contains(&self.group.kind()) {
                return Err(Error::InvalidSpec(format!(
                    "family {} is not defined on group {}",
                    info.name,
                    self.group.kind().name()
                )));
            }
            if self.t_domain.is_none() {
                return Err(Error::InvalidSpec(
                    "builtin families need a t_domain".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Points of a curve on a uniform parameter grid, before reparametrization.
#[derive(Debug, Clone)]
pub struct RawSamples {
    group: GroupStructure,
    t: Vec<f64>,
    step: f64,
    points: Vec<GroupPoint>,
}

impl RawSamples {
    pub fn new(group: GroupStructure, t: Vec<f64>, mut points: Vec<GroupPoint>) -> Result<Self> {
        if t.len() != points.len() {
            return Err(Error::GridMismatch(format!(
                "{} parameter values for {} points",
                t.len(),
                points.len()
            )));
        }
        if t.len() < STENCIL_SAMPLES {
            return Err(Error::TooFewSamples {
                needed: STENCIL_SAMPLES,
                got: t.len(),
            });
        }
        let step = uniform_step(&t)?;
        for p in &points {
            if p.kind() != group.kind() {
                return Err(Error::KindMismatch {
                    left: p.kind(),
                    right: group.kind(),
                });
            }
        }
        if group.kind() == GroupKind::Su2 {
            // q and -q: keep the chain continuous
            for i in 1..points.len() {
                if let (GroupPoint::Su2(prev), GroupPoint::Su2(cur)) = (points[i - 1], points[i]) {
                    if prev.coords.dot(&cur.coords) < 0.0 {
                        points[i] = GroupPoint::Su2(-cur);
                    }
                }
            }
        }
        Ok(Self {
            group,
            t,
            step,
            points,
        })
    }

    pub fn group(&self) -> &GroupStructure {
        &self.group
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn points(&self) -> &[GroupPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Evaluates a curve specification on its parameter grid.
pub fn sample_curve(spec: &CurveSpec) -> Result<RawSamples> {
    spec.validate()?;
    match &spec.source {
        CurveSource::Family(family) => {
            let [t0, t1] = spec.t_domain.expect("validated");
            let n = spec.n_samples;
            let h = (t1 - t0) / (n - 1) as f64;
            let t: Vec<f64> = (0..n)
                .map(|i| if i == n - 1 { t1 } else { t0 + h * i as f64 })
                .collect();
            let points = family.sample(&spec.group, &t)?;
            RawSamples::new(spec.group, t, points)
        }
        CurveSource::Points(rows) => {
            let (t, points) = table::from_rows(spec.group.kind(), rows, "point table")?;
            RawSamples::new(spec.group, t, points).map_err(table::as_bad_table)
        }
        CurveSource::Csv(path) => {
            let (t, points) = table::read_csv(spec.group.kind(), path)?;
            RawSamples::new(spec.group, t, points).map_err(table::as_bad_table)
        }
    }
}

// Fourth-order stencils in the local chart w_k = log(p_i⁻¹ p_{i+k}); w_0 = 0.
const CENTRAL: [(isize, f64); 4] = [(-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0)];
const FORWARD_0: [(isize, f64); 4] = [(1, 48.0), (2, -36.0), (3, 16.0), (4, -3.0)];
const FORWARD_1: [(isize, f64); 4] = [(-1, -3.0), (1, 18.0), (2, -6.0), (3, 1.0)];

/// Body velocity `p⁻¹ p'` in algebra coordinates.
///
/// Each sample is differentiated in its own logarithmic chart, so the
/// abelian case reduces to ordinary central differences of coordinates and a
/// one-parameter subgroup is reproduced exactly. The two samples at each end
/// use one-sided stencils of the same (fourth) order.
pub fn body_velocity(
    points: &[GroupPoint],
    step: f64,
    g: &GroupStructure,
) -> Result<Vec<AlgebraVector>> {
    let n = points.len();
    if n < STENCIL_SAMPLES {
        return Err(Error::TooFewSamples {
            needed: STENCIL_SAMPLES,
            got: n,
        });
    }
    let scale = 1.0 / (12.0 * step);
    (0..n)
        .map(|i| {
            let (stencil, sign): (&[(isize, f64)], f64) = if i == 0 {
                (&FORWARD_0, 1.0)
            } else if i == 1 {
                (&FORWARD_1, 1.0)
            } else if i == n - 2 {
                (&FORWARD_1, -1.0)
            } else if i == n - 1 {
                (&FORWARD_0, -1.0)
            } else {
                (&CENTRAL, 1.0)
            };
            let mut acc = AlgebraVector::zero();
            for &(offset, weight) in stencil {
                let j = (i as isize + sign as isize * offset) as usize;
                let w = relative_log(&points[i], &points[j], g)?;
                acc += w * (weight * sign);
            }
            Ok(acc * scale)
        })
        .collect()
}

/// A unit-speed curve on a uniform arc-length grid starting at zero.
#[derive(Debug, Clone)]
pub struct CurveSamples {
    group: GroupStructure,
    s: Vec<f64>,
    step: f64,
    points: Vec<GroupPoint>,
    tangent: Vec<AlgebraVector>,
    source_arclength: Vec<f64>,
    speed_defect: f64,
}

impl CurveSamples {
    pub fn group(&self) -> &GroupStructure {
        &self.group
    }

    /// Arc-length grid.
    pub fn s(&self) -> &[f64] {
        &self.s
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn points(&self) -> &[GroupPoint] {
        &self.points
    }

    /// Unit body velocity `T`.
    pub fn tangent(&self) -> &[AlgebraVector] {
        &self.tangent
    }

    /// Arc length at each sample of the raw parameter grid this curve came from.
    pub fn source_arclength(&self) -> &[f64] {
        &self.source_arclength
    }

    /// Largest deviation of the resampled speed from one, before normalization.
    pub fn speed_defect(&self) -> f64 {
        self.speed_defect
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn length(&self) -> f64 {
        self.s[self.s.len() - 1]
    }
}

/// Cumulative integral of uniformly sampled values with a fourth-order rule
/// (cubic through four neighbouring samples on every interval).
pub(crate) fn cumulative_integral(f: &[f64], step: f64) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![0.0; n];
    let c = step / 24.0;
    for i in 0..n - 1 {
        let piece = if n < 4 {
            0.5 * step * (f[i] + f[i + 1])
        } else if i == 0 {
            c * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3])
        } else if i == n - 2 {
            c * (9.0 * f[n - 1] + 19.0 * f[n - 2] - 5.0 * f[n - 3] + f[n - 4])
        } else {
            c * (13.0 * (f[i] + f[i + 1]) - f[i - 1] - f[i + 2])
        };
        out[i + 1] = out[i] + piece;
    }
    out
}

/// Reparametrizes raw samples by arc length onto a uniform grid with the
/// same number of samples.
pub fn reparametrize_arclength(raw: &RawSamples) -> Result<CurveSamples> {
    let g = raw.group;
    let n = raw.len();
    if n < INTERP_NODES {
        return Err(Error::TooFewSamples {
            needed: INTERP_NODES,
            got: n,
        });
    }
    let velocity = body_velocity(&raw.points, raw.step, &g)?;
    let speed: Vec<f64> = velocity.iter().map(AlgebraVector::norm).collect();
    if let Some((index, &speed)) = speed.iter().enumerate().find(|(_, v)| !(**v > MIN_SPEED)) {
        return Err(Error::IrregularCurve { index, speed });
    }
    let arclength = cumulative_integral(&speed, raw.step);
    let total = arclength[n - 1];
    let step = total / (n - 1) as f64;
    let s: Vec<f64> = (0..n)
        .map(|k| if k == n - 1 { total } else { step * k as f64 })
        .collect();

    let kind = g.kind();
    let coords: Vec<Vec<f64>> = raw.points.iter().map(GroupPoint::coords).collect();
    let dim = kind.point_dimension();
    let mut points = Vec::with_capacity(n);
    let mut j = 0usize;
    for &target in &s {
        while j < n - 2 && arclength[j + 1] < target {
            j += 1;
        }
        let start = window_start(j, n);
        let w = lagrange_weights(&arclength[start..start + INTERP_NODES], target);
        let mut c = vec![0.0; dim];
        for (k, wk) in w.iter().enumerate() {
            for (d, value) in c.iter_mut().enumerate() {
                *value += wk * coords[start + k][d];
            }
        }
        points.push(GroupPoint::from_coords(kind, &c)?);
    }

    let v = body_velocity(&points, step, &g)?;
    let speed_defect = v.iter().map(|x| (x.norm() - 1.0).abs()).fold(0.0, f64::max);
    let tangent = v.iter().map(AlgebraVector::normalized).collect();
    Ok(CurveSamples {
        group: g,
        s,
        step,
        points,
        tangent,
        source_arclength: arclength,
        speed_defect,
    })
}

/// Convenience: sample and reparametrize in one go.
pub fn build_curve(spec: &CurveSpec) -> Result<CurveSamples> {
    reparametrize_arclength(&sample_curve(spec)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::exp_group;
    use nalgebra::Vector3;
    use std::f64::consts::PI;

    fn grid(n: usize, h: f64) -> Vec<f64> {
        (0..n).map(|i| i as f64 * h).collect()
    }

    #[test]
    fn derivative_is_exact_on_quadratics() {
        let h = 0.01;
        let s = grid(200, h);
        let f: Vec<f64> = s.iter().map(|x| x * x).collect();
        let d = derivative(&f, h).unwrap();
        for i in 2..s.len() - 2 {
            assert!((d[i] - 2.0 * s[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn derivative_annihilates_constants() {
        let f = vec![3.25; 64];
        let d = derivative(&f, 0.1).unwrap();
        assert!(d.iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn derivative_of_sine() {
        let h = 1e-2;
        let s = grid(700, h);
        let f: Vec<f64> = s.iter().map(|x| x.sin()).collect();
        let d = derivative(&f, h).unwrap();
        // truncation h^4/30 max|f^(5)| = 3.3e-10
        for i in 2..s.len() - 2 {
            assert!((d[i] - s[i].cos()).abs() < 1e-7);
        }
        // second-order ends: h^2/3 max|f'''|
        assert!((d[0] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn derivative_needs_five_samples() {
        assert!(matches!(
            derivative(&[1.0, 2.0, 3.0, 4.0], 0.1),
            Err(Error::TooFewSamples { needed: 5, got: 4 })
        ));
    }

    #[test]
    fn cumulative_integral_is_fourth_order() {
        let h = 0.05;
        let s = grid(101, h);
        let f: Vec<f64> = s.iter().map(|x| x * x * x).collect();
        let out = cumulative_integral(&f, h);
        for (x, v) in s.iter().zip(&out) {
            assert!((v - x.powi(4) / 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn interpolation_reproduces_quintics_and_flags_nan() {
        let h = 0.1;
        let f: Vec<f64> = grid(30, h).iter().map(|x| x.powi(5) - 2.0 * x).collect();
        let at = [0.0, 0.05, 1.234, 2.85, 2.9];
        let out = interpolate_uniform(&f, h, &at);
        for (x, v) in at.iter().zip(&out) {
            assert!((v - (x.powi(5) - 2.0 * x)).abs() < 1e-10, "{x}: {v}");
        }
        assert!(interpolate_uniform(&f, h, &[3.5])[0].is_nan());
        let mut g = f.clone();
        g[10] = f64::NAN;
        assert!(interpolate_uniform(&g, h, &[1.03])[0].is_nan());
        assert!(interpolate_uniform(&g, h, &[2.5])[0].is_finite());
    }

    #[test]
    fn body_velocity_of_subgroup_is_constant() {
        for g in [
            GroupStructure::so3(),
            GroupStructure::su2(),
            GroupStructure::abelian(),
        ] {
            let v = AlgebraVector::new(0.6, -0.8, 0.0);
            let h = 0.01;
            let pts: Vec<GroupPoint> = grid(50, h)
                .iter()
                .map(|t| exp_group(&(v * *t), &g))
                .collect();
            let bv = body_velocity(&pts, h, &g).unwrap();
            assert!(bv.iter().all(|x| (*x - v).norm() < 1e-8), "{g:?}");
        }
    }

    #[test]
    fn body_velocity_of_a_line() {
        let g = GroupStructure::abelian();
        let pts: Vec<GroupPoint> = grid(20, 0.5)
            .iter()
            .map(|t| GroupPoint::AbelianR3(Vector3::new(*t, 0.0, 0.0)))
            .collect();
        let bv = body_velocity(&pts, 0.5, &g).unwrap();
        assert!(bv
            .iter()
            .all(|x| (*x - AlgebraVector::new(1.0, 0.0, 0.0)).norm() < 1e-12));
        assert!(matches!(
            body_velocity(&pts[..2], 0.5, &g),
            Err(Error::TooFewSamples { .. })
        ));
    }

    #[test]
    fn undersampled_rotation_hits_cut_locus() {
        let g = GroupStructure::so3();
        let v = AlgebraVector::new(0.0, 0.0, 1.0);
        // two steps of a quarter turn reach the antipode
        let h = std::f64::consts::FRAC_PI_2;
        let pts: Vec<GroupPoint> = grid(10, h)
            .iter()
            .map(|t| exp_group(&(v * *t), &g))
            .collect();
        assert!(matches!(
            body_velocity(&pts, h, &g),
            Err(Error::CutLocus { .. })
        ));
    }

    #[test]
    fn helix_arclength() {
        let spec = CurveSpec::family(
            GroupStructure::abelian(),
            Family::AbelianHelix { a: 3.0, b: 4.0 },
        )
        .with_domain(0.0, 2.0 * PI);
        let curve = build_curve(&spec).unwrap();
        assert!((curve.length() - 10.0 * PI).abs() < 1e-6);
        assert!(curve.speed_defect() < 1e-6);
        assert!(uniform_step(curve.s()).is_ok());
        assert_eq!(curve.s()[0], 0.0);
    }

    #[test]
    fn unit_speed_input_keeps_its_grid() {
        let g = GroupStructure::su2();
        let spec = CurveSpec::family(g, Family::OneParamSubgroup { v: [0.0, 0.6, 0.8] })
            .with_domain(0.0, 3.0)
            .with_samples(300);
        let raw = sample_curve(&spec).unwrap();
        let curve = reparametrize_arclength(&raw).unwrap();
        for (s, t) in curve.s().iter().zip(raw.t()) {
            assert!((s - t).abs() < 1e-9);
        }
    }

    #[test]
    fn cusp_is_irregular() {
        // (t², t³, 0) stops at t = 0, which is a grid node for odd n
        let x = Profile::polynomial(vec![0.0, 0.0, 1.0]);
        let y = Profile::polynomial(vec![0.0, 0.0, 0.0, 1.0]);
        let spec = CurveSpec::family(
            GroupStructure::abelian(),
            Family::AbelianCoords {
                x,
                y,
                z: Profile::constant(0.0),
            },
        )
        .with_domain(-1.0, 1.0)
        .with_samples(101);
        assert!(matches!(
            build_curve(&spec),
            Err(Error::IrregularCurve { index: 50, .. })
        ));
    }

    #[test]
    fn spec_validation() {
        let spec = CurveSpec::family(
            GroupStructure::abelian(),
            Family::AbelianHelix { a: 1.0, b: 1.0 },
        )
        .with_samples(8);
        assert!(matches!(spec.validate(), Err(Error::InvalidSpec(_))));
        let spec = CurveSpec::family(
            GroupStructure::so3(),
            Family::AbelianHelix { a: 1.0, b: 1.0 },
        );
        assert!(matches!(spec.validate(), Err(Error::InvalidSpec(_))));
        let spec = CurveSpec::family(
            GroupStructure::abelian(),
            Family::AbelianHelix { a: 1.0, b: 1.0 },
        )
        .with_domain(1.0, 1.0);
        assert!(spec.validate().is_err());
    }
}
