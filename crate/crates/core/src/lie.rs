//! Exact group and algebra operations for the three-dimensional Lie groups
//! carrying a bi-invariant metric: SO(3), SU(2) and the abelian group ℝ³.
//!
//! Algebra elements are always expressed in an orthonormal left-invariant
//! basis `{X1, X2, X3}` whose brackets are `[Xi, Xj] = c εijk Xk`. The
//! constant `c` (the bracket scale) fixes the metric normalization:
//!
//! * SO(3): coordinates `v` correspond to the skew matrix `hat(c v)`;
//! * SU(2): coordinates `v` correspond to the pure quaternion `(c/2) v`;
//! * ℝ³: coordinates are the point itself and `c = 0`.
//!
//! With these identifications the group exponential is the Riemannian
//! exponential at the identity, so `‖log(p⁻¹ q)‖` is the distance between
//! `p` and `q`.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use nalgebra::{Matrix3, Quaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::curve::{derivative, uniform_step};
use crate::error::{Error, Result};

/// Distance from π (in the rotation angle) at which `log_group` gives up.
pub const CUT_LOCUS_MARGIN: f64 = 1e-6;

/// Tolerance on unit length and orthogonality accepted by [`frame_complete`].
pub const FRAME_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupKind {
    #[serde(rename = "so3")]
    So3,
    #[serde(rename = "su2")]
    Su2,
    #[serde(rename = "abelian")]
    AbelianR3,
}

impl GroupKind {
    pub fn name(self) -> &'static str {
        match self {
            GroupKind::So3 => "so3",
            GroupKind::Su2 => "su2",
            GroupKind::AbelianR3 => "abelian",
        }
    }

    /// Bracket scale used when a run does not override it.
    pub fn default_bracket_scale(self) -> f64 {
        match self {
            GroupKind::So3 => 1.0,
            GroupKind::Su2 => 2.0,
            GroupKind::AbelianR3 => 0.0,
        }
    }

    /// Number of real coordinates of a group point in this realization.
    pub fn point_dimension(self) -> usize {
        match self {
            GroupKind::So3 => 9,
            GroupKind::Su2 => 4,
            GroupKind::AbelianR3 => 3,
        }
    }
}

impl std::str::FromStr for GroupKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "so3" => Ok(GroupKind::So3),
            "su2" => Ok(GroupKind::Su2),
            "abelian" => Ok(GroupKind::AbelianR3),
            other => Err(Error::InvalidSpec(format!(
                "unknown group `{other}` (expected so3, su2 or abelian)"
            ))),
        }
    }
}

/// A group together with the normalization of its bi-invariant metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupStructure {
    kind: GroupKind,
    bracket_scale: f64,
}

impl GroupStructure {
    pub fn new(kind: GroupKind, bracket_scale: f64) -> Result<Self> {
        let valid = match kind {
            GroupKind::AbelianR3 => bracket_scale == 0.0,
            _ => bracket_scale.is_finite() && bracket_scale > 0.0,
        };
        if !valid {
            return Err(Error::InvalidSpec(format!(
                "bracket scale {bracket_scale} is not allowed for group {}",
                kind.name()
            )));
        }
        Ok(Self {
            kind,
            bracket_scale,
        })
    }

    pub fn with_default_scale(kind: GroupKind) -> Self {
        Self {
            kind,
            bracket_scale: kind.default_bracket_scale(),
        }
    }

    pub fn so3() -> Self {
        Self::with_default_scale(GroupKind::So3)
    }

    pub fn su2() -> Self {
        Self::with_default_scale(GroupKind::Su2)
    }

    pub fn abelian() -> Self {
        Self::with_default_scale(GroupKind::AbelianR3)
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn bracket_scale(&self) -> f64 {
        self.bracket_scale
    }

    pub fn is_abelian(&self) -> bool {
        self.kind == GroupKind::AbelianR3
    }

    pub fn identity(&self) -> GroupPoint {
        GroupPoint::identity(self.kind)
    }
}

/// Coordinates of a Lie algebra element in the orthonormal basis.
#[derive(Clone, Copy, PartialEq, Default)]
pub struct AlgebraVector(Vector3<f64>);

impl AlgebraVector {
    pub const fn new(x1: f64, x2: f64, x3: f64) -> Self {
        Self(Vector3::new(x1, x2, x3))
    }

    pub fn zero() -> Self {
        Self(Vector3::zeros())
    }

    pub fn nan() -> Self {
        Self::new(f64::NAN, f64::NAN, f64::NAN)
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.0.x, self.0.y, self.0.z]
    }

    pub fn x1(&self) -> f64 {
        self.0.x
    }

    pub fn x2(&self) -> f64 {
        self.0.y
    }

    pub fn x3(&self) -> f64 {
        self.0.z
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.0.dot(&other.0)
    }

    /// Coordinate cross product (not the Lie bracket; see [`bracket`]).
    pub fn cross(&self, other: &Self) -> Self {
        Self(self.0.cross(&other.0))
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn normalized(&self) -> Self {
        Self(self.0 / self.0.norm())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

impl fmt::Debug for AlgebraVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.0.x, self.0.y, self.0.z)
    }
}

impl Add for AlgebraVector {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

impl AddAssign for AlgebraVector {
    fn add_assign(&mut self, rhs: Self) {
        self.0 += rhs.0;
    }
}

impl Sub for AlgebraVector {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self(self.0 - rhs.0)
    }
}

impl Neg for AlgebraVector {
    type Output = Self;
    fn neg(self) -> Self {
        Self(-self.0)
    }
}

impl Mul<f64> for AlgebraVector {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        Self(self.0 * rhs)
    }
}

impl Mul<AlgebraVector> for f64 {
    type Output = AlgebraVector;
    fn mul(self, rhs: AlgebraVector) -> AlgebraVector {
        AlgebraVector(rhs.0 * self)
    }
}

impl Div<f64> for AlgebraVector {
    type Output = Self;
    fn div(self, rhs: f64) -> Self {
        Self(self.0 / rhs)
    }
}

/// A point of one of the three groups.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GroupPoint {
    So3(Matrix3<f64>),
    /// Unit quaternion `w + x i + y j + z k`.
    Su2(Quaternion<f64>),
    AbelianR3(Vector3<f64>),
}

impl GroupPoint {
    pub fn identity(kind: GroupKind) -> Self {
        match kind {
            GroupKind::So3 => GroupPoint::So3(Matrix3::identity()),
            GroupKind::Su2 => GroupPoint::Su2(Quaternion::identity()),
            GroupKind::AbelianR3 => GroupPoint::AbelianR3(Vector3::zeros()),
        }
    }

    pub fn kind(&self) -> GroupKind {
        match self {
            GroupPoint::So3(_) => GroupKind::So3,
            GroupPoint::Su2(_) => GroupKind::Su2,
            GroupPoint::AbelianR3(_) => GroupKind::AbelianR3,
        }
    }

    /// Real coordinates: row-major matrix for SO(3), `(w, x, y, z)` for SU(2).
    pub fn coords(&self) -> Vec<f64> {
        match self {
            GroupPoint::So3(m) => (0..3)
                .flat_map(|r| (0..3).map(move |c| m[(r, c)]))
                .collect(),
            GroupPoint::Su2(q) => vec![q.w, q.i, q.j, q.k],
            GroupPoint::AbelianR3(p) => vec![p.x, p.y, p.z],
        }
    }

    /// Builds a point from raw coordinates and projects it back onto the group.
    pub fn from_coords(kind: GroupKind, coords: &[f64]) -> Result<Self> {
        if coords.len() != kind.point_dimension() {
            return Err(Error::InvalidSpec(format!(
                "{} point needs {} coordinates, got {}",
                kind.name(),
                kind.point_dimension(),
                coords.len()
            )));
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidSpec("non-finite group coordinate".into()));
        }
        let p = match kind {
            GroupKind::So3 => GroupPoint::So3(Matrix3::from_row_slice(coords)),
            GroupKind::Su2 => {
                GroupPoint::Su2(Quaternion::new(coords[0], coords[1], coords[2], coords[3]))
            }
            GroupKind::AbelianR3 => {
                GroupPoint::AbelianR3(Vector3::new(coords[0], coords[1], coords[2]))
            }
        };
        let p = p.renormalized();
        if let GroupPoint::So3(m) = p {
            if m.determinant() <= 0.0 {
                return Err(Error::InvalidSpec(
                    "SO(3) matrix has non-positive determinant".into(),
                ));
            }
        }
        Ok(p)
    }

    /// Projects accumulated round-off back onto the group.
    pub fn renormalized(&self) -> Self {
        match self {
            GroupPoint::So3(m) => GroupPoint::So3(gram_schmidt(m)),
            GroupPoint::Su2(q) => GroupPoint::Su2(q / q.norm()),
            GroupPoint::AbelianR3(p) => GroupPoint::AbelianR3(*p),
        }
    }
}

fn gram_schmidt(m: &Matrix3<f64>) -> Matrix3<f64> {
    let c0 = m.column(0).normalize();
    let c1 = m.column(1) - c0 * c0.dot(&m.column(1));
    let c1 = c1.normalize();
    let c2 = c0.cross(&c1);
    Matrix3::from_columns(&[c0, c1, c2])
}

fn hat(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

fn rodrigues(w: &Vector3<f64>) -> Matrix3<f64> {
    let theta = w.norm();
    let k = hat(w);
    let (a, b) = if theta < 1e-4 {
        let t2 = theta * theta;
        (
            1.0 - t2 / 6.0 + t2 * t2 / 120.0,
            0.5 - t2 / 24.0 + t2 * t2 / 720.0,
        )
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / (theta * theta))
    };
    Matrix3::identity() + k * a + k * k * b
}

/// Lie bracket `[a, b] = c (a × b)`.
pub fn bracket(a: &AlgebraVector, b: &AlgebraVector, g: &GroupStructure) -> AlgebraVector {
    if g.is_abelian() {
        return AlgebraVector::zero();
    }
    a.cross(b) * g.bracket_scale
}

/// Bi-invariant metric in the orthonormal basis.
pub fn metric(a: &AlgebraVector, b: &AlgebraVector) -> f64 {
    a.dot(b)
}

/// Completes `(t, n)` to the positively oriented orthonormal frame `(t, n, b)`.
pub fn frame_complete(t: &AlgebraVector, n: &AlgebraVector) -> Result<AlgebraVector> {
    let (t_norm, n_norm, dot) = (t.norm(), n.norm(), t.dot(n));
    if (t_norm - 1.0).abs() > FRAME_TOLERANCE
        || (n_norm - 1.0).abs() > FRAME_TOLERANCE
        || dot.abs() > FRAME_TOLERANCE
        || !dot.is_finite()
    {
        return Err(Error::NonOrthonormalInput {
            t_norm,
            n_norm,
            dot,
        });
    }
    Ok(t.cross(n))
}

pub fn exp_group(v: &AlgebraVector, g: &GroupStructure) -> GroupPoint {
    let c = g.bracket_scale;
    match g.kind {
        GroupKind::So3 => GroupPoint::So3(rodrigues(&(v.0 * c))),
        GroupKind::Su2 => {
            let half = 0.5 * c * v.norm();
            // sin(x)/x written so that v = 0 is exact
            let scale = if half < 1e-8 {
                0.5 * c * (1.0 - half * half / 6.0)
            } else {
                half.sin() / v.norm()
            };
            GroupPoint::Su2(Quaternion::new(
                half.cos(),
                v.0.x * scale,
                v.0.y * scale,
                v.0.z * scale,
            ))
        }
        GroupKind::AbelianR3 => GroupPoint::AbelianR3(v.0),
    }
}

pub fn log_group(p: &GroupPoint, g: &GroupStructure) -> Result<AlgebraVector> {
    if p.kind() != g.kind {
        return Err(Error::KindMismatch {
            left: p.kind(),
            right: g.kind,
        });
    }
    let c = g.bracket_scale;
    match p {
        GroupPoint::So3(r) => {
            let axis2 = Vector3::new(
                r[(2, 1)] - r[(1, 2)],
                r[(0, 2)] - r[(2, 0)],
                r[(1, 0)] - r[(0, 1)],
            );
            let sin_theta = 0.5 * axis2.norm();
            let cos_theta = 0.5 * (r.trace() - 1.0);
            let theta = sin_theta.atan2(cos_theta);
            if theta >= std::f64::consts::PI - CUT_LOCUS_MARGIN {
                return Err(Error::CutLocus { angle: theta });
            }
            let factor = if theta < 1e-6 {
                0.5 * (1.0 + theta * theta / 6.0)
            } else {
                0.5 * theta / sin_theta
            };
            Ok(AlgebraVector(axis2 * (factor / c)))
        }
        GroupPoint::Su2(q) => {
            let imag = Vector3::new(q.i, q.j, q.k);
            let sin_half = imag.norm();
            let half = sin_half.atan2(q.w);
            if half >= std::f64::consts::PI - CUT_LOCUS_MARGIN {
                return Err(Error::CutLocus { angle: 2.0 * half });
            }
            let factor = if half < 1e-8 {
                1.0 + half * half / 6.0
            } else {
                half / sin_half
            };
            Ok(AlgebraVector(imag * (2.0 * factor / c)))
        }
        GroupPoint::AbelianR3(v) => Ok(AlgebraVector(*v)),
    }
}

pub fn compose(p: &GroupPoint, q: &GroupPoint) -> Result<GroupPoint> {
    let out = match (p, q) {
        (GroupPoint::So3(a), GroupPoint::So3(b)) => GroupPoint::So3(a * b),
        (GroupPoint::Su2(a), GroupPoint::Su2(b)) => GroupPoint::Su2(a * b),
        (GroupPoint::AbelianR3(a), GroupPoint::AbelianR3(b)) => GroupPoint::AbelianR3(a + b),
        _ => {
            return Err(Error::KindMismatch {
                left: p.kind(),
                right: q.kind(),
            })
        }
    };
    Ok(out.renormalized())
}

pub fn inverse(p: &GroupPoint) -> GroupPoint {
    match p {
        GroupPoint::So3(m) => GroupPoint::So3(m.transpose()),
        GroupPoint::Su2(q) => GroupPoint::Su2(q.conjugate() / q.norm_squared()),
        GroupPoint::AbelianR3(v) => GroupPoint::AbelianR3(-v),
    }
}

/// `log(p⁻¹ q)`: the body-frame displacement from `p` to `q`.
pub fn relative_log(p: &GroupPoint, q: &GroupPoint, g: &GroupStructure) -> Result<AlgebraVector> {
    log_group(&compose(&inverse(p), q)?, g)
}

/// Riemannian distance `‖log(p⁻¹ q)‖`.
pub fn distance(p: &GroupPoint, q: &GroupPoint, g: &GroupStructure) -> Result<f64> {
    Ok(relative_log(p, q, g)?.norm())
}

/// Adjoint action `Ad_p v`.
pub fn adjoint(p: &GroupPoint, v: &AlgebraVector) -> AlgebraVector {
    match p {
        GroupPoint::So3(m) => AlgebraVector(m * v.0),
        GroupPoint::Su2(q) => {
            let pure = Quaternion::from_imag(v.0);
            let rotated = q * pure * q.conjugate() / q.norm_squared();
            AlgebraVector(rotated.imag())
        }
        GroupPoint::AbelianR3(_) => *v,
    }
}

/// Parallel transport of a body-frame vector from `p · exp(w)` back to `p`
/// along the geodesic `t ↦ p · exp(t w)`.
///
/// For a bi-invariant metric the transported field solves `Ẏ + ½[w, Y] = 0`,
/// so the transport from the far end is `Ad_{exp(w/2)}`.
pub fn transport_to_base(
    w: &AlgebraVector,
    y: &AlgebraVector,
    g: &GroupStructure,
) -> AlgebraVector {
    adjoint(&exp_group(&(*w * 0.5), g), y)
}

/// Covariant derivative `Ẇ + ½[T, W]` of a body-frame field along a curve.
pub fn covariant_derivative(
    w: &[AlgebraVector],
    t: &[AlgebraVector],
    s: &[f64],
    g: &GroupStructure,
) -> Result<Vec<AlgebraVector>> {
    if w.len() != t.len() || w.len() != s.len() {
        return Err(Error::GridMismatch(format!(
            "field has {} samples, tangent {}, grid {}",
            w.len(),
            t.len(),
            s.len()
        )));
    }
    let step = uniform_step(s)?;
    let wdot = derivative(w, step)?;
    Ok(wdot
        .iter()
        .zip(t.iter().zip(w))
        .map(|(wd, (ti, wi))| *wd + bracket(ti, wi, g) * 0.5)
        .collect())
}
