//! Synthesis of unit-speed curves from prescribed curvature functions.
//!
//! In body coordinates the Frenet equations of a bi-invariant group read
//! `T' = κN`, `N' = -κT + κH B`, `B' = -κH N` (the bracket terms of the
//! covariant derivative absorb `τ_G`), while the point follows `g' = g T`.
//! Both are integrated together with classical RK4 in the ambient
//! representation and projected back onto the group at every output sample.

use nalgebra::{Matrix3, Quaternion, Vector3};

use super::family::Profile;
use crate::error::{Error, Result};
use crate::lie::{GroupKind, GroupPoint, GroupStructure};

const SUBSTEPS: usize = 8;

pub(crate) enum FrenetLaw<'a> {
    Direct {
        kappa: &'a Profile,
        tau: &'a Profile,
        tau_g: f64,
    },
    Bertrand {
        kappa: &'a Profile,
        lambda: f64,
        mu: f64,
    },
    Mannheim {
        lambda: f64,
        h: &'a Profile,
    },
    Slant {
        sigma: f64,
        h: &'a Profile,
    },
    BertrandSlant {
        lambda: f64,
        mu: f64,
        sigma: f64,
        h0: f64,
    },
}

impl FrenetLaw<'_> {
    fn initial_h(&self) -> f64 {
        match self {
            FrenetLaw::BertrandSlant { h0, .. } => *h0,
            _ => 0.0,
        }
    }

    /// `(κ, κH, dH/ds)` at arc length `s`, where `h` is the integrated
    /// harmonic curvature (only meaningful for laws that evolve it).
    fn rates(&self, s: f64, h: f64) -> (f64, f64, f64) {
        match self {
            FrenetLaw::Direct { kappa, tau, tau_g } => (kappa.value(s), tau.value(s) - tau_g, 0.0),
            FrenetLaw::Bertrand { kappa, lambda, mu } => {
                let k = kappa.value(s);
                (k, (1.0 - lambda * k) / mu, 0.0)
            }
            FrenetLaw::Mannheim { lambda, h } => {
                let hv = h.value(s);
                let k = 1.0 / (lambda * (1.0 + hv * hv));
                (k, k * hv, 0.0)
            }
            FrenetLaw::Slant { sigma, h } => {
                let (hv, dh) = h.eval(s);
                let k = sigma * dh / (1.0 + hv * hv).powf(1.5);
                (k, k * hv, 0.0)
            }
            FrenetLaw::BertrandSlant {
                lambda, mu, sigma, ..
            } => {
                let k = 1.0 / (lambda + mu * h);
                let dh = (1.0 + h * h).powf(1.5) / (sigma * (lambda + mu * h));
                (k, k * h, dh)
            }
        }
    }
}

#[derive(Clone, Copy)]
struct State {
    point: [f64; 9],
    frame: [Vector3<f64>; 3],
    h: f64,
}

impl State {
    fn axpy(&self, k: &State, a: f64) -> State {
        let mut point = self.point;
        for (p, d) in point.iter_mut().zip(&k.point) {
            *p += a * d;
        }
        State {
            point,
            frame: [
                self.frame[0] + k.frame[0] * a,
                self.frame[1] + k.frame[1] * a,
                self.frame[2] + k.frame[2] * a,
            ],
            h: self.h + a * k.h,
        }
    }
}

fn hat(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

fn rhs(law: &FrenetLaw, g: &GroupStructure, s: f64, x: &State) -> State {
    let (kappa, body_torsion, dh) = law.rates(s, x.h);
    let [t, n, b] = x.frame;
    let c = g.bracket_scale();
    let mut point = [0.0; 9];
    match g.kind() {
        GroupKind::AbelianR3 => point[..3].copy_from_slice(t.as_slice()),
        GroupKind::So3 => {
            let r = Matrix3::from_row_slice(&x.point);
            let dr = r * hat(&(t * c));
            for row in 0..3 {
                for col in 0..3 {
                    point[3 * row + col] = dr[(row, col)];
                }
            }
        }
        GroupKind::Su2 => {
            let q = Quaternion::new(x.point[0], x.point[1], x.point[2], x.point[3]);
            let dq = q * Quaternion::from_imag(t * (0.5 * c));
            point[..4].copy_from_slice(&[dq.w, dq.i, dq.j, dq.k]);
        }
    }
    State {
        point,
        frame: [
            n * kappa,
            t * (-kappa) + b * body_torsion,
            n * (-body_torsion),
        ],
        h: dh,
    }
}

fn project(g: &GroupStructure, x: &mut State) -> Result<GroupPoint> {
    let dim = g.kind().point_dimension();
    let p = GroupPoint::from_coords(g.kind(), &x.point[..dim])
        .map_err(|_| Error::InvalidSpec("Frenet integration diverged".into()))?;
    let flat = p.coords();
    x.point[..dim].copy_from_slice(&flat);
    let t = x.frame[0].normalize();
    let n = (x.frame[1] - t * t.dot(&x.frame[1])).normalize();
    x.frame = [t, n, t.cross(&n)];
    Ok(p)
}

/// Integrates the body Frenet system from the identity with the standard
/// basis as initial frame, returning the point at every grid value.
pub(crate) fn integrate_frenet(
    law: &FrenetLaw,
    g: &GroupStructure,
    grid: &[f64],
) -> Result<Vec<GroupPoint>> {
    let mut x = State {
        point: [0.0; 9],
        frame: [Vector3::x(), Vector3::y(), Vector3::z()],
        h: law.initial_h(),
    };
    let id = GroupPoint::identity(g.kind()).coords();
    x.point[..id.len()].copy_from_slice(&id);

    let mut out = Vec::with_capacity(grid.len());
    out.push(project(g, &mut x)?);
    for w in grid.windows(2) {
        let dt = (w[1] - w[0]) / SUBSTEPS as f64;
        for k in 0..SUBSTEPS {
            let s = w[0] + dt * k as f64;
            let k1 = rhs(law, g, s, &x);
            let k2 = rhs(law, g, s + 0.5 * dt, &x.axpy(&k1, 0.5 * dt));
            let k3 = rhs(law, g, s + 0.5 * dt, &x.axpy(&k2, 0.5 * dt));
            let k4 = rhs(law, g, s + dt, &x.axpy(&k3, dt));
            x = x
                .axpy(&k1, dt / 6.0)
                .axpy(&k2, dt / 3.0)
                .axpy(&k3, dt / 3.0)
                .axpy(&k4, dt / 6.0);
        }
        if !x.h.is_finite() {
            return Err(Error::InvalidSpec(
                "harmonic curvature blew up during integration".into(),
            ));
        }
        out.push(project(g, &mut x)?);
    }
    Ok(out)
}
