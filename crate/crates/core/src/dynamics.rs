//! Newtonian truth model and its mixed-invariant form `Xdot = (M - C) X + X (N + C)`.

use crate::error::{Error, Result};
use crate::liegroup::{hat3, AlgebraVector, GroupElement, Mat3, Mat5, Vec3};

/// Standard gravitational parameter of the Earth, m^3/s^2.
pub const EARTH_MU: f64 = 3.986004418e14;

/// Positions closer than this to the attracting centre are rejected.
pub const ORIGIN_GUARD_M: f64 = 1.0;

/// Point-mass gravity `g(p) = -mu p / |p|^3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GravityModel {
    mu: f64,
}

impl GravityModel {
    pub fn new(mu: f64) -> Result<Self> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::Domain(format!(
                "gravitational parameter must be positive, got {mu}"
            )));
        }
        Ok(GravityModel { mu })
    }

    pub fn earth() -> Self {
        GravityModel { mu: EARTH_MU }
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    fn radius(p: &Vec3) -> Result<f64> {
        let r = p.norm();
        if !(r >= ORIGIN_GUARD_M) {
            return Err(Error::OriginSingularity {
                radius: r,
                guard: ORIGIN_GUARD_M,
            });
        }
        Ok(r)
    }

    pub fn acceleration(&self, p: &Vec3) -> Result<Vec3> {
        let r = Self::radius(p)?;
        Ok(p * (-self.mu / (r * r * r)))
    }

    /// `dg/dp = -mu/r^3 (I - 3 u u^T)`; eigenvalues `2 mu/r^3` and `-mu/r^3` (twice).
    pub fn jacobian(&self, p: &Vec3) -> Result<Mat3> {
        let r = Self::radius(p)?;
        let u = p / r;
        Ok((Mat3::identity() - u * u.transpose() * 3.0) * (-self.mu / (r * r * r)))
    }
}

impl Default for GravityModel {
    fn default() -> Self {
        Self::earth()
    }
}

pub fn gravity(p: &Vec3, model: &GravityModel) -> Result<Vec3> {
    model.acceleration(p)
}

pub fn gravity_jacobian(p: &Vec3, model: &GravityModel) -> Result<Mat3> {
    model.jacobian(p)
}

/// Commanded body-frame acceleration and angular velocity.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BodyInput {
    /// m/s^2, body frame
    pub a: Vec3,
    /// rad/s, body frame
    pub omega: Vec3,
}

impl BodyInput {
    pub fn new(a: Vec3, omega: Vec3) -> Self {
        BodyInput { a, omega }
    }

    /// `n = N^vee = (0, a, omega)`.
    pub fn to_algebra(&self) -> AlgebraVector {
        AlgebraVector::new(Vec3::zeros(), self.a, self.omega)
    }
}

/// The constant coupling matrix `C` (single 1 at row 4, column 5).
pub fn c_matrix() -> Mat5 {
    let mut c = Mat5::zeros();
    c[(3, 4)] = 1.0;
    c
}

/// Time derivative of a group element, split into blocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDerivative {
    pub rot_dot: Mat3,
    pub vel_dot: Vec3,
    pub pos_dot: Vec3,
}

impl StateDerivative {
    /// The 5x5 embedding; bottom rows are zero.
    pub fn to_matrix(&self) -> Mat5 {
        let mut m = Mat5::zeros();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rot_dot);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.vel_dot);
        m.fixed_view_mut::<3, 1>(0, 4).copy_from(&self.pos_dot);
        m
    }
}

/// `pdot = v`, `vdot = R a + g(p)`, `Rdot = R [omega]x`.
pub fn classical_rhs(x: &GroupElement, u: &BodyInput, model: &GravityModel) -> Result<StateDerivative> {
    generalized_rhs(x, &u.to_algebra(), model)
}

/// Truth model driven by a full algebra input `n = (n_p, a, omega)`.
///
/// A non-zero `n_p` adds a body-frame position rate `R n_p` to `pdot`. It is
/// zero for every physical thruster input and only appears when a feedback law
/// in algebra coordinates produces a position-slot component.
pub fn generalized_rhs(x: &GroupElement, n: &AlgebraVector, model: &GravityModel) -> Result<StateDerivative> {
    let r = x.rot.matrix();
    let g = model.acceleration(&x.pos)?;
    Ok(StateDerivative {
        rot_dot: r * hat3(&n.r()),
        vel_dot: r * n.v() + g,
        pos_dot: x.vel + r * n.p(),
    })
}

/// The `M` matrix: gravity in column 4.
pub fn m_matrix(p: &Vec3, model: &GravityModel) -> Result<Mat5> {
    let g = model.acceleration(p)?;
    let mut m = Mat5::zeros();
    m.fixed_view_mut::<3, 1>(0, 3).copy_from(&g);
    Ok(m)
}

/// Literal evaluation of `(M - C) X + X (N + C)`.
pub fn mixed_invariant_rhs(x: &GroupElement, u: &BodyInput, model: &GravityModel) -> Result<Mat5> {
    let xm = x.to_matrix();
    let m = m_matrix(&x.pos, model)?;
    let n = u.to_algebra().wedge();
    let c = c_matrix();
    Ok((m - c) * xm + xm * (n + c))
}

/// Body-frame control mismatch `n~` and world-frame gravity mismatch `m~`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MismatchPair {
    pub n_tilde: AlgebraVector,
    pub m_tilde: AlgebraVector,
}

impl MismatchPair {
    pub fn zero() -> Self {
        MismatchPair {
            n_tilde: AlgebraVector::zeros(),
            m_tilde: AlgebraVector::zeros(),
        }
    }
}

/// `n~ = n_ref - n`, `m~ = (0, g(p_ref) - g(p), 0)`.
pub fn mismatch(
    n_ref: &AlgebraVector,
    n: &AlgebraVector,
    p_ref: &Vec3,
    p: &Vec3,
    model: &GravityModel,
) -> Result<MismatchPair> {
    let dg = model.acceleration(p_ref)? - model.acceleration(p)?;
    Ok(MismatchPair {
        n_tilde: *n_ref - *n,
        m_tilde: AlgebraVector::velocity_only(dg),
    })
}
