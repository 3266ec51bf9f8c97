//! Left-invariant logarithmic tracking error and its dynamics.
//!
//! With `eta = X^-1 Xref` and `xi = Log(eta)`, the error obeys
//!
//! ```text
//! xidot = (-ad(n_ref) + A_C) xi + Jl^-1(xi) n~ + Jr^-1(xi) Ad(Xref^-1) m~
//! ```
//!
//! where `n~ = n_ref - n` is the body-frame input mismatch and
//! `m~ = (0, g(p_ref) - g(p), 0)` the world-frame gravity mismatch. Only the
//! last term depends on where the two bodies are, and it lives entirely in the
//! velocity slot.

use crate::dynamics::{GravityModel, MismatchPair};
use crate::error::{Error, Result};
use crate::liegroup::{
    ad_matrix, jl_inv_apply, jr_inv_apply, se23_exp, se23_log, so3_right_jacobian_inv, AlgebraVector,
    GroupElement, Mat3, Mat9, Vec3,
};

/// Log-error coordinates `(xi_p [m], xi_v [m/s], xi_R [rad])`.
pub type ErrorState = AlgebraVector;

/// `eta = X^-1 Xref`.
pub fn left_error(x: &GroupElement, x_ref: &GroupElement) -> GroupElement {
    x.inverse().compose(x_ref)
}

/// `xi = Log(X^-1 Xref)`.
pub fn log_error(x: &GroupElement, x_ref: &GroupElement) -> Result<ErrorState> {
    se23_log(&left_error(x, x_ref))
}

/// Recovers the tracking body from the reference and the error: `X = Xref Exp(xi)^-1`.
pub fn state_from_error(x_ref: &GroupElement, xi: &ErrorState) -> GroupElement {
    x_ref.compose(&se23_exp(xi).inverse())
}

/// Constant map with `A_C xi = (xi_v, 0, 0)`.
pub fn a_c_matrix() -> Mat9 {
    let mut a = Mat9::zeros();
    a.fixed_view_mut::<3, 3>(0, 3).copy_from(&Mat3::identity());
    a
}

/// Right-hand side of the log-error ODE, evaluated term by term.
pub fn error_rhs(
    xi: &ErrorState,
    n_ref: &AlgebraVector,
    mm: &MismatchPair,
    x_ref: &GroupElement,
) -> Result<AlgebraVector> {
    let linear = (a_c_matrix() - ad_matrix(n_ref)) * *xi;
    let control = jl_inv_apply(xi, &mm.n_tilde)?;
    let gravity = jr_inv_apply(xi, &(x_ref.inverse().adjoint() * mm.m_tilde))?;
    Ok(linear + control + gravity)
}

/// Gravity channel `Jr^-1(xi) Ad(Xref^-1) m~` in its reduced form
/// `(0, Jr^-1_SO3(xi_R) Rref^T (g(p_ref) - g(p)), 0)`.
pub fn gravity_mismatch_term(
    xi: &ErrorState,
    x_ref: &GroupElement,
    p: &Vec3,
    model: &GravityModel,
) -> Result<AlgebraVector> {
    let dg = model.acceleration(&x_ref.pos)? - model.acceleration(p)?;
    let jr_inv = so3_right_jacobian_inv(&xi.r())?;
    let rt = x_ref.rot.transpose();
    Ok(AlgebraVector::velocity_only(jr_inv * (rt * dg)))
}

/// `(t/2) / sin(t/2)`, the spectral-norm bound of the SO(3) inverse right Jacobian.
pub fn half_angle_factor(theta: f64) -> f64 {
    if theta < 1e-4 {
        let t2 = theta * theta;
        1.0 + t2 / 24.0 + 7.0 * t2 * t2 / 5760.0
    } else {
        let h = 0.5 * theta;
        h / h.sin()
    }
}

/// Inputs to the gravity-mismatch bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    /// `|p_ref|`, m
    pub r: f64,
    /// `|xi_p|`, m
    pub xi_p_norm: f64,
    /// `|xi_R|`, rad
    pub theta: f64,
    /// m^3/s^2
    pub mu: f64,
}

/// `f(d) = d (2r - d) / (r^2 (r - d)^2)`, increasing on `[0, r)`.
pub fn radial_factor(r: f64, d: f64) -> f64 {
    d * (2.0 * r - d) / (r * r * (r - d) * (r - d))
}

/// Upper bound on `|Jr^-1(xi) Ad(Xref^-1) m~|`, m/s^2.
pub fn pointwise_bound(b: &BoundInputs) -> Result<f64> {
    if !(b.r > 0.0) || !(b.xi_p_norm >= 0.0) || b.xi_p_norm >= b.r {
        return Err(Error::Domain(format!(
            "bound requires 0 <= |xi_p| < r, got |xi_p| = {}, r = {}",
            b.xi_p_norm, b.r
        )));
    }
    if !(b.theta >= 0.0) || b.theta >= std::f64::consts::PI {
        return Err(Error::Domain(format!("bound requires 0 <= theta < pi, got {}", b.theta)));
    }
    if !(b.mu > 0.0) {
        return Err(Error::Domain(format!("mu must be positive, got {}", b.mu)));
    }
    Ok(half_angle_factor(b.theta) * b.mu * radial_factor(b.r, b.xi_p_norm))
}

/// Worst-case bound over a trajectory: smallest radius, largest error.
pub fn global_bound(r_min: f64, xi_p_max: f64, theta_max: f64, mu: f64) -> Result<f64> {
    pointwise_bound(&BoundInputs {
        r: r_min,
        xi_p_norm: xi_p_max,
        theta: theta_max,
        mu,
    })
}
