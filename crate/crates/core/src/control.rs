//! Gravity-cancelling dynamic inversion and stabilizing feedback for the
//! log-error dynamics.
//!
//! With `n~ = u1` the gravity channel disappears and the error obeys
//! `xidot = A(t) xi`, `A = -ad(n_ref) + A_C`. Adding `u2` gives
//! `xidot = (A + B K) xi`.

use nalgebra::{DMatrix, DVector, SMatrix};

use crate::dynamics::{BodyInput, GravityModel};
use crate::error::{Error, Result};
use crate::liegroup::{ad_matrix, hat3, jl_inv, AlgebraVector, GroupElement, Mat3, Mat9};
use crate::logerror::{a_c_matrix, ErrorState};

pub type Mat9x6 = SMatrix<f64, 9, 6>;
pub type Mat6x9 = SMatrix<f64, 6, 9>;

/// Default closed-loop decay rate, 1/s.
pub const DEFAULT_DECAY_RATE: f64 = 0.01;

/// `B`: acceleration channel into the velocity rows, angular-rate channel into
/// the rotation rows, no position actuation.
pub fn input_matrix() -> Mat9x6 {
    let mut b = Mat9x6::zeros();
    b.fixed_view_mut::<3, 3>(3, 0).copy_from(&Mat3::identity());
    b.fixed_view_mut::<3, 3>(6, 3).copy_from(&Mat3::identity());
    b
}

/// `A(t) = -ad(n_ref) + A_C`.
pub fn closed_loop_a(n_ref: &AlgebraVector) -> Mat9 {
    a_c_matrix() - ad_matrix(n_ref)
}

/// Solves `A^T P + P A = -I`. `A` is Hurwitz iff `P` exists and is positive
/// definite; returns `P` and its extreme eigenvalues in that case.
fn lyapunov(a: &Mat9) -> Option<(Mat9, f64, f64)> {
    let n = 9;
    let mut lhs = DMatrix::<f64>::zeros(n * n, n * n);
    // vec(A^T P + P A), column-major vec
    for j in 0..n {
        for i in 0..n {
            let row = j * n + i;
            for k in 0..n {
                lhs[(row, j * n + k)] += a[(k, i)];
                lhs[(row, k * n + i)] += a[(k, j)];
            }
        }
    }
    let rhs = DVector::<f64>::from_fn(n * n, |r, _| if r % n == r / n { -1.0 } else { 0.0 });
    let sol = lhs.lu().solve(&rhs)?;
    let p = Mat9::from_column_slice(sol.as_slice());
    let p = 0.5 * (p + p.transpose());
    let resid = (a.transpose() * p + p * a + Mat9::identity()).amax();
    if !(resid < 1e-6) {
        return None;
    }
    let eig = p.symmetric_eigenvalues();
    let (lo, hi) = (eig.min(), eig.max());
    (lo > 0.0 && hi.is_finite()).then_some((p, lo, hi))
}

fn is_hurwitz(a: &Mat9) -> bool {
    lyapunov(a).is_some()
}

/// Constant state feedback `K` (6x9), checked to make `A + B K` Hurwitz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainMatrix {
    k: Mat6x9,
}

impl GainMatrix {
    pub fn new(k: Mat6x9, n_ref: &AlgebraVector) -> Result<Self> {
        if k.iter().any(|x| !x.is_finite()) {
            return Err(Error::GainSynthesis("gain has non-finite entries".into()));
        }
        let acl = closed_loop_a(n_ref) + input_matrix() * k;
        if !is_hurwitz(&acl) {
            return Err(Error::GainSynthesis("A + BK is not Hurwitz".into()));
        }
        Ok(GainMatrix { k })
    }

    /// No feedback; not a stabilizing gain.
    pub fn zero() -> Self {
        GainMatrix { k: Mat6x9::zeros() }
    }

    pub fn matrix(&self) -> &Mat6x9 {
        &self.k
    }

    /// `A(n_ref) + B K`.
    pub fn closed_loop(&self, n_ref: &AlgebraVector) -> Mat9 {
        closed_loop_a(n_ref) + input_matrix() * self.k
    }
}

/// Gain for constant `n_ref` placing every closed-loop eigenvalue at or left
/// of `-decay_rate`.
///
/// The rotation error decays at `-2 lambda`. With `q = xi_v - W xi_p` the
/// translational error becomes `pdot = q`, `qdot = -kp p - kd q` per axis,
/// with poles at `-2 lambda` and `-3 lambda`.
pub fn default_gain(n_ref: &AlgebraVector, decay_rate: f64) -> Result<GainMatrix> {
    if !(decay_rate > 0.0) || !decay_rate.is_finite() {
        return Err(Error::GainSynthesis(format!("decay rate must be positive, got {decay_rate}")));
    }
    let l = decay_rate;
    let (kp, kd, kr) = (6.0 * l * l, 5.0 * l, 2.0 * l);
    let w = hat3(&n_ref.r());
    let a = hat3(&n_ref.v());
    let i3 = Mat3::identity();
    let mut k = Mat6x9::zeros();
    k.fixed_view_mut::<3, 3>(0, 0).copy_from(&(kd * w - w * w - kp * i3));
    k.fixed_view_mut::<3, 3>(0, 3).copy_from(&(2.0 * w - kd * i3));
    k.fixed_view_mut::<3, 3>(0, 6).copy_from(&a);
    k.fixed_view_mut::<3, 3>(3, 6).copy_from(&(w - kr * i3));
    let gain = GainMatrix::new(k, n_ref)?;
    // Re(eig) <= -l  iff  A + BK + l I is Hurwitz (checked with a small margin)
    let shifted = gain.closed_loop(n_ref) + Mat9::identity() * (l * (1.0 - 1e-6));
    if !is_hurwitz(&shifted) {
        return Err(Error::GainSynthesis(format!("closed-loop eigenvalues do not meet -{l}")));
    }
    Ok(gain)
}

/// Constant `c` with `|xi(t)| <= c e^(-lambda t / 2) |xi(0)|` for
/// `xidot = (A + B K) xi`.
///
/// Solves `As^T P + P As = -I` with `As = A + BK + (lambda/2) I` and returns
/// `sqrt(cond(P))`.
pub fn envelope_constant(acl: &Mat9, decay_rate: f64) -> Result<f64> {
    let a_s = acl + Mat9::identity() * (0.5 * decay_rate);
    let (_, lo, hi) = lyapunov(&a_s).ok_or_else(|| {
        Error::GainSynthesis(format!("decay rate {decay_rate} is not certified by the closed loop"))
    })?;
    Ok((hi / lo).sqrt())
}

/// `u1 = -Ad(X^-1) m~`; velocity slot `R^T (g(p) - g(p_ref))`.
pub fn u1_dynamic_inversion(
    x: &GroupElement,
    x_ref: &GroupElement,
    model: &GravityModel,
) -> Result<AlgebraVector> {
    let dg = model.acceleration(&x.pos)? - model.acceleration(&x_ref.pos)?;
    Ok(AlgebraVector::velocity_only(x.rot.transpose() * dg))
}

/// `u2 = Jl(xi) B K xi`, so that `Jl^-1(xi) u2 = B K xi`.
pub fn u2_stabilizing(xi: &ErrorState, k: &GainMatrix) -> Result<AlgebraVector> {
    let bk = AlgebraVector::from_vec9(input_matrix() * (k.matrix() * xi.as_vec9()));
    if bk.norm() == 0.0 {
        return Ok(AlgebraVector::zeros());
    }
    let jinv = jl_inv(xi)?;
    let sol = jinv
        .lu()
        .solve(bk.as_vec9())
        .ok_or_else(|| Error::Domain("singular left Jacobian".into()))?;
    Ok(AlgebraVector::from_vec9(sol))
}

/// Thruster command realizing a mismatch: `n = n_ref - n~`.
///
/// Fails if `n~` has a position-slot component, which no thruster can produce.
pub fn apply_mismatch_as_input(n_ref: &BodyInput, n_tilde: &AlgebraVector) -> Result<BodyInput> {
    if n_tilde.p().iter().any(|&x| x != 0.0) {
        return Err(Error::Domain(
            "mismatch has a position-slot component; use a generalized input".into(),
        ));
    }
    Ok(BodyInput::new(n_ref.a - n_tilde.v(), n_ref.omega - n_tilde.r()))
}

/// Generalized algebra input realizing a mismatch, position slot included.
pub fn apply_mismatch_generalized(n_ref: &AlgebraVector, n_tilde: &AlgebraVector) -> AlgebraVector {
    *n_ref - *n_tilde
}
