//! SO(3) and SE_2(3) primitives.
//!
//! Group elements are the 5x5 "double direct isometries"
//!
//! ```text
//!     | R  v  p |
//! X = | 0  1  0 |
//!     | 0  0  1 |
//! ```
//!
//! and algebra coordinates are stacked as `xi = (xi_p, xi_v, xi_R)`, so that
//! `wedge(xi)` carries `[xi_R]x` in the top-left block, `xi_v` in column 4 and
//! `xi_p` in column 5. Every 9x9 operator in this module (`ad`, `Ad`, the
//! Jacobians) acts on that ordering.
//!
//! The SE_2(3) Jacobians are evaluated from their Bernoulli series in `ad_xi`,
//! which converges for rotation angles below `2 pi`. Callers are restricted to
//! angles below `pi - SINGULARITY_MARGIN`, where the logarithm is single valued.

use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::{Matrix3, Matrix5, SMatrix, SVector, Vector3};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;
pub type Mat5 = Matrix5<f64>;
pub type Vec9 = SVector<f64, 9>;
pub type Mat9 = SMatrix<f64, 9, 9>;

/// Orthonormality / unit-determinant tolerance for [`Rotation::new`].
pub const ORTHO_TOL: f64 = 1e-10;

/// Distance below `pi` at which the logarithm is declared singular.
pub const SINGULARITY_MARGIN: f64 = 1e-6;

/// Tolerance on the structural zeros checked by [`vee`].
pub const ALGEBRA_TOL: f64 = 1e-12;

/// Below this angle the trigonometric coefficients switch to Taylor series.
const SMALL_ANGLE: f64 = 1e-4;

/// Above this angle `so3_log` recovers the axis from the symmetric part.
const LARGE_ANGLE: f64 = 2.5;

const SERIES_TOL: f64 = 1e-14;
const SERIES_MAX_TERMS: usize = 40;

// ---------------------------------------------------------------------------
// Rotation
// ---------------------------------------------------------------------------

/// An element of SO(3), body-to-inertial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation(Mat3);

impl Rotation {
    pub fn identity() -> Self {
        Rotation(Mat3::identity())
    }

    /// Validates `R^T R = I` and `det R = +1` to [`ORTHO_TOL`].
    pub fn new(m: Mat3) -> Result<Self> {
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidRotation("non-finite entry".into()));
        }
        let ortho = (m.transpose() * m - Mat3::identity()).amax();
        if ortho > ORTHO_TOL {
            return Err(Error::InvalidRotation(format!(
                "|R^T R - I| = {ortho:e} exceeds {ORTHO_TOL:e}"
            )));
        }
        let det = m.determinant();
        if (det - 1.0).abs() > ORTHO_TOL {
            return Err(Error::InvalidRotation(format!("det R = {det}")));
        }
        Ok(Rotation(m))
    }

    /// Wraps a matrix the caller knows to be a rotation.
    pub fn from_matrix_unchecked(m: Mat3) -> Self {
        Rotation(m)
    }

    /// Nearest rotation (polar projection) of an almost-orthogonal matrix.
    pub fn from_matrix_projected(m: Mat3) -> Self {
        let svd = m.svd(true, true);
        let u = svd.u.expect("svd u");
        let v_t = svd.v_t.expect("svd v_t");
        let mut r = u * v_t;
        if r.determinant() < 0.0 {
            let mut d = Mat3::identity();
            d[(2, 2)] = -1.0;
            r = u * d * v_t;
        }
        Rotation(r)
    }

    pub fn renormalized(&self) -> Self {
        Self::from_matrix_projected(self.0)
    }

    pub fn exp(w: &Vec3) -> Self {
        so3_exp(w)
    }

    pub fn log(&self) -> Result<Vec3> {
        so3_log(self)
    }

    #[inline]
    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    #[inline]
    pub fn transpose(&self) -> Self {
        Rotation(self.0.transpose())
    }

    /// Rotation angle in `[0, pi]`.
    pub fn angle(&self) -> f64 {
        let cos = ((self.0.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
        skew_part(&self.0).norm().atan2(cos)
    }
}

impl Mul for Rotation {
    type Output = Rotation;
    fn mul(self, rhs: Rotation) -> Rotation {
        Rotation(self.0 * rhs.0)
    }
}

impl Mul<Vec3> for Rotation {
    type Output = Vec3;
    fn mul(self, rhs: Vec3) -> Vec3 {
        self.0 * rhs
    }
}

// ---------------------------------------------------------------------------
// Algebra coordinates
// ---------------------------------------------------------------------------

/// Coordinates `xi = (xi_p, xi_v, xi_R)` of an element of se2(3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgebraVector(Vec9);

impl AlgebraVector {
    pub fn new(p: Vec3, v: Vec3, r: Vec3) -> Self {
        let mut x = Vec9::zeros();
        x.fixed_rows_mut::<3>(0).copy_from(&p);
        x.fixed_rows_mut::<3>(3).copy_from(&v);
        x.fixed_rows_mut::<3>(6).copy_from(&r);
        AlgebraVector(x)
    }

    pub fn zeros() -> Self {
        AlgebraVector(Vec9::zeros())
    }

    pub fn from_vec9(x: Vec9) -> Self {
        AlgebraVector(x)
    }

    /// Only the velocity slot set.
    pub fn velocity_only(v: Vec3) -> Self {
        Self::new(Vec3::zeros(), v, Vec3::zeros())
    }

    #[inline]
    pub fn p(&self) -> Vec3 {
        self.0.fixed_rows::<3>(0).into_owned()
    }

    #[inline]
    pub fn v(&self) -> Vec3 {
        self.0.fixed_rows::<3>(3).into_owned()
    }

    #[inline]
    pub fn r(&self) -> Vec3 {
        self.0.fixed_rows::<3>(6).into_owned()
    }

    #[inline]
    pub fn as_vec9(&self) -> &Vec9 {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn wedge(&self) -> Mat5 {
        wedge(self)
    }
}

impl From<Vec9> for AlgebraVector {
    fn from(x: Vec9) -> Self {
        AlgebraVector(x)
    }
}

impl Add for AlgebraVector {
    type Output = AlgebraVector;
    fn add(self, rhs: Self) -> Self {
        AlgebraVector(self.0 + rhs.0)
    }
}

impl AddAssign for AlgebraVector {
    fn add_assign(&mut self, rhs: Self) {
        self.0 += rhs.0;
    }
}

impl Sub for AlgebraVector {
    type Output = AlgebraVector;
    fn sub(self, rhs: Self) -> Self {
        AlgebraVector(self.0 - rhs.0)
    }
}

impl Neg for AlgebraVector {
    type Output = AlgebraVector;
    fn neg(self) -> Self {
        AlgebraVector(-self.0)
    }
}

impl Mul<f64> for AlgebraVector {
    type Output = AlgebraVector;
    fn mul(self, rhs: f64) -> Self {
        AlgebraVector(self.0 * rhs)
    }
}

impl Mul<AlgebraVector> for Mat9 {
    type Output = AlgebraVector;
    fn mul(self, rhs: AlgebraVector) -> AlgebraVector {
        AlgebraVector(self * rhs.0)
    }
}

impl Mul<AlgebraVector> for &Mat9 {
    type Output = AlgebraVector;
    fn mul(self, rhs: AlgebraVector) -> AlgebraVector {
        AlgebraVector(self * rhs.0)
    }
}

// ---------------------------------------------------------------------------
// Group elements
// ---------------------------------------------------------------------------

/// Attitude, inertial velocity and inertial position of a rigid body.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupElement {
    pub rot: Rotation,
    pub vel: Vec3,
    pub pos: Vec3,
}

impl GroupElement {
    pub fn new(rot: Rotation, vel: Vec3, pos: Vec3) -> Self {
        GroupElement { rot, vel, pos }
    }

    pub fn identity() -> Self {
        GroupElement::new(Rotation::identity(), Vec3::zeros(), Vec3::zeros())
    }

    pub fn to_matrix(&self) -> Mat5 {
        let mut m = Mat5::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(self.rot.matrix());
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.vel);
        m.fixed_view_mut::<3, 1>(0, 4).copy_from(&self.pos);
        m
    }

    /// Reads the blocks of a 5x5 embedding; the bottom rows must be exactly `[0 I2]`.
    pub fn from_matrix(m: &Mat5) -> Result<Self> {
        for j in 0..5 {
            for i in 3..5 {
                let expected = if i == j { 1.0 } else { 0.0 };
                if m[(i, j)] != expected {
                    return Err(Error::Domain(format!(
                        "entry ({i},{j}) = {} is not {expected}",
                        m[(i, j)]
                    )));
                }
            }
        }
        let rot = Rotation::new(m.fixed_view::<3, 3>(0, 0).into_owned())?;
        Ok(GroupElement {
            rot,
            vel: m.fixed_view::<3, 1>(0, 3).into_owned(),
            pos: m.fixed_view::<3, 1>(0, 4).into_owned(),
        })
    }

    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        let r = self.rot.matrix();
        GroupElement {
            rot: self.rot * other.rot,
            vel: r * other.vel + self.vel,
            pos: r * other.pos + self.pos,
        }
    }

    pub fn inverse(&self) -> GroupElement {
        let rt = self.rot.transpose();
        GroupElement {
            rot: rt,
            vel: -(rt * self.vel),
            pos: -(rt * self.pos),
        }
    }

    pub fn exp(xi: &AlgebraVector) -> GroupElement {
        se23_exp(xi)
    }

    pub fn log(&self) -> Result<AlgebraVector> {
        se23_log(self)
    }

    pub fn adjoint(&self) -> Mat9 {
        big_adjoint(self)
    }

    pub fn renormalized(&self) -> GroupElement {
        GroupElement {
            rot: self.rot.renormalized(),
            ..*self
        }
    }
}

impl Mul for GroupElement {
    type Output = GroupElement;
    fn mul(self, rhs: GroupElement) -> GroupElement {
        self.compose(&rhs)
    }
}

// ---------------------------------------------------------------------------
// hat / wedge / vee
// ---------------------------------------------------------------------------

/// Skew-symmetric matrix with `hat3(w) * u = w x u`.
#[inline]
pub fn hat3(w: &Vec3) -> Mat3 {
    Mat3::new(0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0)
}

#[inline]
fn skew_part(m: &Mat3) -> Vec3 {
    Vec3::new(
        m[(2, 1)] - m[(1, 2)],
        m[(0, 2)] - m[(2, 0)],
        m[(1, 0)] - m[(0, 1)],
    ) * 0.5
}

pub fn wedge(xi: &AlgebraVector) -> Mat5 {
    let mut m = Mat5::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&hat3(&xi.r()));
    m.fixed_view_mut::<3, 1>(0, 3).copy_from(&xi.v());
    m.fixed_view_mut::<3, 1>(0, 4).copy_from(&xi.p());
    m
}

/// Inverse of [`wedge`]. Rejects matrices whose bottom rows or symmetric
/// top-left part exceed [`ALGEBRA_TOL`].
pub fn vee(a: &Mat5) -> Result<AlgebraVector> {
    let bottom = a.fixed_view::<2, 5>(3, 0).amax();
    if bottom > ALGEBRA_TOL {
        return Err(Error::NotInAlgebra(format!(
            "bottom rows have magnitude {bottom:e}"
        )));
    }
    let top = a.fixed_view::<3, 3>(0, 0).into_owned();
    let sym = (top + top.transpose()).amax() * 0.5;
    if sym > ALGEBRA_TOL {
        return Err(Error::NotInAlgebra(format!(
            "rotation block has symmetric part {sym:e}"
        )));
    }
    Ok(AlgebraVector::new(
        a.fixed_view::<3, 1>(0, 4).into_owned(),
        a.fixed_view::<3, 1>(0, 3).into_owned(),
        skew_part(&top),
    ))
}

// ---------------------------------------------------------------------------
// SO(3)
// ---------------------------------------------------------------------------

/// Rodrigues coefficients `(sin t / t, (1 - cos t) / t^2)`.
fn rodrigues_coefficients(theta: f64) -> (f64, f64) {
    if theta < SMALL_ANGLE {
        let t2 = theta * theta;
        (1.0 - t2 / 6.0 + t2 * t2 / 120.0, 0.5 - t2 / 24.0 + t2 * t2 / 720.0)
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / (theta * theta))
    }
}

pub fn so3_exp(w: &Vec3) -> Rotation {
    let theta = w.norm();
    let (a, b) = rodrigues_coefficients(theta);
    let k = hat3(w);
    Rotation(Mat3::identity() + k * a + k * k * b)
}

fn check_angle(theta: f64) -> Result<()> {
    if theta >= PI - SINGULARITY_MARGIN || !theta.is_finite() {
        Err(Error::NearSingularity {
            angle: theta,
            margin: SINGULARITY_MARGIN,
        })
    } else {
        Ok(())
    }
}

pub fn so3_log(r: &Rotation) -> Result<Vec3> {
    let m = r.matrix();
    let cos = ((m.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let axis_sin = skew_part(m);
    let sin = axis_sin.norm();
    let theta = sin.atan2(cos);
    check_angle(theta)?;
    if theta < SMALL_ANGLE {
        let t2 = theta * theta;
        return Ok(axis_sin * (1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0));
    }
    if theta < LARGE_ANGLE {
        return Ok(axis_sin * (theta / sin));
    }
    // (R + R^T)/2 - cos I = (1 - cos) n n^T; take its best-conditioned column.
    let b = (m + m.transpose()) * 0.5 - Mat3::identity() * cos;
    let j = (0..3)
        .max_by(|&i, &k| b[(i, i)].total_cmp(&b[(k, k)]))
        .unwrap_or(0);
    let mut n = b.column(j).into_owned().normalize();
    if n.dot(&axis_sin) < 0.0 {
        n = -n;
    }
    Ok(n * theta)
}

/// SO(3) left Jacobian `J_l(w) = I + (1 - cos t)/t^2 W + (t - sin t)/t^3 W^2`.
pub fn so3_left_jacobian(w: &Vec3) -> Mat3 {
    let theta = w.norm();
    let (_, b) = rodrigues_coefficients(theta);
    let c = if theta < SMALL_ANGLE {
        let t2 = theta * theta;
        1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0
    } else {
        (theta - theta.sin()) / (theta * theta * theta)
    };
    let k = hat3(w);
    Mat3::identity() + k * b + k * k * c
}

pub fn so3_left_jacobian_inv(w: &Vec3) -> Result<Mat3> {
    let theta = w.norm();
    check_angle(theta)?;
    let d = if theta < 1e-3 {
        let t2 = theta * theta;
        1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0
    } else {
        1.0 / (theta * theta) - (1.0 + theta.cos()) / (2.0 * theta * theta.sin())
    };
    let k = hat3(w);
    Ok(Mat3::identity() - k * 0.5 + k * k * d)
}

pub fn so3_right_jacobian(w: &Vec3) -> Mat3 {
    so3_left_jacobian(&-w)
}

pub fn so3_right_jacobian_inv(w: &Vec3) -> Result<Mat3> {
    so3_left_jacobian_inv(&-w)
}

// ---------------------------------------------------------------------------
// SE_2(3)
// ---------------------------------------------------------------------------

pub fn se23_exp(xi: &AlgebraVector) -> GroupElement {
    let w = xi.r();
    let jl = so3_left_jacobian(&w);
    GroupElement {
        rot: so3_exp(&w),
        vel: jl * xi.v(),
        pos: jl * xi.p(),
    }
}

pub fn se23_log(x: &GroupElement) -> Result<AlgebraVector> {
    let w = so3_log(&x.rot)?;
    let jl_inv = so3_left_jacobian_inv(&w)?;
    Ok(AlgebraVector::new(jl_inv * x.pos, jl_inv * x.vel, w))
}

/// Matrix of `zeta -> vee([wedge(xi), wedge(zeta)])`.
///
/// Block upper triangular with `[xi_R]x` on every diagonal block.
pub fn ad_matrix(xi: &AlgebraVector) -> Mat9 {
    let w = hat3(&xi.r());
    let mut m = Mat9::zeros();
    for k in 0..3 {
        m.fixed_view_mut::<3, 3>(3 * k, 3 * k).copy_from(&w);
    }
    m.fixed_view_mut::<3, 3>(0, 6).copy_from(&hat3(&xi.p()));
    m.fixed_view_mut::<3, 3>(3, 6).copy_from(&hat3(&xi.v()));
    m
}

/// Matrix of `zeta -> vee(X wedge(zeta) X^-1)`.
pub fn big_adjoint(x: &GroupElement) -> Mat9 {
    let r = x.rot.matrix();
    let mut m = Mat9::zeros();
    for k in 0..3 {
        m.fixed_view_mut::<3, 3>(3 * k, 3 * k).copy_from(r);
    }
    m.fixed_view_mut::<3, 3>(0, 6).copy_from(&(hat3(&x.pos) * r));
    m.fixed_view_mut::<3, 3>(3, 6).copy_from(&(hat3(&x.vel) * r));
    m
}

/// Coefficients `B_k / k!` of `x / (e^x - 1)` (the `B_1 = -1/2` convention).
fn bernoulli_coefficients() -> &'static [f64; SERIES_MAX_TERMS + 1] {
    use std::sync::OnceLock;
    static COEFFS: OnceLock<[f64; SERIES_MAX_TERMS + 1]> = OnceLock::new();
    COEFFS.get_or_init(|| {
        // (sum c_k x^k)(sum_{j>=0} x^j / (j+1)!) = 1
        let mut inv_fact = [0.0f64; SERIES_MAX_TERMS + 2];
        inv_fact[0] = 1.0;
        for j in 1..inv_fact.len() {
            inv_fact[j] = inv_fact[j - 1] / j as f64;
        }
        let mut c = [0.0f64; SERIES_MAX_TERMS + 1];
        c[0] = 1.0;
        for m in 1..=SERIES_MAX_TERMS {
            let s: f64 = (0..m).map(|j| c[j] * inv_fact[m - j + 1]).sum();
            c[m] = -s;
        }
        // Odd coefficients beyond k = 1 vanish identically.
        for m in (3..=SERIES_MAX_TERMS).step_by(2) {
            c[m] = 0.0;
        }
        c
    })
}

/// `B_k / k!` for the series of `x / (e^x - 1)`; exposed for tests.
pub fn bernoulli_coefficient(k: usize) -> f64 {
    bernoulli_coefficients()[k]
}

/// Which inverse Jacobian a Bernoulli series evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    /// `ad / (I - e^-ad)`, first-order coefficient `+1/2`.
    Right,
    /// `ad / (e^ad - I)`, first-order coefficient `-1/2`.
    Left,
}

fn coefficient(side: Side, k: usize) -> f64 {
    let c = bernoulli_coefficient(k);
    match (side, k) {
        (Side::Right, 1) => -c,
        _ => c,
    }
}

fn series_matrix(xi: &AlgebraVector, side: Side) -> Result<Mat9> {
    check_angle(xi.r().norm())?;
    let ad = ad_matrix(xi);
    let mut sum = Mat9::identity();
    let mut power = Mat9::identity();
    for k in 1..=SERIES_MAX_TERMS {
        power = ad * power;
        let c = coefficient(side, k);
        if c == 0.0 {
            continue;
        }
        let term = power * c;
        sum += term;
        if k >= 2 && term.amax() < SERIES_TOL * sum.amax().max(1.0) {
            break;
        }
    }
    Ok(sum)
}

fn series_apply(xi: &AlgebraVector, x: &AlgebraVector, side: Side) -> Result<AlgebraVector> {
    check_angle(xi.r().norm())?;
    let ad = ad_matrix(xi);
    let mut sum = *x.as_vec9();
    let mut power = *x.as_vec9();
    for k in 1..=SERIES_MAX_TERMS {
        power = ad * power;
        let c = coefficient(side, k);
        if c == 0.0 {
            continue;
        }
        let term = power * c;
        sum += term;
        if k >= 2 && term.amax() <= SERIES_TOL * sum.amax() {
            break;
        }
    }
    Ok(AlgebraVector(sum))
}

/// Inverse right Jacobian `ad / (I - e^-ad)` of SE_2(3).
pub fn jr_inv(xi: &AlgebraVector) -> Result<Mat9> {
    series_matrix(xi, Side::Right)
}

/// Inverse left Jacobian `ad e^-ad / (I - e^-ad)` of SE_2(3).
pub fn jl_inv(xi: &AlgebraVector) -> Result<Mat9> {
    series_matrix(xi, Side::Left)
}

/// `jr_inv(xi) * x` without forming the 9x9 matrix.
pub fn jr_inv_apply(xi: &AlgebraVector, x: &AlgebraVector) -> Result<AlgebraVector> {
    series_apply(xi, x, Side::Right)
}

/// `jl_inv(xi) * x` without forming the 9x9 matrix.
pub fn jl_inv_apply(xi: &AlgebraVector, x: &AlgebraVector) -> Result<AlgebraVector> {
    series_apply(xi, x, Side::Left)
}

fn invert9(m: Mat9) -> Result<Mat9> {
    m.lu()
        .try_inverse()
        .ok_or_else(|| Error::Domain("singular Jacobian".into()))
}

pub fn jr(xi: &AlgebraVector) -> Result<Mat9> {
    invert9(jr_inv(xi)?)
}

pub fn jl(xi: &AlgebraVector) -> Result<Mat9> {
    invert9(jl_inv(xi)?)
}
