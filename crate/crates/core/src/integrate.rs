//! Runge-Kutta propagation of the truth model and of the log-error ODE on a
//! shared output grid.
//!
//! Attitude is carried as a local increment `phi` on top of a per-step base
//! rotation, `R = R0 Exp(phi)` with `phidot = Jr^-1(phi) omega`. After each
//! accepted step the base absorbs the increment and is re-orthonormalized.

use nalgebra::SVector;

use crate::dynamics::{BodyInput, GravityModel};
use crate::error::{Error, Result};
use crate::liegroup::{
    so3_exp, so3_log, so3_right_jacobian_inv, AlgebraVector, GroupElement, Mat9, Rotation, Vec3, Vec9,
};
use crate::logerror::{error_rhs, ErrorState};
use crate::dynamics::MismatchPair;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Rk4,
    Adaptive45,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    /// RK4 step, s
    pub fixed_dt: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// s
    pub max_dt: f64,
    /// s
    pub min_dt: f64,
    /// Output grid spacing, s
    pub sample_dt: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::Adaptive45,
            fixed_dt: 1.0,
            rel_tol: 1e-12,
            abs_tol: 1e-9,
            max_dt: 60.0,
            min_dt: 1e-9,
            sample_dt: 10.0,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = |x: f64| x > 0.0 && x.is_finite();
        if !pos(self.rel_tol) || !pos(self.abs_tol) {
            return Err(Error::Domain("tolerances must be positive".into()));
        }
        if !pos(self.min_dt) || !pos(self.max_dt) || self.min_dt > self.max_dt {
            return Err(Error::Domain("need 0 < min_dt <= max_dt".into()));
        }
        if !pos(self.sample_dt) {
            return Err(Error::Domain("sample_dt must be positive".into()));
        }
        if self.method == Method::Rk4 && !pos(self.fixed_dt) {
            return Err(Error::Domain("fixed_dt must be positive".into()));
        }
        Ok(())
    }
}

/// Output times `0, dt, 2 dt, ...` up to `t_end`, with `t_end` appended when it
/// is off the grid. Every propagator uses this grid, so timestamps are bit-equal.
pub fn sample_grid(t_end: f64, dt: f64) -> Vec<f64> {
    let n = (t_end / dt * (1.0 + 1e-12)).floor() as usize;
    let mut grid: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
    let last = grid[n];
    if n == 0 || t_end - last > 1e-9 * dt {
        grid.push(t_end);
    } else {
        grid[n] = t_end;
    }
    grid
}

/// An ODE on `R^N` whose state may be re-parameterized after each accepted step.
pub trait OdeSystem<const N: usize> {
    fn rhs(&mut self, t: f64, y: &SVector<f64, N>) -> Result<SVector<f64, N>>;

    /// Called once per accepted step; returns the state to continue from.
    fn commit(&mut self, _t: f64, y: SVector<f64, N>) -> Result<SVector<f64, N>> {
        Ok(y)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

// Dormand-Prince 5(4)
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn rk4_step<const N: usize, S: OdeSystem<N>>(
    sys: &mut S,
    t: f64,
    y: &SVector<f64, N>,
    h: f64,
) -> Result<SVector<f64, N>> {
    let k1 = sys.rhs(t, y)?;
    let k2 = sys.rhs(t + 0.5 * h, &(y + k1 * (0.5 * h)))?;
    let k3 = sys.rhs(t + 0.5 * h, &(y + k2 * (0.5 * h)))?;
    let k4 = sys.rhs(t + h, &(y + k3 * h))?;
    Ok(y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0))
}

/// One Dormand-Prince step; returns the 5th-order solution and the scaled
/// max-norm error (accept when <= 1).
fn dp45_step<const N: usize, S: OdeSystem<N>>(
    sys: &mut S,
    t: f64,
    y: &SVector<f64, N>,
    h: f64,
    cfg: &IntegratorConfig,
) -> Result<(SVector<f64, N>, f64)> {
    let mut k = [SVector::<f64, N>::zeros(); 7];
    for s in 0..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            if A[s][j] != 0.0 {
                ys += kj * (h * A[s][j]);
            }
        }
        k[s] = sys.rhs(t + C[s] * h, &ys)?;
    }
    let mut y5 = *y;
    let mut err = SVector::<f64, N>::zeros();
    for i in 0..7 {
        if B5[i] != 0.0 {
            y5 += k[i] * (h * B5[i]);
        }
        err += k[i] * (h * (B5[i] - B4[i]));
    }
    let mut e = 0.0f64;
    for i in 0..N {
        let sc = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(y5[i].abs());
        e = e.max(err[i].abs() / sc);
    }
    Ok((y5, e))
}

/// Integrates `sys` from `grid[0]` through every grid time, calling `on_sample`
/// at each one (including the first) with the committed state.
pub fn integrate<const N: usize, S, F>(
    sys: &mut S,
    y0: SVector<f64, N>,
    grid: &[f64],
    cfg: &IntegratorConfig,
    mut on_sample: F,
) -> Result<IntegrationStats>
where
    S: OdeSystem<N>,
    F: FnMut(&mut S, f64, &SVector<f64, N>) -> Result<()>,
{
    cfg.validate()?;
    let mut stats = IntegrationStats::default();
    let Some(&t0) = grid.first() else {
        return Ok(stats);
    };
    let mut t = t0;
    let mut y = y0;
    on_sample(sys, t, &y)?;
    let mut h = match cfg.method {
        Method::Rk4 => cfg.fixed_dt,
        Method::Adaptive45 => cfg.max_dt.min(1.0).max(cfg.min_dt),
    };
    for &t_next in &grid[1..] {
        while t < t_next {
            let remaining = t_next - t;
            let landing = h >= remaining / 1.01;
            let h_try = if landing { remaining } else { h };
            let y_new = match cfg.method {
                Method::Rk4 => {
                    stats.rhs_evals += 4;
                    rk4_step(sys, t, &y, h_try)?
                }
                Method::Adaptive45 => {
                    stats.rhs_evals += 7;
                    let (y5, e) = dp45_step(sys, t, &y, h_try, cfg)?;
                    let factor = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) };
                    if e > 1.0 {
                        stats.rejected += 1;
                        h = h_try * factor.min(0.9);
                        if h < cfg.min_dt {
                            return Err(Error::StepSizeUnderflow { t, h });
                        }
                        continue;
                    }
                    // a short landing step does not shrink the proposal
                    let proposal = h_try * factor;
                    h = if landing { h.max(proposal) } else { proposal };
                    h = h.min(cfg.max_dt).max(cfg.min_dt);
                    y5
                }
            };
            t = if landing { t_next } else { t + h_try };
            y = sys.commit(t, y_new)?;
            stats.accepted += 1;
        }
        on_sample(sys, t, &y)?;
    }
    Ok(stats)
}

/// Truth-model derivative of one body in local coordinates `(p, v, phi)`.
fn body_derivative(
    base: &Rotation,
    y: &Vec9,
    n: &AlgebraVector,
    model: &GravityModel,
) -> Result<Vec9> {
    let p = Vec3::new(y[0], y[1], y[2]);
    let v = Vec3::new(y[3], y[4], y[5]);
    let phi = Vec3::new(y[6], y[7], y[8]);
    let r = base.matrix() * so3_exp(&phi).matrix();
    let g = model.acceleration(&p)?;
    let p_dot = v + r * n.p();
    let v_dot = r * n.v() + g;
    let phi_dot = so3_right_jacobian_inv(&phi)? * n.r();
    let mut out = Vec9::zeros();
    out.fixed_rows_mut::<3>(0).copy_from(&p_dot);
    out.fixed_rows_mut::<3>(3).copy_from(&v_dot);
    out.fixed_rows_mut::<3>(6).copy_from(&phi_dot);
    Ok(out)
}

fn body_state(base: &Rotation, y: &Vec9) -> GroupElement {
    let phi = Vec3::new(y[6], y[7], y[8]);
    GroupElement::new(
        Rotation::from_matrix_unchecked(base.matrix() * so3_exp(&phi).matrix()),
        Vec3::new(y[3], y[4], y[5]),
        Vec3::new(y[0], y[1], y[2]),
    )
}

fn body_vector(x: &GroupElement) -> Vec9 {
    let mut y = Vec9::zeros();
    y.fixed_rows_mut::<3>(0).copy_from(&x.pos);
    y.fixed_rows_mut::<3>(3).copy_from(&x.vel);
    y
}

/// Moves the attitude increment into the base and re-orthonormalizes.
fn rebase(base: &mut Rotation, y: &mut Vec9) {
    let phi = Vec3::new(y[6], y[7], y[8]);
    *base = Rotation::from_matrix_unchecked(base.matrix() * so3_exp(&phi).matrix()).renormalized();
    y.fixed_rows_mut::<3>(6).fill(0.0);
}

/// A state and the input applied at that instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub x: GroupElement,
    pub u: BodyInput,
}

struct SingleBody<'a, F> {
    base: Rotation,
    input: F,
    model: &'a GravityModel,
}

impl<F: FnMut(f64) -> BodyInput> OdeSystem<9> for SingleBody<'_, F> {
    fn rhs(&mut self, t: f64, y: &Vec9) -> Result<Vec9> {
        let n = (self.input)(t).to_algebra();
        body_derivative(&self.base, y, &n, self.model)
    }

    fn commit(&mut self, _t: f64, mut y: Vec9) -> Result<Vec9> {
        rebase(&mut self.base, &mut y);
        Ok(y)
    }
}

/// Classical single-body propagation sampled on the uniform grid.
pub fn propagate_classical<F>(
    x0: &GroupElement,
    input: F,
    model: &GravityModel,
    cfg: &IntegratorConfig,
    t_end: f64,
) -> Result<Vec<TrajectorySample>>
where
    F: FnMut(f64) -> BodyInput,
{
    if !(t_end > 0.0) {
        return Err(Error::Domain(format!("t_end must be positive, got {t_end}")));
    }
    let grid = sample_grid(t_end, cfg.sample_dt);
    let mut sys = SingleBody { base: x0.rot.renormalized(), input, model };
    let mut out = Vec::with_capacity(grid.len());
    integrate(&mut sys, body_vector(x0), &grid, cfg, |s, t, y| {
        out.push(TrajectorySample { t, x: body_state(&s.base, y), u: (s.input)(t) });
        Ok(())
    })?;
    Ok(out)
}

/// Reference state stored at an accepted truth step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceKnot {
    pub t: f64,
    pub x: GroupElement,
    /// World-frame acceleration `R n_v + g(p)`, m/s^2
    pub acc: Vec3,
}

/// A reference trajectory `Xref(t)` available at arbitrary times.
pub trait ReferenceTrajectory {
    fn state(&self, t: f64) -> Result<GroupElement>;
    fn span(&self) -> (f64, f64);
}

/// Dense reference built from knots: quintic Hermite on position (from
/// `p, v, a`), cubic Hermite on velocity, geodesic interpolation on attitude.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SampledReference {
    knots: Vec<ReferenceKnot>,
}

impl SampledReference {
    pub fn new(knots: Vec<ReferenceKnot>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::Domain("reference needs at least one knot".into()));
        }
        if knots.windows(2).any(|w| !(w[1].t > w[0].t)) {
            return Err(Error::Domain("reference knots must be strictly increasing in t".into()));
        }
        Ok(SampledReference { knots })
    }

    pub fn knots(&self) -> &[ReferenceKnot] {
        &self.knots
    }
}

impl ReferenceTrajectory for SampledReference {
    fn span(&self) -> (f64, f64) {
        (self.knots[0].t, self.knots[self.knots.len() - 1].t)
    }

    fn state(&self, t: f64) -> Result<GroupElement> {
        let (t0, t1) = self.span();
        let tol = 1e-9 * (1.0 + t1.abs());
        if t < t0 - tol || t > t1 + tol {
            return Err(Error::Domain(format!("t = {t} outside reference span [{t0}, {t1}]")));
        }
        let i = self.knots.partition_point(|k| k.t <= t);
        if i == 0 {
            return Ok(self.knots[0].x);
        }
        if i == self.knots.len() {
            return Ok(self.knots[i - 1].x);
        }
        let (k0, k1) = (&self.knots[i - 1], &self.knots[i]);
        if t == k0.t {
            return Ok(k0.x);
        }
        let h = k1.t - k0.t;
        let s = (t - k0.t) / h;
        let (s2, s3) = (s * s, s * s * s);
        let (s4, s5) = (s3 * s, s3 * s2);
        let h0 = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5;
        let h1 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
        let h2 = 0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5;
        let h3 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
        let h4 = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;
        let h5 = 0.5 * s3 - s4 + 0.5 * s5;
        let pos = k0.x.pos * h0
            + k0.x.vel * (h * h1)
            + k0.acc * (h * h * h2)
            + k1.x.pos * h3
            + k1.x.vel * (h * h4)
            + k1.acc * (h * h * h5);
        let c0 = 1.0 - 3.0 * s2 + 2.0 * s3;
        let c1 = s - 2.0 * s2 + s3;
        let c2 = 3.0 * s2 - 2.0 * s3;
        let c3 = -s2 + s3;
        let vel = k0.x.vel * c0 + k0.acc * (h * c1) + k1.x.vel * c2 + k1.acc * (h * c3);
        let rel = so3_log(&(k0.x.rot.transpose() * k1.x.rot))?;
        let rot = Rotation::from_matrix_unchecked(k0.x.rot.matrix() * so3_exp(&(rel * s)).matrix());
        Ok(GroupElement::new(rot, vel, pos))
    }
}

/// Chief (reference) and deputy states at a grid time, with the generalized
/// inputs applied there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormationSample {
    pub t: f64,
    pub chief: GroupElement,
    pub deputy: GroupElement,
    pub chief_input: AlgebraVector,
    pub deputy_input: AlgebraVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FormationRun {
    pub samples: Vec<FormationSample>,
    pub reference: SampledReference,
    pub stats: IntegrationStats,
}

struct Formation<'a, C, D> {
    chief_base: Rotation,
    deputy_base: Rotation,
    chief_input: C,
    deputy_law: D,
    model: &'a GravityModel,
    knots: Vec<ReferenceKnot>,
}

fn split(y: &SVector<f64, 18>) -> (Vec9, Vec9) {
    (y.fixed_rows::<9>(0).into_owned(), y.fixed_rows::<9>(9).into_owned())
}

impl<C, D> Formation<'_, C, D>
where
    C: FnMut(f64) -> AlgebraVector,
    D: FnMut(f64, &GroupElement, &GroupElement, &AlgebraVector) -> Result<AlgebraVector>,
{
    fn evaluate(&mut self, t: f64, y: &SVector<f64, 18>) -> Result<(GroupElement, GroupElement, AlgebraVector, AlgebraVector)> {
        let (yc, yd) = split(y);
        let xc = body_state(&self.chief_base, &yc);
        let xd = body_state(&self.deputy_base, &yd);
        let nc = (self.chief_input)(t);
        let nd = (self.deputy_law)(t, &xd, &xc, &nc)?;
        Ok((xc, xd, nc, nd))
    }

    fn knot(&mut self, t: f64, y: &SVector<f64, 18>) -> Result<()> {
        let (yc, _) = split(y);
        let xc = body_state(&self.chief_base, &yc);
        let nc = (self.chief_input)(t);
        let acc = xc.rot * nc.v() + self.model.acceleration(&xc.pos)?;
        self.knots.push(ReferenceKnot { t, x: xc, acc });
        Ok(())
    }
}

impl<C, D> OdeSystem<18> for Formation<'_, C, D>
where
    C: FnMut(f64) -> AlgebraVector,
    D: FnMut(f64, &GroupElement, &GroupElement, &AlgebraVector) -> Result<AlgebraVector>,
{
    fn rhs(&mut self, t: f64, y: &SVector<f64, 18>) -> Result<SVector<f64, 18>> {
        let (yc, yd) = split(y);
        let (_, _, nc, nd) = self.evaluate(t, y)?;
        let dc = body_derivative(&self.chief_base, &yc, &nc, self.model)?;
        let dd = body_derivative(&self.deputy_base, &yd, &nd, self.model)?;
        let mut out = SVector::<f64, 18>::zeros();
        out.fixed_rows_mut::<9>(0).copy_from(&dc);
        out.fixed_rows_mut::<9>(9).copy_from(&dd);
        Ok(out)
    }

    fn commit(&mut self, t: f64, y: SVector<f64, 18>) -> Result<SVector<f64, 18>> {
        let (mut yc, mut yd) = split(&y);
        rebase(&mut self.chief_base, &mut yc);
        rebase(&mut self.deputy_base, &mut yd);
        let mut out = SVector::<f64, 18>::zeros();
        out.fixed_rows_mut::<9>(0).copy_from(&yc);
        out.fixed_rows_mut::<9>(9).copy_from(&yd);
        self.knot(t, &out)?;
        Ok(out)
    }
}

/// Propagates a chief with a prescribed generalized input profile and a deputy
/// driven by `deputy_law(t, X, Xref, n_ref)`, both with the classical model.
///
/// The chief's accepted-step states are returned as a dense reference.
pub fn propagate_formation<C, D>(
    chief0: &GroupElement,
    deputy0: &GroupElement,
    chief_input: C,
    deputy_law: D,
    model: &GravityModel,
    cfg: &IntegratorConfig,
    t_end: f64,
) -> Result<FormationRun>
where
    C: FnMut(f64) -> AlgebraVector,
    D: FnMut(f64, &GroupElement, &GroupElement, &AlgebraVector) -> Result<AlgebraVector>,
{
    if !(t_end > 0.0) {
        return Err(Error::Domain(format!("t_end must be positive, got {t_end}")));
    }
    let grid = sample_grid(t_end, cfg.sample_dt);
    let mut sys = Formation {
        chief_base: chief0.rot.renormalized(),
        deputy_base: deputy0.rot.renormalized(),
        chief_input,
        deputy_law,
        model,
        knots: Vec::new(),
    };
    let mut y0 = SVector::<f64, 18>::zeros();
    y0.fixed_rows_mut::<9>(0).copy_from(&body_vector(chief0));
    y0.fixed_rows_mut::<9>(9).copy_from(&body_vector(deputy0));
    sys.knot(grid[0], &y0)?;
    let mut samples = Vec::with_capacity(grid.len());
    let stats = integrate(&mut sys, y0, &grid, cfg, |s, t, y| {
        let (chief, deputy, chief_input, deputy_input) = s.evaluate(t, y)?;
        samples.push(FormationSample { t, chief, deputy, chief_input, deputy_input });
        Ok(())
    })?;
    let reference = SampledReference::new(sys.knots)?;
    Ok(FormationRun { samples, reference, stats })
}

struct LogErrorSystem<'a, R, N, M> {
    reference: &'a R,
    n_ref: N,
    mismatch: M,
    last_t: f64,
}

impl<R, N, M> OdeSystem<9> for LogErrorSystem<'_, R, N, M>
where
    R: ReferenceTrajectory,
    N: FnMut(f64) -> AlgebraVector,
    M: FnMut(f64, &ErrorState, &GroupElement, &AlgebraVector) -> Result<MismatchPair>,
{
    fn rhs(&mut self, t: f64, y: &Vec9) -> Result<Vec9> {
        let xi = AlgebraVector::from_vec9(*y);
        let x_ref = self.reference.state(t)?;
        let n_ref = (self.n_ref)(t);
        let mm = (self.mismatch)(t, &xi, &x_ref, &n_ref)?;
        Ok(*error_rhs(&xi, &n_ref, &mm, &x_ref)?.as_vec9())
    }

    fn commit(&mut self, t: f64, y: Vec9) -> Result<Vec9> {
        self.last_t = t;
        Ok(y)
    }
}

fn abort_on_singularity(t_last: f64, e: Error) -> Error {
    match e {
        Error::NearSingularity { .. } => Error::Aborted { t_last, source: Box::new(e) },
        other => other,
    }
}

/// Integrates the log-error ODE along `reference` with
/// `mismatch(t, xi, Xref, n_ref)` supplying `(n~, m~)`.
///
/// If the rotation error approaches the cut locus the run stops with
/// [`Error::Aborted`] carrying the last accepted time.
pub fn propagate_log_error<R, N, M>(
    xi0: &ErrorState,
    reference: &R,
    n_ref: N,
    mismatch: M,
    cfg: &IntegratorConfig,
    t_end: f64,
) -> Result<Vec<(f64, ErrorState)>>
where
    R: ReferenceTrajectory,
    N: FnMut(f64) -> AlgebraVector,
    M: FnMut(f64, &ErrorState, &GroupElement, &AlgebraVector) -> Result<MismatchPair>,
{
    if !(t_end > 0.0) {
        return Err(Error::Domain(format!("t_end must be positive, got {t_end}")));
    }
    let grid = sample_grid(t_end, cfg.sample_dt);
    let mut sys = LogErrorSystem { reference, n_ref, mismatch, last_t: grid[0] };
    let mut out = Vec::with_capacity(grid.len());
    integrate(&mut sys, *xi0.as_vec9(), &grid, cfg, |_, t, y| {
        out.push((t, AlgebraVector::from_vec9(*y)));
        Ok(())
    })
    .map_err(|e| abort_on_singularity(sys.last_t, e))?;
    Ok(out)
}

struct LinearSystem<F> {
    a: F,
}

impl<F: FnMut(f64) -> Mat9> OdeSystem<9> for LinearSystem<F> {
    fn rhs(&mut self, t: f64, y: &Vec9) -> Result<Vec9> {
        Ok((self.a)(t) * y)
    }
}

/// Integrates `xidot = A(t) xi` on the same grid.
pub fn propagate_linear<F>(xi0: &ErrorState, a: F, cfg: &IntegratorConfig, t_end: f64) -> Result<Vec<(f64, ErrorState)>>
where
    F: FnMut(f64) -> Mat9,
{
    if !(t_end > 0.0) {
        return Err(Error::Domain(format!("t_end must be positive, got {t_end}")));
    }
    let grid = sample_grid(t_end, cfg.sample_dt);
    let mut sys = LinearSystem { a };
    let mut out = Vec::with_capacity(grid.len());
    integrate(&mut sys, *xi0.as_vec9(), &grid, cfg, |_, t, y| {
        out.push((t, AlgebraVector::from_vec9(*y)));
        Ok(())
    })?;
    Ok(out)
}
