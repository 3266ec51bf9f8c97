//! The three experiment modes: dual-propagation validation, gravity-bound
//! verification and closed-loop stabilization.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use se23_core::control::{
    closed_loop_a, default_gain, envelope_constant, u1_dynamic_inversion, u2_stabilizing, apply_mismatch_generalized,
};
use se23_core::dynamics::{mismatch, GravityModel};
use se23_core::integrate::{propagate_formation, propagate_linear, propagate_log_error, FormationRun, IntegratorConfig};
use se23_core::liegroup::so3_exp;
use se23_core::logerror::{global_bound, gravity_mismatch_term, log_error, pointwise_bound, state_from_error, BoundInputs};
use se23_core::{AlgebraVector, GroupElement, Rotation};

use crate::elements::elements_to_state;
use crate::error::Result;
use crate::scenario::{Mode, Scenario};
use crate::table::Table;

/// Residual limits for agreement between classical and log-error propagation.
pub const RESIDUAL_POSITION_LIMIT_M: f64 = 4e-3;
pub const RESIDUAL_VELOCITY_LIMIT_M_S: f64 = 4e-6;
pub const RESIDUAL_ATTITUDE_LIMIT_RAD: f64 = 1e-11;
pub const RELATIVE_RESIDUAL_LIMIT_PCT: f64 = 1.6e-6;
/// Agreement of the truth model with the predicted linear error flow.
pub const FEEDFORWARD_LIMIT: f64 = 1e-8;
pub const CLOSED_LOOP_LIMIT: f64 = 1e-6;
/// Fraction of the initial error norm below which linear-prediction
/// deviations are measured in absolute rather than relative terms.
pub const RELATIVE_COMPARISON_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
}

impl Check {
    fn below(name: &str, value: f64, limit: f64) -> Self {
        Check { name: name.into(), value, limit, passed: value < limit }
    }

    fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Check { name: name.into(), value, limit, passed: value <= limit }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunSummary {
    pub mode: String,
    pub samples: usize,
    pub duration_s: f64,
    /// Smallest chief radius reached, m
    pub perigee_radius_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_position_error_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_velocity_error_m_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_attitude_error_rad: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_attitude_error_rad: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_residual_position_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_residual_velocity_m_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_residual_attitude_rad: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_relative_residual_pct: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_mismatch_m_s2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_pointwise_bound_m_s2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_pointwise_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub global_bound_m_s2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio_actual_to_global: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feedforward_max_rel_deviation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_loop_max_rel_deviation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay_rate_per_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub envelope_constant: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_error_norm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_error_norm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
    pub checks: Vec<Check>,
}

impl RunSummary {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Pretty JSON without the wall-clock field, so identical scenarios give
    /// identical bytes.
    pub fn to_json(&self) -> String {
        let mut s = self.clone();
        s.wall_time_s = None;
        let mut out = serde_json::to_string_pretty(&s).expect("summary serializes");
        out.push('\n');
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub summary: RunSummary,
    pub table: Table,
}

/// Initial chief and deputy states and the shared propagation settings.
#[derive(Debug, Clone)]
pub struct Setup {
    pub model: GravityModel,
    pub chief0: GroupElement,
    pub deputy0: GroupElement,
    pub xi0: AlgebraVector,
    pub cfg: IntegratorConfig,
    pub t_end: f64,
}

impl Setup {
    pub fn new(sc: &Scenario) -> Result<Self> {
        sc.validate()?;
        let model = sc.model()?;
        let (p, v) = elements_to_state(&sc.orbit, sc.mu_m3_s2)?;
        let chief0 = GroupElement::new(Rotation::identity(), v, p);
        let (dp, dv, dth) = sc.offsets();
        let deputy0 = GroupElement::new(chief0.rot * so3_exp(&(-dth)), v + dv, p + dp);
        let xi0 = log_error(&deputy0, &chief0)?;
        Ok(Setup { model, chief0, deputy0, xi0, cfg: sc.integrator.config()?, t_end: sc.duration_s() })
    }
}

fn slot_names(prefix: &str) -> Vec<String> {
    ["px", "py", "pz", "vx", "vy", "vz", "rx", "ry", "rz"]
        .iter()
        .map(|s| format!("{prefix}_{s}"))
        .collect()
}

fn min_chief_radius(run: &FormationRun) -> f64 {
    run.reference
        .knots()
        .iter()
        .map(|k| k.x.pos.norm())
        .chain(run.samples.iter().map(|s| s.chief.pos.norm()))
        .fold(f64::INFINITY, f64::min)
}

fn coasting_formation(sc: &Scenario, setup: &Setup) -> Result<FormationRun> {
    let coast = sc.deputy_coast_input();
    Ok(propagate_formation(
        &setup.chief0,
        &setup.deputy0,
        |t| sc.chief_input(t),
        |_, _, _, _| Ok(coast),
        &setup.model,
        &setup.cfg,
        setup.t_end,
    )?)
}

fn base_summary(mode: Mode, samples: usize, setup: &Setup, perigee: f64) -> RunSummary {
    RunSummary {
        mode: mode.name().into(),
        samples,
        duration_s: setup.t_end,
        perigee_radius_m: perigee,
        ..Default::default()
    }
}

/// Classical propagation of both spacecraft against direct propagation of the
/// log-error ODE along the chief trajectory.
pub fn run_validate(sc: &Scenario) -> Result<RunOutput> {
    let start = Instant::now();
    let setup = Setup::new(sc)?;
    let run = coasting_formation(sc, &setup)?;
    let coast = sc.deputy_coast_input();
    let model = setup.model;
    let log = propagate_log_error(
        &setup.xi0,
        &run.reference,
        |t| sc.chief_input(t),
        |_, xi, x_ref, n_ref| {
            let x = state_from_error(x_ref, xi);
            mismatch(n_ref, &coast, &x_ref.pos, &x.pos, &model)
        },
        &setup.cfg,
        setup.t_end,
    )?;

    let mut columns = vec!["t_s".to_string()];
    columns.extend(slot_names("xi_classical"));
    columns.extend(slot_names("xi_log"));
    columns.extend(slot_names("delta"));
    let mut table = Table::new(columns);

    let (mut max_p, mut max_v, mut max_r, mut min_r) = (0.0f64, 0.0f64, 0.0f64, f64::INFINITY);
    let (mut res_p, mut res_v, mut res_r, mut rel) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (s, (t, xi_log)) in run.samples.iter().zip(&log) {
        debug_assert_eq!(s.t.to_bits(), t.to_bits());
        let xi = log_error(&s.deputy, &s.chief)?;
        let d = *xi_log - xi;
        max_p = max_p.max(xi.p().norm());
        max_v = max_v.max(xi.v().norm());
        max_r = max_r.max(xi.r().norm());
        min_r = min_r.min(xi.r().norm());
        res_p = res_p.max(d.p().norm());
        res_v = res_v.max(d.v().norm());
        res_r = res_r.max(d.r().norm());
        rel = rel.max(d.norm() / xi.norm().max(1e-12) * 100.0);
        let mut row = vec![*t];
        row.extend(xi.as_vec9().iter());
        row.extend(xi_log.as_vec9().iter());
        row.extend(d.as_vec9().iter());
        table.push(row);
    }

    let mut summary = base_summary(Mode::Validate, table.rows.len(), &setup, min_chief_radius(&run));
    summary.max_position_error_m = Some(max_p);
    summary.max_velocity_error_m_s = Some(max_v);
    summary.max_attitude_error_rad = Some(max_r);
    summary.min_attitude_error_rad = Some(min_r);
    summary.max_residual_position_m = Some(res_p);
    summary.max_residual_velocity_m_s = Some(res_v);
    summary.max_residual_attitude_rad = Some(res_r);
    summary.max_relative_residual_pct = Some(rel);
    summary.checks = vec![
        Check::below("residual_position_m", res_p, RESIDUAL_POSITION_LIMIT_M),
        Check::below("residual_velocity_m_s", res_v, RESIDUAL_VELOCITY_LIMIT_M_S),
        Check::below("residual_attitude_rad", res_r, RESIDUAL_ATTITUDE_LIMIT_RAD),
        Check::at_most("relative_residual_pct", rel, RELATIVE_RESIDUAL_LIMIT_PCT),
    ];
    summary.wall_time_s = Some(start.elapsed().as_secs_f64());
    Ok(RunOutput { summary, table })
}

/// Actual gravity mismatch against its pointwise and global bounds along the
/// classical trajectory.
pub fn run_bound(sc: &Scenario) -> Result<RunOutput> {
    let start = Instant::now();
    let setup = Setup::new(sc)?;
    let run = coasting_formation(sc, &setup)?;
    let mu = setup.model.mu();
    let mut table = Table::new(["t_s", "actual_mismatch_m_s2", "pointwise_bound_m_s2", "ratio"]);
    let (mut max_actual, mut max_bound, mut max_ratio) = (0.0f64, 0.0f64, 0.0f64);
    let (mut xi_p_max, mut theta_max) = (0.0f64, 0.0f64);
    for s in &run.samples {
        let xi = log_error(&s.deputy, &s.chief)?;
        let actual = gravity_mismatch_term(&xi, &s.chief, &s.deputy.pos, &setup.model)?.norm();
        let bound = pointwise_bound(&BoundInputs {
            r: s.chief.pos.norm(),
            xi_p_norm: xi.p().norm(),
            theta: xi.r().norm(),
            mu,
        })?;
        let ratio = if actual == 0.0 { 0.0 } else { actual / bound };
        max_actual = max_actual.max(actual);
        max_bound = max_bound.max(bound);
        max_ratio = max_ratio.max(ratio);
        xi_p_max = xi_p_max.max(xi.p().norm());
        theta_max = theta_max.max(xi.r().norm());
        table.push(vec![s.t, actual, bound, ratio]);
    }
    let r_min = min_chief_radius(&run);
    let global = global_bound(r_min, xi_p_max, theta_max, mu)?;
    let ratio_global = if max_actual == 0.0 { 0.0 } else { max_actual / global };

    let mut summary = base_summary(Mode::Bound, table.rows.len(), &setup, r_min);
    summary.max_position_error_m = Some(xi_p_max);
    summary.max_attitude_error_rad = Some(theta_max);
    summary.max_mismatch_m_s2 = Some(max_actual);
    summary.max_pointwise_bound_m_s2 = Some(max_bound);
    summary.max_pointwise_ratio = Some(max_ratio);
    summary.global_bound_m_s2 = Some(global);
    summary.ratio_actual_to_global = Some(ratio_global);
    summary.checks = vec![
        Check::below("max_pointwise_ratio", max_ratio, 1.0),
        Check::at_most("max_actual_over_global", ratio_global, 1.0),
    ];
    summary.wall_time_s = Some(start.elapsed().as_secs_f64());
    Ok(RunOutput { summary, table })
}

/// Largest `|a - b| / |b|` over paired samples, with `|b|` floored at
/// `floor`. Below the floor the truth error sits at the resolution of the
/// absolute states and a relative comparison carries no information.
fn max_rel_deviation(truth: &[AlgebraVector], linear: &[AlgebraVector], floor: f64) -> f64 {
    truth
        .iter()
        .zip(linear)
        .map(|(a, b)| (*a - *b).norm() / b.norm().max(floor))
        .fold(0.0, f64::max)
}

/// Gravity cancellation alone, then cancellation plus stabilizing feedback,
/// each compared against the predicted linear error flow.
pub fn run_stabilize(sc: &Scenario) -> Result<RunOutput> {
    let start = Instant::now();
    let setup = Setup::new(sc)?;
    let model = setup.model;
    let lambda = sc.control.decay_rate_per_s;
    let n0 = sc.chief_input(0.0);
    let gain = default_gain(&n0, lambda)?;
    let floor = RELATIVE_COMPARISON_FLOOR * setup.xi0.norm();
    let noise = 1e-9 * setup.xi0.norm();

    let feedforward = propagate_formation(
        &setup.chief0,
        &setup.deputy0,
        |t| sc.chief_input(t),
        |_, x, x_ref, n_ref| Ok(apply_mismatch_generalized(n_ref, &u1_dynamic_inversion(x, x_ref, &model)?)),
        &model,
        &setup.cfg,
        setup.t_end,
    )?;
    let ff_truth: Vec<AlgebraVector> =
        feedforward.samples.iter().map(|s| log_error(&s.deputy, &s.chief)).collect::<std::result::Result<_, _>>()?;
    let ff_linear: Vec<AlgebraVector> =
        propagate_linear(&setup.xi0, |t| closed_loop_a(&sc.chief_input(t)), &setup.cfg, setup.t_end)?
            .into_iter()
            .map(|(_, xi)| xi)
            .collect();
    let ff_dev = max_rel_deviation(&ff_truth, &ff_linear, floor);

    let closed = propagate_formation(
        &setup.chief0,
        &setup.deputy0,
        |t| sc.chief_input(t),
        |_, x, x_ref, n_ref| {
            let xi = log_error(x, x_ref)?;
            let u = u1_dynamic_inversion(x, x_ref, &model)? + u2_stabilizing(&xi, &gain)?;
            Ok(apply_mismatch_generalized(n_ref, &u))
        },
        &model,
        &setup.cfg,
        setup.t_end,
    )?;
    let cl_truth: Vec<AlgebraVector> =
        closed.samples.iter().map(|s| log_error(&s.deputy, &s.chief)).collect::<std::result::Result<_, _>>()?;
    let cl_linear: Vec<AlgebraVector> =
        propagate_linear(&setup.xi0, |t| gain.closed_loop(&sc.chief_input(t)), &setup.cfg, setup.t_end)?
            .into_iter()
            .map(|(_, xi)| xi)
            .collect();
    let cl_dev = max_rel_deviation(&cl_truth, &cl_linear, floor);

    let constant_input = sc.chief_thrust.is_constant();
    let c = if constant_input { Some(envelope_constant(&gain.closed_loop(&n0), lambda)?) } else { None };
    let xi0_norm = setup.xi0.norm();

    let mut table = Table::new([
        "t_s",
        "feedforward_norm",
        "feedforward_linear_norm",
        "closed_loop_norm",
        "closed_loop_linear_norm",
        "envelope",
    ]);
    let mut envelope_ok = true;
    for (i, s) in closed.samples.iter().enumerate() {
        let env = c.map_or(f64::NAN, |c| c * xi0_norm * (-0.5 * lambda * s.t).exp());
        let n = cl_truth[i].norm();
        if c.is_some() && n > env * (1.0 + 1e-9) + noise {
            envelope_ok = false;
        }
        table.push(vec![s.t, ff_truth[i].norm(), ff_linear[i].norm(), n, cl_linear[i].norm(), env]);
    }

    let perigee = min_chief_radius(&closed);
    let mut summary = base_summary(Mode::Stabilize, table.rows.len(), &setup, perigee);
    summary.feedforward_max_rel_deviation = Some(ff_dev);
    summary.closed_loop_max_rel_deviation = Some(cl_dev);
    summary.decay_rate_per_s = Some(lambda);
    summary.envelope_constant = c;
    summary.initial_error_norm = Some(xi0_norm);
    summary.final_error_norm = cl_truth.last().map(|x| x.norm());
    summary.checks = vec![
        Check::at_most("feedforward_rel_deviation", ff_dev, FEEDFORWARD_LIMIT),
        Check::at_most("closed_loop_rel_deviation", cl_dev, CLOSED_LOOP_LIMIT),
    ];
    if c.is_some() {
        summary.checks.push(Check {
            name: "envelope_decay".into(),
            value: if envelope_ok { 1.0 } else { 0.0 },
            limit: 1.0,
            passed: envelope_ok,
        });
    }
    summary.wall_time_s = Some(start.elapsed().as_secs_f64());
    Ok(RunOutput { summary, table })
}

pub fn run_mode(mode: Mode, sc: &Scenario) -> Result<RunOutput> {
    let wrap = |e| crate::error::SimError::Run { mode: mode.name(), source: Box::new(e) };
    match mode {
        Mode::Validate => run_validate(sc),
        Mode::Bound => run_bound(sc),
        Mode::Stabilize => run_stabilize(sc),
    }
    .map_err(wrap)
}
