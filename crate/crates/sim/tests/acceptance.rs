//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use se23_core::dynamics::{c_matrix, classical_rhs, mixed_invariant_rhs, BodyInput, GravityModel, MismatchPair};
use se23_core::integrate::{propagate_classical, IntegratorConfig};
use se23_core::liegroup::{
    ad_matrix, hat3, se23_exp, se23_log, so3_exp, so3_right_jacobian_inv, vee, wedge, GroupElement, Mat9, Vec3, Vec9,
};
use se23_core::logerror::{
    a_c_matrix, error_rhs, gravity_mismatch_term, half_angle_factor, pointwise_bound, state_from_error, BoundInputs,
};
use se23_core::AlgebraVector;
use se23_sim::elements::elements_to_state;
use se23_sim::{run_bound, run_stabilize, run_validate, RunSummary, Scenario};

type Outcome = Result<(bool, String), String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn shipped_scenario() -> Result<Scenario, String> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios/molniya.scenario");
    Scenario::load(&path).map_err(|e| e.to_string())
}

fn rand_vec3(rng: &mut ChaCha8Rng, scale: f64) -> Vec3 {
    Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale
}

fn rand_rotvec(rng: &mut ChaCha8Rng, max_angle: f64) -> Vec3 {
    let axis = rand_vec3(rng, 1.0).normalize();
    axis * rng.gen_range(0.0..max_angle)
}

fn rand_orbit_state(rng: &mut ChaCha8Rng) -> GroupElement {
    let dir = rand_vec3(rng, 1.0).normalize();
    GroupElement::new(so3_exp(&rand_rotvec(rng, PI)), rand_vec3(rng, 7e3), dir * rng.gen_range(6.9e6..4.6e7))
}

fn within(x: f64, target: f64, rel: f64) -> bool {
    (x - target).abs() <= rel * target
}

fn field(v: Option<f64>, name: &str) -> Result<f64, String> {
    v.ok_or_else(|| format!("summary lacks {name}"))
}

fn validate_summary(sc: &Scenario) -> Result<(RunSummary, f64), String> {
    let start = Instant::now();
    let out = run_validate(sc).map_err(|e| e.to_string())?;
    Ok((out.summary, start.elapsed().as_secs_f64()))
}

fn criterion_1(sc: &Scenario) -> Outcome {
    let (s, secs) = validate_summary(sc)?;
    let rel = field(s.max_relative_residual_pct, "relative residual")?;
    let p = field(s.max_residual_position_m, "position residual")?;
    let v = field(s.max_residual_velocity_m_s, "velocity residual")?;
    let r = field(s.max_residual_attitude_rad, "attitude residual")?;
    let ok = rel <= 1.6e-6 && p < 4e-3 && v < 4e-6 && r < 1e-11 && secs < 60.0;
    Ok((ok, format!("rel {rel:.3e} %, p {p:.3e} m, v {v:.3e} m/s, R {r:.3e} rad, {secs:.2} s")))
}

fn criterion_2(sc: &Scenario) -> Outcome {
    let (s, _) = validate_summary(sc)?;
    let p = field(s.max_position_error_m, "position error")?;
    let v = field(s.max_velocity_error_m_s, "velocity error")?;
    let r_max = field(s.max_attitude_error_rad, "attitude error")?;
    let r_min = field(s.min_attitude_error_rad, "attitude error")?;
    let ok = (2.3e6..=2.5e6).contains(&p)
        && (1.9e3..=2.05e3).contains(&v)
        && (r_max - 0.05).abs() <= 1e-10
        && (r_min - 0.05).abs() <= 1e-10;
    Ok((ok, format!("xi_p {:.1} km, xi_v {:.4} km/s, |xi_R| in [{r_min:.12}, {r_max:.12}]", p / 1e3, v / 1e3)))
}

fn criterion_3(sc: &Scenario) -> Outcome {
    let s = run_bound(sc).map_err(|e| e.to_string())?.summary;
    let ratio = field(s.max_pointwise_ratio, "pointwise ratio")?;
    let actual = field(s.max_mismatch_m_s2, "mismatch")?;
    let bound = field(s.max_pointwise_bound_m_s2, "pointwise bound")?;
    let global = field(s.global_bound_m_s2, "global bound")?;
    let g_ratio = field(s.ratio_actual_to_global, "global ratio")?;
    let ok = ratio < 1.0
        && within(actual, 2.85, 0.05)
        && within(bound, 10.1, 0.05)
        && within(global, 11.6, 0.02)
        && (g_ratio - 0.25).abs() <= 0.02;
    Ok((
        ok,
        format!(
            "max ratio {ratio:.4}, actual {actual:.3}, pointwise {bound:.3}, global {global:.3} m/s^2, actual/global {g_ratio:.4}, r_min {:.0} m",
            s.perigee_radius_m
        ),
    ))
}

fn criterion_4(sc: &Scenario) -> Outcome {
    let s = run_stabilize(sc).map_err(|e| e.to_string())?.summary;
    let dev = field(s.feedforward_max_rel_deviation, "feedforward deviation")?;
    Ok((dev <= 1e-8, format!("max relative deviation from linear flow {dev:.3e}")))
}

fn criterion_5() -> Outcome {
    let c = c_matrix();
    let ac = a_c_matrix();
    let mut rng = ChaCha8Rng::seed_from_u64(501);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let xi = AlgebraVector::from_vec9(Vec9::from_fn(|_, _| rng.gen_range(-1e3..1e3)));
        let w = wedge(&xi);
        let bracket = vee(&(w * c - c * w)).map_err(|e| e.to_string())?;
        worst = worst.max((bracket - ac * xi).as_vec9().amax());
    }
    Ok((worst <= 1e-15, format!("max |(ad C)^v - A_C xi| = {worst:.1e} over 10^4 draws")))
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(601);
    let model = GravityModel::earth();
    let mut notes = Vec::new();
    let mut ok = true;

    // Exp/Log round trips
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let xi = AlgebraVector::new(rand_vec3(&mut rng, 1e3), rand_vec3(&mut rng, 10.0), rand_rotvec(&mut rng, 3.0));
        let back = se23_log(&se23_exp(&xi)).map_err(|e| e.to_string())?;
        worst = worst.max((back - xi).norm() / xi.norm().max(1.0));
        let x = GroupElement::new(so3_exp(&rand_rotvec(&mut rng, 3.0)), rand_vec3(&mut rng, 10.0), rand_vec3(&mut rng, 1e3));
        let again = se23_exp(&se23_log(&x).map_err(|e| e.to_string())?);
        worst = worst.max((again.to_matrix() - x.to_matrix()).amax() / x.pos.norm().max(1.0));
    }
    ok &= worst <= 1e-9;
    notes.push(format!("exp/log {worst:.1e}"));

    // Ad of Exp against the matrix exponential of ad
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let xi = AlgebraVector::new(rand_vec3(&mut rng, 1.0), rand_vec3(&mut rng, 1.0), rand_rotvec(&mut rng, 3.0));
        let lhs = se23_exp(&xi).adjoint();
        let rhs: Mat9 = ad_matrix(&xi).exp();
        worst = worst.max((lhs - rhs).amax() / rhs.amax().max(1.0));
    }
    ok &= worst <= 1e-10;
    notes.push(format!("Ad=expm(ad) {worst:.1e}"));

    // mixed-invariant against classical right-hand side
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let x = rand_orbit_state(&mut rng);
        let u = BodyInput::new(rand_vec3(&mut rng, 0.01), rand_vec3(&mut rng, 0.01));
        let mixed = mixed_invariant_rhs(&x, &u, &model).map_err(|e| e.to_string())?;
        let classical = classical_rhs(&x, &u, &model).map_err(|e| e.to_string())?.to_matrix();
        worst = worst.max((mixed - classical).amax() / x.vel.norm().max(1.0));
    }
    ok &= worst <= 1e-12;
    notes.push(format!("mixed=classical {worst:.1e}"));

    // gravity term lives in the velocity slot, and the pointwise bound
    // dominates it with d <= |xi_p|
    let mut slot_ok = true;
    let (mut max_ratio, mut max_d_ratio) = (0.0f64, 0.0f64);
    let mut strict = true;
    let mut pairs = 0;
    while pairs < 10_000 {
        let x_ref = rand_orbit_state(&mut rng);
        let r = x_ref.pos.norm();
        let xi = AlgebraVector::new(
            rand_vec3(&mut rng, 0.55 * r),
            rand_vec3(&mut rng, 1e3),
            rand_rotvec(&mut rng, 3.0),
        );
        if xi.p().norm() >= 0.95 * r {
            continue;
        }
        pairs += 1;
        let x = state_from_error(&x_ref, &xi);
        let term = gravity_mismatch_term(&xi, &x_ref, &x.pos, &model).map_err(|e| e.to_string())?;
        slot_ok &= term.p() == Vec3::zeros() && term.r() == Vec3::zeros();
        let d = (x_ref.pos - x.pos).norm();
        max_d_ratio = max_d_ratio.max(d / xi.p().norm());
        let bound = pointwise_bound(&BoundInputs { r, xi_p_norm: xi.p().norm(), theta: xi.r().norm(), mu: model.mu() })
            .map_err(|e| e.to_string())?;
        strict &= term.norm() < bound;
        max_ratio = max_ratio.max(term.norm() / bound);
    }
    ok &= slot_ok && strict && max_d_ratio <= 1.0 + 1e-12;
    notes.push(format!("velocity-slot {}", if slot_ok { "exact" } else { "VIOLATED" }));
    notes.push(format!("dominance max {max_ratio:.3}"));
    notes.push(format!("d/|xi_p| max {max_d_ratio:.12}"));

    // inverse right Jacobian norm on a theta grid
    let mut worst = 0.0f64;
    for k in 1..=100 {
        let theta = PI * k as f64 / 101.0;
        let w = rand_vec3(&mut rng, 1.0).normalize() * theta;
        let m = so3_right_jacobian_inv(&w).map_err(|e| e.to_string())?;
        let norm = m.singular_values().max();
        worst = worst.max(norm / half_angle_factor(theta));
    }
    ok &= worst <= 1.0 + 1e-12;
    notes.push(format!("|Jr^-1|/bound max {worst:.12}"));

    Ok((ok, notes.join(", ")))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(701);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let xi = AlgebraVector::new(rand_vec3(&mut rng, 1e4), rand_vec3(&mut rng, 10.0), rand_rotvec(&mut rng, 2.0));
        let a = rand_vec3(&mut rng, 0.01);
        let w = rand_vec3(&mut rng, 1e-3);
        let n_ref = BodyInput::new(a, w).to_algebra();
        let x_ref = rand_orbit_state(&mut rng);
        let out = error_rhs(&xi, &n_ref, &MismatchPair::zero(), &x_ref).map_err(|e| e.to_string())?;
        let wx = hat3(&w);
        let expected = AlgebraVector::new(-wx * xi.p() + xi.v(), -wx * xi.v() - hat3(&a) * xi.r(), -wx * xi.r());
        worst = worst.max((out - expected).norm() / expected.norm().max(1.0));
    }
    Ok((worst <= 1e-12, format!("max relative block deviation {worst:.1e}")))
}

fn criterion_8(sc: &Scenario) -> Outcome {
    let model = sc.model().map_err(|e| e.to_string())?;
    let (p, v) = elements_to_state(&sc.orbit, model.mu()).map_err(|e| e.to_string())?;
    let x0 = GroupElement::new(so3_exp(&Vec3::zeros()), v, p);
    let cfg = IntegratorConfig::default();
    let out = propagate_classical(&x0, |_| BodyInput::default(), &model, &cfg, 2.0 * sc.orbit_period_s())
        .map_err(|e| e.to_string())?;
    let energy = |x: &GroupElement| 0.5 * x.vel.norm_squared() - model.mu() / x.pos.norm();
    let e0 = energy(&x0);
    let h0 = x0.pos.cross(&x0.vel);
    let (mut de, mut dh) = (0.0f64, 0.0f64);
    for s in &out {
        de = de.max(((energy(&s.x) - e0) / e0).abs());
        dh = dh.max((s.x.pos.cross(&s.x.vel) - h0).norm() / h0.norm());
    }
    Ok((de <= 1e-7 && dh <= 1e-7, format!("energy drift {de:.2e}, angular momentum drift {dh:.2e}")))
}

fn main() {
    let sc = match shipped_scenario() {
        Ok(sc) => sc,
        Err(e) => {
            println!("FAIL  could not load the shipped scenario: {e}");
            std::process::exit(1);
        }
    };
    let criteria: Vec<Criterion> = vec![
        ("1 validation agreement", Box::new(|| criterion_1(&sc))),
        ("2 error growth magnitudes", Box::new(|| criterion_2(&sc))),
        ("3 gravity bound", Box::new(|| criterion_3(&sc))),
        ("4 exact cancellation", Box::new(|| criterion_4(&sc))),
        ("5 bracket identity", Box::new(criterion_5)),
        ("6 property suites", Box::new(criterion_6)),
        ("7 log-linear block structure", Box::new(criterion_7)),
        ("8 conservation", Box::new(|| criterion_8(&sc))),
    ];
    let mut failures = 0;
    for (name, check) in &criteria {
        let (passed, detail) = match check() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !passed {
            failures += 1;
        }
        println!("{}  criterion {name}: {detail}", if passed { "PASS" } else { "FAIL" });
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
