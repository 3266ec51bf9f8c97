use std::path::PathBuf;

use se23_sim::scenario::ThrustKind;
use se23_sim::{run_bound, run_stabilize, run_validate, Mode, Scenario, SimError};

fn shipped(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn short(mut sc: Scenario) -> Scenario {
    sc.duration_orbits = 0.1;
    sc
}

#[test]
fn shipped_molniya_matches_builtin() {
    let sc = Scenario::load(&shipped("molniya.scenario")).unwrap();
    assert_eq!(sc, Scenario::molniya());
}

#[test]
fn shipped_stabilize_scenario_uses_constant_thrust() {
    let sc = Scenario::load(&shipped("stabilize.scenario")).unwrap();
    assert_eq!(sc.mode, Mode::Stabilize);
    assert_eq!(sc.chief_thrust.kind, ThrustKind::Constant);
}

#[test]
fn serialize_parse_serialize_is_byte_identical() {
    for sc in [Scenario::molniya(), Scenario::load(&shipped("stabilize.scenario")).unwrap()] {
        let a = sc.to_toml().unwrap();
        let back = Scenario::parse(&a).unwrap();
        assert_eq!(back, sc);
        assert_eq!(back.to_toml().unwrap(), a);
    }
}

#[test]
fn rejects_bad_scenarios() {
    let good = Scenario::molniya().to_toml().unwrap();
    let unknown = format!("{good}\nbogus_key = 1\n");
    assert!(matches!(Scenario::parse(&unknown), Err(SimError::Parse(_))));
    let hyperbolic = good.replace("eccentricity = 0.74", "eccentricity = 1.2");
    assert!(matches!(Scenario::parse(&hyperbolic), Err(SimError::Config(_))));
    let low = good.replace("semi_major_axis_m = 26521000.0", "semi_major_axis_m = 2.0");
    assert!(matches!(Scenario::parse(&low), Err(SimError::Config(_))));
    let method = good.replace("\"adaptive45\"", "\"euler\"");
    assert!(matches!(Scenario::parse(&method), Err(SimError::Config(_))));
    assert!(matches!(Scenario::load(&shipped("missing.scenario")), Err(SimError::Io { .. })));
}

#[test]
fn seeded_directions_keep_magnitudes() {
    let mut sc = Scenario::molniya();
    sc.initial_offsets.randomize_directions = true;
    let (p, v, r) = sc.offsets();
    assert!((p.norm() - 219.0).abs() < 1e-9);
    assert!((v.norm() - 0.22).abs() < 1e-12);
    assert!((r.norm() - 0.05).abs() < 1e-14);
    assert_eq!(sc.offsets(), (p, v, r));
    sc.seed = 2;
    assert_ne!(sc.offsets().0, p);
}

#[test]
fn runs_are_deterministic() {
    let sc = short(Scenario::molniya());
    let a = run_validate(&sc).unwrap();
    let b = run_validate(&sc).unwrap();
    assert_eq!(a.table.to_csv(), b.table.to_csv());
    assert_eq!(a.table.to_json(), b.table.to_json());
    assert_eq!(a.summary.to_json(), b.summary.to_json());
    let a = run_bound(&sc).unwrap();
    let b = run_bound(&sc).unwrap();
    assert_eq!(a.table.to_csv(), b.table.to_csv());
    assert_eq!(a.summary.to_json(), b.summary.to_json());
}

#[test]
fn summary_fields_are_non_negative() {
    let sc = short(Scenario::molniya());
    for s in [run_validate(&sc).unwrap().summary, run_bound(&sc).unwrap().summary] {
        let v: serde_json::Value = serde_json::from_str(&s.to_json()).unwrap();
        for (k, x) in v.as_object().unwrap() {
            if let Some(x) = x.as_f64() {
                assert!(x >= 0.0, "{k} = {x}");
            }
        }
        assert!(v.get("wall_time_s").is_none());
    }
}

#[test]
fn identical_spacecraft_give_zero_error() {
    let mut sc = short(Scenario::molniya());
    sc.chief_thrust.kind = ThrustKind::None;
    sc.initial_offsets.position_m = [0.0; 3];
    sc.initial_offsets.velocity_m_s = [0.0; 3];
    sc.initial_offsets.attitude_rad = [0.0; 3];

    let v = run_validate(&sc).unwrap().summary;
    let tol = sc.integrator.abs_tol;
    assert!(v.max_residual_position_m.unwrap() < tol);
    assert!(v.max_residual_velocity_m_s.unwrap() < tol);
    assert!(v.max_residual_attitude_rad.unwrap() < tol);

    let b = run_bound(&sc).unwrap();
    assert!(b.table.column("actual_mismatch_m_s2").unwrap().iter().all(|&x| x == 0.0));
    assert!(b.table.column("pointwise_bound_m_s2").unwrap().iter().all(|&x| x == 0.0));

    let s = run_stabilize(&sc).unwrap();
    assert!(s.table.column("closed_loop_norm").unwrap().iter().all(|&x| x == 0.0));
    assert!(s.summary.passed());
}

#[test]
fn constant_thrust_stabilize_decays_inside_envelope() {
    let sc = short(Scenario::load(&shipped("stabilize.scenario")).unwrap());
    let out = run_stabilize(&sc).unwrap();
    assert!(out.summary.envelope_constant.unwrap() >= 1.0);
    assert!(out.summary.passed(), "{:?}", out.summary.checks);
    let truth = out.table.column("closed_loop_norm").unwrap();
    let env = out.table.column("envelope").unwrap();
    assert!(truth.iter().zip(&env).all(|(n, e)| *n <= e * (1.0 + 1e-9) + 1e-6));
    assert!(truth.last().unwrap() < &(1e-3 * truth[0]));
}
