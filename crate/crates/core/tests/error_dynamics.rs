use se23_core::dynamics::{mismatch, BodyInput, GravityModel};
use se23_core::integrate::{propagate_classical, IntegratorConfig, Method};
use se23_core::liegroup::{so3_exp, GroupElement, Vec3};
use se23_core::logerror::{error_rhs, log_error};

fn finite_difference_check(chief: GroupElement, deputy: GroupElement, u_ref: BodyInput, u: BodyInput) {
    let model = GravityModel::earth();
    let h = 0.25;
    let cfg = IntegratorConfig { method: Method::Rk4, fixed_dt: h / 8.0, sample_dt: h, ..IntegratorConfig::default() };
    let c = propagate_classical(&chief, |_| u_ref, &model, &cfg, 2.0 * h).unwrap();
    let d = propagate_classical(&deputy, |_| u, &model, &cfg, 2.0 * h).unwrap();
    assert_eq!(c.len(), 3);
    let xi = |k: usize| log_error(&d[k].x, &c[k].x).unwrap();
    let fd = (xi(2) - xi(0)) * (0.5 / h);
    let mm = mismatch(&u_ref.to_algebra(), &u.to_algebra(), &c[1].x.pos, &d[1].x.pos, &model).unwrap();
    let rhs = error_rhs(&xi(1), &u_ref.to_algebra(), &mm, &c[1].x).unwrap();
    let err = fd - rhs;
    assert!(err.norm() <= 1e-6 * rhs.norm(), "fd {fd:?}\nrhs {rhs:?}");
}

#[test]
fn error_rhs_matches_differentiated_truth_while_coasting() {
    let chief = GroupElement::new(so3_exp(&Vec3::new(0.3, -0.2, 0.1)), Vec3::new(-1200.0, 7300.0, 900.0), Vec3::new(6.9e6, 4e5, -2e5));
    let deputy = GroupElement::new(
        chief.rot * so3_exp(&Vec3::new(0.05, 0.02, -0.04)),
        chief.vel + Vec3::new(2.0, -1.0, 0.5),
        chief.pos + Vec3::new(3e3, -1e3, 2e3),
    );
    let w = Vec3::new(2e-4, 1e-4, 1e-4);
    finite_difference_check(chief, deputy, BodyInput::new(Vec3::zeros(), w), BodyInput::new(Vec3::zeros(), w));
}

#[test]
fn error_rhs_matches_differentiated_truth_under_mismatched_inputs() {
    let chief = GroupElement::new(so3_exp(&Vec3::new(-0.4, 0.6, 1.2)), Vec3::new(3000.0, 4500.0, -2000.0), Vec3::new(-8e6, 3e6, 5e6));
    let deputy = GroupElement::new(
        chief.rot * so3_exp(&Vec3::new(0.4, -0.7, 0.9)),
        chief.vel + Vec3::new(-40.0, 15.0, 25.0),
        chief.pos + Vec3::new(-5e4, 8e4, 3e4),
    );
    let u_ref = BodyInput::new(Vec3::new(0.02, -0.01, 0.005), Vec3::new(1e-3, -2e-3, 5e-4));
    let u = BodyInput::new(Vec3::new(-0.01, 0.03, 0.0), Vec3::new(-3e-3, 1e-3, 2e-3));
    finite_difference_check(chief, deputy, u_ref, u);
}
