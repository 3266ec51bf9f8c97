use proptest::prelude::*;

use se23_core::control::u1_dynamic_inversion;
use se23_core::dynamics::{mismatch, GravityModel};
use se23_core::liegroup::{
    ad_matrix, jl, jl_inv, jr_inv, se23_exp, se23_log, so3_exp, so3_left_jacobian, GroupElement, Mat9, Vec3,
};
use se23_core::logerror::{gravity_mismatch_term, log_error, pointwise_bound, state_from_error, BoundInputs};
use se23_core::AlgebraVector;

fn vec3(scale: f64) -> impl Strategy<Value = Vec3> {
    [-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64].prop_map(move |[x, y, z]| Vec3::new(x, y, z) * scale)
}

fn rotvec(max_angle: f64) -> impl Strategy<Value = Vec3> {
    (vec3(1.0), 0.0..max_angle).prop_filter_map("degenerate axis", |(u, th)| {
        let n = u.norm();
        (n > 1e-3).then(|| u / n * th)
    })
}

fn algebra(p: f64, v: f64, angle: f64) -> impl Strategy<Value = AlgebraVector> {
    (vec3(p), vec3(v), rotvec(angle)).prop_map(|(p, v, r)| AlgebraVector::new(p, v, r))
}

fn orbit_state() -> impl Strategy<Value = GroupElement> {
    (rotvec(3.1), vec3(7e3), vec3(1.0), 6.9e6..4.6e7f64).prop_filter_map("degenerate direction", |(r, v, d, rad)| {
        let n = d.norm();
        (n > 1e-3).then(|| GroupElement::new(so3_exp(&r), v, d / n * rad))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn log_inverts_exp(xi in algebra(1e3, 10.0, 3.0)) {
        let back = se23_log(&se23_exp(&xi)).unwrap();
        prop_assert!((back - xi).norm() <= 1e-9 * xi.norm().max(1.0));
    }

    #[test]
    fn adjoint_of_exp_is_expm_of_ad(xi in algebra(2.0, 2.0, 3.0)) {
        let lhs = se23_exp(&xi).adjoint();
        let rhs: Mat9 = ad_matrix(&xi).exp();
        prop_assert!((lhs - rhs).amax() <= 1e-10 * rhs.amax().max(1.0));
    }

    #[test]
    fn adjoint_is_a_homomorphism(a in algebra(10.0, 1.0, 3.0), b in algebra(10.0, 1.0, 3.0)) {
        let (x, y) = (se23_exp(&a), se23_exp(&b));
        let lhs = x.compose(&y).adjoint();
        let rhs = x.adjoint() * y.adjoint();
        prop_assert!((lhs - rhs).amax() <= 1e-11 * rhs.amax().max(1.0));
    }

    #[test]
    fn jacobian_inverses_relate_through_adjoint(xi in algebra(10.0, 1.0, 2.5)) {
        let lhs = jl_inv(&xi).unwrap() * se23_exp(&xi).adjoint();
        let rhs = jr_inv(&xi).unwrap();
        prop_assert!((lhs - rhs).amax() <= 1e-9 * rhs.amax().max(1.0));
        let id = jl(&xi).unwrap() * jl_inv(&xi).unwrap();
        prop_assert!((id - Mat9::identity()).amax() <= 1e-9);
    }

    #[test]
    fn state_from_error_inverts_log_error(x_ref in orbit_state(), xi in algebra(1e5, 10.0, 2.5)) {
        let x = state_from_error(&x_ref, &xi);
        let back = log_error(&x, &x_ref).unwrap();
        prop_assert!((back.r() - xi.r()).norm() <= 1e-9);
        prop_assert!((back.p() - xi.p()).norm() <= 1e-9 * x_ref.pos.norm());
    }

    #[test]
    fn separation_never_exceeds_position_error(x_ref in orbit_state(), xi in algebra(1e6, 10.0, 3.0)) {
        let x = state_from_error(&x_ref, &xi);
        let d = (x_ref.pos - x.pos).norm();
        prop_assert!(d <= xi.p().norm() * (1.0 + 1e-12) + 1e-6);
        prop_assert!(so3_left_jacobian(&xi.r()).singular_values().max() <= 1.0 + 1e-12);
    }

    #[test]
    fn pointwise_bound_dominates_mismatch(x_ref in orbit_state(), frac in 0.0..0.9f64, dir in vec3(1.0), v in vec3(1e3), r in rotvec(3.0)) {
        prop_assume!(dir.norm() > 1e-3);
        let model = GravityModel::earth();
        let rad = x_ref.pos.norm();
        let xi = AlgebraVector::new(dir / dir.norm() * frac * rad, v, r);
        let x = state_from_error(&x_ref, &xi);
        let actual = gravity_mismatch_term(&xi, &x_ref, &x.pos, &model).unwrap().norm();
        let bound = pointwise_bound(&BoundInputs { r: rad, xi_p_norm: xi.p().norm(), theta: xi.r().norm(), mu: model.mu() }).unwrap();
        prop_assert!(actual <= bound);
    }

    #[test]
    fn dynamic_inversion_cancels_gravity_channel(x_ref in orbit_state(), xi in algebra(1e6, 100.0, 2.5)) {
        let model = GravityModel::earth();
        let x = state_from_error(&x_ref, &xi);
        let u1 = u1_dynamic_inversion(&x, &x_ref, &model).unwrap();
        let mm = mismatch(&AlgebraVector::zeros(), &AlgebraVector::zeros(), &x_ref.pos, &x.pos, &model).unwrap();
        let control = jl_inv(&xi).unwrap() * u1;
        let gravity = jr_inv(&xi).unwrap() * (x_ref.inverse().adjoint() * mm.m_tilde);
        prop_assert!((control + gravity).norm() <= 1e-11 * gravity.norm().max(1e-6));
    }
}
