//! Keplerian elements and their conversion to and from inertial Cartesian state.

use std::f64::consts::PI;

use nalgebra::Rotation3;
use serde::{Deserialize, Serialize};

use se23_core::Vec3;

use crate::error::{Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitElements {
    pub semi_major_axis_m: f64,
    pub eccentricity: f64,
    pub inclination_rad: f64,
    pub raan_rad: f64,
    pub arg_perigee_rad: f64,
    pub true_anomaly_rad: f64,
}

impl OrbitElements {
    pub fn perigee_radius(&self) -> f64 {
        self.semi_major_axis_m * (1.0 - self.eccentricity)
    }

    pub fn apogee_radius(&self) -> f64 {
        self.semi_major_axis_m * (1.0 + self.eccentricity)
    }
}

/// Perifocal-to-inertial rotation `Rz(raan) Rx(i) Rz(argp)`.
fn perifocal_frame(el: &OrbitElements) -> Rotation3<f64> {
    Rotation3::from_axis_angle(&Vec3::z_axis(), el.raan_rad)
        * Rotation3::from_axis_angle(&Vec3::x_axis(), el.inclination_rad)
        * Rotation3::from_axis_angle(&Vec3::z_axis(), el.arg_perigee_rad)
}

pub fn elements_to_state(el: &OrbitElements, mu: f64) -> Result<(Vec3, Vec3)> {
    let (a, e, nu) = (el.semi_major_axis_m, el.eccentricity, el.true_anomaly_rad);
    if !(0.0..1.0).contains(&e) {
        return Err(SimError::Core(se23_core::Error::Domain(format!(
            "eccentricity must be in [0, 1), got {e}"
        ))));
    }
    if !(a > 0.0) || !(mu > 0.0) {
        return Err(SimError::Core(se23_core::Error::Domain(
            "semi-major axis and mu must be positive".into(),
        )));
    }
    let slr = a * (1.0 - e * e);
    let r = slr / (1.0 + e * nu.cos());
    let p_pf = Vec3::new(r * nu.cos(), r * nu.sin(), 0.0);
    let v_pf = Vec3::new(-nu.sin(), e + nu.cos(), 0.0) * (mu / slr).sqrt();
    let q = perifocal_frame(el);
    Ok((q * p_pf, q * v_pf))
}

fn wrap_2pi(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y >= 2.0 * PI {
        0.0
    } else {
        y
    }
}

/// Inverse conversion for bound elliptic, non-equatorial, non-circular orbits.
pub fn state_to_elements(p: &Vec3, v: &Vec3, mu: f64) -> Result<OrbitElements> {
    let r = p.norm();
    let h = p.cross(v);
    let ev = v.cross(&h) / mu - p / r;
    let e = ev.norm();
    let energy = 0.5 * v.norm_squared() - mu / r;
    if !(energy < 0.0) {
        return Err(SimError::Core(se23_core::Error::Domain("orbit is not bound".into())));
    }
    let a = -mu / (2.0 * energy);
    let i = (h.z / h.norm()).clamp(-1.0, 1.0).acos();
    let node = Vec3::z().cross(&h);
    let raan = wrap_2pi(node.y.atan2(node.x));
    let argp = {
        let c = node.dot(&ev) / (node.norm() * e);
        let w = c.clamp(-1.0, 1.0).acos();
        if ev.z < 0.0 {
            2.0 * PI - w
        } else {
            w
        }
    };
    let nu = {
        let c = ev.dot(p) / (e * r);
        let f = c.clamp(-1.0, 1.0).acos();
        if p.dot(v) < 0.0 {
            2.0 * PI - f
        } else {
            f
        }
    };
    Ok(OrbitElements {
        semi_major_axis_m: a,
        eccentricity: e,
        inclination_rad: i,
        raan_rad: raan,
        arg_perigee_rad: wrap_2pi(argp),
        true_anomaly_rad: wrap_2pi(nu),
    })
}
