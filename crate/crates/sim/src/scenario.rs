//! Scenario files: a TOML document with SI units spelled out in key names.

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use se23_core::dynamics::{GravityModel, ORIGIN_GUARD_M};
use se23_core::integrate::{IntegratorConfig, Method};
use se23_core::{AlgebraVector, Vec3};

use crate::elements::OrbitElements;
use crate::error::{Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Validate,
    Bound,
    Stabilize,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Validate => "validate",
            Mode::Bound => "bound",
            Mode::Stabilize => "stabilize",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThrustKind {
    None,
    Constant,
    Sinusoidal,
}

/// Chief body-frame thrust acceleration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThrustProfile {
    #[serde(rename = "type")]
    pub kind: ThrustKind,
    pub max_accel_m_s2: f64,
    pub period_s: f64,
    pub phase_rad: f64,
    pub axis: [f64; 3],
}

impl ThrustProfile {
    pub fn accel(&self, t: f64) -> Vec3 {
        let axis = Vec3::from(self.axis);
        match self.kind {
            ThrustKind::None => Vec3::zeros(),
            ThrustKind::Constant => axis * self.max_accel_m_s2,
            ThrustKind::Sinusoidal => axis * (self.max_accel_m_s2 * (2.0 * PI * t / self.period_s + self.phase_rad).sin()),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.kind != ThrustKind::Sinusoidal || self.max_accel_m_s2 == 0.0
    }
}

/// Deputy minus chief at `t = 0`: world-frame position and velocity offsets,
/// and the rotation vector `Log(R_deputy^T R_chief)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialOffsets {
    pub position_m: [f64; 3],
    pub velocity_m_s: [f64; 3],
    pub attitude_rad: [f64; 3],
    /// Keep each offset's magnitude but draw its direction from `seed`.
    #[serde(default)]
    pub randomize_directions: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSettings {
    /// "adaptive45" or "rk4"
    pub method: String,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub fixed_dt_s: f64,
    pub max_dt_s: f64,
    pub min_dt_s: f64,
    pub sample_dt_s: f64,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        let c = IntegratorConfig::default();
        IntegratorSettings {
            method: "adaptive45".into(),
            rel_tol: c.rel_tol,
            abs_tol: c.abs_tol,
            fixed_dt_s: c.fixed_dt,
            max_dt_s: c.max_dt,
            min_dt_s: c.min_dt,
            sample_dt_s: c.sample_dt,
        }
    }
}

impl IntegratorSettings {
    pub fn config(&self) -> Result<IntegratorConfig> {
        let method = match self.method.as_str() {
            "adaptive45" => Method::Adaptive45,
            "rk4" => Method::Rk4,
            other => return Err(SimError::Config(format!("unknown integrator method '{other}'"))),
        };
        let cfg = IntegratorConfig {
            method,
            fixed_dt: self.fixed_dt_s,
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_dt: self.max_dt_s,
            min_dt: self.min_dt_s,
            sample_dt: self.sample_dt_s,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlSettings {
    pub decay_rate_per_s: f64,
}

impl Default for ControlSettings {
    fn default() -> Self {
        ControlSettings { decay_rate_per_s: se23_core::control::DEFAULT_DECAY_RATE }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub mode: Mode,
    pub seed: u64,
    pub duration_orbits: f64,
    pub mu_m3_s2: f64,
    pub omega_ref_rad_s: [f64; 3],
    pub omega_actual_rad_s: [f64; 3],
    pub orbit: OrbitElements,
    pub chief_thrust: ThrustProfile,
    pub initial_offsets: InitialOffsets,
    #[serde(default)]
    pub integrator: IntegratorSettings,
    #[serde(default)]
    pub control: ControlSettings,
}

/// Thrust period of the shipped Molniya scenario, s.
pub const MOLNIYA_THRUST_PERIOD_S: f64 = 3265.0;

impl Scenario {
    /// The Molniya formation: chief thrusting sinusoidally along body x,
    /// deputy coasting with 219 m, 0.22 m/s and 0.05 rad initial offsets.
    pub fn molniya() -> Self {
        let d = 1.0 / 3f64.sqrt();
        Scenario {
            mode: Mode::Validate,
            seed: 1,
            duration_orbits: 2.0,
            mu_m3_s2: se23_core::dynamics::EARTH_MU,
            omega_ref_rad_s: [2e-4, 1e-4, 1e-4],
            omega_actual_rad_s: [2e-4, 1e-4, 1e-4],
            orbit: OrbitElements {
                semi_major_axis_m: 26_521_000.0,
                eccentricity: 0.74,
                inclination_rad: 63.4f64.to_radians(),
                raan_rad: 0.0,
                arg_perigee_rad: 270f64.to_radians(),
                true_anomaly_rad: 0.0,
            },
            chief_thrust: ThrustProfile {
                kind: ThrustKind::Sinusoidal,
                max_accel_m_s2: 0.002,
                period_s: MOLNIYA_THRUST_PERIOD_S,
                phase_rad: 0.0,
                axis: [1.0, 0.0, 0.0],
            },
            initial_offsets: InitialOffsets {
                position_m: [219.0 * d; 3],
                velocity_m_s: [0.22 * d; 3],
                attitude_rad: [0.05 * d; 3],
                randomize_directions: false,
            },
            integrator: IntegratorSettings::default(),
            control: ControlSettings::default(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let sc: Scenario = toml::from_str(text).map_err(|e| SimError::Parse(e.to_string()))?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            SimError::Parse(m) => SimError::Parse(format!("{}: {m}", path.display())),
            SimError::Config(m) => SimError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| SimError::Parse(e.to_string()))
    }

    pub fn model(&self) -> Result<GravityModel> {
        Ok(GravityModel::new(self.mu_m3_s2)?)
    }

    pub fn orbit_period_s(&self) -> f64 {
        2.0 * PI * (self.orbit.semi_major_axis_m.powi(3) / self.mu_m3_s2).sqrt()
    }

    pub fn duration_s(&self) -> f64 {
        self.duration_orbits * self.orbit_period_s()
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |m: String| Err(SimError::Config(m));
        if !(self.mu_m3_s2 > 0.0) || !self.mu_m3_s2.is_finite() {
            return cfg(format!("mu_m3_s2 must be positive, got {}", self.mu_m3_s2));
        }
        let e = self.orbit.eccentricity;
        if !(0.0..1.0).contains(&e) {
            return cfg(format!("eccentricity must be in [0, 1), got {e}"));
        }
        if !(self.orbit.semi_major_axis_m > 0.0) {
            return cfg("semi_major_axis_m must be positive".into());
        }
        let rp = self.orbit.perigee_radius();
        if rp <= ORIGIN_GUARD_M {
            return cfg(format!("perigee radius {rp} m is inside the origin guard"));
        }
        if Vec3::from(self.initial_offsets.position_m).norm() >= rp {
            return cfg("position offset must be smaller than the perigee radius".into());
        }
        if Vec3::from(self.initial_offsets.attitude_rad).norm() >= PI - 1e-6 {
            return cfg("attitude offset must be below pi".into());
        }
        if !(self.duration_orbits > 0.0) || !self.duration_orbits.is_finite() {
            return cfg(format!("duration_orbits must be positive, got {}", self.duration_orbits));
        }
        let th = &self.chief_thrust;
        if !th.max_accel_m_s2.is_finite() || th.axis.iter().any(|x| !x.is_finite()) {
            return cfg("thrust parameters must be finite".into());
        }
        if th.kind == ThrustKind::Sinusoidal && !(th.period_s > 0.0) {
            return cfg(format!("sinusoidal thrust needs a positive period, got {}", th.period_s));
        }
        if !(self.control.decay_rate_per_s > 0.0) {
            return cfg("decay_rate_per_s must be positive".into());
        }
        self.integrator.config()?;
        Ok(())
    }

    /// Chief generalized input `n_ref(t) = (0, a(t), omega_ref)`.
    pub fn chief_input(&self, t: f64) -> AlgebraVector {
        AlgebraVector::new(Vec3::zeros(), self.chief_thrust.accel(t), Vec3::from(self.omega_ref_rad_s))
    }

    /// Coasting deputy input `(0, 0, omega_actual)`.
    pub fn deputy_coast_input(&self) -> AlgebraVector {
        AlgebraVector::new(Vec3::zeros(), Vec3::zeros(), Vec3::from(self.omega_actual_rad_s))
    }

    /// Offsets `(dp, dv, dtheta)` after optional seeded direction draws.
    pub fn offsets(&self) -> (Vec3, Vec3, Vec3) {
        let o = &self.initial_offsets;
        let (p, v, r) = (Vec3::from(o.position_m), Vec3::from(o.velocity_m_s), Vec3::from(o.attitude_rad));
        if !o.randomize_directions {
            return (p, v, r);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut dir = |m: f64| -> Vec3 {
            loop {
                let u = Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                let n = u.norm();
                if n > 1e-3 && n <= 1.0 {
                    return u * (m / n);
                }
            }
        };
        (dir(p.norm()), dir(v.norm()), dir(r.norm()))
    }
}
