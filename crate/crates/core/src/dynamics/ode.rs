//! The 13-state rigid-body equations of motion and their vector-Jacobian product.

use std::sync::Arc;

use nalgebra::Matrix3;

use super::attitude::{
    normalize_vjp, omega_matrix, quaternion_rate, rotate, rotate_inverse, rotate_inverse_vjp, rotate_vjp, xi_matrix, Quat,
};
use super::environment::Environment;
use super::force_model::ForceModel;
use super::forces::eclipse_factor;
use super::jet::Jet;
use crate::design::{MeshInstance, Vec3};
use crate::error::{check_dim, Error, Result};

pub const STATE_DIM: usize = 13;

/// Position and velocity (inertial), orientation `q` (body → inertial,
/// scalar first) and body-frame angular velocity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct State {
    pub r: Vec3,
    pub v: Vec3,
    pub q: Quat,
    pub w: Vec3,
}

impl State {
    pub fn new(r: Vec3, v: Vec3, q: Quat, w: Vec3) -> Self {
        Self { r, v, q, w }
    }

    pub fn to_array(&self) -> [f64; STATE_DIM] {
        [
            self.r.x, self.r.y, self.r.z, self.v.x, self.v.y, self.v.z, self.q[0], self.q[1], self.q[2], self.q[3], self.w.x,
            self.w.y, self.w.z,
        ]
    }

    pub fn from_array(a: &[f64; STATE_DIM]) -> Self {
        Self {
            r: Vec3::new(a[0], a[1], a[2]),
            v: Vec3::new(a[3], a[4], a[5]),
            q: Quat::new(a[6], a[7], a[8], a[9]),
            w: Vec3::new(a[10], a[11], a[12]),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    pub fn validate(&self) -> Result<()> {
        if !self.is_finite() {
            return Err(Error::NonFinite {
                step: 0,
                what: "initial state".into(),
            });
        }
        if (self.q.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "initial quaternion must be unit length, |q| = {}",
                self.q.norm()
            )));
        }
        Ok(())
    }
}

/// Mass properties held fixed during propagation.
#[derive(Clone, Debug, PartialEq)]
pub struct Spacecraft {
    pub mass: f64,
    pub inertia: Matrix3<f64>,
    pub inertia_inv: Matrix3<f64>,
}

impl Spacecraft {
    pub fn new(mass: f64, inertia: Matrix3<f64>) -> Result<Self> {
        if !(mass > 0.0) {
            return Err(Error::InvalidArgument(format!("mass must be positive, got {mass}")));
        }
        let inertia_inv = inertia
            .try_inverse()
            .filter(|m| m.iter().all(|v| v.is_finite()))
            .ok_or_else(|| Error::Singular("inertia tensor is not invertible".into()))?;
        Ok(Self {
            mass,
            inertia,
            inertia_inv,
        })
    }

    pub fn from_mesh(mesh: &MeshInstance) -> Result<Self> {
        Self::new(mesh.mass, mesh.inertia)
    }
}

/// Cotangents produced by [`Dynamics::vjp`].
#[derive(Clone, Debug, PartialEq)]
pub struct RhsVjp {
    pub state: [f64; STATE_DIM],
    pub theta: Vec<f64>,
    /// Cotangent of the central-body gravitational parameter.
    pub mu: f64,
}

#[derive(Clone)]
pub struct Dynamics {
    pub env: Environment,
    pub spacecraft: Spacecraft,
    pub model: Arc<dyn ForceModel>,
}

impl Dynamics {
    pub fn new(env: Environment, spacecraft: Spacecraft, model: Arc<dyn ForceModel>) -> Result<Self> {
        env.validate()?;
        Ok(Self { env, spacecraft, model })
    }

    /// Irradiance ratio times eclipse factor at time `t` and position `r`.
    pub fn radiation_scale(&self, t: f64, r: &Vec3) -> f64 {
        let s = self.env.sun_direction(t);
        let shadow = if self.env.eclipse {
            eclipse_factor(&[r.x, r.y, r.z], &s, self.env.radius)
        } else {
            1.0
        };
        let e_ref = self.model.reference_irradiance();
        let ratio = if e_ref > 0.0 { self.env.sun.irradiance / e_ref } else { 0.0 };
        ratio * shadow
    }

    /// Body-frame direction to the Sun.
    pub fn body_sun_direction(&self, t: f64, q_hat: &Quat) -> Vec3 {
        rotate_inverse(q_hat, &Vec3::from(self.env.sun_direction(t)))
    }

    /// Body-frame radiation force and torque, already scaled by irradiance
    /// and eclipse.
    pub fn radiation(&self, t: f64, state: &State, theta: &[f64]) -> Result<(Vec3, Vec3)> {
        let k = self.radiation_scale(t, &state.r);
        if k == 0.0 {
            return Ok((Vec3::zeros(), Vec3::zeros()));
        }
        let q_hat = state.q / state.q.norm();
        let omega = self.body_sun_direction(t, &q_hat);
        let (f, tau) = self.model.force_torque(&omega, theta)?;
        Ok((f * k, tau * k))
    }

    pub fn rhs(&self, t: f64, z: &[f64; STATE_DIM], theta: &[f64]) -> Result<[f64; STATE_DIM]> {
        check_dim("theta", self.model.design_dim(), theta.len())?;
        let s = State::from_array(z);
        let sc = &self.spacecraft;
        let (f, tau) = self.radiation(t, &s, theta)?;
        let q_hat = s.q / s.q.norm();
        let a_env = self
            .env
            .acceleration(t, &[s.r.x, s.r.y, s.r.z], &[s.v.x, s.v.y, s.v.z], sc.mass);
        let a = Vec3::from(a_env) + rotate(&q_hat, &f) / sc.mass;
        let q_dot = quaternion_rate(&s.q, &s.w);
        let iw = sc.inertia * s.w;
        let w_dot = sc.inertia_inv * (tau - s.w.cross(&iw));
        Ok([
            s.v.x, s.v.y, s.v.z, a.x, a.y, a.z, q_dot[0], q_dot[1], q_dot[2], q_dot[3], w_dot.x, w_dot.y, w_dot.z,
        ])
    }

    /// `(∂f/∂z)ᵀ ȳ`, `(∂f/∂θ)ᵀ ȳ` and `(∂f/∂μ)ᵀ ȳ` at `(t, z, θ)`.
    pub fn vjp(&self, t: f64, z: &[f64; STATE_DIM], theta: &[f64], y_bar: &[f64; STATE_DIM]) -> Result<RhsVjp> {
        check_dim("theta", self.model.design_dim(), theta.len())?;
        let s = State::from_array(z);
        let sc = &self.spacecraft;
        let a_bar = Vec3::new(y_bar[3], y_bar[4], y_bar[5]);
        let qd_bar = Quat::new(y_bar[6], y_bar[7], y_bar[8], y_bar[9]);
        let wd_bar = Vec3::new(y_bar[10], y_bar[11], y_bar[12]);

        let mut r_bar = Vec3::zeros();
        let mut v_bar = Vec3::new(y_bar[0], y_bar[1], y_bar[2]);
        let mut q_bar = Quat::zeros();
        let mut w_bar = Vec3::zeros();
        let mut theta_bar = vec![0.0; theta.len()];

        // environment accelerations
        let seeds: [Jet<6>; 6] = std::array::from_fn(|i| Jet::var(z[i], i));
        let a_env = self
            .env
            .acceleration(t, &[seeds[0], seeds[1], seeds[2]], &[seeds[3], seeds[4], seeds[5]], sc.mass);
        for (k, ak) in a_env.iter().enumerate() {
            for i in 0..3 {
                r_bar[i] += ak.d[i] * a_bar[k];
                v_bar[i] += ak.d[i + 3] * a_bar[k];
            }
        }
        let central = self.env.central_acceleration(t, &[s.r.x, s.r.y, s.r.z]);
        let mu_bar = (central[0] * a_bar.x + central[1] * a_bar.y + central[2] * a_bar.z) / self.env.mu;

        // radiation: a += R(q̂) k F / m, ẇ += I⁻¹ k τ, with F, τ at ω̄ = R(q̂)ᵀ s
        let q_norm = s.q.norm();
        let q_hat = s.q / q_norm;
        let k = self.radiation_scale(t, &s.r);
        let mut qhat_bar = Quat::zeros();
        if k != 0.0 {
            let sun = Vec3::from(self.env.sun_direction(t));
            let omega = rotate_inverse(&q_hat, &sun);
            let (f, _tau) = self.model.force_torque(&omega, theta)?;
            let (qb, fb) = rotate_vjp(&q_hat, &(f * (k / sc.mass)), &a_bar);
            qhat_bar += qb;
            let f_bar = fb * (k / sc.mass);
            let tau_bar = sc.inertia_inv.transpose() * wd_bar * k;
            if f_bar.norm() > 0.0 || tau_bar.norm() > 0.0 {
                let (omega_bar, th_bar) = self.model.vjp(&omega, theta, &f_bar, &tau_bar)?;
                for (a, b) in theta_bar.iter_mut().zip(&th_bar) {
                    *a += b;
                }
                let (qb2, _) = rotate_inverse_vjp(&q_hat, &sun, &omega_bar);
                qhat_bar += qb2;
            }
        }
        q_bar += normalize_vjp(&s.q, &qhat_bar);

        // q̇ = ½ Ω(w) q
        q_bar += omega_matrix(&s.w).transpose() * qd_bar * 0.5;
        w_bar += xi_matrix(&s.q).transpose() * qd_bar * 0.5;

        // ẇ = −I⁻¹ (w × I w)
        let y = sc.inertia_inv.transpose() * wd_bar;
        let iw = sc.inertia * s.w;
        w_bar -= iw.cross(&y) - sc.inertia.transpose() * s.w.cross(&y);

        let mut out = [0.0; STATE_DIM];
        out[0..3].copy_from_slice(r_bar.as_slice());
        out[3..6].copy_from_slice(v_bar.as_slice());
        out[6..10].copy_from_slice(q_bar.as_slice());
        out[10..13].copy_from_slice(w_bar.as_slice());
        Ok(RhsVjp {
            state: out,
            theta: theta_bar,
            mu: mu_bar,
        })
    }
}
