//! Sources of body-frame radiation force and torque.

use std::sync::Mutex;

use crate::design::{DesignTemplate, MeshInstance, Vec3};
use crate::error::{check_dim, Error, Result};
use crate::proxy::ProxyParams;
use crate::srp::estimate_force_torque;
use crate::srp::tracer::{LightingCondition, TracerConfig, SOLAR_IRRADIANCE_1AU, SPEED_OF_LIGHT};

/// Body-frame `(F, τ)` for a body-frame sun direction and design vector, at
/// the model's reference irradiance.
pub trait ForceModel: Send + Sync {
    fn design_dim(&self) -> usize;

    fn reference_irradiance(&self) -> f64;

    fn force_torque(&self, omega: &Vec3, theta: &[f64]) -> Result<(Vec3, Vec3)>;

    /// Cotangents of `omega` and `theta` for output cotangents `(F̄, τ̄)`.
    fn vjp(&self, _omega: &Vec3, _theta: &[f64], _f_bar: &Vec3, _t_bar: &Vec3) -> Result<(Vec3, Vec<f64>)> {
        Err(Error::NotDifferentiable("this force model has no derivative"))
    }

    fn is_differentiable(&self) -> bool {
        false
    }
}

/// No radiation pressure at all.
#[derive(Clone, Debug, Default)]
pub struct NoRadiation {
    pub design_dim: usize,
}

impl ForceModel for NoRadiation {
    fn design_dim(&self) -> usize {
        self.design_dim
    }
    fn reference_irradiance(&self) -> f64 {
        SOLAR_IRRADIANCE_1AU
    }
    fn force_torque(&self, _omega: &Vec3, theta: &[f64]) -> Result<(Vec3, Vec3)> {
        check_dim("theta", self.design_dim, theta.len())?;
        Ok((Vec3::zeros(), Vec3::zeros()))
    }
    fn vjp(&self, _omega: &Vec3, theta: &[f64], _f: &Vec3, _t: &Vec3) -> Result<(Vec3, Vec<f64>)> {
        Ok((Vec3::zeros(), vec![0.0; theta.len()]))
    }
    fn is_differentiable(&self) -> bool {
        true
    }
}

/// Trained neural proxy. With `torque` off the predicted torque is
/// discarded, for bodies whose true torque vanishes by symmetry.
#[derive(Clone, Debug)]
pub struct ProxyForce {
    pub params: ProxyParams,
    pub torque: bool,
}

impl ProxyForce {
    pub fn new(params: ProxyParams) -> Self {
        Self { params, torque: true }
    }

    pub fn without_torque(params: ProxyParams) -> Self {
        Self { params, torque: false }
    }
}

impl ForceModel for ProxyForce {
    fn design_dim(&self) -> usize {
        self.params.n_params()
    }
    fn reference_irradiance(&self) -> f64 {
        self.params.reference_irradiance
    }
    fn force_torque(&self, omega: &Vec3, theta: &[f64]) -> Result<(Vec3, Vec3)> {
        let (f, t) = self.params.forward(omega, theta)?;
        Ok((f, if self.torque { t } else { Vec3::zeros() }))
    }
    fn vjp(&self, omega: &Vec3, theta: &[f64], f_bar: &Vec3, t_bar: &Vec3) -> Result<(Vec3, Vec<f64>)> {
        let t_bar = if self.torque { *t_bar } else { Vec3::zeros() };
        let cot = [f_bar.x, f_bar.y, f_bar.z, t_bar.x, t_bar.y, t_bar.z];
        self.params.input_vjp(omega, theta, &cot)
    }
    fn is_differentiable(&self) -> bool {
        true
    }
}

/// Monte-Carlo simulator evaluated at every call. Each call uses a fresh
/// seed from an internal counter, so repeated runs are reproducible but the
/// force is noisy along a trajectory.
pub struct SimulatorForce {
    pub template: DesignTemplate,
    pub tracer: TracerConfig,
    pub irradiance: f64,
    cache: Mutex<Option<(Vec<f64>, MeshInstance)>>,
    calls: Mutex<u64>,
}

impl SimulatorForce {
    pub fn new(template: DesignTemplate, tracer: TracerConfig, irradiance: f64) -> Self {
        Self {
            template,
            tracer,
            irradiance,
            cache: Mutex::new(None),
            calls: Mutex::new(0),
        }
    }
}

impl ForceModel for SimulatorForce {
    fn design_dim(&self) -> usize {
        self.template.n_params()
    }
    fn reference_irradiance(&self) -> f64 {
        self.irradiance
    }
    fn force_torque(&self, omega: &Vec3, theta: &[f64]) -> Result<(Vec3, Vec3)> {
        let mesh = {
            let mut cache = self.cache.lock().expect("cache lock");
            match &*cache {
                Some((t, m)) if t.as_slice() == theta => m.clone(),
                _ => {
                    let m = self.template.instantiate(theta)?;
                    *cache = Some((theta.to_vec(), m.clone()));
                    m
                }
            }
        };
        let seed = {
            let mut c = self.calls.lock().expect("counter lock");
            *c += 1;
            self.tracer.seed.wrapping_add(*c)
        };
        let light = LightingCondition::new(*omega, self.irradiance)?;
        let cfg = TracerConfig {
            seed,
            ..self.tracer.clone()
        };
        let s = estimate_force_torque(&mesh, &light, &cfg)?;
        Ok((s.force_vec(), s.torque_vec()))
    }
}

/// One-sided black plate with body-frame normal `normal`, centred on the
/// centre of mass: `F = −(E A / c) max(0, n·ω) ω`, no torque.
#[derive(Clone, Debug)]
pub struct AbsorberPlate {
    pub area: f64,
    pub normal: Vec3,
    pub irradiance: f64,
}

impl ForceModel for AbsorberPlate {
    fn design_dim(&self) -> usize {
        0
    }
    fn reference_irradiance(&self) -> f64 {
        self.irradiance
    }
    fn force_torque(&self, omega: &Vec3, theta: &[f64]) -> Result<(Vec3, Vec3)> {
        check_dim("theta", 0, theta.len())?;
        let cos = self.normal.dot(omega).max(0.0);
        Ok((-omega * (self.irradiance * self.area / SPEED_OF_LIGHT * cos), Vec3::zeros()))
    }
    fn vjp(&self, omega: &Vec3, _theta: &[f64], f_bar: &Vec3, _t_bar: &Vec3) -> Result<(Vec3, Vec<f64>)> {
        let k = self.irradiance * self.area / SPEED_OF_LIGHT;
        let cos = self.normal.dot(omega);
        if cos <= 0.0 {
            return Ok((Vec3::zeros(), vec![]));
        }
        // F = −k (n·ω) ω
        let g = -(f_bar * cos + self.normal * f_bar.dot(omega)) * k;
        Ok((g, vec![]))
    }
    fn is_differentiable(&self) -> bool {
        true
    }
}

/// Spherical spacecraft: `F = −C_r (E A / c) ω` with `C_r = θ₀` when the
/// model has one design parameter, otherwise the fixed `reflectivity`.
#[derive(Clone, Debug)]
pub struct Cannonball {
    pub area: f64,
    pub reflectivity: f64,
    pub irradiance: f64,
    pub reflectivity_is_design: bool,
}

impl ForceModel for Cannonball {
    fn design_dim(&self) -> usize {
        usize::from(self.reflectivity_is_design)
    }
    fn reference_irradiance(&self) -> f64 {
        self.irradiance
    }
    fn force_torque(&self, omega: &Vec3, theta: &[f64]) -> Result<(Vec3, Vec3)> {
        check_dim("theta", self.design_dim(), theta.len())?;
        let cr = if self.reflectivity_is_design {
            theta[0]
        } else {
            self.reflectivity
        };
        Ok((-omega * (cr * self.irradiance * self.area / SPEED_OF_LIGHT), Vec3::zeros()))
    }
    fn vjp(&self, omega: &Vec3, theta: &[f64], f_bar: &Vec3, _t_bar: &Vec3) -> Result<(Vec3, Vec<f64>)> {
        let k = self.irradiance * self.area / SPEED_OF_LIGHT;
        let cr = if self.reflectivity_is_design {
            theta[0]
        } else {
            self.reflectivity
        };
        let g_omega = -f_bar * (cr * k);
        let g_theta = if self.reflectivity_is_design {
            vec![-f_bar.dot(omega) * k]
        } else {
            vec![]
        };
        Ok((g_omega, g_theta))
    }
    fn is_differentiable(&self) -> bool {
        true
    }
}
