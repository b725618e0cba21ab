//! Monte-Carlo estimate of the radiation force and torque on a mesh.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::brdf::{eval_brdf, sample_brdf, sample_uniform_hemisphere};
use super::tracer::{light_to_force, trace_radiance, LightingCondition, TracerConfig};
use crate::design::{DesignTemplate, Material, MeshInstance, SurfacePoint, Vec3};
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Samples handled by one worker with its own random stream.
pub const CHUNK_SIZE: usize = 1024;

/// Per-component standard errors of an estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StandardError {
    pub force: [f64; 3],
    pub torque: [f64; 3],
}

impl StandardError {
    pub fn force_norm(&self) -> f64 {
        Vec3::from(self.force).norm()
    }

    pub fn torque_norm(&self) -> f64 {
        Vec3::from(self.torque).norm()
    }
}

/// Body-frame force and torque for one light direction and design.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForceTorqueSample {
    pub omega: [f64; 3],
    pub theta: Vec<f64>,
    pub force: [f64; 3],
    pub torque: [f64; 3],
    pub stderr: Option<StandardError>,
}

impl ForceTorqueSample {
    pub fn force_vec(&self) -> Vec3 {
        Vec3::from(self.force)
    }

    pub fn torque_vec(&self) -> Vec3 {
        Vec3::from(self.torque)
    }

    pub fn is_finite(&self) -> bool {
        self.force.iter().chain(self.torque.iter()).all(|v| v.is_finite())
    }
}

#[derive(Clone, Copy, Default)]
struct Moments {
    sum: [f64; 6],
    sum_sq: [f64; 6],
}

impl Moments {
    fn push(&mut self, v: &[f64; 6]) {
        for k in 0..6 {
            self.sum[k] += v[k];
            self.sum_sq[k] += v[k] * v[k];
        }
    }

    fn merge(&mut self, other: &Moments) {
        for k in 0..6 {
            self.sum[k] += other.sum[k];
            self.sum_sq[k] += other.sum_sq[k];
        }
    }
}

/// Outgoing direction and its weight `f_r cos / pdf` for light arriving
/// along `w_in`.
fn sample_out(mat: &Material, n: &Vec3, w_in: &Vec3, importance: bool, rng: &mut RngStream) -> (Vec3, f64) {
    if mat.kd + mat.ks == 0.0 {
        return (*n, 0.0);
    }
    let (w_out, pdf) = if importance {
        sample_brdf(mat, n, w_in, rng)
    } else {
        let (w, _) = sample_uniform_hemisphere(n, rng);
        (w, 1.0 / TAU)
    };
    if pdf <= 0.0 {
        return (w_out, 0.0);
    }
    let cos_out = n.dot(&w_out).max(0.0);
    (w_out, eval_brdf(mat, n, w_in, &w_out) * cos_out / pdf)
}

/// Force density at one surface point (per unit area), one sample.
fn force_density(
    mesh: &MeshInstance,
    x: &SurfacePoint,
    light: &LightingCondition,
    cfg: &TracerConfig,
    rng: &mut RngStream,
) -> Vec3 {
    let incident = trace_radiance(mesh, x, light, cfg, rng);
    let n = &x.normal;
    let mut f = Vec3::zeros();
    if incident.direct > 0.0 {
        let (w_out, w) = sample_out(&x.material, n, &incident.direct_dir, cfg.brdf_importance_sampling, rng);
        f += light_to_force(incident.direct, n, &incident.direct_dir, &w_out, w);
    }
    if incident.indirect > 0.0 {
        let (w_out, w) = sample_out(&x.material, n, &incident.indirect_dir, cfg.brdf_importance_sampling, rng);
        f += light_to_force(incident.indirect, n, &incident.indirect_dir, &w_out, w) * incident.indirect_weight;
    }
    f
}

/// Estimate the force and torque on `mesh` under `light`.
///
/// Each sample draws a surface point by area, evaluates direct and
/// path-traced incident light there, and scatters it into one outgoing
/// direction. Results depend only on `cfg` (including the seed), not on the
/// number of worker threads.
pub fn estimate_force_torque(mesh: &MeshInstance, light: &LightingCondition, cfg: &TracerConfig) -> Result<ForceTorqueSample> {
    cfg.validate()?;
    let area = mesh.total_area();
    if !(area > 0.0) {
        return Err(Error::DegenerateMesh);
    }
    let n_total = cfg.samples;
    let n_chunks = n_total.div_ceil(CHUNK_SIZE);
    let chunk_moments: Vec<Moments> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = RngStream::with_stream(cfg.seed, c as u64);
            let mut m = Moments::default();
            let start = c * CHUNK_SIZE;
            let end = (start + CHUNK_SIZE).min(n_total);
            for i in start..end {
                let (xi, u1, u2) = (rng.uniform(), rng.uniform(), rng.uniform());
                let x = if cfg.stratified_surface {
                    let u = ((i as f64 + xi) / n_total as f64).min(1.0 - f64::EPSILON);
                    mesh.sample_point_folded(u, u2)
                } else {
                    mesh.sample_point(xi, u1, u2)
                };
                let f = force_density(mesh, &x, light, cfg, &mut rng) * area;
                let t = (x.position - mesh.com).cross(&f);
                m.push(&[f.x, f.y, f.z, t.x, t.y, t.z]);
            }
            m
        })
        .collect();
    let mut total = Moments::default();
    for m in &chunk_moments {
        total.merge(m);
    }
    let n = n_total as f64;
    let mut mean = [0.0; 6];
    let mut se = [0.0; 6];
    for k in 0..6 {
        mean[k] = total.sum[k] / n;
        se[k] = if n_total > 1 {
            let var = ((total.sum_sq[k] - n * mean[k] * mean[k]) / (n - 1.0)).max(0.0);
            (var / n).sqrt()
        } else {
            0.0
        };
    }
    Ok(ForceTorqueSample {
        omega: light.direction.into(),
        theta: Vec::new(),
        force: [mean[0], mean[1], mean[2]],
        torque: [mean[3], mean[4], mean[5]],
        stderr: Some(StandardError {
            force: [se[0], se[1], se[2]],
            torque: [se[3], se[4], se[5]],
        }),
    })
}

/// Instantiate `template` at `theta` and estimate the force and torque.
pub fn estimate_for_design(
    template: &DesignTemplate,
    theta: &[f64],
    light: &LightingCondition,
    cfg: &TracerConfig,
) -> Result<ForceTorqueSample> {
    let mesh = template.instantiate(theta)?;
    let mut sample = estimate_force_torque(&mesh, light, cfg)?;
    sample.theta = theta.to_vec();
    Ok(sample)
}
