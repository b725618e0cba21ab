//! Incident radiance at surface points: next-event estimation towards the
//! directional light plus a path-traced indirect sample.

use serde::{Deserialize, Serialize};

use super::brdf::{eval_brdf, sample_brdf, sample_cosine, sample_uniform_hemisphere};
use super::intersect::{intersect_nearest, occluded, ray_epsilon};
use crate::design::{MeshInstance, SurfacePoint, Vec3};
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Speed of light in vacuum [m/s].
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Solar irradiance at 1 AU [W/m²].
pub const SOLAR_IRRADIANCE_1AU: f64 = 1361.0;

/// Directional light: `direction` points from the surface toward the source.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LightingCondition {
    pub direction: Vec3,
    pub irradiance: f64,
}

impl LightingCondition {
    pub fn new(direction: Vec3, irradiance: f64) -> Result<Self> {
        let norm = direction.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidArgument("light direction must be non-zero".into()));
        }
        if !(irradiance >= 0.0) {
            return Err(Error::InvalidArgument(format!("irradiance must be >= 0, got {irradiance}")));
        }
        Ok(Self {
            direction: direction / norm,
            irradiance,
        })
    }

    pub fn sun(direction: Vec3) -> Self {
        Self::new(direction, SOLAR_IRRADIANCE_1AU).expect("non-zero direction")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracerConfig {
    pub max_bounces: u32,
    pub samples: usize,
    pub stratified_surface: bool,
    pub brdf_importance_sampling: bool,
    pub seed: u64,
}

impl Default for TracerConfig {
    fn default() -> Self {
        Self {
            max_bounces: 3,
            samples: 1024,
            stratified_surface: true,
            brdf_importance_sampling: true,
            seed: 0,
        }
    }
}

impl TracerConfig {
    /// Uniform hemisphere sampling, no stratification.
    pub fn plain(samples: usize, seed: u64) -> Self {
        Self {
            samples,
            seed,
            stratified_surface: false,
            brdf_importance_sampling: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidArgument("samples must be at least 1".into()));
        }
        Ok(())
    }
}

/// Force imparted by radiance `radiance` arriving from `w_in` at a surface
/// with normal `n`, reflected towards `w_out` with weight `fr_weight`
/// (the BRDF times the outgoing cosine over the sampling density).
#[inline]
pub fn light_to_force(radiance: f64, n: &Vec3, w_in: &Vec3, w_out: &Vec3, fr_weight: f64) -> Vec3 {
    let cos = n.dot(w_in).max(0.0);
    if cos == 0.0 {
        return Vec3::zeros();
    }
    (-w_in - w_out * fr_weight) * (radiance * cos / SPEED_OF_LIGHT)
}

/// Radiance arriving at a surface point, split into its two estimators.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IncidentLight {
    /// Irradiance-normal radiance of the directional light (`E` when the
    /// light is above the horizon and unoccluded, 0 otherwise).
    pub direct: f64,
    pub direct_dir: Vec3,
    /// Path-traced radiance arriving along `indirect_dir`.
    pub indirect: f64,
    pub indirect_dir: Vec3,
    /// Reciprocal sampling density of `indirect_dir`.
    pub indirect_weight: f64,
}

/// Sample incident light at `x`.
pub fn trace_radiance(
    mesh: &MeshInstance,
    x: &SurfacePoint,
    light: &LightingCondition,
    cfg: &TracerConfig,
    rng: &mut RngStream,
) -> IncidentLight {
    let eps = ray_epsilon(mesh);
    let n = x.normal;
    let origin = x.position + n * eps;
    let w = light.direction;
    let direct = if n.dot(&w) > 0.0 && !occluded(mesh, &origin, &w, eps) {
        light.irradiance
    } else {
        0.0
    };
    let mut out = IncidentLight {
        direct,
        direct_dir: w,
        indirect: 0.0,
        indirect_dir: n,
        indirect_weight: 0.0,
    };
    if cfg.max_bounces == 0 {
        return out;
    }
    let (w_in, pdf) = if cfg.brdf_importance_sampling {
        sample_cosine(&n, rng)
    } else {
        sample_uniform_hemisphere(&n, rng)
    };
    out.indirect_dir = w_in;
    out.indirect_weight = if pdf > 0.0 { 1.0 / pdf } else { 0.0 };
    if pdf > 0.0 {
        if let Some(hit) = intersect_nearest(mesh, &origin, &w_in, eps) {
            let y = origin + w_in * hit.distance;
            out.indirect = outgoing_radiance(mesh, hit.face, &y, &(-w_in), light, cfg, rng, 1);
        }
    }
    out
}

/// Radiance leaving face `face` at `y` towards `view`, path traced with
/// next-event estimation at every vertex.
#[allow(clippy::too_many_arguments)]
fn outgoing_radiance(
    mesh: &MeshInstance,
    face: usize,
    y: &Vec3,
    view: &Vec3,
    light: &LightingCondition,
    cfg: &TracerConfig,
    rng: &mut RngStream,
    depth: u32,
) -> f64 {
    let n = mesh.normals[face];
    if n.dot(view) <= 0.0 {
        return 0.0;
    }
    let mat = mesh.materials[face];
    if mat.kd + mat.ks == 0.0 {
        return 0.0;
    }
    let eps = ray_epsilon(mesh);
    let origin = y + n * eps;
    let w = light.direction;
    let mut radiance = 0.0;
    let cos_l = n.dot(&w);
    if cos_l > 0.0 && !occluded(mesh, &origin, &w, eps) {
        radiance += eval_brdf(&mat, &n, &w, view) * light.irradiance * cos_l;
    }
    if depth < cfg.max_bounces {
        let (w_in, pdf) = if cfg.brdf_importance_sampling {
            sample_brdf(&mat, &n, view, rng)
        } else {
            sample_uniform_hemisphere(&n, rng)
        };
        let cos_in = n.dot(&w_in);
        if cos_in > 0.0 && pdf > 0.0 {
            let f = eval_brdf(&mat, &n, &w_in, view);
            if f > 0.0 {
                if let Some(hit) = intersect_nearest(mesh, &origin, &w_in, eps) {
                    let next = origin + w_in * hit.distance;
                    let li = outgoing_radiance(mesh, hit.face, &next, &(-w_in), light, cfg, rng, depth + 1);
                    radiance += f * cos_in / pdf * li;
                }
            }
        }
    }
    radiance
}
