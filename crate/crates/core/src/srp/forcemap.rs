//! Force and torque maps over all light directions on a latitude-longitude grid.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use super::estimator::{estimate_force_torque, ForceTorqueSample};
use super::tracer::{LightingCondition, TracerConfig};
use crate::design::{DesignTemplate, Vec3};
use crate::error::{Error, Result};
use crate::rng::derive_seed;

/// Unit direction at the center of pixel `(i, j)` of a `width × height`
/// latitude-longitude grid. Row 0 is the northern (+z) edge.
pub fn pixel_direction(i: usize, j: usize, width: usize, height: usize) -> Vec3 {
    let lon = (i as f64 + 0.5) / width as f64 * TAU - PI;
    let lat = FRAC_PI_2 - (j as f64 + 0.5) / height as f64 * PI;
    Vec3::new(lat.cos() * lon.cos(), lat.cos() * lon.sin(), lat.sin())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ForceMap {
    pub width: usize,
    pub height: usize,
    /// Row-major pixels, `samples[j * width + i]`.
    pub samples: Vec<ForceTorqueSample>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapChannel {
    Force,
    Torque,
}

/// Estimate one force/torque sample per pixel.
pub fn force_map(
    template: &DesignTemplate,
    theta: &[f64],
    resolution: (usize, usize),
    irradiance: f64,
    cfg: &TracerConfig,
) -> Result<ForceMap> {
    let (width, height) = resolution;
    if width == 0 || height == 0 {
        return Err(Error::InvalidArgument(format!(
            "resolution must be at least 1x1, got {width}x{height}"
        )));
    }
    cfg.validate()?;
    let mesh = template.instantiate(theta)?;
    let samples = (0..width * height)
        .into_par_iter()
        .map(|p| {
            let (i, j) = (p % width, p / width);
            let light = LightingCondition::new(pixel_direction(i, j, width, height), irradiance)?;
            let pixel_cfg = TracerConfig {
                seed: derive_seed(cfg.seed, &format!("pixel/{p}")),
                ..cfg.clone()
            };
            let mut s = estimate_force_torque(&mesh, &light, &pixel_cfg)?;
            s.theta = theta.to_vec();
            Ok(s)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ForceMap { width, height, samples })
}

impl ForceMap {
    pub fn pixel(&self, i: usize, j: usize) -> &ForceTorqueSample {
        &self.samples[j * self.width + i]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,j,omega_x,omega_y,omega_z,Fx,Fy,Fz,Tx,Ty,Tz,stderr_F,stderr_T\n");
        for (p, s) in self.samples.iter().enumerate() {
            let (sf, st) = s.stderr.map(|e| (e.force_norm(), e.torque_norm())).unwrap_or((0.0, 0.0));
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                p % self.width,
                p / self.width,
                s.omega[0],
                s.omega[1],
                s.omega[2],
                s.force[0],
                s.force[1],
                s.force[2],
                s.torque[0],
                s.torque[1],
                s.torque[2],
                sf,
                st
            );
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    /// Binary PPM: x, y, z components mapped to R, G, B from
    /// `[-max|v|, max|v|]` to `[0, 255]`.
    pub fn to_ppm(&self, channel: MapChannel) -> Vec<u8> {
        let vecs: Vec<[f64; 3]> = self
            .samples
            .iter()
            .map(|s| match channel {
                MapChannel::Force => s.force,
                MapChannel::Torque => s.torque,
            })
            .collect();
        let max = vecs.iter().map(|v| Vec3::from(*v).norm()).fold(0.0, f64::max);
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        for v in &vecs {
            for c in v {
                let t = if max > 0.0 { (c / max + 1.0) * 0.5 } else { 0.5 };
                out.push((t * 255.0).round().clamp(0.0, 255.0) as u8);
            }
        }
        out
    }

    pub fn write_ppm(&self, path: impl AsRef<Path>, channel: MapChannel) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_ppm(channel)).map_err(|e| Error::io(path, e))
    }
}
