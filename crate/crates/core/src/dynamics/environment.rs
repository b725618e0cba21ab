//! Everything acting on the spacecraft besides its own radiation forces.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ephemeris::{BodyProvider, AU};
use super::forces::{third_body_generic, DragConfig};
use super::gravity::{
    gravity_point_generic, normalization, SphericalHarmonics, EARTH_ROTATION, GM_EARTH, GM_MOON, GM_SUN, R_EARTH,
};
use super::jet::{Scalar, V3};
use crate::error::{Error, Result};
use crate::srp::tracer::SOLAR_IRRADIANCE_1AU;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThirdBody {
    pub name: String,
    pub mu: f64,
    pub provider: BodyProvider,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SunConfig {
    #[serde(default = "default_irradiance")]
    pub irradiance: f64,
    pub provider: BodyProvider,
}

fn default_irradiance() -> f64 {
    SOLAR_IRRADIANCE_1AU
}

fn default_true() -> bool {
    true
}

fn default_rotation() -> f64 {
    EARTH_ROTATION
}

/// Where spherical-harmonic coefficients come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicsConfig {
    pub degree: usize,
    /// Path to an `n m C S` file of normalized coefficients, relative to the
    /// environment file.
    #[serde(default)]
    pub file: Option<PathBuf>,
    /// Inline normalized `[n, m, C, S]` rows.
    #[serde(default)]
    pub coefficients: Vec<[f64; 4]>,
}

/// Serialized environment description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentConfig {
    pub mu: f64,
    pub radius: f64,
    #[serde(default = "default_rotation")]
    pub rotation_rate: f64,
    #[serde(default)]
    pub harmonics: Option<HarmonicsConfig>,
    #[serde(default)]
    pub third_bodies: Vec<ThirdBody>,
    pub sun: SunConfig,
    #[serde(default = "default_true")]
    pub eclipse: bool,
    #[serde(default)]
    pub drag: Option<DragConfig>,
    /// Seconds past J2000 at `t = 0`.
    #[serde(default)]
    pub epoch_j2000: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Environment {
    pub mu: f64,
    pub radius: f64,
    pub rotation_rate: f64,
    pub harmonics: Option<SphericalHarmonics>,
    pub third_bodies: Vec<ThirdBody>,
    pub sun: SunConfig,
    pub eclipse: bool,
    pub drag: Option<DragConfig>,
    pub epoch_j2000: f64,
}

impl Environment {
    /// Point-mass Earth with the Sun along a fixed direction, no eclipse.
    pub fn two_body(mu: f64, sun_direction: [f64; 3]) -> Self {
        Self {
            mu,
            radius: R_EARTH,
            rotation_rate: EARTH_ROTATION,
            harmonics: None,
            third_bodies: Vec::new(),
            sun: SunConfig {
                irradiance: SOLAR_IRRADIANCE_1AU,
                provider: BodyProvider::Constant {
                    direction: sun_direction,
                    distance: AU,
                },
            },
            eclipse: false,
            drag: None,
            epoch_j2000: 0.0,
        }
    }

    pub fn earth_default() -> Self {
        Self::two_body(GM_EARTH, [1.0, 0.0, 0.0])
    }

    /// Earth with analytic Sun and Moon as third bodies and cylinder eclipse.
    pub fn earth_sun_moon(epoch_j2000: f64) -> Self {
        let mut env = Self::earth_default();
        env.sun.provider = BodyProvider::AnalyticSun;
        env.third_bodies = vec![
            ThirdBody {
                name: "sun".into(),
                mu: GM_SUN,
                provider: BodyProvider::AnalyticSun,
            },
            ThirdBody {
                name: "moon".into(),
                mu: GM_MOON,
                provider: BodyProvider::AnalyticMoon,
            },
        ];
        env.eclipse = true;
        env.epoch_j2000 = epoch_j2000;
        env
    }

    pub fn from_config(cfg: &EnvironmentConfig, base_dir: &Path) -> Result<Self> {
        let harmonics = match &cfg.harmonics {
            None => None,
            Some(h) => {
                let mut sh = match &h.file {
                    Some(f) => SphericalHarmonics::load_normalized(base_dir.join(f), h.degree, cfg.radius)?,
                    None => SphericalHarmonics::zeros(h.degree, cfg.radius),
                };
                for row in &h.coefficients {
                    let (n, m) = (row[0] as usize, row[1] as usize);
                    if m > n || row[0] != n as f64 || row[1] != m as f64 {
                        return Err(Error::InvalidArgument(format!("bad harmonic index ({}, {})", row[0], row[1])));
                    }
                    if n <= h.degree {
                        let k = normalization(n, m);
                        sh.c[n][m] = row[2] * k;
                        sh.s[n][m] = row[3] * k;
                    }
                }
                Some(sh)
            }
        };
        let env = Self {
            mu: cfg.mu,
            radius: cfg.radius,
            rotation_rate: cfg.rotation_rate,
            harmonics,
            third_bodies: cfg.third_bodies.clone(),
            sun: cfg.sun.clone(),
            eclipse: cfg.eclipse,
            drag: cfg.drag.clone(),
            epoch_j2000: cfg.epoch_j2000,
        };
        env.validate()?;
        Ok(env)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: EnvironmentConfig = serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))?;
        Self::from_config(&cfg, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0) || !(self.radius > 0.0) {
            return Err(Error::InvalidArgument("environment needs mu > 0 and radius > 0".into()));
        }
        if !(self.sun.irradiance >= 0.0) {
            return Err(Error::InvalidArgument("irradiance must be >= 0".into()));
        }
        self.sun.provider.validate()?;
        for b in &self.third_bodies {
            b.provider.validate()?;
        }
        if let Some(d) = &self.drag {
            d.validate()?;
        }
        Ok(())
    }

    /// Geocentric unit vector towards the Sun at time `t`.
    pub fn sun_direction(&self, t: f64) -> [f64; 3] {
        self.sun.provider.direction(self.epoch_j2000 + t)
    }

    /// Central-body gravity only; linear in `mu`.
    pub fn central_acceleration<S: Scalar>(&self, t: f64, r: &V3<S>) -> V3<S> {
        match &self.harmonics {
            None => gravity_point_generic(self.mu, r),
            Some(h) => {
                let (s, c) = (self.rotation_rate * t).sin_cos();
                // inertial → body-fixed: rotate by −angle about z
                let rb = [r[0] * c + r[1] * s, r[1] * c - r[0] * s, r[2]];
                let ab = h.acceleration(self.mu, &rb);
                [ab[0] * c - ab[1] * s, ab[0] * s + ab[1] * c, ab[2]]
            }
        }
    }

    /// All environment accelerations (gravity, third bodies, drag).
    pub fn acceleration<S: Scalar>(&self, t: f64, r: &V3<S>, v: &V3<S>, mass: f64) -> V3<S> {
        let mut a = self.central_acceleration(t, r);
        for b in &self.third_bodies {
            let p = b.provider.position(self.epoch_j2000 + t);
            let ab = third_body_generic(b.mu, r, &p);
            for k in 0..3 {
                a[k] = a[k] + ab[k];
            }
        }
        if let Some(d) = &self.drag {
            let ad = d.acceleration(r, v, self.radius, mass);
            for k in 0..3 {
                a[k] = a[k] + ad[k];
            }
        }
        a
    }
}
