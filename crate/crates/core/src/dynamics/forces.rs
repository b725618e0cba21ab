//! Perturbing accelerations: third bodies, eclipse, atmospheric drag.

use serde::{Deserialize, Serialize};

use super::jet::{dot, Scalar, V3};
use crate::error::{Error, Result};

/// Tidal acceleration from a body of parameter `mu_b` at `r_body` on a
/// satellite at `r_sat` (both relative to the central body).
pub fn third_body(mu_b: f64, r_sat: &[f64; 3], r_body: &[f64; 3]) -> Result<[f64; 3]> {
    if r_sat == r_body {
        return Err(Error::InvalidArgument("satellite coincides with the perturbing body".into()));
    }
    Ok(third_body_generic(mu_b, r_sat, r_body))
}

/// `μ_b (d/|d|³ − s/|s|³)` with `d = s − r`, rearranged so the difference
/// of the two nearly equal terms is formed without cancellation.
pub(crate) fn third_body_generic<S: Scalar>(mu_b: f64, r: &V3<S>, s: &[f64; 3]) -> V3<S> {
    let sv: V3<S> = [S::cst(s[0]), S::cst(s[1]), S::cst(s[2])];
    let d = [sv[0] - r[0], sv[1] - r[1], sv[2] - r[2]];
    let s_n = (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt();
    let d_n = dot(&d, &d).sqrt();
    // 1 − (|d|/|s|)³ = (1 − ρ)(1 + ρ + ρ²), 1 − ρ = (2 s·r − r·r) / (|s| (|s| + |d|))
    let rho = d_n * (1.0 / s_n);
    let one_minus_rho = (dot(&sv, r) * 2.0 - dot(r, r)) / ((d_n + S::cst(s_n)) * s_n);
    let q = one_minus_rho * (S::cst(1.0) + rho + rho * rho);
    let inv_d3 = S::cst(mu_b) / (d_n * d_n * d_n);
    [
        (sv[0] * q - r[0]) * inv_d3,
        (sv[1] * q - r[1]) * inv_d3,
        (sv[2] * q - r[2]) * inv_d3,
    ]
}

/// Cylindrical shadow: 0 behind the central body, 1 otherwise. A distance
/// of exactly `radius` from the shadow axis counts as lit.
pub fn eclipse_factor(r_sat: &[f64; 3], sun_dir: &[f64; 3], radius: f64) -> f64 {
    let along = r_sat[0] * sun_dir[0] + r_sat[1] * sun_dir[1] + r_sat[2] * sun_dir[2];
    if along >= 0.0 {
        return 1.0;
    }
    let perp = [
        r_sat[0] - along * sun_dir[0],
        r_sat[1] - along * sun_dir[1],
        r_sat[2] - along * sun_dir[2],
    ];
    let dist2 = perp[0] * perp[0] + perp[1] * perp[1] + perp[2] * perp[2];
    if dist2 < radius * radius {
        0.0
    } else {
        1.0
    }
}

/// `−½ ρ C_D (A/m) |v_rel| v_rel`.
pub fn drag_acceleration(rho: f64, v_rel: &[f64; 3], cd: f64, area: f64, mass: f64) -> Result<[f64; 3]> {
    if !(mass > 0.0) {
        return Err(Error::InvalidArgument(format!("mass must be positive, got {mass}")));
    }
    let v = [v_rel[0], v_rel[1], v_rel[2]];
    Ok(drag_generic(rho, &v, cd * area / mass))
}

pub(crate) fn drag_generic<S: Scalar>(rho: S, v_rel: &V3<S>, ballistic: f64) -> V3<S> {
    let speed = dot(v_rel, v_rel).sqrt();
    let k = rho * speed * (-0.5 * ballistic);
    [v_rel[0] * k, v_rel[1] * k, v_rel[2] * k]
}

/// `ρ(h) = ρ0 exp(−(h − h0)/H)` above a spherical body, with an atmosphere
/// co-rotating about +z.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DragConfig {
    pub cd: f64,
    /// Cross-sectional area [m²].
    pub area: f64,
    /// Density at the reference altitude [kg/m³].
    pub rho0: f64,
    pub h0: f64,
    pub scale_height: f64,
    #[serde(default = "default_rotation")]
    pub rotation_rate: f64,
}

fn default_rotation() -> f64 {
    super::gravity::EARTH_ROTATION
}

impl DragConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cd >= 0.0 && self.area >= 0.0 && self.rho0 >= 0.0 && self.scale_height > 0.0) {
            return Err(Error::InvalidArgument("invalid drag configuration".into()));
        }
        Ok(())
    }

    pub fn density<S: Scalar>(&self, r: &V3<S>, body_radius: f64) -> S {
        let h = dot(r, r).sqrt() - S::cst(body_radius + self.h0);
        (h * (-1.0 / self.scale_height)).exp() * self.rho0
    }

    pub(crate) fn acceleration<S: Scalar>(&self, r: &V3<S>, v: &V3<S>, body_radius: f64, mass: f64) -> V3<S> {
        let w = self.rotation_rate;
        // v − ω × r with ω = (0, 0, w)
        let v_rel = [v[0] + r[1] * w, v[1] - r[0] * w, v[2]];
        drag_generic(self.density(r, body_radius), &v_rel, self.cd * self.area / mass)
    }
}
