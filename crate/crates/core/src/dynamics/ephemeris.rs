//! Sun and Moon positions: fixed directions for desk-scale scenarios, or
//! low-precision analytic series (accuracy ~0.1° for the Sun, a few
//! arc-minutes for the Moon), geocentric, equatorial J2000 axes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const AU: f64 = 1.495_978_707e11;
const OBLIQUITY_DEG: f64 = 23.439_291_11;
const ARCSEC: f64 = std::f64::consts::PI / (180.0 * 3600.0);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum BodyProvider {
    /// Fixed position `distance · direction`.
    Constant {
        direction: [f64; 3],
        distance: f64,
    },
    AnalyticSun,
    AnalyticMoon,
}

fn ecliptic_to_equatorial(lon: f64, lat: f64, r: f64) -> [f64; 3] {
    let (x, y, z) = (r * lat.cos() * lon.cos(), r * lat.cos() * lon.sin(), r * lat.sin());
    let eps = OBLIQUITY_DEG.to_radians();
    [x, eps.cos() * y - eps.sin() * z, eps.sin() * y + eps.cos() * z]
}

/// Julian centuries since J2000 for `seconds` past J2000.
fn centuries(seconds: f64) -> f64 {
    seconds / (86_400.0 * 36_525.0)
}

/// Geocentric Sun position [m].
pub fn sun_position(seconds_j2000: f64) -> [f64; 3] {
    let t = centuries(seconds_j2000);
    let m = (357.5256 + 35_999.049 * t).to_radians();
    let omega_plus_w = 282.94f64.to_radians();
    let lon = omega_plus_w + m + (6892.0 * m.sin() + 72.0 * (2.0 * m).sin()) * ARCSEC;
    let r = (149.619 - 2.499 * m.cos() - 0.021 * (2.0 * m).cos()) * 1e9;
    ecliptic_to_equatorial(lon, 0.0, r)
}

/// Geocentric Moon position [m].
pub fn moon_position(seconds_j2000: f64) -> [f64; 3] {
    let t = centuries(seconds_j2000);
    let deg = |d: f64| d.to_radians();
    let l0 = deg(218.316_17 + 481_267.880_88 * t - 1.3972 * t);
    let l = deg(134.962_92 + 477_198.867_53 * t);
    let lp = deg(357.525_43 + 35_999.049_44 * t);
    let f = deg(93.272_83 + 483_202.018_73 * t);
    let d = deg(297.850_27 + 445_267.111_35 * t);
    let dlon = 22_640.0 * l.sin() + 769.0 * (2.0 * l).sin() - 4_586.0 * (l - 2.0 * d).sin() + 2_370.0 * (2.0 * d).sin()
        - 668.0 * lp.sin()
        - 412.0 * (2.0 * f).sin()
        - 212.0 * (2.0 * l - 2.0 * d).sin()
        - 206.0 * (l + lp - 2.0 * d).sin()
        + 192.0 * (l + 2.0 * d).sin()
        - 165.0 * (lp - 2.0 * d).sin()
        + 148.0 * (l - lp).sin()
        - 125.0 * d.sin()
        - 110.0 * (l + lp).sin()
        - 55.0 * (2.0 * f - 2.0 * d).sin();
    let lon = l0 + dlon * ARCSEC;
    let lat = (18_520.0 * (f + lon - l0 + (412.0 * (2.0 * f).sin() + 541.0 * lp.sin()) * ARCSEC).sin()
        - 526.0 * (f - 2.0 * d).sin()
        + 44.0 * (l + f - 2.0 * d).sin()
        - 31.0 * (-l + f - 2.0 * d).sin()
        - 25.0 * (-2.0 * l + f).sin()
        - 23.0 * (lp + f - 2.0 * d).sin()
        + 21.0 * (-l + f).sin()
        + 11.0 * (-lp + f - 2.0 * d).sin())
        * ARCSEC;
    let r =
        (385_000.0 - 20_905.0 * l.cos() - 3_699.0 * (2.0 * d - l).cos() - 2_956.0 * (2.0 * d).cos() - 570.0 * (2.0 * l).cos()
            + 246.0 * (2.0 * l - 2.0 * d).cos()
            - 205.0 * (lp - 2.0 * d).cos()
            - 171.0 * (l + 2.0 * d).cos()
            - 152.0 * (l + lp - 2.0 * d).cos())
            * 1e3;
    ecliptic_to_equatorial(lon, lat, r)
}

impl BodyProvider {
    pub fn validate(&self) -> Result<()> {
        if let BodyProvider::Constant { direction, distance } = self {
            let n = (direction[0].powi(2) + direction[1].powi(2) + direction[2].powi(2)).sqrt();
            if !(n > 0.0) || !(*distance > 0.0) {
                return Err(Error::InvalidArgument(
                    "constant body provider needs a non-zero direction and positive distance".into(),
                ));
            }
        }
        Ok(())
    }

    /// Position at `seconds_j2000` [m].
    pub fn position(&self, seconds_j2000: f64) -> [f64; 3] {
        match self {
            BodyProvider::Constant { direction, distance } => {
                let n = (direction[0].powi(2) + direction[1].powi(2) + direction[2].powi(2)).sqrt();
                [
                    direction[0] / n * distance,
                    direction[1] / n * distance,
                    direction[2] / n * distance,
                ]
            }
            BodyProvider::AnalyticSun => sun_position(seconds_j2000),
            BodyProvider::AnalyticMoon => moon_position(seconds_j2000),
        }
    }

    pub fn direction(&self, seconds_j2000: f64) -> [f64; 3] {
        let p = self.position(seconds_j2000);
        let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        [p[0] / n, p[1] / n, p[2] / n]
    }
}
