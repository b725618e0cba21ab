//! Central-body gravity: point mass and spherical harmonics.

use std::path::Path;

use super::jet::{dot, Scalar, V3};
use crate::error::{Error, Result};

pub const GM_EARTH: f64 = 3.986004418e14;
pub const R_EARTH: f64 = 6_378_137.0;
pub const GM_SUN: f64 = 1.32712440018e20;
pub const GM_MOON: f64 = 4.9028e12;
/// Earth rotation rate [rad/s].
pub const EARTH_ROTATION: f64 = 7.292115e-5;

/// `-μ r / |r|³`.
pub fn gravity_point(mu: f64, r: &[f64; 3]) -> Result<[f64; 3]> {
    let r2 = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
    if !(r2 > 0.0) {
        return Err(Error::InvalidArgument("point gravity at the attracting centre".into()));
    }
    Ok(gravity_point_generic(mu, r))
}

pub(crate) fn gravity_point_generic<S: Scalar>(mu: f64, r: &V3<S>) -> V3<S> {
    let r2 = dot(r, r);
    let inv = S::cst(1.0) / (r2 * r2.sqrt());
    [-(r[0] * inv) * mu, -(r[1] * inv) * mu, -(r[2] * inv) * mu]
}

/// Unnormalized geopotential coefficients `C[n][m]`, `S[n][m]` for `m ≤ n ≤ degree`.
#[derive(Clone, Debug, PartialEq)]
pub struct SphericalHarmonics {
    pub degree: usize,
    pub radius: f64,
    pub c: Vec<Vec<f64>>,
    pub s: Vec<Vec<f64>>,
}

/// `sqrt((2 − δ_{m0}) (2n + 1) (n − m)! / (n + m)!)`
pub fn normalization(n: usize, m: usize) -> f64 {
    let mut ratio = 1.0;
    // (n-m)!/(n+m)! = 1 / ((n-m+1)(n-m+2)...(n+m))
    for k in (n - m + 1)..=(n + m) {
        ratio /= k as f64;
    }
    let delta = if m == 0 { 1.0 } else { 2.0 };
    (delta * (2 * n + 1) as f64 * ratio).sqrt()
}

impl SphericalHarmonics {
    /// Only the `C_00 = 1` term: identical to point-mass gravity.
    pub fn point(radius: f64) -> Self {
        Self::zeros(0, radius)
    }

    pub fn zeros(degree: usize, radius: f64) -> Self {
        let mut c: Vec<Vec<f64>> = (0..=degree).map(|n| vec![0.0; n + 1]).collect();
        let s = c.clone();
        c[0][0] = 1.0;
        Self { degree, radius, c, s }
    }

    /// Zonal field with the given unnormalized `J2` (`C_20 = -J2`).
    pub fn j2(j2: f64, radius: f64) -> Self {
        let mut h = Self::zeros(2, radius);
        h.c[2][0] = -j2;
        h
    }

    /// Parse whitespace-delimited `n m C S` lines of fully normalized
    /// coefficients, truncated to `degree`. Missing terms are zero; `C_00`
    /// defaults to 1 when absent. Lines starting with `#` are ignored.
    pub fn parse_normalized(text: &str, degree: usize, radius: f64, origin: &Path) -> Result<Self> {
        let mut h = Self::zeros(degree, radius);
        let mut seen_c00 = false;
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let tok: Vec<&str> = line.split_whitespace().collect();
            if tok.len() < 4 {
                return Err(Error::parse(origin, format!("line {}: expected `n m C S`", ln + 1)));
            }
            let bad = |e: String| Error::parse(origin, format!("line {}: {e}", ln + 1));
            let n: usize = tok[0].parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?;
            let m: usize = tok[1].parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?;
            let parse_f = |t: &str| t.replace(['D', 'd'], "e").parse::<f64>().map_err(|e| bad(e.to_string()));
            let (cn, sn) = (parse_f(tok[2])?, parse_f(tok[3])?);
            if m > n {
                return Err(bad(format!("order {m} exceeds degree {n}")));
            }
            if n > degree {
                continue;
            }
            let k = normalization(n, m);
            h.c[n][m] = cn * k;
            h.s[n][m] = sn * k;
            if n == 0 {
                seen_c00 = true;
            }
        }
        if !seen_c00 {
            h.c[0][0] = 1.0;
        }
        Ok(h)
    }

    pub fn load_normalized(path: impl AsRef<Path>, degree: usize, radius: f64) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_normalized(&text, degree, radius, path)
    }

    /// `V_nm`, `W_nm` up to degree `degree + 1`.
    fn vw<S: Scalar>(&self, r: &V3<S>) -> (Vec<Vec<S>>, Vec<Vec<S>>) {
        let nmax = self.degree + 1;
        let big_r = self.radius;
        let r2 = dot(r, r);
        let inv_r2 = S::cst(1.0) / r2;
        let x0 = r[0] * inv_r2 * big_r;
        let y0 = r[1] * inv_r2 * big_r;
        let z0 = r[2] * inv_r2 * big_r;
        let rho = inv_r2 * (big_r * big_r);
        let zero = S::cst(0.0);
        let mut v = vec![vec![zero; nmax + 2]; nmax + 1];
        let mut w = vec![vec![zero; nmax + 2]; nmax + 1];
        v[0][0] = S::cst(big_r) / r2.sqrt();
        for m in 0..=nmax {
            if m > 0 {
                let k = (2 * m - 1) as f64;
                let (vp, wp) = (v[m - 1][m - 1], w[m - 1][m - 1]);
                v[m][m] = (x0 * vp - y0 * wp) * k;
                w[m][m] = (x0 * wp + y0 * vp) * k;
            }
            if m < nmax {
                let k = (2 * m + 1) as f64;
                v[m + 1][m] = z0 * v[m][m] * k;
                w[m + 1][m] = z0 * w[m][m] * k;
            }
            for n in (m + 2)..=nmax {
                let a = (2 * n - 1) as f64 / (n - m) as f64;
                let b = (n + m - 1) as f64 / (n - m) as f64;
                v[n][m] = z0 * v[n - 1][m] * a - rho * v[n - 2][m] * b;
                w[n][m] = z0 * w[n - 1][m] * a - rho * w[n - 2][m] * b;
            }
        }
        (v, w)
    }

    /// Acceleration in the body-fixed frame of the central body.
    pub fn acceleration<S: Scalar>(&self, mu: f64, r: &V3<S>) -> V3<S> {
        let (v, w) = self.vw(r);
        let zero = S::cst(0.0);
        let (mut ax, mut ay, mut az) = (zero, zero, zero);
        for n in 0..=self.degree {
            for m in 0..=n {
                let (c, s) = (self.c[n][m], self.s[n][m]);
                if c == 0.0 && s == 0.0 {
                    continue;
                }
                if m == 0 {
                    ax = ax - v[n + 1][1] * c;
                    ay = ay - w[n + 1][1] * c;
                } else {
                    let f = ((n - m + 2) * (n - m + 1)) as f64;
                    ax = ax
                        + ((v[n + 1][m + 1] * (-c) - w[n + 1][m + 1] * s) + (v[n + 1][m - 1] * c + w[n + 1][m - 1] * s) * f)
                            * 0.5;
                    ay = ay
                        + ((w[n + 1][m + 1] * (-c) + v[n + 1][m + 1] * s) + (w[n + 1][m - 1] * (-c) + v[n + 1][m - 1] * s) * f)
                            * 0.5;
                }
                let f = (n - m + 1) as f64;
                az = az + (v[n + 1][m] * (-c) - w[n + 1][m] * s) * f;
            }
        }
        let k = mu / (self.radius * self.radius);
        [ax * k, ay * k, az * k]
    }

    /// Gravitational potential `U` (positive, `U = μ/r` for the point term).
    pub fn potential(&self, mu: f64, r: &[f64; 3]) -> f64 {
        let (v, w) = self.vw::<f64>(r);
        let mut u = 0.0;
        for n in (1..=self.degree).rev() {
            for m in 0..=n {
                u += self.c[n][m] * v[n][m] + self.s[n][m] * w[n][m];
            }
        }
        let rn = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        self.c[0][0] * mu / rn + u * mu / self.radius
    }
}

/// Spherical-harmonic gravity with a below-surface check, in the body-fixed frame.
pub fn gravity_spherical_harmonics(h: &SphericalHarmonics, mu: f64, r: &[f64; 3]) -> Result<[f64; 3]> {
    let rn = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    if !(rn > h.radius) {
        return Err(Error::BelowSurface {
            radius: rn,
            body_radius: h.radius,
        });
    }
    Ok(h.acceleration(mu, r))
}
