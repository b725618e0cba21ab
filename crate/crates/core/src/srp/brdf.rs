//! Normalized Phong reflectance and the direction samplers built on it.

use std::f64::consts::{FRAC_1_PI, TAU};

use crate::design::{Material, Vec3};
use crate::rng::RngStream;

/// Mirror `w` about `n`.
#[inline]
pub fn reflect(w: &Vec3, n: &Vec3) -> Vec3 {
    n * (2.0 * n.dot(w)) - w
}

/// Orthonormal tangent frame `(t, b)` around the unit vector `n`.
pub fn tangent_frame(n: &Vec3) -> (Vec3, Vec3) {
    let sign = 1.0f64.copysign(n.z);
    let a = -1.0 / (sign + n.z);
    let b = n.x * n.y * a;
    (
        Vec3::new(1.0 + sign * n.x * n.x * a, sign * b, -sign * n.x),
        Vec3::new(b, sign + n.y * n.y * a, -n.y),
    )
}

fn from_local(n: &Vec3, x: f64, y: f64, z: f64) -> Vec3 {
    let (t, b) = tangent_frame(n);
    (t * x + b * y + n * z).normalize()
}

/// Cosine-weighted direction about `n`; pdf `cos / π`.
pub fn sample_cosine(n: &Vec3, rng: &mut RngStream) -> (Vec3, f64) {
    let (u1, u2) = (rng.uniform(), rng.uniform());
    let r = u1.sqrt();
    let phi = TAU * u2;
    let z = (1.0 - u1).max(0.0).sqrt();
    (from_local(n, r * phi.cos(), r * phi.sin(), z), z * FRAC_1_PI)
}

/// Uniform direction on the hemisphere about `n`; pdf `1 / 2π`.
pub fn sample_uniform_hemisphere(n: &Vec3, rng: &mut RngStream) -> (Vec3, f64) {
    let (u1, u2) = (rng.uniform(), rng.uniform());
    let z = u1;
    let r = (1.0 - z * z).max(0.0).sqrt();
    let phi = TAU * u2;
    (from_local(n, r * phi.cos(), r * phi.sin(), z), 0.5 * FRAC_1_PI)
}

/// Normalized Phong BRDF. Both directions point away from the surface.
pub fn eval_brdf(mat: &Material, n: &Vec3, w_in: &Vec3, w_out: &Vec3) -> f64 {
    if n.dot(w_in) <= 0.0 || n.dot(w_out) <= 0.0 {
        return 0.0;
    }
    let mut f = mat.kd * FRAC_1_PI;
    if mat.ks > 0.0 {
        let c = reflect(w_in, n).dot(w_out);
        if c > 0.0 {
            f += mat.ks * (mat.ns + 2.0) / TAU * c.powf(mat.ns);
        }
    }
    f
}

fn lobe_weights(mat: &Material) -> (f64, f64) {
    let total = mat.kd + mat.ks;
    if total > 0.0 {
        (mat.kd / total, mat.ks / total)
    } else {
        (1.0, 0.0)
    }
}

/// Density of [`sample_brdf`] at `w_out`.
pub fn pdf_brdf(mat: &Material, n: &Vec3, w_in: &Vec3, w_out: &Vec3) -> f64 {
    let (pd, ps) = lobe_weights(mat);
    let mut pdf = pd * n.dot(w_out).max(0.0) * FRAC_1_PI;
    if ps > 0.0 {
        let c = reflect(w_in, n).dot(w_out);
        if c > 0.0 {
            pdf += ps * (mat.ns + 1.0) / TAU * c.powf(mat.ns);
        }
    }
    pdf
}

/// Draw an outgoing direction from the diffuse/specular mixture; the returned
/// pdf is the full mixture density at the drawn direction.
pub fn sample_brdf(mat: &Material, n: &Vec3, w_in: &Vec3, rng: &mut RngStream) -> (Vec3, f64) {
    let (_, ps) = lobe_weights(mat);
    let w_out = if ps > 0.0 && rng.uniform() < ps {
        let (u1, u2) = (rng.uniform(), rng.uniform());
        let cos_a = u1.powf(1.0 / (mat.ns + 1.0));
        let sin_a = (1.0 - cos_a * cos_a).max(0.0).sqrt();
        let phi = TAU * u2;
        from_local(&reflect(w_in, n), sin_a * phi.cos(), sin_a * phi.sin(), cos_a)
    } else {
        sample_cosine(n, rng).0
    };
    (w_out, pdf_brdf(mat, n, w_in, &w_out))
}

/// Directional albedo check helper: ∫ f_r cos dω for a fixed incident direction,
/// by Monte Carlo with the mixture sampler.
pub fn albedo_estimate(mat: &Material, n: &Vec3, w_in: &Vec3, rng: &mut RngStream, samples: usize) -> f64 {
    let mut acc = 0.0;
    for _ in 0..samples {
        let (w, pdf) = sample_brdf(mat, n, w_in, rng);
        acc += eval_brdf(mat, n, w_in, &w) * n.dot(&w).max(0.0) / pdf;
    }
    acc / samples as f64
}
