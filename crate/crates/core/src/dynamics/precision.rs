//! Point-mass propagation generic over the floating-point width, used to show
//! how 32-bit arithmetic loses small perturbations.

use num_traits::Float;

use crate::design::Vec3;

fn accel<F: Float>(mu: F, r: &[F; 3], extra: &[F; 3]) -> [F; 3] {
    let r2 = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
    let inv3 = F::one() / (r2 * r2.sqrt());
    std::array::from_fn(|i| extra[i] - mu * r[i] * inv3)
}

fn deriv<F: Float>(mu: F, y: &[F; 6], extra: &[F; 3]) -> [F; 6] {
    let a = accel(mu, &[y[0], y[1], y[2]], extra);
    [y[3], y[4], y[5], a[0], a[1], a[2]]
}

fn shift<F: Float>(y: &[F; 6], k: &[F; 6], h: F) -> [F; 6] {
    std::array::from_fn(|i| y[i] + h * k[i])
}

/// RK4 two-body propagation with a constant inertial perturbation, every
/// operation carried out in `F`.
pub fn propagate_point_mass<F: Float>(mu: f64, r0: Vec3, v0: Vec3, extra: Vec3, step: f64, steps: usize) -> [f64; 6] {
    let c = |x: f64| F::from(x).expect("representable");
    let mu = c(mu);
    let extra = [c(extra.x), c(extra.y), c(extra.z)];
    let h = c(step);
    let half = c(0.5);
    let two = c(2.0);
    let sixth = h / c(6.0);
    let mut y = [c(r0.x), c(r0.y), c(r0.z), c(v0.x), c(v0.y), c(v0.z)];
    for _ in 0..steps {
        let k1 = deriv(mu, &y, &extra);
        let k2 = deriv(mu, &shift(&y, &k1, half * h), &extra);
        let k3 = deriv(mu, &shift(&y, &k2, half * h), &extra);
        let k4 = deriv(mu, &shift(&y, &k3, h), &extra);
        y = std::array::from_fn(|i| y[i] + sixth * (k1[i] + two * k2[i] + two * k3[i] + k4[i]));
    }
    y.map(|v| v.to_f64().expect("finite"))
}

/// Endpoint position difference between 32- and 64-bit runs [m].
pub fn precision_deviation(mu: f64, r0: Vec3, v0: Vec3, extra: Vec3, step: f64, steps: usize) -> f64 {
    let a = propagate_point_mass::<f32>(mu, r0, v0, extra, step, steps);
    let b = propagate_point_mass::<f64>(mu, r0, v0, extra, step, steps);
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}
