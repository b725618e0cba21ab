//! Scalar-first unit quaternions and their derivatives.
//!
//! `R(q)` rotates body-frame vectors into the inertial frame; `T = Rᵀ` maps
//! inertial vectors into the body frame.

use nalgebra::{Matrix3, Vector4};

use crate::design::Vec3;

pub type Quat = Vector4<f64>;

pub fn identity() -> Quat {
    Quat::new(1.0, 0.0, 0.0, 0.0)
}

/// Rotation by `angle` about the unit `axis`.
pub fn from_axis_angle(axis: &Vec3, angle: f64) -> Quat {
    let a = axis.normalize();
    let (s, c) = (0.5 * angle).sin_cos();
    Quat::new(c, a.x * s, a.y * s, a.z * s)
}

pub fn rotation_matrix(q: &Quat) -> Matrix3<f64> {
    let (w, x, y, z) = (q[0], q[1], q[2], q[3]);
    Matrix3::new(
        1.0 - 2.0 * (y * y + z * z),
        2.0 * (x * y - w * z),
        2.0 * (x * z + w * y),
        2.0 * (x * y + w * z),
        1.0 - 2.0 * (x * x + z * z),
        2.0 * (y * z - w * x),
        2.0 * (x * z - w * y),
        2.0 * (y * z + w * x),
        1.0 - 2.0 * (x * x + y * y),
    )
}

/// `R(q) v` for a unit quaternion.
pub fn rotate(q: &Quat, v: &Vec3) -> Vec3 {
    let u = Vec3::new(q[1], q[2], q[3]);
    let t = u.cross(v) * 2.0;
    v + t * q[0] + u.cross(&t)
}

/// `R(q)ᵀ v`.
pub fn rotate_inverse(q: &Quat, v: &Vec3) -> Vec3 {
    rotate(&conjugate(q), v)
}

pub fn conjugate(q: &Quat) -> Quat {
    Quat::new(q[0], -q[1], -q[2], -q[3])
}

/// Hamilton product `a ⊗ b`.
pub fn multiply(a: &Quat, b: &Quat) -> Quat {
    Quat::new(
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    )
}

/// `exp` of the body-frame rotation vector `w t`, as a quaternion.
pub fn exp_map(w: &Vec3, t: f64) -> Quat {
    let n = w.norm();
    if n == 0.0 {
        return identity();
    }
    from_axis_angle(w, n * t)
}

/// `Ω(w)` with `q̇ = ½ Ω(w) q` for body-frame angular velocity `w`.
pub fn omega_matrix(w: &Vec3) -> nalgebra::Matrix4<f64> {
    nalgebra::Matrix4::new(
        0.0, -w.x, -w.y, -w.z, //
        w.x, 0.0, w.z, -w.y, //
        w.y, -w.z, 0.0, w.x, //
        w.z, w.y, -w.x, 0.0,
    )
}

/// `Ξ(q)` with `q̇ = ½ Ξ(q) w`.
pub fn xi_matrix(q: &Quat) -> nalgebra::Matrix4x3<f64> {
    nalgebra::Matrix4x3::new(
        -q[1], -q[2], -q[3], //
        q[0], -q[3], q[2], //
        q[3], q[0], -q[1], //
        -q[2], q[1], q[0],
    )
}

pub fn quaternion_rate(q: &Quat, w: &Vec3) -> Quat {
    omega_matrix(w) * q * 0.5
}

/// Cotangent of `q` for `p = R(q) v` given `p̄` (polynomial form, valid
/// on the unit sphere), returned together with the cotangent of `v`.
pub fn rotate_vjp(q: &Quat, v: &Vec3, p_bar: &Vec3) -> (Quat, Vec3) {
    let u = Vec3::new(q[1], q[2], q[3]);
    let q0_bar = 2.0 * u.cross(v).dot(p_bar);
    let u_bar = v.cross(p_bar) * (2.0 * q[0]) + (p_bar * u.dot(v) + v * u.dot(p_bar)) * 2.0 - u * (4.0 * v.dot(p_bar));
    let v_bar = rotate_inverse(q, p_bar);
    (Quat::new(q0_bar, u_bar.x, u_bar.y, u_bar.z), v_bar)
}

/// Cotangent of `q` for `p = R(q)ᵀ v`, plus the cotangent of `v`.
pub fn rotate_inverse_vjp(q: &Quat, v: &Vec3, p_bar: &Vec3) -> (Quat, Vec3) {
    let (c, v_bar) = rotate_vjp(&conjugate(q), v, p_bar);
    (Quat::new(c[0], -c[1], -c[2], -c[3]), v_bar)
}

/// Cotangent of `q` for `q̂ = q / |q|` given `q̂̄`.
pub fn normalize_vjp(q: &Quat, qhat_bar: &Quat) -> Quat {
    let n = q.norm();
    let qh = q / n;
    (qhat_bar - qh * qh.dot(qhat_bar)) / n
}
