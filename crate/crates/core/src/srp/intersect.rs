//! Brute-force ray/triangle intersection over every face of a mesh.
//!
//! Each design instance is a different world, so no acceleration structure
//! is built; rays are tested against all triangles (Möller-Trumbore form).

use rayon::prelude::*;

use crate::design::{MeshInstance, Vec3};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hit {
    pub face: usize,
    pub distance: f64,
    /// Barycentric coordinates of the hit along edges 1 and 2.
    pub barycentric: (f64, f64),
}

/// Minimum hit distance for rays leaving the surface of `mesh`.
pub fn ray_epsilon(mesh: &MeshInstance) -> f64 {
    1e-6 * mesh.bounding_radius.max(f64::MIN_POSITIVE)
}

#[inline(always)]
fn test_face(mesh: &MeshInstance, i: usize, o: &[f64; 3], d: &[f64; 3]) -> Option<(f64, f64, f64)> {
    let s = &mesh.tris;
    let e1 = [s.e1[0][i], s.e1[1][i], s.e1[2][i]];
    let e2 = [s.e2[0][i], s.e2[1][i], s.e2[2][i]];
    let p = [
        d[1] * e2[2] - d[2] * e2[1],
        d[2] * e2[0] - d[0] * e2[2],
        d[0] * e2[1] - d[1] * e2[0],
    ];
    let det = e1[0] * p[0] + e1[1] * p[1] + e1[2] * p[2];
    if det == 0.0 {
        return None;
    }
    let inv = 1.0 / det;
    let tv = [o[0] - s.v0[0][i], o[1] - s.v0[1][i], o[2] - s.v0[2][i]];
    let u = (tv[0] * p[0] + tv[1] * p[1] + tv[2] * p[2]) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = [
        tv[1] * e1[2] - tv[2] * e1[1],
        tv[2] * e1[0] - tv[0] * e1[2],
        tv[0] * e1[1] - tv[1] * e1[0],
    ];
    let v = (d[0] * q[0] + d[1] * q[1] + d[2] * q[2]) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = (e2[0] * q[0] + e2[1] * q[1] + e2[2] * q[2]) * inv;
    Some((t, u, v))
}

/// Nearest hit with distance greater than `t_min`.
pub fn intersect_nearest(mesh: &MeshInstance, origin: &Vec3, dir: &Vec3, t_min: f64) -> Option<Hit> {
    let o = [origin.x, origin.y, origin.z];
    let d = [dir.x, dir.y, dir.z];
    let mut best: Option<Hit> = None;
    let mut best_t = f64::INFINITY;
    for i in 0..mesh.tris.len() {
        if let Some((t, u, v)) = test_face(mesh, i, &o, &d) {
            if t > t_min && t < best_t {
                best_t = t;
                best = Some(Hit {
                    face: i,
                    distance: t,
                    barycentric: (u, v),
                });
            }
        }
    }
    best
}

/// Whether anything lies along the ray beyond `t_min`.
pub fn occluded(mesh: &MeshInstance, origin: &Vec3, dir: &Vec3, t_min: f64) -> bool {
    let o = [origin.x, origin.y, origin.z];
    let d = [dir.x, dir.y, dir.z];
    (0..mesh.tris.len()).any(|i| matches!(test_face(mesh, i, &o, &d), Some((t, _, _)) if t > t_min))
}

/// Nearest hit for every ray, evaluated in parallel.
pub fn intersect_batch(mesh: &MeshInstance, origins: &[Vec3], directions: &[Vec3]) -> Vec<Option<Hit>> {
    let eps = ray_epsilon(mesh);
    origins
        .par_iter()
        .zip(directions.par_iter())
        .with_min_len(256)
        .map(|(o, d)| intersect_nearest(mesh, o, d, eps))
        .collect()
}
