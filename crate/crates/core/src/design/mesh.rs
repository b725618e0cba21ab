use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::Material;
use crate::error::{Error, Result};
use crate::rng::RngStream;

pub type Vec3 = Vector3<f64>;

/// How the mass properties of an instantiated design are obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum InertiaMode {
    /// Uniform-density thin shell over the surface.
    Computed,
    Explicit {
        inertia: [[f64; 3]; 3],
        com: [f64; 3],
    },
}

/// A concrete triangle mesh with per-face materials and mass properties.
#[derive(Clone, Debug)]
pub struct MeshInstance {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
    pub materials: Vec<Material>,
    pub normals: Vec<Vec3>,
    pub areas: Vec<f64>,
    /// `cdf[i]` is the summed area of faces `0..=i`.
    pub cdf: Vec<f64>,
    pub mass: f64,
    pub com: Vec3,
    pub inertia: Matrix3<f64>,
    pub bounding_radius: f64,
    pub(crate) tris: TriangleSoa,
}

/// Point on the mesh surface.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfacePoint {
    pub position: Vec3,
    pub face: usize,
    pub normal: Vec3,
    pub material: Material,
}

/// Struct-of-arrays triangle storage used by the brute-force intersector.
#[derive(Clone, Debug, Default)]
pub(crate) struct TriangleSoa {
    pub v0: [Vec<f64>; 3],
    pub e1: [Vec<f64>; 3],
    pub e2: [Vec<f64>; 3],
}

impl TriangleSoa {
    fn build(vertices: &[Vec3], triangles: &[[usize; 3]]) -> Self {
        let mut soa = TriangleSoa::default();
        for t in triangles {
            let a = vertices[t[0]];
            let e1 = vertices[t[1]] - a;
            let e2 = vertices[t[2]] - a;
            for k in 0..3 {
                soa.v0[k].push(a[k]);
                soa.e1[k].push(e1[k]);
                soa.e2[k].push(e2[k]);
            }
        }
        soa
    }

    pub fn len(&self) -> usize {
        self.v0[0].len()
    }
}

impl MeshInstance {
    pub fn new(
        vertices: Vec<Vec3>,
        triangles: Vec<[usize; 3]>,
        materials: Vec<Material>,
        mass: f64,
        inertia_mode: &InertiaMode,
    ) -> Result<Self> {
        if materials.len() != triangles.len() {
            return Err(Error::Dimension {
                what: "per-face materials",
                expected: triangles.len(),
                got: materials.len(),
            });
        }
        if let Some(bad) = triangles.iter().flatten().find(|&&i| i >= vertices.len()) {
            return Err(Error::InvalidTemplate(format!(
                "triangle references vertex {bad}, mesh has {}",
                vertices.len()
            )));
        }
        let mut normals = Vec::with_capacity(triangles.len());
        let mut areas = Vec::with_capacity(triangles.len());
        for t in &triangles {
            let cross = (vertices[t[1]] - vertices[t[0]]).cross(&(vertices[t[2]] - vertices[t[0]]));
            let norm = cross.norm();
            areas.push(0.5 * norm);
            normals.push(if norm > 0.0 { cross / norm } else { Vec3::z() });
        }
        let mut acc = 0.0;
        let cdf: Vec<f64> = areas
            .iter()
            .map(|a| {
                acc += a;
                acc
            })
            .collect();
        if !(acc > 0.0) {
            return Err(Error::DegenerateMesh);
        }
        let tris = TriangleSoa::build(&vertices, &triangles);
        let mut mesh = MeshInstance {
            vertices,
            triangles,
            materials,
            normals,
            areas,
            cdf,
            mass,
            com: Vec3::zeros(),
            inertia: Matrix3::identity(),
            bounding_radius: 0.0,
            tris,
        };
        let (com, inertia) = match inertia_mode {
            InertiaMode::Computed => shell_mass_properties(&mesh)?,
            InertiaMode::Explicit { inertia, com } => (Vec3::from(*com), Matrix3::from_row_slice(&inertia.concat())),
        };
        mesh.com = com;
        mesh.inertia = inertia;
        mesh.bounding_radius = mesh.vertices.iter().map(|v| (v - com).norm()).fold(0.0, f64::max);
        Ok(mesh)
    }

    pub fn total_area(&self) -> f64 {
        *self.cdf.last().expect("mesh has faces")
    }

    pub fn face_count(&self) -> usize {
        self.triangles.len()
    }

    /// Face whose cumulative-area interval contains `u * total_area`.
    pub fn face_for(&self, u: f64) -> usize {
        let target = u * self.total_area();
        let idx = self.cdf.partition_point(|&c| c <= target);
        let mut idx = idx.min(self.cdf.len() - 1);
        // skip zero-area faces that share a cumulative value
        while self.areas[idx] == 0.0 && idx + 1 < self.areas.len() {
            idx += 1;
        }
        idx
    }

    /// Uniform point on face `face` from two uniforms (square-root barycentric map).
    pub fn point_on_face(&self, face: usize, u1: f64, u2: f64) -> SurfacePoint {
        let [i, j, k] = self.triangles[face];
        let s = u1.sqrt();
        let (a, b, c) = (1.0 - s, s * (1.0 - u2), s * u2);
        SurfacePoint {
            position: self.vertices[i] * a + self.vertices[j] * b + self.vertices[k] * c,
            face,
            normal: self.normals[face],
            material: self.materials[face],
        }
    }

    /// Area-proportional face choice followed by a uniform point in the face.
    pub fn sample_point(&self, u_face: f64, u1: f64, u2: f64) -> SurfacePoint {
        self.point_on_face(self.face_for(u_face), u1, u2)
    }

    /// Like [`Self::sample_point`], but the position of `u_face` within the
    /// chosen face's area interval is reused as the first in-face uniform, so
    /// stratifying `u_face` also stratifies points inside each face.
    pub fn sample_point_folded(&self, u_face: f64, u2: f64) -> SurfacePoint {
        let face = self.face_for(u_face);
        let hi = self.cdf[face];
        let lo = hi - self.areas[face];
        let u1 = ((u_face * self.total_area() - lo) / self.areas[face]).clamp(0.0, 1.0);
        self.point_on_face(face, u1, u2)
    }

    /// `count` independent area-uniform surface samples.
    pub fn sample_surface(&self, rng: &mut RngStream, count: usize) -> Result<Vec<SurfacePoint>> {
        if count == 0 {
            return Err(Error::InvalidArgument("sample count must be at least 1".into()));
        }
        Ok((0..count)
            .map(|_| {
                let (u, u1, u2) = (rng.uniform(), rng.uniform(), rng.uniform());
                self.sample_point(u, u1, u2)
            })
            .collect())
    }

    pub fn mass_properties(&self) -> (Vec3, Matrix3<f64>) {
        (self.com, self.inertia)
    }
}

/// Free-function form of [`MeshInstance::sample_surface`].
pub fn sample_surface(mesh: &MeshInstance, rng: &mut RngStream, count: usize) -> Result<Vec<SurfacePoint>> {
    mesh.sample_surface(rng, count)
}

/// Centre of mass and inertia tensor (about the centre of mass) of a
/// uniform thin shell of total mass `mesh.mass` spread over the surface.
pub fn shell_mass_properties(mesh: &MeshInstance) -> Result<(Vec3, Matrix3<f64>)> {
    let area = mesh.total_area();
    if !(area > 0.0) {
        return Err(Error::DegenerateMesh);
    }
    let sigma = mesh.mass / area;
    let mut first = Vec3::zeros();
    // second moment  ∫ x xᵀ dA  about the origin
    let mut second = Matrix3::zeros();
    for (t, &a) in mesh.triangles.iter().zip(&mesh.areas) {
        let v = [mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]];
        let s = v[0] + v[1] + v[2];
        first += s * (a / 3.0);
        let mut c = s * s.transpose();
        for vi in &v {
            c += vi * vi.transpose();
        }
        second += c * (a / 12.0);
    }
    let com = first / area;
    let origin = (Matrix3::identity() * second.trace() - second) * sigma;
    let shift = (Matrix3::identity() * com.norm_squared() - com * com.transpose()) * mesh.mass;
    let inertia = origin - shift;
    Ok((com, 0.5 * (inertia + inertia.transpose())))
}
