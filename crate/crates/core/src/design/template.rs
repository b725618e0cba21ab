use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::mesh::{InertiaMode, MeshInstance, Vec3};
use super::Material;
use crate::error::{check_dim, Error, Result};

/// Base material plus one linear delta per design parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaterialBinding {
    pub base: Material,
    /// Either empty (material independent of the design) or one entry per parameter.
    #[serde(default)]
    pub deltas: Vec<Material>,
}

impl MaterialBinding {
    pub fn fixed(base: Material) -> Self {
        Self {
            base,
            deltas: Vec::new(),
        }
    }
}

/// Parametric design space: a base mesh whose vertices and materials move
/// linearly with the design vector `theta`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignTemplate {
    #[serde(default)]
    pub name: String,
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[usize; 3]>,
    #[serde(default)]
    pub param_names: Vec<String>,
    pub param_bounds: Vec<[f64; 2]>,
    /// One flat `3 * n_vertices` array per parameter.
    #[serde(default)]
    pub displacements: Vec<Vec<f64>>,
    pub materials: Vec<MaterialBinding>,
    /// Index into `materials` for every triangle.
    pub face_materials: Vec<usize>,
    pub mass: f64,
    pub inertia: InertiaMode,
}

impl DesignTemplate {
    pub fn n_params(&self) -> usize {
        self.param_bounds.len()
    }

    pub fn validate(&self) -> Result<()> {
        let nv = self.vertices.len();
        let nd = self.n_params();
        if self.triangles.is_empty() {
            return Err(Error::InvalidTemplate("template has no triangles".into()));
        }
        if let Some(t) = self.triangles.iter().find(|t| t.iter().any(|&i| i >= nv)) {
            return Err(Error::InvalidTemplate(format!(
                "triangle {t:?} references a vertex outside 0..{nv}"
            )));
        }
        for (i, [lo, hi]) in self.param_bounds.iter().enumerate() {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidTemplate(format!(
                    "parameter {i} has bounds [{lo}, {hi}]; need lo < hi"
                )));
            }
        }
        if !self.displacements.is_empty() || nd > 0 {
            check_dim("displacement fields", nd, self.displacements.len())?;
        }
        for field in &self.displacements {
            check_dim("displacement field length", 3 * nv, field.len())?;
        }
        check_dim("face material indices", self.triangles.len(), self.face_materials.len())?;
        if let Some(&m) = self.face_materials.iter().find(|&&m| m >= self.materials.len()) {
            return Err(Error::InvalidTemplate(format!(
                "face material index {m} out of range (have {})",
                self.materials.len()
            )));
        }
        for b in &self.materials {
            if !b.deltas.is_empty() {
                check_dim("material deltas", nd, b.deltas.len())?;
            }
        }
        if !self.param_names.is_empty() {
            check_dim("parameter names", nd, self.param_names.len())?;
        }
        if !(self.mass > 0.0) {
            return Err(Error::InvalidTemplate(format!("mass must be positive, got {}", self.mass)));
        }
        Ok(())
    }

    pub fn check_theta(&self, theta: &[f64]) -> Result<()> {
        check_dim("design parameters", self.n_params(), theta.len())?;
        for (i, (&v, [lo, hi])) in theta.iter().zip(&self.param_bounds).enumerate() {
            if !(v >= *lo && v <= *hi) {
                return Err(Error::OutOfBounds {
                    index: i,
                    value: v,
                    lo: *lo,
                    hi: *hi,
                });
            }
        }
        Ok(())
    }

    /// Project `theta` onto the parameter box.
    pub fn clip(&self, theta: &[f64]) -> Vec<f64> {
        theta
            .iter()
            .zip(&self.param_bounds)
            .map(|(v, [lo, hi])| v.clamp(*lo, *hi))
            .collect()
    }

    /// Vertices for design `theta`, without building the full mesh.
    pub fn vertices_at(&self, theta: &[f64]) -> Result<Vec<Vec3>> {
        check_dim("design parameters", self.n_params(), theta.len())?;
        let mut out: Vec<Vec3> = self.vertices.iter().map(|v| Vec3::from(*v)).collect();
        for (field, &t) in self.displacements.iter().zip(theta) {
            if t == 0.0 {
                continue;
            }
            for (v, d) in out.iter_mut().zip(field.chunks_exact(3)) {
                v.x += t * d[0];
                v.y += t * d[1];
                v.z += t * d[2];
            }
        }
        Ok(out)
    }

    pub fn materials_at(&self, theta: &[f64]) -> Vec<Material> {
        let resolved: Vec<Material> = self
            .materials
            .iter()
            .map(|b| b.deltas.iter().zip(theta).fold(b.base, |m, (d, &t)| m.axpy(t, d)).clamped())
            .collect();
        self.face_materials.iter().map(|&i| resolved[i]).collect()
    }

    /// Concrete mesh for design `theta`.
    pub fn instantiate(&self, theta: &[f64]) -> Result<MeshInstance> {
        self.check_theta(theta)?;
        let vertices = self.vertices_at(theta)?;
        MeshInstance::new(
            vertices,
            self.triangles.clone(),
            self.materials_at(theta),
            self.mass,
            &self.inertia,
        )
    }

    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("template serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let t: DesignTemplate = serde_json::from_str(s)?;
        t.validate()?;
        Ok(t)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let t: DesignTemplate = serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))?;
        t.validate()?;
        Ok(t)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    /// Midpoint of the parameter box.
    pub fn center(&self) -> Vec<f64> {
        self.param_bounds.iter().map(|[lo, hi]| 0.5 * (lo + hi)).collect()
    }
}

pub fn instantiate(template: &DesignTemplate, theta: &[f64]) -> Result<MeshInstance> {
    template.instantiate(theta)
}
