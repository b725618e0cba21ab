//! Static geometry import from Wavefront OBJ plus a JSON material sidecar.

use std::path::Path;

use serde::Deserialize;

use super::mesh::InertiaMode;
use super::template::{DesignTemplate, MaterialBinding};
use super::Material;
use crate::error::{Error, Result};

/// Material assignment for the half-open face range `faces[0]..faces[1]`.
#[derive(Clone, Debug, Deserialize)]
pub struct FaceRange {
    pub faces: [usize; 2],
    pub material: Material,
}

#[derive(Clone, Debug, Deserialize)]
pub struct ObjSidecar {
    pub mass: f64,
    #[serde(default = "computed")]
    pub inertia: InertiaMode,
    pub materials: Vec<FaceRange>,
}

fn computed() -> InertiaMode {
    InertiaMode::Computed
}

/// Positions and faces of an OBJ document; polygons are fan-triangulated.
pub fn parse_obj(text: &str, origin: &Path) -> Result<(Vec<[f64; 3]>, Vec<[usize; 3]>)> {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("v") => {
                let xyz: Vec<f64> = tok
                    .take(3)
                    .map(|s| s.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| Error::parse(origin, format!("line {}: {e}", lineno + 1)))?;
                if xyz.len() != 3 {
                    return Err(Error::parse(
                        origin,
                        format!("line {}: vertex needs 3 coordinates", lineno + 1),
                    ));
                }
                vertices.push([xyz[0], xyz[1], xyz[2]]);
            }
            Some("f") => {
                let mut idx = Vec::new();
                for t in tok {
                    let first = t.split('/').next().unwrap_or("");
                    let i: i64 = first
                        .parse()
                        .map_err(|_| Error::parse(origin, format!("line {}: bad face index {t:?}", lineno + 1)))?;
                    let resolved = if i > 0 {
                        i - 1
                    } else if i < 0 {
                        vertices.len() as i64 + i
                    } else {
                        -1
                    };
                    if resolved < 0 || resolved as usize >= vertices.len() {
                        return Err(Error::parse(
                            origin,
                            format!("line {}: face index {i} out of range", lineno + 1),
                        ));
                    }
                    idx.push(resolved as usize);
                }
                if idx.len() < 3 {
                    return Err(Error::parse(origin, format!("line {}: face needs 3 vertices", lineno + 1)));
                }
                for k in 1..idx.len() - 1 {
                    triangles.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            _ => {}
        }
    }
    Ok((vertices, triangles))
}

/// Build a parameter-free template from OBJ text and its sidecar.
pub fn template_from_obj(name: &str, obj: &str, sidecar: &ObjSidecar, origin: &Path) -> Result<DesignTemplate> {
    let (vertices, triangles) = parse_obj(obj, origin)?;
    let mut face_materials = vec![usize::MAX; triangles.len()];
    let mut materials = Vec::new();
    for range in &sidecar.materials {
        let [start, end] = range.faces;
        if start > end || end > triangles.len() {
            return Err(Error::InvalidTemplate(format!(
                "material range {start}..{end} exceeds {} faces",
                triangles.len()
            )));
        }
        materials.push(MaterialBinding::fixed(range.material));
        face_materials[start..end].fill(materials.len() - 1);
    }
    if let Some(face) = face_materials.iter().position(|&m| m == usize::MAX) {
        return Err(Error::InvalidTemplate(format!("face {face} has no material assigned")));
    }
    let t = DesignTemplate {
        name: name.to_string(),
        vertices,
        triangles,
        param_names: Vec::new(),
        param_bounds: Vec::new(),
        displacements: Vec::new(),
        materials,
        face_materials,
        mass: sidecar.mass,
        inertia: sidecar.inertia.clone(),
    };
    t.validate()?;
    Ok(t)
}

pub fn load_obj(obj_path: impl AsRef<Path>, sidecar_path: impl AsRef<Path>) -> Result<DesignTemplate> {
    let (obj_path, sidecar_path) = (obj_path.as_ref(), sidecar_path.as_ref());
    let obj = std::fs::read_to_string(obj_path).map_err(|e| Error::io(obj_path, e))?;
    let side = std::fs::read_to_string(sidecar_path).map_err(|e| Error::io(sidecar_path, e))?;
    let sidecar: ObjSidecar = serde_json::from_str(&side).map_err(|e| Error::parse(sidecar_path, e.to_string()))?;
    let name = obj_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    template_from_obj(&name, &obj, &sidecar, obj_path)
}

#[cfg(test)]
mod tests {
    use super::*;

    const QUAD: &str = "# unit square\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1/1/1 2/2/2 3/3/3 4/4/4\n";

    #[test]
    fn polygon_is_fan_triangulated() {
        let (v, t) = parse_obj(QUAD, Path::new("q.obj")).unwrap();
        assert_eq!(v.len(), 4);
        assert_eq!(t, vec![[0, 1, 2], [0, 2, 3]]);
    }

    #[test]
    fn negative_indices_are_relative() {
        let (_, t) = parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n", Path::new("t.obj")).unwrap();
        assert_eq!(t, vec![[0, 1, 2]]);
    }

    #[test]
    fn uncovered_face_is_rejected() {
        let sidecar = ObjSidecar {
            mass: 1.0,
            inertia: InertiaMode::Computed,
            materials: vec![FaceRange {
                faces: [0, 1],
                material: Material::lambertian(0.5),
            }],
        };
        let err = template_from_obj("q", QUAD, &sidecar, Path::new("q.obj")).unwrap_err();
        assert!(err.to_string().contains("face 1"));
    }

    #[test]
    fn sidecar_ranges_assign_materials() {
        let sidecar: ObjSidecar = serde_json::from_str(
            r#"{"mass": 2.0, "materials": [
                {"faces": [0, 1], "material": {"kd": 0.5, "ks": 0.0, "ns": 0.0}},
                {"faces": [1, 2], "material": {"kd": 0.0, "ks": 0.9, "ns": 50.0}}]}"#,
        )
        .unwrap();
        let t = template_from_obj("q", QUAD, &sidecar, Path::new("q.obj")).unwrap();
        let mesh = t.instantiate(&[]).unwrap();
        assert_eq!(mesh.materials[1].ks, 0.9);
        assert!((mesh.total_area() - 1.0).abs() < 1e-15);
    }
}
