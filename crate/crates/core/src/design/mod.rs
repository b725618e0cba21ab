//! Parametric design spaces and the meshes they produce.

pub mod library;
mod material;
mod mesh;
pub mod obj;
mod template;

pub use material::Material;
pub use mesh::{sample_surface, shell_mass_properties, InertiaMode, MeshInstance, SurfacePoint, Vec3};
pub use template::{instantiate, DesignTemplate, MaterialBinding};
