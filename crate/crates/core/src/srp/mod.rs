//! Radiation-pressure simulation by Monte-Carlo path tracing.

pub mod brdf;
pub mod dataset;
pub mod estimator;
pub mod forcemap;
pub mod intersect;
pub mod tracer;

pub use brdf::{eval_brdf, pdf_brdf, reflect, sample_brdf};
pub use dataset::{generate_dataset, Dataset, DatasetMeta};
pub use estimator::{estimate_for_design, estimate_force_torque, ForceTorqueSample, StandardError};
pub use forcemap::{force_map, pixel_direction, ForceMap, MapChannel};
pub use intersect::{intersect_batch, intersect_nearest, Hit};
pub use tracer::{light_to_force, trace_radiance, IncidentLight, LightingCondition, TracerConfig, SPEED_OF_LIGHT};

#[cfg(test)]
mod tests;
