//! Training sets of (light direction, design) → (force, torque) rows.
//!
//! A dataset is a CSV table plus a JSON sidecar (same stem, `.json`) that
//! records where the rows came from so later runs can append to it.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::estimator::{estimate_force_torque, ForceTorqueSample, StandardError};
use super::tracer::{LightingCondition, TracerConfig};
use crate::design::{DesignTemplate, Vec3};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, RngStream};

/// Uniform direction on the unit sphere.
pub fn uniform_sphere(rng: &mut RngStream) -> Vec3 {
    let z = 2.0 * rng.uniform() - 1.0;
    let phi = TAU * rng.uniform();
    let r = (1.0 - z * z).max(0.0).sqrt();
    Vec3::new(r * phi.cos(), r * phi.sin(), z)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub template_name: String,
    pub template_hash: String,
    pub param_bounds: Vec<[f64; 2]>,
    pub tracer: TracerConfig,
    pub seed: u64,
    pub irradiance: f64,
    pub rows: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub n_params: usize,
    pub rows: Vec<ForceTorqueSample>,
}

/// CSV header for a design space with `n_params` parameters.
pub fn header(n_params: usize) -> String {
    let mut h = String::from("omega_x,omega_y,omega_z");
    for i in 0..n_params {
        let _ = write!(h, ",theta_{i}");
    }
    h.push_str(",Fx,Fy,Fz,Tx,Ty,Tz,stderr_F,stderr_T");
    h
}

fn row_line(s: &ForceTorqueSample) -> String {
    let mut line = String::new();
    let (sf, st) = s.stderr.map(|e| (e.force_norm(), e.torque_norm())).unwrap_or((0.0, 0.0));
    let tail = [sf, st];
    let values = s
        .omega
        .iter()
        .chain(s.theta.iter())
        .chain(s.force.iter())
        .chain(s.torque.iter())
        .chain(tail.iter());
    for (k, v) in values.enumerate() {
        if k > 0 {
            line.push(',');
        }
        let _ = write!(line, "{v}");
    }
    line
}

/// Row `index` of the dataset seeded by `seed`: direction, design, estimate.
pub fn generate_row(
    template: &DesignTemplate,
    index: usize,
    seed: u64,
    irradiance: f64,
    cfg: &TracerConfig,
) -> Result<ForceTorqueSample> {
    let mut rng = RngStream::with_stream(derive_seed(seed, "dataset/inputs"), index as u64);
    let omega = uniform_sphere(&mut rng);
    let theta: Vec<f64> = template.param_bounds.iter().map(|b| rng.uniform_range(b[0], b[1])).collect();
    let mesh = template.instantiate(&theta)?;
    let light = LightingCondition::new(omega, irradiance)?;
    let row_cfg = TracerConfig {
        seed: derive_seed(seed, &format!("dataset/row/{index}")),
        ..cfg.clone()
    };
    let mut s = estimate_force_torque(&mesh, &light, &row_cfg)?;
    s.theta = theta;
    Ok(s)
}

/// Rows `start..start + count`.
pub fn generate_rows(
    template: &DesignTemplate,
    start: usize,
    count: usize,
    seed: u64,
    irradiance: f64,
    cfg: &TracerConfig,
) -> Result<Vec<ForceTorqueSample>> {
    (start..start + count)
        .map(|i| generate_row(template, i, seed, irradiance, cfg))
        .collect()
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// Write a fresh dataset of `count` rows to `path` and its sidecar.
pub fn generate_dataset(
    template: &DesignTemplate,
    count: usize,
    seed: u64,
    irradiance: f64,
    cfg: &TracerConfig,
    path: impl AsRef<Path>,
) -> Result<DatasetMeta> {
    if count == 0 {
        return Err(Error::InvalidArgument("dataset row count must be at least 1".into()));
    }
    template.validate()?;
    let path = path.as_ref();
    let rows = generate_rows(template, 0, count, seed, irradiance, cfg)?;
    let mut text = header(template.n_params());
    text.push('\n');
    for r in &rows {
        text.push_str(&row_line(r));
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))?;
    let meta = DatasetMeta {
        template_name: template.name.clone(),
        template_hash: template.hash(),
        param_bounds: template.param_bounds.clone(),
        tracer: cfg.clone(),
        seed,
        irradiance,
        rows: count,
    };
    write_meta(path, &meta)?;
    Ok(meta)
}

/// Append `count` rows to an existing dataset, continuing its row sequence.
pub fn append_dataset(template: &DesignTemplate, count: usize, path: impl AsRef<Path>) -> Result<DatasetMeta> {
    let path = path.as_ref();
    let mut meta = read_meta(path)?;
    if meta.template_hash != template.hash() {
        return Err(Error::InvalidArgument(format!(
            "{}: dataset was generated from a different template ({})",
            path.display(),
            meta.template_name
        )));
    }
    let rows = generate_rows(template, meta.rows, count, meta.seed, meta.irradiance, &meta.tracer)?;
    let mut text = String::new();
    for r in &rows {
        text.push_str(&row_line(r));
        text.push('\n');
    }
    use std::io::Write;
    let mut f = std::fs::OpenOptions::new()
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))?;
    meta.rows += count;
    write_meta(path, &meta)?;
    Ok(meta)
}

fn write_meta(path: &Path, meta: &DatasetMeta) -> Result<()> {
    let side = sidecar_path(path);
    let text = serde_json::to_string_pretty(meta)?;
    std::fs::write(&side, text).map_err(|e| Error::io(&side, e))
}

pub fn read_meta(path: impl AsRef<Path>) -> Result<DatasetMeta> {
    let side = sidecar_path(path.as_ref());
    let text = std::fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(&side, e.to_string()))
}

impl Dataset {
    pub fn new(n_params: usize, rows: Vec<ForceTorqueSample>) -> Result<Self> {
        for r in &rows {
            if r.theta.len() != n_params {
                return Err(Error::Dimension {
                    what: "dataset row theta",
                    expected: n_params,
                    got: r.theta.len(),
                });
            }
        }
        Ok(Self { n_params, rows })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut text = header(self.n_params);
        text.push('\n');
        for r in &self.rows {
            text.push_str(&row_line(r));
            text.push('\n');
        }
        text
    }

    pub fn parse_csv(text: &str, origin: &Path) -> Result<Self> {
        let mut lines = text.lines();
        let head = lines.next().ok_or_else(|| Error::parse(origin, "empty file"))?;
        let cols: Vec<&str> = head.split(',').map(str::trim).collect();
        if cols.len() < 11 {
            return Err(Error::parse(origin, "header has too few columns"));
        }
        let n_params = cols.len() - 11;
        if head.trim() != header(n_params) {
            return Err(Error::parse(origin, format!("unexpected header `{head}`")));
        }
        let mut rows = Vec::new();
        for (ln, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let vals = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|e| Error::parse(origin, format!("line {}: {e}", ln + 2)))?;
            if vals.len() != cols.len() {
                return Err(Error::parse(
                    origin,
                    format!("line {}: expected {} values, got {}", ln + 2, cols.len(), vals.len()),
                ));
            }
            let k = 3 + n_params;
            let sf = vals[k + 6];
            let st = vals[k + 7];
            rows.push(ForceTorqueSample {
                omega: [vals[0], vals[1], vals[2]],
                theta: vals[3..k].to_vec(),
                force: [vals[k], vals[k + 1], vals[k + 2]],
                torque: [vals[k + 3], vals[k + 4], vals[k + 5]],
                // Only the norms survive the CSV; spread them evenly.
                stderr: Some(StandardError {
                    force: [sf / 3f64.sqrt(); 3],
                    torque: [st / 3f64.sqrt(); 3],
                }),
            });
        }
        Ok(Self { n_params, rows })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_csv(&text, path)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    /// Split off the trailing `1 - fraction` of rows as a test set.
    pub fn split(&self, fraction: f64) -> (Dataset, Dataset) {
        let n_train = ((self.rows.len() as f64) * fraction).round() as usize;
        let n_train = n_train.min(self.rows.len());
        (
            Dataset {
                n_params: self.n_params,
                rows: self.rows[..n_train].to_vec(),
            },
            Dataset {
                n_params: self.n_params,
                rows: self.rows[n_train..].to_vec(),
            },
        )
    }
}
