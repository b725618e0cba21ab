//! JSON weight files with base64-encoded little-endian `f64` arrays.

use std::path::Path;

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine as _;
use serde::{Deserialize, Serialize};

use super::mlp::{Mlp, ProxyArch};
use super::ProxyParams;
use crate::design::DesignTemplate;
use crate::error::{Error, Result};

const FORMAT: &str = "photonpress-proxy";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct LayerFile {
    rows: usize,
    cols: usize,
    weights: String,
    bias: String,
}

#[derive(Serialize, Deserialize)]
struct ProxyFile {
    format: String,
    version: u32,
    arch: ProxyArch,
    bounds: Vec<[f64; 2]>,
    scale: f64,
    template_hash: String,
    reference_irradiance: f64,
    layers: Vec<LayerFile>,
}

fn encode(v: &[f64]) -> String {
    let bytes: Vec<u8> = v.iter().flat_map(|x| x.to_le_bytes()).collect();
    B64.encode(bytes)
}

fn decode(s: &str, expected: usize, path: &Path) -> Result<Vec<f64>> {
    let bytes = B64.decode(s).map_err(|e| Error::parse(path, format!("bad base64: {e}")))?;
    if bytes.len() != expected * 8 {
        return Err(Error::parse(
            path,
            format!("array holds {} bytes, expected {}", bytes.len(), expected * 8),
        ));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect())
}

impl ProxyParams {
    pub fn to_json(&self) -> Result<String> {
        let layers = self
            .mlp
            .layer_offsets()
            .into_iter()
            .map(|(off, n_in, n_out)| LayerFile {
                rows: n_out,
                cols: n_in,
                weights: encode(&self.mlp.params[off..off + n_in * n_out]),
                bias: encode(&self.mlp.params[off + n_in * n_out..off + n_in * n_out + n_out]),
            })
            .collect();
        let file = ProxyFile {
            format: FORMAT.into(),
            version: VERSION,
            arch: self.mlp.arch,
            bounds: self.bounds.clone(),
            scale: self.scale,
            template_hash: self.template_hash.clone(),
            reference_irradiance: self.reference_irradiance,
            layers,
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        let file: ProxyFile = serde_json::from_str(text).map_err(|e| Error::parse(path, e.to_string()))?;
        if file.format != FORMAT || file.version != VERSION {
            return Err(Error::parse(
                path,
                format!("unsupported proxy file {} v{}", file.format, file.version),
            ));
        }
        let arch = file.arch;
        if arch.input_dim != 3 + file.bounds.len() {
            return Err(Error::ProxyMismatch(format!(
                "{}: input width {} does not match {} design parameters",
                path.display(),
                arch.input_dim,
                file.bounds.len()
            )));
        }
        let sizes = arch.sizes();
        if file.layers.len() + 1 != sizes.len() {
            return Err(Error::parse(path, "layer count does not match the architecture"));
        }
        let mut params = Vec::with_capacity(arch.param_count());
        for (layer, w) in file.layers.iter().zip(sizes.windows(2)) {
            if layer.cols != w[0] || layer.rows != w[1] {
                return Err(Error::parse(path, "layer shape does not match the architecture"));
            }
            params.extend(decode(&layer.weights, w[0] * w[1], path)?);
            params.extend(decode(&layer.bias, w[1], path)?);
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::parse(path, "non-finite weight"));
        }
        ProxyParams::new(
            Mlp { arch, params },
            file.bounds,
            file.scale,
            file.template_hash,
            file.reference_irradiance,
        )
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, path)
    }

    /// Load and verify that the file belongs to `template`.
    pub fn load_for(path: impl AsRef<Path>, template: &DesignTemplate) -> Result<Self> {
        let p = Self::load(path)?;
        p.check_template(template)?;
        Ok(p)
    }
}
