//! Empirical-risk training with Adam, and held-out error evaluation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mlp::{Mlp, ProxyArch, Tape};
use super::ProxyParams;
use crate::design::DesignTemplate;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, RngStream};
use crate::srp::{Dataset, DatasetMeta};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub steps: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Fraction of rows used for training; the rest is the test split.
    pub train_fraction: f64,
    pub seed: u64,
    /// Learning rate at the last step relative to the first (geometric decay).
    pub final_lr_fraction: f64,
    /// Output scale is this factor times the largest training-set |F| or |τ|.
    pub scale_headroom: f64,
    /// Steps between loss-history records.
    pub eval_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            batch_size: 1024,
            steps: 20_000,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            train_fraction: 0.8,
            seed: 0,
            final_lr_fraction: 0.1,
            scale_headroom: 1.25,
            eval_every: 500,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::InvalidArgument("learning rate must be positive".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::InvalidArgument("train fraction must lie in (0, 1)".into()));
        }
        if self.batch_size == 0 || self.steps == 0 || self.eval_every == 0 {
            return Err(Error::InvalidArgument(
                "batch size, steps and eval interval must be positive".into(),
            ));
        }
        if !(self.final_lr_fraction > 0.0) || !(self.scale_headroom >= 1.0) {
            return Err(Error::InvalidArgument(
                "final_lr_fraction must be > 0 and scale_headroom >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Design space the proxy is trained for.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingDomain {
    pub bounds: Vec<[f64; 2]>,
    pub template_hash: String,
    pub reference_irradiance: f64,
}

impl TrainingDomain {
    pub fn from_template(template: &DesignTemplate, irradiance: f64) -> Self {
        Self {
            bounds: template.param_bounds.clone(),
            template_hash: template.hash(),
            reference_irradiance: irradiance,
        }
    }

    pub fn from_meta(meta: &DatasetMeta) -> Self {
        Self {
            bounds: meta.param_bounds.clone(),
            template_hash: meta.template_hash.clone(),
            reference_irradiance: meta.irradiance,
        }
    }
}

/// Mean loss (in scaled output units) recorded every `eval_every` steps.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub steps: Vec<usize>,
    pub train: Vec<f64>,
    pub test: Vec<f64>,
}

/// Relative errors `mean|P − y| / mean|y|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProxyError {
    pub force: f64,
    pub torque: f64,
    pub combined: f64,
}

struct Encoded {
    x: Vec<Vec<f64>>,
    y: Vec<[f64; 6]>,
}

fn encode(proxy_like: &ProxyParams, ds: &Dataset, rows: std::ops::Range<usize>, scale: f64) -> Result<Encoded> {
    let mut x = Vec::with_capacity(rows.len());
    let mut y = Vec::with_capacity(rows.len());
    for r in &ds.rows[rows] {
        x.push(proxy_like.encode_input(&r.omega.into(), &r.theta)?);
        let mut t = [0.0; 6];
        for k in 0..3 {
            t[k] = r.force[k] / scale;
            t[k + 3] = r.torque[k] / scale;
        }
        y.push(t);
    }
    Ok(Encoded { x, y })
}

fn residual_norm(out: &[f64], y: &[f64; 6]) -> f64 {
    out.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

fn mean_loss(mlp: &Mlp, data: &Encoded) -> f64 {
    if data.x.is_empty() {
        return f64::NAN;
    }
    let total: f64 = data
        .x
        .par_iter()
        .zip(data.y.par_iter())
        .with_min_len(256)
        .map(|(x, y)| residual_norm(&mlp.forward(x), y))
        .collect::<Vec<_>>()
        .iter()
        .sum();
    total / data.x.len() as f64
}

const GRAD_CHUNK: usize = 128;

/// Loss and gradient over `batch`, reduced over fixed-size chunks in order.
fn batch_gradient(mlp: &Mlp, data: &Encoded, batch: &[usize], grad: &mut [f64]) -> f64 {
    let parts: Vec<(f64, Vec<f64>)> = batch
        .par_chunks(GRAD_CHUNK)
        .map(|chunk| {
            let mut g = vec![0.0; grad.len()];
            let mut tape = Tape::default();
            let mut loss = 0.0;
            let mut cot = [0.0; 6];
            for &i in chunk {
                mlp.forward_tape(&data.x[i], &mut tape);
                let y = &data.y[i];
                let norm = residual_norm(&tape.out, y);
                loss += norm;
                if norm > 0.0 {
                    for k in 0..6 {
                        cot[k] = (tape.out[k] - y[k]) / norm;
                    }
                    mlp.backward_tape(&mut tape, &cot, Some(&mut g));
                }
            }
            (loss, g)
        })
        .collect();
    grad.iter_mut().for_each(|g| *g = 0.0);
    let mut loss = 0.0;
    for (l, g) in &parts {
        loss += l;
        for (a, b) in grad.iter_mut().zip(g) {
            *a += b;
        }
    }
    let inv = 1.0 / batch.len() as f64;
    grad.iter_mut().for_each(|g| *g *= inv);
    loss * inv
}

/// Fit a proxy of architecture `arch` to `dataset`.
pub fn train(
    dataset: &Dataset,
    domain: &TrainingDomain,
    arch: ProxyArch,
    cfg: &TrainConfig,
) -> Result<(ProxyParams, TrainHistory)> {
    cfg.validate()?;
    if dataset.is_empty() {
        return Err(Error::InvalidArgument("cannot train on an empty dataset".into()));
    }
    if dataset.n_params != domain.bounds.len() || arch.input_dim != 3 + dataset.n_params {
        return Err(Error::Dimension {
            what: "proxy input",
            expected: arch.input_dim,
            got: 3 + dataset.n_params,
        });
    }
    if dataset.len() < 2 * cfg.batch_size {
        return Err(Error::InvalidArgument(format!(
            "dataset has {} rows; at least twice the batch size ({}) is required",
            dataset.len(),
            cfg.batch_size
        )));
    }
    let n_train = ((dataset.len() as f64 * cfg.train_fraction).round() as usize).clamp(1, dataset.len());
    let max_mag = dataset.rows[..n_train]
        .iter()
        .map(|r| r.force_vec().norm().max(r.torque_vec().norm()))
        .fold(0.0, f64::max);
    let scale = if max_mag > 0.0 { max_mag * cfg.scale_headroom } else { 1.0 };

    let mut init_rng = RngStream::new(derive_seed(cfg.seed, "proxy/init"));
    let mlp = Mlp::random(arch, &mut init_rng);
    let mut proxy = ProxyParams::new(
        mlp,
        domain.bounds.clone(),
        scale,
        domain.template_hash.clone(),
        domain.reference_irradiance,
    )?;
    let train_set = encode(&proxy, dataset, 0..n_train, scale)?;
    let test_set = encode(&proxy, dataset, n_train..dataset.len(), scale)?;

    let n_p = arch.param_count();
    let (mut m, mut v) = (vec![0.0; n_p], vec![0.0; n_p]);
    let mut grad = vec![0.0; n_p];
    let mut order: Vec<usize> = (0..n_train).collect();
    let mut shuffle_rng = RngStream::new(derive_seed(cfg.seed, "proxy/shuffle"));
    shuffle_rng.shuffle(&mut order);
    let batch = cfg.batch_size.min(n_train);
    let mut cursor = 0;
    let mut history = TrainHistory::default();
    let mut window = 0.0;
    let mut window_n = 0;
    let decay = cfg.final_lr_fraction.ln() / cfg.steps as f64;
    for step in 0..cfg.steps {
        if cursor + batch > n_train {
            shuffle_rng.shuffle(&mut order);
            cursor = 0;
        }
        let idx = &order[cursor..cursor + batch];
        cursor += batch;
        let loss = batch_gradient(&proxy.mlp, &train_set, idx, &mut grad);
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::TrainingDiverged { step, loss });
        }
        window += loss;
        window_n += 1;
        let t = (step + 1) as i32;
        let lr = cfg.learning_rate * (decay * step as f64).exp();
        let (bc1, bc2) = (1.0 - cfg.beta1.powi(t), 1.0 - cfg.beta2.powi(t));
        for k in 0..n_p {
            m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * grad[k];
            v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * grad[k] * grad[k];
            proxy.mlp.params[k] -= lr * (m[k] / bc1) / ((v[k] / bc2).sqrt() + cfg.epsilon);
        }
        if (step + 1) % cfg.eval_every == 0 || step + 1 == cfg.steps {
            history.steps.push(step + 1);
            history.train.push(window / window_n as f64);
            history.test.push(mean_loss(&proxy.mlp, &test_set));
            window = 0.0;
            window_n = 0;
        }
    }
    Ok((proxy, history))
}

/// Relative error of `proxy` on `reference`, separately for force, torque
/// and the concatenated 6-vector.
pub fn eval_error(proxy: &ProxyParams, reference: &Dataset) -> Result<ProxyError> {
    if reference.is_empty() {
        return Err(Error::InvalidArgument("reference dataset is empty".into()));
    }
    let rows: Vec<[f64; 4]> = reference
        .rows
        .par_iter()
        .map(|r| {
            let (f, t) = proxy.forward(&r.omega.into(), &r.theta)?;
            let (fr, tr) = (r.force_vec(), r.torque_vec());
            let df = (f - fr).norm();
            let dt = (t - tr).norm();
            Ok([df, dt, fr.norm(), tr.norm()])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut s = [0.0; 6];
    for r in &rows {
        s[0] += r[0];
        s[1] += r[1];
        s[2] += r[2];
        s[3] += r[3];
        s[4] += (r[0] * r[0] + r[1] * r[1]).sqrt();
        s[5] += (r[2] * r[2] + r[3] * r[3]).sqrt();
    }
    let ratio = |a: f64, b: f64| {
        if b > 0.0 {
            a / b
        } else if a == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    };
    Ok(ProxyError {
        force: ratio(s[0], s[2]),
        torque: ratio(s[1], s[3]),
        combined: ratio(s[4], s[5]),
    })
}
