//! Outer optimization over normalized parameters with projection onto bounds.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::problem::{Problem, Storage};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Adam,
    /// Projected gradient descent with Armijo backtracking.
    GradientDescent,
    /// Projected L-BFGS with Armijo backtracking.
    Lbfgs,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub method: Method,
    /// Step size in normalized units (`λ_o`).
    pub learning_rate: f64,
    /// Outer iterations (`n_o`).
    pub steps: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Learning rate at the last step as a fraction of the initial one (Adam).
    pub final_lr_fraction: f64,
    /// Stop once the best loss improved by less than this over `patience` steps.
    pub tolerance: f64,
    pub patience: usize,
    /// Stop as soon as the loss falls below this value.
    pub target_loss: Option<f64>,
    pub memory: usize,
    pub storage: Storage,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            method: Method::Adam,
            learning_rate: 1e-2,
            steps: 200,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            final_lr_fraction: 1.0,
            tolerance: 0.0,
            patience: 20,
            target_loss: None,
            memory: 8,
            storage: Storage::default(),
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || !(self.final_lr_fraction > 0.0) || self.steps == 0 {
            return Err(Error::InvalidArgument(
                "optimizer needs learning_rate > 0, final_lr_fraction > 0 and steps >= 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    MaxSteps,
    Converged,
    TargetReached,
    /// No descent step could be found along the search direction.
    Stalled,
    /// A non-finite loss or state was met; the best finite iterate is kept.
    Diverged,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizeResult {
    /// Best parameters seen, physical units.
    pub x: Vec<f64>,
    pub loss: f64,
    pub status: Status,
    /// Loss at each accepted iterate, starting with the initial point.
    pub history: Vec<f64>,
    /// Parameters at each accepted iterate.
    pub iterates: Vec<Vec<f64>>,
    pub evaluations: usize,
}

struct Tracker {
    best_x: Vec<f64>,
    best_loss: f64,
    history: Vec<f64>,
    iterates: Vec<Vec<f64>>,
    evaluations: usize,
}

impl Tracker {
    fn record(&mut self, x: &[f64], loss: f64) {
        self.history.push(loss);
        self.iterates.push(x.to_vec());
        if loss < self.best_loss {
            self.best_loss = loss;
            self.best_x = x.to_vec();
        }
    }

    fn finish(self, status: Status) -> OptimizeResult {
        OptimizeResult {
            x: self.best_x,
            loss: self.best_loss,
            status,
            history: self.history,
            iterates: self.iterates,
            evaluations: self.evaluations,
        }
    }

    fn stop(&self, cfg: &OptimizerConfig) -> Option<Status> {
        if let Some(t) = cfg.target_loss {
            if self.best_loss <= t {
                return Some(Status::TargetReached);
            }
        }
        if cfg.tolerance > 0.0 && self.history.len() > cfg.patience {
            let n = self.history.len();
            let before = self.history[..n - cfg.patience].iter().cloned().fold(f64::INFINITY, f64::min);
            if before - self.best_loss < cfg.tolerance {
                return Some(Status::Converged);
            }
        }
        None
    }
}

fn clip_unit(u: &mut [f64]) {
    for v in u {
        *v = v.clamp(-1.0, 1.0);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn is_divergence(e: &Error) -> bool {
    matches!(e, Error::NonFinite { .. } | Error::BelowSurface { .. })
}

/// Minimize the problem's loss from `x0` (physical units, clipped to bounds).
pub fn optimize(problem: &Problem, x0: &[f64], cfg: &OptimizerConfig) -> Result<OptimizeResult> {
    problem.validate()?;
    cfg.validate()?;
    let x0 = problem.clip(x0);
    let mut u = problem.normalize(&x0);
    let grad = |u: &[f64]| -> Result<(f64, Vec<f64>)> {
        let r = problem.gradient(&problem.denormalize(u), cfg.storage)?;
        Ok((r.loss, r.gradient_normalized))
    };
    let (l0, g0) = grad(&u)?;
    let mut t = Tracker {
        best_x: x0.clone(),
        best_loss: f64::INFINITY,
        history: Vec::new(),
        iterates: Vec::new(),
        evaluations: 1,
    };
    if !l0.is_finite() {
        return Err(Error::NonFinite {
            step: 0,
            what: "initial loss".into(),
        });
    }
    t.record(&x0, l0);
    if let Some(s) = t.stop(cfg) {
        return Ok(t.finish(s));
    }
    let status = match cfg.method {
        Method::Adam => adam(problem, cfg, &mut u, g0, &mut t, &grad),
        Method::GradientDescent | Method::Lbfgs => line_search_method(problem, cfg, &mut u, l0, g0, &mut t, &grad),
    }?;
    Ok(t.finish(status))
}

/// Optimize on horizons of `first`, `2·first`, ... steps up to the full
/// horizon, warm-starting each stage from the previous optimum. Long
/// horizons make trajectory losses oscillate in the parameters; short ones
/// keep the first stage inside the basin of the truth.
pub fn optimize_progressive(problem: &Problem, x0: &[f64], cfg: &OptimizerConfig, first: usize) -> Result<OptimizeResult> {
    let n = problem.cfg.steps()?;
    if first == 0 {
        return Err(Error::InvalidArgument("first horizon must be >= 1 step".into()));
    }
    let mut horizons = vec![];
    let mut h = first.min(n);
    while h < n {
        horizons.push(h);
        h *= 2;
    }
    horizons.push(n);
    let mut x = x0.to_vec();
    let mut history = Vec::new();
    let mut iterates = Vec::new();
    let mut evaluations = 0;
    let mut last = None;
    for &h in &horizons {
        let stage = if h == n { problem.clone() } else { problem.truncated(h)? };
        let r = optimize(&stage, &x, cfg)?;
        x = r.x.clone();
        history.extend_from_slice(&r.history);
        iterates.extend(r.iterates.iter().cloned());
        evaluations += r.evaluations;
        last = Some(r);
    }
    let last = last.expect("at least one stage");
    Ok(OptimizeResult {
        x: last.x,
        loss: last.loss,
        status: last.status,
        history,
        iterates,
        evaluations,
    })
}

type GradFn<'a> = dyn Fn(&[f64]) -> Result<(f64, Vec<f64>)> + 'a;

fn adam(problem: &Problem, cfg: &OptimizerConfig, u: &mut [f64], g0: Vec<f64>, t: &mut Tracker, grad: &GradFn) -> Result<Status> {
    let d = u.len();
    let mut m = vec![0.0; d];
    let mut v = vec![0.0; d];
    let mut g = g0;
    let decay = cfg.final_lr_fraction.powf(1.0 / (cfg.steps.max(2) - 1) as f64);
    let mut lr = cfg.learning_rate;
    for step in 1..=cfg.steps {
        let b1t = 1.0 - cfg.beta1.powi(step as i32);
        let b2t = 1.0 - cfg.beta2.powi(step as i32);
        for i in 0..d {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            u[i] -= lr * (m[i] / b1t) / ((v[i] / b2t).sqrt() + cfg.epsilon);
        }
        clip_unit(u);
        lr *= decay;
        let x = problem.denormalize(u);
        t.evaluations += 1;
        match grad(u) {
            Ok((l, gn)) if l.is_finite() && gn.iter().all(|v| v.is_finite()) => {
                t.record(&x, l);
                g = gn;
            }
            Ok(_) => return Ok(Status::Diverged),
            Err(e) if is_divergence(&e) => return Ok(Status::Diverged),
            Err(e) => return Err(e),
        }
        if let Some(s) = t.stop(cfg) {
            return Ok(s);
        }
    }
    Ok(Status::MaxSteps)
}

fn line_search_method(
    problem: &Problem,
    cfg: &OptimizerConfig,
    u: &mut Vec<f64>,
    l0: f64,
    g0: Vec<f64>,
    t: &mut Tracker,
    grad: &GradFn,
) -> Result<Status> {
    let d = u.len();
    let mut l = l0;
    let mut g = g0;
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    for _ in 0..cfg.steps {
        // active bound constraints: drop components pushing outward
        let free: Vec<bool> = (0..d)
            .map(|i| !((u[i] <= -1.0 && g[i] > 0.0) || (u[i] >= 1.0 && g[i] < 0.0)))
            .collect();
        let gf: Vec<f64> = (0..d).map(|i| if free[i] { g[i] } else { 0.0 }).collect();
        if gf.iter().all(|v| *v == 0.0) {
            return Ok(Status::Converged);
        }
        let mut dir: Vec<f64> = match cfg.method {
            Method::Lbfgs if !history.is_empty() => two_loop(&gf, &history),
            _ => gf.iter().map(|v| -v).collect(),
        };
        for i in 0..d {
            if !free[i] {
                dir[i] = 0.0;
            }
        }
        if dot(&dir, &gf) >= 0.0 {
            dir = gf.iter().map(|v| -v).collect();
            history.clear();
        }
        // first step or plain descent: limit the largest move to the learning rate
        let mut alpha = if cfg.method == Method::Lbfgs && !history.is_empty() {
            1.0
        } else {
            let m = dir.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            cfg.learning_rate / m
        };
        let mut accepted = None;
        for _ in 0..40 {
            let mut trial: Vec<f64> = (0..d).map(|i| u[i] + alpha * dir[i]).collect();
            clip_unit(&mut trial);
            let step: Vec<f64> = (0..d).map(|i| trial[i] - u[i]).collect();
            if step.iter().all(|v| *v == 0.0) {
                break;
            }
            t.evaluations += 1;
            match grad(&trial) {
                Ok((lt, gt)) if lt.is_finite() && gt.iter().all(|v| v.is_finite()) => {
                    if lt <= l + 1e-4 * dot(&g, &step) {
                        accepted = Some((trial, lt, gt));
                        break;
                    }
                }
                Ok(_) => {}
                Err(e) if is_divergence(&e) => {}
                Err(e) => return Err(e),
            }
            alpha *= 0.5;
        }
        let Some((trial, lt, gt)) = accepted else {
            return Ok(Status::Stalled);
        };
        let s: Vec<f64> = (0..d).map(|i| trial[i] - u[i]).collect();
        let y: Vec<f64> = (0..d).map(|i| gt[i] - g[i]).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            history.push_back((s, y, 1.0 / sy));
            if history.len() > cfg.memory.max(1) {
                history.pop_front();
            }
        }
        *u = trial;
        l = lt;
        g = gt;
        t.record(&problem.denormalize(u), l);
        if let Some(s) = t.stop(cfg) {
            return Ok(s);
        }
    }
    Ok(Status::MaxSteps)
}

fn two_loop(g: &[f64], history: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = rho * dot(s, &q);
        for i in 0..q.len() {
            q[i] -= a * y[i];
        }
        alphas.push(a);
    }
    let (s, y, _) = history.back().expect("non-empty history");
    let gamma = dot(s, y) / dot(y, y);
    for v in &mut q {
        *v *= gamma;
    }
    for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &q);
        for i in 0..q.len() {
            q[i] += s[i] * (a - b);
        }
    }
    q.iter().map(|v| -v).collect()
}
