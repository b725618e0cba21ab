//! Parameterized trajectory problems and their discrete-adjoint gradient.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::loss::Loss;
use crate::dynamics::attitude::normalize_vjp;
use crate::dynamics::{axpy, rk4_stages, Dynamics, PropagationConfig, Quat, State, Trajectory, STATE_DIM};
use crate::error::{check_dim, Error, Result};

/// Default checkpoint spacing of the adjoint pass.
pub const CHECKPOINT_EVERY: usize = 64;

/// What a free parameter controls.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "binding", rename_all = "snake_case")]
pub enum Binding {
    /// Component `index` of the design vector fed to the force model.
    Design { index: usize },
    /// Gravitational parameter of the central body.
    CentralGm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Parameter {
    #[serde(flatten)]
    pub binding: Binding,
    pub bounds: [f64; 2],
}

/// One observed or commanded trajectory sharing the problem's parameters.
#[derive(Clone, Debug)]
pub struct Case {
    pub z0: State,
    pub loss: Loss,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Storage {
    /// Keep every state from the forward pass.
    Full,
    /// Keep every `k`-th state and recompute segments in the reverse pass.
    Checkpointed(usize),
}

impl Default for Storage {
    fn default() -> Self {
        Storage::Checkpointed(CHECKPOINT_EVERY)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckpointStats {
    pub steps: usize,
    pub stored_states: usize,
    pub recomputed_steps: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientReport {
    pub loss: f64,
    /// `dL/dx` in physical parameter units.
    pub gradient: Vec<f64>,
    /// `dL/du` in normalized `[-1, 1]` units.
    pub gradient_normalized: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub finite_difference: Option<Vec<f64>>,
    pub checkpoints: CheckpointStats,
}

/// Loss of a set of cases as a function of the free parameters.
#[derive(Clone)]
pub struct Problem {
    pub dynamics: Dynamics,
    pub cfg: PropagationConfig,
    /// Design vector; entries bound to parameters are overwritten.
    pub theta: Vec<f64>,
    pub parameters: Vec<Parameter>,
    pub cases: Vec<Case>,
}

impl Problem {
    pub fn validate(&self) -> Result<()> {
        check_dim("theta", self.dynamics.model.design_dim(), self.theta.len())?;
        self.cfg.steps()?;
        if self.cases.is_empty() {
            return Err(Error::InvalidArgument("problem needs at least one case".into()));
        }
        for p in &self.parameters {
            if !(p.bounds[0] < p.bounds[1]) {
                return Err(Error::InvalidArgument(format!("bad parameter bounds {:?}", p.bounds)));
            }
            match p.binding {
                Binding::Design { index } if index >= self.theta.len() => {
                    return Err(Error::InvalidArgument(format!(
                        "design index {index} outside a {}-D design space",
                        self.theta.len()
                    )))
                }
                Binding::CentralGm if !(p.bounds[0] > 0.0) => {
                    return Err(Error::InvalidArgument("GM bounds must be positive".into()))
                }
                _ => {}
            }
        }
        for c in &self.cases {
            c.z0.validate()?;
            c.loss.validate()?;
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.parameters.len()
    }

    /// Current values of the free parameters.
    pub fn current(&self) -> Vec<f64> {
        self.parameters
            .iter()
            .map(|p| match p.binding {
                Binding::Design { index } => self.theta[index],
                Binding::CentralGm => self.dynamics.env.mu,
            })
            .collect()
    }

    pub fn normalize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.parameters)
            .map(|(v, p)| 2.0 * (v - p.bounds[0]) / (p.bounds[1] - p.bounds[0]) - 1.0)
            .collect()
    }

    pub fn denormalize(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(&self.parameters)
            .map(|(v, p)| (p.bounds[0] + 0.5 * (v + 1.0) * (p.bounds[1] - p.bounds[0])).clamp(p.bounds[0], p.bounds[1]))
            .collect()
    }

    /// Project onto the parameter bounds.
    pub fn clip(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.parameters)
            .map(|(v, p)| v.clamp(p.bounds[0], p.bounds[1]))
            .collect()
    }

    /// Dynamics and design vector with the free parameters set to `x`.
    pub fn bind(&self, x: &[f64]) -> Result<(Dynamics, Vec<f64>)> {
        check_dim("parameter vector", self.dim(), x.len())?;
        if let Some(v) = x.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite parameter {v}")));
        }
        let mut dynamics = self.dynamics.clone();
        let mut theta = self.theta.clone();
        for (v, p) in x.iter().zip(&self.parameters) {
            match p.binding {
                Binding::Design { index } => theta[index] = *v,
                Binding::CentralGm => dynamics.env.mu = *v,
            }
        }
        Ok((dynamics, theta))
    }

    /// The problem on the first `steps` steps of its horizon.
    pub fn truncated(&self, steps: usize) -> Result<Problem> {
        let n = self.cfg.steps()?;
        if steps == 0 || steps > n {
            return Err(Error::InvalidArgument(format!("cannot keep {steps} of {n} steps")));
        }
        let mut p = self.clone();
        p.cfg.t1 = self.cfg.time(steps);
        for c in &mut p.cases {
            c.loss = c.loss.truncate(steps + 1)?;
        }
        Ok(p)
    }

    /// Trajectories of every case at `x`.
    pub fn simulate(&self, x: &[f64]) -> Result<Vec<Trajectory>> {
        let (dynamics, theta) = self.bind(x)?;
        self.cases
            .par_iter()
            .map(|c| crate::dynamics::propagate(&dynamics, &c.z0, &self.cfg, &theta))
            .collect()
    }

    /// Loss without the reverse pass.
    pub fn loss(&self, x: &[f64]) -> Result<f64> {
        let (dynamics, theta) = self.bind(x)?;
        let losses: Vec<f64> = self
            .cases
            .par_iter()
            .map(|c| forward(&dynamics, &theta, &self.cfg, c, None).map(|(l, _)| l))
            .collect::<Result<_>>()?;
        Ok(losses.iter().sum())
    }

    /// Loss and `dL/dx` by the discrete adjoint.
    pub fn gradient(&self, x: &[f64], storage: Storage) -> Result<GradientReport> {
        let (dynamics, theta) = self.bind(x)?;
        let parts: Vec<CaseGradient> = self
            .cases
            .par_iter()
            .map(|c| case_gradient(&dynamics, &theta, &self.cfg, c, storage))
            .collect::<Result<_>>()?;
        let mut loss = 0.0;
        let mut theta_bar = vec![0.0; theta.len()];
        let mut mu_bar = 0.0;
        let mut stats = CheckpointStats::default();
        for p in &parts {
            loss += p.loss;
            for (a, b) in theta_bar.iter_mut().zip(&p.theta_bar) {
                *a += b;
            }
            mu_bar += p.mu_bar;
            stats.steps += p.stats.steps;
            stats.stored_states += p.stats.stored_states;
            stats.recomputed_steps += p.stats.recomputed_steps;
        }
        let gradient: Vec<f64> = self
            .parameters
            .iter()
            .map(|p| match p.binding {
                Binding::Design { index } => theta_bar[index],
                Binding::CentralGm => mu_bar,
            })
            .collect();
        let gradient_normalized = gradient
            .iter()
            .zip(&self.parameters)
            .map(|(g, p)| g * 0.5 * (p.bounds[1] - p.bounds[0]))
            .collect();
        Ok(GradientReport {
            loss,
            gradient,
            gradient_normalized,
            finite_difference: None,
            checkpoints: stats,
        })
    }

    /// Central differences with step `rel_step · (hi − lo)` per parameter.
    pub fn finite_difference(&self, x: &[f64], rel_step: f64) -> Result<Vec<f64>> {
        (0..self.dim())
            .into_par_iter()
            .map(|i| {
                let b = self.parameters[i].bounds;
                let h = rel_step * (b[1] - b[0]);
                let mut p = x.to_vec();
                let mut m = x.to_vec();
                p[i] += h;
                m[i] -= h;
                Ok((self.loss(&p)? - self.loss(&m)?) / (2.0 * h))
            })
            .collect()
    }

    /// Adjoint gradient together with its finite-difference reference.
    pub fn gradient_report(&self, x: &[f64], storage: Storage, fd_step: Option<f64>) -> Result<GradientReport> {
        let mut r = self.gradient(x, storage)?;
        if let Some(h) = fd_step {
            r.finite_difference = Some(self.finite_difference(x, h)?);
        }
        Ok(r)
    }
}

struct CaseGradient {
    loss: f64,
    theta_bar: Vec<f64>,
    mu_bar: f64,
    stats: CheckpointStats,
}

/// Forward pass accumulating the loss; stores every `every`-th state.
fn forward(
    dynamics: &Dynamics,
    theta: &[f64],
    cfg: &PropagationConfig,
    case: &Case,
    every: Option<usize>,
) -> Result<(f64, Vec<[f64; STATE_DIM]>)> {
    let n = cfg.steps()?;
    let times: Vec<f64> = (0..=n).map(|k| cfg.time(k)).collect();
    let loss = case.loss.prepare(&times)?;
    let mut z = case.z0.to_array();
    let mut stored = Vec::new();
    let mut total = loss.term(0, &z);
    if every.is_some() {
        stored.push(z);
    }
    for k in 0..n {
        z = crate::dynamics::rk4_step(dynamics, times[k], &z, theta, cfg.step)?;
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                step: k + 1,
                what: "state".into(),
            });
        }
        total += loss.term(k + 1, &z);
        if let Some(e) = every {
            if (k + 1) % e == 0 {
                stored.push(z);
            }
        }
    }
    Ok((total, stored))
}

/// Cotangent of `z_k` and accumulated parameter cotangents for one RK4 step
/// `z_{k+1} = normalize(z_k + h/6 (k1 + 2 k2 + 2 k3 + k4))`.
fn step_vjp(
    dynamics: &Dynamics,
    t: f64,
    z: &[f64; STATE_DIM],
    theta: &[f64],
    h: f64,
    lambda: &[f64; STATE_DIM],
    theta_bar: &mut [f64],
    mu_bar: &mut f64,
) -> Result<[f64; STATE_DIM]> {
    let [k1, k2, k3, k4] = rk4_stages(dynamics, t, z, theta, h)?;
    let raw: [f64; STATE_DIM] = std::array::from_fn(|i| z[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));

    let mut raw_bar = *lambda;
    let q_raw = Quat::new(raw[6], raw[7], raw[8], raw[9]);
    let qb = normalize_vjp(&q_raw, &Quat::new(lambda[6], lambda[7], lambda[8], lambda[9]));
    raw_bar[6..10].copy_from_slice(qb.as_slice());

    let mut z_bar = raw_bar;
    let mut acc = |r: crate::dynamics::RhsVjp, z_bar: &mut [f64; STATE_DIM]| {
        for i in 0..STATE_DIM {
            z_bar[i] += r.state[i];
        }
        for (a, b) in theta_bar.iter_mut().zip(&r.theta) {
            *a += b;
        }
        *mu_bar += r.mu;
        r.state
    };
    let c4: [f64; STATE_DIM] = raw_bar.map(|v| v * h / 6.0);
    let mut c3: [f64; STATE_DIM] = raw_bar.map(|v| v * h / 3.0);
    let mut c2 = c3;
    let mut c1 = c4;

    let s4 = acc(dynamics.vjp(t + h, &axpy(z, &k3, h), theta, &c4)?, &mut z_bar);
    for i in 0..STATE_DIM {
        c3[i] += h * s4[i];
    }
    let s3 = acc(dynamics.vjp(t + 0.5 * h, &axpy(z, &k2, 0.5 * h), theta, &c3)?, &mut z_bar);
    for i in 0..STATE_DIM {
        c2[i] += 0.5 * h * s3[i];
    }
    let s2 = acc(dynamics.vjp(t + 0.5 * h, &axpy(z, &k1, 0.5 * h), theta, &c2)?, &mut z_bar);
    for i in 0..STATE_DIM {
        c1[i] += 0.5 * h * s2[i];
    }
    acc(dynamics.vjp(t, z, theta, &c1)?, &mut z_bar);
    Ok(z_bar)
}

fn case_gradient(
    dynamics: &Dynamics,
    theta: &[f64],
    cfg: &PropagationConfig,
    case: &Case,
    storage: Storage,
) -> Result<CaseGradient> {
    let n = cfg.steps()?;
    let every = match storage {
        Storage::Full => 1,
        Storage::Checkpointed(k) if k >= 1 => k,
        Storage::Checkpointed(_) => return Err(Error::InvalidArgument("checkpoint spacing must be >= 1".into())),
    };
    let (total, stored) = forward(dynamics, theta, cfg, case, Some(every))?;
    let times: Vec<f64> = (0..=n).map(|k| cfg.time(k)).collect();
    let loss = case.loss.prepare(&times)?;
    let mut stats = CheckpointStats {
        steps: n,
        stored_states: stored.len(),
        recomputed_steps: 0,
    };

    let mut theta_bar = vec![0.0; theta.len()];
    let mut mu_bar = 0.0;
    let mut lambda = [0.0; STATE_DIM];
    let mut segment: Vec<[f64; STATE_DIM]> = Vec::with_capacity(every + 1);
    let n_segments = n.div_ceil(every);
    for s in (0..n_segments).rev() {
        let start = s * every;
        let end = (start + every).min(n);
        segment.clear();
        segment.push(stored[s]);
        if every > 1 {
            for k in start..end {
                let z = crate::dynamics::rk4_step(dynamics, times[k], segment.last().expect("segment"), theta, cfg.step)?;
                segment.push(z);
            }
            stats.recomputed_steps += end - start;
        }
        let z_end = if every == 1 { stored[end] } else { segment[end - start] };
        if end == n {
            if let Some(g) = loss.gradient(n, &z_end) {
                lambda = g;
            }
        }
        for k in (start..end).rev() {
            let z = &segment[k - start];
            lambda = step_vjp(dynamics, times[k], z, theta, cfg.step, &lambda, &mut theta_bar, &mut mu_bar)?;
            if let Some(g) = loss.gradient(k, z) {
                for i in 0..STATE_DIM {
                    lambda[i] += g[i];
                }
            }
            if lambda.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    step: k,
                    what: "adjoint".into(),
                });
            }
        }
    }
    Ok(CaseGradient {
        loss: total,
        theta_bar,
        mu_bar,
        stats,
    })
}
