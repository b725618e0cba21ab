//! Trajectory losses. Every loss is a sum of per-step terms `ℓ_k(z_k)` whose
//! weights depend only on the time grid, so it can be accumulated during the
//! forward pass and differentiated step by step in the reverse pass.

use serde::{Deserialize, Serialize};

use crate::dynamics::{Trajectory, STATE_DIM};
use crate::error::{Error, Result};

/// Default collision-loss weights `(α_Post, α_N, α_Col)` and kernel width.
pub const COLLISION_WEIGHTS: (f64, f64, f64) = (2.0, 5.0, 17.0);
pub const COLLISION_SIGMA: f64 = 3.0 * 3600.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollisionWeights {
    pub post: f64,
    #[serde(rename = "final")]
    pub final_: f64,
    pub collision: f64,
}

impl Default for CollisionWeights {
    fn default() -> Self {
        Self {
            post: COLLISION_WEIGHTS.0,
            final_: COLLISION_WEIGHTS.1,
            collision: COLLISION_WEIGHTS.2,
        }
    }
}

/// Default weights of the full-state endpoint loss: positions in m,
/// velocities and angular rates scaled by 1000 s, quaternion components as is.
pub fn default_state_weights() -> [f64; STATE_DIM] {
    [1.0, 1.0, 1.0, 1e6, 1e6, 1e6, 1.0, 1.0, 1.0, 1.0, 1e6, 1e6, 1e6]
}

#[derive(Clone, Debug, PartialEq)]
pub enum Loss {
    /// `|r_N − target|`.
    EndpointPosition { target: [f64; 3] },
    /// `sqrt(Σ w_i (z_N,i − target_i)²)`.
    EndpointFullState {
        target: [f64; STATE_DIM],
        weights: [f64; STATE_DIM],
    },
    /// Mean angular-velocity magnitude over all steps.
    Stability,
    /// `α_Post d̄_Post + α_N d_N − α_Col d̄_Col` against a baseline.
    Collision {
        baseline: Trajectory,
        t_c: f64,
        sigma: f64,
        weights: CollisionWeights,
        /// Start of the post-manoeuvre window; `t_c + 2σ` when unset.
        post_start: Option<f64>,
    },
    /// Mean squared position deviation from a reference, every `stride` steps.
    Path { reference: Trajectory, stride: usize },
}

/// Per-step coefficients of a loss on a fixed time grid.
#[derive(Clone, Debug)]
pub struct PreparedLoss<'a> {
    loss: &'a Loss,
    coef: Vec<f64>,
    last: usize,
}

fn aligned(reference: &Trajectory, times: &[f64], what: &str) -> Result<()> {
    if reference.times.len() != times.len() {
        return Err(Error::InvalidArgument(format!(
            "{what} has {} samples, trajectory has {}",
            reference.times.len(),
            times.len()
        )));
    }
    for (a, b) in reference.times.iter().zip(times) {
        if (a - b).abs() > 1e-6 * (1.0 + b.abs()) {
            return Err(Error::InvalidArgument(format!("{what} is not time-aligned ({a} vs {b})")));
        }
    }
    Ok(())
}

fn pos_diff(z: &[f64; STATE_DIM], r: &[f64; STATE_DIM]) -> [f64; 3] {
    [z[0] - r[0], z[1] - r[1], z[2] - r[2]]
}

fn norm3(a: &[f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

impl Loss {
    pub fn validate(&self) -> Result<()> {
        match self {
            Loss::EndpointFullState { weights, .. } if weights.iter().any(|w| !(*w >= 0.0)) => {
                Err(Error::InvalidArgument("state weights must be >= 0".into()))
            }
            Loss::Collision { sigma, weights, .. } => {
                if !(*sigma > 0.0) {
                    return Err(Error::InvalidArgument(format!("kernel width must be positive, got {sigma}")));
                }
                if !(weights.post >= 0.0 && weights.final_ >= 0.0 && weights.collision >= 0.0) {
                    return Err(Error::InvalidArgument("collision weights must be >= 0".into()));
                }
                Ok(())
            }
            Loss::Path { stride: 0, .. } => Err(Error::InvalidArgument("path stride must be >= 1".into())),
            _ => Ok(()),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Loss::EndpointPosition { .. } => "endpoint_position",
            Loss::EndpointFullState { .. } => "endpoint_full_state",
            Loss::Stability => "stability",
            Loss::Collision { .. } => "collision",
            Loss::Path { .. } => "path",
        }
    }

    /// Bind the loss to a time grid `t_0..t_N`.
    pub fn prepare(&self, times: &[f64]) -> Result<PreparedLoss<'_>> {
        self.validate()?;
        if times.is_empty() {
            return Err(Error::InvalidArgument("empty trajectory".into()));
        }
        let n = times.len();
        let last = n - 1;
        let mut coef = vec![0.0; n];
        match self {
            Loss::EndpointPosition { .. } | Loss::EndpointFullState { .. } => coef[last] = 1.0,
            Loss::Stability => coef.fill(1.0 / n as f64),
            Loss::Collision {
                baseline,
                t_c,
                sigma,
                weights,
                post_start,
            } => {
                aligned(baseline, times, "collision baseline")?;
                let kernel: Vec<f64> = times.iter().map(|t| (-0.5 * ((t - t_c) / sigma).powi(2)).exp()).collect();
                let ksum: f64 = kernel.iter().sum();
                let start = post_start.unwrap_or(t_c + 2.0 * sigma);
                let n_post = times.iter().filter(|t| **t >= start).count();
                for (k, t) in times.iter().enumerate() {
                    if ksum > 0.0 {
                        coef[k] -= weights.collision * kernel[k] / ksum;
                    }
                    if *t >= start {
                        coef[k] += weights.post / n_post as f64;
                    }
                }
                coef[last] += weights.final_;
            }
            Loss::Path { reference, stride } => {
                aligned(reference, times, "path reference")?;
                let picked: Vec<usize> = (1..n).filter(|k| k % stride == 0 || *k == last).collect();
                for &k in &picked {
                    coef[k] = 1.0 / picked.len().max(1) as f64;
                }
            }
        }
        Ok(PreparedLoss { loss: self, coef, last })
    }

    /// The same loss restricted to the first `len` samples, for fitting on a
    /// shorter horizon. Endpoint losses have no meaningful prefix.
    pub fn truncate(&self, len: usize) -> Result<Loss> {
        let cut = |t: &Trajectory| -> Result<Trajectory> {
            if len == 0 || len > t.len() {
                return Err(Error::InvalidArgument(format!("cannot keep {len} of {} samples", t.len())));
            }
            Ok(Trajectory {
                times: t.times[..len].to_vec(),
                states: t.states[..len].to_vec(),
            })
        };
        Ok(match self {
            Loss::EndpointPosition { .. } | Loss::EndpointFullState { .. } => {
                return Err(Error::InvalidArgument(format!("{} loss cannot be truncated", self.kind())))
            }
            Loss::Stability => Loss::Stability,
            Loss::Collision {
                baseline,
                t_c,
                sigma,
                weights,
                post_start,
            } => Loss::Collision {
                baseline: cut(baseline)?,
                t_c: *t_c,
                sigma: *sigma,
                weights: *weights,
                post_start: *post_start,
            },
            Loss::Path { reference, stride } => Loss::Path {
                reference: cut(reference)?,
                stride: *stride,
            },
        })
    }

    /// Loss of a whole trajectory.
    pub fn evaluate(&self, traj: &Trajectory) -> Result<f64> {
        let p = self.prepare(&traj.times)?;
        Ok(traj.states.iter().enumerate().map(|(k, z)| p.term(k, z)).sum())
    }
}

impl PreparedLoss<'_> {
    pub fn coefficient(&self, k: usize) -> f64 {
        self.coef[k]
    }

    /// `ℓ_k(z)`.
    pub fn term(&self, k: usize, z: &[f64; STATE_DIM]) -> f64 {
        let c = self.coef[k];
        if c == 0.0 {
            return 0.0;
        }
        match self.loss {
            Loss::EndpointPosition { target } => norm3(&[z[0] - target[0], z[1] - target[1], z[2] - target[2]]),
            Loss::EndpointFullState { target, weights } => {
                let s: f64 = (0..STATE_DIM).map(|i| weights[i] * (z[i] - target[i]).powi(2)).sum();
                s.sqrt()
            }
            Loss::Stability => c * (z[10] * z[10] + z[11] * z[11] + z[12] * z[12]).sqrt(),
            Loss::Collision { baseline, .. } => c * norm3(&pos_diff(z, &baseline.states[k])),
            Loss::Path { reference, .. } => {
                let d = pos_diff(z, &reference.states[k]);
                c * (d[0] * d[0] + d[1] * d[1] + d[2] * d[2])
            }
        }
    }

    /// `∂ℓ_k/∂z`, or `None` when the term is identically zero at step `k`.
    /// Norm-based terms use the zero subgradient at the kink.
    pub fn gradient(&self, k: usize, z: &[f64; STATE_DIM]) -> Option<[f64; STATE_DIM]> {
        let c = self.coef[k];
        if c == 0.0 {
            return None;
        }
        let mut g = [0.0; STATE_DIM];
        let unit_into = |g: &mut [f64; STATE_DIM], d: [f64; 3], offset: usize, scale: f64| {
            let n = norm3(&d);
            if n > 0.0 {
                for i in 0..3 {
                    g[offset + i] = scale * d[i] / n;
                }
            }
        };
        match self.loss {
            Loss::EndpointPosition { target } => {
                unit_into(&mut g, [z[0] - target[0], z[1] - target[1], z[2] - target[2]], 0, 1.0);
            }
            Loss::EndpointFullState { target, weights } => {
                let s: f64 = (0..STATE_DIM)
                    .map(|i| weights[i] * (z[i] - target[i]).powi(2))
                    .sum::<f64>()
                    .sqrt();
                if s > 0.0 {
                    for i in 0..STATE_DIM {
                        g[i] = weights[i] * (z[i] - target[i]) / s;
                    }
                }
            }
            Loss::Stability => unit_into(&mut g, [z[10], z[11], z[12]], 10, c),
            Loss::Collision { baseline, .. } => unit_into(&mut g, pos_diff(z, &baseline.states[k]), 0, c),
            Loss::Path { reference, .. } => {
                let d = pos_diff(z, &reference.states[k]);
                for i in 0..3 {
                    g[i] = 2.0 * c * d[i];
                }
            }
        }
        Some(g)
    }

    pub fn last(&self) -> usize {
        self.last
    }
}

/// `|r_N − target|`.
pub fn loss_endpoint(traj: &Trajectory, target: [f64; 3]) -> Result<f64> {
    Loss::EndpointPosition { target }.evaluate(traj)
}

/// Mean of `|w_k|` over the trajectory.
pub fn loss_stability(traj: &Trajectory) -> Result<f64> {
    Loss::Stability.evaluate(traj)
}

/// Collision loss with the default weights and kernel width.
pub fn loss_collision(traj: &Trajectory, baseline: &Trajectory, t_c: f64) -> Result<f64> {
    Loss::Collision {
        baseline: baseline.clone(),
        t_c,
        sigma: COLLISION_SIGMA,
        weights: CollisionWeights::default(),
        post_start: None,
    }
    .evaluate(traj)
}
