//! Fixed-step classical RK4 with quaternion renormalization after each step.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ode::{Dynamics, State, STATE_DIM};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagationConfig {
    pub t0: f64,
    pub t1: f64,
    #[serde(default = "default_step")]
    pub step: f64,
}

fn default_step() -> f64 {
    15.0
}

impl PropagationConfig {
    pub fn new(t0: f64, t1: f64, step: f64) -> Self {
        Self { t0, t1, step }
    }

    /// Number of steps; the span must be a whole number of steps.
    pub fn steps(&self) -> Result<usize> {
        if !(self.step > 0.0) || !(self.t1 > self.t0) {
            return Err(Error::InvalidArgument(format!(
                "need step > 0 and t1 > t0, got step {} on [{}, {}]",
                self.step, self.t0, self.t1
            )));
        }
        let n = (self.t1 - self.t0) / self.step;
        let rounded = n.round();
        if (n - rounded).abs() > 1e-9 * n.max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "span {} s is not a whole number of {} s steps",
                self.t1 - self.t0,
                self.step
            )));
        }
        Ok(rounded as usize)
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.step
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<[f64; STATE_DIM]>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> &[f64; STATE_DIM] {
        self.states.last().expect("non-empty trajectory")
    }

    pub fn state(&self, i: usize) -> State {
        State::from_array(&self.states[i])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,px,py,pz,vx,vy,vz,qw,qx,qy,qz,wx,wy,wz\n");
        for (t, z) in self.times.iter().zip(&self.states) {
            let _ = write!(out, "{t}");
            for v in z {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn parse_csv(text: &str, origin: &Path) -> Result<Self> {
        let mut lines = text.lines();
        let head = lines.next().ok_or_else(|| Error::parse(origin, "empty file"))?;
        if head.trim() != "t,px,py,pz,vx,vy,vz,qw,qx,qy,qz,wx,wy,wz" {
            return Err(Error::parse(origin, "unexpected trajectory header"));
        }
        let mut traj = Trajectory {
            times: Vec::new(),
            states: Vec::new(),
        };
        for (ln, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let vals = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::parse(origin, format!("line {}: {e}", ln + 2)))?;
            if vals.len() != 1 + STATE_DIM {
                return Err(Error::parse(origin, format!("line {}: expected 14 values", ln + 2)));
            }
            traj.times.push(vals[0]);
            traj.states.push(vals[1..].try_into().expect("13 values"));
        }
        Ok(traj)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_csv(&text, path)
    }
}

#[inline]
pub(crate) fn axpy(z: &[f64; STATE_DIM], k: &[f64; STATE_DIM], h: f64) -> [f64; STATE_DIM] {
    std::array::from_fn(|i| z[i] + h * k[i])
}

/// Renormalize the quaternion block in place; returns the norm before.
#[inline]
pub(crate) fn renormalize(z: &mut [f64; STATE_DIM]) -> f64 {
    let n = (z[6] * z[6] + z[7] * z[7] + z[8] * z[8] + z[9] * z[9]).sqrt();
    for v in &mut z[6..10] {
        *v /= n;
    }
    n
}

/// The four RK4 stage derivatives at `(t, z)`.
pub(crate) fn rk4_stages(
    dynamics: &Dynamics,
    t: f64,
    z: &[f64; STATE_DIM],
    theta: &[f64],
    h: f64,
) -> Result<[[f64; STATE_DIM]; 4]> {
    let k1 = dynamics.rhs(t, z, theta)?;
    let k2 = dynamics.rhs(t + 0.5 * h, &axpy(z, &k1, 0.5 * h), theta)?;
    let k3 = dynamics.rhs(t + 0.5 * h, &axpy(z, &k2, 0.5 * h), theta)?;
    let k4 = dynamics.rhs(t + h, &axpy(z, &k3, h), theta)?;
    Ok([k1, k2, k3, k4])
}

/// One RK4 step before quaternion renormalization.
pub fn rk4_step_raw(dynamics: &Dynamics, t: f64, z: &[f64; STATE_DIM], theta: &[f64], h: f64) -> Result<[f64; STATE_DIM]> {
    let [k1, k2, k3, k4] = rk4_stages(dynamics, t, z, theta, h)?;
    Ok(std::array::from_fn(|i| {
        z[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    }))
}

/// One RK4 step followed by quaternion renormalization.
pub fn rk4_step(dynamics: &Dynamics, t: f64, z: &[f64; STATE_DIM], theta: &[f64], h: f64) -> Result<[f64; STATE_DIM]> {
    let mut next = rk4_step_raw(dynamics, t, z, theta, h)?;
    renormalize(&mut next);
    Ok(next)
}

/// Integrate from `z0` and record every step, including the initial state.
pub fn propagate(dynamics: &Dynamics, z0: &State, cfg: &PropagationConfig, theta: &[f64]) -> Result<Trajectory> {
    z0.validate()?;
    let n = cfg.steps()?;
    let mut traj = Trajectory {
        times: Vec::with_capacity(n + 1),
        states: Vec::with_capacity(n + 1),
    };
    let mut z = z0.to_array();
    traj.times.push(cfg.t0);
    traj.states.push(z);
    for i in 0..n {
        z = rk4_step(dynamics, cfg.time(i), &z, theta, cfg.step)?;
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                step: i + 1,
                what: "state".into(),
            });
        }
        traj.times.push(cfg.time(i + 1));
        traj.states.push(z);
    }
    Ok(traj)
}
