//! Neural surrogate of the radiation-pressure simulator.
//!
//! `P(ω, θ | ψ)` maps a body-frame light direction and a design vector to
//! force and torque. Inputs are the raw unit direction and θ mapped to
//! `[-1, 1]` per its bounds; the output layer is `2σ(x) − 1` times a scale
//! frozen from the training data.

mod file;
pub mod mlp;
pub mod train;

#[cfg(test)]
mod tests;

pub use mlp::{Mlp, ProxyArch};
pub use train::{eval_error, train, ProxyError, TrainConfig, TrainHistory, TrainingDomain};

use crate::design::{DesignTemplate, Vec3};
use crate::error::{check_dim, Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct ProxyParams {
    pub mlp: Mlp,
    /// Per-parameter `[lo, hi]` used for input normalization.
    pub bounds: Vec<[f64; 2]>,
    /// Output scale [N or N·m per unit output].
    pub scale: f64,
    pub template_hash: String,
    /// Irradiance the training data was generated at [W/m²].
    pub reference_irradiance: f64,
}

/// Gradients returned by [`ProxyParams::backward`].
#[derive(Clone, Debug, PartialEq)]
pub struct ProxyGradient {
    pub params: Vec<f64>,
    pub omega: Vec3,
    pub theta: Vec<f64>,
}

impl ProxyParams {
    pub fn new(mlp: Mlp, bounds: Vec<[f64; 2]>, scale: f64, template_hash: String, reference_irradiance: f64) -> Result<Self> {
        check_dim("proxy bounds", mlp.arch.input_dim.saturating_sub(3), bounds.len())?;
        if mlp.arch.output_dim != 6 {
            return Err(Error::InvalidArgument(format!(
                "proxy output must be 6-D, got {}",
                mlp.arch.output_dim
            )));
        }
        check_dim("proxy parameter vector", mlp.arch.param_count(), mlp.params.len())?;
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidArgument(format!("proxy scale must be positive, got {scale}")));
        }
        if bounds.iter().any(|b| !(b[0] < b[1])) {
            return Err(Error::InvalidArgument("proxy bounds must satisfy lo < hi".into()));
        }
        Ok(Self {
            mlp,
            bounds,
            scale,
            template_hash,
            reference_irradiance,
        })
    }

    pub fn for_template(template: &DesignTemplate, mlp: Mlp, scale: f64, reference_irradiance: f64) -> Result<Self> {
        Self::new(
            mlp,
            template.param_bounds.clone(),
            scale,
            template.hash(),
            reference_irradiance,
        )
    }

    pub fn n_params(&self) -> usize {
        self.bounds.len()
    }

    pub fn arch(&self) -> ProxyArch {
        self.mlp.arch
    }

    pub fn encode_input(&self, omega: &Vec3, theta: &[f64]) -> Result<Vec<f64>> {
        check_dim("theta", self.bounds.len(), theta.len())?;
        let mut x = Vec::with_capacity(3 + theta.len());
        x.extend_from_slice(omega.as_slice());
        for (t, b) in theta.iter().zip(&self.bounds) {
            x.push(2.0 * (t - b[0]) / (b[1] - b[0]) - 1.0);
        }
        Ok(x)
    }

    /// Network output before scaling, each component in `(-1, 1)`.
    pub fn forward_unscaled(&self, omega: &Vec3, theta: &[f64]) -> Result<[f64; 6]> {
        let y = self.mlp.forward(&self.encode_input(omega, theta)?);
        Ok([y[0], y[1], y[2], y[3], y[4], y[5]])
    }

    /// Predicted body-frame force and torque.
    pub fn forward(&self, omega: &Vec3, theta: &[f64]) -> Result<(Vec3, Vec3)> {
        let y = self.forward_unscaled(omega, theta)?;
        let s = self.scale;
        Ok((Vec3::new(y[0], y[1], y[2]) * s, Vec3::new(y[3], y[4], y[5]) * s))
    }

    /// Vector-Jacobian product of [`Self::forward`] with cotangent
    /// `(F̄, τ̄)`: gradients with respect to the network weights, the light
    /// direction and the (unnormalized) design vector.
    pub fn backward(&self, omega: &Vec3, theta: &[f64], cotangent: &[f64; 6]) -> Result<ProxyGradient> {
        let x = self.encode_input(omega, theta)?;
        let mut tape = mlp::Tape::default();
        self.mlp.forward_tape(&x, &mut tape);
        let cot: Vec<f64> = cotangent.iter().map(|c| c * self.scale).collect();
        let mut params = vec![0.0; self.mlp.params.len()];
        let dx = self.mlp.backward_tape(&mut tape, &cot, Some(&mut params));
        let theta_grad = dx[3..]
            .iter()
            .zip(&self.bounds)
            .map(|(d, b)| d * 2.0 / (b[1] - b[0]))
            .collect();
        Ok(ProxyGradient {
            params,
            omega: Vec3::new(dx[0], dx[1], dx[2]),
            theta: theta_grad,
        })
    }

    /// Like [`Self::backward`] without the weight gradient.
    pub fn input_vjp(&self, omega: &Vec3, theta: &[f64], cotangent: &[f64; 6]) -> Result<(Vec3, Vec<f64>)> {
        let x = self.encode_input(omega, theta)?;
        let mut tape = mlp::Tape::default();
        self.mlp.forward_tape(&x, &mut tape);
        let cot: Vec<f64> = cotangent.iter().map(|c| c * self.scale).collect();
        let dx = self.mlp.backward_tape(&mut tape, &cot, None);
        let theta_grad = dx[3..]
            .iter()
            .zip(&self.bounds)
            .map(|(d, b)| d * 2.0 / (b[1] - b[0]))
            .collect();
        Ok((Vec3::new(dx[0], dx[1], dx[2]), theta_grad))
    }

    /// Refuse to pair this proxy with a different design space.
    pub fn check_template(&self, template: &DesignTemplate) -> Result<()> {
        if template.n_params() != self.n_params() {
            return Err(Error::ProxyMismatch(format!(
                "proxy expects {} design parameters, template `{}` has {}",
                self.n_params(),
                template.name,
                template.n_params()
            )));
        }
        if template.hash() != self.template_hash {
            return Err(Error::ProxyMismatch(format!(
                "proxy was trained on a different template than `{}`",
                template.name
            )));
        }
        Ok(())
    }
}
