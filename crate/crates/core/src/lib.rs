//! Differentiable radiation-pressure modelling.
//!
//! The crate is organised along the pipeline it implements:
//!
//! - [`design`]: parametric spacecraft design spaces and mesh instances,
//! - [`srp`]: Monte-Carlo path tracing of radiation force and torque,
//! - [`proxy`]: a small MLP surrogate of the simulator with an exact backward pass,
//! - [`dynamics`]: 13-state rigid-body orbital dynamics and RK4 propagation,
//! - [`invdesign`]: discrete-adjoint gradients of trajectory losses and design optimization,
//! - [`cli`]: the `photonpress` command-line front end.

#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::too_many_arguments,
    clippy::type_complexity
)]

pub mod cli;
pub mod design;
pub mod dynamics;
pub mod error;
pub mod invdesign;
pub mod proxy;
pub mod rng;
pub mod srp;

pub use error::{Error, Result};
