//! Gradients of trajectory losses with respect to design parameters by a
//! discrete adjoint through the RK4 propagator, and the outer optimization.

mod loss;
mod optimize;
mod problem;
mod scenario;

pub use loss::{
    default_state_weights, loss_collision, loss_endpoint, loss_stability, CollisionWeights, Loss, PreparedLoss, COLLISION_SIGMA,
    COLLISION_WEIGHTS,
};
pub use optimize::{optimize, optimize_progressive, Method, OptimizeResult, OptimizerConfig, Status};
pub use problem::{Binding, Case, CheckpointStats, GradientReport, Parameter, Problem, Storage, CHECKPOINT_EVERY};
pub use scenario::{
    nadir_pointing, shape_from_pressure, CaseSpec, EnvironmentRef, ForceModelSpec, LossSpec, ReferenceSpec, Scenario,
    ScenarioResult, ScenarioSpec, SpacecraftSpec, StateSpec, TargetSpec, TemplateRef,
};
