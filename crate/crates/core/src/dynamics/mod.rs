//! Rigid-body orbital dynamics: environment forces, the 13-state equations of
//! motion, and fixed-step RK4 propagation.

pub mod attitude;
mod environment;
mod ephemeris;
mod force_model;
mod forces;
mod gravity;
pub mod jet;
mod ode;
mod precision;
mod propagate;

pub use attitude::{quaternion_rate, Quat};
pub use environment::{Environment, EnvironmentConfig, HarmonicsConfig, SunConfig, ThirdBody};
pub use ephemeris::{moon_position, sun_position, BodyProvider, AU};
pub use force_model::{AbsorberPlate, Cannonball, ForceModel, NoRadiation, ProxyForce, SimulatorForce};
pub use forces::{drag_acceleration, eclipse_factor, third_body, DragConfig};
pub use gravity::{
    gravity_point, gravity_spherical_harmonics, normalization, SphericalHarmonics, EARTH_ROTATION, GM_EARTH, GM_MOON, GM_SUN,
    R_EARTH,
};
pub use ode::{Dynamics, RhsVjp, Spacecraft, State, STATE_DIM};
pub use precision::{precision_deviation, propagate_point_mass};
pub(crate) use propagate::{axpy, rk4_stages};
pub use propagate::{propagate, rk4_step, rk4_step_raw, PropagationConfig, Trajectory};
