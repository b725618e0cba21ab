//! JSON scenario files and the runners built on them.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use nalgebra::{Matrix3, Rotation3, UnitQuaternion};
use serde::{Deserialize, Serialize};

use super::loss::{default_state_weights, CollisionWeights, Loss, COLLISION_SIGMA};
use super::optimize::{optimize, optimize_progressive, OptimizeResult, OptimizerConfig};
use super::problem::{Binding, Case, Parameter, Problem};
use crate::design::{library, DesignTemplate, Vec3};
use crate::dynamics::{
    propagate, AbsorberPlate, Cannonball, Dynamics, Environment, EnvironmentConfig, ForceModel, NoRadiation, PropagationConfig,
    ProxyForce, Quat, SimulatorForce, Spacecraft, State, Trajectory, STATE_DIM,
};
use crate::error::{check_dim, Error, Result};
use crate::proxy::ProxyParams;
use crate::srp::tracer::{TracerConfig, SOLAR_IRRADIANCE_1AU};

/// A template file path, or `library:<name>` for a built-in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TemplateRef(pub String);

impl TemplateRef {
    pub fn resolve(&self, base: &Path) -> Result<DesignTemplate> {
        match self.0.strip_prefix("library:") {
            Some(name) => library::by_name(name).ok_or_else(|| {
                Error::InvalidArgument(format!("unknown built-in template `{name}`; known: {:?}", library::NAMES))
            }),
            None => DesignTemplate::load(base.join(&self.0)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EnvironmentRef {
    File(PathBuf),
    Inline(EnvironmentConfig),
}

impl EnvironmentRef {
    pub fn resolve(&self, base: &Path) -> Result<Environment> {
        match self {
            EnvironmentRef::File(p) => Environment::load(base.join(p)),
            EnvironmentRef::Inline(cfg) => Environment::from_config(cfg, base),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ForceModelSpec {
    Proxy {
        path: PathBuf,
        #[serde(default = "yes")]
        torque: bool,
    },
    Simulator {
        #[serde(default)]
        tracer: TracerConfig,
        #[serde(default = "default_irradiance")]
        irradiance: f64,
    },
    Cannonball {
        area: f64,
        #[serde(default = "one")]
        reflectivity: f64,
        #[serde(default)]
        reflectivity_is_design: bool,
    },
    AbsorberPlate {
        area: f64,
        normal: [f64; 3],
    },
    None,
}

fn default_irradiance() -> f64 {
    SOLAR_IRRADIANCE_1AU
}

fn yes() -> bool {
    true
}

fn one() -> f64 {
    1.0
}

fn default_stride() -> usize {
    1
}

fn default_sigma() -> f64 {
    COLLISION_SIGMA
}

impl ForceModelSpec {
    pub fn build(&self, template: &DesignTemplate, base: &Path) -> Result<Arc<dyn ForceModel>> {
        Ok(match self {
            ForceModelSpec::Proxy { path, torque } => {
                let params = ProxyParams::load_for(base.join(path), template)?;
                Arc::new(if *torque {
                    ProxyForce::new(params)
                } else {
                    ProxyForce::without_torque(params)
                })
            }
            ForceModelSpec::Simulator { tracer, irradiance } => {
                Arc::new(SimulatorForce::new(template.clone(), tracer.clone(), *irradiance))
            }
            ForceModelSpec::Cannonball {
                area,
                reflectivity,
                reflectivity_is_design,
            } => Arc::new(Cannonball {
                area: *area,
                reflectivity: *reflectivity,
                irradiance: SOLAR_IRRADIANCE_1AU,
                reflectivity_is_design: *reflectivity_is_design,
            }),
            ForceModelSpec::AbsorberPlate { area, normal } => Arc::new(AbsorberPlate {
                area: *area,
                normal: Vec3::from(*normal).normalize(),
                irradiance: SOLAR_IRRADIANCE_1AU,
            }),
            ForceModelSpec::None => Arc::new(NoRadiation {
                design_dim: template.n_params(),
            }),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpacecraftSpec {
    pub mass: f64,
    pub inertia: [[f64; 3]; 3],
}

/// Initial state; `attitude: "nadir"` replaces `q` and `w` by a
/// nadir-pointing attitude spinning at the orbital rate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateSpec {
    pub r: [f64; 3],
    pub v: [f64; 3],
    #[serde(default = "identity_q")]
    pub q: [f64; 4],
    #[serde(default)]
    pub w: [f64; 3],
    #[serde(default)]
    pub attitude: Option<String>,
}

fn identity_q() -> [f64; 4] {
    [1.0, 0.0, 0.0, 0.0]
}

impl StateSpec {
    pub fn to_state(&self) -> Result<State> {
        let r = Vec3::from(self.r);
        let v = Vec3::from(self.v);
        match self.attitude.as_deref() {
            None | Some("fixed") => Ok(State::new(r, v, Quat::from(self.q), Vec3::from(self.w))),
            Some("nadir") => {
                let (q, w) = nadir_pointing(&r, &v)?;
                Ok(State::new(r, v, q, w))
            }
            Some(other) => Err(Error::InvalidArgument(format!("unknown attitude mode `{other}`"))),
        }
    }
}

/// Body z towards the central body, body y along-track, body x along the
/// orbit normal; the body-frame rate is the instantaneous orbital rate.
pub fn nadir_pointing(r: &Vec3, v: &Vec3) -> Result<(Quat, Vec3)> {
    let h = r.cross(v);
    if !(h.norm() > 0.0) {
        return Err(Error::InvalidArgument("nadir pointing needs a non-degenerate orbit".into()));
    }
    let z = -r.normalize();
    let y = (v - r.normalize() * v.dot(&r.normalize())).normalize();
    let x = y.cross(&z);
    let rot = Rotation3::from_matrix_unchecked(Matrix3::from_columns(&[x, y, z]));
    let uq = UnitQuaternion::from_rotation_matrix(&rot);
    let q = Quat::new(uq.w, uq.i, uq.j, uq.k);
    let w_inertial = h / r.norm_squared();
    let w_body = rot.transpose() * w_inertial;
    Ok((q, w_body))
}

/// A target endpoint: explicit, or simulated at given parameters plus an offset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetSpec {
    Position([f64; 3]),
    State(Vec<f64>),
    Simulate {
        x: Vec<f64>,
        #[serde(default)]
        offset: [f64; 3],
    },
}

/// A reference trajectory: a CSV file or a simulation at given parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceSpec {
    Trajectory(PathBuf),
    Simulate { x: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossSpec {
    EndpointPosition {
        target: TargetSpec,
    },
    EndpointFullState {
        target: TargetSpec,
        #[serde(default)]
        weights: Option<Vec<f64>>,
    },
    Stability,
    Collision {
        baseline: ReferenceSpec,
        t_c: f64,
        #[serde(default = "default_sigma")]
        sigma: f64,
        #[serde(default)]
        weights: CollisionWeights,
        #[serde(default)]
        post_start: Option<f64>,
    },
    Path {
        reference: ReferenceSpec,
        #[serde(default = "default_stride")]
        stride: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseSpec {
    pub initial_state: StateSpec,
    pub loss: LossSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: String,
    pub template: TemplateRef,
    pub force_model: ForceModelSpec,
    pub environment: EnvironmentRef,
    #[serde(default)]
    pub spacecraft: Option<SpacecraftSpec>,
    pub propagation: PropagationConfig,
    pub cases: Vec<CaseSpec>,
    /// Full design vector; defaults to the centre of the template bounds.
    #[serde(default)]
    pub theta_init: Option<Vec<f64>>,
    /// Free parameters; defaults to every design parameter with its template bounds.
    #[serde(default)]
    pub parameters: Option<Vec<Parameter>>,
    /// Initial free-parameter values; defaults to those implied by `theta_init`.
    #[serde(default)]
    pub x_init: Option<Vec<f64>>,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    /// Fit on a horizon of this many steps first, doubling up to the full one.
    #[serde(default)]
    pub progressive_horizon: Option<usize>,
}

/// A resolved scenario ready to optimize.
#[derive(Clone)]
pub struct Scenario {
    pub spec: ScenarioSpec,
    pub template: DesignTemplate,
    pub problem: Problem,
    pub x_init: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub name: String,
    pub x_init: Vec<f64>,
    pub loss_init: f64,
    pub x_best: Vec<f64>,
    pub theta_best: Vec<f64>,
    /// Final-position distance to the target per endpoint-position case.
    pub miss_init: Vec<Option<f64>>,
    pub miss_best: Vec<Option<f64>>,
    pub optimization: OptimizeResult,
}

impl ScenarioSpec {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))
    }
}

fn resolve_loss(spec: &LossSpec, base: &Path, simulate: &dyn Fn(&[f64]) -> Result<Trajectory>) -> Result<Loss> {
    let endpoint = |t: &TargetSpec| -> Result<[f64; STATE_DIM]> {
        match t {
            TargetSpec::Position(p) => {
                let mut z = [0.0; STATE_DIM];
                z[..3].copy_from_slice(p);
                Ok(z)
            }
            TargetSpec::State(s) => {
                check_dim("target state", STATE_DIM, s.len())?;
                Ok(s.as_slice().try_into().expect("13 values"))
            }
            TargetSpec::Simulate { x, offset } => {
                let mut z = *simulate(x)?.last();
                for i in 0..3 {
                    z[i] += offset[i];
                }
                Ok(z)
            }
        }
    };
    let reference = |r: &ReferenceSpec| -> Result<Trajectory> {
        match r {
            ReferenceSpec::Trajectory(p) => Trajectory::load(base.join(p)),
            ReferenceSpec::Simulate { x } => simulate(x),
        }
    };
    let loss = match spec {
        LossSpec::EndpointPosition { target } => {
            let z = endpoint(target)?;
            Loss::EndpointPosition {
                target: [z[0], z[1], z[2]],
            }
        }
        LossSpec::EndpointFullState { target, weights } => {
            let w = match weights {
                None => default_state_weights(),
                Some(w) => {
                    check_dim("state weights", STATE_DIM, w.len())?;
                    w.as_slice().try_into().expect("13 values")
                }
            };
            Loss::EndpointFullState {
                target: endpoint(target)?,
                weights: w,
            }
        }
        LossSpec::Stability => Loss::Stability,
        LossSpec::Collision {
            baseline,
            t_c,
            sigma,
            weights,
            post_start,
        } => Loss::Collision {
            baseline: reference(baseline)?,
            t_c: *t_c,
            sigma: *sigma,
            weights: *weights,
            post_start: *post_start,
        },
        LossSpec::Path { reference: r, stride } => Loss::Path {
            reference: reference(r)?,
            stride: *stride,
        },
    };
    loss.validate()?;
    Ok(loss)
}

impl Scenario {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let spec = ScenarioSpec::load(path)?;
        Self::from_spec(spec, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn from_spec(spec: ScenarioSpec, base: &Path) -> Result<Self> {
        let template = spec.template.resolve(base)?;
        let model = spec.force_model.build(&template, base)?;
        let env = spec.environment.resolve(base)?;
        let spacecraft = match &spec.spacecraft {
            Some(s) => Spacecraft::new(s.mass, Matrix3::from_row_slice(&s.inertia.concat()))?,
            None => Spacecraft::from_mesh(&template.instantiate(&template.center())?)?,
        };
        let dynamics = Dynamics::new(env, spacecraft, model.clone())?;
        let n_design = model.design_dim();
        let from_template = n_design == template.n_params();
        let theta = match &spec.theta_init {
            Some(t) => t.clone(),
            None if from_template => template.center(),
            None => {
                return Err(Error::InvalidArgument(format!(
                    "force model has {n_design} design parameters, template has {}; give theta_init",
                    template.n_params()
                )))
            }
        };
        check_dim("theta_init", n_design, theta.len())?;
        if from_template {
            template.check_theta(&theta)?;
        }
        let parameters = match &spec.parameters {
            Some(p) => p.clone(),
            None if from_template => template
                .param_bounds
                .iter()
                .enumerate()
                .map(|(index, b)| Parameter {
                    binding: Binding::Design { index },
                    bounds: *b,
                })
                .collect(),
            None => {
                return Err(Error::InvalidArgument(
                    "force model does not follow the template; give parameters".into(),
                ))
            }
        };
        let mut problem = Problem {
            dynamics,
            cfg: spec.propagation.clone(),
            theta,
            parameters,
            cases: Vec::new(),
        };
        let states: Vec<State> = spec.cases.iter().map(|c| c.initial_state.to_state()).collect::<Result<_>>()?;
        for (c, z0) in spec.cases.iter().zip(&states) {
            let simulate = |x: &[f64]| -> Result<Trajectory> {
                let (d, th) = problem.bind(x)?;
                propagate(&d, z0, &problem.cfg, &th)
            };
            let loss = resolve_loss(&c.loss, base, &simulate)?;
            problem.cases.push(Case { z0: *z0, loss });
        }
        problem.validate()?;
        let x_init = spec.x_init.clone().unwrap_or_else(|| problem.current());
        check_dim("x_init", problem.dim(), x_init.len())?;
        Ok(Self {
            spec,
            template,
            problem,
            x_init,
        })
    }

    pub fn run(&self) -> Result<ScenarioResult> {
        let loss_init = self.problem.loss(&self.x_init)?;
        let opt = match self.spec.progressive_horizon {
            Some(first) => optimize_progressive(&self.problem, &self.x_init, &self.spec.optimizer, first)?,
            None => optimize(&self.problem, &self.x_init, &self.spec.optimizer)?,
        };
        let (_, theta_best) = self.problem.bind(&opt.x)?;
        Ok(ScenarioResult {
            name: self.spec.name.clone(),
            x_init: self.x_init.clone(),
            loss_init,
            x_best: opt.x.clone(),
            theta_best,
            miss_init: self.terminal_miss(&self.x_init)?,
            miss_best: self.terminal_miss(&opt.x)?,
            optimization: opt,
        })
    }

    /// `|r_N − target|` for every endpoint-position case at `x`.
    pub fn terminal_miss(&self, x: &[f64]) -> Result<Vec<Option<f64>>> {
        let trajectories = self.problem.simulate(x)?;
        Ok(self
            .problem
            .cases
            .iter()
            .zip(&trajectories)
            .map(|(c, t)| match &c.loss {
                Loss::EndpointPosition { target } => {
                    let e = t.last();
                    Some((Vec3::new(e[0], e[1], e[2]) - Vec3::from(*target)).norm())
                }
                _ => None,
            })
            .collect())
    }
}

/// Fit all free parameters to observed trajectories by summed path losses.
/// `observations[i]` must start from `initial[i]` on the problem's time grid.
pub fn shape_from_pressure(
    base: &Problem,
    initial: &[State],
    observations: &[Trajectory],
    x_init: &[f64],
    cfg: &OptimizerConfig,
) -> Result<OptimizeResult> {
    check_dim("observations", initial.len(), observations.len())?;
    let mut problem = base.clone();
    problem.cases = initial
        .iter()
        .zip(observations)
        .map(|(z0, obs)| Case {
            z0: *z0,
            loss: Loss::Path {
                reference: obs.clone(),
                stride: 1,
            },
        })
        .collect();
    optimize(&problem, x_init, cfg)
}
