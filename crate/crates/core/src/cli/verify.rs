//! Fast analytic oracles run by `photonpress verify`.

use std::sync::Arc;

use nalgebra::Matrix3;
use serde::Serialize;

use crate::design::library::plate;
use crate::design::{Material, Vec3};
use crate::dynamics::{
    propagate, Cannonball, Dynamics, Environment, NoRadiation, PropagationConfig, Quat, Spacecraft, State, GM_EARTH,
};
use crate::error::Result;
use crate::invdesign::{Binding, Case, Loss, Parameter, Problem, Storage};
use crate::proxy::{Mlp, ProxyArch, ProxyParams};
use crate::rng::{derive_seed, RngStream};
use crate::srp::estimate_force_torque;
use crate::srp::tracer::{LightingCondition, TracerConfig, SOLAR_IRRADIANCE_1AU, SPEED_OF_LIGHT};

#[derive(Clone, Debug, Serialize)]
pub struct OracleCheck {
    pub name: &'static str,
    /// Measured error (or deviation) compared against `tolerance`.
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl OracleCheck {
    fn new(name: &'static str, value: f64, tolerance: f64) -> Self {
        Self {
            name,
            value,
            tolerance,
            passed: value.is_finite() && value < tolerance,
        }
    }
}

fn plate_force(material: Material, samples: usize, seed: u64) -> Result<f64> {
    let mesh = plate(1.0, 1.0, material).instantiate(&[])?;
    let cfg = TracerConfig {
        samples,
        seed,
        ..TracerConfig::default()
    };
    let s = estimate_force_torque(&mesh, &LightingCondition::sun(Vec3::z()), &cfg)?;
    Ok(s.force[2])
}

fn kepler_dynamics() -> Result<Dynamics> {
    Dynamics::new(
        Environment::two_body(GM_EARTH, [1.0, 0.0, 0.0]),
        Spacecraft::new(100.0, Matrix3::identity())?,
        Arc::new(NoRadiation { design_dim: 0 }),
    )
}

const MEO_RADIUS: f64 = 2.6561e7;

fn circular(r: f64) -> State {
    State::new(
        Vec3::new(r, 0.0, 0.0),
        Vec3::new(0.0, (GM_EARTH / r).sqrt(), 0.0),
        Quat::identity(),
        Vec3::zeros(),
    )
}

/// Relative energy drift over one 12 h orbit at a 15 s step.
fn energy_drift() -> Result<f64> {
    let d = kepler_dynamics()?;
    let z0 = circular(MEO_RADIUS);
    let traj = propagate(&d, &z0, &PropagationConfig::new(0.0, 43_200.0, 15.0), &[])?;
    let energy = |z: &[f64; 13]| {
        let r = Vec3::new(z[0], z[1], z[2]).norm();
        0.5 * (z[3] * z[3] + z[4] * z[4] + z[5] * z[5]) - GM_EARTH / r
    };
    let e0 = energy(&traj.states[0]);
    Ok(traj.states.iter().map(|z| ((energy(z) - e0) / e0).abs()).fold(0.0, f64::max))
}

/// Order estimated from endpoint errors at steps `h` and `h/2` against the
/// exact circular solution.
fn rk4_order() -> Result<f64> {
    let d = kepler_dynamics()?;
    let z0 = circular(MEO_RADIUS);
    let t1 = 21_600.0;
    let n = (GM_EARTH / MEO_RADIUS.powi(3)).sqrt();
    let exact = Vec3::new((n * t1).cos(), (n * t1).sin(), 0.0) * MEO_RADIUS;
    let err = |h: f64| -> Result<f64> {
        let t = propagate(&d, &z0, &PropagationConfig::new(0.0, t1, h), &[])?;
        let e = t.last();
        Ok((Vec3::new(e[0], e[1], e[2]) - exact).norm())
    };
    Ok((err(480.0)? / err(240.0)?).log2())
}

/// Worst relative error of the proxy input gradient over random points,
/// skipping points within 1e-4 of a ReLU kink.
fn proxy_gradient(seed: u64) -> Result<f64> {
    let mut rng = RngStream::new(derive_seed(seed, "verify/proxy"));
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    while checked < 20 {
        let mlp = Mlp::random(ProxyArch::new(2, 3, 16), &mut rng);
        let p = ProxyParams::new(mlp, vec![[0.0, 1.0]; 2], 1e-4, String::new(), SOLAR_IRRADIANCE_1AU)?;
        let w = crate::srp::dataset::uniform_sphere(&mut rng);
        let th = vec![rng.uniform(), rng.uniform()];
        if min_preactivation(&p, &w, &th)? < 1e-4 {
            continue;
        }
        let cot: [f64; 6] = std::array::from_fn(|_| rng.normal());
        let (gw, gt) = p.input_vjp(&w, &th, &cot)?;
        let f = |w: &Vec3, th: &[f64]| -> Result<f64> {
            let (a, b) = p.forward(w, th)?;
            Ok((0..3).map(|k| a[k] * cot[k] + b[k] * cot[k + 3]).sum())
        };
        let mut diff = 0.0;
        let mut norm = 0.0;
        for k in 0..5 {
            let h = 1e-6;
            let (mut wp, mut wm, mut tp, mut tm) = (w, w, th.clone(), th.clone());
            let ana = if k < 3 {
                wp[k] += h;
                wm[k] -= h;
                gw[k]
            } else {
                tp[k - 3] += h;
                tm[k - 3] -= h;
                gt[k - 3]
            };
            let num = (f(&wp, &tp)? - f(&wm, &tm)?) / (2.0 * h);
            diff += (num - ana).powi(2);
            norm += ana * ana;
        }
        worst = worst.max((diff / norm).sqrt());
        checked += 1;
    }
    Ok(worst)
}

fn min_preactivation(p: &ProxyParams, w: &Vec3, th: &[f64]) -> Result<f64> {
    let mut a = p.encode_input(w, th)?;
    let offs = p.mlp.layer_offsets();
    let mut m = f64::INFINITY;
    for &(off, n_in, n_out) in &offs[..offs.len() - 1] {
        let z: Vec<f64> = (0..n_out)
            .map(|o| {
                p.mlp.params[off + n_in * n_out + o] + (0..n_in).map(|i| p.mlp.params[off + o * n_in + i] * a[i]).sum::<f64>()
            })
            .collect();
        m = z.iter().fold(m, |acc, v| acc.min(v.abs()));
        a = z.iter().map(|v| v.max(0.0)).collect();
    }
    Ok(m)
}

/// Adjoint vs central differences for a 1-D reflectance design around a
/// small central body.
fn adjoint_gradient() -> Result<f64> {
    let mu = 5.0e5;
    let mut env = Environment::two_body(mu, [0.6, 0.8, 0.0]);
    env.radius = 500.0;
    let model = Arc::new(Cannonball {
        area: 50.0,
        reflectivity: 1.0,
        irradiance: SOLAR_IRRADIANCE_1AU,
        reflectivity_is_design: true,
    });
    let d = Dynamics::new(
        env,
        Spacecraft::new(5.0, Matrix3::from_diagonal(&Vec3::new(2.0, 3.0, 4.0)))?,
        model,
    )?;
    let z0 = State::new(
        Vec3::new(0.0, 0.0, 2.0e3),
        Vec3::new((mu / 2.0e3).sqrt(), 0.0, 0.0),
        Quat::identity(),
        Vec3::zeros(),
    );
    let cfg = PropagationConfig::new(0.0, 500.0, 5.0);
    let e = *propagate(&d, &z0, &cfg, &[1.0])?.last();
    let p = Problem {
        dynamics: d,
        cfg,
        theta: vec![1.0],
        parameters: vec![Parameter {
            binding: Binding::Design { index: 0 },
            bounds: [0.0, 2.0],
        }],
        cases: vec![Case {
            z0,
            loss: Loss::EndpointPosition {
                target: [e[0] + 3.0, e[1] - 1.0, e[2] + 2.0],
            },
        }],
    };
    let r = p.gradient_report(&[1.3], Storage::default(), Some(1e-6))?;
    let fd = r.finite_difference.expect("requested")[0];
    Ok(((r.gradient[0] - fd) / fd).abs())
}

/// Run every oracle. `spp` overrides the plate sample count (default 10^5).
pub fn run_suite(seed: u64, spp: Option<usize>) -> Result<Vec<OracleCheck>> {
    let n = spp.unwrap_or(100_000);
    let k = SOLAR_IRRADIANCE_1AU / SPEED_OF_LIGHT;
    let s = |label: &str| derive_seed(seed, label);
    let rel = |got: f64, want: f64| ((got - want) / want).abs();
    Ok(vec![
        OracleCheck::new(
            "absorber plate E*A/c",
            rel(plate_force(Material::ABSORBER, n, s("verify/absorber"))?, -k),
            0.01,
        ),
        OracleCheck::new(
            "lambertian plate (1+2/3)E*A/c",
            rel(
                plate_force(Material::lambertian(1.0), n, s("verify/lambert"))?,
                -k * (5.0 / 3.0),
            ),
            0.01,
        ),
        OracleCheck::new(
            "mirror plate 2E*A/c",
            rel(plate_force(Material::new(0.0, 1.0, 1e5), n, s("verify/mirror"))?, -2.0 * k),
            0.01,
        ),
        OracleCheck::new("kepler energy drift (12 h, 15 s)", energy_drift()?, 1e-8),
        OracleCheck::new("rk4 order |p - 4|", (rk4_order()? - 4.0).abs(), 0.3),
        OracleCheck::new("proxy gradient vs differences", proxy_gradient(seed)?, 1e-6),
        OracleCheck::new("adjoint gradient vs differences", adjoint_gradient()?, 1e-6),
    ])
}
