use approx::assert_relative_eq;

use super::mlp::{sigmoid, Tape};
use super::*;
use crate::design::library::{box_wing, reflectance_cube};
use crate::rng::RngStream;
use crate::srp::dataset::uniform_sphere;
use crate::srp::{Dataset, ForceTorqueSample};

fn random_proxy(n_params: usize, layers: usize, width: usize, seed: u64) -> ProxyParams {
    let mut rng = RngStream::new(seed);
    let mlp = Mlp::random(ProxyArch::new(n_params, layers, width), &mut rng);
    let bounds = (0..n_params).map(|i| [-1.0 - i as f64, 2.0 + 0.5 * i as f64]).collect();
    ProxyParams::new(mlp, bounds, 3.0e-5, "h".into(), 1361.0).unwrap()
}

fn random_input(p: &ProxyParams, rng: &mut RngStream) -> (Vec3, Vec<f64>) {
    let omega = uniform_sphere(rng);
    let theta = p.bounds.iter().map(|b| rng.uniform_range(b[0], b[1])).collect();
    (omega, theta)
}

#[test]
fn zero_network_outputs_zero() {
    let arch = ProxyArch::default_for(2);
    let p = ProxyParams::new(Mlp::zeros(arch), vec![[0.0, 1.0], [2.5, 6.0]], 1.0, String::new(), 1361.0).unwrap();
    let (f, t) = p.forward(&Vec3::new(0.0, 0.0, 1.0), &[0.3, 4.0]).unwrap();
    assert_eq!(f, Vec3::zeros());
    assert_eq!(t, Vec3::zeros());
}

#[test]
fn outputs_stay_inside_sigmoid_range_and_are_pure() {
    let p = random_proxy(3, 3, 16, 1);
    let mut rng = RngStream::new(2);
    for _ in 0..10_000 {
        let (w, th) = random_input(&p, &mut rng);
        let y = p.forward_unscaled(&w, &th).unwrap();
        assert!(y.iter().all(|v| v.abs() < 1.0));
        assert_eq!(y, p.forward_unscaled(&w, &th).unwrap());
        let (f, t) = p.forward(&w, &th).unwrap();
        assert!(f.amax() <= p.scale && t.amax() <= p.scale);
    }
    assert!(p.forward(&Vec3::x(), &[0.0]).is_err());
}

#[test]
fn zero_cotangent_gives_zero_gradients() {
    let p = random_proxy(2, 2, 8, 3);
    let g = p.backward(&Vec3::new(0.6, 0.0, 0.8), &[0.1, 0.2], &[0.0; 6]).unwrap();
    assert!(g.params.iter().all(|v| *v == 0.0));
    assert_eq!(g.omega, Vec3::zeros());
    assert!(g.theta.iter().all(|v| *v == 0.0));
}

#[test]
fn single_hidden_unit_matches_hand_derivation() {
    // x ∈ R^3, h = relu(a·x + b), y_k = 2σ(c_k h + d_k) − 1, P = s·y
    let arch = ProxyArch::new(0, 1, 1);
    let a = [0.3, -0.7, 1.1];
    let b = 0.2;
    let c = [0.5, -1.5, 2.0, 0.1, -0.3, 0.9];
    let d = [0.05, -0.1, 0.0, 0.3, -0.2, 0.1];
    let mut params = Vec::new();
    params.extend_from_slice(&a);
    params.push(b);
    params.extend_from_slice(&c);
    params.extend_from_slice(&d);
    let s = 2.5;
    let p = ProxyParams::new(Mlp { arch, params }, vec![], s, String::new(), 1.0).unwrap();
    let x = Vec3::new(0.48, 0.6, 0.64);
    let cot = [1.0, -2.0, 0.5, 0.25, 3.0, -1.0];
    let h_pre = a[0] * x[0] + a[1] * x[1] + a[2] * x[2] + b;
    assert!(h_pre > 0.0);
    let h = h_pre;
    let mut gy = [0.0; 6];
    for k in 0..6 {
        let sg = sigmoid(c[k] * h + d[k]);
        gy[k] = cot[k] * s * 2.0 * sg * (1.0 - sg);
    }
    let dh: f64 = (0..6).map(|k| gy[k] * c[k]).sum();
    let mut expect = Vec::new();
    expect.extend((0..3).map(|j| dh * x[j]));
    expect.push(dh);
    expect.extend((0..6).map(|k| gy[k] * h));
    expect.extend(gy);
    let g = p.backward(&x, &[], &cot).unwrap();
    for (u, v) in g.params.iter().zip(&expect) {
        assert_relative_eq!(u, v, max_relative = 1e-14);
    }
    for j in 0..3 {
        assert_relative_eq!(g.omega[j], dh * a[j], max_relative = 1e-14);
    }
    let y = p.forward(&x, &[]).unwrap();
    assert_relative_eq!(y.0[0], s * (2.0 * sigmoid(c[0] * h + d[0]) - 1.0), max_relative = 1e-15);
}

fn min_abs_hidden_preactivation(p: &ProxyParams, w: &Vec3, th: &[f64]) -> f64 {
    let x = p.encode_input(w, th).unwrap();
    let mut a = x;
    let offs = p.mlp.layer_offsets();
    let mut m = f64::INFINITY;
    for &(off, n_in, n_out) in &offs[..offs.len() - 1] {
        let mut z = vec![0.0; n_out];
        for o in 0..n_out {
            z[o] = p.mlp.params[off + n_in * n_out + o] + (0..n_in).map(|i| p.mlp.params[off + o * n_in + i] * a[i]).sum::<f64>();
        }
        m = z.iter().fold(m, |acc, v| acc.min(v.abs()));
        a = z.iter().map(|v| v.max(0.0)).collect();
    }
    m
}

#[test]
fn gradients_match_central_differences() {
    let mut rng = RngStream::new(5);
    let mut checked = 0;
    let mut seed = 100;
    while checked < 100 {
        seed += 1;
        let p = random_proxy(2, 3, 16, seed);
        let (w, th) = random_input(&p, &mut rng);
        if min_abs_hidden_preactivation(&p, &w, &th) < 1e-4 {
            continue;
        }
        let cot: [f64; 6] = std::array::from_fn(|_| rng.normal());
        let g = p.backward(&w, &th, &cot).unwrap();
        let f = |q: &ProxyParams, w: &Vec3, th: &[f64]| -> f64 {
            let (a, b) = q.forward(w, th).unwrap();
            (0..3).map(|k| a[k] * cot[k] + b[k] * cot[k + 3]).sum()
        };
        let mut num = Vec::new();
        let mut ana = Vec::new();
        let mut q = p.clone();
        for k in 0..p.mlp.params.len() {
            let x0 = p.mlp.params[k];
            let h = 1e-6 * (1.0 + x0.abs());
            q.mlp.params[k] = x0 + h;
            let fp = f(&q, &w, &th);
            q.mlp.params[k] = x0 - h;
            let fm = f(&q, &w, &th);
            q.mlp.params[k] = x0;
            num.push((fp - fm) / (2.0 * h));
            ana.push(g.params[k]);
        }
        for k in 0..3 {
            let h = 1e-6 * (1.0 + w[k].abs());
            let mut wp = w;
            wp[k] += h;
            let mut wm = w;
            wm[k] -= h;
            num.push((f(&p, &wp, &th) - f(&p, &wm, &th)) / (2.0 * h));
            ana.push(g.omega[k]);
        }
        for k in 0..th.len() {
            let h = 1e-6 * (1.0 + th[k].abs());
            let mut tp = th.clone();
            tp[k] += h;
            let mut tm = th.clone();
            tm[k] -= h;
            num.push((f(&p, &w, &tp) - f(&p, &w, &tm)) / (2.0 * h));
            ana.push(g.theta[k]);
        }
        let diff: f64 = num.iter().zip(&ana).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let norm: f64 = ana.iter().map(|a| a * a).sum::<f64>().sqrt();
        assert!(diff / norm < 1e-6, "point {checked}: relative error {}", diff / norm);
        checked += 1;
    }
}

#[test]
fn tape_reuse_is_consistent() {
    let p = random_proxy(1, 2, 5, 9);
    let mut tape = Tape::default();
    for k in 0..5 {
        let x = p.encode_input(&Vec3::new(0.0, 0.6, 0.8), &[k as f64 * 0.2]).unwrap();
        p.mlp.forward_tape(&x, &mut tape);
        assert_eq!(tape.out, p.mlp.forward(&x));
    }
}

fn constant_dataset(n: usize) -> Dataset {
    let mut rng = RngStream::new(1);
    let rows = (0..n)
        .map(|_| ForceTorqueSample {
            omega: uniform_sphere(&mut rng).into(),
            theta: vec![rng.uniform()],
            force: [1e-6, -2e-6, 4e-6],
            torque: [0.0, 5e-7, -1e-6],
            stderr: None,
        })
        .collect();
    Dataset::new(1, rows).unwrap()
}

fn cube_domain() -> TrainingDomain {
    TrainingDomain::from_template(&reflectance_cube(1.0, 10.0), 1361.0)
}

#[test]
fn constant_targets_are_learned_quickly() {
    let ds = constant_dataset(2000);
    let cfg = TrainConfig {
        steps: 1000,
        batch_size: 256,
        learning_rate: 3e-2,
        final_lr_fraction: 0.01,
        ..TrainConfig::default()
    };
    let (p, hist) = train(&ds, &cube_domain(), ProxyArch::default_for(1), &cfg).unwrap();
    let (_, test) = ds.split(cfg.train_fraction);
    let err = eval_error(&p, &test).unwrap();
    assert!(err.combined < 1e-3, "{err:?}");
    assert_eq!(hist.steps.last(), Some(&1000));
    assert!(hist.train.last().unwrap() < &hist.train[0]);
}

#[test]
fn training_is_deterministic_and_beats_random_weights() {
    let ds = constant_dataset(600);
    let cfg = TrainConfig {
        steps: 300,
        batch_size: 128,
        learning_rate: 1e-2,
        ..TrainConfig::default()
    };
    let (a, ha) = train(&ds, &cube_domain(), ProxyArch::new(1, 2, 8), &cfg).unwrap();
    let (b, hb) = train(&ds, &cube_domain(), ProxyArch::new(1, 2, 8), &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(ha, hb);
    let mut rnd = a.clone();
    rnd.mlp = Mlp::random(rnd.mlp.arch, &mut RngStream::new(77));
    assert!(eval_error(&rnd, &ds).unwrap().combined > 2.0 * eval_error(&a, &ds).unwrap().combined);
}

#[test]
fn training_rejects_bad_inputs() {
    let ds = constant_dataset(100);
    let cfg = TrainConfig::default();
    assert!(train(&ds, &cube_domain(), ProxyArch::default_for(1), &cfg).is_err());
    let empty = Dataset::new(1, vec![]).unwrap();
    assert!(train(
        &empty,
        &cube_domain(),
        ProxyArch::default_for(1),
        &TrainConfig {
            batch_size: 1,
            ..cfg.clone()
        }
    )
    .is_err());
    assert!(train(
        &ds,
        &cube_domain(),
        ProxyArch::default_for(2),
        &TrainConfig {
            batch_size: 8,
            ..cfg.clone()
        }
    )
    .is_err());
    assert!(eval_error(&random_proxy(1, 1, 2, 0), &empty).is_err());
    let mut bad = ds.clone();
    bad.rows[3].force[0] = f64::NAN;
    let r = train(
        &bad,
        &cube_domain(),
        ProxyArch::default_for(1),
        &TrainConfig {
            batch_size: 8,
            steps: 50,
            ..cfg
        },
    );
    assert!(
        matches!(
            r,
            Err(crate::Error::TrainingDiverged { .. }) | Err(crate::Error::InvalidArgument(_))
        ),
        "{r:?}"
    );
}

#[test]
fn weight_file_roundtrips_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let tmpl = box_wing();
    let mut p = random_proxy(2, 3, 16, 4);
    p.bounds = tmpl.param_bounds.clone();
    p.template_hash = tmpl.hash();
    let path = dir.path().join("p.json");
    p.save(&path).unwrap();
    let q = ProxyParams::load_for(&path, &tmpl).unwrap();
    assert_eq!(p, q);
    let mut rng = RngStream::new(8);
    for _ in 0..50 {
        let (w, th) = random_input(&p, &mut rng);
        assert_eq!(p.forward(&w, &th).unwrap(), q.forward(&w, &th).unwrap());
    }
    let path2 = dir.path().join("q.json");
    q.save(&path2).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());
    // wrong design space
    assert!(ProxyParams::load_for(&path, &reflectance_cube(1.0, 1.0)).is_err());
    let mut other = tmpl.clone();
    other.mass += 1.0;
    assert!(matches!(
        ProxyParams::load_for(&path, &other),
        Err(crate::Error::ProxyMismatch(_))
    ));
    // tampered input width
    let text = std::fs::read_to_string(&path)
        .unwrap()
        .replacen("\"input_dim\": 5", "\"input_dim\": 6", 1);
    assert!(ProxyParams::from_json(&text, &path).is_err());
}
