use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::json;

use super::manifest::Manifest;
use super::verify::run_suite;
use super::{Cli, Command, Common};
use crate::design::DesignTemplate;
use crate::dynamics::{propagate, Trajectory};
use crate::error::{Error, Result};
use crate::invdesign::{ForceModelSpec, Scenario, ScenarioSpec, TemplateRef};
use crate::proxy::{eval_error, train, ProxyArch, ProxyParams, TrainConfig, TrainingDomain};
use crate::rng::derive_seed;
use crate::srp::dataset::{append_dataset, generate_dataset, read_meta, sidecar_path};
use crate::srp::forcemap::{force_map, MapChannel};
use crate::srp::tracer::TracerConfig;
use crate::srp::Dataset;

pub(super) fn dispatch(cli: &Cli, args: &[String], threads: usize) -> Result<i32> {
    let c = &cli.common;
    match &cli.command {
        Command::Forcemap {
            template,
            theta,
            irradiance,
        } => forcemap(c, args, threads, template, theta.as_deref(), *irradiance),
        Command::Sample {
            template,
            rows,
            extend,
            irradiance,
        } => sample(c, args, threads, template, *rows, extend.as_deref(), *irradiance),
        Command::TrainProxy {
            data,
            arch,
            config,
            batch,
            lr,
        } => train_proxy(c, args, threads, data, *arch, config.as_deref(), *batch, *lr),
        Command::EvalProxy { proxy, data } => eval_proxy(c, args, threads, proxy, data),
        Command::Propagate { scenario, proxy, x } => propagate_cmd(c, args, threads, scenario, proxy.as_deref(), x.as_deref()),
        Command::Optimize {
            scenario,
            proxy,
            method,
            lr,
            check_gradient,
        } => optimize_cmd(c, args, threads, scenario, proxy.as_deref(), *method, *lr, *check_gradient),
        Command::Verify => verify(c, args, threads),
    }
}

fn out_dir(c: &Common) -> Result<PathBuf> {
    let dir = c.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir)
}

fn say(c: &Common, text: &str) {
    if !c.quiet {
        println!("{text}");
    }
}

fn tracer(c: &Common, stage: &str) -> Result<TracerConfig> {
    let d = TracerConfig::default();
    let cfg = TracerConfig {
        samples: c.spp.unwrap_or(d.samples),
        max_bounces: c.bounces.unwrap_or(d.max_bounces),
        seed: derive_seed(c.seed, stage),
        ..d
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Template plus the file it came from, if any.
fn load_template(spec: &str) -> Result<(DesignTemplate, Option<PathBuf>)> {
    let t = TemplateRef(spec.to_string()).resolve(Path::new(""))?;
    let path = (!spec.starts_with("library:")).then(|| PathBuf::from(spec));
    Ok((t, path))
}

fn forcemap(c: &Common, args: &[String], threads: usize, template: &str, theta: Option<&[f64]>, irradiance: f64) -> Result<i32> {
    let mut m = Manifest::new("forcemap", args, c.seed, threads);
    let (t, src) = load_template(template)?;
    if let Some(p) = &src {
        m.input(p)?;
    }
    let theta = theta.map(<[f64]>::to_vec).unwrap_or_else(|| t.center());
    t.check_theta(&theta)?;
    let res = c.res.unwrap_or((32, 16));
    let map = force_map(&t, &theta, res, irradiance, &tracer(c, "forcemap")?)?;
    let dir = out_dir(c)?;
    let csv = dir.join("forcemap.csv");
    map.write_csv(&csv)?;
    let pf = dir.join("forcemap_force.ppm");
    map.write_ppm(&pf, MapChannel::Force)?;
    let pt = dir.join("forcemap_torque.ppm");
    map.write_ppm(&pt, MapChannel::Torque)?;
    for p in [&csv, &pf, &pt] {
        m.output(p)?;
    }
    m.finish(&dir)?;
    say(
        c,
        &format!("force map {}x{} of `{}` written to {}", res.0, res.1, t.name, csv.display()),
    );
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn sample(
    c: &Common,
    args: &[String],
    threads: usize,
    template: &str,
    rows: usize,
    extend: Option<&Path>,
    irradiance: f64,
) -> Result<i32> {
    let mut m = Manifest::new("sample", args, c.seed, threads);
    let (t, src) = load_template(template)?;
    if let Some(p) = &src {
        m.input(p)?;
    }
    let dir = out_dir(c)?;
    let path = dir.join("dataset.csv");
    let meta = match extend {
        Some(existing) => {
            m.input(existing)?;
            let existing_meta = sidecar_path(existing);
            if existing != path {
                std::fs::copy(existing, &path).map_err(|e| Error::io(&path, e))?;
                std::fs::copy(&existing_meta, sidecar_path(&path)).map_err(|e| Error::io(&existing_meta, e))?;
            }
            append_dataset(&t, rows, &path)?
        }
        None => generate_dataset(
            &t,
            rows,
            derive_seed(c.seed, "sample"),
            irradiance,
            &tracer(c, "sample")?,
            &path,
        )?,
    };
    m.output(&path)?;
    m.output(&sidecar_path(&path))?;
    m.finish(&dir)?;
    say(c, &format!("{} rows of `{}` in {}", meta.rows, t.name, path.display()));
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn train_proxy(
    c: &Common,
    args: &[String],
    threads: usize,
    data: &Path,
    arch: Option<(usize, usize)>,
    config: Option<&Path>,
    batch: Option<usize>,
    lr: Option<f64>,
) -> Result<i32> {
    let mut m = Manifest::new("train-proxy", args, c.seed, threads);
    m.input(data)?;
    let dataset = Dataset::load(data)?;
    let meta = read_meta(data)?;
    let mut cfg = match config {
        Some(p) => {
            m.input(p)?;
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            serde_json::from_str(&text).map_err(|e| Error::parse(p, e.to_string()))?
        }
        None => TrainConfig::default(),
    };
    cfg.seed = derive_seed(c.seed, "train-proxy");
    if let Some(s) = c.steps {
        cfg.steps = s;
    }
    if let Some(b) = batch {
        cfg.batch_size = b;
    }
    if let Some(l) = lr {
        cfg.learning_rate = l;
    }
    let arch = match arch {
        Some((layers, width)) => ProxyArch::new(dataset.n_params, layers, width),
        None => ProxyArch::default_for(dataset.n_params),
    };
    let (proxy, history) = train(&dataset, &TrainingDomain::from_meta(&meta), arch, &cfg)?;
    let (_, test) = dataset.split(cfg.train_fraction);
    let err = if test.is_empty() {
        None
    } else {
        Some(eval_error(&proxy, &test)?)
    };

    let dir = out_dir(c)?;
    let path = dir.join("proxy.json");
    proxy.save(&path)?;
    let hist = dir.join("train_history.csv");
    let mut text = String::from("step,train_loss,test_loss\n");
    for i in 0..history.steps.len() {
        let _ = writeln!(text, "{},{},{}", history.steps[i], history.train[i], history.test[i]);
    }
    std::fs::write(&hist, text).map_err(|e| Error::io(&hist, e))?;
    m.output(&path)?;
    m.output(&hist)?;
    m.finish(&dir)?;
    match err {
        Some(e) => say(
            c,
            &format!(
                "proxy written to {}; held-out relative error: force {:.4}, torque {:.4}",
                path.display(),
                e.force,
                e.torque
            ),
        ),
        None => say(c, &format!("proxy written to {}", path.display())),
    }
    Ok(0)
}

fn eval_proxy(c: &Common, args: &[String], threads: usize, proxy: &Path, data: &Path) -> Result<i32> {
    let mut m = Manifest::new("eval-proxy", args, c.seed, threads);
    m.input(proxy)?;
    m.input(data)?;
    let p = ProxyParams::load(proxy)?;
    let meta = read_meta(data)?;
    if meta.template_hash != p.template_hash {
        return Err(Error::ProxyMismatch(format!(
            "proxy was trained for template {}, dataset comes from {} ({})",
            p.template_hash, meta.template_name, meta.template_hash
        )));
    }
    let ds = Dataset::load(data)?;
    let e = eval_error(&p, &ds)?;
    let dir = out_dir(c)?;
    let path = dir.join("eval.json");
    let text =
        serde_json::to_string_pretty(&json!({"rows": ds.len(), "force": e.force, "torque": e.torque, "combined": e.combined}))?;
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    m.output(&path)?;
    m.finish(&dir)?;
    say(
        c,
        &format!(
            "relative error on {} rows: force {:.4}, torque {:.4}, combined {:.4}",
            ds.len(),
            e.force,
            e.torque,
            e.combined
        ),
    );
    Ok(0)
}

/// Load a scenario with the CLI overrides applied.
fn load_scenario(c: &Common, m: &mut Manifest, path: &Path, proxy: Option<&Path>, outer_steps: bool) -> Result<Scenario> {
    m.input(path)?;
    let mut spec = ScenarioSpec::load(path)?;
    if let Some(p) = proxy {
        m.input(p)?;
        let abs = std::path::absolute(p).map_err(|e| Error::io(p, e))?;
        let torque = match spec.force_model {
            ForceModelSpec::Proxy { torque, .. } => torque,
            _ => true,
        };
        spec.force_model = ForceModelSpec::Proxy { path: abs, torque };
    }
    if let Some(h) = c.step_size {
        spec.propagation.step = h;
    }
    match (c.steps, outer_steps) {
        (Some(n), true) => spec.optimizer.steps = n,
        (Some(n), false) => spec.propagation.t1 = spec.propagation.t0 + n as f64 * spec.propagation.step,
        _ => {}
    }
    Scenario::from_spec(spec, path.parent().unwrap_or(Path::new(".")))
}

fn write_trajectories(m: &mut Manifest, dir: &Path, prefix: &str, trajectories: &[Trajectory]) -> Result<()> {
    for (i, t) in trajectories.iter().enumerate() {
        let p = dir.join(format!("{prefix}_case{i}.csv"));
        t.write_csv(&p)?;
        m.output(&p)?;
    }
    Ok(())
}

fn propagate_cmd(
    c: &Common,
    args: &[String],
    threads: usize,
    scenario: &Path,
    proxy: Option<&Path>,
    x: Option<&[f64]>,
) -> Result<i32> {
    let mut m = Manifest::new("propagate", args, c.seed, threads);
    let s = load_scenario(c, &mut m, scenario, proxy, false)?;
    let x = x.map(<[f64]>::to_vec).unwrap_or_else(|| s.x_init.clone());
    let (dynamics, theta) = s.problem.bind(&x)?;
    let trajectories: Vec<Trajectory> = s
        .problem
        .cases
        .iter()
        .map(|case| propagate(&dynamics, &case.z0, &s.problem.cfg, &theta))
        .collect::<Result<_>>()?;
    let dir = out_dir(c)?;
    write_trajectories(&mut m, &dir, "trajectory", &trajectories)?;
    m.finish(&dir)?;
    say(
        c,
        &format!(
            "{} trajectories of {} steps written to {}",
            trajectories.len(),
            s.problem.cfg.steps()?,
            dir.display()
        ),
    );
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn optimize_cmd(
    c: &Common,
    args: &[String],
    threads: usize,
    scenario: &Path,
    proxy: Option<&Path>,
    method: Option<crate::invdesign::Method>,
    lr: Option<f64>,
    check_gradient: Option<f64>,
) -> Result<i32> {
    let mut m = Manifest::new("optimize", args, c.seed, threads);
    let mut s = load_scenario(c, &mut m, scenario, proxy, true)?;
    if let Some(method) = method {
        s.spec.optimizer.method = method;
    }
    if let Some(lr) = lr {
        s.spec.optimizer.learning_rate = lr;
    }
    let report = match check_gradient {
        Some(h) => Some(s.problem.gradient_report(&s.x_init, s.spec.optimizer.storage, Some(h))?),
        None => None,
    };
    let result = s.run()?;
    let dir = out_dir(c)?;
    let path = dir.join("result.json");
    let body = json!({"result": result, "initial_gradient": report});
    std::fs::write(&path, serde_json::to_string_pretty(&body)?).map_err(|e| Error::io(&path, e))?;
    m.output(&path)?;
    write_trajectories(&mut m, &dir, "baseline", &s.problem.simulate(&result.x_init)?)?;
    write_trajectories(&mut m, &dir, "optimized", &s.problem.simulate(&result.x_best)?)?;
    m.finish(&dir)?;

    let mut text = format!(
        "{}: loss {:.6e} -> {:.6e} ({:?}, {} iterates), x* = {:?}",
        result.name,
        result.loss_init,
        result.optimization.loss,
        result.optimization.status,
        result.optimization.history.len(),
        result.x_best
    );
    for (i, (a, b)) in result.miss_init.iter().zip(&result.miss_best).enumerate() {
        if let (Some(a), Some(b)) = (a, b) {
            let _ = write!(text, "\ncase {i}: terminal miss {b:.4} m (initial {a:.4} m)");
        }
    }
    say(c, &text);
    Ok(0)
}

fn verify(c: &Common, args: &[String], threads: usize) -> Result<i32> {
    let checks = run_suite(c.seed, c.spp)?;
    let mut table = format!("{:<34} {:>14} {:>14}  result\n", "check", "value", "tolerance");
    for k in &checks {
        let _ = writeln!(
            table,
            "{:<34} {:>14.4e} {:>14.4e}  {}",
            k.name,
            k.value,
            k.tolerance,
            if k.passed { "PASS" } else { "FAIL" }
        );
    }
    let failed = checks.iter().filter(|k| !k.passed).count();
    let _ = write!(table, "{} of {} checks passed", checks.len() - failed, checks.len());
    say(c, &table);
    if let Some(dir) = &c.out {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut m = Manifest::new("verify", args, c.seed, threads);
        let path = dir.join("verify.json");
        std::fs::write(&path, serde_json::to_string_pretty(&checks)?).map_err(|e| Error::io(&path, e))?;
        m.output(&path)?;
        m.finish(dir)?;
    }
    Ok(i32::from(failed > 0))
}
