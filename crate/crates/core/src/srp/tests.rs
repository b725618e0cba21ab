use std::f64::consts::{FRAC_1_PI, PI, TAU};

use approx::assert_relative_eq;
use proptest::prelude::*;

use super::brdf::*;
use super::dataset::{generate_dataset, read_meta, uniform_sphere, Dataset};
use super::estimator::*;
use super::forcemap::*;
use super::intersect::*;
use super::tracer::*;
use crate::design::library::{corner_plates, cube, plate, shadowed_plate, uv_sphere};
use crate::design::{Material, MeshInstance, Vec3};
use crate::rng::RngStream;

const E: f64 = 1361.0;

fn up() -> Vec3 {
    Vec3::new(0.0, 0.0, 1.0)
}

fn plate_mesh(mat: Material) -> MeshInstance {
    plate(1.0, 1.0, mat).instantiate(&[]).unwrap()
}

fn cfg(samples: usize, seed: u64) -> TracerConfig {
    TracerConfig {
        samples,
        seed,
        ..TracerConfig::default()
    }
}

// Scalar reference intersector: plane hit followed by a same-side edge test.
fn reference_hit(tri: [Vec3; 3], o: &Vec3, d: &Vec3) -> Option<f64> {
    let n = (tri[1] - tri[0]).cross(&(tri[2] - tri[0]));
    let denom = n.dot(d);
    if denom.abs() < 1e-14 {
        return None;
    }
    let t = n.dot(&(tri[0] - o)) / denom;
    let p = o + d * t;
    for k in 0..3 {
        let a = tri[k];
        let b = tri[(k + 1) % 3];
        if (b - a).cross(&(p - a)).dot(&n) < 0.0 {
            return None;
        }
    }
    Some(t)
}

#[test]
fn ray_straight_down_hits_unit_square() {
    let mesh = plate_mesh(Material::ABSORBER);
    let hit = intersect_nearest(&mesh, &Vec3::new(0.4, -0.3, 1.0), &-up(), 1e-9).unwrap();
    assert_relative_eq!(hit.distance, 1.0, epsilon = 1e-14);
    let hit2 = intersect_nearest(&mesh, &Vec3::new(-0.4, 0.3, 1.0), &-up(), 1e-9).unwrap();
    assert_ne!(hit.face, hit2.face);
    let p = Vec3::new(0.4, -0.3, 0.0);
    let tri = mesh.triangles[hit.face];
    let (a, b, c) = (mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]);
    let inside = (0..3).all(|k| {
        let (u, v) = [(a, b), (b, c), (c, a)][k];
        (v - u).cross(&(p - u)).z >= 0.0
    });
    assert!(inside);
}

#[test]
fn parallel_ray_misses() {
    let mesh = plate_mesh(Material::ABSORBER);
    assert!(intersect_nearest(&mesh, &Vec3::new(-2.0, 0.0, 0.0), &Vec3::new(1.0, 0.0, 0.0), 1e-9).is_none());
    assert!(intersect_nearest(&mesh, &Vec3::new(-2.0, 0.0, 0.5), &Vec3::new(1.0, 0.0, 0.0), 1e-9).is_none());
}

#[test]
fn batch_intersection_matches_scalar_reference() {
    let mesh = plate_mesh(Material::ABSORBER);
    let mut rng = RngStream::new(11);
    let mut origins = Vec::new();
    let mut dirs = Vec::new();
    for k in 0..1000 {
        let o = Vec3::new(
            rng.uniform_range(-1.0, 1.0),
            rng.uniform_range(-1.0, 1.0),
            rng.uniform_range(-1.0, 1.0),
        );
        let d = if k % 2 == 0 {
            let target = Vec3::new(rng.uniform_range(-0.7, 0.7), rng.uniform_range(-0.7, 0.7), 0.0);
            (target - o).normalize()
        } else {
            uniform_sphere(&mut rng)
        };
        origins.push(o);
        dirs.push(d);
    }
    let hits = intersect_batch(&mesh, &origins, &dirs);
    let eps = ray_epsilon(&mesh);
    let mut n_hits = 0;
    for (k, hit) in hits.iter().enumerate() {
        let mut best: Option<(usize, f64)> = None;
        for (f, tri) in mesh.triangles.iter().enumerate() {
            let v = [mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]];
            if let Some(t) = reference_hit(v, &origins[k], &dirs[k]) {
                if t > eps && best.is_none_or(|(_, bt)| t < bt) {
                    best = Some((f, t));
                }
            }
        }
        match (hit, best) {
            (None, None) => {}
            (Some(h), Some((_, t))) => {
                n_hits += 1;
                assert_relative_eq!(h.distance, t, max_relative = 1e-9);
            }
            // Rays grazing the shared diagonal may land on either side.
            (h, b) => panic!("ray {k}: batch {h:?} vs reference {b:?}"),
        }
    }
    assert!(n_hits > 250, "{n_hits}");
}

#[test]
fn lambert_brdf_is_constant() {
    let mat = Material::lambertian(1.0);
    let mut rng = RngStream::new(1);
    for _ in 0..100 {
        let a = sample_uniform_hemisphere(&up(), &mut rng).0;
        let b = sample_uniform_hemisphere(&up(), &mut rng).0;
        assert_relative_eq!(eval_brdf(&mat, &up(), &a, &b), FRAC_1_PI, epsilon = 1e-15);
    }
    assert_eq!(eval_brdf(&mat, &up(), &up(), &Vec3::new(0.0, 0.6, -0.8)), 0.0);
}

#[test]
fn phong_peak_value() {
    let mat = Material::new(0.0, 0.5, 10.0);
    let w_in = Vec3::new(0.6, 0.0, 0.8);
    let w_out = reflect(&w_in, &up());
    assert_relative_eq!(eval_brdf(&mat, &up(), &w_in, &w_out), 0.5 * 12.0 / TAU, max_relative = 1e-12);
    // reciprocity
    let a = Vec3::new(0.3, 0.1, 0.9).normalize();
    let b = Vec3::new(-0.2, 0.4, 0.7).normalize();
    let m = Material::new(0.2, 0.5, 7.0);
    assert_relative_eq!(
        eval_brdf(&m, &up(), &a, &b),
        eval_brdf(&m, &up(), &b, &a),
        max_relative = 1e-12
    );
}

#[test]
fn cosine_sampling_mean() {
    let mat = Material::lambertian(0.8);
    let mut rng = RngStream::new(5);
    let n = 100_000;
    let w_in = Vec3::new(0.0, 0.6, 0.8);
    let mean: f64 = (0..n).map(|_| sample_brdf(&mat, &up(), &w_in, &mut rng).0.z).sum::<f64>() / n as f64;
    assert_relative_eq!(mean, 2.0 / 3.0, max_relative = 0.01);
}

#[test]
fn specular_lobe_narrows_with_exponent() {
    let w_in = Vec3::new(0.3, 0.0, 1.0).normalize();
    let mirror = reflect(&w_in, &up());
    let spread = |ns: f64| {
        let mat = Material::new(0.0, 1.0, ns);
        let mut rng = RngStream::new(9);
        (0..20_000)
            .map(|_| {
                sample_brdf(&mat, &up(), &w_in, &mut rng)
                    .0
                    .dot(&mirror)
                    .clamp(-1.0, 1.0)
                    .acos()
            })
            .sum::<f64>()
            / 20_000.0
    };
    let s: Vec<f64> = [1.0, 10.0, 100.0].iter().map(|&ns| spread(ns)).collect();
    assert!(s[0] > s[1] && s[1] > s[2], "{s:?}");
}

#[test]
fn sampled_pdf_matches_mixture_density() {
    let mut rng = RngStream::new(3);
    for k in 0..200 {
        let mat = Material::new(rng.uniform() * 0.5, rng.uniform() * 0.5, 1.0 + 50.0 * rng.uniform());
        let w_in = sample_uniform_hemisphere(&up(), &mut rng).0;
        let (w, pdf) = sample_brdf(&mat, &up(), &w_in, &mut rng);
        let r = reflect(&w_in, &up()).dot(&w).max(0.0);
        let total = mat.kd + mat.ks;
        let expect = mat.kd / total * w.z.max(0.0) / PI + mat.ks / total * (mat.ns + 1.0) / TAU * r.powf(mat.ns);
        assert!(pdf > 0.0 || w.z <= 0.0, "draw {k}");
        assert_relative_eq!(pdf, expect, max_relative = 1e-12);
    }
    let (w, pdf) = sample_brdf(&Material::ABSORBER, &up(), &up(), &mut rng);
    assert_relative_eq!(pdf, w.z / PI, max_relative = 1e-12);
}

#[test]
fn phong_conserves_energy() {
    let mut rng = RngStream::new(21);
    for mat in [
        Material::new(0.3, 0.7, 5.0),
        Material::new(0.0, 1.0, 50.0),
        Material::lambertian(1.0),
    ] {
        let w_in = Vec3::new(0.0, 0.0, 1.0);
        let a = albedo_estimate(&mat, &up(), &w_in, &mut rng, 50_000);
        assert!(a <= 1.0 + 0.01, "{mat:?}: {a}");
    }
}

#[test]
fn light_to_force_examples() {
    let c = SPEED_OF_LIGHT;
    let f = light_to_force(1.0, &up(), &up(), &up(), 0.0);
    assert_eq!(f, Vec3::new(0.0, 0.0, -1.0 / c));
    let f = light_to_force(1.0, &up(), &Vec3::new(0.0, 0.6, -0.8), &up(), 0.5);
    assert_eq!(f, Vec3::zeros());
    let f = light_to_force(1.0, &up(), &up(), &up(), 1.0);
    assert_relative_eq!(f.z, -2.0 / c, max_relative = 1e-15);
}

#[test]
fn convex_plate_sees_only_direct_light() {
    let mesh = plate_mesh(Material::lambertian(1.0));
    let light = LightingCondition::sun(Vec3::new(0.2, 0.1, 1.0));
    let mut rng = RngStream::new(1);
    for x in mesh.sample_surface(&mut rng.clone(), 100).unwrap() {
        let inc = trace_radiance(&mesh, &x, &light, &TracerConfig::default(), &mut rng);
        assert_eq!(inc.direct, E);
        assert_eq!(inc.indirect, 0.0);
    }
}

#[test]
fn occluder_blocks_direct_light() {
    let mesh = shadowed_plate(0.5).instantiate(&[]).unwrap();
    let light = LightingCondition::sun(up());
    let mut rng = RngStream::new(2);
    let pts = mesh.sample_surface(&mut RngStream::new(3), 200).unwrap();
    let lower: Vec<_> = pts.iter().filter(|p| p.position.z.abs() < 1e-12).collect();
    assert!(!lower.is_empty());
    for x in lower {
        let inc = trace_radiance(&mesh, x, &light, &TracerConfig::default(), &mut rng);
        assert_eq!(inc.direct, 0.0);
    }
}

// View factor between two perpendicular rectangles sharing an edge of
// length l, with widths w and h (closed form from radiative transfer tables).
fn perpendicular_view_factor(l: f64, w: f64, h: f64) -> f64 {
    let (w, h) = (w / l, h / l);
    let s = (w * w + h * h).sqrt();
    let w2 = w * w;
    let h2 = h * h;
    let a = (1.0 + w2) * (1.0 + h2) / (1.0 + w2 + h2);
    let b = w2 * (1.0 + w2 + h2) / ((1.0 + w2) * (w2 + h2));
    let c = h2 * (1.0 + h2 + w2) / ((1.0 + h2) * (h2 + w2));
    (w * (1.0 / w).atan() + h * (1.0 / h).atan() - s * (1.0 / s).atan() + 0.25 * (a.ln() + w2 * b.ln() + h2 * c.ln())) / (PI * w)
}

#[test]
fn corner_interreflection_matches_view_factor() {
    let f = perpendicular_view_factor(1.0, 1.0, 1.0);
    assert_relative_eq!(f, 0.20004, max_relative = 1e-4);
    // The wall (x = 0, facing +x) is lit head-on; the floor is at grazing
    // incidence and receives only light reflected by the wall.
    let mesh = corner_plates(Material::lambertian(1.0)).instantiate(&[]).unwrap();
    let light = LightingCondition::sun(Vec3::new(1.0, 0.0, 0.0));
    let cfg = TracerConfig {
        max_bounces: 1,
        ..TracerConfig::default()
    };
    let mut rng = RngStream::new(77);
    let n = 400_000;
    let mut acc = 0.0;
    for _ in 0..n {
        let x = mesh.point_on_face(if rng.uniform() < 0.5 { 0 } else { 1 }, rng.uniform(), rng.uniform());
        let inc = trace_radiance(&mesh, &x, &light, &cfg, &mut rng);
        acc += inc.indirect * x.normal.dot(&inc.indirect_dir) * inc.indirect_weight;
    }
    let mean = acc / n as f64;
    assert_relative_eq!(mean, E * f, max_relative = 0.02);
}

#[test]
fn absorber_plate_normal_incidence() {
    let mesh = plate_mesh(Material::ABSORBER);
    let s = estimate_force_torque(&mesh, &LightingCondition::sun(up()), &cfg(10_000, 1)).unwrap();
    let expect = -E / SPEED_OF_LIGHT;
    let se = s.stderr.unwrap();
    assert!((s.force[2] - expect).abs() <= 3.0 * se.force[2] + 1e-18);
    assert_relative_eq!(s.force[2], expect, max_relative = 1e-12);
    assert!(s.force[0].abs() < 1e-18 && s.force[1].abs() < 1e-18);
}

#[test]
fn lambertian_plate_normal_incidence() {
    let mesh = plate_mesh(Material::lambertian(1.0));
    let s = estimate_force_torque(&mesh, &LightingCondition::sun(up()), &cfg(100_000, 2)).unwrap();
    let expect = -E / SPEED_OF_LIGHT * (1.0 + 2.0 / 3.0);
    assert_relative_eq!(s.force[2], expect, max_relative = 0.01);
}

#[test]
fn mirror_plate_doubles_momentum() {
    let mesh = plate_mesh(Material::new(0.0, 1.0, 1e5));
    let s = estimate_force_torque(&mesh, &LightingCondition::sun(up()), &cfg(20_000, 3)).unwrap();
    assert_relative_eq!(s.force[2], -2.0 * E / SPEED_OF_LIGHT, max_relative = 0.01);
}

#[test]
fn estimator_unbiased_over_seeds() {
    let dir = Vec3::new(0.5, -0.2, 0.8).normalize();
    let mesh_d = plate_mesh(Material::lambertian(0.7));
    let light = LightingCondition::sun(dir);
    let cos = dir.z;
    let expect = (-dir * cos - up() * (0.7 * 2.0 / 3.0 * cos)) * (E / SPEED_OF_LIGHT);
    let runs: Vec<ForceTorqueSample> = (0..30)
        .map(|s| estimate_force_torque(&mesh_d, &light, &cfg(2_000, 100 + s)).unwrap())
        .collect();
    for k in 0..3 {
        let mean = runs.iter().map(|r| r.force[k]).sum::<f64>() / 30.0;
        let se = (runs.iter().map(|r| r.stderr.unwrap().force[k].powi(2)).sum::<f64>()).sqrt() / 30.0;
        assert!(
            (mean - expect[k]).abs() <= 3.0 * se + 1e-15,
            "component {k}: {mean} vs {}",
            expect[k]
        );
    }
}

#[test]
fn cube_lit_through_center_has_no_torque() {
    let mesh = cube(2.0, 6.0, Material::new(0.3, 0.4, 10.0)).instantiate(&[]).unwrap();
    let s = estimate_force_torque(&mesh, &LightingCondition::sun(up()), &cfg(50_000, 4)).unwrap();
    let se = s.stderr.unwrap();
    for k in 0..3 {
        assert!(
            s.torque[k].abs() <= 3.0 * se.torque[k] + 1e-20,
            "{:?} {:?}",
            s.torque,
            se.torque
        );
    }
}

fn projected_area(mesh: &MeshInstance, dir: &Vec3) -> f64 {
    mesh.normals
        .iter()
        .zip(&mesh.areas)
        .map(|(n, a)| a * n.dot(dir).max(0.0))
        .sum()
}

#[test]
fn absorber_sphere_is_a_cannonball() {
    let mesh = uv_sphere(1.0, 16, 32, Material::ABSORBER).instantiate(&[]).unwrap();
    let dir = Vec3::new(0.3, -0.5, 0.4).normalize();
    let s = estimate_force_torque(&mesh, &LightingCondition::sun(dir), &cfg(50_000, 5)).unwrap();
    let expect = -dir * E * projected_area(&mesh, &dir) / SPEED_OF_LIGHT;
    let se = s.stderr.unwrap();
    for k in 0..3 {
        assert!(
            (s.force[k] - expect[k]).abs() <= 4.0 * se.force[k],
            "{k}: {:?} vs {expect:?}",
            s.force
        );
    }
}

#[test]
fn estimate_is_deterministic_and_thread_independent() {
    let mesh = corner_plates(Material::new(0.5, 0.3, 20.0)).instantiate(&[]).unwrap();
    let light = LightingCondition::sun(Vec3::new(1.0, 0.5, 1.0));
    let a = estimate_force_torque(&mesh, &light, &cfg(5000, 9)).unwrap();
    let b = rayon::ThreadPoolBuilder::new()
        .num_threads(3)
        .build()
        .unwrap()
        .install(|| estimate_force_torque(&mesh, &light, &cfg(5000, 9)).unwrap());
    assert_eq!(a, b);
    let c = estimate_force_torque(&mesh, &light, &cfg(5000, 10)).unwrap();
    assert_ne!(a, c);
}

#[test]
fn sphere_force_map_is_cannonball_everywhere() {
    let tmpl = uv_sphere(1.0, 12, 24, Material::ABSORBER);
    let mesh = tmpl.instantiate(&[]).unwrap();
    let map = force_map(&tmpl, &[], (6, 3), E, &cfg(4000, 6)).unwrap();
    for s in &map.samples {
        let dir = Vec3::from(s.omega);
        let expect = -dir * E * projected_area(&mesh, &dir) / SPEED_OF_LIGHT;
        let se = s.stderr.unwrap();
        for k in 0..3 {
            assert!((s.force[k] - expect[k]).abs() <= 4.0 * se.force[k] + 1e-12 * expect.norm());
        }
    }
}

#[test]
fn plate_force_map_is_zero_below_horizon() {
    let tmpl = plate(1.0, 1.0, Material::lambertian(0.5));
    let map = force_map(&tmpl, &[], (8, 4), E, &cfg(256, 7)).unwrap();
    for j in 0..4 {
        for i in 0..8 {
            let s = map.pixel(i, j);
            if s.omega[2] < 0.0 {
                assert_eq!(s.force, [0.0; 3]);
            } else {
                assert!(s.force[2] < 0.0);
            }
        }
    }
}

#[test]
fn force_map_csv_is_reproducible() {
    let tmpl = corner_plates(Material::new(0.3, 0.3, 10.0));
    let a = force_map(&tmpl, &[], (16, 8), E, &cfg(64, 8)).unwrap();
    let b = force_map(&tmpl, &[], (16, 8), E, &cfg(64, 8)).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert_eq!(a.to_csv().lines().count(), 1 + 16 * 8);
    let ppm = a.to_ppm(MapChannel::Force);
    assert!(ppm.starts_with(b"P6\n16 8\n255\n"));
    assert_eq!(ppm.len(), b"P6\n16 8\n255\n".len() + 16 * 8 * 3);
}

#[test]
fn pixel_directions_cover_sphere() {
    let d = pixel_direction(0, 0, 4, 2);
    assert!(d.z > 0.0);
    assert_relative_eq!(d.norm(), 1.0, epsilon = 1e-15);
    let d = pixel_direction(2, 1, 4, 2);
    assert!(d.z < 0.0 && d.x > 0.0);
}

#[test]
fn dataset_without_parameters_varies_only_in_direction() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plate.csv");
    let tmpl = plate(1.0, 1.0, Material::ABSORBER);
    generate_dataset(&tmpl, 20, 3, E, &cfg(16, 0), &path).unwrap();
    let ds = Dataset::load(&path).unwrap();
    assert_eq!(ds.n_params, 0);
    assert_eq!(ds.len(), 20);
    assert!(ds.rows.iter().all(|r| r.theta.is_empty()));
    assert_ne!(ds.rows[0].omega, ds.rows[1].omega);
    let meta = read_meta(&path).unwrap();
    assert_eq!(meta.template_hash, tmpl.hash());
    assert_eq!(meta.rows, 20);
}

#[test]
fn dataset_directions_are_uniform() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    let tmpl = plate(1.0, 1.0, Material::ABSORBER);
    generate_dataset(&tmpl, 10_000, 12, E, &cfg(1, 0), &path).unwrap();
    let ds = Dataset::load(&path).unwrap();
    // Equal-area cells: 8 bands in z times 8 sectors in longitude.
    let mut counts = [0usize; 64];
    for r in &ds.rows {
        let zb = (((r.omega[2] + 1.0) * 0.5 * 8.0) as usize).min(7);
        let phi = r.omega[1].atan2(r.omega[0]) + PI;
        let pb = ((phi / TAU * 8.0) as usize).min(7);
        counts[zb * 8 + pb] += 1;
    }
    let expect = ds.len() as f64 / 64.0;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expect).powi(2) / expect).sum();
    // 99th percentile of chi-squared with 63 degrees of freedom.
    assert!(chi2 < 92.0, "chi2 = {chi2}");
}

#[test]
fn dataset_bytes_are_reproducible_and_appendable() {
    let dir = tempfile::tempdir().unwrap();
    let tmpl = crate::design::library::reflectance_cube(1.0, 10.0);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    generate_dataset(&tmpl, 6, 5, E, &cfg(32, 0), &a).unwrap();
    generate_dataset(&tmpl, 6, 5, E, &cfg(32, 0), &b).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    // 4 + append 2 == 6 in one go
    let c = dir.path().join("c.csv");
    generate_dataset(&tmpl, 4, 5, E, &cfg(32, 0), &c).unwrap();
    super::dataset::append_dataset(&tmpl, 2, &c).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
    assert_eq!(read_meta(&c).unwrap().rows, 6);
    let ds = Dataset::load(&a).unwrap();
    assert!(ds.rows.iter().all(|r| (0.0..=1.0).contains(&r.theta[0])));
    let other = crate::design::library::box_wing();
    assert!(super::dataset::append_dataset(&other, 1, &c).is_err());
}

#[test]
fn dataset_csv_roundtrips_values_exactly() {
    let tmpl = crate::design::library::reflectance_cube(1.0, 10.0);
    let rows = super::dataset::generate_rows(&tmpl, 0, 3, 1, E, &cfg(16, 0)).unwrap();
    let ds = Dataset::new(1, rows).unwrap();
    let back = Dataset::parse_csv(&ds.to_csv(), std::path::Path::new("mem")).unwrap();
    for (x, y) in ds.rows.iter().zip(&back.rows) {
        assert_eq!(x.omega, y.omega);
        assert_eq!(x.theta, y.theta);
        assert_eq!(x.force, y.force);
        assert_eq!(x.torque, y.torque);
    }
}

#[test]
fn invalid_inputs_are_rejected() {
    assert!(LightingCondition::new(Vec3::zeros(), 1.0).is_err());
    assert!(LightingCondition::new(up(), -1.0).is_err());
    let mesh = plate_mesh(Material::ABSORBER);
    assert!(estimate_force_torque(&mesh, &LightingCondition::sun(up()), &cfg(0, 0)).is_err());
    assert!(force_map(&plate(1.0, 1.0, Material::ABSORBER), &[], (0, 3), E, &cfg(1, 0)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn force_respects_mirror_bound(
        kd in 0.0f64..1.0,
        ks_frac in 0.0f64..1.0,
        ns in 0.0f64..200.0,
        dz in -1.0f64..1.0,
        phi in 0.0f64..TAU,
        seed in 0u64..1000,
        which in 0usize..3,
    ) {
        let mat = Material::new(kd, (1.0 - kd) * ks_frac, ns);
        let tmpl = match which {
            0 => plate(1.3, 0.7, mat),
            1 => corner_plates(mat),
            _ => cube(1.0, 1.0, mat),
        };
        let mesh = tmpl.instantiate(&[]).unwrap();
        let r = (1.0 - dz * dz).sqrt();
        let dir = Vec3::new(r * phi.cos(), r * phi.sin(), dz);
        let s = estimate_force_torque(&mesh, &LightingCondition::sun(dir), &cfg(2000, seed)).unwrap();
        let bound = 2.0 * E * mesh.total_area() / SPEED_OF_LIGHT;
        prop_assert!(s.is_finite());
        prop_assert!(s.force_vec().norm() <= bound + 3.0 * s.stderr.unwrap().force_norm());
    }
}
