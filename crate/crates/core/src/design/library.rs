//! Built-in design templates and a small builder for authoring new ones.

use super::mesh::{InertiaMode, Vec3};
use super::template::{DesignTemplate, MaterialBinding};
use super::Material;

/// Scalar that is affine in the design vector: `base + Σ coef_i θ_i`.
#[derive(Clone, Debug, Default)]
pub struct Lin {
    pub base: f64,
    pub coef: Vec<(usize, f64)>,
}

impl Lin {
    pub fn c(base: f64) -> Self {
        Self { base, coef: Vec::new() }
    }

    pub fn p(index: usize, scale: f64) -> Self {
        Self {
            base: 0.0,
            coef: vec![(index, scale)],
        }
    }

    pub fn plus(mut self, index: usize, scale: f64) -> Self {
        self.coef.push((index, scale));
        self
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            base: self.base * s,
            coef: self.coef.iter().map(|&(i, c)| (i, c * s)).collect(),
        }
    }

    pub fn add(&self, other: &Lin) -> Self {
        let mut coef = self.coef.clone();
        coef.extend_from_slice(&other.coef);
        Self {
            base: self.base + other.base,
            coef,
        }
    }
}

pub type LinPoint = [Lin; 3];

fn lerp_point(a: &LinPoint, b: &LinPoint, t: f64) -> LinPoint {
    [0, 1, 2].map(|k| a[k].scaled(1.0 - t).add(&b[k].scaled(t)))
}

pub struct TemplateBuilder {
    n_params: usize,
    names: Vec<String>,
    bounds: Vec<[f64; 2]>,
    vertices: Vec<[f64; 3]>,
    displacements: Vec<Vec<f64>>,
    triangles: Vec<[usize; 3]>,
    face_materials: Vec<usize>,
    materials: Vec<MaterialBinding>,
}

impl TemplateBuilder {
    pub fn new(params: &[(&str, f64, f64)]) -> Self {
        Self {
            n_params: params.len(),
            names: params.iter().map(|p| p.0.to_string()).collect(),
            bounds: params.iter().map(|p| [p.1, p.2]).collect(),
            vertices: Vec::new(),
            displacements: vec![Vec::new(); params.len()],
            triangles: Vec::new(),
            face_materials: Vec::new(),
            materials: Vec::new(),
        }
    }

    pub fn material(&mut self, binding: MaterialBinding) -> usize {
        self.materials.push(binding);
        self.materials.len() - 1
    }

    pub fn vertex(&mut self, p: &LinPoint) -> usize {
        self.vertices.push([p[0].base, p[1].base, p[2].base]);
        for field in &mut self.displacements {
            field.extend_from_slice(&[0.0; 3]);
        }
        let vi = self.vertices.len() - 1;
        for (k, lin) in p.iter().enumerate() {
            for &(i, c) in &lin.coef {
                self.displacements[i][3 * vi + k] += c;
            }
        }
        vi
    }

    /// Quad with corners in counter-clockwise order seen from the front side,
    /// split into an `nu x nv` grid.
    pub fn quad(&mut self, corners: [&LinPoint; 4], nu: usize, nv: usize, material: usize) {
        let [a, b, c, d] = corners;
        let mut ids = vec![vec![0usize; nv + 1]; nu + 1];
        for (i, row) in ids.iter_mut().enumerate() {
            let s = i as f64 / nu as f64;
            let ab = lerp_point(a, b, s);
            let dc = lerp_point(d, c, s);
            for (j, id) in row.iter_mut().enumerate() {
                let t = j as f64 / nv as f64;
                *id = self.vertex(&lerp_point(&ab, &dc, t));
            }
        }
        for i in 0..nu {
            for j in 0..nv {
                let (p00, p10, p11, p01) = (ids[i][j], ids[i + 1][j], ids[i + 1][j + 1], ids[i][j + 1]);
                self.triangles.push([p00, p10, p11]);
                self.triangles.push([p00, p11, p01]);
                self.face_materials.extend([material, material]);
            }
        }
    }

    /// Axis-aligned box with outward-facing sides, `n` subdivisions per side.
    pub fn cuboid(&mut self, center: &LinPoint, half: &LinPoint, n: usize, material: usize) {
        let corner = |sx: f64, sy: f64, sz: f64| -> LinPoint {
            [
                center[0].add(&half[0].scaled(sx)),
                center[1].add(&half[1].scaled(sy)),
                center[2].add(&half[2].scaled(sz)),
            ]
        };
        let (m, p) = (-1.0, 1.0);
        let faces = [
            [corner(p, m, m), corner(p, p, m), corner(p, p, p), corner(p, m, p)],
            [corner(m, m, m), corner(m, m, p), corner(m, p, p), corner(m, p, m)],
            [corner(m, p, m), corner(m, p, p), corner(p, p, p), corner(p, p, m)],
            [corner(m, m, m), corner(p, m, m), corner(p, m, p), corner(m, m, p)],
            [corner(m, m, p), corner(p, m, p), corner(p, p, p), corner(m, p, p)],
            [corner(m, m, m), corner(m, p, m), corner(p, p, m), corner(p, m, m)],
        ];
        for f in &faces {
            self.quad([&f[0], &f[1], &f[2], &f[3]], n, n, material);
        }
    }

    pub fn build(self, name: &str, mass: f64, inertia: InertiaMode) -> DesignTemplate {
        DesignTemplate {
            name: name.to_string(),
            vertices: self.vertices,
            triangles: self.triangles,
            param_names: self.names,
            param_bounds: self.bounds,
            displacements: if self.n_params == 0 { Vec::new() } else { self.displacements },
            materials: self.materials,
            face_materials: self.face_materials,
            mass,
            inertia,
        }
    }
}

fn pt(x: f64, y: f64, z: f64) -> LinPoint {
    [Lin::c(x), Lin::c(y), Lin::c(z)]
}

/// Single-sided rectangular plate in the z = 0 plane, facing +z.
pub fn plate(size_x: f64, size_y: f64, material: Material) -> DesignTemplate {
    let mut b = TemplateBuilder::new(&[]);
    let m = b.material(MaterialBinding::fixed(material));
    let (hx, hy) = (0.5 * size_x, 0.5 * size_y);
    b.quad(
        [&pt(-hx, -hy, 0.0), &pt(hx, -hy, 0.0), &pt(hx, hy, 0.0), &pt(-hx, hy, 0.0)],
        1,
        1,
        m,
    );
    b.build("plate", 1.0, InertiaMode::Computed)
}

/// Closed cube centred at the origin.
pub fn cube(side: f64, mass: f64, material: Material) -> DesignTemplate {
    let mut b = TemplateBuilder::new(&[]);
    let m = b.material(MaterialBinding::fixed(material));
    let h = 0.5 * side;
    b.cuboid(&pt(0.0, 0.0, 0.0), &pt(h, h, h), 1, m);
    b.build("cube", mass, InertiaMode::Computed)
}

/// Latitude-longitude tessellated sphere with outward normals.
pub fn uv_sphere(radius: f64, n_lat: usize, n_lon: usize, material: Material) -> DesignTemplate {
    let mut b = TemplateBuilder::new(&[]);
    let m = b.material(MaterialBinding::fixed(material));
    let at = |i: usize, j: usize| -> LinPoint {
        let lat = std::f64::consts::PI * (i as f64 / n_lat as f64) - std::f64::consts::FRAC_PI_2;
        let lon = std::f64::consts::TAU * (j as f64 / n_lon as f64);
        pt(
            radius * lat.cos() * lon.cos(),
            radius * lat.cos() * lon.sin(),
            radius * lat.sin(),
        )
    };
    for i in 0..n_lat {
        for j in 0..n_lon {
            let (a, bb, c, d) = (at(i, j), at(i, j + 1), at(i + 1, j + 1), at(i + 1, j));
            b.quad([&a, &bb, &c, &d], 1, 1, m);
        }
    }
    let mut t = b.build("sphere", 1.0, InertiaMode::Computed);
    drop_degenerate(&mut t);
    t
}

fn drop_degenerate(t: &mut DesignTemplate) {
    let v = |i: usize| Vec3::from(t.vertices[i]);
    let keep: Vec<bool> = t
        .triangles
        .iter()
        .map(|tri| (v(tri[1]) - v(tri[0])).cross(&(v(tri[2]) - v(tri[0]))).norm() > 1e-12)
        .collect();
    let mut k = keep.iter();
    t.triangles.retain(|_| *k.next().unwrap());
    let mut k = keep.iter();
    t.face_materials.retain(|_| *k.next().unwrap());
}

/// Cube whose faces share one reflectance parameter `rho ∈ [0, 1]`
/// (0 = black absorber, 1 = 30 % diffuse + 70 % glossy).
pub fn reflectance_cube(side: f64, mass: f64) -> DesignTemplate {
    let mut b = TemplateBuilder::new(&[("reflectance", 0.0, 1.0)]);
    let m = b.material(MaterialBinding {
        base: Material::new(0.0, 0.0, 40.0),
        deltas: vec![Material::new(0.3, 0.7, 0.0)],
    });
    let h = 0.5 * side;
    b.cuboid(&pt(0.0, 0.0, 0.0), &pt(h, h, h), 1, m);
    b.build("reflectance-cube", mass, InertiaMode::Computed)
}

const PANEL_GAP: f64 = 0.3;
const PANEL_THICKNESS: f64 = 0.04;

/// Solar wing along ±y made of a front sheet (+z) and a back sheet (−z).
fn wing(b: &mut TemplateBuilder, side: f64, root_y: &Lin, tip_y: &Lin, half_w: &Lin, n_len: usize, front: usize, back: usize) {
    let zf = Lin::c(0.5 * PANEL_THICKNESS);
    let zb = Lin::c(-0.5 * PANEL_THICKNESS);
    let (root, tip) = (root_y.scaled(side), tip_y.scaled(side));
    let xm = half_w.scaled(-1.0);
    let xp = half_w.clone();
    let p = |x: &Lin, y: &Lin, z: &Lin| -> LinPoint { [x.clone(), y.clone(), z.clone()] };
    // front sheet: counter-clockwise seen from +z
    let (a, bb, c, d) = if side > 0.0 {
        (p(&xm, &root, &zf), p(&xp, &root, &zf), p(&xp, &tip, &zf), p(&xm, &tip, &zf))
    } else {
        (p(&xm, &tip, &zf), p(&xp, &tip, &zf), p(&xp, &root, &zf), p(&xm, &root, &zf))
    };
    b.quad([&a, &bb, &c, &d], 1, n_len, front);
    let (a, bb, c, d) = if side > 0.0 {
        (p(&xm, &root, &zb), p(&xm, &tip, &zb), p(&xp, &tip, &zb), p(&xp, &root, &zb))
    } else {
        (p(&xm, &tip, &zb), p(&xm, &root, &zb), p(&xp, &root, &zb), p(&xp, &tip, &zb))
    };
    b.quad([&a, &bb, &c, &d], n_len, 1, back);
}

/// GPS-class box-wing with a two-dimensional design space
/// `[panel reflectance ∈ [0,1], panel length ∈ [2.5, 6] m]`; 140 faces.
pub fn box_wing() -> DesignTemplate {
    let mut b = TemplateBuilder::new(&[("panel_reflectance", 0.0, 1.0), ("panel_length", 2.5, 6.0)]);
    let bus = b.material(MaterialBinding::fixed(Material::new(0.3, 0.25, 20.0)));
    let front = b.material(MaterialBinding {
        base: Material::new(0.05, 0.05, 100.0),
        deltas: vec![Material::new(0.15, 0.6, 0.0), Material::zero()],
    });
    let back = b.material(MaterialBinding::fixed(Material::new(0.1, 0.0, 0.0)));
    let (hx, hy, hz) = (0.9, 1.0, 0.9);
    b.cuboid(&pt(0.0, 0.0, 0.0), &pt(hx, hy, hz), 3, bus);
    let root = Lin::c(hy + PANEL_GAP);
    let tip = Lin::c(hy + PANEL_GAP).plus(1, 1.0);
    let half_w = Lin::c(1.0);
    for side in [1.0, -1.0] {
        wing(&mut b, side, &root, &tip, &half_w, 4, front, back);
    }
    b.build("box-wing", 1630.0, InertiaMode::Computed)
}

/// Seven-parameter box-wing family:
/// `[bus_w, bus_h, bus_d, panel_w, panel_h, bus_reflectance, panel_reflectance]`.
/// Bus width is along x, depth along y, height along z; the wings extend
/// along ±y with their width along x.
pub fn shape_family() -> DesignTemplate {
    let mut b = TemplateBuilder::new(&[
        ("bus_width", 1.15, 4.60),
        ("bus_height", 1.0, 4.0),
        ("bus_depth", 0.9, 3.73),
        ("panel_width", 0.92, 3.68),
        ("panel_height", 3.61, 14.45),
        ("bus_reflectance", 0.0, 1.0),
        ("panel_reflectance", 0.0, 1.0),
    ]);
    let mut bus_delta = vec![Material::zero(); 7];
    bus_delta[5] = Material::new(0.4, 0.6, 0.0);
    let bus = b.material(MaterialBinding {
        base: Material::new(0.0, 0.0, 30.0),
        deltas: bus_delta,
    });
    let mut panel_delta = vec![Material::zero(); 7];
    panel_delta[6] = Material::new(0.2, 0.8, 0.0);
    let front = b.material(MaterialBinding {
        base: Material::new(0.0, 0.0, 60.0),
        deltas: panel_delta,
    });
    let back = b.material(MaterialBinding::fixed(Material::new(0.1, 0.0, 0.0)));
    let half = [Lin::p(0, 0.5), Lin::p(2, 0.5), Lin::p(1, 0.5)];
    b.cuboid(&pt(0.0, 0.0, 0.0), &half, 1, bus);
    let root = Lin::c(PANEL_GAP).plus(2, 0.5);
    let tip = Lin::c(PANEL_GAP).plus(2, 0.5).plus(4, 1.0);
    let half_w = Lin::p(3, 0.5);
    for side in [1.0, -1.0] {
        wing(&mut b, side, &root, &tip, &half_w, 1, front, back);
    }
    b.build("shape-family", 1000.0, InertiaMode::Computed)
}

/// Two perpendicular unit plates sharing an edge along the y axis: a floor
/// facing +z and a wall in the x = 0 plane facing +x.
pub fn corner_plates(material: Material) -> DesignTemplate {
    let mut b = TemplateBuilder::new(&[]);
    let m = b.material(MaterialBinding::fixed(material));
    b.quad(
        [&pt(0.0, 0.0, 0.0), &pt(1.0, 0.0, 0.0), &pt(1.0, 1.0, 0.0), &pt(0.0, 1.0, 0.0)],
        1,
        1,
        m,
    );
    b.quad(
        [&pt(0.0, 0.0, 0.0), &pt(0.0, 1.0, 0.0), &pt(0.0, 1.0, 1.0), &pt(0.0, 0.0, 1.0)],
        1,
        1,
        m,
    );
    b.build("corner", 1.0, InertiaMode::Computed)
}

/// A unit plate at z = 0 facing +z with a larger absorbing plate hovering
/// above it at z = `gap` (facing +z as well), which shadows it from overhead light.
pub fn shadowed_plate(gap: f64) -> DesignTemplate {
    let mut b = TemplateBuilder::new(&[]);
    let lower = b.material(MaterialBinding::fixed(Material::lambertian(0.5)));
    let upper = b.material(MaterialBinding::fixed(Material::ABSORBER));
    b.quad(
        [
            &pt(-0.5, -0.5, 0.0),
            &pt(0.5, -0.5, 0.0),
            &pt(0.5, 0.5, 0.0),
            &pt(-0.5, 0.5, 0.0),
        ],
        1,
        1,
        lower,
    );
    b.quad(
        [
            &pt(-1.0, -1.0, gap),
            &pt(1.0, -1.0, gap),
            &pt(1.0, 1.0, gap),
            &pt(-1.0, 1.0, gap),
        ],
        1,
        1,
        upper,
    );
    b.build("shadowed-plate", 1.0, InertiaMode::Computed)
}

/// Cube made of `n x n` subdivided faces, used for scaling measurements.
pub fn subdivided_cube(side: f64, n: usize, material: Material) -> DesignTemplate {
    let mut b = TemplateBuilder::new(&[]);
    let m = b.material(MaterialBinding::fixed(material));
    let h = 0.5 * side;
    b.cuboid(&pt(0.0, 0.0, 0.0), &pt(h, h, h), n, m);
    b.build("subdivided-cube", 1.0, InertiaMode::Computed)
}

/// Names accepted by [`by_name`].
pub const NAMES: [&str; 6] = [
    "box-wing",
    "shape-family",
    "reflectance-cube",
    "absorber-plate",
    "cube",
    "mirror-plate",
];

/// Built-in template by name. `reflectance-cube` is a 600 kg cube with
/// 50 m² of surface; `cube` a 1 m, 100 kg Lambertian cube.
pub fn by_name(name: &str) -> Option<DesignTemplate> {
    Some(match name {
        "box-wing" => box_wing(),
        "shape-family" => shape_family(),
        "reflectance-cube" => reflectance_cube((50.0f64 / 6.0).sqrt(), 600.0),
        "absorber-plate" => plate(1.0, 1.0, Material::ABSORBER),
        "mirror-plate" => plate(1.0, 1.0, Material::new(0.0, 1.0, 1e5)),
        "cube" => cube(1.0, 100.0, Material::lambertian(0.5)),
        _ => return None,
    })
}
