use serde::{Deserialize, Serialize};

/// Phong material: diffuse and specular reflectance plus the specular exponent.
///
/// Whatever is neither diffusely nor specularly reflected is absorbed, so a
/// valid material keeps `kd + ks <= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub kd: f64,
    pub ks: f64,
    pub ns: f64,
}

impl Material {
    pub const ABSORBER: Material = Material {
        kd: 0.0,
        ks: 0.0,
        ns: 0.0,
    };

    pub const fn new(kd: f64, ks: f64, ns: f64) -> Self {
        Self { kd, ks, ns }
    }

    pub const fn lambertian(kd: f64) -> Self {
        Self { kd, ks: 0.0, ns: 0.0 }
    }

    pub const fn zero() -> Self {
        Self::ABSORBER
    }

    pub fn is_valid(&self) -> bool {
        self.kd >= 0.0
            && self.ks >= 0.0
            && self.ns >= 0.0
            && self.kd + self.ks <= 1.0 + 1e-12
            && self.kd.is_finite()
            && self.ks.is_finite()
            && self.ns.is_finite()
    }

    /// Project onto the admissible region: negative values go to zero and an
    /// over-unity albedo is rescaled so that `kd + ks == 1`.
    pub fn clamped(&self) -> Material {
        let kd = self.kd.max(0.0);
        let ks = self.ks.max(0.0);
        let sum = kd + ks;
        let (kd, ks) = if sum > 1.0 { (kd / sum, ks / sum) } else { (kd, ks) };
        Material {
            kd,
            ks,
            ns: self.ns.max(0.0),
        }
    }

    pub(crate) fn axpy(&self, a: f64, other: &Material) -> Material {
        Material {
            kd: self.kd + a * other.kd,
            ks: self.ks + a * other.ks,
            ns: self.ns + a * other.ns,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamp_renormalizes_overunity_albedo() {
        let m = Material::new(0.9, 0.6, 10.0).clamped();
        assert!((m.kd + m.ks - 1.0).abs() < 1e-15);
        assert!((m.kd / m.ks - 1.5).abs() < 1e-12);
        assert_eq!(m.ns, 10.0);
    }

    #[test]
    fn clamp_zeroes_negative_components() {
        let m = Material::new(-0.2, 0.3, -1.0).clamped();
        assert_eq!(m, Material::new(0.0, 0.3, 0.0));
        assert!(m.is_valid());
    }
}
