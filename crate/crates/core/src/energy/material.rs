use crate::error::{Error, Result};
use nalgebra::{Matrix3, SymmetricEigen};
use serde::{Deserialize, Serialize};

/// Symmetric 2×2 strain tensor.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Sym2 {
    pub xx: f64,
    pub yy: f64,
    pub xy: f64,
}

impl Sym2 {
    /// Voigt vector with engineering shear, [e11, e22, 2 e12].
    pub fn voigt(&self) -> [f64; 3] {
        [self.xx, self.yy, 2.0 * self.xy]
    }

    /// Frobenius norm squared e:e.
    pub fn frobenius2(&self) -> f64 {
        self.xx * self.xx + self.yy * self.yy + 2.0 * self.xy * self.xy
    }
}

/// Elasticity tensor ℂ as a symmetric 3×3 matrix D acting on engineering-shear Voigt
/// vectors γ = [e11, e22, 2e12], so that ℂe:e = γᵀ D γ. The identity tensor is
/// D = diag(1, 1, ½), which gives ℂe:e = e:e.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElasticityTensor {
    pub d: [[f64; 3]; 3],
}

impl ElasticityTensor {
    pub fn identity() -> Self {
        ElasticityTensor {
            d: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.5]],
        }
    }

    /// Plane isotropic tensor 2μ e + λ tr(e) I.
    pub fn isotropic(lambda: f64, mu: f64) -> Self {
        ElasticityTensor {
            d: [
                [lambda + 2.0 * mu, lambda, 0.0],
                [lambda, lambda + 2.0 * mu, 0.0],
                [0.0, 0.0, mu],
            ],
        }
    }

    pub fn contract(&self, a: &Sym2, b: &Sym2) -> f64 {
        let ga = a.voigt();
        let gb = b.voigt();
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += ga[i] * self.d[i][j] * gb[j];
            }
        }
        s
    }

    pub fn norm2(&self, e: &Sym2) -> f64 {
        self.contract(e, e)
    }

    /// Extreme eigenvalues (c1, c2) of ℂ with respect to the Frobenius inner product.
    pub fn bounds(&self) -> (f64, f64) {
        // Mandel scaling m = [e11, e22, √2 e12] turns γᵀDγ into mᵀ S D S m
        let s = [1.0, 1.0, std::f64::consts::SQRT_2];
        let m = Matrix3::from_fn(|i, j| s[i] * self.d[i][j] * s[j]);
        let eig = SymmetricEigen::new(m).eigenvalues;
        let lo = eig.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }
}

/// Piecewise-linear f on a table of (t, f) knots, constant after the last knot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TabulatedProfile {
    pub t: Vec<f64>,
    pub f: Vec<f64>,
}

impl TabulatedProfile {
    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let n = self.t.len();
        if x >= self.t[n - 1] {
            return self.f[n - 1];
        }
        let k = self.t.partition_point(|&s| s <= x);
        let (t0, t1) = (self.t[k - 1], self.t[k]);
        let (f0, f1) = (self.f[k - 1], self.f[k]);
        f0 + (f1 - f0) * (x - t0) / (t1 - t0)
    }

    fn validate(&self, kappa: f64) -> Result<()> {
        let bad = |r: &str| Err(Error::InvalidMaterial(format!("tabulated profile: {r}")));
        if self.t.len() != self.f.len() || self.t.len() < 2 {
            return bad("needs at least two (t, f) knots of equal count");
        }
        if self.t[0] != 0.0 || self.f[0] != 0.0 {
            return bad("first knot must be (0, 0)");
        }
        if self.t.windows(2).any(|w| w[1] <= w[0]) {
            return bad("t must be strictly increasing");
        }
        if self.f.windows(2).any(|w| w[1] < w[0]) {
            return bad("f must be nondecreasing");
        }
        let slope = self.f[1] / self.t[1];
        if (slope - 1.0).abs() > 1e-9 {
            return bad("initial slope must be 1");
        }
        if (self.f[self.f.len() - 1] - kappa).abs() > 1e-12 * kappa.max(1.0) {
            return bad("last value must equal kappa");
        }
        Ok(())
    }

    /// Smallest t with f(t) = κ.
    pub fn saturation(&self) -> f64 {
        let last = self.f[self.f.len() - 1];
        let k = self.f.iter().position(|&v| v >= last).unwrap();
        self.t[k]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum FProfile {
    TruncatedQuadratic,
    Custom(TabulatedProfile),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaterialModel {
    pub kappa: f64,
    pub elasticity: ElasticityTensor,
    pub c1: f64,
    pub c2: f64,
    pub f_profile: FProfile,
}

impl MaterialModel {
    pub fn new(kappa: f64, elasticity: ElasticityTensor, f_profile: FProfile) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidMaterial(format!(
                "kappa = {kappa} must be positive"
            )));
        }
        let (c1, c2) = elasticity.bounds();
        if !(c1 > 0.0) {
            return Err(Error::InvalidMaterial(
                "elasticity tensor is not positive definite".into(),
            ));
        }
        if let FProfile::Custom(tab) = &f_profile {
            tab.validate(kappa)?;
        }
        Ok(MaterialModel {
            kappa,
            elasticity,
            c1,
            c2,
            f_profile,
        })
    }

    /// Identity ℂ with the truncated quadratic f(t) = min(t, κ).
    pub fn truncated(kappa: f64) -> Self {
        MaterialModel::new(
            kappa,
            ElasticityTensor::identity(),
            FProfile::TruncatedQuadratic,
        )
        .unwrap()
    }

    pub fn f(&self, t: f64) -> f64 {
        match &self.f_profile {
            FProfile::TruncatedQuadratic => t.min(self.kappa),
            FProfile::Custom(tab) => tab.eval(t),
        }
    }

    /// Value of ε|e|²_ℂ at and above which a triangle counts as cracked.
    pub fn threshold(&self) -> f64 {
        match &self.f_profile {
            FProfile::TruncatedQuadratic => self.kappa,
            FProfile::Custom(tab) => tab.saturation(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_gives_frobenius() {
        let e = Sym2 {
            xx: 0.3,
            yy: -1.2,
            xy: 0.7,
        };
        let c = ElasticityTensor::identity();
        assert!((c.norm2(&e) - e.frobenius2()).abs() < 1e-15);
        let (c1, c2) = c.bounds();
        assert!((c1 - 1.0).abs() < 1e-12 && (c2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ellipticity_bounds_hold_on_random_strains() {
        let c = ElasticityTensor::isotropic(1.5, 0.8);
        let m = MaterialModel::new(1.0, c, FProfile::TruncatedQuadratic).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            let e = Sym2 {
                xx: rng.gen_range(-1.0..1.0),
                yy: rng.gen_range(-1.0..1.0),
                xy: rng.gen_range(-1.0..1.0),
            };
            let q = c.norm2(&e);
            let n = e.frobenius2();
            assert!(q >= m.c1 * n * (1.0 - 1e-12) && q <= m.c2 * n * (1.0 + 1e-12));
        }
    }

    #[test]
    fn tabulated_profile_checks() {
        let tab = TabulatedProfile {
            t: vec![0.0, 0.5, 2.0],
            f: vec![0.0, 0.5, 1.0],
        };
        let m =
            MaterialModel::new(1.0, ElasticityTensor::identity(), FProfile::Custom(tab)).unwrap();
        assert_eq!(m.f(0.25), 0.25);
        assert!((m.f(1.25) - 0.75).abs() < 1e-15);
        assert_eq!(m.f(7.0), 1.0);
        assert_eq!(m.threshold(), 2.0);
        let bad = TabulatedProfile {
            t: vec![0.0, 1.0],
            f: vec![0.0, 2.0],
        };
        assert!(
            MaterialModel::new(2.0, ElasticityTensor::identity(), FProfile::Custom(bad)).is_err()
        );
    }
}
