//! The standard `exp(−1/(1−|y|²))` bump, normalized to unit integral in one,
//! three and four dimensions.

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::{Vector3, Vector4};

use crate::spacetime::SpacetimePoint;

/// `exp(−1/(1−q))` for `q = |y|² < 1`, zero otherwise, and its derivative in `q`.
#[inline]
pub fn raw_profile(q: f64) -> (f64, f64) {
    if q >= 1.0 {
        return (0.0, 0.0);
    }
    let s = 1.0 - q;
    let b = (-1.0 / s).exp();
    (b, -b / (s * s))
}

/// `∫_{B_d} exp(−1/(1−|y|²)) dy` for `d ∈ {1, 3, 4}`.
pub fn mass(dim: usize) -> f64 {
    static MASSES: OnceLock<[f64; 3]> = OnceLock::new();
    let m = MASSES.get_or_init(|| {
        let radial = |pow: i32| {
            crate::quadrature::gauss_legendre(400)
                .iter()
                .map(|&(x, w)| {
                    let r = 0.5 * (x + 1.0);
                    0.5 * w * raw_profile(r * r).0 * r.powi(pow)
                })
                .sum::<f64>()
        };
        [2.0 * radial(0), 4.0 * PI * radial(2), 2.0 * PI * PI * radial(3)]
    });
    match dim {
        1 => m[0],
        3 => m[1],
        4 => m[2],
        _ => panic!("bump normalization only tabulated for d = 1, 3, 4"),
    }
}

/// Normalized one-dimensional mollifier on `[−1, 1]`, values in `[0, 1]`.
pub fn profile_1d(s: f64) -> f64 {
    raw_profile(s * s).0 / mass(1)
}

/// Spatial bump `ψ(x) = β((x−c)/ρ) / (C₃ρ³)` supported in `B(c, ρ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub center: Vector3<f64>,
    pub radius: f64,
}

impl Bump {
    pub fn spatial(center: Vector3<f64>, radius: f64) -> Self {
        Self { center, radius }
    }

    /// Unnormalized value `β((x−c)/ρ)` and its gradient in `x`.
    pub fn raw_with_gradient(&self, x: &Vector3<f64>) -> (f64, Vector3<f64>) {
        let y = (x - self.center) / self.radius;
        let (b, db) = raw_profile(y.norm_squared());
        (b, y * (2.0 * db / self.radius))
    }

    pub fn normalization(&self) -> f64 {
        1.0 / (mass(3) * self.radius.powi(3))
    }

    pub fn value(&self, x: &Vector3<f64>) -> f64 {
        self.raw_with_gradient(x).0 * self.normalization()
    }

    pub fn value_with_gradient(&self, x: &Vector3<f64>) -> (f64, Vector3<f64>) {
        let (b, g) = self.raw_with_gradient(x);
        let c = self.normalization();
        (b * c, g * c)
    }
}

/// Spacetime bump `ψ(t, x)` supported in the Euclidean 4-ball `B((t₀, x₀), ρ)`,
/// unit integral over `R^{1+3}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpTest {
    pub center: SpacetimePoint,
    pub radius: f64,
}

impl BumpTest {
    pub fn new(center: SpacetimePoint, radius: f64) -> Self {
        Self { center, radius }
    }

    /// Value and `(∂_t ψ, ∇ψ)`.
    pub fn value_with_gradient(&self, pt: &SpacetimePoint) -> (f64, Vector4<f64>) {
        let y = (pt.to_vector() - self.center.to_vector()) / self.radius;
        let (b, db) = raw_profile(y.norm_squared());
        let c = 1.0 / (mass(4) * self.radius.powi(4));
        (b * c, y * (2.0 * db * c / self.radius))
    }

    pub fn contains(&self, pt: &SpacetimePoint) -> bool {
        (pt.to_vector() - self.center.to_vector()).norm() < self.radius
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn masses_are_consistent() {
        // ∫_{-1}^{1} exp(-1/(1-x²)) dx by composite Simpson, independent of the Gauss rule.
        let n = 20000;
        let h = 2.0 / n as f64;
        let mut s = 0.0;
        for i in 0..=n {
            let x = -1.0 + i as f64 * h;
            let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * raw_profile(x * x).0;
        }
        s *= h / 3.0;
        assert!((mass(1) - s).abs() < 1e-12);
        assert!((mass(1) - 0.443_993_816_168_079_4).abs() < 1e-12);
        // reference values from 30-digit adaptive quadrature
        assert!((mass(3) - 0.441_088_887_276_604_4).abs() < 1e-12);
        assert!((mass(4) - 0.382_975_584_998_471_9).abs() < 1e-12);
    }

    #[test]
    fn profile_bounded_by_one() {
        for k in -100..=100 {
            let v = profile_1d(k as f64 / 100.0);
            assert!((0.0..=1.0).contains(&v));
        }
        assert_eq!(profile_1d(1.0), 0.0);
        assert_eq!(profile_1d(-1.5), 0.0);
    }

    #[test]
    fn gradients_match_differences() {
        let b = Bump::spatial(Vector3::new(0.1, -0.2, 0.3), 0.7);
        let x = Vector3::new(0.3, 0.0, 0.1);
        let (_, g) = b.value_with_gradient(&x);
        for i in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[i] += 1e-6;
            xm[i] -= 1e-6;
            let fd = (b.value(&xp) - b.value(&xm)) / 2e-6;
            assert!((fd - g[i]).abs() < 1e-6 * (1.0 + g.norm()));
        }
        let bt = BumpTest::new(SpacetimePoint::from_coords(0.2, 0.0, 0.1, 0.0), 0.5);
        let p = SpacetimePoint::from_coords(0.3, 0.1, 0.0, -0.1);
        let (_, g) = bt.value_with_gradient(&p);
        for a in 0..4 {
            let fd = (bt.value_with_gradient(&p.shifted(a, 1e-6)).0 - bt.value_with_gradient(&p.shifted(a, -1e-6)).0) / 2e-6;
            assert!((fd - g[a]).abs() < 1e-5 * (1.0 + g.norm()));
        }
    }
}
