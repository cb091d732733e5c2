//! Closed-form fields used as exact solutions and manufactured test data.

use nalgebra::Vector3;

use super::{FieldEvaluator, JetSample};
use crate::error::Result;
use crate::spacetime::{LorentzBoost, SpacetimePoint};
use crate::stress_energy::bump::Bump;

#[derive(Debug, Clone, Copy)]
pub struct ConstantField(pub Vector3<f64>);

impl FieldEvaluator for ConstantField {
    fn jet(&self, _pt: &SpacetimePoint) -> Result<JetSample> {
        Ok(JetSample::constant(self.0))
    }
}

/// `u = (cos(ωt + k·x + c), sin(ωt + k·x + c), 0)`.
///
/// A geodesic of the sphere traversed along a plane phase, so it solves the
/// wave-map equation for every `(ω, k)`. It solves the penalized equation
/// (where the wave-map nonlinearity is absent) only when `ω = |k|`.
#[derive(Debug, Clone, Copy)]
pub struct GeodesicPlaneWave {
    pub omega: f64,
    pub k: Vector3<f64>,
    pub phase: f64,
}

impl GeodesicPlaneWave {
    pub fn new(omega: f64, k: Vector3<f64>) -> Self {
        Self { omega, k, phase: 0.0 }
    }

    /// Null wave `ω = |k|`.
    pub fn null(k: Vector3<f64>) -> Self {
        Self::new(k.norm(), k)
    }
}

impl FieldEvaluator for GeodesicPlaneWave {
    fn jet(&self, pt: &SpacetimePoint) -> Result<JetSample> {
        let th = self.omega * pt.t + self.k.dot(&pt.x) + self.phase;
        let (s, c) = th.sin_cos();
        let dir = Vector3::new(-s, c, 0.0);
        Ok(JetSample::new(Vector3::new(c, s, 0.0), dir * self.omega, self.k * dir.transpose()))
    }
}

/// Field defined by a closure returning jets.
pub struct FnField<F>(pub F);

impl<F> FieldEvaluator for FnField<F>
where
    F: Fn(&SpacetimePoint) -> Result<JetSample> + Sync,
{
    fn jet(&self, pt: &SpacetimePoint) -> Result<JetSample> {
        (self.0)(pt)
    }
}

/// `f ∘ Λ`, with jets from the chain rule `∂_γ(f∘Λ) = Λ^σ_γ (∂_σ f)∘Λ`.
pub struct Composed<F> {
    pub inner: F,
    pub boost: LorentzBoost,
}

impl<F: FieldEvaluator> FieldEvaluator for Composed<F> {
    fn jet(&self, pt: &SpacetimePoint) -> Result<JetSample> {
        let j = self.inner.jet(&self.boost.apply(pt))?;
        let d = self.boost.matrix.transpose() * j.spacetime_derivatives();
        Ok(JetSample::from_spacetime_derivatives(j.value, &d))
    }

    fn value(&self, pt: &SpacetimePoint) -> Result<Vector3<f64>> {
        self.inner.value(&self.boost.apply(pt))
    }
}

/// `u = t² β(x) e` with `β` an (unnormalized) smooth bump; `Du` vanishes at `t = 0`.
#[derive(Debug, Clone, Copy)]
pub struct TimeSquaredBump {
    pub bump: Bump,
    pub direction: Vector3<f64>,
}

impl TimeSquaredBump {
    pub fn new(center: Vector3<f64>, radius: f64, direction: Vector3<f64>) -> Self {
        Self {
            bump: Bump::spatial(center, radius),
            direction,
        }
    }
}

impl FieldEvaluator for TimeSquaredBump {
    fn jet(&self, pt: &SpacetimePoint) -> Result<JetSample> {
        let (b, db) = self.bump.raw_with_gradient(&pt.x);
        let t = pt.t;
        Ok(JetSample::new(
            self.direction * (t * t * b),
            self.direction * (2.0 * t * b),
            db * self.direction.transpose() * (t * t),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{BoostedHarmonic, MapParams, StationaryHarmonic};
    use crate::spacetime::boost_matrix;

    fn check_against_differences<F: FieldEvaluator>(f: &F, pt: &SpacetimePoint, tol: f64) {
        let j = f.jet(pt).unwrap();
        let h = 1e-6;
        for a in 0..4 {
            let fd = (f.value(&pt.shifted(a, h)).unwrap() - f.value(&pt.shifted(a, -h)).unwrap()) / (2.0 * h);
            let exact = if a == 0 { j.dt } else { j.grad.row(a - 1).transpose() };
            assert!((fd - exact).norm() <= tol, "axis {a}: {fd} vs {exact}");
        }
    }

    #[test]
    fn plane_wave_jets() {
        let w = GeodesicPlaneWave::new(1.3, Vector3::new(0.4, -2.0, 0.7));
        check_against_differences(&w, &SpacetimePoint::from_coords(0.3, 0.1, 0.2, -0.4), 1e-8);
        let j = w.jet(&SpacetimePoint::from_coords(0.1, 0.0, 0.5, 0.0)).unwrap();
        assert!(j.sphere_defect() < 1e-14);
    }

    #[test]
    fn bump_product_jets() {
        let f = TimeSquaredBump::new(Vector3::new(0.1, 0.0, -0.1), 1.2, Vector3::new(0.0, 1.0, 0.0));
        check_against_differences(&f, &SpacetimePoint::from_coords(0.4, 0.2, 0.3, -0.1), 1e-8);
        let j0 = f.jet(&SpacetimePoint::from_coords(0.0, 0.2, 0.3, -0.1)).unwrap();
        assert_eq!(j0.dt, Vector3::zeros());
        assert_eq!(j0.grad, nalgebra::Matrix3::zeros());
    }

    #[test]
    fn composition_reproduces_boosted_map() {
        let p = MapParams::new(2.0, 0.6).unwrap();
        let composed = Composed {
            inner: StationaryHarmonic { params: p },
            boost: boost_matrix(p.nu).unwrap(),
        };
        let direct = BoostedHarmonic::new(p);
        for pt in [
            SpacetimePoint::from_coords(0.1, 0.3, -0.2, 0.5),
            SpacetimePoint::from_coords(-0.4, 0.0, 0.1, -0.3),
        ] {
            let a = composed.jet(&pt).unwrap();
            let b = direct.jet(&pt).unwrap();
            assert!((a.value - b.value).norm() < 1e-14);
            assert!((a.dt - b.dt).norm() < 1e-13);
            assert!((a.grad - b.grad).norm() < 1e-13);
        }
    }
}
