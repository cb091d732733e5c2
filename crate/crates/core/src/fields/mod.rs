//! Fields as first-order jets: the closed-form sphere-valued maps, manufactured
//! test fields and grid-backed solver output all answer the same question,
//! "what are `u`, `u_t` and `∇u` at this spacetime point?".

mod analytic;
mod grid;
mod sphere;

pub use analytic::{Composed, ConstantField, FnField, GeodesicPlaneWave, TimeSquaredBump};
pub use grid::{grid_jet, grid_value, GridField};
pub use sphere::{
    boosted_phi_jet, harmonic_v, harmonic_v_jet, initial_data, s_lambda, stereographic,
    stereographic_inv, BoostedCauchyData, BoostedHarmonic, StationaryHarmonic,
    ANALYTIC_EXCLUSION,
};

use nalgebra::{Matrix3, Matrix4x3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spacetime::SpacetimePoint;

/// Value and first derivatives of an `R³`-valued field at one point.
///
/// `grad[(i, j)] = ∂_i u^j`: row `i` is the spatial derivative direction,
/// column `j` the target component.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct JetSample {
    pub value: Vector3<f64>,
    pub dt: Vector3<f64>,
    pub grad: Matrix3<f64>,
}

impl JetSample {
    pub fn new(value: Vector3<f64>, dt: Vector3<f64>, grad: Matrix3<f64>) -> Self {
        Self { value, dt, grad }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(value: Vector3<f64>) -> Self {
        Self {
            value,
            ..Self::default()
        }
    }

    /// `∂_α u` stacked as rows, `α = 0..3` with `α = 0` the time derivative.
    pub fn spacetime_derivatives(&self) -> Matrix4x3<f64> {
        let mut d = Matrix4x3::zeros();
        d.row_mut(0).copy_from(&self.dt.transpose());
        for i in 0..3 {
            d.row_mut(i + 1).copy_from(&self.grad.row(i));
        }
        d
    }

    pub fn from_spacetime_derivatives(value: Vector3<f64>, d: &Matrix4x3<f64>) -> Self {
        let dt = d.row(0).transpose();
        let grad = Matrix3::from_fn(|i, j| d[(i + 1, j)]);
        Self { value, dt, grad }
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            value: self.value * a,
            dt: self.dt * a,
            grad: self.grad * a,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            value: self.value + other.value,
            dt: self.dt + other.dt,
            grad: self.grad + other.grad,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.value.iter().chain(self.dt.iter()).chain(self.grad.iter()).all(|c| c.is_finite())
    }

    /// Largest deviation from the sphere constraints `|u| = 1`, `u·u_t = 0`,
    /// `u·∂_i u = 0`.
    pub fn sphere_defect(&self) -> f64 {
        let mut d = (self.value.norm() - 1.0).abs().max(self.value.dot(&self.dt).abs());
        for i in 0..3 {
            d = d.max(self.grad.row(i).transpose().dot(&self.value).abs());
        }
        d
    }
}

/// A field that can be sampled as jets at spacetime points.
///
/// Implementations are immutable once built and must be safe to evaluate from
/// many threads.
pub trait FieldEvaluator: Sync {
    fn jet(&self, pt: &SpacetimePoint) -> Result<JetSample>;

    fn value(&self, pt: &SpacetimePoint) -> Result<Vector3<f64>> {
        self.jet(pt).map(|j| j.value)
    }

    /// Domain predicate: `false` where the jet is undefined or not smooth.
    fn is_smooth_at(&self, pt: &SpacetimePoint) -> bool {
        self.jet(pt).is_ok()
    }

    /// Location of an isolated spatial singularity on the slice `t`, if any.
    /// Quadrature rules centre their polar coordinates there.
    fn singular_point(&self, _t: f64) -> Option<Vector3<f64>> {
        None
    }
}

impl<F: FieldEvaluator + ?Sized> FieldEvaluator for &F {
    fn jet(&self, pt: &SpacetimePoint) -> Result<JetSample> {
        (**self).jet(pt)
    }
    fn value(&self, pt: &SpacetimePoint) -> Result<Vector3<f64>> {
        (**self).value(pt)
    }
    fn is_smooth_at(&self, pt: &SpacetimePoint) -> bool {
        (**self).is_smooth_at(pt)
    }
    fn singular_point(&self, t: f64) -> Option<Vector3<f64>> {
        (**self).singular_point(t)
    }
}

impl<F: FieldEvaluator + ?Sized> FieldEvaluator for Box<F> {
    fn jet(&self, pt: &SpacetimePoint) -> Result<JetSample> {
        (**self).jet(pt)
    }
    fn value(&self, pt: &SpacetimePoint) -> Result<Vector3<f64>> {
        (**self).value(pt)
    }
    fn is_smooth_at(&self, pt: &SpacetimePoint) -> bool {
        (**self).is_smooth_at(pt)
    }
    fn singular_point(&self, t: f64) -> Option<Vector3<f64>> {
        (**self).singular_point(t)
    }
}

/// Initial data `(u(0), u_t(0)) = (f, g)` on `R³`.
pub trait CauchyData: Sync {
    fn position(&self, x: &Vector3<f64>) -> Result<Vector3<f64>>;
    fn velocity(&self, x: &Vector3<f64>) -> Result<Vector3<f64>>;
}

/// Cauchy data read off a field on the slice `t = t0`.
pub struct SliceData<F> {
    pub field: F,
    pub t0: f64,
}

impl<F: FieldEvaluator> CauchyData for SliceData<F> {
    fn position(&self, x: &Vector3<f64>) -> Result<Vector3<f64>> {
        self.field.value(&SpacetimePoint::new(self.t0, *x))
    }
    fn velocity(&self, x: &Vector3<f64>) -> Result<Vector3<f64>> {
        self.field.jet(&SpacetimePoint::new(self.t0, *x)).map(|j| j.dt)
    }
}

/// Dilation and boost parameters of the special maps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapParams {
    pub lambda: f64,
    pub nu: f64,
}

impl MapParams {
    /// `lambda > 0` and `0 <= nu < 1`; `nu = 0` gives the stationary map.
    pub fn new(lambda: f64, nu: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::domain(format!("dilation must be positive, got {lambda}")));
        }
        if !(0.0..1.0).contains(&nu) {
            return Err(Error::domain(format!("boost speed must lie in [0, 1), got {nu}")));
        }
        Ok(Self { lambda, nu })
    }

    pub fn theta(&self) -> f64 {
        1.0 / (1.0 - self.nu * self.nu).sqrt()
    }
}
