//! Stereographic projection, the dilated harmonic maps
//! `v_λ(x) = σ⁻¹(λ σ(x/|x|))`, their boosts `φ_λ = v_λ ∘ Λ` and the point
//! charge `s(λ)` carried by the stress tensor of `v_λ`.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector2, Vector3};

use super::{CauchyData, FieldEvaluator, JetSample, MapParams};
use crate::error::{Error, Result};
use crate::spacetime::SpacetimePoint;

/// Exclusion radius around the singular point/line for closed-form jets.
pub const ANALYTIC_EXCLUSION: f64 = 1e-8;

/// Projection from the south pole onto the equatorial plane,
/// `(x¹, x², x³) ↦ (x¹, x²)/(1 + x³)`.
pub fn stereographic(x: &Vector3<f64>) -> Result<Vector2<f64>> {
    let denom = 1.0 + x[2];
    if !(denom > 0.0) {
        return Err(Error::singular("stereographic projection of the south pole"));
    }
    Ok(Vector2::new(x[0] / denom, x[1] / denom))
}

pub fn stereographic_inv(y: &Vector2<f64>) -> Vector3<f64> {
    let q = y.norm_squared();
    Vector3::new(2.0 * y[0], 2.0 * y[1], 1.0 - q) / (1.0 + q)
}

// Composing σ⁻¹ ∘ (λ·) ∘ σ with x ↦ x/|x| collapses to the rational map
//
//   v_λ(x) = (2λx¹, 2λx², (1−λ²)r + (1+λ²)x³) / ((1+λ²)r + (1−λ²)x³),  r = |x|,
//
// whose denominator is ≥ 2 min(1, λ²) r > 0. It is regular on the south-pole
// ray, where it takes the limiting value (0, 0, −1).
#[inline]
fn rational_parts(lambda: f64, x: &Vector3<f64>) -> (f64, f64, f64, f64, Vector3<f64>) {
    let r = x.norm();
    let a = 1.0 - lambda * lambda;
    let b = 1.0 + lambda * lambda;
    let num = Vector3::new(2.0 * lambda * x[0], 2.0 * lambda * x[1], a * r + b * x[2]);
    let den = b * r + a * x[2];
    (r, a, b, den, num)
}

fn check_origin(x: &Vector3<f64>, exclusion: f64) -> Result<()> {
    let r = x.norm();
    if !r.is_finite() {
        return Err(Error::domain("non-finite evaluation point"));
    }
    if r <= exclusion {
        return Err(Error::singular(format!(
            "v_λ evaluated at |x| = {r:e} inside the exclusion radius {exclusion:e}"
        )));
    }
    Ok(())
}

/// `v_λ(x)`; zero-homogeneous, singular only at `x = 0`.
pub fn harmonic_v(params: &MapParams, x: &Vector3<f64>) -> Result<Vector3<f64>> {
    check_origin(x, ANALYTIC_EXCLUSION)?;
    let (_, _, _, den, num) = rational_parts(params.lambda, x);
    Ok(num / den)
}

fn harmonic_jet_unchecked(lambda: f64, x: &Vector3<f64>) -> JetSample {
    let (r, a, b, den, num) = rational_parts(lambda, x);
    let v = num / den;
    let xr = x / r;
    let mut grad = Matrix3::zeros();
    for i in 0..3 {
        let d_den = b * xr[i] + if i == 2 { a } else { 0.0 };
        let d_num = Vector3::new(
            if i == 0 { 2.0 * lambda } else { 0.0 },
            if i == 1 { 2.0 * lambda } else { 0.0 },
            a * xr[i] + if i == 2 { b } else { 0.0 },
        );
        for j in 0..3 {
            grad[(i, j)] = (d_num[j] - v[j] * d_den) / den;
        }
    }
    JetSample::new(v, Vector3::zeros(), grad)
}

/// Jet of the stationary map `(t, x) ↦ v_λ(x)`; `dt = 0`.
pub fn harmonic_v_jet(params: &MapParams, x: &Vector3<f64>) -> Result<JetSample> {
    check_origin(x, ANALYTIC_EXCLUSION)?;
    Ok(harmonic_jet_unchecked(params.lambda, x))
}

fn boosted_jet(params: &MapParams, pt: &SpacetimePoint, exclusion: f64) -> Result<JetSample> {
    let theta = params.theta();
    let z = Vector3::new(pt.x[0], pt.x[1], theta * (pt.x[2] - params.nu * pt.t));
    if z.norm() <= exclusion {
        return Err(Error::singular(format!(
            "φ_λ evaluated within {exclusion:e} of the line x¹ = x² = 0, x³ = νt"
        )));
    }
    check_origin(&z, 0.0)?;
    let j = harmonic_jet_unchecked(params.lambda, &z);
    let d3 = j.grad.row(2).transpose();
    let mut grad = j.grad;
    grad.row_mut(2).copy_from(&(d3 * theta).transpose());
    Ok(JetSample::new(j.value, d3 * (-theta * params.nu), grad))
}

/// Jet of `φ_λ(t, x) = v_λ(x¹, x², Θ(x³ − νt))`.
pub fn boosted_phi_jet(params: &MapParams, pt: &SpacetimePoint) -> Result<JetSample> {
    boosted_jet(params, pt, ANALYTIC_EXCLUSION)
}

/// Strength of the point charge in `∂_i S_ij = V_j δ_{x=0}`, `V = (0, 0, s(λ))`,
/// in the closed form
///
/// `s(λ) = −8π/(λ²−1)² · (λ⁴ − 4λ² log λ − 1)` for `λ ≠ 1`, `s(1) = 0`.
///
/// Evaluated as `s = −4π (sinh 2x − 2x)/sinh²x` with `x = log λ`, which is the
/// same expression with the removable `0/0` at `λ = 1` exposed; the
/// difference `sinh 2x − 2x` is summed as a power series for small `|x|`.
pub fn s_lambda(lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::domain(format!("s(λ) needs λ > 0, got {lambda}")));
    }
    let x = lambda.ln();
    if x == 0.0 {
        return Ok(0.0);
    }
    let odd_tail = if x.abs() < 0.25 {
        // Σ_{k≥1} (2x)^{2k+1}/(2k+1)!
        let y = 2.0 * x;
        let mut term = y * y * y / 6.0;
        let mut sum = 0.0f64;
        let mut k = 1.0;
        while term.abs() > 1e-18 * sum.abs().max(f64::MIN_POSITIVE) {
            sum += term;
            term *= y * y / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
            k += 1.0;
        }
        sum
    } else {
        (2.0 * x).sinh() - 2.0 * x
    };
    let sh = x.sinh();
    Ok(-4.0 * PI * odd_tail / (sh * sh))
}

/// The stationary map `(t, x) ↦ v_λ(x)` as a field.
#[derive(Debug, Clone, Copy)]
pub struct StationaryHarmonic {
    pub params: MapParams,
}

impl StationaryHarmonic {
    pub fn new(lambda: f64) -> Result<Self> {
        Ok(Self {
            params: MapParams::new(lambda, 0.0)?,
        })
    }
}

impl FieldEvaluator for StationaryHarmonic {
    fn jet(&self, pt: &SpacetimePoint) -> Result<JetSample> {
        harmonic_v_jet(&self.params, &pt.x)
    }
    fn value(&self, pt: &SpacetimePoint) -> Result<Vector3<f64>> {
        harmonic_v(&self.params, &pt.x)
    }
    fn singular_point(&self, _t: f64) -> Option<Vector3<f64>> {
        Some(Vector3::zeros())
    }
}

/// The moving weak wave map `φ_λ = v_λ ∘ Λ`.
#[derive(Debug, Clone, Copy)]
pub struct BoostedHarmonic {
    pub params: MapParams,
    /// Jets closer than this (in boosted coordinates) to the singular line are refused.
    pub exclusion: f64,
}

impl BoostedHarmonic {
    pub fn new(params: MapParams) -> Self {
        Self {
            params,
            exclusion: ANALYTIC_EXCLUSION,
        }
    }

    pub fn with_exclusion(params: MapParams, exclusion: f64) -> Self {
        Self { params, exclusion }
    }
}

impl FieldEvaluator for BoostedHarmonic {
    fn jet(&self, pt: &SpacetimePoint) -> Result<JetSample> {
        boosted_jet(&self.params, pt, self.exclusion)
    }

    fn value(&self, pt: &SpacetimePoint) -> Result<Vector3<f64>> {
        let z = Vector3::new(pt.x[0], pt.x[1], self.params.theta() * (pt.x[2] - self.params.nu * pt.t));
        check_origin(&z, self.exclusion)?;
        let (_, _, _, den, num) = rational_parts(self.params.lambda, &z);
        Ok(num / den)
    }

    fn singular_point(&self, t: f64) -> Option<Vector3<f64>> {
        Some(Vector3::new(0.0, 0.0, self.params.nu * t))
    }
}

/// Cauchy data of `φ_λ`:
/// `f(x) = v_λ(x¹, x², Θx³)`, `g(x) = −Θν (∂₃v_λ)(x¹, x², Θx³)`.
#[derive(Debug, Clone, Copy)]
pub struct BoostedCauchyData {
    pub params: MapParams,
}

pub fn initial_data(params: &MapParams) -> BoostedCauchyData {
    BoostedCauchyData { params: *params }
}

impl BoostedCauchyData {
    fn scaled_arg(&self, x: &Vector3<f64>) -> Vector3<f64> {
        Vector3::new(x[0], x[1], self.params.theta() * x[2])
    }
}

impl CauchyData for BoostedCauchyData {
    fn position(&self, x: &Vector3<f64>) -> Result<Vector3<f64>> {
        harmonic_v(&self.params, &self.scaled_arg(x))
    }

    fn velocity(&self, x: &Vector3<f64>) -> Result<Vector3<f64>> {
        let j = harmonic_v_jet(&self.params, &self.scaled_arg(x))?;
        Ok(j.grad.row(2).transpose() * (-self.params.theta() * self.params.nu))
    }
}
