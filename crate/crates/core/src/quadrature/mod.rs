//! Quadrature over balls, lateral cone surfaces and solid truncated cones.
//!
//! Lateral surfaces `M_s^t(p)` of a backward cone are parametrized by
//! `(τ, ω) ∈ [s, t] × S²`, `x = p + r(τ)ω`, `r(τ) = τ_apex − τ`. Since
//! `|r′| = 1` the pulled-back metric is `dτ²(1 + r′²) + r²dΩ²`, so the induced
//! measure is `dσ = √2 r(τ)² dτ dΩ`. With it the flux normalization
//! `(1/2√2)∫|∇u − n̂u_t|² dσ` becomes `½∫∫|∇u − n̂u_t|² r² dΩ dτ`.
//!
//! Balls use polar coordinates centred at a focus point (the field's singular
//! point when it lies inside). The Jacobian `ρ²` cancels integrands that blow
//! up like `1/ρ²`, so Gauss rules keep converging on singular fields.
//!
//! Sums are accumulated per angular node in parallel and then added in a fixed
//! order, so results are bit-reproducible.

mod balance;

pub use balance::{
    cone_l2_distance, energy_balance, energy_on_disk, flux_on_cone, mollified_flux,
    penalized_energy_balance, penalized_energy_on_disk, penalized_flux_on_cone, BalanceReport,
    MollifierRule,
};

use gauss_quad::legendre::GaussLegendre;
use nalgebra::{Vector3, Vector4};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::num::NonZeroUsize;

use crate::error::{Error, Result};
use crate::spacetime::{ConeSpec, SpacetimePoint};

/// Gauss–Legendre nodes and weights on `[−1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let n = NonZeroUsize::new(n).expect("at least one quadrature node");
    let mut pairs = GaussLegendre::new(n).as_node_weight_pairs().to_vec();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs
}

/// Values that can be summed by the rules.
pub trait Accumulator: Copy + Send + Sync {
    fn zero() -> Self;
    fn add_scaled(&mut self, v: &Self, w: f64);
}

impl Accumulator for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add_scaled(&mut self, v: &Self, w: f64) {
        *self += v * w;
    }
}

impl Accumulator for Vector3<f64> {
    fn zero() -> Self {
        Vector3::zeros()
    }
    fn add_scaled(&mut self, v: &Self, w: f64) {
        *self += v * w;
    }
}

impl Accumulator for Vector4<f64> {
    fn zero() -> Self {
        Vector4::zeros()
    }
    fn add_scaled(&mut self, v: &Self, w: f64) {
        *self += v * w;
    }
}

impl<const N: usize> Accumulator for [f64; N] {
    fn zero() -> Self {
        [0.0; N]
    }
    fn add_scaled(&mut self, v: &Self, w: f64) {
        for (a, b) in self.iter_mut().zip(v) {
            *a += b * w;
        }
    }
}

fn ordered_sum<T: Accumulator>(parts: &[T]) -> T {
    let mut acc = T::zero();
    for p in parts {
        acc.add_scaled(p, 1.0);
    }
    acc
}

/// Rule on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LineRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl LineRule {
    pub fn gauss(n: usize) -> Self {
        Self::composite_gauss(1, n)
    }

    /// `panels` equal panels with `per_panel` Gauss points each; nominal order `2·per_panel`.
    pub fn composite_gauss(panels: usize, per_panel: usize) -> Self {
        let base = gauss_legendre(per_panel);
        let hp = 1.0 / panels as f64;
        let mut nodes = Vec::with_capacity(panels * per_panel);
        let mut weights = Vec::with_capacity(panels * per_panel);
        for k in 0..panels {
            for &(x, w) in &base {
                nodes.push(hp * (k as f64 + 0.5 * (x + 1.0)));
                weights.push(0.5 * hp * w);
            }
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let l = b - a;
        self.nodes.iter().zip(&self.weights).map(move |(&x, &w)| (a + l * x, l * w))
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// Product rule on `S²`: Gauss–Legendre in `cos θ` times the trapezoid rule in `φ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereRule {
    pub dirs: Vec<Vector3<f64>>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    pub fn product(n_theta: usize, n_phi: usize) -> Self {
        let mut dirs = Vec::with_capacity(n_theta * n_phi);
        let mut weights = Vec::with_capacity(n_theta * n_phi);
        let dphi = 2.0 * PI / n_phi as f64;
        for (z, w) in gauss_legendre(n_theta) {
            let s = (1.0 - z * z).sqrt();
            for k in 0..n_phi {
                // half-step offset keeps nodes off the x¹x³ half-plane
                let phi = (k as f64 + 0.5) * dphi;
                dirs.push(Vector3::new(s * phi.cos(), s * phi.sin(), z));
                weights.push(w * dphi);
            }
        }
        Self { dirs, weights }
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }
}

/// Resolution of the ball/cone rules; the coarse companion halves every count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadLevels {
    pub n_r: usize,
    pub n_theta: usize,
    pub n_phi: usize,
    pub n_t: usize,
}

impl Default for QuadLevels {
    fn default() -> Self {
        Self {
            n_r: 64,
            n_theta: 32,
            n_phi: 64,
            n_t: 64,
        }
    }
}

impl QuadLevels {
    pub fn uniform(n: usize) -> Self {
        Self {
            n_r: n,
            n_theta: n,
            n_phi: 2 * n,
            n_t: n,
        }
    }

    pub fn coarse(&self) -> Self {
        Self {
            n_r: (self.n_r / 2).max(1),
            n_theta: (self.n_theta / 2).max(1),
            n_phi: (self.n_phi / 2).max(1),
            n_t: (self.n_t / 2).max(1),
        }
    }

    pub fn scaled(&self, k: usize) -> Self {
        Self {
            n_r: self.n_r * k,
            n_theta: self.n_theta * k,
            n_phi: self.n_phi * k,
            n_t: self.n_t * k,
        }
    }

    pub fn ball(&self) -> BallRule {
        BallRule::new(self.n_r, self.n_theta, self.n_phi)
    }

    pub fn surface(&self) -> ConeSurfaceRule {
        ConeSurfaceRule::new(self.n_t, self.n_theta, self.n_phi)
    }

    pub fn solid(&self) -> SolidConeRule {
        SolidConeRule::new(self.n_t, self.ball())
    }
}

/// Polar rule for balls `B(c, r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BallRule {
    pub radial: LineRule,
    pub angular: SphereRule,
}

impl BallRule {
    pub fn new(n_r: usize, n_theta: usize, n_phi: usize) -> Self {
        Self {
            radial: LineRule::gauss(n_r),
            angular: SphereRule::product(n_theta, n_phi),
        }
    }

    /// `∫_{B(center, radius)} f dx`, polar coordinates about `focus`
    /// (which must lie strictly inside the ball) or about the centre.
    pub fn integrate<T, F>(
        &self,
        center: &Vector3<f64>,
        radius: f64,
        focus: Option<Vector3<f64>>,
        f: F,
    ) -> Result<T>
    where
        T: Accumulator,
        F: Fn(&Vector3<f64>) -> Result<T> + Sync,
    {
        let q = focus.unwrap_or(*center);
        let off = q - center;
        let c = off.norm_squared() - radius * radius;
        if c >= 0.0 {
            return Err(Error::domain("quadrature focus must lie inside the ball"));
        }
        let parts = (0..self.angular.len())
            .into_par_iter()
            .map(|k| {
                let om = &self.angular.dirs[k];
                let b = om.dot(&off);
                let rho_max = -b + (b * b - c).sqrt();
                let mut acc = T::zero();
                for (rho, w) in self.radial.mapped(0.0, rho_max) {
                    let v = f(&(q + om * rho))?;
                    acc.add_scaled(&v, w * rho * rho);
                }
                let mut out = T::zero();
                out.add_scaled(&acc, self.angular.weights[k]);
                Ok(out)
            })
            .collect::<Result<Vec<T>>>()?;
        Ok(ordered_sum(&parts))
    }

    /// `∫_{inner < |x − center| < outer} f dx`.
    pub fn integrate_shell<T, F>(&self, center: &Vector3<f64>, inner: f64, outer: f64, f: F) -> Result<T>
    where
        T: Accumulator,
        F: Fn(&Vector3<f64>) -> Result<T> + Sync,
    {
        if !(0.0 <= inner && inner < outer) {
            return Err(Error::domain(format!("invalid shell radii {inner}, {outer}")));
        }
        let parts = (0..self.angular.len())
            .into_par_iter()
            .map(|k| {
                let om = &self.angular.dirs[k];
                let mut acc = T::zero();
                for (rho, w) in self.radial.mapped(inner, outer) {
                    let v = f(&(center + om * rho))?;
                    acc.add_scaled(&v, w * rho * rho);
                }
                let mut out = T::zero();
                out.add_scaled(&acc, self.angular.weights[k]);
                Ok(out)
            })
            .collect::<Result<Vec<T>>>()?;
        Ok(ordered_sum(&parts))
    }
}

/// Rule on lateral cone surfaces, `dσ = √2 r(τ)² dτ dΩ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeSurfaceRule {
    pub time: LineRule,
    pub angular: SphereRule,
}

impl ConeSurfaceRule {
    pub fn new(n_t: usize, n_theta: usize, n_phi: usize) -> Self {
        Self {
            time: LineRule::gauss(n_t),
            angular: SphereRule::product(n_theta, n_phi),
        }
    }

    /// `∫_{M_s^t} f dσ`; `f` receives the surface point and the outward spatial normal.
    pub fn integrate<T, F>(&self, cone: &ConeSpec, s: f64, t: f64, f: F) -> Result<T>
    where
        T: Accumulator,
        F: Fn(&SpacetimePoint, &Vector3<f64>) -> Result<T> + Sync,
    {
        if !(s < t) || s < cone.a - 1e-12 || t > cone.b + 1e-12 {
            return Err(Error::range(format!(
                "surface interval [{s}, {t}] outside the truncation [{}, {}]",
                cone.a, cone.b
            )));
        }
        let times: Vec<(f64, f64)> = self.time.mapped(s, t).collect();
        let parts = (0..self.angular.len())
            .into_par_iter()
            .map(|k| {
                let om = &self.angular.dirs[k];
                let mut acc = T::zero();
                for &(tau, w) in &times {
                    let r = cone.radius_at(tau);
                    let v = f(&cone.lateral_point(tau, om), om)?;
                    acc.add_scaled(&v, w * r * r);
                }
                let mut out = T::zero();
                out.add_scaled(&acc, std::f64::consts::SQRT_2 * self.angular.weights[k]);
                Ok(out)
            })
            .collect::<Result<Vec<T>>>()?;
        Ok(ordered_sum(&parts))
    }

    pub fn area(&self, cone: &ConeSpec, s: f64, t: f64) -> Result<f64> {
        self.integrate(cone, s, t, |_, _| Ok(1.0))
    }
}

/// Rule on solid truncated cones `∫_s^t ∫_{D(τ)} f dx dτ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolidConeRule {
    pub time: LineRule,
    pub ball: BallRule,
}

impl SolidConeRule {
    pub fn new(n_t: usize, ball: BallRule) -> Self {
        Self {
            time: LineRule::gauss(n_t),
            ball,
        }
    }

    pub fn integrate<T, F, G>(&self, cone: &ConeSpec, s: f64, t: f64, focus: G, f: F) -> Result<T>
    where
        T: Accumulator,
        F: Fn(&SpacetimePoint) -> Result<T> + Sync,
        G: Fn(f64) -> Option<Vector3<f64>>,
    {
        if !(s < t) || s < cone.a - 1e-12 || t > cone.b + 1e-12 {
            return Err(Error::range(format!(
                "solid interval [{s}, {t}] outside the truncation [{}, {}]",
                cone.a, cone.b
            )));
        }
        let mut acc = T::zero();
        for (tau, w) in self.time.mapped(s, t) {
            let r = cone.radius_at(tau);
            let center = cone.center();
            let focus = interior_focus(focus(tau), &center, r);
            let slice = self.ball.integrate(&center, r, focus, |x| f(&SpacetimePoint::new(tau, *x)))?;
            acc.add_scaled(&slice, w);
        }
        Ok(acc)
    }
}

/// Keeps a focus only if it lies safely inside the ball.
pub(crate) fn interior_focus(
    focus: Option<Vector3<f64>>,
    center: &Vector3<f64>,
    radius: f64,
) -> Option<Vector3<f64>> {
    focus.filter(|q| (q - center).norm() < radius * (1.0 - 1e-6))
}
