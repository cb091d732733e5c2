//! Minkowski geometry: points, the metric `η = diag(−1, 1, 1, 1)`, boosts
//! along `x^3` and backward light cones with their time slices.

use nalgebra::{Matrix4, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The Minkowski metric with signature `(−,+,+,+)`.
pub fn eta() -> Matrix4<f64> {
    Matrix4::from_diagonal(&Vector4::new(-1.0, 1.0, 1.0, 1.0))
}

/// `η(v, w) = −v⁰w⁰ + Σᵢ vⁱwⁱ`.
#[inline]
pub fn minkowski_dot(v: &Vector4<f64>, w: &Vector4<f64>) -> f64 {
    -v[0] * w[0] + v[1] * w[1] + v[2] * w[2] + v[3] * w[3]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacetimePoint {
    pub t: f64,
    pub x: Vector3<f64>,
}

impl SpacetimePoint {
    pub fn new(t: f64, x: Vector3<f64>) -> Self {
        Self { t, x }
    }

    pub fn from_coords(t: f64, x1: f64, x2: f64, x3: f64) -> Self {
        Self::new(t, Vector3::new(x1, x2, x3))
    }

    pub fn origin() -> Self {
        Self::new(0.0, Vector3::zeros())
    }

    pub fn to_vector(&self) -> Vector4<f64> {
        Vector4::new(self.t, self.x[0], self.x[1], self.x[2])
    }

    pub fn from_vector(v: &Vector4<f64>) -> Self {
        Self::from_coords(v[0], v[1], v[2], v[3])
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.x.iter().all(|c| c.is_finite())
    }

    /// Shift by `h` along coordinate direction `axis` (0 = time).
    pub fn shifted(&self, axis: usize, h: f64) -> Self {
        let mut p = *self;
        if axis == 0 {
            p.t += h;
        } else {
            p.x[axis - 1] += h;
        }
        p
    }
}

/// Lorentz boost with speed `nu` along the `x^3` axis.
///
/// The matrix acts on column vectors `(t, x¹, x², x³)`:
///
/// ```text
/// ⎛  Θ    0  0  −νΘ ⎞
/// ⎜  0    1  0   0  ⎟
/// ⎜  0    0  1   0  ⎟
/// ⎝ −νΘ   0  0   Θ  ⎠
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzBoost {
    pub nu: f64,
    pub theta: f64,
    pub matrix: Matrix4<f64>,
}

/// Builds the `x^3` boost with speed `nu`; fails unless `|nu| < 1`.
pub fn boost_matrix(nu: f64) -> Result<LorentzBoost> {
    if !nu.is_finite() || nu.abs() >= 1.0 {
        return Err(Error::domain(format!("boost speed must satisfy |nu| < 1, got {nu}")));
    }
    let theta = 1.0 / (1.0 - nu * nu).sqrt();
    let mut m = Matrix4::identity();
    m[(0, 0)] = theta;
    m[(3, 3)] = theta;
    m[(0, 3)] = -nu * theta;
    m[(3, 0)] = -nu * theta;
    Ok(LorentzBoost {
        nu,
        theta,
        matrix: m,
    })
}

/// `b · pt` in coordinates.
pub fn apply_boost(b: &LorentzBoost, pt: &SpacetimePoint) -> SpacetimePoint {
    b.apply(pt)
}

impl LorentzBoost {
    pub fn identity() -> Self {
        boost_matrix(0.0).expect("zero speed is admissible")
    }

    pub fn new(nu: f64) -> Result<Self> {
        boost_matrix(nu)
    }

    pub fn apply(&self, pt: &SpacetimePoint) -> SpacetimePoint {
        SpacetimePoint::from_vector(&(self.matrix * pt.to_vector()))
    }

    pub fn apply_vector(&self, v: &Vector4<f64>) -> Vector4<f64> {
        self.matrix * v
    }

    /// The inverse boost, i.e. the boost with speed `−nu`.
    pub fn inverse(&self) -> Self {
        boost_matrix(-self.nu).expect("inverse of an admissible boost is admissible")
    }
}

/// A backward light cone `K(τ, p) = {(s, x) : |x − p| ≤ τ − s}` truncated to
/// the time interval `[a, b]`, `a < b ≤ τ`.
///
/// Time slices have radius `τ − s`, shrinking toward the apex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeSpec {
    pub apex: SpacetimePoint,
    pub a: f64,
    pub b: f64,
}

impl ConeSpec {
    pub fn new(apex: SpacetimePoint, a: f64, b: f64) -> Result<Self> {
        if !apex.is_finite() || !a.is_finite() || !b.is_finite() {
            return Err(Error::domain("cone parameters must be finite"));
        }
        if !(a < b && b <= apex.t) {
            return Err(Error::domain(format!(
                "cone truncation needs a < b <= apex time, got a={a}, b={b}, apex={}",
                apex.t
            )));
        }
        Ok(Self { apex, a, b })
    }

    /// Cone whose base is the disk of radius `base_radius` centred at `center`
    /// at time `base_time`, truncated `height` later.
    pub fn from_base(
        center: Vector3<f64>,
        base_time: f64,
        base_radius: f64,
        height: f64,
    ) -> Result<Self> {
        if !(base_radius > 0.0 && height > 0.0 && height <= base_radius) {
            return Err(Error::domain(format!(
                "need 0 < height <= base radius, got height={height}, radius={base_radius}"
            )));
        }
        let apex = SpacetimePoint::new(base_time + base_radius, center);
        Self::new(apex, base_time, base_time + height)
    }

    pub fn center(&self) -> Vector3<f64> {
        self.apex.x
    }

    pub fn radius_at(&self, s: f64) -> f64 {
        self.apex.t - s
    }

    pub fn base_radius(&self) -> f64 {
        self.radius_at(self.a)
    }

    /// Closed solid truncated cone membership.
    pub fn contains(&self, pt: &SpacetimePoint) -> bool {
        pt.t >= self.a && pt.t <= self.b && (pt.x - self.apex.x).norm() <= self.radius_at(pt.t)
    }

    /// Point on the lateral surface at time `s` in unit direction `omega`.
    pub fn lateral_point(&self, s: f64, omega: &Vector3<f64>) -> SpacetimePoint {
        SpacetimePoint::new(s, self.apex.x + omega * self.radius_at(s))
    }

    /// The same cone with the base radius changed by `delta` (apex moves in time).
    pub fn widened(&self, delta: f64) -> Result<Self> {
        let apex = SpacetimePoint::new(self.apex.t + delta, self.apex.x);
        Self::new(apex, self.a, self.b)
    }
}

/// Time slice `{s} × B(p, r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiskSpec {
    pub time: f64,
    pub center: Vector3<f64>,
    pub radius: f64,
}

impl DiskSpec {
    pub fn new(time: f64, center: Vector3<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::domain(format!("disk radius must be positive, got {radius}")));
        }
        Ok(Self {
            time,
            center,
            radius,
        })
    }

    pub fn volume(&self) -> f64 {
        4.0 / 3.0 * std::f64::consts::PI * self.radius.powi(3)
    }
}

/// `D(s, τ, p) = K(τ, p) ∩ {s} × R³`.
pub fn disk_at(cone: &ConeSpec, s: f64) -> Result<DiskSpec> {
    if s >= cone.apex.t {
        return Err(Error::domain(format!(
            "time slice s={s} at or above the apex t={} is empty",
            cone.apex.t
        )));
    }
    if s < cone.a || s > cone.b {
        return Err(Error::range(format!(
            "time slice s={s} outside the truncation [{}, {}]",
            cone.a, cone.b
        )));
    }
    DiskSpec::new(s, cone.apex.x, cone.radius_at(s))
}
