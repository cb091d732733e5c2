//! Numerical laboratory for weak wave maps from Minkowski space `R^{1+3}` into
//! the round sphere `S^2`.
//!
//! The crate is organised bottom-up:
//!
//! * [`spacetime`]: Minkowski metric, boosts along `x^3`, backward light cones.
//! * [`fields`]: first-order jets, the dilated harmonic maps `v_λ`, their
//!   boosted images `φ_λ`, Cauchy data and grid-backed fields.
//! * [`stress_energy`]: energy/flux densities, the stress-energy tensor, its
//!   divergence, weak residuals and distributional pairings.
//! * [`quadrature`]: ball, cone-surface and solid-cone rules and the
//!   [`quadrature::BalanceReport`] that decides the local energy inequality.
//! * [`solver`]: explicit leapfrog solver for the penalized problem
//!   `u_tt = Δu − n²(|u|²−1)u`.
//!
//! Sign conventions are fixed project-wide: signature `(−,+,+,+)`,
//! `∂_αu·∂^αu = |∇u|² − |u_t|²`, and the wave-map equation is used in the form
//! `u_tt = Δu + (|∇u|² − |u_t|²) u`.

pub mod error;
pub mod fields;
pub mod quadrature;
pub mod solver;
pub mod spacetime;
pub mod stress_energy;

pub use error::{Error, Result};
pub use fields::{FieldEvaluator, JetSample, MapParams};
pub use spacetime::{ConeSpec, DiskSpec, LorentzBoost, SpacetimePoint};

pub use nalgebra::{Matrix3, Matrix4, Vector2, Vector3, Vector4};
