//! Disk energies, cone fluxes and the local energy balance built from them.

use serde::{Deserialize, Serialize};

use super::{interior_focus, BallRule, ConeSurfaceRule, LineRule, QuadLevels, SolidConeRule};
use crate::error::{Error, Result};
use crate::fields::FieldEvaluator;
use crate::spacetime::{disk_at, ConeSpec, DiskSpec, SpacetimePoint};
use crate::stress_energy::bump::profile_1d;
use crate::stress_energy::{energy_density, flux_integrand, potential};

/// `balance = e_base − e_top − flux`; the inequality holds when `balance ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BalanceReport {
    pub e_base: f64,
    pub e_top: f64,
    pub flux: f64,
    pub balance: f64,
    pub error_estimate: f64,
}

impl BalanceReport {
    fn from_parts(e_base: f64, e_top: f64, flux: f64, error_estimate: f64) -> Self {
        Self {
            e_base,
            e_top,
            flux,
            balance: e_base - e_top - flux,
            error_estimate,
        }
    }
}

fn disk_integral<F, G>(field: &F, disk: &DiskSpec, rule: &BallRule, density: G) -> Result<f64>
where
    F: FieldEvaluator,
    G: Fn(&crate::fields::JetSample) -> f64 + Sync,
{
    let focus = interior_focus(field.singular_point(disk.time), &disk.center, disk.radius);
    rule.integrate(&disk.center, disk.radius, focus, |x| {
        let j = field.jet(&SpacetimePoint::new(disk.time, *x))?;
        Ok(density(&j))
    })
}

/// `½∫_D (|u_t|² + |∇u|²) dx`.
pub fn energy_on_disk<F: FieldEvaluator>(field: &F, disk: &DiskSpec, rule: &BallRule) -> Result<f64> {
    disk_integral(field, disk, rule, energy_density)
}

/// `energy_on_disk + n²∫_D F(u) dx`.
pub fn penalized_energy_on_disk<F: FieldEvaluator>(
    field: &F,
    disk: &DiskSpec,
    rule: &BallRule,
    n: f64,
) -> Result<f64> {
    let n2 = n * n;
    disk_integral(field, disk, rule, |j| energy_density(j) + n2 * potential(&j.value))
}

/// `(1/2√2)∫_{M_s^t} |∇u − n̂u_t|² dσ = ½∫∫ |∇u − n̂u_t|² r² dΩ dτ`.
pub fn flux_on_cone<F: FieldEvaluator>(
    field: &F,
    cone: &ConeSpec,
    s: f64,
    t: f64,
    rule: &ConeSurfaceRule,
) -> Result<f64> {
    penalized_flux_on_cone(field, cone, s, t, rule, 0.0)
}

/// Flux of the penalized energy: `(1/2√2)∫ (|∇u − n̂u_t|² + 2n²F(u)) dσ`.
pub fn penalized_flux_on_cone<F: FieldEvaluator>(
    field: &F,
    cone: &ConeSpec,
    s: f64,
    t: f64,
    rule: &ConeSurfaceRule,
    n: f64,
) -> Result<f64> {
    let n2 = n * n;
    let raw: f64 = rule.integrate(cone, s, t, |pt, om| {
        let j = field.jet(pt)?;
        Ok(flux_integrand(&j, om) + 2.0 * n2 * potential(&j.value))
    })?;
    Ok(raw / (2.0 * std::f64::consts::SQRT_2))
}

fn balance_once<F: FieldEvaluator>(
    field: &F,
    cone: &ConeSpec,
    s: f64,
    t: f64,
    levels: &QuadLevels,
    n: f64,
) -> Result<(f64, f64, f64)> {
    let ball = levels.ball();
    let e_base = penalized_energy_on_disk(field, &disk_at(cone, s)?, &ball, n)?;
    let e_top = penalized_energy_on_disk(field, &disk_at(cone, t)?, &ball, n)?;
    let flux = penalized_flux_on_cone(field, cone, s, t, &levels.surface(), n)?;
    Ok((e_base, e_top, flux))
}

/// `E(D_s) − E(D_t) − Flux(M_s^t)` at `levels`, with the difference to the
/// half-resolution rules as error estimate.
pub fn energy_balance<F: FieldEvaluator>(
    field: &F,
    cone: &ConeSpec,
    s: f64,
    t: f64,
    levels: &QuadLevels,
) -> Result<BalanceReport> {
    penalized_energy_balance(field, cone, s, t, levels, 0.0)
}

/// Same as [`energy_balance`] for the penalized energy and flux.
pub fn penalized_energy_balance<F: FieldEvaluator>(
    field: &F,
    cone: &ConeSpec,
    s: f64,
    t: f64,
    levels: &QuadLevels,
    n: f64,
) -> Result<BalanceReport> {
    if !(s < t) {
        return Err(Error::domain(format!("balance needs s < t, got {s}, {t}")));
    }
    let (b, e, f) = balance_once(field, cone, s, t, levels, n)?;
    let (bc, ec, fc) = balance_once(field, cone, s, t, &levels.coarse(), n)?;
    let err = ((b - e - f) - (bc - ec - fc)).abs();
    Ok(BalanceReport::from_parts(b, e, f, err))
}

/// Outer rule in the radius offset `δ` together with the surface rule.
#[derive(Debug, Clone, PartialEq)]
pub struct MollifierRule {
    pub delta: LineRule,
    pub surface: ConeSurfaceRule,
}

impl MollifierRule {
    pub fn new(n_delta: usize, surface: ConeSurfaceRule) -> Self {
        Self {
            delta: LineRule::gauss(n_delta),
            surface,
        }
    }
}

/// `(1/ε)∫_{−ε}^{ε} ψ(δ/ε) ∫_{M_0^t(p; r+δ)} |∇u − n̂u_t|² dσ dδ`, with `r` the
/// base radius of `cone` at its truncation start `cone.a` and `t` the top time.
///
/// Tends to `2√2·Flux(M)` as `ε → 0` for fields smooth near the surface.
pub fn mollified_flux<F: FieldEvaluator>(
    field: &F,
    cone: &ConeSpec,
    t: f64,
    eps: f64,
    rule: &MollifierRule,
) -> Result<f64> {
    let r = cone.base_radius();
    if !(eps > 0.0 && eps < r) {
        return Err(Error::domain(format!("mollifier width {eps} must lie in (0, {r})")));
    }
    let mut acc = 0.0;
    for (d, w) in rule.delta.mapped(-eps, eps) {
        let c = cone.widened(d)?;
        let raw: f64 = rule.surface.integrate(&c, cone.a, t, |pt, om| {
            let j = field.jet(pt)?;
            Ok(flux_integrand(&j, om))
        })?;
        acc += w * profile_1d(d / eps) / eps * raw;
    }
    Ok(acc)
}

/// `(∫_s^t ∫_{D(τ)} |u − w|² dx dτ)^{1/2}` over a truncated cone.
pub fn cone_l2_distance<A: FieldEvaluator, B: FieldEvaluator>(
    a: &A,
    b: &B,
    cone: &ConeSpec,
    s: f64,
    t: f64,
    rule: &SolidConeRule,
) -> Result<f64> {
    let sq: f64 = rule.integrate(
        cone,
        s,
        t,
        |tau| a.singular_point(tau).or_else(|| b.singular_point(tau)),
        |pt| Ok((a.value(pt)? - b.value(pt)?).norm_squared()),
    )?;
    Ok(sq.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector3;
    use crate::fields::{BoostedHarmonic, ConstantField, GeodesicPlaneWave, MapParams, StationaryHarmonic};
    use std::f64::consts::PI;

    #[test]
    fn constant_fields_carry_no_energy() {
        let f = ConstantField(Vector3::new(0.0, 0.0, 1.0));
        let disk = DiskSpec::new(0.0, Vector3::zeros(), 1.0).unwrap();
        let rule = QuadLevels::uniform(4).ball();
        assert_eq!(energy_on_disk(&f, &disk, &rule).unwrap(), 0.0);
        assert_eq!(penalized_energy_on_disk(&f, &disk, &rule, 5.0).unwrap(), 0.0);
        let cone = ConeSpec::from_base(Vector3::zeros(), 0.0, 1.0, 0.5).unwrap();
        assert_eq!(flux_on_cone(&f, &cone, 0.0, 0.5, &QuadLevels::uniform(4).surface()).unwrap(), 0.0);
    }

    #[test]
    fn hedgehog_energy_on_unit_ball() {
        let v1 = StationaryHarmonic::new(1.0).unwrap();
        let disk = DiskSpec::new(0.0, Vector3::zeros(), 1.0).unwrap();
        let e = energy_on_disk(&v1, &disk, &QuadLevels::default().ball()).unwrap();
        assert!((e - 4.0 * PI).abs() < 1e-10, "{e}");
    }

    #[test]
    fn penalized_energy_of_off_sphere_constant() {
        let f = ConstantField(Vector3::new(2.0, 0.0, 0.0));
        let disk = DiskSpec::new(0.0, Vector3::zeros(), 1.0).unwrap();
        let rule = QuadLevels::uniform(8).ball();
        for n in [0.0, 1.0, 3.0] {
            let e = penalized_energy_on_disk(&f, &disk, &rule, n).unwrap();
            assert!((e - 3.0 * PI * n * n).abs() < 1e-10);
        }
    }

    #[test]
    fn smooth_wave_map_balances() {
        let w = GeodesicPlaneWave::new(1.7, Vector3::new(0.9, -0.4, 1.1));
        let cone = ConeSpec::from_base(Vector3::new(0.1, 0.0, -0.2), 0.0, 0.5, 0.3).unwrap();
        let rep = energy_balance(&w, &cone, 0.0, 0.3, &QuadLevels::uniform(16)).unwrap();
        assert!(rep.balance.abs() < 1e-10, "{rep:?}");
        assert!(rep.flux > 0.0);
        assert_eq!(rep.balance, rep.e_base - rep.e_top - rep.flux);
    }

    #[test]
    fn null_wave_balances_with_penalty() {
        // a null wave stays on the sphere, so the penalty terms vanish identically
        let w = GeodesicPlaneWave::null(Vector3::new(0.0, 2.0, 1.0));
        let cone = ConeSpec::from_base(Vector3::zeros(), 0.0, 0.4, 0.2).unwrap();
        let rep = penalized_energy_balance(&w, &cone, 0.0, 0.2, &QuadLevels::uniform(16), 7.0).unwrap();
        assert!(rep.balance.abs() < 1e-10);
    }

    #[test]
    fn moving_map_balance_is_positive_for_large_dilation() {
        let p = MapParams::new(2.0, 0.6).unwrap();
        let phi = BoostedHarmonic::new(p);
        let cone = ConeSpec::from_base(Vector3::zeros(), 0.0, 0.5, 0.2).unwrap();
        let rep = energy_balance(&phi, &cone, 0.0, 0.2, &QuadLevels::default()).unwrap();
        // the measured jump is ν·(−s(λ)/2)·(t − s)
        let s2 = crate::fields::s_lambda(2.0).unwrap();
        let expected = 0.6 * (-s2 / 2.0) * 0.2;
        assert!((rep.balance - expected).abs() < 1e-3 * expected, "{rep:?} vs {expected}");

        // a cone that stays away from the singular line conserves energy
        let away = ConeSpec::from_base(Vector3::new(0.6, 0.0, 0.0), 0.0, 0.3, 0.2).unwrap();
        let rep = energy_balance(&phi, &away, 0.0, 0.2, &QuadLevels::default()).unwrap();
        assert!(rep.balance.abs() < 1e-8, "{rep:?}");
    }

    #[test]
    fn mollified_flux_tends_to_scaled_flux() {
        let w = GeodesicPlaneWave::new(1.2, Vector3::new(0.5, 0.3, -0.8));
        let cone = ConeSpec::from_base(Vector3::zeros(), 0.0, 0.5, 0.2).unwrap();
        let surf = QuadLevels::uniform(12).surface();
        let flux = flux_on_cone(&w, &cone, 0.0, 0.2, &surf).unwrap();
        let target = 2.0 * std::f64::consts::SQRT_2 * flux;
        let rule = MollifierRule::new(24, surf);
        let errs: Vec<f64> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&e| (mollified_flux(&w, &cone, 0.2, e, &rule).unwrap() - target).abs())
            .collect();
        assert!(errs[1] < 0.6 * errs[0] && errs[2] < 0.6 * errs[1], "{errs:?}");
        assert!(mollified_flux(&w, &cone, 0.2, 0.6, &rule).is_err());
    }
}
