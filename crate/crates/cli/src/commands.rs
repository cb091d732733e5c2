//! One driver per subcommand. Each returns the JSON report together with the
//! CSV side files it produced; writing them is left to [`Artifacts::write`].

use std::path::{Path, PathBuf};

use wavemap_core::fields::{
    harmonic_v, initial_data, s_lambda, BoostedHarmonic, Composed, ConstantField, FnField, GeodesicPlaneWave,
    GridField, StationaryHarmonic, TimeSquaredBump,
};
use wavemap_core::quadrature::{
    cone_l2_distance, energy_balance, penalized_energy_balance, BallRule, BalanceReport, LineRule, QuadLevels,
};
use wavemap_core::solver::{penalization_sweep, run, trusted_region, EnergyLedger, RunOutput, SolverConfig};
use wavemap_core::stress_energy::bump::Bump;
use wavemap_core::stress_energy::{comp_identity_check, divergence_t, recover_point_charge, transformation_check};
use wavemap_core::{
    ConeSpec, FieldEvaluator, JetSample, LorentzBoost, MapParams, Matrix3, SpacetimePoint, Vector3,
};

use crate::config::ExperimentConfig;
use crate::report::{ConeBalance, ExperimentReport, LedgerSummary, Metric, Verdict};
use crate::{CliError, Result};

/// Relative tolerance of the quadrature-vs-formula comparison of `s(λ)`.
pub const S_TABLE_REL_TOL: f64 = 0.01;
/// Absolute bound on `s` at `λ = 1`.
pub const S_ONE_TOL: f64 = 1e-6;
/// Relative tolerance on the moving-map cone defect.
pub const DEFECT_REL_TOL: f64 = 0.02;
/// Required ratio of the non-uniqueness distance to its discretization estimate.
pub const DISTANCE_MARGIN: f64 = 10.0;
/// Minimal observed order of the exterior mismatch under refinement.
pub const EXTERIOR_ORDER: f64 = 0.9;
/// Required ratio of interior non-stationarity to the exterior mismatch.
pub const INTERIOR_MARGIN: f64 = 10.0;
/// Minimal observed order of the second-order identity checks.
pub const IDENTITY_ORDER: f64 = 1.9;
/// Bound for cases that must vanish identically.
pub const EXACT_ZERO_TOL: f64 = 1e-12;

/// A report plus named CSV side files.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub report: ExperimentReport,
    pub side_files: Vec<(String, String)>,
}

impl Artifacts {
    fn new(report: ExperimentReport) -> Self {
        Self {
            report,
            side_files: Vec::new(),
        }
    }

    /// Writes `<command>.json` and `<command>_<name>.csv` files into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let json = dir.join(format!("{}.json", self.report.command));
        std::fs::write(&json, self.report.to_json()?)?;
        written.push(json);
        for (name, text) in &self.side_files {
            let p = dir.join(format!("{}_{name}.csv", self.report.command));
            std::fs::write(&p, text)?;
            written.push(p);
        }
        Ok(written)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    /// Overrides the configured λ list when non-empty.
    STable(Vec<f64>),
    ConeBalance,
    NonuniqDemo,
    StationaryDemo,
    IdentityChecks,
    PenalizedRun,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::STable(_) => "s-table",
            Command::ConeBalance => "cone-balance",
            Command::NonuniqDemo => "nonuniq-demo",
            Command::StationaryDemo => "stationary-demo",
            Command::IdentityChecks => "identity-checks",
            Command::PenalizedRun => "penalized-run",
        }
    }

    pub fn run(&self, cfg: &ExperimentConfig, refine: usize) -> Result<Artifacts> {
        match self {
            Command::STable(l) if !l.is_empty() => cmd_s_table(cfg, l, refine),
            Command::STable(_) => cmd_s_table(cfg, &cfg.s_table.lambdas, refine),
            Command::ConeBalance => cmd_cone_balance(cfg, refine),
            Command::NonuniqDemo => cmd_nonuniq_demo(cfg, refine),
            Command::StationaryDemo => cmd_stationary_demo(cfg, refine),
            Command::IdentityChecks => cmd_identity_checks(cfg, refine),
            Command::PenalizedRun => cmd_penalized_run(cfg, refine),
        }
    }
}

/// Time the singular line `x = (0, 0, νt)` spends inside the truncated cone.
pub fn crossing_duration(cone: &ConeSpec, nu: f64) -> f64 {
    // inside iff g(t) = (ν²−1)t² + 2(τ−νc₃)t + |c|² − τ² < 0
    let c = cone.center();
    let tau = cone.apex.t;
    let qa = nu * nu - 1.0;
    let qb = 2.0 * (tau - nu * c[2]);
    let qc = c.norm_squared() - tau * tau;
    let len = cone.b - cone.a;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc <= 0.0 {
        return len;
    }
    let r = disc.sqrt();
    let (t1, t2) = {
        let x = (-qb + r) / (2.0 * qa);
        let y = (-qb - r) / (2.0 * qa);
        (x.min(y), x.max(y))
    };
    let overlap = (t2.min(cone.b) - t1.max(cone.a)).max(0.0);
    len - overlap
}

/// The defect size `Θν|s(λ)|·duration` predicted for crossing cones.
pub fn stated_defect(p: &MapParams, duration: f64) -> Result<f64> {
    Ok(p.theta() * p.nu * s_lambda(p.lambda)?.abs() * duration)
}

/// `ν·(−s(λ)/2)·duration`, the defect produced by the line charge of the
/// static stress tensor; recorded alongside the stated value.
pub fn line_charge_defect(p: &MapParams, duration: f64) -> Result<f64> {
    Ok(p.nu * (-0.5 * s_lambda(p.lambda)?) * duration)
}

fn ledger_csv(ledger: &EnergyLedger) -> Result<String> {
    let mut buf = Vec::new();
    ledger.write_csv(&mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
}

fn solve(template: &SolverConfig, h: f64, n: f64, p: &MapParams) -> Result<RunOutput> {
    let cfg = SolverConfig {
        h,
        penalty: n,
        ..*template
    };
    cfg.validate()?;
    Ok(run(&cfg, &initial_data(p))?)
}

fn require_trusted(solver: &SolverConfig, cone: &ConeSpec) -> Result<()> {
    if trusted_region(solver, cone).covers_cone() {
        Ok(())
    } else {
        Err(wavemap_core::Error::Config(format!(
            "cone with base radius {} at {:?} is not trusted for a box of half-width {} up to t = {}",
            cone.base_radius(),
            cone.center(),
            solver.half_width,
            solver.t_end
        ))
        .into())
    }
}

fn largest_penalty(cfg: &ExperimentConfig) -> Result<f64> {
    cfg.sweep
        .largest_n()
        .ok_or_else(|| CliError::Usage("empty penalty schedule".into()))
}

/// `|q − q'|` for the plain and coarse rules.
fn two_level(a: f64, b: f64) -> f64 {
    (a - b).abs()
}

pub fn cmd_s_table(cfg: &ExperimentConfig, lambdas: &[f64], refine: usize) -> Result<Artifacts> {
    let cfg = cfg.refined(refine)?;
    if let Some(bad) = lambdas.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
        return Err(CliError::Usage(format!("λ must be positive, got {bad}")));
    }
    let mut report = ExperimentReport::new("s-table", &cfg, refine);
    let levels = cfg.quadrature.levels();
    let (fine, coarse) = (levels.ball(), levels.coarse().ball());
    let bump = Bump::spatial(Vector3::zeros(), cfg.s_table.bump_radius);
    let psi0 = bump.value(&Vector3::zeros());
    let mut csv = String::from("lambda,s_formula,s_quadrature,relative_difference,error_estimate\n");
    for &lambda in lambdas {
        let p = MapParams::new(lambda, 0.0)?;
        let s = s_lambda(lambda)?;
        let v = recover_point_charge(&p, &bump, &fine)?;
        let vc = recover_point_charge(&p, &bump, &coarse)?;
        let q = v[2] / psi0;
        let est = two_level(q, vc[2] / psi0);
        let key = format!("lambda={lambda}");
        report.metric(format!("{key}/s_formula"), Metric::exact(s));
        report.metric(format!("{key}/s_quadrature"), Metric::estimated(q, est));
        report.metric(format!("{key}/transverse"), Metric::estimated(v[0].hypot(v[1]) / psi0, est));
        if s == 0.0 {
            csv.push_str(&format!("{lambda},{s},{q},,{est}\n"));
            report.verdict(Verdict::at_most(format!("{key}: |s formula|"), s.abs(), 0.0, S_ONE_TOL));
            report.verdict(Verdict::at_most(format!("{key}: |s quadrature|"), q.abs(), 0.0, S_ONE_TOL));
        } else {
            let rel = (q - s).abs() / s.abs();
            csv.push_str(&format!("{lambda},{s},{q},{rel},{est}\n"));
            report.metric(format!("{key}/relative_difference"), Metric::estimated(rel, est / s.abs()));
            report.verdict(Verdict::at_most(format!("{key}: relative difference"), rel, 0.0, S_TABLE_REL_TOL));
        }
    }
    let mut a = Artifacts::new(report);
    a.side_files.push(("table".into(), csv));
    Ok(a)
}

pub fn cmd_cone_balance(cfg: &ExperimentConfig, refine: usize) -> Result<Artifacts> {
    let cfg = cfg.refined(refine)?;
    let p = cfg.map_params()?;
    let field = BoostedHarmonic::new(p);
    let levels = cfg.quadrature.levels();
    let mut report = ExperimentReport::new("cone-balance", &cfg, refine);
    let mut csv = String::from("cone,duration,e_base,e_top,flux,balance,error_estimate,stated_defect,line_charge_defect\n");
    for (label, cone) in cfg.all_cones()? {
        let rep = energy_balance(&field, &cone, cone.a, cone.b, &levels)?;
        let dur = crossing_duration(&cone, p.nu);
        let stated = stated_defect(&p, dur)?;
        let line = line_charge_defect(&p, dur)?;
        csv.push_str(&format!(
            "{label},{dur},{},{},{},{},{},{stated},{line}\n",
            rep.e_base, rep.e_top, rep.flux, rep.balance, rep.error_estimate
        ));
        report.metric(format!("{label}/line_charge_defect"), Metric::exact(line));
        report.metric(format!("{label}/balance_sign"), Metric::exact(rep.balance.signum()));
        if dur > 0.0 {
            report.verdict(Verdict::within(
                format!("{label}: |balance| vs stated defect"),
                rep.balance.abs(),
                stated,
                DEFECT_REL_TOL * stated + rep.error_estimate,
            ));
        } else {
            report.verdict(Verdict::at_most(
                format!("{label}: |balance| on non-crossing cone"),
                rep.balance.abs(),
                0.0,
                rep.error_estimate,
            ));
        }
        report.balances.push(ConeBalance::new(label, "analytic", cone, 0.0, rep));
    }
    let mut a = Artifacts::new(report);
    a.side_files.push(("balances".into(), csv));
    Ok(a)
}

fn balance_pair(
    fine: &GridField,
    coarse: &GridField,
    cone: &ConeSpec,
    levels: &QuadLevels,
    n: f64,
) -> Result<(BalanceReport, BalanceReport, f64)> {
    let a = penalized_energy_balance(fine, cone, cone.a, cone.b, levels, n)?;
    let b = penalized_energy_balance(coarse, cone, cone.a, cone.b, levels, n)?;
    let tol = combined_tolerance(&a, &b);
    Ok((a, b, tol))
}

/// Quadrature error of both levels plus the two-level discretization estimate.
fn combined_tolerance(fine: &BalanceReport, coarse: &BalanceReport) -> f64 {
    fine.error_estimate + coarse.error_estimate + two_level(fine.balance, coarse.balance)
}

pub fn cmd_penalized_run(cfg: &ExperimentConfig, refine: usize) -> Result<Artifacts> {
    let cfg = cfg.refined(refine)?;
    let p = cfg.map_params()?;
    let levels = cfg.quadrature.levels();
    let solver = cfg.solver;
    let n_max = largest_penalty(&cfg)?;
    let mut report = ExperimentReport::new("penalized-run", &cfg, refine);
    let mut side = Vec::new();

    let cones = cfg.all_cones()?;
    let (trusted, untrusted): (Vec<_>, Vec<_>) =
        cones.into_iter().partition(|(_, c)| trusted_region(&solver, c).covers_cone());
    for (label, _) in &untrusted {
        report.metric(format!("{label}/untrusted"), Metric::exact(1.0));
    }
    let first = trusted
        .first()
        .map(|(_, c)| *c)
        .ok_or_else(|| CliError::Usage("no configured cone is trusted for the solver box".into()))?;

    let (sweep, _) = penalization_sweep(
        &cfg.sweep.schedule,
        &initial_data(&p),
        &solver,
        &first,
        &cfg.sweep.sample_times,
        &levels,
    )?;
    let last_violation: Vec<f64> = sweep.entries.iter().filter_map(|e| e.violation.last().copied()).collect();
    let worst_ratio = last_violation
        .windows(2)
        .map(|w| w[1] / w[0])
        .fold(f64::NEG_INFINITY, f64::max);
    report.verdict(Verdict::at_most(
        "violation non-increasing in n at the last sample time (max ratio)",
        worst_ratio,
        1.0,
        0.0,
    ));
    report.sweep = Some(sweep);

    let mut csv = String::from("n,cone,h,e_base,e_top,flux,balance,error_estimate,tolerance\n");
    for &n in &cfg.sweep.schedule {
        let fine = solve(&solver, solver.h, n, &p)?;
        let coarse = solve(&solver, 2.0 * solver.h, n, &p)?;
        report.ledgers.push(LedgerSummary::new(format!("n={n}"), n, solver.h, fine.dt, fine.steps, &fine.ledger));
        report.ledgers.push(LedgerSummary::new(
            format!("n={n},coarse"),
            n,
            2.0 * solver.h,
            coarse.dt,
            coarse.steps,
            &coarse.ledger,
        ));
        side.push((format!("ledger_n{n}"), ledger_csv(&fine.ledger)?));
        for (label, cone) in &trusted {
            let (a, b, tol) = balance_pair(&fine.field, &coarse.field, cone, &levels, n)?;
            for (h, r) in [(solver.h, &a), (2.0 * solver.h, &b)] {
                csv.push_str(&format!(
                    "{n},{label},{h},{},{},{},{},{},{tol}\n",
                    r.e_base, r.e_top, r.flux, r.balance, r.error_estimate
                ));
            }
            report.verdict(Verdict::at_most(
                format!("n={n} {label}: |penalized balance|"),
                a.balance.abs(),
                0.0,
                tol,
            ));
            report.balances.push(ConeBalance::new(format!("{label}/n={n}"), "solver", *cone, n, a));
            report.balances.push(ConeBalance::new(format!("{label}/n={n},coarse"), "solver", *cone, n, b));
            if n == n_max {
                let (ua, ub, utol) = balance_pair(&fine.field, &coarse.field, cone, &levels, 0.0)?;
                report.verdict(Verdict::at_least(
                    format!("n={n} {label}: unpenalized inequality"),
                    ua.balance,
                    0.0,
                    utol,
                ));
                report.balances.push(ConeBalance::new(format!("{label}/n={n}/energy"), "solver", *cone, 0.0, ua));
                report.balances.push(ConeBalance::new(
                    format!("{label}/n={n}/energy,coarse"),
                    "solver",
                    *cone,
                    0.0,
                    ub,
                ));
            }
        }
    }
    side.push(("balances".into(), csv));
    let mut a = Artifacts::new(report);
    a.side_files = side;
    Ok(a)
}

pub fn cmd_nonuniq_demo(cfg: &ExperimentConfig, refine: usize) -> Result<Artifacts> {
    let cfg = cfg.refined(refine)?;
    let p = cfg.map_params()?;
    let levels = cfg.quadrature.levels();
    let solver = cfg.solver;
    let cone = cfg.first_cone()?;
    require_trusted(&solver, &cone)?;
    let n_max = largest_penalty(&cfg)?;
    let mut report = ExperimentReport::new("nonuniq-demo", &cfg, refine);
    let phi = BoostedHarmonic::new(p);

    let (sweep, fine) = penalization_sweep(
        &cfg.sweep.schedule,
        &initial_data(&p),
        &solver,
        &cone,
        &cfg.sweep.sample_times,
        &levels,
    )?;
    report.sweep = Some(sweep);
    let coarse = solve(&solver, 2.0 * solver.h, n_max, &p)?;
    report.ledgers.push(LedgerSummary::new("solver", n_max, solver.h, fine.dt, fine.steps, &fine.ledger));
    report.ledgers.push(LedgerSummary::new(
        "solver,coarse",
        n_max,
        2.0 * solver.h,
        coarse.dt,
        coarse.steps,
        &coarse.ledger,
    ));

    // (a) the solver output
    let (a, a2, tol) = balance_pair(&fine.field, &coarse.field, &cone, &levels, 0.0)?;
    report.verdict(Verdict::at_least("(a) solver satisfies the energy inequality", a.balance, 0.0, tol));
    report.balances.push(ConeBalance::new("a", "solver", cone, 0.0, a));
    report.balances.push(ConeBalance::new("a,coarse", "solver", cone, 0.0, a2));

    // (b) the analytic moving map
    let b = energy_balance(&phi, &cone, cone.a, cone.b, &levels)?;
    let dur = crossing_duration(&cone, p.nu);
    let stated = stated_defect(&p, dur)?;
    report.metric("b/line_charge_defect", Metric::exact(line_charge_defect(&p, dur)?));
    report.verdict(Verdict::within(
        "(b) analytic map shows the stated defect",
        b.balance.abs(),
        stated,
        DEFECT_REL_TOL * stated + b.error_estimate,
    ));
    report.balances.push(ConeBalance::new("b", "analytic", cone, 0.0, b));

    // distance between (a) and (b)
    let solid = levels.solid();
    let d = cone_l2_distance(&fine.field, &phi, &cone, cone.a, cone.b, &solid)?;
    let d_q = two_level(d, cone_l2_distance(&fine.field, &phi, &cone, cone.a, cone.b, &levels.coarse().solid())?);
    let d_coarse = cone_l2_distance(&coarse.field, &phi, &cone, cone.a, cone.b, &solid)?;
    let u_est = cone_l2_distance(&fine.field, &coarse.field, &cone, cone.a, cone.b, &solid)?;
    let est = u_est + d_q;
    report.metric("distance", Metric::estimated(d, est));
    report.metric("distance,coarse", Metric::estimated(d_coarse, d_q));
    report.metric("solver_two_level_distance", Metric::estimated(u_est, d_q));
    drop(fine);
    drop(coarse);

    if s_lambda(p.lambda)? == 0.0 {
        report.verdict(Verdict::at_most("maps coincide: distance shrinks under refinement", d, d_coarse, d_q));
    } else {
        report.verdict(Verdict::at_least(
            "distance exceeds the discretization estimate by the margin",
            d,
            DISTANCE_MARGIN * est,
            0.0,
        ));
        report.verdict(Verdict::at_least("distance does not shrink under refinement", d, d_coarse, d_q));
    }
    Ok(Artifacts::new(report))
}

/// Squared exterior mismatch, interior `∫|∂_t'ũ|²` and squared interior
/// mismatch of `ũ = u∘Λ⁻¹` against the stationary map, split by the light
/// cone `|x| = |t|`. The integration runs over the lab cone (Lorentz maps
/// preserve `dx dt`), evaluating `ũ` at the boosted points.
fn pulled_back_measures(field: &GridField, p: &MapParams, cone: &ConeSpec, levels: &QuadLevels) -> Result<[f64; 3]> {
    let boost = LorentzBoost::new(p.nu)?;
    let pulled = Composed {
        inner: field,
        boost: boost.inverse(),
    };
    let ball: BallRule = levels.ball();
    let time = LineRule::gauss(levels.n_t);
    let mut acc = [0.0; 3];
    for (t, w) in time.mapped(cone.a, cone.b) {
        let outer = cone.radius_at(t);
        let mismatch = |x: &Vector3<f64>| -> wavemap_core::Result<f64> {
            let q = boost.apply(&SpacetimePoint::new(t, *x));
            Ok((pulled.value(&q)? - harmonic_v(p, &q.x)?).norm_squared())
        };
        if t < outer {
            let e: f64 = ball.integrate_shell(&Vector3::zeros(), t, outer, mismatch)?;
            acc[0] += w * e;
        }
        let inner = t.min(outer);
        let sp = Vector3::new(0.0, 0.0, p.nu * t);
        let focus = (sp.norm() < inner * (1.0 - 1e-6)).then_some(sp);
        let both: [f64; 2] = ball.integrate(&Vector3::zeros(), inner, focus, |x| {
            let q = boost.apply(&SpacetimePoint::new(t, *x));
            let j = pulled.jet(&q)?;
            Ok([j.dt.norm_squared(), (j.value - harmonic_v(p, &q.x)?).norm_squared()])
        })?;
        acc[1] += w * both[0];
        acc[2] += w * both[1];
    }
    Ok(acc)
}

pub fn cmd_stationary_demo(cfg: &ExperimentConfig, refine: usize) -> Result<Artifacts> {
    let cfg = cfg.refined(refine)?;
    let p = cfg.map_params()?;
    let levels = cfg.quadrature.levels();
    let solver = cfg.solver;
    let cone = cfg.first_cone()?;
    if cone.center().norm() != 0.0 {
        return Err(CliError::Usage("stationary-demo needs a first cone centred at the origin".into()));
    }
    require_trusted(&solver, &cone)?;
    let rungs = cfg.stationary.levels;
    if rungs < 2 {
        return Err(CliError::Usage("stationary-demo needs at least two refinement levels".into()));
    }
    let n_fine = largest_penalty(&cfg)?;
    let mut report = ExperimentReport::new("stationary-demo", &cfg, refine);
    let mut csv = String::from("h,n,exterior_mismatch,interior_dt_norm,interior_mismatch,estimate\n");
    let mut rows = Vec::new();
    for k in 0..rungs {
        let scale = (1u64 << (rungs - 1 - k)) as f64;
        let (h, n) = (solver.h * scale, n_fine / scale);
        let out = solve(&solver, h, n, &p)?;
        report.ledgers.push(LedgerSummary::new(format!("h={h},n={n}"), n, h, out.dt, out.steps, &out.ledger));
        let m = pulled_back_measures(&out.field, &p, &cone, &levels)?;
        let mc = pulled_back_measures(&out.field, &p, &cone, &levels.coarse())?;
        let vals = m.map(f64::sqrt);
        let est = (0..3).map(|i| two_level(vals[i], mc[i].sqrt())).fold(0.0, f64::max);
        csv.push_str(&format!("{h},{n},{},{},{},{est}\n", vals[0], vals[1], vals[2]));
        let key = format!("h={h},n={n}");
        report.metric(format!("{key}/exterior_mismatch"), Metric::estimated(vals[0], est));
        report.metric(format!("{key}/interior_dt_norm"), Metric::estimated(vals[1], est));
        report.metric(format!("{key}/interior_mismatch"), Metric::estimated(vals[2], est));
        rows.push(vals);
    }
    let (prev, last) = (rows[rungs - 2], rows[rungs - 1]);
    let order = (prev[0] / last[0]).log2();
    report.metric("exterior_order", Metric::exact(order));
    report.verdict(Verdict::at_least("exterior mismatch order under refinement", order, EXTERIOR_ORDER, 0.0));
    if s_lambda(p.lambda)? == 0.0 {
        report.verdict(Verdict::at_most("interior mismatch shrinks under refinement", last[2], prev[2], 0.0));
    } else {
        report.verdict(Verdict::at_least(
            "interior non-stationarity exceeds the exterior mismatch by the margin",
            last[1],
            INTERIOR_MARGIN * last[0],
            0.0,
        ));
    }
    let mut a = Artifacts::new(report);
    a.side_files.push(("ladder".into(), csv));
    Ok(a)
}

/// Observed order from the last two entries of a halving sequence.
pub fn observed_order(errors: &[f64]) -> f64 {
    let k = errors.len();
    (errors[k - 2] / errors[k - 1]).log2()
}

/// A cubic polynomial map; its stress tensor is quartic, so central
/// differences of it carry an exact `h²` error term.
fn cubic_field() -> impl FieldEvaluator {
    FnField(|p: &SpacetimePoint| {
        let (t, x, y, z) = (p.t, p.x[0], p.x[1], p.x[2]);
        let value = Vector3::new(t * t * t - 3.0 * t * x * x + x * y * z, x * x * y - t * z * z, t * x * y + z * z * z);
        let dt = Vector3::new(3.0 * t * t - 3.0 * x * x, -z * z, x * y);
        #[rustfmt::skip]
        let grad = Matrix3::new(
            -6.0 * t * x + y * z, x * z, x * y,
            2.0 * x * y, x * x, -2.0 * t * z,
            t * y, t * x, 3.0 * z * z,
        );
        // rows are ∂_i, columns components
        Ok(JetSample::new(value, dt, grad.transpose()))
    })
}

pub fn cmd_identity_checks(cfg: &ExperimentConfig, refine: usize) -> Result<Artifacts> {
    let cfg = cfg.refined(refine)?;
    let mut report = ExperimentReport::new("identity-checks", &cfg, refine);
    let mut csv = String::from("suite,h,residual\n");
    let steps = [0.04, 0.02, 0.01];

    let mut study = |report: &mut ExperimentReport, name: &str, errs: Vec<f64>| {
        for (h, e) in steps.iter().zip(&errs) {
            csv.push_str(&format!("{name},{h},{e}\n"));
        }
        let order = observed_order(&errs);
        report.metric(format!("{name}/order"), Metric::exact(order));
        report.metric(format!("{name}/finest_residual"), Metric::exact(errs[errs.len() - 1]));
        report.verdict(Verdict::at_least(format!("{name}: observed order"), order, IDENTITY_ORDER, 0.0));
    };

    // transformation law of the divergence
    let pt = SpacetimePoint::from_coords(0.1, 0.3, -0.2, 0.5);
    let boost = LorentzBoost::new(0.6)?;
    let poly = cubic_field();
    let errs = steps
        .iter()
        .map(|&h| transformation_check(&poly, &boost, &pt, h).map(|(l, r)| (l - r).norm()))
        .collect::<wavemap_core::Result<Vec<_>>>()?;
    study(&mut report, "transformation/polynomial", errs);
    let v2 = StationaryHarmonic::new(2.0)?;
    let boost_half = LorentzBoost::new(0.5)?;
    let errs = steps
        .iter()
        .map(|&h| transformation_check(&v2, &boost_half, &pt, h).map(|(l, r)| (l - r).norm()))
        .collect::<wavemap_core::Result<Vec<_>>>()?;
    study(&mut report, "transformation/harmonic", errs);

    // two-field identity on a truncated cone
    let cone = ConeSpec::from_base(Vector3::zeros(), 0.0, 0.8, 0.3)?;
    let levels = QuadLevels::uniform(32);
    let u = TimeSquaredBump::new(Vector3::new(0.1, 0.0, 0.0), 0.7, Vector3::new(0.0, 0.0, 1.0));
    let w = TimeSquaredBump::new(Vector3::new(-0.1, 0.2, 0.0), 0.6, Vector3::new(0.6, 0.0, 0.8));
    let errs = steps
        .iter()
        .map(|&h| comp_identity_check(&u, &w, &cone, &levels, h).map(|r| r.defect().abs()))
        .collect::<wavemap_core::Result<Vec<_>>>()?;
    study(&mut report, "identity/manufactured", errs);
    let plane = GeodesicPlaneWave::null(Vector3::new(0.4, 0.9, -0.2));
    let errs = steps
        .iter()
        .map(|&h| comp_identity_check(&plane, &w, &cone, &levels, h).map(|r| r.defect().abs()))
        .collect::<wavemap_core::Result<Vec<_>>>()?;
    study(&mut report, "identity/plane_wave", errs);

    // cases that vanish identically
    let (l, r) = transformation_check(&v2, &LorentzBoost::identity(), &pt, 0.01)?;
    report.verdict(Verdict::at_most("identity boost: |lhs − rhs|", (l - r).norm(), 0.0, EXACT_ZERO_TOL));
    let c = ConstantField(Vector3::new(0.0, 0.6, 0.8));
    let div = divergence_t(&c, &pt, 0.01)?;
    report.verdict(Verdict::at_most("constant map: |∂T|", div.norm(), 0.0, EXACT_ZERO_TOL));
    let zero = ConstantField(Vector3::zeros());
    // the difference error of □u is parallel to u, hence orthogonal to u_t
    let rep = comp_identity_check(&plane, &plane, &cone, &levels, 0.01)?;
    report.verdict(Verdict::at_most(
        "plane wave with itself: |defect|",
        rep.defect().abs(),
        0.0,
        EXACT_ZERO_TOL * rep.lhs.abs().max(1.0),
    ));
    let rep = comp_identity_check(&u, &zero, &cone, &levels, 0.01)?;
    report.verdict(Verdict::at_most(
        "w ≡ 0: |lhs| + |rhs|",
        rep.lhs.abs() + rep.rhs.abs(),
        0.0,
        EXACT_ZERO_TOL,
    ));

    let mut a = Artifacts::new(report);
    a.side_files.push(("residuals".into(), csv));
    Ok(a)
}
