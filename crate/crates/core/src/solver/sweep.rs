//! Runs over a schedule of penalties sharing one grid.

use serde::{Deserialize, Serialize};

use super::{run, trusted_region, RunOutput, SolverConfig};
use crate::error::{Error, Result};
use crate::fields::CauchyData;
use crate::quadrature::{cone_l2_distance, QuadLevels};
use crate::spacetime::ConeSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub n: f64,
    pub dt: f64,
    pub steps: usize,
    /// `∫(|u_n|² − 1)²` at each sample time.
    pub violation: Vec<f64>,
    pub initial_total: f64,
    pub max_penalty: f64,
    pub energy_drift: f64,
    /// In-cone L² distance to the previous entry's solution.
    pub distance_to_previous: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub sample_times: Vec<f64>,
    pub entries: Vec<SweepEntry>,
    /// Violation at the last sample time non-increasing along the schedule.
    pub violation_monotone: bool,
    /// Consecutive distances non-increasing along the schedule.
    pub cauchy_trending: bool,
}

/// Solves for every `n` in `schedule` with the grid of `template`; the time
/// step adapts to each `n`. Returns the report and the run for the last `n`.
pub fn penalization_sweep<D: CauchyData>(
    schedule: &[f64],
    data: &D,
    template: &SolverConfig,
    cone: &ConeSpec,
    sample_times: &[f64],
    levels: &QuadLevels,
) -> Result<(SweepReport, RunOutput)> {
    if schedule.is_empty() {
        return Err(Error::config("empty penalty schedule"));
    }
    if !trusted_region(template, cone).covers_cone() {
        return Err(Error::config("sweep cone is not inside the trusted region of the box"));
    }
    let solid = levels.solid();
    let mut entries = Vec::with_capacity(schedule.len());
    let mut previous: Option<RunOutput> = None;
    for &n in schedule {
        let cfg = SolverConfig { penalty: n, ..*template };
        let out = run(&cfg, data)?;
        let violation = sample_times
            .iter()
            .map(|&t| out.ledger.nearest(t).map(|r| r.violation).unwrap_or(f64::NAN))
            .collect();
        let distance_to_previous = match &previous {
            Some(p) => Some(cone_l2_distance(&p.field, &out.field, cone, cone.a, cone.b, &solid)?),
            None => None,
        };
        entries.push(SweepEntry {
            n,
            dt: out.dt,
            steps: out.steps,
            violation,
            initial_total: out.ledger.first().map_or(0.0, |r| r.total),
            max_penalty: out.ledger.max_penalty(),
            energy_drift: out.ledger.relative_drift(),
            distance_to_previous,
        });
        previous = Some(out);
    }
    let last_violation: Vec<f64> = entries.iter().filter_map(|e| e.violation.last().copied()).collect();
    let violation_monotone = non_increasing(&last_violation);
    let distances: Vec<f64> = entries.iter().filter_map(|e| e.distance_to_previous).collect();
    let report = SweepReport {
        sample_times: sample_times.to_vec(),
        entries,
        violation_monotone,
        cauchy_trending: non_increasing(&distances),
    };
    Ok((report, previous.expect("schedule is non-empty")))
}

fn non_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12) + 1e-300)
}
