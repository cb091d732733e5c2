//! Machine-readable experiment reports.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use wavemap_core::quadrature::BalanceReport;
use wavemap_core::solver::{EnergyLedger, SweepReport};
use wavemap_core::ConeSpec;

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `|value − target| ≤ tolerance`
    Within,
    /// `value ≤ target + tolerance`
    AtMost,
    /// `value ≥ target − tolerance`
    AtLeast,
}

/// A pass/fail claim stored with the numbers that decide it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub comparison: Comparison,
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Verdict {
    pub fn new(name: impl Into<String>, comparison: Comparison, value: f64, target: f64, tolerance: f64) -> Self {
        let mut v = Self {
            name: name.into(),
            comparison,
            value,
            target,
            tolerance,
            passed: false,
        };
        v.passed = v.recompute();
        v
    }

    pub fn within(name: impl Into<String>, value: f64, target: f64, tolerance: f64) -> Self {
        Self::new(name, Comparison::Within, value, target, tolerance)
    }

    pub fn at_most(name: impl Into<String>, value: f64, bound: f64, tolerance: f64) -> Self {
        Self::new(name, Comparison::AtMost, value, bound, tolerance)
    }

    pub fn at_least(name: impl Into<String>, value: f64, bound: f64, tolerance: f64) -> Self {
        Self::new(name, Comparison::AtLeast, value, bound, tolerance)
    }

    /// Decision from the stored numbers alone; NaN never passes.
    pub fn recompute(&self) -> bool {
        match self.comparison {
            Comparison::Within => (self.value - self.target).abs() <= self.tolerance,
            Comparison::AtMost => self.value <= self.target + self.tolerance,
            Comparison::AtLeast => self.value >= self.target - self.tolerance,
        }
    }
}

/// A number together with its error estimate, when one exists.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub value: f64,
    pub error_estimate: Option<f64>,
}

impl Metric {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            error_estimate: None,
        }
    }

    pub fn estimated(value: f64, error_estimate: f64) -> Self {
        Self {
            value,
            error_estimate: Some(error_estimate),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub code_version: String,
    pub refine: usize,
}

/// Energy balance of one field on one truncated cone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeBalance {
    pub label: String,
    pub field: String,
    pub cone: ConeSpec,
    /// Penalty of the energy used, `0` for the plain energy.
    pub penalty: f64,
    pub report: BalanceReport,
    /// `balance ≥ 0`, i.e. the local energy inequality holds as measured.
    pub inequality_holds: bool,
}

impl ConeBalance {
    pub fn new(label: impl Into<String>, field: impl Into<String>, cone: ConeSpec, penalty: f64, report: BalanceReport) -> Self {
        Self {
            label: label.into(),
            field: field.into(),
            cone,
            penalty,
            inequality_holds: report.balance >= 0.0,
            report,
        }
    }
}

/// Per-run digest of an energy ledger; the full ledger goes to a CSV side file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerSummary {
    pub label: String,
    pub penalty: f64,
    pub h: f64,
    pub dt: f64,
    pub steps: usize,
    pub initial_total: f64,
    pub final_total: f64,
    pub relative_drift: f64,
    pub max_penalty: f64,
}

impl LedgerSummary {
    pub fn new(label: impl Into<String>, penalty: f64, h: f64, dt: f64, steps: usize, ledger: &EnergyLedger) -> Self {
        Self {
            label: label.into(),
            penalty,
            h,
            dt,
            steps,
            initial_total: ledger.first().map_or(f64::NAN, |r| r.total),
            final_total: ledger.last().map_or(f64::NAN, |r| r.total),
            relative_drift: ledger.relative_drift(),
            max_penalty: ledger.max_penalty(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub command: String,
    pub config: ExperimentConfig,
    pub provenance: Provenance,
    pub balances: Vec<ConeBalance>,
    pub ledgers: Vec<LedgerSummary>,
    pub sweep: Option<SweepReport>,
    pub metrics: BTreeMap<String, Metric>,
    pub verdicts: Vec<Verdict>,
}

impl ExperimentReport {
    pub fn new(command: &str, config: &ExperimentConfig, refine: usize) -> Self {
        Self {
            command: command.into(),
            config: config.clone(),
            provenance: Provenance {
                config_hash: config.hash(),
                code_version: env!("CARGO_PKG_VERSION").into(),
                refine,
            },
            balances: Vec::new(),
            ledgers: Vec::new(),
            sweep: None,
            metrics: BTreeMap::new(),
            verdicts: Vec::new(),
        }
    }

    pub fn metric(&mut self, key: impl Into<String>, m: Metric) {
        self.metrics.insert(key.into(), m);
    }

    pub fn verdict(&mut self, v: Verdict) {
        self.verdicts.push(v);
    }

    pub fn all_passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn failed(&self) -> Vec<&Verdict> {
        self.verdicts.iter().filter(|v| !v.passed).collect()
    }

    /// Whether every stored verdict agrees with its numbers.
    pub fn verdicts_consistent(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed == v.recompute())
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_comparisons() {
        assert!(Verdict::within("a", 1.01, 1.0, 0.02).passed);
        assert!(!Verdict::within("a", 1.03, 1.0, 0.02).passed);
        assert!(Verdict::at_most("b", 0.5, 0.4, 0.1).passed);
        assert!(!Verdict::at_most("b", 0.6, 0.4, 0.1).passed);
        assert!(Verdict::at_least("c", -0.05, 0.0, 0.1).passed);
        assert!(!Verdict::at_least("c", -0.2, 0.0, 0.1).passed);
        assert!(!Verdict::within("nan", f64::NAN, 0.0, 1.0).passed);
        assert!(!Verdict::at_least("nan", f64::NAN, 0.0, 1.0).passed);
    }

    #[test]
    fn report_json_roundtrip() {
        let cfg = ExperimentConfig::default();
        let mut r = ExperimentReport::new("test", &cfg, 1);
        r.metric("x", Metric::estimated(1.5, 1e-3));
        r.verdict(Verdict::within("x", 1.5, 1.5, 0.0));
        r.verdict(Verdict::at_most("y", 2.0, 1.0, 0.5));
        let text = r.to_json().unwrap();
        let back: ExperimentReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
        assert!(back.verdicts_consistent());
        assert!(!back.all_passed());
        assert_eq!(back.failed().len(), 1);
    }
}
