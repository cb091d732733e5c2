//! Per-step discrete energies of a run.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LedgerRecord {
    pub step: usize,
    pub time: f64,
    /// `½Σ|(u^{k+1} − u^{k−1})/(2dt)|² h³`.
    pub kinetic: f64,
    /// `½Σ_edges |D_h u^k|² h³` over the edges used by the Laplacian.
    pub gradient: f64,
    /// `n²Σ F(u^k) h³`.
    pub penalty: f64,
    pub total: f64,
    /// `Σ(|u^k|² − 1)² h³`, the constraint violation.
    pub violation: f64,
}

impl LedgerRecord {
    pub fn new(step: usize, time: f64, kinetic: f64, gradient: f64, penalty: f64, violation: f64) -> Self {
        Self {
            step,
            time,
            kinetic,
            gradient,
            penalty,
            total: kinetic + gradient + penalty,
            violation,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub records: Vec<LedgerRecord>,
}

impl EnergyLedger {
    pub fn push(&mut self, r: LedgerRecord) {
        self.records.push(r);
    }

    pub fn first(&self) -> Option<&LedgerRecord> {
        self.records.first()
    }

    pub fn last(&self) -> Option<&LedgerRecord> {
        self.records.last()
    }

    /// `(max total − min total) / |initial total|`, or the absolute spread
    /// when the initial total vanishes.
    pub fn relative_drift(&self) -> f64 {
        let Some(first) = self.first() else { return 0.0 };
        let (lo, hi) = self
            .records
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.total), hi.max(r.total)));
        let spread = hi - lo;
        if first.total.abs() > 0.0 {
            spread / first.total.abs()
        } else {
            spread
        }
    }

    /// Record whose time is closest to `t`.
    pub fn nearest(&self, t: f64) -> Option<&LedgerRecord> {
        self.records
            .iter()
            .min_by(|a, b| (a.time - t).abs().total_cmp(&(b.time - t).abs()))
    }

    pub fn max_penalty(&self) -> f64 {
        self.records.iter().map(|r| r.penalty).fold(0.0, f64::max)
    }

    /// CSV with columns `step,time,kinetic,gradient,penalty,total`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["step", "time", "kinetic", "gradient", "penalty", "total"])
            .map_err(csv_err)?;
        for r in &self.records {
            wr.write_record(&[
                r.step.to_string(),
                format!("{:e}", r.time),
                format!("{:e}", r.kinetic),
                format!("{:e}", r.gradient),
                format!("{:e}", r.penalty),
                format!("{:e}", r.total),
            ])
            .map_err(csv_err)?;
        }
        wr.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> crate::error::Error {
    crate::error::Error::Format(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn totals_and_drift() {
        let mut l = EnergyLedger::default();
        l.push(LedgerRecord::new(0, 0.0, 1.0, 2.0, 0.5, 0.0));
        l.push(LedgerRecord::new(1, 0.1, 1.1, 1.9, 0.5, 0.0));
        l.push(LedgerRecord::new(2, 0.2, 1.2, 1.8, 0.51, 0.0));
        assert_eq!(l.records[0].total, 3.5);
        assert!((l.relative_drift() - 0.01 / 3.5).abs() < 1e-12);
        assert_eq!(l.nearest(0.14).unwrap().step, 1);
        let mut out = Vec::new();
        l.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("step,time,kinetic,gradient,penalty,total\n"));
        assert_eq!(text.lines().count(), 4);
    }
}
