//! TOML experiment configuration.
//!
//! Every section is optional; missing keys take the defaults below and unknown
//! keys are rejected.
//!
//! ```toml
//! name = "demo"
//! output_dir = "out"
//!
//! [map]
//! lambda = 2.0
//! nu = 0.6
//!
//! [solver]            # any SolverConfig field
//! h = 0.015625
//!
//! [[cones]]           # bases at t = 0
//! center = [0.0, 0.0, 0.0]
//! base_radius = 0.5
//! heights = [0.2]
//!
//! [quadrature]
//! n_r = 64
//! n_theta = 32
//! n_phi = 64
//! n_t = 64
//!
//! [sweep]
//! schedule = [8.0, 16.0, 32.0, 64.0]
//! sample_times = [0.1, 0.2]
//!
//! [s_table]
//! lambdas = [1.0, 1.5, 2.0, 3.0]
//!
//! [stationary]
//! levels = 3
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use wavemap_core::quadrature::QuadLevels;
use wavemap_core::solver::SolverConfig;
use wavemap_core::{ConeSpec, MapParams, Vector3};

use crate::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub name: String,
    pub output_dir: Option<PathBuf>,
    pub map: MapSection,
    pub solver: SolverConfig,
    pub cones: Vec<ConeEntry>,
    pub quadrature: QuadSection,
    pub sweep: SweepSection,
    pub s_table: STableSection,
    pub stationary: StationarySection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "default".into(),
            output_dir: None,
            map: MapSection::default(),
            solver: SolverConfig::default(),
            cones: ConeEntry::defaults(),
            quadrature: QuadSection::default(),
            sweep: SweepSection::default(),
            s_table: STableSection::default(),
            stationary: StationarySection::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MapSection {
    pub lambda: f64,
    pub nu: f64,
}

impl Default for MapSection {
    fn default() -> Self {
        Self { lambda: 2.0, nu: 0.6 }
    }
}

/// A family of truncated cones sharing a base disk at `t = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeEntry {
    pub center: [f64; 3],
    pub base_radius: f64,
    pub heights: Vec<f64>,
}

impl ConeEntry {
    /// One cone crossing the singular line of the default moving map and two
    /// that stay clear of it.
    pub fn defaults() -> Vec<Self> {
        vec![
            Self {
                center: [0.0, 0.0, 0.0],
                base_radius: 0.5,
                heights: vec![0.2],
            },
            Self {
                center: [0.0, 0.35, 0.0],
                base_radius: 0.2,
                heights: vec![0.15],
            },
            Self {
                center: [0.25, 0.0, 0.1],
                base_radius: 0.2,
                heights: vec![0.1],
            },
        ]
    }

    pub fn center(&self) -> Vector3<f64> {
        Vector3::from(self.center)
    }

    pub fn cones(&self) -> Result<Vec<(f64, ConeSpec)>> {
        self.heights
            .iter()
            .map(|&h| Ok((h, ConeSpec::from_base(self.center(), 0.0, self.base_radius, h)?)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadSection {
    pub n_r: usize,
    pub n_theta: usize,
    pub n_phi: usize,
    pub n_t: usize,
}

impl Default for QuadSection {
    fn default() -> Self {
        let q = QuadLevels::default();
        Self {
            n_r: q.n_r,
            n_theta: q.n_theta,
            n_phi: q.n_phi,
            n_t: q.n_t,
        }
    }
}

impl QuadSection {
    pub fn levels(&self) -> QuadLevels {
        QuadLevels {
            n_r: self.n_r,
            n_theta: self.n_theta,
            n_phi: self.n_phi,
            n_t: self.n_t,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub schedule: Vec<f64>,
    pub sample_times: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            schedule: vec![8.0, 16.0, 32.0, 64.0],
            sample_times: vec![0.1, 0.2],
        }
    }
}

impl SweepSection {
    pub fn largest_n(&self) -> Option<f64> {
        self.schedule.iter().copied().reduce(f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct STableSection {
    pub lambdas: Vec<f64>,
    /// Radius of the test bump centred at the origin.
    pub bump_radius: f64,
}

impl Default for STableSection {
    fn default() -> Self {
        Self {
            lambdas: vec![1.0, 1.5, 2.0, 3.0],
            bump_radius: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StationarySection {
    /// Rungs of the `(h, n) → (h/2, 2n)` ladder ending at the solver settings.
    pub levels: usize,
}

impl Default for StationarySection {
    fn default() -> Self {
        Self { levels: 3 }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn map_params(&self) -> Result<MapParams> {
        Ok(MapParams::new(self.map.lambda, self.map.nu)?)
    }

    /// All configured cones, labelled `c<entry>h<height index>`.
    pub fn all_cones(&self) -> Result<Vec<(String, ConeSpec)>> {
        let mut out = Vec::new();
        for (i, e) in self.cones.iter().enumerate() {
            for (j, (_, c)) in e.cones()?.into_iter().enumerate() {
                out.push((format!("c{i}h{j}"), c));
            }
        }
        Ok(out)
    }

    pub fn first_cone(&self) -> Result<ConeSpec> {
        self.all_cones()?
            .into_iter()
            .next()
            .map(|(_, c)| c)
            .ok_or_else(|| CliError::Usage("no cone configured".into()))
    }

    /// Divides `h` by `k` and multiplies every quadrature count by `k`.
    pub fn refined(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(CliError::Usage("--refine must be at least 1".into()));
        }
        let mut c = self.clone();
        c.solver.h /= k as f64;
        if let Some(dt) = c.solver.dt.as_mut() {
            *dt /= k as f64;
        }
        let q = self.quadrature.levels().scaled(k);
        c.quadrature = QuadSection {
            n_r: q.n_r,
            n_theta: q.n_theta,
            n_phi: q.n_phi,
            n_t: q.n_t,
        };
        Ok(c)
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&canonical).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        assert_eq!(ExperimentConfig::from_toml("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn sections_override_defaults() {
        let c = ExperimentConfig::from_toml(
            "name = \"x\"\n[map]\nlambda = 1.0\n[solver]\nh = 0.03125\npenalty = 8.0\n\
             [[cones]]\ncenter = [0.0, 0.1, 0.0]\nbase_radius = 0.3\nheights = [0.1, 0.2]\n",
        )
        .unwrap();
        assert_eq!(c.map.lambda, 1.0);
        assert_eq!(c.map.nu, 0.6);
        assert_eq!(c.solver.h, 0.03125);
        assert_eq!(c.solver.half_width, SolverConfig::default().half_width);
        assert_eq!(c.all_cones().unwrap().len(), 2);
    }

    #[test]
    fn unknown_keys_rejected() {
        for text in [
            "bogus = 1",
            "[map]\nlambda = 2.0\nmu = 0.1",
            "[solver]\nstep = 0.1",
            "[quadrature]\nn_x = 4",
            "[[cones]]\ncenter = [0.0, 0.0, 0.0]\nbase_radius = 0.5\nheights = [0.2]\ncolor = 1",
        ] {
            assert!(ExperimentConfig::from_toml(text).is_err(), "{text}");
        }
    }

    #[test]
    fn refinement_scales_resolution() {
        let c = ExperimentConfig::default().refined(2).unwrap();
        assert_eq!(c.solver.h, 1.0 / 128.0);
        assert_eq!(c.quadrature.n_r, 128);
        assert!(ExperimentConfig::default().refined(0).is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.map.lambda = 3.0;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn roundtrip_through_toml() {
        let a = ExperimentConfig::default();
        let text = toml::to_string(&a).unwrap();
        assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), a);
    }
}
