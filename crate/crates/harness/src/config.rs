//! Run configuration, read from JSON. Unknown keys are rejected at every level.

use std::path::{Path, PathBuf};

use gelfand_core::faddeev::DEFAULT_GREEN_PERIOD_FACTOR;
use gelfand_core::potential::{GeneratorSpec, DEFAULT_MARGIN_CELLS};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};
use crate::fixtures::standard_suite;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub half_width: f64,
    pub n: usize,
}

/// `v₁` is the sum of `background`; `v₂ = v₁ + s·Σ perturbation` for every
/// perturbation scale `s` of the sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureConfig {
    pub id: String,
    pub background: Vec<GeneratorSpec>,
    pub perturbation: Vec<GeneratorSpec>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepAxes {
    pub energies: Vec<f64>,
    pub taus: Vec<f64>,
    /// Smoothness orders; the L∞ estimate is evaluated for `m > 3` only.
    pub m: Vec<f64>,
    pub perturbation_scales: Vec<f64>,
}

impl Default for SweepAxes {
    fn default() -> Self {
        Self {
            energies: vec![0.0, 1.0, 4.0, 16.0],
            taus: vec![0.3, 0.6, 0.9, 1.0],
            m: vec![2.0, 3.5, 4.0, 5.0],
            perturbation_scales: vec![0.25, 1.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub mu_tolerance: f64,
    pub mu_max_iterations: usize,
    pub green_period_factor: f64,
    pub margin_cells: usize,
    /// Frequency of the per-row identity check, shrunk onto the admissible
    /// ball when it lies outside.
    pub identity_xi: [f64; 3],
    /// Run the μ solves behind the identity, c₅ and c₆ columns.
    pub identity_checks: bool,
    /// Fill the timing column. Off by default so the CSV is reproducible.
    pub record_timing: bool,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            mu_tolerance: 1e-8,
            mu_max_iterations: 200,
            green_period_factor: DEFAULT_GREEN_PERIOD_FACTOR,
            margin_cells: DEFAULT_MARGIN_CELLS,
            identity_xi: [1.0, 0.0, 0.0],
            identity_checks: true,
            record_timing: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainConfig,
    pub fixtures: Vec<FixtureConfig>,
    #[serde(default)]
    pub sweep: SweepAxes,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub constants_path: Option<PathBuf>,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub workers: Option<usize>,
}

fn default_output() -> PathBuf {
    PathBuf::from("sweep.csv")
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            domain: DomainConfig { half_width: 0.5, n: 24 },
            fixtures: standard_suite(),
            sweep: SweepAxes::default(),
            tolerances: Tolerances::default(),
            constants_path: None,
            output: default_output(),
            seed: 0,
            workers: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if !(self.domain.half_width > 0.0) || !self.domain.half_width.is_finite() {
            return bad(format!("half_width must be positive, got {}", self.domain.half_width));
        }
        if self.domain.n < gelfand_core::geometry::MIN_POINTS {
            return bad(format!("n must be at least {}", gelfand_core::geometry::MIN_POINTS));
        }
        if self.fixtures.is_empty() {
            return bad("no fixtures".into());
        }
        let mut ids: Vec<&str> = self.fixtures.iter().map(|f| f.id.as_str()).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return bad("fixture ids must be unique".into());
        }
        if self.fixtures.iter().any(|f| f.id.is_empty() || f.id.contains(['@', ','])) {
            return bad("fixture ids must be non-empty and free of '@' and ','".into());
        }
        let s = &self.sweep;
        if s.energies.is_empty() || s.taus.is_empty() || s.m.is_empty() || s.perturbation_scales.is_empty() {
            return bad("every sweep axis needs at least one value".into());
        }
        if let Some(e) = s.energies.iter().find(|e| !e.is_finite()) {
            return bad(format!("energy {e} is not finite"));
        }
        if let Some(t) = s.taus.iter().find(|t| !(**t > 0.0 && **t <= 1.0)) {
            return bad(format!("tau {t} outside (0, 1]"));
        }
        if let Some(m) = s.m.iter().find(|m| !(**m > 0.0) || !m.is_finite()) {
            return bad(format!("m = {m} must be positive"));
        }
        if let Some(p) = s.perturbation_scales.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
            return bad(format!("perturbation scale {p} must be non-negative"));
        }
        let t = &self.tolerances;
        if !(t.mu_tolerance > 0.0) || t.mu_max_iterations == 0 {
            return bad("mu tolerance and iteration cap must be positive".into());
        }
        if !(t.green_period_factor >= 2.0) {
            return bad(format!("green_period_factor {} below 2", t.green_period_factor));
        }
        if self.workers == Some(0) {
            return bad("workers must be at least 1".into());
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, recorded as provenance.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serialises");
        Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Worker count: CLI flag, then `GELFAND_WORKERS`, then the config, then 1.
pub fn resolve_workers(flag: Option<usize>, env: Option<&str>, config: Option<usize>) -> Result<usize> {
    if let Some(w) = flag {
        return if w == 0 { Err(HarnessError::Config("--workers must be at least 1".into())) } else { Ok(w) };
    }
    if let Some(s) = env {
        return match s.trim().parse::<usize>() {
            Ok(w) if w > 0 => Ok(w),
            _ => Err(HarnessError::Config(format!("GELFAND_WORKERS={s:?} is not a positive integer"))),
        };
    }
    Ok(config.unwrap_or(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        let json = serde_json::to_string(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.digest(), cfg.digest());
    }

    #[test]
    fn unknown_keys_rejected() {
        let mut v = serde_json::to_value(RunConfig::default()).unwrap();
        v["sweep"]["energy"] = serde_json::json!([1.0]);
        assert!(serde_json::from_value::<RunConfig>(v).is_err());
        let mut v = serde_json::to_value(RunConfig::default()).unwrap();
        v["colour"] = serde_json::json!("blue");
        assert!(serde_json::from_value::<RunConfig>(v).is_err());
    }

    #[test]
    fn invalid_values_rejected() {
        let mut cfg = RunConfig::default();
        cfg.sweep.taus = vec![0.0];
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.fixtures.push(cfg.fixtures[0].clone());
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn worker_precedence() {
        assert_eq!(resolve_workers(Some(3), Some("5"), Some(7)).unwrap(), 3);
        assert_eq!(resolve_workers(None, Some("5"), Some(7)).unwrap(), 5);
        assert_eq!(resolve_workers(None, None, Some(7)).unwrap(), 7);
        assert_eq!(resolve_workers(None, None, None).unwrap(), 1);
        assert!(resolve_workers(None, Some("many"), None).is_err());
    }
}
