//! Constants fitted on training rows, with provenance.

use std::collections::BTreeSet;
use std::path::Path;

use gelfand_core::estimator::{fit_theorem_constants, q_l2, q_linf, Estimate, FitRow, TheoremConstants};
use gelfand_core::geometry::Domain;
use gelfand_core::identity::calibrate_constant;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::experiment::{apply_constants, EstimateReport};

pub const MIN_TRAINING_ROWS: usize = 30;
pub const MIN_ENERGIES: usize = 3;
pub const MIN_FIXTURES: usize = 3;
pub const RECORD_SCHEMA: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub version: String,
    pub training_rows: usize,
    pub fixtures: Vec<String>,
    pub energies: Vec<f64>,
    pub config_digest: Option<String>,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsRecord {
    pub schema: u32,
    pub c1: f64,
    pub c3: f64,
    pub c5: Option<f64>,
    pub c6: Option<f64>,
    /// `q` and `q̃` implied by `c₁`, `c₃`.
    pub q: f64,
    pub q_tilde: f64,
    pub theorem1: TheoremConstants,
    pub theorem2: Option<TheoremConstants>,
    pub provenance: Provenance,
}

impl ConstantsRecord {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        let rec: ConstantsRecord = serde_json::from_str(&text)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        if rec.schema != RECORD_SCHEMA {
            return Err(HarnessError::Config(format!("constants schema {} is not {RECORD_SCHEMA}", rec.schema)));
        }
        Ok(rec)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }
}

fn usable(rows: &[EstimateReport]) -> Vec<&EstimateReport> {
    rows.iter().filter(|r| !r.skipped() && r.delta.is_some()).collect()
}

fn fit_rows(rows: &[&EstimateReport], which: Estimate) -> Vec<FitRow> {
    rows.iter()
        .filter(|r| which == Estimate::L2 || r.m > 3.0)
        .map(|r| FitRow {
            energy: r.energy,
            tau: r.tau,
            delta: r.delta.unwrap_or(0.0),
            m: r.m,
            n: r.n_linf,
            smooth_norm: if which == Estimate::L2 { r.n_hm } else { r.n_wm },
            measured: if which == Estimate::L2 { r.err_l2 } else { r.err_linf },
        })
        .collect()
}

fn optional_constant(values: impl Iterator<Item = f64>) -> Option<f64> {
    calibrate_constant(values).ok()
}

/// `c₁`, `c₅`, `c₆` from the implied-constant columns (largest value × 1.5),
/// then both theorem fits. Fails if the training set is too small or carries
/// no nonzero error, or if any training row violates the fitted bounds.
pub fn calibrate(
    rows: &[EstimateReport],
    domain: &Domain,
    config_digest: Option<String>,
    seed: Option<u64>,
) -> Result<ConstantsRecord> {
    let train = usable(rows);
    let energies: BTreeSet<u64> = train.iter().map(|r| r.energy.to_bits()).collect();
    let fixtures: BTreeSet<&str> = train.iter().map(|r| r.base_fixture()).collect();
    if train.len() < MIN_TRAINING_ROWS || energies.len() < MIN_ENERGIES || fixtures.len() < MIN_FIXTURES {
        return Err(HarnessError::Calibration(format!(
            "need at least {MIN_TRAINING_ROWS} rows over {MIN_ENERGIES} energies and {MIN_FIXTURES} fixtures; \
             got {} rows, {} energies, {} fixtures",
            train.len(),
            energies.len(),
            fixtures.len()
        )));
    }
    if train.iter().all(|r| r.err_l2 == 0.0) {
        return Err(HarnessError::Calibration(
            "training set lacks diversity: every row has v1 = v2, so no constant is informative".into(),
        ));
    }
    let c1 = calibrate_constant(train.iter().filter_map(|r| r.implied_c1))
        .map_err(|e| HarnessError::Calibration(format!("c1: {e}")))?;
    let c5 = optional_constant(train.iter().filter_map(|r| r.implied_c5));
    let c6 = optional_constant(train.iter().filter_map(|r| r.implied_c6));
    let c3 = domain.c3();
    let theorem1 = fit_theorem_constants(Estimate::L2, &fit_rows(&train, Estimate::L2))
        .map_err(|e| HarnessError::Calibration(format!("theorem 1 fit: {e}")))?;
    let linf_rows = fit_rows(&train, Estimate::Linf);
    let theorem2 = if linf_rows.is_empty() {
        None
    } else {
        Some(
            fit_theorem_constants(Estimate::Linf, &linf_rows)
                .map_err(|e| HarnessError::Calibration(format!("theorem 2 fit: {e}")))?,
        )
    };
    let mut energies: Vec<f64> = energies.into_iter().map(f64::from_bits).collect();
    energies.sort_by(f64::total_cmp);
    let record = ConstantsRecord {
        schema: RECORD_SCHEMA,
        c1,
        c3,
        c5,
        c6,
        q: q_l2(c1),
        q_tilde: q_linf(c1, c3),
        theorem1,
        theorem2,
        provenance: Provenance {
            version: env!("CARGO_PKG_VERSION").into(),
            training_rows: train.len(),
            fixtures: fixtures.into_iter().map(String::from).collect(),
            energies,
            config_digest,
            seed,
        },
    };
    let mut violating = Vec::new();
    for r in &train {
        let mut row = (*r).clone();
        apply_constants(&mut row, &record, domain);
        if row.pass_theorem1 == Some(false) || row.pass_theorem2 == Some(false) {
            violating.push(format!("{} E={} tau={} m={}", row.fixture_id, row.energy, row.tau, row.m));
        }
    }
    if !violating.is_empty() {
        return Err(HarnessError::Calibration(format!(
            "no fitted constants satisfy every training row; violating: {}",
            violating.join(", ")
        )));
    }
    Ok(record)
}
