//! Standard fixture suites and their realisation on a grid.

use std::sync::Arc;

use gelfand_core::geometry::Domain;
use gelfand_core::potential::{generate_sum, GeneratorSpec, PotentialPair};

use crate::config::FixtureConfig;
use crate::error::Result;

fn gaussian(amplitude: f64, center: [f64; 3], width: f64) -> GeneratorSpec {
    GeneratorSpec::GaussianBump { amplitude, center, width }
}

fn cosine(amplitude: f64, center: [f64; 3], radius: f64) -> GeneratorSpec {
    GeneratorSpec::CosineBump { amplitude, center, radius, power: 4 }
}

fn bandlimited(amplitude: f64, radius: f64) -> GeneratorSpec {
    GeneratorSpec::RandomBandlimited { amplitude, center: [0.0; 3], radius, max_wavenumber: 6.0, modes: 6 }
}

/// Born-regime, moderate and band-limited backgrounds with localised
/// perturbations; every support fits the two-cell margin from n = 16 up.
pub fn standard_suite() -> Vec<FixtureConfig> {
    vec![
        FixtureConfig {
            id: "born".into(),
            background: vec![gaussian(1.0, [0.0; 3], 0.1)],
            perturbation: vec![cosine(0.5, [0.1, 0.0, 0.0], 0.2)],
            seed: 0,
        },
        FixtureConfig {
            id: "moderate".into(),
            background: vec![cosine(3.0, [0.0; 3], 0.3)],
            perturbation: vec![gaussian(1.0, [0.0, 0.1, -0.05], 0.08)],
            seed: 0,
        },
        FixtureConfig {
            id: "band".into(),
            background: vec![bandlimited(2.0, 0.3)],
            perturbation: vec![bandlimited(0.5, 0.25)],
            seed: 3,
        },
    ]
}

/// Fixtures of the same families with different shapes, positions and seeds,
/// for held-out evaluation.
pub fn holdout_suite() -> Vec<FixtureConfig> {
    vec![
        FixtureConfig {
            id: "born-shifted".into(),
            background: vec![gaussian(0.8, [0.0, 0.05, 0.0], 0.09)],
            perturbation: vec![cosine(0.4, [-0.08, 0.0, 0.05], 0.18)],
            seed: 0,
        },
        FixtureConfig {
            id: "moderate-pair".into(),
            background: vec![cosine(2.5, [0.0; 3], 0.28)],
            perturbation: vec![gaussian(0.8, [0.08, -0.05, 0.0], 0.07), gaussian(0.5, [-0.1, 0.0, 0.05], 0.07)],
            seed: 0,
        },
        FixtureConfig {
            id: "band-alt".into(),
            background: vec![bandlimited(1.8, 0.3)],
            perturbation: vec![bandlimited(0.6, 0.22)],
            seed: 21,
        },
    ]
}

/// One `(fixture, perturbation scale)` realisation.
#[derive(Clone, Debug)]
pub struct FixtureInstance {
    /// `<fixture id>@<scale>`.
    pub id: String,
    pub pair: PotentialPair,
}

pub fn instance_id(fixture: &str, scale: f64) -> String {
    format!("{fixture}@{scale}")
}

/// Realises `v₁` and `v₂ = v₁ + scale·w`. Generator seeds mix the run seed
/// with the fixture seed; the perturbation draws from a separate stream.
pub fn realise(
    domain: &Arc<Domain>,
    fixture: &FixtureConfig,
    scale: f64,
    run_seed: u64,
    margin_cells: usize,
) -> Result<FixtureInstance> {
    let base = run_seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(fixture.seed);
    let v1 = generate_sum(domain, &fixture.background, base, margin_cells)?;
    let w = generate_sum(domain, &fixture.perturbation, base.wrapping_add(1 << 32), margin_cells)?;
    let v2 = v1.add(&w.scaled(scale))?;
    Ok(FixtureInstance { id: instance_id(&fixture.id, scale), pair: PotentialPair::new(v1, v2)? })
}
