use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Potential;
use crate::geometry::{Domain, Vec3};
use crate::{Error, Result};

pub const DEFAULT_MARGIN_CELLS: usize = 2;

/// Seeded potential generators. Centres snap to the nearest lattice node so
/// that the peak value is attained on the grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    /// `A exp(-|x - c|² / (2σ²))`, cut off inside the margin.
    GaussianBump { amplitude: f64, center: Vec3, width: f64 },
    /// `A cos^p(π|x - c| / (2R))` for `|x - c| < R`.
    CosineBump {
        amplitude: f64,
        center: Vec3,
        radius: f64,
        #[serde(default = "default_power")]
        power: u32,
    },
    /// Random superposition of plane waves under a smooth window, scaled so
    /// the grid maximum of `|w|` equals `amplitude`.
    RandomBandlimited {
        amplitude: f64,
        center: Vec3,
        radius: f64,
        max_wavenumber: f64,
        #[serde(default = "default_modes")]
        modes: usize,
    },
}

fn default_power() -> u32 {
    4
}

fn default_modes() -> usize {
    6
}

const WINDOW_POWER: i32 = 6;

fn snap(domain: &Domain, c: Vec3) -> Vec3 {
    let h = domain.spacing();
    let w = domain.half_width();
    let mut out = [0.0; 3];
    for a in 0..3 {
        let i = ((c[a] + w) / h - 1.0).round().clamp(0.0, (domain.n() - 1) as f64);
        out[a] = -w + (i + 1.0) * h;
    }
    out
}

fn check_inside(domain: &Domain, c: Vec3, reach: f64, margin_cells: usize) -> Result<()> {
    let limit = domain.half_width() - margin_cells as f64 * domain.spacing();
    for a in 0..3 {
        if c[a].abs() + reach > limit + 1e-12 {
            return Err(Error::Config(format!(
                "support of radius {reach} around {c:?} violates the {margin_cells}-cell margin"
            )));
        }
    }
    Ok(())
}

fn dist(x: &Vec3, c: &Vec3) -> f64 {
    ((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2) + (x[2] - c[2]).powi(2)).sqrt()
}

fn window(r: f64, radius: f64, power: i32) -> f64 {
    if r >= radius {
        0.0
    } else {
        (0.5 * PI * r / radius).cos().powi(power)
    }
}

/// Samples a generator on the interior lattice. Values in the outer
/// `margin_cells` layers are zero.
pub fn generate(domain: &Arc<Domain>, spec: &GeneratorSpec, seed: u64, margin_cells: usize) -> Result<Potential> {
    let n = domain.n();
    let values: Vec<f64> = match spec {
        GeneratorSpec::GaussianBump { amplitude, center, width } => {
            if !(*width > 0.0) {
                return Err(Error::Config(format!("gaussian width must be positive, got {width}")));
            }
            let c = snap(domain, *center);
            check_inside(domain, c, 3.0 * width, margin_cells)?;
            sample(domain, |x| amplitude * (-dist(&x, &c).powi(2) / (2.0 * width * width)).exp())
        }
        GeneratorSpec::CosineBump { amplitude, center, radius, power } => {
            if !(*radius > 0.0) || *power == 0 {
                return Err(Error::Config("cosine bump needs positive radius and power".into()));
            }
            let c = snap(domain, *center);
            check_inside(domain, c, *radius, margin_cells)?;
            sample(domain, |x| amplitude * window(dist(&x, &c), *radius, *power as i32))
        }
        GeneratorSpec::RandomBandlimited { amplitude, center, radius, max_wavenumber, modes } => {
            if !(*radius > 0.0) || *modes == 0 || !(*max_wavenumber >= 0.0) {
                return Err(Error::Config("bandlimited field needs radius > 0, modes > 0".into()));
            }
            let c = snap(domain, *center);
            check_inside(domain, c, *radius, margin_cells)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let waves: Vec<(Vec3, f64, f64)> = (0..*modes)
                .map(|_| {
                    let kappa = [
                        rng.gen_range(-1.0..1.0) * max_wavenumber,
                        rng.gen_range(-1.0..1.0) * max_wavenumber,
                        rng.gen_range(-1.0..1.0) * max_wavenumber,
                    ];
                    (kappa, rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.5..1.0))
                })
                .collect();
            let raw = sample(domain, |x| {
                let s: f64 = waves
                    .iter()
                    .map(|(k, phi, a)| a * (k[0] * x[0] + k[1] * x[1] + k[2] * x[2] + phi).cos())
                    .sum();
                window(dist(&x, &c), *radius, WINDOW_POWER) * s
            });
            let peak = raw.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if peak == 0.0 {
                return Err(Error::Config("bandlimited field vanished on the grid".into()));
            }
            raw.iter().map(|v| v * amplitude / peak).collect()
        }
    };
    let mut values = values;
    for (flat, v) in values.iter_mut().enumerate() {
        let idx = domain.unflatten(flat);
        if idx.iter().any(|&i| i < margin_cells || i + margin_cells >= n) {
            *v = 0.0;
        }
    }
    Potential::new(domain.clone(), values)
}

/// Sum of several generators; component `i` uses seed `seed + i`.
pub fn generate_sum(domain: &Arc<Domain>, specs: &[GeneratorSpec], seed: u64, margin_cells: usize) -> Result<Potential> {
    let mut acc = Potential::zero(domain.clone());
    for (i, spec) in specs.iter().enumerate() {
        acc = acc.add(&generate(domain, spec, seed.wrapping_add(i as u64), margin_cells)?)?;
    }
    Ok(acc)
}

fn sample(domain: &Domain, f: impl Fn(Vec3) -> f64) -> Vec<f64> {
    (0..domain.interior_len()).map(|i| f(domain.point(domain.unflatten(i)))).collect()
}
