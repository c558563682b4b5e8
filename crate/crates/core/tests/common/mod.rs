#![allow(dead_code)]

use std::sync::Arc;

use gelfand_core::geometry::Domain;
use gelfand_core::potential::{generate, GeneratorSpec, Potential, DEFAULT_MARGIN_CELLS};

pub fn unit(n: usize) -> Arc<Domain> {
    Arc::new(Domain::unit(n).unwrap())
}

pub fn gaussian(d: &Arc<Domain>, amplitude: f64, center: [f64; 3], width: f64) -> Potential {
    let spec = GeneratorSpec::GaussianBump { amplitude, center, width };
    generate(d, &spec, 0, DEFAULT_MARGIN_CELLS).unwrap()
}

pub fn cosine(d: &Arc<Domain>, amplitude: f64, center: [f64; 3], radius: f64) -> Potential {
    let spec = GeneratorSpec::CosineBump { amplitude, center, radius, power: 4 };
    generate(d, &spec, 0, DEFAULT_MARGIN_CELLS).unwrap()
}

pub fn bandlimited(d: &Arc<Domain>, amplitude: f64, radius: f64, seed: u64) -> Potential {
    let spec = GeneratorSpec::RandomBandlimited {
        amplitude,
        center: [0.0; 3],
        radius,
        max_wavenumber: 6.0,
        modes: 6,
    };
    generate(d, &spec, seed, DEFAULT_MARGIN_CELLS).unwrap()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / lx.len() as f64;
    let my = ly.iter().sum::<f64>() / ly.len() as f64;
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    num / den
}
