//! Grid potentials on the cube, their lattice Fourier transforms and norms.
//!
//! Fourier convention: `𝓕w(ξ) = (2π)⁻³ ∫ e^{iξ·x} w(x) dx`, inverse
//! `w(x) = ∫ e^{-iξ·x} 𝓕w(ξ) dξ`.

mod format;
mod generate;
mod spectrum;

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;

use crate::geometry::{Domain, Vec3};
use crate::{Error, Result};

pub use format::{read_complex_grid, read_potential, write_complex_grid, write_potential};
pub use generate::{generate, generate_sum, GeneratorSpec, DEFAULT_MARGIN_CELLS};
pub use spectrum::{
    fourier_transform, tail_l1_bound, tail_l2_bound, FrequencyLattice, Spectrum, DEFAULT_PERIOD_FACTOR,
};

/// Real potential sampled at the interior lattice points, zero elsewhere.
#[derive(Clone, Debug)]
pub struct Potential {
    domain: Arc<Domain>,
    values: Vec<f64>,
    spectrum: OnceLock<Spectrum>,
}

impl Potential {
    pub fn new(domain: Arc<Domain>, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.interior_len() {
            return Err(Error::Config(format!(
                "expected {} samples, got {}",
                domain.interior_len(),
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Config(format!("non-finite potential sample {bad}")));
        }
        Ok(Self { domain, values, spectrum: OnceLock::new() })
    }

    pub fn zero(domain: Arc<Domain>) -> Self {
        let len = domain.interior_len();
        Self { domain, values: vec![0.0; len], spectrum: OnceLock::new() }
    }

    pub fn from_fn(domain: Arc<Domain>, f: impl Fn(Vec3) -> f64) -> Result<Self> {
        let values = (0..domain.interior_len()).map(|i| f(domain.point(domain.unflatten(i)))).collect();
        Self::new(domain, values)
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn linf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn l2(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.domain.cell_volume()).sqrt()
    }

    pub fn l1(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() * self.domain.cell_volume()
    }

    /// Number of all-zero lattice layers next to the nearest face
    /// (`n / 2` when the potential vanishes).
    pub fn margin_cells(&self) -> usize {
        let n = self.domain.n();
        let mut best = n / 2;
        for (flat, &v) in self.values.iter().enumerate() {
            if v != 0.0 {
                let idx = self.domain.unflatten(flat);
                for i in idx {
                    best = best.min(i.min(n - 1 - i));
                }
            }
        }
        best
    }

    /// Distance from the support to the boundary.
    pub fn support_margin(&self) -> f64 {
        (self.margin_cells() as f64 + 1.0) * self.domain.spacing()
    }

    pub fn require_margin(&self, cells: usize) -> Result<()> {
        let got = self.margin_cells();
        if got < cells {
            return Err(Error::Config(format!(
                "support reaches within {got} cells of the boundary, {cells} required"
            )));
        }
        Ok(())
    }

    fn zip_with(&self, other: &Potential, f: impl Fn(f64, f64) -> f64) -> Result<Potential> {
        if !self.domain.same_as(&other.domain) {
            return Err(Error::Incompatible("potentials live on different grids".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Potential::new(self.domain.clone(), values)
    }

    pub fn add(&self, other: &Potential) -> Result<Potential> {
        self.zip_with(other, |a, b| a + b)
    }

    /// `self - other`.
    pub fn sub(&self, other: &Potential) -> Result<Potential> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scaled(&self, s: f64) -> Potential {
        Potential {
            domain: self.domain.clone(),
            values: self.values.iter().map(|v| v * s).collect(),
            spectrum: OnceLock::new(),
        }
    }

    /// Lattice spectrum with the default padding, computed once.
    pub fn spectrum(&self) -> &Spectrum {
        self.spectrum.get_or_init(|| {
            fourier_transform(self, DEFAULT_PERIOD_FACTOR).expect("default period factor is valid")
        })
    }

    /// `(2π)⁻³ h³ Σ_x e^{iξ·x} w(x)` at an arbitrary frequency.
    pub fn fourier_at(&self, xi: Vec3) -> Complex64 {
        let d = &self.domain;
        let n = d.n();
        let phases: Vec<Vec<Complex64>> = (0..3)
            .map(|a| (0..n).map(|i| Complex64::from_polar(1.0, xi[a] * d.coord(i))).collect())
            .collect();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                let pij = phases[0][i] * phases[1][j];
                let row = &self.values[(i * n + j) * n..(i * n + j + 1) * n];
                let mut s = Complex64::new(0.0, 0.0);
                for (k, &v) in row.iter().enumerate() {
                    if v != 0.0 {
                        s += phases[2][k] * v;
                    }
                }
                acc += pij * s;
            }
        }
        acc * d.cell_volume() / (2.0 * PI).powi(3)
    }
}

/// Norms used by the estimates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormKind {
    Linf,
    L2,
    /// `‖w‖_{H^m} = ‖(1 + |ξ|²)^{m/2} 𝓕w‖_{L²}·(2π)^{3/2}`
    Hm(f64),
    /// `‖w‖_{W^m} = sup (1 + |ξ|²)^{m/2} |𝓕w|`
    Wm(f64),
}

pub fn norm(w: &Potential, kind: NormKind) -> Result<f64> {
    match kind {
        NormKind::Linf => Ok(w.linf()),
        NormKind::L2 => Ok(w.l2()),
        NormKind::Hm(m) => w.spectrum().sobolev_norm(m),
        NormKind::Wm(m) => w.spectrum().weighted_sup_norm(m),
    }
}

/// Background `v₁` and perturbed `v₂` potentials on the same grid.
#[derive(Clone, Debug)]
pub struct PotentialPair {
    pub v1: Potential,
    pub v2: Potential,
    diff: Potential,
}

impl PotentialPair {
    pub fn new(v1: Potential, v2: Potential) -> Result<Self> {
        let diff = v2.sub(&v1)?;
        Ok(Self { v1, v2, diff })
    }

    /// `v₂ - v₁`.
    pub fn diff(&self) -> &Potential {
        &self.diff
    }

    pub fn domain(&self) -> &Arc<Domain> {
        self.v1.domain()
    }

    /// `N = max(‖v₁‖∞, ‖v₂‖∞)`.
    pub fn n_bound(&self) -> f64 {
        self.v1.linf().max(self.v2.linf())
    }
}
