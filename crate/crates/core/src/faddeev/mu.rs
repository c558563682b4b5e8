use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use super::green::{GreenOperator, DEFAULT_GREEN_PERIOD_FACTOR};
use crate::geometry::{cdot_real, im, norm, CVec3, Domain, MomentumPair};
use crate::potential::Potential;
use crate::{Error, Result};

/// Largest admissible `ρL`; beyond it `e^{ρL}` factors lose all precision.
pub const MAX_RHO_L: f64 = 25.0;

#[derive(Clone, Debug)]
pub struct MuOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub period_factor: f64,
}

impl Default for MuOptions {
    fn default() -> Self {
        Self { tolerance: 1e-8, max_iterations: 200, period_factor: DEFAULT_GREEN_PERIOD_FACTOR }
    }
}

/// Converged `μ(·, k)` on the interior lattice and the face nodes.
#[derive(Clone, Debug)]
pub struct FaddeevState {
    domain: Arc<Domain>,
    k: CVec3,
    mu_interior: Vec<Complex64>,
    mu_boundary: Vec<Complex64>,
    iterations: usize,
    contraction: f64,
    increments: Vec<f64>,
}

/// Boundary values `e^{-scale} ψ(x_i)`; the physical trace is `values · e^{scale}`.
#[derive(Clone, Debug)]
pub struct BoundaryTrace {
    pub log_scale: f64,
    pub values: Vec<Complex64>,
}

/// Solves `μ = 1 + g * (vμ)` by the Neumann series started at `μ = 1`.
///
/// The contraction estimate is the largest ratio of successive increments in
/// the sup norm over the interior lattice (the first increment is measured
/// against `μ₀ = 1`), so that `sup|μ - 1| ≤ c / (1 - c)` holds exactly.
pub fn solve_mu(v: &Potential, k: &CVec3, opts: &MuOptions) -> Result<FaddeevState> {
    let domain = v.domain().clone();
    let rho = norm(&im(k));
    if rho * domain.radius() > MAX_RHO_L {
        return Err(Error::Domain(format!(
            "rho L = {} exceeds the supported ceiling {MAX_RHO_L}",
            rho * domain.radius()
        )));
    }
    let green = GreenOperator::new(domain.clone(), *k, opts.period_factor)?;
    let grid = green.grid();
    let flats = grid.interior_flats();
    let vals = v.values();
    let support: Vec<usize> = (0..flats.len()).filter(|&i| vals[i] != 0.0).collect();

    let len = grid.len();
    let mut mu = vec![Complex64::new(1.0, 0.0); len];
    let mut d = mu.clone();
    let mut prev_sup = 1.0f64;
    let mut contraction = 0.0f64;
    let mut increments = Vec::new();
    let mut src = vec![Complex64::new(0.0, 0.0); len];
    for it in 1..=opts.max_iterations {
        src.iter_mut().for_each(|s| *s = Complex64::new(0.0, 0.0));
        for &i in &support {
            src[flats[i]] = d[flats[i]] * vals[i];
        }
        d = green.apply(&src);
        let mut sup = 0.0f64;
        let mut inc2 = 0.0;
        let mut mu2 = 0.0;
        for &fl in &flats {
            mu[fl] += d[fl];
            sup = sup.max(d[fl].norm());
            inc2 += d[fl].norm_sqr();
            mu2 += mu[fl].norm_sqr();
        }
        let ratio = if prev_sup > 0.0 { sup / prev_sup } else { 0.0 };
        contraction = contraction.max(ratio);
        if contraction >= 1.0 {
            return Err(Error::NoConvergence { iterations: it, contraction });
        }
        prev_sup = sup;
        let rel = (inc2 / mu2).sqrt();
        increments.push(rel);
        if rel <= opts.tolerance {
            let total = accumulate_boundary(&green, &support, &flats, vals, &mu);
            let mu_interior = flats.iter().map(|&fl| mu[fl]).collect();
            return Ok(FaddeevState {
                domain,
                k: *k,
                mu_interior,
                mu_boundary: total,
                iterations: it,
                contraction,
                increments,
            });
        }
    }
    Err(Error::NoConvergence { iterations: opts.max_iterations, contraction })
}

/// `μ` on the face nodes: `1 + g * (vμ)` evaluated once from the converged
/// interior values.
fn accumulate_boundary(
    green: &GreenOperator,
    support: &[usize],
    flats: &[usize],
    vals: &[f64],
    mu: &[Complex64],
) -> Vec<Complex64> {
    let grid = green.grid();
    let mut src = vec![Complex64::new(0.0, 0.0); grid.len()];
    for &i in support {
        src[flats[i]] = mu[flats[i]] * vals[i];
    }
    let g = green.apply(&src);
    grid.domain()
        .boundary_nodes()
        .iter()
        .map(|b| Complex64::new(1.0, 0.0) + g[grid.boundary_flat(b)])
        .collect()
}

impl FaddeevState {
    pub fn k(&self) -> &CVec3 {
        &self.k
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn contraction_estimate(&self) -> f64 {
        self.contraction
    }

    /// Relative ℓ² increments, one per iteration.
    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    pub fn converged(&self) -> bool {
        true
    }

    pub fn mu_interior(&self) -> &[Complex64] {
        &self.mu_interior
    }

    pub fn mu_boundary(&self) -> &[Complex64] {
        &self.mu_boundary
    }

    /// `sup |μ - 1|` over the interior lattice.
    pub fn sup_deviation(&self) -> f64 {
        self.mu_interior.iter().map(|m| (m - 1.0).norm()).fold(0.0, f64::max)
    }

    pub fn sup_mu(&self) -> f64 {
        self.mu_interior.iter().map(|m| m.norm()).fold(0.0, f64::max)
    }

    pub fn matches(&self, k: &CVec3) -> bool {
        let scale = 1.0 + k.iter().map(|c| c.norm()).sum::<f64>();
        self.k.iter().zip(k).all(|(a, b)| (a - b).norm() <= 1e-12 * scale)
    }

    /// `ψ(x, k) = e^{ik·x} μ(x, k)` on the face nodes, scaled by `e^{-|Im k| L}`.
    pub fn boundary_trace(&self) -> BoundaryTrace {
        let log_scale = norm(&im(&self.k)) * self.domain.radius();
        let values = self
            .domain
            .boundary_nodes()
            .iter()
            .zip(&self.mu_boundary)
            .map(|(b, m)| (Complex64::i() * cdot_real(&self.k, &b.position) - log_scale).exp() * m)
            .collect();
        BoundaryTrace { log_scale, values }
    }
}

/// `h(k, l) = (2π)⁻³ ∫ e^{iξ·x} v(x) μ(x, k) dx` by the lattice rectangle rule.
pub fn scattering_h(v: &Potential, state: &FaddeevState, pair: &MomentumPair) -> Result<Complex64> {
    if !state.matches(&pair.k) {
        return Err(Error::InvalidState("state was solved for a different k".into()));
    }
    if !v.domain().same_as(state.domain()) {
        return Err(Error::Incompatible("potential and state on different grids".into()));
    }
    let d = v.domain();
    let mut acc = Complex64::new(0.0, 0.0);
    for (flat, (&vi, mu)) in v.values().iter().zip(state.mu_interior()).enumerate() {
        if vi != 0.0 {
            let x = d.point(d.unflatten(flat));
            let phase = pair.xi[0] * x[0] + pair.xi[1] * x[1] + pair.xi[2] * x[2];
            acc += Complex64::from_polar(vi, phase) * mu;
        }
    }
    Ok(acc * d.cell_volume() / (2.0 * PI).powi(3))
}
