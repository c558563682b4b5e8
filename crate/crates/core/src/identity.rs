//! The two expressions for `h₂(k, l) - h₁(k, l)` (a volume integral against
//! `v₂ - v₁` and a boundary integral against `Φ₂ - Φ₁`) and the pointwise
//! checks that connect them to `v̂₂(ξ) - v̂₁(ξ)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::faddeev::{scattering_h, solve_mu, FaddeevState, MuOptions};
use crate::forward::BoundaryOperator;
use crate::geometry::{Domain, MomentumPair};
use crate::potential::PotentialPair;
use crate::{Error, Result};

/// Calibrated constants are the largest implied constant times this factor.
pub const CALIBRATION_INFLATION: f64 = 1.5;

/// `c₉ = (2π)⁻³ |∂D|`.
pub fn c9(domain: &Domain) -> f64 {
    domain.surface_area() / (2.0 * PI).powi(3)
}

fn check_states(s1: &FaddeevState, s2: &FaddeevState, pair: &MomentumPair) -> Result<()> {
    if !s1.matches(&pair.minus_l()) {
        return Err(Error::InvalidState("first state must be solved at -l".into()));
    }
    if !s2.matches(&pair.k) {
        return Err(Error::InvalidState("second state must be solved at k".into()));
    }
    if !s1.domain().same_as(s2.domain()) {
        return Err(Error::Incompatible("states on different grids".into()));
    }
    Ok(())
}

/// `(2π)⁻³ ∫_D ψ₁(x, -l) (v₂ - v₁)(x) ψ₂(x, k) dx`, where `s1` is `μ` for `v₁`
/// at `-l` and `s2` is `μ` for `v₂` at `k`.
pub fn hdiff_volume(fix: &PotentialPair, s1: &FaddeevState, s2: &FaddeevState, pair: &MomentumPair) -> Result<Complex64> {
    check_states(s1, s2, pair)?;
    let d = fix.domain();
    if !d.same_as(s1.domain()) {
        return Err(Error::Incompatible("potentials and states on different grids".into()));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    let m1 = s1.mu_interior();
    let m2 = s2.mu_interior();
    for (flat, &dv) in fix.diff().values().iter().enumerate() {
        if dv != 0.0 {
            let x = d.point(d.unflatten(flat));
            // ψ₁(x,-l) ψ₂(x,k) = e^{iξ·x} μ₁ μ₂ since k - l = ξ
            let phase = pair.xi[0] * x[0] + pair.xi[1] * x[1] + pair.xi[2] * x[2];
            acc += Complex64::from_polar(dv, phase) * m1[flat] * m2[flat];
        }
    }
    Ok(acc * d.cell_volume() / (2.0 * PI).powi(3))
}

/// `(2π)⁻³ ∫_∂D ψ₁(x, -l) [(Φ₂ - Φ₁) ψ₂(·, k)](x) dσ`.
pub fn hdiff_boundary(
    phi1: &dyn BoundaryOperator,
    phi2: &dyn BoundaryOperator,
    s1: &FaddeevState,
    s2: &FaddeevState,
    pair: &MomentumPair,
) -> Result<Complex64> {
    check_states(s1, s2, pair)?;
    let d = phi1.domain();
    if !d.same_as(phi2.domain()) || !d.same_as(s1.domain()) {
        return Err(Error::Incompatible("DtN maps and states on different grids".into()));
    }
    let e = pair.energy;
    if phi1.energy() != e || phi2.energy() != e {
        return Err(Error::Incompatible(format!(
            "DtN maps at energies {}, {} but the pair lies on E = {e}",
            phi1.energy(),
            phi2.energy()
        )));
    }
    let t1 = s1.boundary_trace();
    let t2 = s2.boundary_trace();
    let re: Vec<f64> = t2.values.iter().map(|c| c.re).collect();
    let im: Vec<f64> = t2.values.iter().map(|c| c.im).collect();
    let (a_re, b_re) = (phi2.apply(&re)?, phi1.apply(&re)?);
    let (a_im, b_im) = (phi2.apply(&im)?, phi1.apply(&im)?);
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, node) in d.boundary_nodes().iter().enumerate() {
        let dphi = Complex64::new(a_re[i] - b_re[i], a_im[i] - b_im[i]);
        acc += t1.values[i] * dphi * node.weight;
    }
    Ok(acc * (t1.log_scale + t2.log_scale).exp() / (2.0 * PI).powi(3))
}

/// `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn relative_mismatch(a: Complex64, b: Complex64) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale.max(1e-14 * scale).max(f64::MIN_POSITIVE)
    }
}

/// Everything computed for one `(k, l)` on one fixture.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub xi: [f64; 3],
    pub energy: f64,
    pub rho: f64,
    /// `v̂₂(ξ) - v̂₁(ξ)`.
    pub vhat_diff: Complex64,
    /// `h₂ - h₁` from the definition of `h`, with `μ_j(·, k)`.
    pub hdiff_definition: Complex64,
    pub hdiff_volume: Complex64,
    pub hdiff_boundary: Complex64,
    /// `|v̂₂ - v̂₁ - (h₂ - h₁)|` with `h` from the definition.
    pub residual_lemma32: f64,
    /// `|v̂₂ - v̂₁ - hdiff_volume|`.
    pub residual_volume: f64,
    /// `|hdiff_volume - hdiff_boundary|`.
    pub residual_identity: f64,
}

impl IdentityCheck {
    pub fn identity_mismatch(&self) -> f64 {
        relative_mismatch(self.hdiff_volume, self.hdiff_boundary)
    }
}

/// Solves `μ₁(-l)`, `μ₁(k)`, `μ₂(k)` and evaluates every form of `h₂ - h₁`.
pub fn check_identity(
    fix: &PotentialPair,
    phi1: &dyn BoundaryOperator,
    phi2: &dyn BoundaryOperator,
    pair: &MomentumPair,
    opts: &MuOptions,
) -> Result<IdentityCheck> {
    let s1_l = solve_mu(&fix.v1, &pair.minus_l(), opts)?;
    let s1_k = solve_mu(&fix.v1, &pair.k, opts)?;
    let s2_k = solve_mu(&fix.v2, &pair.k, opts)?;
    let vhat_diff = fix.diff().fourier_at(pair.xi);
    let hdiff_definition = scattering_h(&fix.v2, &s2_k, pair)? - scattering_h(&fix.v1, &s1_k, pair)?;
    let hv = hdiff_volume(fix, &s1_l, &s2_k, pair)?;
    let hb = hdiff_boundary(phi1, phi2, &s1_l, &s2_k, pair)?;
    Ok(IdentityCheck {
        xi: pair.xi,
        energy: pair.energy,
        rho: pair.rho,
        vhat_diff,
        hdiff_definition,
        hdiff_volume: hv,
        hdiff_boundary: hb,
        residual_lemma32: (vhat_diff - hdiff_definition).norm(),
        residual_volume: (vhat_diff - hv).norm(),
        residual_identity: (hv - hb).norm(),
    })
}

/// One sample of the bound `|v̂₁ - v̂₂ - h₁ + h₂| ≤ c₆ N(1+N) ‖v₂ - v₁‖ / √(E+ρ²)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Lemma32Record {
    pub energy: f64,
    pub rho: f64,
    pub residual: f64,
    /// `N(1+N) ‖v₂ - v₁‖_{L²} / √(E+ρ²)`.
    pub base: f64,
    pub implied_c6: f64,
}

impl Lemma32Record {
    pub fn new(fix: &PotentialPair, pair: &MomentumPair, residual: f64) -> Self {
        let n = fix.n_bound();
        let base = n * (1.0 + n) * fix.diff().l2() / (pair.energy + pair.rho * pair.rho).sqrt();
        let implied_c6 = if base > 0.0 { residual / base } else { 0.0 };
        Self { energy: pair.energy, rho: pair.rho, residual, base, implied_c6 }
    }

    pub fn holds(&self, c6: f64) -> bool {
        self.residual <= c6 * self.base
    }
}

/// Residual sample from the definition of `h`: two `μ` solves at `k`.
pub fn verify_lemma32(fix: &PotentialPair, pair: &MomentumPair, opts: &MuOptions) -> Result<Lemma32Record> {
    let s1 = solve_mu(&fix.v1, &pair.k, opts)?;
    let s2 = solve_mu(&fix.v2, &pair.k, opts)?;
    let h = scattering_h(&fix.v2, &s2, pair)? - scattering_h(&fix.v1, &s1, pair)?;
    let residual = (fix.diff().fourier_at(pair.xi) - h).norm();
    Ok(Lemma32Record::new(fix, pair, residual))
}

/// One sample of `|v̂₂(ξ) - v̂₁(ξ)| ≤ c₁(1+N)²(e^{2ρL}δ + ‖v₂ - v₁‖/√(E+ρ²))`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Lemma21Record {
    pub energy: f64,
    pub rho: f64,
    pub delta: f64,
    pub lhs: f64,
    /// `(1+N)²(e^{2ρL}δ + ‖v₂ - v₁‖/√(E+ρ²))`, possibly `+∞`.
    pub base: f64,
    pub implied_c1: f64,
    /// Whether `E + ρ² ≥ (1+N)² r_floor²`.
    pub feasible: bool,
}

impl Lemma21Record {
    pub fn holds(&self, c1: f64) -> bool {
        self.lhs <= c1 * self.base
    }
}

pub fn verify_lemma21(fix: &PotentialPair, pair: &MomentumPair, delta: f64, r_floor: f64) -> Result<Lemma21Record> {
    let s = pair.energy + pair.rho * pair.rho;
    let limit = crate::geometry::max_xi_radius(pair.energy, pair.rho)?;
    let r = crate::geometry::norm(&pair.xi);
    if r > limit * (1.0 + 1e-12) {
        return Err(Error::InfeasibleFrequency { norm: r, limit });
    }
    if !(delta >= 0.0) {
        return Err(Error::Domain(format!("delta must be non-negative, got {delta}")));
    }
    let n = fix.n_bound();
    let big_l = fix.domain().radius();
    let growth = if delta == 0.0 { 0.0 } else { (2.0 * pair.rho * big_l + delta.ln()).exp() };
    let base = (1.0 + n).powi(2) * (growth + fix.diff().l2() / s.sqrt());
    let lhs = fix.diff().fourier_at(pair.xi).norm();
    let implied_c1 = if base > 0.0 { lhs / base } else { 0.0 };
    Ok(Lemma21Record {
        energy: pair.energy,
        rho: pair.rho,
        delta,
        lhs,
        base,
        implied_c1,
        feasible: s >= (1.0 + n).powi(2) * r_floor * r_floor,
    })
}

/// Largest implied constant times [`CALIBRATION_INFLATION`].
pub fn calibrate_constant(implied: impl IntoIterator<Item = f64>) -> Result<f64> {
    let mut best: Option<f64> = None;
    for c in implied {
        if c.is_finite() {
            best = Some(best.map_or(c, |b: f64| b.max(c)));
        }
    }
    match best {
        Some(b) if b > 0.0 => Ok(CALIBRATION_INFLATION * b),
        _ => Err(Error::InfeasibleParameters("no informative samples to calibrate from".into())),
    }
}
