//! Parameter choices, frequency splitting, intermediate bounds and the
//! right-hand sides of the two stability estimates.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::geometry::{norm, Domain};
use crate::potential::{FrequencyLattice, Potential, Spectrum};
use crate::{Error, Result};

/// Smallest δ used inside logarithms and powers.
pub const DELTA_FLOOR: f64 = 1e-300;

/// Bounds above this are reported as `+∞`.
pub const OVERFLOW: f64 = 1e300;

fn guard(x: f64) -> f64 {
    if x > OVERFLOW {
        f64::INFINITY
    } else {
        x
    }
}

fn floored(delta: f64) -> f64 {
    delta.max(DELTA_FLOOR)
}

/// `ln(3 + 1/δ)` without overflow for tiny δ.
fn log_term(delta: f64) -> f64 {
    let d = floored(delta);
    if d < 1e-12 {
        -d.ln() + (1.0 + 3.0 * d).ln()
    } else {
        (3.0 + 1.0 / d).ln()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhoChoice {
    pub gamma: f64,
    pub rho: f64,
    /// `τ = 1`: no ρ prescription, only the statement's right-hand side applies.
    pub statement_mode: bool,
}

/// `γ = (1 - τ)/(2L)`, `ρ = γ ln(3 + 1/δ)`.
pub fn choose_rho(tau: f64, delta: f64, big_l: f64) -> Result<RhoChoice> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::Domain(format!("tau must lie in (0, 1], got {tau}")));
    }
    if !(delta >= 0.0) || !(big_l > 0.0) {
        return Err(Error::Domain(format!("need delta >= 0 and L > 0, got {delta}, {big_l}")));
    }
    if tau == 1.0 {
        return Ok(RhoChoice { gamma: 0.0, rho: 0.0, statement_mode: true });
    }
    let gamma = (1.0 - tau) / (2.0 * big_l);
    Ok(RhoChoice { gamma, rho: gamma * log_term(delta), statement_mode: false })
}

/// `q = (1/2π)(16πc₁²/3)^{-1/3}`.
pub fn q_l2(c1: f64) -> f64 {
    (16.0 * PI * c1 * c1 / 3.0).powf(-1.0 / 3.0) / (2.0 * PI)
}

/// `q̃ = (8πc₁c₃/3)^{-1/3}`.
pub fn q_linf(c1: f64, c3: f64) -> f64 {
    (8.0 * PI * c1 * c3 / 3.0).powf(-1.0 / 3.0)
}

fn check_energy_rho(energy: f64, rho: f64) -> Result<f64> {
    let s = energy + rho * rho;
    if !(s > 0.0) {
        return Err(Error::Domain(format!("E + rho^2 = {s} must be positive")));
    }
    Ok(s)
}

/// `r = q(1+N)^{-4/3}(E+ρ²)^{1/3}`; returns `(r, q)`.
pub fn choose_r_l2(n: f64, energy: f64, rho: f64, c1: f64) -> Result<(f64, f64)> {
    let s = check_energy_rho(energy, rho)?;
    if !(c1 > 0.0) {
        return Err(Error::Domain(format!("c1 must be positive, got {c1}")));
    }
    let q = q_l2(c1);
    Ok((q * (1.0 + n).powf(-4.0 / 3.0) * s.cbrt(), q))
}

/// `r = q̃(1+N)^{-2/3}(E+ρ²)^{1/6}`; returns `(r, q̃)`.
pub fn choose_r_linf(n: f64, energy: f64, rho: f64, c1: f64, c3: f64) -> Result<(f64, f64)> {
    let s = check_energy_rho(energy, rho)?;
    if !(c1 > 0.0 && c3 > 0.0) {
        return Err(Error::Domain(format!("c1, c3 must be positive, got {c1}, {c3}")));
    }
    let q = q_linf(c1, c3);
    Ok((q * (1.0 + n).powf(-2.0 / 3.0) * s.powf(1.0 / 6.0), q))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitMode {
    L2,
    L1,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorSplit {
    pub low: f64,
    pub high: f64,
    /// Full lattice norm, summed independently of the split.
    pub total: f64,
}

impl ErrorSplit {
    /// `|low² + high² - total²| / total²` (L2) or `|low + high - total| / total` (L1).
    pub fn partition_defect(&self, mode: SplitMode) -> f64 {
        match mode {
            SplitMode::L2 => {
                let t = self.total * self.total;
                if t == 0.0 {
                    0.0
                } else {
                    (self.low * self.low + self.high * self.high - t).abs() / t
                }
            }
            SplitMode::L1 => {
                if self.total == 0.0 {
                    0.0
                } else {
                    (self.low + self.high - self.total).abs() / self.total
                }
            }
        }
    }
}

/// Splits the lattice norm of a spectrum at `|ξ| = r` (low: `|ξ| < r`).
pub fn split_error(s: &Spectrum, r: f64, mode: SplitMode) -> Result<ErrorSplit> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("split radius must be positive, got {r}")));
    }
    let cell = s.lattice().cell_volume();
    Ok(match mode {
        SplitMode::L2 => {
            let total: f64 = s.coefficients().iter().map(|c| c.norm_sqr()).sum::<f64>() * cell;
            ErrorSplit { low: s.head_l2(r), high: s.tail_l2(r), total: total.sqrt() }
        }
        SplitMode::L1 => {
            let total: f64 = s.coefficients().iter().map(|c| c.norm()).sum::<f64>() * cell;
            ErrorSplit { low: s.head_l1(r), high: tail_l1_unchecked(s, r), total }
        }
    })
}

fn tail_l1_unchecked(s: &Spectrum, r: f64) -> f64 {
    let lat = s.lattice();
    s.coefficients()
        .iter()
        .enumerate()
        .filter(|(f, _)| norm(&lat.frequency(*f)) >= r)
        .map(|(_, c)| c.norm())
        .sum::<f64>()
        * lat.cell_volume()
}

/// `(A, B, α, β)` of one estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremConstants {
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl TheoremConstants {
    pub fn unit() -> Self {
        Self { a: 1.0, b: 1.0, alpha: 1.0, beta: 1.0 }
    }
}

/// `Λ = αE + β(1-τ)² ln²(3 + 1/δ)`, after the feasibility checks shared by
/// both estimates.
pub fn lambda(energy: f64, tau: f64, delta: f64, alpha: f64, beta: f64) -> Result<f64> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::Domain(format!("tau must lie in (0, 1], got {tau}")));
    }
    if !(delta >= 0.0) {
        return Err(Error::Domain(format!("delta must be non-negative, got {delta}")));
    }
    if energy < 0.0 && tau == 1.0 {
        return Err(Error::InfeasibleParameters("tau = 1 requires E >= 0".into()));
    }
    let lt = log_term(delta);
    let lam = alpha * energy + beta * (1.0 - tau).powi(2) * lt * lt;
    if energy < 0.0 && !(lam > 0.0) {
        return Err(Error::InfeasibleParameters(format!("side condition fails: Lambda = {lam}")));
    }
    Ok(lam)
}

/// `c x^p` for `x ≥ 0`, with `0^{negative} = +∞` unless `c = 0`.
fn scaled_power(c: f64, x: f64, p: f64) -> f64 {
    if c == 0.0 {
        0.0
    } else if x == 0.0 && p < 0.0 {
        f64::INFINITY
    } else {
        c * x.powf(p)
    }
}

fn first_term(k: &TheoremConstants, lam: f64, delta: f64, tau: f64) -> f64 {
    if delta == 0.0 {
        return 0.0;
    }
    k.a * (0.5 * lam.ln() + tau * delta.ln()).exp()
}

/// `AΛ^{1/2}δ^τ + B(1+N)^{4m/3} N_{H^m} Λ^{-m/3}`.
pub fn rhs_theorem1(energy: f64, tau: f64, delta: f64, m: f64, n: f64, n_hm: f64, k: &TheoremConstants) -> Result<f64> {
    if !(m > 0.0) {
        return Err(Error::Domain(format!("m must be positive, got {m}")));
    }
    let lam = lambda(energy, tau, delta, k.alpha, k.beta)?;
    let t2 = scaled_power(k.b * (1.0 + n).powf(4.0 * m / 3.0) * n_hm, lam, -m / 3.0);
    Ok(guard(first_term(k, lam, delta, tau) + t2))
}

/// `ÃΛ̃^{1/2}δ^τ + B̃(1+N)^{2(m-3)/3} N_{W^m}/(m-3) Λ̃^{-(m-3)/6}`.
pub fn rhs_theorem2(energy: f64, tau: f64, delta: f64, m: f64, n: f64, n_wm: f64, k: &TheoremConstants) -> Result<f64> {
    if !(m > 3.0) {
        return Err(Error::Domain(format!("the L-infinity estimate needs m > 3, got {m}")));
    }
    let lam = lambda(energy, tau, delta, k.alpha, k.beta)?;
    let t2 = scaled_power(
        k.b * (1.0 + n).powf(2.0 * (m - 3.0) / 3.0) * n_wm / (m - 3.0),
        lam,
        -(m - 3.0) / 6.0,
    );
    Ok(guard(first_term(k, lam, delta, tau) + t2))
}

/// `√(E+ρ²) e^{2ρL} δ`, combined in log space.
fn growth_term(s: f64, rho: f64, big_l: f64, delta: f64) -> f64 {
    if delta == 0.0 {
        0.0
    } else {
        (0.5 * s.ln() + 2.0 * rho * big_l + delta.ln()).exp()
    }
}

/// Intermediate L² bound at free ρ:
/// `2[√(E+ρ²)e^{2ρL}δ/2 + (1+N)^{4m/3} N_{H^m} q^{-m} (E+ρ²)^{-m/3}]`.
#[allow(clippy::too_many_arguments)]
pub fn intermediate_l2(energy: f64, rho: f64, delta: f64, n: f64, n_hm: f64, m: f64, c1: f64, big_l: f64) -> Result<f64> {
    let s = check_energy_rho(energy, rho)?;
    let q = q_l2(c1);
    let tail = if n_hm == 0.0 {
        0.0
    } else {
        ((4.0 * m / 3.0) * (1.0 + n).ln() + n_hm.ln() - m * q.ln() - (m / 3.0) * s.ln()).exp()
    };
    Ok(guard(2.0 * (0.5 * growth_term(s, rho, big_l, delta) + tail)))
}

/// Intermediate L∞ bound at free ρ:
/// `2[√(E+ρ²)e^{2ρL}δ/(2c₃) + 4π(1+N)^{2(m-3)/3} N_{W^m} q̃^{3-m}/(m-3) (E+ρ²)^{-(m-3)/6}]`.
#[allow(clippy::too_many_arguments)]
pub fn intermediate_linf(
    energy: f64,
    rho: f64,
    delta: f64,
    n: f64,
    n_wm: f64,
    m: f64,
    c1: f64,
    c3: f64,
    big_l: f64,
) -> Result<f64> {
    if !(m > 3.0) {
        return Err(Error::Domain(format!("the L-infinity bound needs m > 3, got {m}")));
    }
    let s = check_energy_rho(energy, rho)?;
    let q = q_linf(c1, c3);
    let tail = if n_wm == 0.0 {
        0.0
    } else {
        let p = m - 3.0;
        (4.0 * PI).ln() + (2.0 * p / 3.0) * (1.0 + n).ln() + n_wm.ln() - p * q.ln() - p.ln() - (p / 6.0) * s.ln()
    };
    let tail = if n_wm == 0.0 { 0.0 } else { tail.exp() };
    Ok(guard(2.0 * (0.5 * growth_term(s, rho, big_l, delta) / c3 + tail)))
}

/// `‖w‖∞ ≤ c₄ e^{m-3}/(m-3) N_{W^m}` with `c₄ = 4π` (split the lattice
/// sum of `(1+|ξ|²)^{-m/2}` at `|ξ| = 1`).
pub fn linf_fallback(m: f64, n_wm: f64) -> Result<f64> {
    if !(m > 3.0) {
        return Err(Error::Domain(format!("needs m > 3, got {m}")));
    }
    Ok(4.0 * PI * (m - 3.0).exp() / (m - 3.0) * n_wm)
}

/// Low-frequency reconstruction of `v₂ - v₁` from samples of `h₂ - h₁`.
#[derive(Clone, Debug)]
pub struct Reconstruction {
    pub field: Potential,
    /// `max |Im|` of the synthesised field over the grid.
    pub imag_residue: f64,
    pub samples_used: usize,
}

/// `Σ_{|ξ_j| ≤ r} S(ξ_j) e^{-iξ_j·x} Δ³`, real part on the interior lattice.
pub fn reconstruct_diff_lowfreq(
    samples: &HashMap<[i64; 3], Complex64>,
    r: f64,
    lattice: &FrequencyLattice,
    domain: &Arc<Domain>,
) -> Result<Reconstruction> {
    let ball = lattice.ball(r);
    let mut used = Vec::with_capacity(ball.len());
    for j in &ball {
        match samples.get(j) {
            Some(s) => used.push((lattice.frequency_of(*j), *s)),
            None => return Err(Error::IncompleteData(format!("no sample at lattice point {j:?}"))),
        }
    }
    let cell = lattice.cell_volume();
    let mut re = Vec::with_capacity(domain.interior_len());
    let mut imag = 0.0f64;
    for flat in 0..domain.interior_len() {
        let x = domain.point(domain.unflatten(flat));
        let mut acc = Complex64::new(0.0, 0.0);
        for (xi, s) in &used {
            acc += s * Complex64::from_polar(1.0, -(xi[0] * x[0] + xi[1] * x[1] + xi[2] * x[2]));
        }
        acc *= cell;
        imag = imag.max(acc.im.abs());
        re.push(acc.re);
    }
    Ok(Reconstruction { field: Potential::new(domain.clone(), re)?, imag_residue: imag, samples_used: used.len() })
}

/// One training row for a theorem fit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitRow {
    pub energy: f64,
    pub tau: f64,
    pub delta: f64,
    pub m: f64,
    pub n: f64,
    /// `N_{H^m}` (first estimate) or `N_{W^m}` (second).
    pub smooth_norm: f64,
    pub measured: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Estimate {
    L2,
    Linf,
}

/// Margin applied to the measured errors in the fit.
pub const FIT_MARGIN: f64 = 1.1;

fn right_hand_side(which: Estimate, row: &FitRow, k: &TheoremConstants) -> Result<f64> {
    match which {
        Estimate::L2 => rhs_theorem1(row.energy, row.tau, row.delta, row.m, row.n, row.smooth_norm, k),
        Estimate::Linf => rhs_theorem2(row.energy, row.tau, row.delta, row.m, row.n, row.smooth_norm, k),
    }
}

/// Minimises `A + B` over `(A, B)` for each `(α, β)` on a log grid, subject to
/// `FIT_MARGIN · measured ≤ RHS` on every row. For fixed `(α, β)` the problem
/// is a two-variable linear program in `(A, B)`; its objective restricted to
/// `A` is convex piecewise linear and is minimised by golden-section search.
pub fn fit_theorem_constants(which: Estimate, rows: &[FitRow]) -> Result<TheoremConstants> {
    let informative: Vec<&FitRow> = rows.iter().filter(|r| r.measured > 0.0).collect();
    if informative.is_empty() {
        return Err(Error::InfeasibleParameters("no rows with a nonzero error to fit".into()));
    }
    let unit = TheoremConstants { a: 1.0, b: 0.0, alpha: 1.0, beta: 1.0 };
    let mut best: Option<(f64, TheoremConstants)> = None;
    let grid: Vec<f64> = (-12..=12).map(|i| 10f64.powf(i as f64 / 4.0)).collect();
    for &alpha in &grid {
        for &beta in &grid {
            // per row: a_i A + b_i B ≥ y_i
            let mut coef = Vec::with_capacity(informative.len());
            let mut feasible = true;
            for row in &informative {
                let ka = TheoremConstants { alpha, beta, ..unit };
                let kb = TheoremConstants { a: 0.0, b: 1.0, alpha, beta };
                let (ai, bi) = match (right_hand_side(which, row, &ka), right_hand_side(which, row, &kb)) {
                    (Ok(a), Ok(b)) => (a, b),
                    _ => {
                        feasible = false;
                        break;
                    }
                };
                if bi.is_infinite() && bi > 0.0 {
                    continue;
                }
                let y = FIT_MARGIN * row.measured;
                if ai <= 0.0 && bi <= 0.0 {
                    feasible = false;
                    break;
                }
                coef.push((ai, bi, y));
            }
            if !feasible {
                continue;
            }
            if let Some((val, a, b)) = minimise_ab(&coef) {
                if best.map_or(true, |(v, _)| val < v) {
                    best = Some((val, TheoremConstants { a, b, alpha, beta }));
                }
            }
        }
    }
    best.map(|(_, k)| k)
        .ok_or_else(|| Error::InfeasibleParameters("no constants satisfy every training row".into()))
}

fn minimise_ab(coef: &[(f64, f64, f64)]) -> Option<(f64, f64, f64)> {
    // smallest B for a given A, or None when some row cannot be met
    let b_for = |a: f64| -> Option<f64> {
        let mut b = 0.0f64;
        for &(ai, bi, y) in coef {
            let rest = y - ai * a;
            if rest > 0.0 {
                if bi <= 0.0 {
                    return None;
                }
                b = b.max(rest / bi);
            }
        }
        Some(b)
    };
    let a_max = coef
        .iter()
        .filter(|c| c.0 > 0.0)
        .map(|c| c.2 / c.0)
        .fold(0.0f64, f64::max);
    let objective = |a: f64| b_for(a).map(|b| a + b).unwrap_or(f64::INFINITY);
    // golden section on [0, a_max]
    let (mut lo, mut hi) = (0.0, a_max);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (objective(x1), objective(x2));
    for _ in 0..200 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = objective(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = objective(x2);
        }
        if hi - lo <= 1e-12 * a_max.max(1e-300) {
            break;
        }
    }
    let mut candidates = vec![0.0, a_max, 0.5 * (lo + hi)];
    candidates.retain(|a| a.is_finite());
    let mut best: Option<(f64, f64, f64)> = None;
    for a in candidates {
        if let Some(b) = b_for(a) {
            // nudge upwards so the constraints hold after rounding
            let (a, b) = (a * (1.0 + 1e-9), b * (1.0 + 1e-9));
            let v = a + b;
            if best.map_or(true, |(bv, _, _)| v < bv) {
                best = Some((v, a, b));
            }
        }
    }
    best.filter(|(v, _, _)| v.is_finite() && *v > 0.0)
}
