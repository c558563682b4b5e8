//! One sweep point end to end: potentials, DtN maps, δ, parameter choices,
//! lemma witnesses and the theorem right-hand sides.

use std::collections::HashMap;
use std::sync::Arc;
use std::time::Instant;

use gelfand_core::estimator::{
    choose_r_l2, choose_rho, intermediate_l2, intermediate_linf, reconstruct_diff_lowfreq, rhs_theorem1,
    rhs_theorem2, DELTA_FLOOR,
};
use gelfand_core::faddeev::{scattering_h, solve_mu, MuOptions};
use gelfand_core::forward::{delta_norm, BoundaryOperator, DtnMap, ForwardSolver};
use gelfand_core::geometry::{make_theta_pair, max_xi_radius, Domain, Vec3};
use gelfand_core::identity::{hdiff_boundary, hdiff_volume, relative_mismatch, verify_lemma21, Lemma32Record};
use gelfand_core::potential::{fourier_transform, norm, NormKind, PotentialPair};
use gelfand_core::Error as CoreError;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibrate::ConstantsRecord;
use crate::config::{RunConfig, Tolerances};
use crate::error::{HarnessError, Result};
use crate::fixtures::{instance_id, realise, FixtureInstance};

/// Attempts at shifting `E` away from a Dirichlet eigenvalue.
pub const JITTER_ATTEMPTS: usize = 5;

/// One CSV row. Columns follow the field order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    /// `<fixture>@<perturbation scale>`.
    pub fixture_id: String,
    /// Energy actually used (after any eigenvalue jitter).
    pub energy: f64,
    pub tau: f64,
    pub m: f64,
    /// `N = max ‖v_j‖∞`.
    pub n_linf: f64,
    pub n_hm: f64,
    pub n_wm: f64,
    pub delta: Option<f64>,
    pub rho: Option<f64>,
    pub r: Option<f64>,
    pub err_l2: f64,
    pub err_linf: f64,
    pub rhs_theorem1: Option<f64>,
    pub rhs_theorem2: Option<f64>,
    pub intermediate_l2: Option<f64>,
    pub intermediate_linf: Option<f64>,
    pub identity_mismatch: Option<f64>,
    pub lemma32_residual: Option<f64>,
    pub implied_c1: Option<f64>,
    pub implied_c5: Option<f64>,
    pub implied_c6: Option<f64>,
    pub pass_theorem1: Option<bool>,
    pub pass_theorem2: Option<bool>,
    /// `;`-separated markers such as `skipped`, `statement_mode`, `delta_floor`.
    pub flags: String,
    pub timing_s: Option<f64>,
}

impl EstimateReport {
    pub fn skipped(&self) -> bool {
        self.has_flag("skipped")
    }

    pub fn has_flag(&self, flag: &str) -> bool {
        self.flags.split(';').any(|f| f == flag)
    }

    /// Fixture id without the perturbation scale.
    pub fn base_fixture(&self) -> &str {
        self.fixture_id.split('@').next().unwrap_or(&self.fixture_id)
    }
}

fn join_flags(flags: &[String]) -> String {
    let mut out: Vec<&str> = Vec::new();
    for f in flags {
        if !out.contains(&f.as_str()) {
            out.push(f);
        }
    }
    out.join(";")
}

/// A group of sweep points sharing `(fixture, scale, E)`: the DtN maps are
/// assembled once per group.
#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub fixture: usize,
    pub scale: f64,
    pub energy: f64,
}

pub fn sweep_points(cfg: &RunConfig) -> Vec<SweepPoint> {
    let mut pts = Vec::new();
    for fixture in 0..cfg.fixtures.len() {
        for &scale in &cfg.sweep.perturbation_scales {
            for &energy in &cfg.sweep.energies {
                pts.push(SweepPoint { fixture, scale, energy });
            }
        }
    }
    pts
}

pub fn mu_options(t: &Tolerances) -> MuOptions {
    MuOptions { tolerance: t.mu_tolerance, max_iterations: t.mu_max_iterations, period_factor: t.green_period_factor }
}

pub fn domain_of(cfg: &RunConfig) -> Result<Arc<Domain>> {
    Domain::new(cfg.domain.half_width, cfg.domain.n)
        .map(Arc::new)
        .map_err(|e| HarnessError::Config(e.to_string()))
}

pub fn realise_fixture(cfg: &RunConfig, domain: &Arc<Domain>, fixture: usize, scale: f64) -> Result<FixtureInstance> {
    let f = &cfg.fixtures[fixture];
    realise(domain, f, scale, cfg.seed, cfg.tolerances.margin_cells)
        .map_err(|e| HarnessError::Config(format!("fixture {}: {e}", instance_id(&f.id, scale))))
}

/// Forward solvers for both potentials, moving `E` by `10⁻³(1+|E|)` per
/// attempt while either operator is numerically singular.
pub fn guarded_solvers(pair: &PotentialPair, energy: f64) -> Result<Option<(f64, ForwardSolver, ForwardSolver)>> {
    let step = 1e-3 * (1.0 + energy.abs());
    for attempt in 0..=JITTER_ATTEMPTS {
        let e = energy + attempt as f64 * step;
        let solvers = ForwardSolver::new(&pair.v1, e).and_then(|s1| Ok((s1, ForwardSolver::new(&pair.v2, e)?)));
        match solvers {
            Ok((s1, s2)) => return Ok(Some((e, s1, s2))),
            Err(CoreError::NearEigenvalue { .. }) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Ok(None)
}

struct Norms {
    n_hm: f64,
    n_wm: f64,
}

fn smooth_norms(pair: &PotentialPair, m: f64) -> Result<Norms> {
    let hm = |k| -> Result<f64> { Ok(norm(&pair.v1, k)?.max(norm(&pair.v2, k)?)) };
    Ok(Norms { n_hm: hm(NormKind::Hm(m))?, n_wm: hm(NormKind::Wm(m))? })
}

/// Per-τ quantities that do not depend on `m`.
#[derive(Default)]
struct TauWitness {
    rho: Option<f64>,
    identity_mismatch: Option<f64>,
    lemma32_residual: Option<f64>,
    implied_c1: Option<f64>,
    implied_c5: Option<f64>,
    implied_c6: Option<f64>,
    flags: Vec<String>,
}

/// Frequency of the per-row checks, pulled onto half the admissible radius
/// when it lies outside.
pub fn admissible_xi(xi: [f64; 3], energy: f64, rho: f64) -> Result<(Vec3, bool)> {
    let limit = max_xi_radius(energy, rho)?;
    let r = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
    if r <= limit {
        Ok((xi, false))
    } else {
        let s = 0.5 * limit / r;
        Ok(([xi[0] * s, xi[1] * s, xi[2] * s], true))
    }
}

#[allow(clippy::too_many_arguments)]
fn tau_witness(
    pair: &PotentialPair,
    maps: (&DtnMap, &DtnMap),
    energy: f64,
    tau: f64,
    delta: f64,
    tol: &Tolerances,
    opts: &MuOptions,
) -> Result<TauWitness> {
    let domain = pair.domain();
    let mut w = TauWitness::default();
    let choice = choose_rho(tau, delta, domain.radius())?;
    if delta < DELTA_FLOOR {
        w.flags.push("delta_floor".into());
    }
    w.rho = Some(choice.rho);
    if choice.statement_mode {
        w.flags.push("statement_mode".into());
        return Ok(w);
    }
    let rho = choice.rho;
    if !(energy + rho * rho > 0.0) {
        w.flags.push("no_momentum".into());
        return Ok(w);
    }
    let (xi, shrunk) = admissible_xi(tol.identity_xi, energy, rho)?;
    if shrunk {
        w.flags.push("xi_shrunk".into());
    }
    let mp = make_theta_pair(energy, rho, xi)?;
    w.implied_c1 = Some(verify_lemma21(pair, &mp, delta, 0.0)?.implied_c1);
    if !tol.identity_checks {
        return Ok(w);
    }
    if rho * domain.radius() > gelfand_core::faddeev::MAX_RHO_L {
        w.flags.push("rho_ceiling".into());
        return Ok(w);
    }
    let solved = (|| -> gelfand_core::Result<_> {
        let s1_l = solve_mu(&pair.v1, &mp.minus_l(), opts)?;
        let s1_k = solve_mu(&pair.v1, &mp.k, opts)?;
        let s2_k = solve_mu(&pair.v2, &mp.k, opts)?;
        Ok((s1_l, s1_k, s2_k))
    })();
    let (s1_l, s1_k, s2_k) = match solved {
        Ok(s) => s,
        Err(CoreError::NoConvergence { .. }) => {
            w.flags.push("no_convergence".into());
            return Ok(w);
        }
        Err(e) => return Err(e.into()),
    };
    let n = pair.n_bound();
    let sup_mu = s1_l.sup_mu().max(s1_k.sup_mu()).max(s2_k.sup_mu());
    w.implied_c5 = Some(sup_mu / (1.0 + n));
    let vhat = pair.diff().fourier_at(mp.xi);
    let h_def = scattering_h(&pair.v2, &s2_k, &mp)? - scattering_h(&pair.v1, &s1_k, &mp)?;
    let residual = (vhat - h_def).norm();
    w.lemma32_residual = Some(residual);
    w.implied_c6 = Some(Lemma32Record::new(pair, &mp, residual).implied_c6);
    let hv = hdiff_volume(pair, &s1_l, &s2_k, &mp)?;
    let hb = hdiff_boundary(maps.0, maps.1, &s1_l, &s2_k, &mp)?;
    w.identity_mismatch = Some(relative_mismatch(hv, hb));
    Ok(w)
}

/// Rows of one group in `(τ, m)` order.
pub fn run_group(cfg: &RunConfig, domain: &Arc<Domain>, point: &SweepPoint) -> Result<Vec<EstimateReport>> {
    let start = Instant::now();
    let inst = realise_fixture(cfg, domain, point.fixture, point.scale)?;
    let pair = &inst.pair;
    let axes = &cfg.sweep;
    let n = pair.n_bound();
    let err_l2 = pair.diff().l2();
    let err_linf = pair.diff().linf();
    let norms: Vec<Norms> = axes.m.iter().map(|&m| smooth_norms(pair, m)).collect::<Result<_>>()?;

    let blank = |tau: f64, m: f64, nm: &Norms, energy: f64, flags: String| EstimateReport {
        fixture_id: inst.id.clone(),
        energy,
        tau,
        m,
        n_linf: n,
        n_hm: nm.n_hm,
        n_wm: nm.n_wm,
        delta: None,
        rho: None,
        r: None,
        err_l2,
        err_linf,
        rhs_theorem1: None,
        rhs_theorem2: None,
        intermediate_l2: None,
        intermediate_linf: None,
        identity_mismatch: None,
        lemma32_residual: None,
        implied_c1: None,
        implied_c5: None,
        implied_c6: None,
        pass_theorem1: None,
        pass_theorem2: None,
        flags,
        timing_s: None,
    };

    let mut rows = Vec::with_capacity(axes.taus.len() * axes.m.len());
    let guarded = guarded_solvers(pair, point.energy);
    let (energy, s1, s2) = match guarded {
        Ok(Some(g)) => g,
        Ok(None) => {
            for &tau in &axes.taus {
                for (&m, nm) in axes.m.iter().zip(&norms) {
                    rows.push(blank(tau, m, nm, point.energy, "skipped;near_eigenvalue".into()));
                }
            }
            return Ok(finish(rows, cfg, start));
        }
        Err(e) => return Err(e),
    };
    let mut group_flags = Vec::new();
    if energy != point.energy {
        group_flags.push("energy_jittered".to_string());
    }
    let phi1 = s1.dtn_map()?;
    drop(s1);
    let phi2 = if pair.diff().is_zero() {
        phi1.clone()
    } else {
        let m = s2.dtn_map()?;
        drop(s2);
        m
    };
    let delta = delta_norm(&phi1, &phi2)?;
    let opts = mu_options(&cfg.tolerances);

    for &tau in &axes.taus {
        let w = tau_witness(pair, (&phi1, &phi2), energy, tau, delta, &cfg.tolerances, &opts)?;
        for (&m, nm) in axes.m.iter().zip(&norms) {
            let mut flags = group_flags.clone();
            flags.extend(w.flags.iter().cloned());
            let mut row = blank(tau, m, nm, energy, join_flags(&flags));
            row.delta = Some(delta);
            row.rho = w.rho;
            row.identity_mismatch = w.identity_mismatch;
            row.lemma32_residual = w.lemma32_residual;
            row.implied_c1 = w.implied_c1;
            row.implied_c5 = w.implied_c5;
            row.implied_c6 = w.implied_c6;
            rows.push(row);
        }
    }
    Ok(finish(rows, cfg, start))
}

fn finish(mut rows: Vec<EstimateReport>, cfg: &RunConfig, start: Instant) -> Vec<EstimateReport> {
    if cfg.tolerances.record_timing {
        let t = start.elapsed().as_secs_f64();
        rows.iter_mut().for_each(|r| r.timing_s = Some(t));
    }
    rows
}

/// A single sweep point as one report row.
pub fn run_experiment(
    cfg: &RunConfig,
    fixture: usize,
    point: (f64, f64, f64, f64),
    constants: Option<&ConstantsRecord>,
) -> Result<EstimateReport> {
    let (scale, energy, tau, m) = point;
    let mut sub = cfg.clone();
    sub.sweep.perturbation_scales = vec![scale];
    sub.sweep.energies = vec![energy];
    sub.sweep.taus = vec![tau];
    sub.sweep.m = vec![m];
    sub.validate()?;
    let domain = domain_of(&sub)?;
    let mut rows = run_group(&sub, &domain, &SweepPoint { fixture, scale, energy })?;
    let mut row = rows.pop().expect("one row per point");
    if let Some(k) = constants {
        apply_constants(&mut row, k, &domain);
    }
    Ok(row)
}

/// Every row of the sweep in config order, computed on `workers` threads.
pub fn sweep(cfg: &RunConfig, workers: usize, constants: Option<&ConstantsRecord>) -> Result<Vec<EstimateReport>> {
    cfg.validate()?;
    let domain = domain_of(cfg)?;
    let points = sweep_points(cfg);
    for f in 0..cfg.fixtures.len() {
        for &s in &cfg.sweep.perturbation_scales {
            realise_fixture(cfg, &domain, f, s)?;
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    let groups: Vec<Result<Vec<EstimateReport>>> =
        pool.install(|| points.par_iter().map(|p| run_group(cfg, &domain, p)).collect());
    let mut rows = Vec::new();
    for g in groups {
        rows.extend(g?);
    }
    if let Some(k) = constants {
        evaluate(&mut rows, k, &domain);
    }
    Ok(rows)
}

/// Fills `r`, the intermediate bounds, both right-hand sides and the pass
/// flags from a constants record. Idempotent.
pub fn apply_constants(row: &mut EstimateReport, k: &ConstantsRecord, domain: &Domain) {
    row.r = None;
    row.intermediate_l2 = None;
    row.intermediate_linf = None;
    row.rhs_theorem1 = None;
    row.rhs_theorem2 = None;
    row.pass_theorem1 = None;
    row.pass_theorem2 = None;
    let (Some(delta), Some(rho)) = (row.delta, row.rho) else { return };
    let big_l = domain.radius();
    let e = row.energy;
    if !row.has_flag("statement_mode") {
        row.r = choose_r_l2(row.n_linf, e, rho, k.c1).ok().map(|(r, _)| r);
        row.intermediate_l2 = intermediate_l2(e, rho, delta, row.n_linf, row.n_hm, row.m, k.c1, big_l).ok();
        if row.m > 3.0 {
            row.intermediate_linf =
                intermediate_linf(e, rho, delta, row.n_linf, row.n_wm, row.m, k.c1, k.c3, big_l).ok();
        }
    }
    row.rhs_theorem1 = rhs_theorem1(e, row.tau, delta, row.m, row.n_linf, row.n_hm, &k.theorem1).ok();
    row.pass_theorem1 = row.rhs_theorem1.map(|rhs| row.err_l2 <= rhs);
    if let (true, Some(t2)) = (row.m > 3.0, k.theorem2.as_ref()) {
        row.rhs_theorem2 = rhs_theorem2(e, row.tau, delta, row.m, row.n_linf, row.n_wm, t2).ok();
        row.pass_theorem2 = row.rhs_theorem2.map(|rhs| row.err_linf <= rhs);
    }
}

pub fn evaluate(rows: &mut [EstimateReport], k: &ConstantsRecord, domain: &Domain) {
    rows.iter_mut().for_each(|r| apply_constants(r, k, domain));
}

/// Rows failing either theorem.
pub fn failures(rows: &[EstimateReport]) -> Vec<&EstimateReport> {
    rows.iter().filter(|r| r.pass_theorem1 == Some(false) || r.pass_theorem2 == Some(false)).collect()
}

/// Outcome of a low-frequency reconstruction of `v₂ - v₁` from boundary data.
#[derive(Clone, Debug)]
pub struct ReconstructionOutcome {
    pub energy: f64,
    pub rho: f64,
    pub r: f64,
    pub samples: usize,
    /// `‖ṽ - (v₂ - v₁)‖_{L²} / ‖v₂ - v₁‖_{L²}`.
    pub relative_error: f64,
    pub imag_residue: f64,
}

/// Samples `h₂ - h₁` through the boundary form at every point of the
/// frequency lattice (period `period_factor` cube widths) with `|ξ| ≤ r`, then
/// synthesises the field.
pub fn reconstruct_from_boundary(
    pair: &PotentialPair,
    energy: f64,
    rho: f64,
    r: f64,
    period_factor: f64,
    opts: &MuOptions,
) -> Result<ReconstructionOutcome> {
    let domain = pair.domain().clone();
    let Some((energy, s1, s2)) = guarded_solvers(pair, energy)? else {
        return Err(HarnessError::Validation(format!("energy {energy} stays on a Dirichlet eigenvalue")));
    };
    let lattice = fourier_transform(pair.diff(), period_factor)?.lattice().clone();
    let mut samples = HashMap::new();
    for j in lattice.ball(r) {
        let xi = lattice.frequency_of(j);
        let mp = make_theta_pair(energy, rho, xi)?;
        let m1 = solve_mu(&pair.v1, &mp.minus_l(), opts)?;
        let m2 = solve_mu(&pair.v2, &mp.k, opts)?;
        let s1d: &dyn BoundaryOperator = &s1;
        samples.insert(j, hdiff_boundary(s1d, &s2, &m1, &m2, &mp)?);
    }
    let rec = reconstruct_diff_lowfreq(&samples, r, &lattice, &domain)?;
    let err = rec.field.sub(pair.diff())?.l2();
    let scale = pair.diff().l2();
    Ok(ReconstructionOutcome {
        energy,
        rho,
        r,
        samples: rec.samples_used,
        relative_error: if scale > 0.0 { err / scale } else { err },
        imag_residue: rec.imag_residue,
    })
}
