//! `gelfand` command line.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use gelfand_core::estimator::{choose_rho, split_error, SplitMode};
use gelfand_core::faddeev::{scattering_h, solve_mu};
use gelfand_core::forward::{delta_norm, write_dtn, BoundaryOperator};
use gelfand_core::geometry::{make_theta_pair, Domain};
use gelfand_core::identity::{check_identity, verify_lemma21, verify_lemma32};
use gelfand_core::potential::{GeneratorSpec, Potential};
use gelfand_core::Complex64;

use crate::calibrate::{calibrate, ConstantsRecord};
use crate::config::{resolve_workers, DomainConfig, FixtureConfig, RunConfig, SweepAxes};
use crate::error::{HarnessError, Result};
use crate::experiment::{self, domain_of, guarded_solvers, mu_options, realise_fixture, run_experiment};
use crate::report;

#[derive(Parser, Debug)]
#[command(name = "gelfand", version, about = "Stability-estimate lab for the Gel'fand inverse boundary value problem")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// DtN maps and δ for one fixture.
    Forward {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        fixture: String,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, default_value_t = 4.0)]
        energy: f64,
        /// Write the DtN map of v₁ here.
        #[arg(long)]
        dtn_out: Option<PathBuf>,
    },
    /// μ and h diagnostics at one complex momentum.
    Faddeev {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        fixture: String,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, default_value_t = 4.0)]
        energy: f64,
        #[arg(long, default_value_t = 2.0)]
        rho: f64,
        #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [1.0, 0.0, 0.0])]
        xi: Vec<f64>,
    },
    /// Lemma and identity checks.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        constants: Option<PathBuf>,
    },
    /// The full theorem grid, one CSV row per point.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        constants: Option<PathBuf>,
    },
    /// Fit constants on sweep rows.
    Calibrate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "constants.json")]
        output: PathBuf,
    },
    /// Print the default run configuration as JSON.
    DefaultConfig,
    /// Summary table and plot data from a sweep CSV.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        constants: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "plots")]
        plots: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Suite {
    /// Degenerate cases with exactly known answers.
    Trivial,
    /// Volume against boundary form of h₂ - h₁ on the configured fixtures.
    Identity,
    /// Lemma bounds with calibrated constants.
    Lemmas,
}

/// Parses `args` (program name first) and runs the command; returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn fixture_index(cfg: &RunConfig, id: &str) -> Result<usize> {
    cfg.fixtures
        .iter()
        .position(|f| f.id == id)
        .ok_or_else(|| HarnessError::Config(format!("no fixture named {id:?}")))
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Forward { config, fixture, scale, energy, dtn_out } => {
            let cfg = load_config(config.as_deref())?;
            let domain = domain_of(&cfg)?;
            let inst = realise_fixture(&cfg, &domain, fixture_index(&cfg, &fixture)?, scale)?;
            let Some((e, s1, s2)) = guarded_solvers(&inst.pair, energy)? else {
                return Err(HarnessError::Validation(format!("E = {energy} stays on a Dirichlet eigenvalue")));
            };
            let (phi1, phi2) = (s1.dtn_map()?, s2.dtn_map()?);
            println!("fixture {}  n = {}  E = {e}", inst.id, domain.n());
            println!("spectral margin  v1 {:.6e}  v2 {:.6e}", s1.margin(), s2.margin());
            println!("operator norm    v1 {:.6e}  v2 {:.6e}", phi1.operator_norm(), phi2.operator_norm());
            println!("delta            {:.6e}", delta_norm(&phi1, &phi2)?);
            if let Some(p) = dtn_out {
                let mut f = std::io::BufWriter::new(std::fs::File::create(&p)?);
                write_dtn(&phi1, &mut f)?;
                println!("wrote {}", p.display());
            }
            Ok(0)
        }
        Command::Faddeev { config, fixture, scale, energy, rho, xi } => {
            let cfg = load_config(config.as_deref())?;
            let domain = domain_of(&cfg)?;
            let inst = realise_fixture(&cfg, &domain, fixture_index(&cfg, &fixture)?, scale)?;
            let pair = make_theta_pair(energy, rho, [xi[0], xi[1], xi[2]])?;
            let opts = mu_options(&cfg.tolerances);
            println!("fixture {}  E = {energy}  rho = {rho}  xi = {xi:?}", inst.id);
            for (name, v) in [("v1", &inst.pair.v1), ("v2", &inst.pair.v2)] {
                let s = solve_mu(v, &pair.k, &opts)?;
                let h = scattering_h(v, &s, &pair)?;
                let vhat = v.fourier_at(pair.xi);
                println!(
                    "{name}: sup|mu-1| {:.6e}  iterations {}  contraction {:.4}  h {:.6e}  |h - vhat| {:.6e}",
                    s.sup_deviation(),
                    s.iterations(),
                    s.contraction_estimate(),
                    h,
                    (h - vhat).norm()
                );
            }
            Ok(0)
        }
        Command::Verify { suite, config, constants } => {
            let cfg = load_config(config.as_deref())?;
            let checks = match suite {
                Suite::Trivial => trivial_suite()?,
                Suite::Identity => identity_suite(&cfg)?,
                Suite::Lemmas => {
                    let path = constants.or(cfg.constants_path.clone()).ok_or_else(|| {
                        HarnessError::Config("the lemma suite needs --constants or constants_path".into())
                    })?;
                    lemma_suite(&cfg, &ConstantsRecord::load(&path)?)?
                }
            };
            let mut failed = 0;
            for (name, ok, detail) in &checks {
                println!("{} {name}{}", if *ok { "ok  " } else { "FAIL" }, detail);
                if !ok {
                    failed += 1;
                }
            }
            println!("{} of {} checks passed", checks.len() - failed, checks.len());
            Ok(if failed == 0 { 0 } else { 1 })
        }
        Command::Sweep { config, seed, workers, output, constants } => {
            let mut cfg = load_config(config.as_deref())?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(o) = output {
                cfg.output = o;
            }
            let env = std::env::var("GELFAND_WORKERS").ok();
            let workers = resolve_workers(workers, env.as_deref(), cfg.workers)?;
            let constants = match constants.or(cfg.constants_path.clone()) {
                Some(p) => Some(ConstantsRecord::load(&p)?),
                None => None,
            };
            let rows = experiment::sweep(&cfg, workers, constants.as_ref())?;
            report::write_rows_file(&rows, &cfg.output)?;
            println!("wrote {} rows to {}", rows.len(), cfg.output.display());
            let failing = experiment::failures(&rows).len();
            if failing > 0 {
                println!("{failing} rows violate a theorem bound");
                return Ok(1);
            }
            Ok(0)
        }
        Command::Calibrate { input, config, output } => {
            let rows = report::read_rows_file(&input)?;
            let (cfg, digest) = match config.as_deref() {
                Some(p) => {
                    let c = RunConfig::load(p)?;
                    let d = c.digest();
                    (c, Some(d))
                }
                None => (RunConfig::default(), None),
            };
            let domain = domain_of(&cfg)?;
            let rec = calibrate(&rows, &domain, digest, Some(cfg.seed))
                .map_err(|e| match e {
                    HarnessError::Calibration(m) => HarnessError::Validation(m),
                    other => other,
                })?;
            rec.save(&output)?;
            println!("c1 = {:.6e}  c5 = {:?}  c6 = {:?}", rec.c1, rec.c5, rec.c6);
            println!("theorem 1: {:?}", rec.theorem1);
            println!("theorem 2: {:?}", rec.theorem2);
            println!("wrote {}", output.display());
            Ok(0)
        }
        Command::DefaultConfig => {
            println!("{}", serde_json::to_string_pretty(&RunConfig::default())?);
            Ok(0)
        }
        Command::Report { input, constants, config, plots } => {
            let mut rows = report::read_rows_file(&input)?;
            if let Some(p) = constants {
                let cfg = load_config(config.as_deref())?;
                let rec = ConstantsRecord::load(&p)?;
                experiment::evaluate(&mut rows, &rec, domain_of(&cfg)?.as_ref());
            }
            print!("{}", report::format_summary(&report::summarise(&rows)));
            for f in report::write_plot_data(&rows, &plots)? {
                println!("wrote {}", f.display());
            }
            Ok(if experiment::failures(&rows).is_empty() { 0 } else { 1 })
        }
    }
}

type Check = (String, bool, String);

fn check(name: &str, ok: bool, detail: String) -> Check {
    (name.to_string(), ok, if detail.is_empty() { detail } else { format!(": {detail}") })
}

fn trivial_suite() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let domain = Arc::new(Domain::unit(8)?);
    let bump = GeneratorSpec::GaussianBump { amplitude: 1.0, center: [0.0; 3], width: 0.05 };
    let v = gelfand_core::potential::generate(&domain, &bump, 0, 2)?;

    let phi = gelfand_core::forward::dtn_map(&v, 2.0)?;
    let d = delta_norm(&phi, &phi.clone())?;
    out.push(check("delta vanishes for equal potentials", d == 0.0, format!("delta = {d}")));

    let k = make_theta_pair(1.0, 1.5, [0.5, 0.0, 0.0])?.k;
    let s = solve_mu(&Potential::zero(domain.clone()), &k, &Default::default())?;
    out.push(check(
        "mu is one for the zero potential",
        s.sup_deviation() == 0.0 && s.iterations() == 1,
        format!("sup|mu-1| = {}, iterations {}", s.sup_deviation(), s.iterations()),
    ));

    let real_k = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)];
    let singular = matches!(solve_mu(&v, &real_k, &Default::default()), Err(gelfand_core::Error::Singular(_)));
    out.push(check("real momentum is rejected", singular, String::new()));

    let infeasible = make_theta_pair(0.0, 1.0, [5.0, 0.0, 0.0]).is_err();
    out.push(check("xi outside the admissible ball is rejected", infeasible, String::new()));

    let rc = choose_rho(1.0, 1e-3, domain.radius())?;
    out.push(check("tau = 1 selects statement mode", rc.statement_mode && rc.rho == 0.0, String::new()));

    let split = split_error(v.spectrum(), 6.0, SplitMode::L2)?;
    let defect = split.partition_defect(SplitMode::L2);
    out.push(check("L2 split partitions the norm", defect <= 1e-12, format!("defect {defect:e}")));

    let cfg = RunConfig {
        domain: DomainConfig { half_width: 0.5, n: 8 },
        fixtures: vec![FixtureConfig { id: "flat".into(), background: vec![bump.clone()], perturbation: vec![bump], seed: 0 }],
        sweep: SweepAxes { energies: vec![4.0], taus: vec![0.5], m: vec![4.0], perturbation_scales: vec![0.0] },
        ..RunConfig::default()
    };
    let row = run_experiment(&cfg, 0, (0.0, 4.0, 0.5, 4.0), None)?;
    let ok = row.delta == Some(0.0)
        && row.err_l2 == 0.0
        && row.err_linf == 0.0
        && row.has_flag("delta_floor")
        && row.rho.is_some_and(f64::is_finite);
    out.push(check("identical potentials give the delta = 0 branch", ok, format!("rho = {:?}", row.rho)));

    let rows = vec![row; 40];
    let degenerate = matches!(calibrate(&rows, &domain, None, None), Err(HarnessError::Calibration(_)));
    out.push(check("calibration rejects degenerate training rows", degenerate, String::new()));
    Ok(out)
}

const PROBE_ENERGY: f64 = 4.0;
const PROBE_RHO: f64 = 2.0;

fn identity_suite(cfg: &RunConfig) -> Result<Vec<Check>> {
    let domain = domain_of(cfg)?;
    let opts = mu_options(&cfg.tolerances);
    let mut out = Vec::new();
    for f in 0..cfg.fixtures.len() {
        let inst = realise_fixture(cfg, &domain, f, 1.0)?;
        let Some((e, s1, s2)) = guarded_solvers(&inst.pair, PROBE_ENERGY)? else {
            out.push(check(&inst.id, false, "energy on a Dirichlet eigenvalue".into()));
            continue;
        };
        let (xi, _) = experiment::admissible_xi(cfg.tolerances.identity_xi, e, PROBE_RHO)?;
        let pair = make_theta_pair(e, PROBE_RHO, xi)?;
        let (p1, p2): (&dyn BoundaryOperator, &dyn BoundaryOperator) = (&s1, &s2);
        let c = check_identity(&inst.pair, p1, p2, &pair, &opts)?;
        let mm = c.identity_mismatch();
        out.push(check(&format!("identity {}", inst.id), mm <= 0.1, format!("relative mismatch {mm:.3e}")));
    }
    Ok(out)
}

fn lemma_suite(cfg: &RunConfig, k: &ConstantsRecord) -> Result<Vec<Check>> {
    let domain = domain_of(cfg)?;
    let opts = mu_options(&cfg.tolerances);
    let mut out = Vec::new();
    for f in 0..cfg.fixtures.len() {
        let inst = realise_fixture(cfg, &domain, f, 1.0)?;
        for &e in &cfg.sweep.energies {
            let Some((e, s1, s2)) = guarded_solvers(&inst.pair, e)? else { continue };
            let delta = delta_norm(&s1.dtn_map()?, &s2.dtn_map()?)?;
            let (xi, _) = experiment::admissible_xi(cfg.tolerances.identity_xi, e, PROBE_RHO)?;
            let pair = make_theta_pair(e, PROBE_RHO, xi)?;
            let l21 = verify_lemma21(&inst.pair, &pair, delta, 0.0)?;
            out.push(check(
                &format!("lemma21 {} E={e}", inst.id),
                l21.holds(k.c1),
                format!("implied c1 {:.3e} vs {:.3e}", l21.implied_c1, k.c1),
            ));
            if let Some(c6) = k.c6 {
                let l32 = verify_lemma32(&inst.pair, &pair, &opts)?;
                out.push(check(
                    &format!("lemma32 {} E={e}", inst.id),
                    l32.holds(c6),
                    format!("implied c6 {:.3e} vs {c6:.3e}", l32.implied_c6),
                ));
            }
        }
    }
    Ok(out)
}
