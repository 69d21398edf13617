//! Scenario runner: loads JSON configs, executes gallery examples and sweeps,
//! and emits CSV tables plus a JSON report. Numeric outputs are deterministic
//! for a fixed scenario and seed; timings go to stderr only.

mod scenario;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;

use adia_core::adiabatic::{defect_sweep, extended_criterion, rate_fit, Metric, SweepConfig};
use adia_core::evolution::{propagate_grid, DEFAULT_TOL};
use adia_core::family::{OperatorFamily, RotationFamily};
use adia_core::gallery;
use adia_core::linop::{C64, CMat};
use adia_core::riesz::{track_projections, ContourPolicy};
use adia_core::spectra::{gap_profile, stability_probe};
use adia_core::superadiabatic::{build_e_chain, superadiabatic_defects, DEFAULT_CHAIN_GRID};
use adia_core::transport::{discretize_slab, transport_adiabatic_sweep, CrossSectionSchedule};
use adia_core::AdiaError;

use scenario::Scenario;

const EXIT_INVARIANT: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_CONFIG: u8 = 4;

#[derive(Parser)]
#[command(
    name = "adia",
    about = "Run adiabatic-evolution scenarios: gallery examples, defect sweeps, spectral projections",
    long_about = None
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, clap::Args)]
struct RunArgs {
    /// Scenario JSON path (defaults to a minimal scenario for the subcommand)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for CSV/JSON files
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads (0 = all cores)
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Seed override for randomized probes
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// List registered examples (id, dim, section, behavior)
    ListExamples,
    /// Propagate one example and dump U_T(t) on a grid.
    /// CSV columns: t, then re_i_j and im_i_j for each entry
    Evolve(RunArgs),
    /// Track spectral projections along the grid.
    /// Writes gap.csv (t, gap, n_in, n_out) and projections.json
    Project(RunArgs),
    /// Tabulate defect metrics over the T grid.
    /// CSV columns: metric, T, value; fit JSON per metric
    DefectSweep(RunArgs),
    /// Higher-order chain, P_eps, and defect rates over an eps grid.
    /// CSV columns: eps, m_eps, part_ii, part_iii, part_iii_rev, evolution, intertwining, dist_to_p
    Superadiabatic(RunArgs),
    /// Numerical-range bound and randomized product probe.
    /// JSON report only
    Stability(RunArgs),
    /// Extended no-gap criterion values over the T grid.
    /// CSV columns: metric, T, value
    ExtendedCriterion(RunArgs),
    /// Slab-transport adiabatic sweep.
    /// CSV columns: metric, T, value; lambda.csv columns: t, lambda
    Transport(RunArgs),
}

#[derive(Serialize)]
struct InvariantCheck {
    name: String,
    pass: bool,
    residual: f64,
    bound: f64,
}

#[derive(Serialize)]
struct RunReport {
    scenario: Scenario,
    files: Vec<String>,
    fits: serde_json::Value,
    invariant_checks: Vec<InvariantCheck>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, action) = match &cli.command {
        Command::ListExamples => {
            print_registry();
            return ExitCode::SUCCESS;
        }
        Command::Evolve(a) => (a, "evolve"),
        Command::Project(a) => (a, "project"),
        Command::DefectSweep(a) => (a, "defect-sweep"),
        Command::Superadiabatic(a) => (a, "superadiabatic"),
        Command::Stability(a) => (a, "stability"),
        Command::ExtendedCriterion(a) => (a, "extended-criterion"),
        Command::Transport(a) => (a, "transport"),
    };

    adia_core::par::configure_threads(args.jobs);

    let scenario = match load_scenario(args, action) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };

    let started = Instant::now();
    match run(&scenario, args) {
        Ok(report) => {
            eprintln!("completed in {:.1} s", started.elapsed().as_secs_f64());
            let failed = report.invariant_checks.iter().any(|c| !c.pass);
            if failed {
                eprintln!("invariant check failed; see report.json");
                ExitCode::from(EXIT_INVARIANT)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(RunError::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(RunError::Numerical(e)) => {
            eprintln!("numerical failure: {e}");
            ExitCode::from(EXIT_NUMERICAL)
        }
        Err(RunError::Io(e)) => {
            eprintln!("io error: {e}");
            ExitCode::from(EXIT_NUMERICAL)
        }
    }
}

enum RunError {
    Config(String),
    Numerical(AdiaError),
    Io(std::io::Error),
}

impl From<AdiaError> for RunError {
    fn from(e: AdiaError) -> Self {
        match &e {
            AdiaError::InvalidInput(_) | AdiaError::DimensionMismatch(..) => {
                RunError::Config(e.to_string())
            }
            _ => RunError::Numerical(e),
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

fn load_scenario(args: &RunArgs, action: &str) -> Result<Scenario, String> {
    let mut scenario = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            Scenario::parse(&text)?
        }
        None => {
            let default_example = if action == "transport" { "transport-basic" } else { "bsp-5.1" };
            Scenario::parse(&format!(
                r#"{{"example": "{default_example}", "action": "{action}"}}"#
            ))?
        }
    };
    if scenario.action != action {
        return Err(format!(
            "config action '{}' does not match subcommand '{}'",
            scenario.action, action
        ));
    }
    if let Some(seed) = args.seed {
        scenario.seed = Some(seed);
    }
    Ok(scenario)
}

fn print_registry() {
    println!("{:<18} {:>5}  {:<14} {:<12} summary", "id", "dim", "section", "behavior");
    for e in gallery::registry() {
        println!(
            "{:<18} {:>5}  {:<14} {:<12} {}",
            e.id,
            e.dim,
            e.section,
            e.behavior.tag(),
            e.summary
        );
    }
}

fn fmt(x: f64) -> String {
    format!("{x:.17e}")
}

struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
}

impl Outputs {
    fn new(dir: &Path) -> std::io::Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn write(&mut self, name: &str, contents: &str) -> std::io::Result<()> {
        std::fs::write(self.dir.join(name), contents)?;
        self.files.push(name.to_string());
        Ok(())
    }
}

fn build_family(
    scenario: &Scenario,
) -> Result<(OperatorFamily, Option<gallery::GalleryModel>), RunError> {
    if let Some(id) = &scenario.example {
        let model = gallery::build(id, scenario.d_trunc.unwrap_or(gallery::DEFAULT_TRUNCATION))?;
        return Ok((model.family.clone(), Some(model)));
    }
    let inline = scenario
        .family
        .as_ref()
        .ok_or_else(|| RunError::Config("no example or family".into()))?;
    let dim = inline.dim;
    if inline.base.len() != dim || inline.base.iter().any(|row| row.len() != dim) {
        return Err(RunError::Config("inline base matrix has wrong shape".into()));
    }
    let base = CMat::from_fn(dim, dim, |i, j| {
        C64::new(inline.base[i][j][0], inline.base[i][j][1])
    });
    let fam = OperatorFamily::constant(base, "inline");
    match &inline.rotation {
        None => Ok((fam, None)),
        Some(r) => {
            if r.i >= dim || r.j >= dim || r.i == r.j {
                return Err(RunError::Config("rotation plane out of range".into()));
            }
            let rate = r.rate;
            let rot = RotationFamily::plane_rotation(
                dim,
                r.i,
                r.j,
                Arc::new(move |t| rate * t),
                Arc::new(move |_| rate),
                Arc::new(|_| 0.0),
            );
            Ok((adia_core::family::conjugate_family(&fam, &rot)?, None))
        }
    }
}

fn metric_from_name(name: &str) -> Metric {
    match name {
        "proj-defect" => Metric::ProjDefect,
        "reverse-defect" => Metric::ReverseDefect,
        "evolution-defect" => Metric::EvolutionDefect,
        "nogap-defect" => Metric::NogapDefect,
        _ => unreachable!("validated earlier"),
    }
}

fn run(scenario: &Scenario, args: &RunArgs) -> Result<RunReport, RunError> {
    let mut out = Outputs::new(&args.out)?;
    let mut checks: Vec<InvariantCheck> = Vec::new();
    let mut fits = serde_json::Map::new();
    let tol = scenario.tolerance.unwrap_or(DEFAULT_TOL);
    let time_points = scenario.time_points.unwrap_or(64);
    let grid: Vec<f64> = (0..=time_points).map(|i| i as f64 / time_points as f64).collect();
    let t_grid: Vec<f64> = scenario
        .t_grid
        .clone()
        .unwrap_or_else(|| (4..=10).map(|k| (1u64 << k) as f64).collect());

    match scenario.action.as_str() {
        "evolve" => {
            let (fam, model) = build_family(scenario)?;
            let t_scale = scenario.t_scale.unwrap_or(32.0);
            let states = propagate_grid(&fam, t_scale, 0.0, &grid, tol)?;
            let dim = fam.dim;
            let mut csv = String::from("t");
            for i in 0..dim {
                for j in 0..dim {
                    csv.push_str(&format!(",re_{i}_{j},im_{i}_{j}"));
                }
            }
            csv.push('\n');
            for (k, u) in states.iter().enumerate() {
                csv.push_str(&fmt(grid[k]));
                for i in 0..dim {
                    for j in 0..dim {
                        csv.push_str(&format!(",{},{}", fmt(u[(i, j)].re), fmt(u[(i, j)].im)));
                    }
                }
                csv.push('\n');
            }
            out.write("evolution.csv", &csv)?;
            // composition-law invariant on a midpoint split
            let u_mid = adia_core::evolution::propagate(&fam, t_scale, 0.0, 0.5, tol)?;
            let u_rest = adia_core::evolution::propagate(&fam, t_scale, 0.5, 1.0, tol)?;
            let resid = (&u_rest * &u_mid - states.last().unwrap()).norm();
            checks.push(InvariantCheck {
                name: "composition-law".into(),
                pass: resid <= 1e-6,
                residual: resid,
                bound: 1e-6,
            });
            if let Some(model) = &model {
                if let Some(closed) = &model.closed_form {
                    let want = closed(t_scale, 1.0);
                    let resid = (states.last().unwrap() - &want).norm() / want.norm().max(1.0);
                    checks.push(InvariantCheck {
                        name: "closed-form".into(),
                        pass: resid <= 1e-7,
                        residual: resid,
                        bound: 1e-7,
                    });
                }
            }
        }
        "project" => {
            let (fam, model) = build_family(scenario)?;
            let model = model.ok_or_else(|| {
                RunError::Config("project needs a registered example with a window".into())
            })?;
            let window = model
                .window
                .clone()
                .ok_or_else(|| RunError::Config("example has no spectral window".into()))?;
            let profile = gap_profile(&fam, &window, &grid)?;
            out.write("gap.csv", &profile.to_csv())?;
            let pf = track_projections(&fam, &window, &grid, ContourPolicy::default())?;
            out.write("projections.json", &pf.to_json())?;
            let idem = pf.idempotency_defect();
            checks.push(InvariantCheck {
                name: "idempotency".into(),
                pass: idem <= 1e-8,
                residual: idem,
                bound: 1e-8,
            });
            if let Some(analytic) = model.projections(&grid) {
                let drift = (0..grid.len())
                    .map(|i| (&pf.p[i] - analytic.eval(grid[i])).norm())
                    .fold(0.0, f64::max);
                checks.push(InvariantCheck {
                    name: "contour-vs-analytic".into(),
                    pass: drift <= 1e-7,
                    residual: drift,
                    bound: 1e-7,
                });
            }
        }
        "defect-sweep" => {
            let (fam, model) = build_family(scenario)?;
            let model =
                model.ok_or_else(|| RunError::Config("defect-sweep needs an example".into()))?;
            let pf = model
                .projections(&grid)
                .ok_or_else(|| RunError::Config("example carries no projections".into()))?;
            let metric_names = scenario
                .metrics
                .clone()
                .unwrap_or_else(|| vec!["proj-defect".to_string()]);
            let metrics: Vec<Metric> = metric_names.iter().map(|m| metric_from_name(m)).collect();
            let config = SweepConfig {
                t_scales: t_grid.clone(),
                time_grid: grid.clone(),
                metrics,
                tol,
                lambda: model.lambda.clone(),
            };
            let tables = defect_sweep(&fam, &pf, &config)?;
            for table in &tables {
                out.write(&format!("defect-{}.csv", table.metric.tag()), &table.to_csv())?;
                if table.rows.len() >= 4 {
                    let fit = rate_fit(table)?;
                    fits.insert(table.metric.tag().to_string(), serde_json::to_value(&fit).unwrap());
                }
                for (t, why) in &table.failures {
                    eprintln!("row T={t} failed: {why}");
                }
            }
        }
        "superadiabatic" => {
            let (fam, model) = build_family(scenario)?;
            let model =
                model.ok_or_else(|| RunError::Config("superadiabatic needs an example".into()))?;
            let window = model
                .window
                .clone()
                .ok_or_else(|| RunError::Config("example has no spectral window".into()))?;
            let chain_grid: Vec<f64> = (0..=DEFAULT_CHAIN_GRID)
                .map(|i| i as f64 / DEFAULT_CHAIN_GRID as f64)
                .collect();
            let pf = model
                .projections(&chain_grid)
                .ok_or_else(|| RunError::Config("example carries no projections".into()))?;
            let m = scenario.order.or(model.regularity).unwrap_or(2);
            let chain =
                build_e_chain(&fam, &window, &pf, m, &chain_grid, ContourPolicy::default())?;
            let eps_grid: Vec<f64> = scenario
                .eps_grid
                .clone()
                .unwrap_or_else(|| (3..=8).map(|k| 2f64.powi(-k)).collect());
            let defects = superadiabatic_defects(&fam, &chain, &pf, &eps_grid, tol)?;
            out.write("superadiabatic.csv", &defects.to_csv())?;
            let algebra = (0..=m).map(|k| chain.algebra_residual(k)).fold(0.0, f64::max);
            checks.push(InvariantCheck {
                name: "chain-algebra".into(),
                pass: algebra <= 1e-7,
                residual: algebra,
                bound: 1e-7,
            });
            if let Ok(slope) = defects.loglog_slope_part_iii() {
                fits.insert("part_iii_slope_in_eps".into(), serde_json::Value::from(slope));
            }
            fits.insert("g_estimate".into(), serde_json::Value::from(chain.g_estimate));
            for (eps, why) in &defects.failures {
                eprintln!("row eps={eps} failed: {why}");
            }
        }
        "stability" => {
            let (fam, _) = build_family(scenario)?;
            let report = stability_probe(
                &fam,
                scenario.samples.unwrap_or(64),
                scenario.seed.unwrap_or(1),
            )?;
            out.write("stability.json", &serde_json::to_string_pretty(&report).unwrap())?;
            checks.push(InvariantCheck {
                name: "omega-hat-below-omega-prime".into(),
                pass: report.omega_hat <= report.omega_prime + 1e-9,
                residual: report.omega_hat - report.omega_prime,
                bound: 1e-9,
            });
        }
        "extended-criterion" => {
            let (fam, model) = build_family(scenario)?;
            let model = model
                .ok_or_else(|| RunError::Config("extended-criterion needs an example".into()))?;
            let lambda = model
                .lambda
                .clone()
                .ok_or_else(|| RunError::Config("example has no eigenvalue curve".into()))?;
            let pf = model
                .projections(&grid)
                .ok_or_else(|| RunError::Config("example carries no projections".into()))?;
            let res = extended_criterion(&fam, lambda, &pf, &t_grid, &grid, tol)?;
            let mut csv = String::from("metric,T,value\n");
            for r in &res.table.rows {
                csv.push_str(&format!("extended-criterion,{},{}\n", fmt(r.t_scale), fmt(r.value)));
            }
            out.write("extended-criterion.csv", &csv)?;
            let worst_ident =
                res.identity_residuals.iter().map(|(_, r)| *r).fold(0.0, f64::max);
            checks.push(InvariantCheck {
                name: "splitting-identity".into(),
                pass: worst_ident <= 1e-6,
                residual: worst_ident,
                bound: 1e-6,
            });
            for (t, why) in &res.table.failures {
                eprintln!("row T={t} failed: {why}");
            }
        }
        "transport" => {
            let (disc, schedule, t_scales) = match &scenario.transport {
                Some(tr) => (
                    discretize_slab(tr.a, tr.n_x, tr.n_mu)?,
                    CrossSectionSchedule::quadratic_c(tr.c0, tr.c1, tr.s0),
                    tr.t_grid
                        .clone()
                        .unwrap_or_else(|| (4..=9).map(|k| (1u64 << k) as f64).collect()),
                ),
                None => (
                    discretize_slab(1.0, 24, 8)?,
                    CrossSectionSchedule::quadratic_c(0.6, 0.3, 1.0),
                    (4..=9).map(|k| (1u64 << k) as f64).collect(),
                ),
            };
            let sweep = transport_adiabatic_sweep(&disc, &schedule, &t_scales, time_points, tol)?;
            out.write("transport-defect.csv", &sweep.table.to_csv())?;
            out.write("transport-defect-normalized.csv", &sweep.normalized_table.to_csv())?;
            let mut lam_csv = String::from("t,lambda\n");
            for (t, l) in &sweep.lambda_curve {
                lam_csv.push_str(&format!("{},{}\n", fmt(*t), fmt(*l)));
            }
            out.write("transport-lambda.csv", &lam_csv)?;
            fits.insert("evolution-defect".into(), serde_json::to_value(&sweep.fit).unwrap());
            fits.insert(
                "evolution-defect-normalized".into(),
                serde_json::to_value(&sweep.normalized_fit).unwrap(),
            );
            checks.push(InvariantCheck {
                name: "step-cap-validation".into(),
                pass: sweep.cap_validation <= 1e-7,
                residual: sweep.cap_validation,
                bound: 1e-7,
            });
            checks.push(InvariantCheck {
                name: "lambda-dissipative".into(),
                pass: sweep.lambda_curve.iter().all(|(_, l)| *l <= 1e-9),
                residual: sweep.lambda_curve.iter().map(|(_, l)| *l).fold(f64::MIN, f64::max),
                bound: 1e-9,
            });
            checks.push(InvariantCheck {
                name: "leading-eigenvector-positive".into(),
                pass: sweep.min_eigvec_entry > 0.0,
                residual: -sweep.min_eigvec_entry,
                bound: 0.0,
            });
        }
        other => return Err(RunError::Config(format!("unknown action: {other}"))),
    }

    let report = RunReport {
        scenario: scenario.clone(),
        files: out.files.clone(),
        fits: serde_json::Value::Object(fits),
        invariant_checks: checks,
    };
    let text = serde_json::to_string_pretty(&report).unwrap();
    std::fs::write(args.out.join("report.json"), &text)?;
    for c in &report.invariant_checks {
        println!(
            "check {}: {} (residual {:.3e}, bound {:.3e})",
            c.name,
            if c.pass { "pass" } else { "FAIL" },
            c.residual,
            c.bound
        );
    }
    Ok(report)
}
