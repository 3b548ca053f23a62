//! `clockwork` command line.
//!
//! Every subcommand produces a CSV body and a short text summary. With
//! `--format csv` the CSV goes to `--out` (or stdout) and the summary to
//! stderr; with `--format text` the summary is the output.
//!
//! Exit codes: 0 success, 2 usage or input error, 3 numerical failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::asymptotics::{
    dimensionless_switchover_time, switchover_time, AsymptoticSolution, ClassifierConfig, Region,
};
use crate::calibration::{self, fit_report, FitOptions, Measurement};
use crate::format::full;
use crate::kinetics::{DimensionlessGroups, DomainError, InitialConcentrations, RateConstants};
use crate::ode::{
    detect_switchover, detect_switchover_dimensional, integrate, integrate_dimensional,
    OutputGrid, SolveError, SolverConfig, SwitchoverEvent,
};

const AFTER_HELP: &str = "\
Exit status: 0 on success, 2 on usage or input errors, 3 on numerical failure.

Environment:
  CLOCKWORK_SEED  reserved; accepted and ignored (all commands are deterministic).";

#[derive(Debug, Parser)]
#[command(
    name = "clockwork",
    version,
    about = "Vitamin C iodine clock: simulation, asymptotics, switchover prediction and fitting",
    after_help = AFTER_HELP
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the dimensionless or the dimensional system.
    Simulate(SimulateArgs),
    /// Evaluate the piecewise asymptotic solution.
    Asymptotic(AsymptoticArgs),
    /// Compare two engines on a common grid.
    Compare(CompareArgs),
    /// Predict switchover times.
    Predict(PredictArgs),
    /// Fit k0 and phi to measured switchover times.
    Fit(FitArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    Numeric,
    Asymptotic,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write output here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct GroupArgs {
    /// k0/k1.
    #[arg(long)]
    pub eps: Option<f64>,
    /// m0/c0.
    #[arg(long)]
    pub rho: Option<f64>,
    /// b0/m0.
    #[arg(long)]
    pub phi: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DimensionalArgs {
    /// Iodide regeneration rate, l/(mol s).
    #[arg(long)]
    pub k0: Option<f64>,
    /// Iodine reduction rate, l/(mol s).
    #[arg(long)]
    pub k1: Option<f64>,
    /// Initial iodide, mol/l.
    #[arg(long)]
    pub a0: Option<f64>,
    /// Initial iodine, mol/l.
    #[arg(long)]
    pub b0: Option<f64>,
    /// Initial ascorbic acid, mol/l.
    #[arg(long)]
    pub c0: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// End time: tau for dimensionless runs, seconds for dimensional ones.
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long, default_value_t = SolverConfig::DEFAULT_REL_TOL)]
    pub rel_tol: f64,
    /// Defaults to 1e-12 (dimensionless) or 1e-12 m0 (dimensional).
    #[arg(long)]
    pub abs_tol: Option<f64>,
    #[arg(long, default_value_t = SolverConfig::DEFAULT_MAX_STEPS)]
    pub max_steps: usize,
}

#[derive(Debug, Args)]
pub struct ClassifierArgs {
    /// Half-width of region III in units of eps^-1/2 / rho.
    #[arg(long, default_value_t = 3.0)]
    pub corner_width: f64,
    /// End of region I in tau; default 10 / (1 - rho phi).
    #[arg(long)]
    pub initial_end: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub groups: GroupArgs,
    #[command(flatten)]
    pub dimensional: DimensionalArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Switchover event level on beta = b/m0.
    #[arg(long, default_value_t = SwitchoverEvent::DEFAULT_THRESHOLD)]
    pub threshold: f64,
    /// Emit N+1 equally spaced samples instead of every accepted step.
    #[arg(long, value_name = "N")]
    pub samples: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct AsymptoticArgs {
    #[command(flatten)]
    pub groups: GroupArgs,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Number of intervals on the output grid.
    #[arg(long, default_value_t = 1000, value_name = "N")]
    pub samples: usize,
    /// Evaluate a single region's formula everywhere it is defined.
    #[arg(long, value_parser = parse_region)]
    pub region: Option<Region>,
    #[command(flatten)]
    pub classifier: ClassifierArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub groups: GroupArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value_t = 1000, value_name = "N")]
    pub samples: usize,
    #[arg(long, value_enum, default_value_t = Engine::Numeric)]
    pub reference: Engine,
    #[arg(long, value_enum, default_value_t = Engine::Asymptotic)]
    pub candidate: Engine,
    /// Only emit rows where the engines differ.
    #[arg(long)]
    pub diff_only: bool,
    #[command(flatten)]
    pub classifier: ClassifierArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Initial ascorbic acid, mol/l.
    #[arg(long, conflicts_with = "table")]
    pub c0: Option<f64>,
    /// Initial iodine atoms a0 + 2 b0, mol/l.
    #[arg(long, conflicts_with = "table")]
    pub m0: Option<f64>,
    #[arg(long)]
    pub k0: f64,
    #[arg(long, default_value_t = 0.0)]
    pub phi: f64,
    /// Measurement CSV (series_id,c0_mol_l,m0_mol_l,t_sw_s) to predict row by row.
    #[arg(long, value_name = "PATH")]
    pub table: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Measurement CSV; the bundled table when omitted.
    #[arg(long, value_name = "PATH")]
    pub data: Option<PathBuf>,
    #[arg(long, default_value_t = FitOptions::default().k0_init)]
    pub k0_init: f64,
    #[arg(long, default_value_t = FitOptions::default().phi_init)]
    pub phi_init: f64,
    #[arg(long, default_value_t = FitOptions::default().max_iterations)]
    pub max_iterations: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn parse_region(s: &str) -> Result<Region, String> {
    s.parse()
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<DomainError> for CliError {
    fn from(e: DomainError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl<const N: usize> From<SolveError<N>> for CliError {
    fn from(e: SolveError<N>) -> Self {
        match e {
            SolveError::Config(c) => CliError::Input(c.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

/// CSV body plus human-readable summary.
struct Report {
    csv: String,
    summary: String,
}

/// Parse `args` (program name first), run, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: &Command) -> Result<(), CliError> {
    let (report, output) = match command {
        Command::Simulate(a) => (simulate(a)?, &a.output),
        Command::Asymptotic(a) => (asymptotic(a)?, &a.output),
        Command::Compare(a) => (compare(a)?, &a.output),
        Command::Predict(a) => (predict(a)?, &a.output),
        Command::Fit(a) => fit(a).map(|r| (r, &a.output))?,
    };
    let body = match output.format {
        Format::Csv => {
            eprint!("{}", report.summary);
            report.csv
        }
        Format::Text => report.summary,
    };
    match &output.out {
        Some(path) => std::fs::write(path, body)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .lock()
            .write_all(body.as_bytes())
            .map_err(|e| CliError::Input(format!("cannot write to stdout: {e}"))),
    }
}

fn required(value: Option<f64>, flag: &str) -> Result<f64, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("missing required flag --{flag}")))
}

fn groups_from(g: &GroupArgs) -> Result<DimensionlessGroups, CliError> {
    let eps = required(g.eps, "eps")?;
    let rho = required(g.rho, "rho")?;
    let phi = required(g.phi, "phi")?;
    Ok(DimensionlessGroups::new(eps, rho, phi)?)
}

fn classifier_from(c: &ClassifierArgs) -> ClassifierConfig {
    ClassifierConfig {
        initial_end: c.initial_end,
        corner_width: c.corner_width,
    }
}

fn solver_config(s: &SolverArgs, default_abs_tol: f64) -> Result<SolverConfig, CliError> {
    let t_end = required(s.t_end, "t-end")?;
    let mut config = SolverConfig::new(t_end)
        .with_tolerances(s.rel_tol, s.abs_tol.unwrap_or(default_abs_tol));
    config.max_steps = s.max_steps;
    config
        .validate()
        .map_err(|e| CliError::Input(e.to_string()))?;
    Ok(config)
}

fn grid(t_end: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|k| if k == n { t_end } else { t_end * k as f64 / n as f64 })
        .collect()
}

fn simulate(a: &SimulateArgs) -> Result<Report, CliError> {
    let g = &a.groups;
    let d = &a.dimensional;
    let any_groups = g.eps.is_some() || g.rho.is_some() || g.phi.is_some();
    let any_dims = [d.k0, d.k1, d.a0, d.b0, d.c0].iter().any(Option::is_some);
    if any_groups && any_dims {
        return Err(CliError::Usage(
            "give either --eps/--rho/--phi or --k0/--k1/--a0/--b0/--c0, not both".into(),
        ));
    }
    if !(a.threshold > 0.0 && a.threshold < 0.5) {
        return Err(CliError::Input(format!(
            "--threshold must lie in (0, 1/2), got {}",
            a.threshold
        )));
    }
    if any_dims {
        simulate_dimensional(a)
    } else {
        simulate_dimensionless(a)
    }
}

fn output_grid(samples: Option<usize>) -> Result<OutputGrid, CliError> {
    match samples {
        None => Ok(OutputGrid::Steps),
        Some(0) => Err(CliError::Input("--samples must be at least 1".into())),
        Some(n) => Ok(OutputGrid::Uniform(n)),
    }
}

fn simulate_dimensionless(a: &SimulateArgs) -> Result<Report, CliError> {
    let groups = groups_from(&a.groups)?;
    let config = solver_config(&a.solver, SolverConfig::DEFAULT_ABS_TOL)?
        .with_output(output_grid(a.samples)?);
    let traj = integrate(&groups, &config)?;

    let mut csv = String::from("tau,beta,gamma\n");
    for s in traj.samples() {
        let _ = writeln!(csv, "{},{},{}", full(s.t), full(s.y[0]), full(s.y[1]));
    }

    let mut summary = String::new();
    let _ = writeln!(
        summary,
        "dimensionless run: eps = {}, rho = {}, phi = {}, tau_end = {}",
        groups.eps(),
        groups.rho(),
        groups.phi(),
        config.t_end
    );
    write_stats(&mut summary, traj.len(), traj.stats());
    match detect_switchover(&traj, a.threshold) {
        Some(ev) => {
            let _ = writeln!(summary, "switchover (beta = {}): tau = {:.6}", ev.threshold, ev.time);
        }
        None => {
            let _ = writeln!(summary, "switchover (beta = {}): not reached", a.threshold);
        }
    }
    if let Ok(tau_sw) = dimensionless_switchover_time(&groups) {
        let _ = writeln!(summary, "asymptotic switchover centre: tau_sw = {tau_sw:.6}");
    }
    for w in traj.warnings() {
        let _ = writeln!(summary, "warning: {w}");
    }
    Ok(Report { csv, summary })
}

fn simulate_dimensional(a: &SimulateArgs) -> Result<Report, CliError> {
    let d = &a.dimensional;
    let rates = RateConstants::new(required(d.k0, "k0")?, required(d.k1, "k1")?)?;
    let init = InitialConcentrations::new(
        required(d.a0, "a0")?,
        required(d.b0, "b0")?,
        required(d.c0, "c0")?,
    )?;
    let config = solver_config(&a.solver, SolverConfig::DEFAULT_ABS_TOL * init.m0())?
        .with_output(output_grid(a.samples)?);
    let traj = integrate_dimensional(&rates, &init, &config)?;

    let mut csv = String::from("t_s,a_mol_l,b_mol_l,c_mol_l\n");
    for s in traj.samples() {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            full(s.t),
            full(s.y[0]),
            full(s.y[1]),
            full(s.y[2])
        );
    }

    let mut summary = String::new();
    let _ = writeln!(
        summary,
        "dimensional run: k0 = {}, k1 = {}, a0 = {}, b0 = {}, c0 = {}, t_end = {} s",
        rates.k0(),
        rates.k1(),
        init.a0(),
        init.b0(),
        init.c0(),
        config.t_end
    );
    write_stats(&mut summary, traj.len(), traj.stats());
    match detect_switchover_dimensional(&traj, a.threshold) {
        Some(ev) => {
            let _ = writeln!(summary, "switchover (b = {} m0): t = {:.6} s", ev.threshold, ev.time);
        }
        None => {
            let _ = writeln!(summary, "switchover (b = {} m0): not reached", a.threshold);
        }
    }
    if let Ok(t_sw) = switchover_time(&rates, &init) {
        let _ = writeln!(summary, "predicted switchover time: t_sw = {t_sw:.6} s");
    }
    for w in traj.warnings() {
        let _ = writeln!(summary, "warning: {w}");
    }
    Ok(Report { csv, summary })
}

fn write_stats(out: &mut String, samples: usize, stats: &crate::ode::SolverStats) {
    let _ = writeln!(
        out,
        "samples: {samples}; steps: {} accepted, {} rejected; rhs evaluations: {}",
        stats.accepted_steps, stats.rejected_steps, stats.rhs_evals
    );
}

fn asymptotic(a: &AsymptoticArgs) -> Result<Report, CliError> {
    let groups = groups_from(&a.groups)?;
    let t_end = required(a.t_end, "t-end")?;
    if !(t_end > 0.0 && t_end.is_finite()) || a.samples == 0 {
        return Err(CliError::Input(
            "--t-end must be positive and --samples at least 1".into(),
        ));
    }
    let sol = AsymptoticSolution::with_classifier(groups, classifier_from(&a.classifier))?;

    let mut csv = String::from("tau,region,beta,gamma\n");
    let mut skipped = 0usize;
    let mut first_tau: Vec<(Region, f64)> = Vec::new();
    for tau in grid(t_end, a.samples) {
        let (region, beta, gamma) = match a.region {
            Some(r) => match sol.eval_region(r, tau) {
                Ok((b, g)) => (r, b, g),
                Err(_) => {
                    skipped += 1;
                    continue;
                }
            },
            None => {
                let p = sol
                    .eval(tau)
                    .map_err(|e| CliError::Numerical(format!("tau = {tau}: {e}")))?;
                (p.region, p.beta, p.gamma)
            }
        };
        if first_tau.last().is_none_or(|(r, _)| *r != region) {
            first_tau.push((region, tau));
        }
        let _ = writeln!(csv, "{},{},{},{}", full(tau), region, full(beta), full(gamma));
    }

    let c = sol.constants();
    let mut summary = String::new();
    let _ = writeln!(
        summary,
        "asymptotic solution: eps = {}, rho = {}, phi = {}",
        groups.eps(),
        groups.rho(),
        groups.phi()
    );
    let _ = writeln!(
        summary,
        "matching constants: c1 = {}, c2 = {}, c3 = {}, c4 = {}",
        c.c1, c.c2, c.c3, c.c4
    );
    let _ = writeln!(summary, "switchover centre: tau_sw = {:.6}", sol.switchover_tau());
    for (r, tau) in &first_tau {
        let _ = writeln!(summary, "region {r} from tau = {tau:.6}");
    }
    if skipped > 0 {
        let _ = writeln!(
            summary,
            "warning: {skipped} grid points lie outside the domain of region {} and were skipped",
            a.region.map_or("", |r| r.as_str())
        );
    }
    Ok(Report { csv, summary })
}

fn engine_values(
    engine: Engine,
    groups: &DimensionlessGroups,
    sol: &AsymptoticSolution,
    config: &SolverConfig,
    taus: &[f64],
) -> Result<Vec<[f64; 2]>, CliError> {
    match engine {
        Engine::Numeric => {
            let traj = integrate(groups, config)?;
            Ok(traj.samples().iter().map(|s| s.y).collect())
        }
        Engine::Asymptotic => taus
            .iter()
            .map(|&tau| {
                sol.eval(tau)
                    .map(|p| [p.beta, p.gamma])
                    .map_err(|e| CliError::Numerical(format!("tau = {tau}: {e}")))
            })
            .collect(),
    }
}

fn relative(diff: f64, reference: f64) -> f64 {
    if diff == 0.0 {
        0.0
    } else if reference == 0.0 {
        f64::INFINITY
    } else {
        diff / reference.abs()
    }
}

fn compare(a: &CompareArgs) -> Result<Report, CliError> {
    let groups = groups_from(&a.groups)?;
    if a.samples == 0 {
        return Err(CliError::Input("--samples must be at least 1".into()));
    }
    let config = solver_config(&a.solver, SolverConfig::DEFAULT_ABS_TOL)?
        .with_output(OutputGrid::Uniform(a.samples));
    let sol = AsymptoticSolution::with_classifier(groups, classifier_from(&a.classifier))?;
    let taus = grid(config.t_end, a.samples);

    let reference = engine_values(a.reference, &groups, &sol, &config, &taus)?;
    let candidate = if a.candidate == a.reference {
        reference.clone()
    } else {
        engine_values(a.candidate, &groups, &sol, &config, &taus)?
    };
    if reference.len() != taus.len() || candidate.len() != taus.len() {
        return Err(CliError::Numerical("engines returned different grids".into()));
    }

    // per region: max |d beta|, max |d gamma|, max relative d gamma, rows
    let mut worst = [[0.0f64; 3]; 4];
    let mut counts = [0usize; 4];
    let mut csv = String::from(
        "tau,region,beta_ref,gamma_ref,beta_cand,gamma_cand,beta_abs_err,gamma_abs_err,beta_rel_err,gamma_rel_err\n",
    );
    for ((&tau, r), c) in taus.iter().zip(&reference).zip(&candidate) {
        let region = sol.classify(tau);
        let db = (c[0] - r[0]).abs();
        let dg = (c[1] - r[1]).abs();
        let (rb, rg) = (relative(db, r[0]), relative(dg, r[1]));
        let k = region as usize;
        counts[k] += 1;
        worst[k][0] = worst[k][0].max(db);
        worst[k][1] = worst[k][1].max(dg);
        worst[k][2] = worst[k][2].max(rg);
        if a.diff_only && db == 0.0 && dg == 0.0 {
            continue;
        }
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{}",
            full(tau),
            region,
            full(r[0]),
            full(r[1]),
            full(c[0]),
            full(c[1]),
            full(db),
            full(dg),
            full(rb),
            full(rg)
        );
    }

    let mut summary = String::new();
    let _ = writeln!(
        summary,
        "compare {:?} (reference) vs {:?} (candidate): eps = {}, rho = {}, phi = {}",
        a.reference,
        a.candidate,
        groups.eps(),
        groups.rho(),
        groups.phi()
    );
    for region in Region::ALL {
        let k = region as usize;
        if counts[k] == 0 {
            continue;
        }
        let _ = writeln!(
            summary,
            "region {:<3} rows {:>6}  max|d beta| {:.3e}  max|d gamma| {:.3e}  max rel d gamma {:.3e}",
            region.as_str(),
            counts[k],
            worst[k][0],
            worst[k][1],
            worst[k][2]
        );
    }
    Ok(Report { csv, summary })
}

fn read_measurements(path: &PathBuf) -> Result<Vec<Measurement>, CliError> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::Input(format!("cannot open {}: {e}", path.display())))?;
    calibration::load_measurements(file)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn predict(a: &PredictArgs) -> Result<Report, CliError> {
    if !(a.k0 > 0.0 && a.k0.is_finite()) {
        return Err(CliError::Input(format!("--k0 must be positive, got {}", a.k0)));
    }
    if !a.phi.is_finite() {
        return Err(CliError::Input(format!("--phi must be finite, got {}", a.phi)));
    }
    let mut summary = String::new();
    let mut csv = String::new();
    match &a.table {
        Some(path) => {
            let rows = read_measurements(path)?;
            csv.push_str("series_id,c0_mol_l,m0_mol_l,t_sw_observed_s,t_sw_predicted_s,residual_s\n");
            let _ = writeln!(summary, "predictions with k0 = {}, phi = {}", a.k0, a.phi);
            let _ = writeln!(
                summary,
                "{:<8} {:>12} {:>12} {:>12} {:>12}",
                "series", "c0", "m0", "observed", "predicted"
            );
            let mut nonpositive = 0;
            for m in &rows {
                let t = calibration::predict(m, a.k0, a.phi);
                if t <= 0.0 {
                    nonpositive += 1;
                }
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{}",
                    m.series_id,
                    full(m.c0),
                    full(m.m0),
                    full(m.t_sw_observed),
                    full(t),
                    full(m.t_sw_observed - t)
                );
                let _ = writeln!(
                    summary,
                    "{:<8} {:>12.6e} {:>12.6e} {:>12.4} {:>12.4}",
                    m.series_id, m.c0, m.m0, m.t_sw_observed, t
                );
            }
            if nonpositive > 0 {
                let _ = writeln!(
                    summary,
                    "warning: {nonpositive} rows have c0 <= phi m0; no induction period is predicted there"
                );
            }
        }
        None => {
            let c0 = required(a.c0, "c0")?;
            let m0 = required(a.m0, "m0")?;
            if !(c0 > 0.0 && m0 > 0.0 && c0.is_finite() && m0.is_finite()) {
                return Err(CliError::Input("--c0 and --m0 must be positive".into()));
            }
            let t = calibration::predict_raw(c0, m0, a.k0, a.phi);
            csv.push_str("c0_mol_l,m0_mol_l,k0,phi,t_sw_s\n");
            let _ = writeln!(
                csv,
                "{},{},{},{},{}",
                full(c0),
                full(m0),
                full(a.k0),
                full(a.phi),
                full(t)
            );
            let _ = writeln!(summary, "t_sw = {t:.4} s");
            if t <= 0.0 {
                let _ = writeln!(
                    summary,
                    "warning: c0 <= phi m0; the inhibitor is exhausted immediately and no induction period is predicted"
                );
            }
        }
    }
    Ok(Report { csv, summary })
}

fn fit(a: &FitArgs) -> Result<Report, CliError> {
    let data = match &a.data {
        Some(path) => read_measurements(path)?,
        None => calibration::table1(),
    };
    let options = FitOptions {
        k0_init: a.k0_init,
        phi_init: a.phi_init,
        max_iterations: a.max_iterations,
        ..FitOptions::default()
    };
    let result = calibration::fit(&data, &options).map_err(|e| CliError::Input(e.to_string()))?;
    let report = fit_report(&result, &data);
    if !result.converged {
        eprint!("{}", report.summary());
        return Err(CliError::Numerical(format!(
            "fit did not converge in {} iterations",
            result.iterations
        )));
    }
    Ok(Report {
        csv: report.to_csv(),
        summary: report.summary(),
    })
}
