//! Command-line front end: simulate, analyze, decompose, sweep, scenarios.

use clap::{Parser, Subcommand};
use lagflow::decomp;
use lagflow::flow::{run_flow, FlowConfig, Termination, Trajectory};
use lagflow::io as lfio;
use lagflow::maslov;
use lagflow::mollify::Mollifier;
use lagflow::scenarios::{self, ScenarioSpec};
use lagflow::varifold::DiscreteVarifold;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_RUNTIME: u8 = 4;

#[derive(Parser)]
#[command(
    name = "lagflow",
    about = "Mass-decreasing lagrangian varifold flows: simulate, analyze, decompose",
    version
)]
struct Cli {
    /// Suppress progress output.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a flow described by a JSON run configuration.
    Simulate {
        /// Run configuration file.
        #[arg(long)]
        config: PathBuf,
        /// Output directory override (paths in the config are relative to it).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Snapshot cadence override.
        #[arg(long)]
        cadence: Option<usize>,
    },
    /// Report mass, windings, curvature identities and flow checks for a
    /// varifold JSON or a trajectory JSONL.
    Analyze {
        #[arg(long)]
        input: PathBuf,
        /// Mollification scale (default: 4 x mesh resolution).
        #[arg(long)]
        epsilon: Option<f64>,
        /// Report path (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Phase decomposition of a near-stationary varifold.
    Decompose {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        phase_tol: f64,
        /// Mollification scale (default: 4 x mesh resolution).
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run one configuration across a parameter axis and tabulate the
    /// final diagnostics and empirical convergence orders.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// One of: epsilon, dyadic_level, resolution.
        #[arg(long)]
        axis: String,
        /// Comma-separated axis values.
        #[arg(long)]
        values: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// List the scenario catalogue.
    Scenarios,
}

// ---------------------------------------------------------------------------
// run configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
struct OutputConfig {
    trajectory_path: PathBuf,
    diagnostics_path: PathBuf,
    #[serde(default)]
    svg_dir: Option<PathBuf>,
    #[serde(default = "default_cadence")]
    snapshot_cadence: usize,
    /// Include full particle data on snapshot lines.
    #[serde(default)]
    include_particles: bool,
}

fn default_cadence() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RunConfig {
    scenario: ScenarioSpec,
    flow: FlowConfig,
    outputs: OutputConfig,
    /// Reserved; all algorithms are deterministic.
    #[serde(default)]
    seed: u64,
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    error: ErrorBody<'a>,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: String,
}

fn emit_error(kind: &str, message: impl ToString) {
    let record = ErrorRecord {
        error: ErrorBody {
            kind,
            message: message.to_string(),
        },
    };
    eprintln!("{}", serde_json::to_string(&record).unwrap());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Simulate {
            config,
            out,
            cadence,
        } => cmd_simulate(&config, out.as_deref(), cadence, cli.quiet),
        Command::Analyze {
            input,
            epsilon,
            out,
        } => cmd_analyze(&input, epsilon, out.as_deref()),
        Command::Decompose {
            input,
            phase_tol,
            epsilon,
            out,
        } => cmd_decompose(&input, phase_tol, epsilon, out.as_deref()),
        Command::Sweep {
            config,
            axis,
            values,
            out,
        } => cmd_sweep(&config, &axis, &values, &out, cli.quiet),
        Command::Scenarios => {
            for (name, desc) in scenarios::catalogue() {
                println!("{name:28} {desc}");
            }
            EXIT_OK
        }
    };
    ExitCode::from(code)
}

fn load_run_config(path: &Path) -> Result<RunConfig, (u8, String)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| (EXIT_IO, format!("cannot read {}: {e}", path.display())))?;
    let config: RunConfig =
        serde_json::from_str(&text).map_err(|e| (EXIT_CONFIG, format!("bad config: {e}")))?;
    config
        .flow
        .validate()
        .map_err(|e| (EXIT_CONFIG, format!("bad flow config: {e}")))?;
    Ok(config)
}

fn run_from_config(
    config: &RunConfig,
    out_dir: Option<&Path>,
    cadence: Option<usize>,
    quiet: bool,
) -> Result<(Trajectory, OutputConfig), (u8, String)> {
    let scenario = scenarios::generate(&config.scenario)
        .map_err(|e| (EXIT_CONFIG, format!("scenario: {e}")))?;
    let mut flow_config = config.flow.clone();
    let mut outputs = config.outputs.clone();
    if let Some(c) = cadence {
        outputs.snapshot_cadence = c;
    }
    flow_config.snapshot_cadence = outputs.snapshot_cadence;
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)
            .map_err(|e| (EXIT_IO, format!("cannot create {}: {e}", dir.display())))?;
        outputs.trajectory_path = dir.join(&outputs.trajectory_path);
        outputs.diagnostics_path = dir.join(&outputs.diagnostics_path);
        outputs.svg_dir = outputs.svg_dir.map(|d| dir.join(d));
    }
    if !quiet {
        eprintln!(
            "running {} to t = {} (dt = 2^-{}, eps = {})",
            scenario.id, flow_config.t_final, flow_config.dyadic_level_k, flow_config.epsilon
        );
    }
    let trajectory = run_flow(scenario.varifold, &flow_config, &scenario.id)
        .map_err(|e| (EXIT_RUNTIME, format!("flow: {e}")))?;
    Ok((trajectory, outputs))
}

fn write_run_outputs(
    trajectory: &Trajectory,
    outputs: &OutputConfig,
) -> Result<(), (u8, String)> {
    if let Some(parent) = outputs.trajectory_path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| (EXIT_IO, format!("mkdir {}: {e}", parent.display())))?;
        }
    }
    lfio::write_trajectory_jsonl(
        &outputs.trajectory_path,
        trajectory,
        outputs.include_particles,
    )
    .map_err(|e| (EXIT_IO, format!("trajectory: {e}")))?;
    lfio::write_diagnostics_csv(&outputs.diagnostics_path, &trajectory.diagnostics)
        .map_err(|e| (EXIT_IO, format!("diagnostics: {e}")))?;
    if let Some(svg_dir) = &outputs.svg_dir {
        if trajectory
            .snapshots
            .first()
            .map(|s| s.varifold.n() == 1)
            .unwrap_or(false)
        {
            std::fs::create_dir_all(svg_dir)
                .map_err(|e| (EXIT_IO, format!("mkdir {}: {e}", svg_dir.display())))?;
            let half_width = trajectory.snapshots[0].varifold.support_radius() * 1.15;
            for (i, s) in trajectory.snapshots.iter().enumerate() {
                lfio::write_svg_snapshot(svg_dir, i, s, half_width)
                    .map_err(|e| (EXIT_IO, format!("svg: {e}")))?;
            }
        }
    }
    Ok(())
}

fn cmd_simulate(
    config_path: &Path,
    out_dir: Option<&Path>,
    cadence: Option<usize>,
    quiet: bool,
) -> u8 {
    let config = match load_run_config(config_path) {
        Ok(c) => c,
        Err((code, msg)) => {
            emit_error(if code == EXIT_CONFIG { "config" } else { "io" }, msg);
            return code;
        }
    };
    let (trajectory, outputs) = match run_from_config(&config, out_dir, cadence, quiet) {
        Ok(x) => x,
        Err((code, msg)) => {
            emit_error("runtime", msg);
            return code;
        }
    };
    if let Err((code, msg)) = write_run_outputs(&trajectory, &outputs) {
        emit_error("io", msg);
        return code;
    }
    if !quiet {
        let last = trajectory.diagnostics.last().unwrap();
        eprintln!(
            "finished at t = {} with mass {} ({})",
            last.time,
            last.mass,
            trajectory.termination.label()
        );
    }
    match &trajectory.termination {
        Termination::TFinal | Termination::MassFloor => EXIT_OK,
        other => {
            emit_error("truncated", format!("run stopped early: {other:?}"));
            EXIT_RUNTIME
        }
    }
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct VarifoldReport {
    n: usize,
    particles: usize,
    mass: f64,
    support_radius: f64,
    epsilon: f64,
    maslov_indices: Vec<i64>,
    zero_maslov: bool,
    harvey_lawson_residual: f64,
    harvey_lawson_absolute: bool,
    tilt_excess_profile: Vec<TiltRow>,
    omega_residual_max: f64,
}

#[derive(Serialize)]
struct TiltRow {
    r: f64,
    mean: f64,
    max: f64,
}

fn analyze_varifold(v: &DiscreteVarifold, epsilon: Option<f64>) -> Result<VarifoldReport, String> {
    let h_max = v.h_max();
    let eps = epsilon.unwrap_or(if h_max > 0.0 { 4.0 * h_max } else { 0.1 });
    let moll = Mollifier::new(eps, v.n());
    let lift = maslov::lift_angle(v).map_err(|e| e.to_string())?;
    let mut maslov_indices = Vec::new();
    for cycle in maslov::cycle_basis(v) {
        maslov_indices.push(maslov::maslov_index(v, &cycle).map_err(|e| e.to_string())?);
    }
    let hl = maslov::harvey_lawson_residual(v, &lift, &moll).map_err(|e| e.to_string())?;
    let mut tilt_excess_profile = Vec::new();
    if h_max > 0.0 {
        for factor in [2.0, 4.0, 8.0] {
            let r = factor * h_max;
            let mut mean = 0.0;
            let mut max = 0.0_f64;
            let mut count = 0usize;
            let stride = (v.len() / 64).max(1);
            for i in (0..v.len()).step_by(stride) {
                if let Ok(t) = v.tilt_excess(i, r) {
                    mean += t;
                    max = max.max(t);
                    count += 1;
                }
            }
            if count > 0 {
                tilt_excess_profile.push(TiltRow {
                    r,
                    mean: mean / count as f64,
                    max,
                });
            }
        }
    }
    let omega_residual_max = v
        .particles()
        .iter()
        .map(|p| lagflow::geometry::omega_residual(&p.frame).unwrap_or(f64::NAN))
        .fold(0.0_f64, f64::max);
    Ok(VarifoldReport {
        n: v.n(),
        particles: v.len(),
        mass: v.total_mass(),
        support_radius: v.support_radius(),
        epsilon: eps,
        maslov_indices,
        zero_maslov: lift.is_consistent(),
        harvey_lawson_residual: hl.value,
        harvey_lawson_absolute: hl.absolute,
        tilt_excess_profile,
        omega_residual_max,
    })
}

#[derive(Serialize)]
struct TrajectoryReport {
    records: usize,
    termination: Option<String>,
    scenario: Option<String>,
    initial_mass: f64,
    final_mass: f64,
    mass_monotone: bool,
    sup_beta_initial: f64,
    sup_beta_max: f64,
    collapse_max_violation: f64,
    collapse_ok: bool,
    energy_integral: f64,
    energy_bound: f64,
    energy_ok: bool,
}

fn analyze_trajectory(file: &lfio::TrajectoryFile, n: usize) -> Result<TrajectoryReport, String> {
    let records = &file.records;
    if records.is_empty() {
        return Err("trajectory has no records".into());
    }
    let r0 = records[0].support_radius;
    let mut collapse_max_violation = f64::NEG_INFINITY;
    let mut mass_monotone = true;
    let mut sup_beta_max = 0.0_f64;
    let mut energy = 0.0;
    let mut alpha = f64::INFINITY;
    for w in 0..records.len() {
        let rec = &records[w];
        let bound = (r0 * r0 - 2.0 * n as f64 * rec.t).max(0.0).sqrt() + 0.05;
        collapse_max_violation = collapse_max_violation.max(rec.support_radius - bound);
        sup_beta_max = sup_beta_max.max(rec.sup_beta);
        alpha = alpha.min(rec.mass);
        if w > 0 {
            let dt = rec.t - records[w - 1].t;
            if rec.mass > records[w - 1].mass + 1e-2 * dt {
                mass_monotone = false;
            }
            energy += dt * rec.lambda * rec.lambda * rec.mass;
        }
    }
    let initial_mass = records[0].mass;
    let bound = 4.0 / alpha * initial_mass * initial_mass;
    Ok(TrajectoryReport {
        records: records.len(),
        termination: file.termination.clone(),
        scenario: file.scenario.clone(),
        initial_mass,
        final_mass: records.last().unwrap().mass,
        mass_monotone,
        sup_beta_initial: records[0].sup_beta,
        sup_beta_max,
        collapse_max_violation,
        collapse_ok: collapse_max_violation <= 0.0,
        energy_integral: energy,
        energy_bound: bound,
        energy_ok: energy <= bound,
    })
}

fn cmd_analyze(input: &Path, epsilon: Option<f64>, out: Option<&Path>) -> u8 {
    let report: serde_json::Value = if input.extension().map(|e| e == "jsonl").unwrap_or(false) {
        let file = match lfio::read_trajectory_jsonl(input) {
            Ok(f) => f,
            Err(e) => {
                emit_error("io", format!("{}: {e}", input.display()));
                return EXIT_IO;
            }
        };
        let n = file
            .records
            .iter()
            .find_map(|r| r.particles.as_ref().map(|v| v.n()))
            .unwrap_or(1);
        match analyze_trajectory(&file, n) {
            Ok(r) => serde_json::to_value(r).unwrap(),
            Err(e) => {
                emit_error("runtime", e);
                return EXIT_RUNTIME;
            }
        }
    } else {
        let v = match lfio::read_varifold(input) {
            Ok(v) => v,
            Err(e) => {
                emit_error("io", format!("{}: {e}", input.display()));
                return EXIT_IO;
            }
        };
        match analyze_varifold(&v, epsilon) {
            Ok(r) => serde_json::to_value(r).unwrap(),
            Err(e) => {
                emit_error("runtime", e);
                return EXIT_RUNTIME;
            }
        }
    };
    emit_report(&report, out)
}

fn emit_report(report: &serde_json::Value, out: Option<&Path>) -> u8 {
    let text = serde_json::to_string_pretty(report).unwrap();
    match out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                emit_error("io", format!("{}: {e}", path.display()));
                return EXIT_IO;
            }
            EXIT_OK
        }
        None => {
            println!("{text}");
            EXIT_OK
        }
    }
}

fn cmd_decompose(input: &Path, phase_tol: f64, epsilon: Option<f64>, out: Option<&Path>) -> u8 {
    let v = match lfio::read_varifold(input) {
        Ok(v) => v,
        Err(e) => {
            emit_error("io", format!("{}: {e}", input.display()));
            return EXIT_IO;
        }
    };
    let h_max = v.h_max();
    let eps = epsilon.unwrap_or(if h_max > 0.0 { 4.0 * h_max } else { 0.1 });
    let moll = Mollifier::new(eps, v.n());
    let mut report = match decomp::phase_decomposition(&v, &moll, phase_tol) {
        Ok(r) => r,
        Err(e) => {
            emit_error("runtime", e);
            return EXIT_RUNTIME;
        }
    };
    decomp::sort_components(&mut report);
    match out {
        Some(path) => {
            if let Err(e) = lfio::write_decomposition_report(path, &report) {
                emit_error("io", format!("{}: {e}", path.display()));
                return EXIT_IO;
            }
            EXIT_OK
        }
        None => {
            let value = serde_json::to_value(&report).unwrap();
            emit_report(&value, None)
        }
    }
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

fn apply_axis(config: &RunConfig, axis: &str, value: f64) -> Result<RunConfig, String> {
    let mut c = config.clone();
    match axis {
        "epsilon" => c.flow.epsilon = value,
        "dyadic_level" => c.flow.dyadic_level_k = value as u32,
        "resolution" => c.scenario = set_resolution(&c.scenario, value as usize)?,
        other => return Err(format!("unknown sweep axis '{other}'")),
    }
    Ok(c)
}

fn set_resolution(spec: &ScenarioSpec, m: usize) -> Result<ScenarioSpec, String> {
    let mut value = serde_json::to_value(spec).map_err(|e| e.to_string())?;
    match value.get_mut("resolution") {
        Some(r) => *r = serde_json::json!(m),
        None => return Err("scenario has no resolution field".into()),
    }
    serde_json::from_value(value).map_err(|e| e.to_string())
}

fn worker_threads(jobs: usize) -> usize {
    let cap = std::env::var("LAGFLOW_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        });
    cap.min(jobs).max(1)
}

fn cmd_sweep(config_path: &Path, axis: &str, values: &str, out: &Path, quiet: bool) -> u8 {
    let base = match load_run_config(config_path) {
        Ok(c) => c,
        Err((code, msg)) => {
            emit_error(if code == EXIT_CONFIG { "config" } else { "io" }, msg);
            return code;
        }
    };
    let parsed: Result<Vec<f64>, _> = values.split(',').map(|s| s.trim().parse::<f64>()).collect();
    let values = match parsed {
        Ok(v) if !v.is_empty() => v,
        _ => {
            emit_error("config", "values must be a comma-separated list of numbers");
            return EXIT_CONFIG;
        }
    };
    if let Err(e) = std::fs::create_dir_all(out) {
        emit_error("io", format!("{}: {e}", out.display()));
        return EXIT_IO;
    }

    let jobs: Vec<(usize, RunConfig)> = match values
        .iter()
        .enumerate()
        .map(|(i, &v)| apply_axis(&base, axis, v).map(|c| (i, c)))
        .collect::<Result<Vec<_>, _>>()
    {
        Ok(j) => j,
        Err(e) => {
            emit_error("config", e);
            return EXIT_CONFIG;
        }
    };

    let threads = worker_threads(jobs.len());
    let next = std::sync::atomic::AtomicUsize::new(0);
    let results: Vec<std::sync::Mutex<Option<Result<Trajectory, String>>>> =
        (0..jobs.len()).map(|_| std::sync::Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                if i >= jobs.len() {
                    break;
                }
                let (slot, config) = &jobs[i];
                let result = run_from_config(config, None, None, true)
                    .map(|(t, _)| t)
                    .map_err(|(_, m)| m);
                *results[*slot].lock().unwrap() = Some(result);
            });
        }
    });

    let mut trajectories = Vec::new();
    for (i, cell) in results.iter().enumerate() {
        match cell.lock().unwrap().take() {
            Some(Ok(t)) => trajectories.push(t),
            Some(Err(m)) => {
                emit_error("runtime", format!("value {}: {m}", values[i]));
                return EXIT_RUNTIME;
            }
            None => {
                emit_error("runtime", format!("value {} never ran", values[i]));
                return EXIT_RUNTIME;
            }
        }
    }

    // per-value outputs and the sweep table
    let table_path = out.join("sweep.csv");
    let mut table = String::from(
        "value,final_t,final_mass,final_sup_beta,final_lambda,final_support_radius,termination\n",
    );
    for (value, t) in values.iter().zip(&trajectories) {
        let dir = out.join(format!("{axis}_{value}"));
        let _ = std::fs::create_dir_all(&dir);
        let _ = lfio::write_trajectory_jsonl(&dir.join("trajectory.jsonl"), t, false);
        let _ = lfio::write_diagnostics_csv(&dir.join("diagnostics.csv"), &t.diagnostics);
        let last = t.diagnostics.last().unwrap();
        table.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            value,
            last.time,
            last.mass,
            last.sup_beta,
            last.h_l2_normalized,
            last.support_radius,
            t.termination.label()
        ));
    }

    // consecutive-pair differences and measured convergence orders
    let mut diffs = Vec::new();
    for w in 0..trajectories.len().saturating_sub(1) {
        diffs.push(run_difference(&trajectories[w], &trajectories[w + 1]));
    }
    table.push_str("# pair,difference,order\n");
    for w in 0..diffs.len() {
        let order = if w + 1 < diffs.len() && diffs[w + 1] > 0.0 {
            format!("{}", (diffs[w] / diffs[w + 1]).log2())
        } else {
            String::new()
        };
        table.push_str(&format!(
            "# {}->{},{},{}\n",
            values[w],
            values[w + 1],
            diffs[w],
            order
        ));
    }
    if let Err(e) = std::fs::write(&table_path, table) {
        emit_error("io", format!("{}: {e}", table_path.display()));
        return EXIT_IO;
    }
    if !quiet {
        eprintln!("sweep table written to {}", table_path.display());
    }
    EXIT_OK
}

/// Distance between two runs: sup final-particle displacement when the
/// particle systems are comparable, otherwise the final mass difference.
fn run_difference(a: &Trajectory, b: &Trajectory) -> f64 {
    let va = &a.final_state().varifold;
    let vb = &b.final_state().varifold;
    if va.len() == vb.len() && a.final_state().time == b.final_state().time {
        let mut max = 0.0_f64;
        for (p, q) in va.particles().iter().zip(vb.particles()) {
            max = max.max((&p.position - &q.position).norm());
        }
        max
    } else {
        (a.diagnostics.last().unwrap().mass - b.diagnostics.last().unwrap().mass).abs()
    }
}
