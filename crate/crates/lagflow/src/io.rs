//! File formats: varifold JSON, trajectory JSONL, diagnostics CSV, SVG
//! snapshots for curves, and the analysis / decomposition reports.
//!
//! All numeric output uses Rust's shortest-round-trip float formatting, so
//! identical runs produce byte-identical files.

use crate::decomp::DecompositionReport;
use crate::flow::{DiagnosticsRow, FlowState, Trajectory};
use crate::varifold::DiscreteVarifold;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};
use std::path::Path;

pub type IoResult<T> = Result<T, std::io::Error>;

fn to_io<E: std::fmt::Display>(e: E) -> std::io::Error {
    std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string())
}

// ---------------------------------------------------------------------------
// varifold JSON
// ---------------------------------------------------------------------------

pub fn write_varifold(path: &Path, v: &DiscreteVarifold) -> IoResult<()> {
    let json = serde_json::to_string(v).map_err(to_io)?;
    std::fs::write(path, json)
}

pub fn read_varifold(path: &Path) -> IoResult<DiscreteVarifold> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(to_io)
}

// ---------------------------------------------------------------------------
// trajectory JSONL
// ---------------------------------------------------------------------------

/// One trajectory snapshot line. `particles` is included only at snapshot
/// cadence when requested.
#[derive(Debug, Serialize, Deserialize)]
pub struct SnapshotRecord {
    pub t: f64,
    pub mass: f64,
    pub sup_beta: f64,
    pub lambda: f64,
    pub support_radius: f64,
    pub dissipation: f64,
    pub residuals: ResidualRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub particles: Option<DiscreteVarifold>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ResidualRecord {
    pub angle_evolution: f64,
    pub omega_max: f64,
}

impl SnapshotRecord {
    pub fn from_row(row: &DiagnosticsRow, particles: Option<&FlowState>) -> Self {
        SnapshotRecord {
            t: row.time,
            mass: row.mass,
            sup_beta: row.sup_beta,
            lambda: row.h_l2_normalized,
            support_radius: row.support_radius,
            dissipation: row.dissipation,
            residuals: ResidualRecord {
                angle_evolution: row.angle_evolution_residual,
                omega_max: row.omega_residual_max,
            },
            particles: particles.map(|s| s.varifold.clone()),
        }
    }
}

/// Write one snapshot record per line; snapshots that carry full particle
/// data are the ones retained at the configured cadence.
pub fn write_trajectory_jsonl(
    path: &Path,
    trajectory: &Trajectory,
    include_particles: bool,
) -> IoResult<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    let mut snapshot_iter = trajectory.snapshots.iter().peekable();
    for row in &trajectory.diagnostics {
        let snapshot = match snapshot_iter.peek() {
            Some(s) if s.time == row.time => snapshot_iter.next(),
            _ => None,
        };
        let record =
            SnapshotRecord::from_row(row, snapshot.filter(|_| include_particles));
        serde_json::to_writer(&mut file, &record).map_err(to_io)?;
        file.write_all(b"\n")?;
    }
    // footer line with run metadata
    let footer = serde_json::json!({
        "termination": trajectory.termination,
        "scenario": trajectory.scenario_id,
        "zero_maslov_verified": trajectory.zero_maslov_verified,
    });
    serde_json::to_writer(&mut file, &footer).map_err(to_io)?;
    file.write_all(b"\n")?;
    Ok(())
}

/// Parsed-back trajectory data: the per-line records and the footer.
pub struct TrajectoryFile {
    pub records: Vec<SnapshotRecord>,
    pub termination: Option<String>,
    pub scenario: Option<String>,
}

pub fn read_trajectory_jsonl(path: &Path) -> IoResult<TrajectoryFile> {
    let file = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut records = Vec::new();
    let mut termination = None;
    let mut scenario = None;
    for line in file.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if let Ok(rec) = serde_json::from_str::<SnapshotRecord>(&line) {
            records.push(rec);
        } else {
            let footer: serde_json::Value = serde_json::from_str(&line).map_err(to_io)?;
            termination = footer
                .get("termination")
                .and_then(|t| t.get("reason"))
                .and_then(|r| r.as_str())
                .map(String::from);
            scenario = footer
                .get("scenario")
                .and_then(|s| s.as_str())
                .map(String::from);
        }
    }
    Ok(TrajectoryFile {
        records,
        termination,
        scenario,
    })
}

// ---------------------------------------------------------------------------
// diagnostics CSV
// ---------------------------------------------------------------------------

pub const DIAGNOSTICS_HEADER: &str = "t,mass,sup_beta,h_l2_normalized,h_l2_raw,support_radius,dissipation,angle_evolution_residual,energy_integral,omega_residual_max";

pub fn write_diagnostics_csv(path: &Path, rows: &[DiagnosticsRow]) -> IoResult<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(file, "{DIAGNOSTICS_HEADER}")?;
    for d in rows {
        writeln!(
            file,
            "{},{},{},{},{},{},{},{},{},{}",
            d.time,
            d.mass,
            d.sup_beta,
            d.h_l2_normalized,
            d.h_l2_raw,
            d.support_radius,
            d.dissipation,
            d.angle_evolution_residual,
            d.energy_integral,
            d.omega_residual_max
        )?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// SVG snapshots (n = 1)
// ---------------------------------------------------------------------------

/// Plot a curve snapshot into a fixed square viewport. The viewport
/// half-width is fixed per run (from the initial support radius) so frames
/// are comparable across time.
pub fn render_svg(v: &DiscreteVarifold, half_width: f64) -> String {
    let size = 640.0;
    let map = |x: f64, y: f64| {
        let px = (x / half_width * 0.5 + 0.5) * size;
        let py = (0.5 - y / half_width * 0.5) * size;
        (px, py)
    };
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    for (a, b) in v.edges() {
        let pa = &v.particle(a).position;
        let pb = &v.particle(b).position;
        let (x1, y1) = map(pa[0], pa[1]);
        let (x2, y2) = map(pb[0], pb[1]);
        svg.push_str(&format!(
            "<line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" stroke=\"#1f5fa5\" stroke-width=\"1.5\"/>\n"
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn write_svg_snapshot(
    dir: &Path,
    index: usize,
    state: &FlowState,
    half_width: f64,
) -> IoResult<()> {
    let svg = render_svg(&state.varifold, half_width);
    let path = dir.join(format!("snapshot_{index:05}.svg"));
    std::fs::write(path, svg)
}

// ---------------------------------------------------------------------------
// reports
// ---------------------------------------------------------------------------

pub fn write_decomposition_report(path: &Path, report: &DecompositionReport) -> IoResult<()> {
    #[derive(Serialize)]
    struct ComponentOut<'a> {
        phase: f64,
        mass: f64,
        count: usize,
        density_stat: f64,
        orientation_coherence: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        particle_indices: Option<&'a [usize]>,
    }
    #[derive(Serialize)]
    struct ReportOut<'a> {
        components: Vec<ComponentOut<'a>>,
        residual_mass: f64,
        separated: bool,
    }
    let out = ReportOut {
        components: report
            .components
            .iter()
            .map(|c| ComponentOut {
                phase: c.phase,
                mass: c.mass,
                count: c.particle_indices.len(),
                density_stat: c.density_stat,
                orientation_coherence: c.orientation_coherence,
                particle_indices: Some(&c.particle_indices),
            })
            .collect(),
        residual_mass: report.residual_mass,
        separated: report.separated,
    };
    let json = serde_json::to_string_pretty(&out).map_err(to_io)?;
    std::fs::write(path, json)
}

pub fn write_json_report<T: Serialize>(path: &Path, report: &T) -> IoResult<()> {
    let json = serde_json::to_string_pretty(report).map_err(to_io)?;
    std::fs::write(path, json)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{run_flow, FlowConfig, Integrator};
    use crate::scenarios::{generate, ScenarioSpec};

    fn tiny_run() -> Trajectory {
        let s = generate(&ScenarioSpec::Circle {
            radius: 1.0,
            resolution: 64,
            spacing_modulation: 0.0,
        })
        .unwrap();
        let config = FlowConfig {
            epsilon: 0.2,
            dyadic_level_k: 7,
            ode_substeps: 1,
            t_final: 0.05,
            integrator: Integrator::Rk4,
            relift_each_step: false,
            snapshot_cadence: 2,
            mass_floor_fraction: 1e-3,
            sub_resolution_filter: 0.5,
        };
        run_flow(s.varifold, &config, &s.id).unwrap()
    }

    #[test]
    fn trajectory_round_trips_through_jsonl() {
        let dir = std::env::temp_dir().join("lagflow_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("traj.jsonl");
        let traj = tiny_run();
        write_trajectory_jsonl(&path, &traj, true).unwrap();
        let back = read_trajectory_jsonl(&path).unwrap();
        assert_eq!(back.records.len(), traj.diagnostics.len());
        assert_eq!(back.termination.as_deref(), Some("t_final"));
        // bitwise equality of serialized floats
        assert_eq!(back.records[0].mass.to_bits(), traj.diagnostics[0].mass.to_bits());
        let with_particles = back.records.iter().filter(|r| r.particles.is_some()).count();
        assert_eq!(with_particles, traj.snapshots.len());
    }

    #[test]
    fn diagnostics_csv_has_header_and_rows() {
        let dir = std::env::temp_dir().join("lagflow_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("diag.csv");
        let traj = tiny_run();
        write_diagnostics_csv(&path, &traj.diagnostics).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), DIAGNOSTICS_HEADER);
        assert_eq!(lines.count(), traj.diagnostics.len());
    }

    #[test]
    fn svg_snapshot_is_wellformed() {
        let traj = tiny_run();
        let svg = render_svg(&traj.snapshots[0].varifold, 1.1);
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        assert!(svg.matches("<line").count() >= 64);
    }

    #[test]
    fn identical_runs_produce_byte_identical_output() {
        let t1 = tiny_run();
        let t2 = tiny_run();
        let dir = std::env::temp_dir().join("lagflow_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let p1 = dir.join("a.jsonl");
        let p2 = dir.join("b.jsonl");
        write_trajectory_jsonl(&p1, &t1, true).unwrap();
        write_trajectory_jsonl(&p2, &t2, true).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    }
}
