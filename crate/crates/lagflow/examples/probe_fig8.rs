// Temporary: parameter search for a stable tangential figure-eight run.
use lagflow::flow::{collapse_check, run_flow, FlowConfig, Integrator};
use lagflow::scenarios::{generate, ScenarioSpec};
use std::time::Instant;

fn main() {
    for &(r, m, eps, k, tf) in &[
        (1.0_f64, 600usize, 0.08_f64, 10u32, 0.25_f64),
        (1.0, 600, 0.12, 10, 0.25),
        (1.0, 600, 0.12, 9, 0.25),
        (1.0, 400, 0.15, 9, 0.25),
    ] {
        let s = generate(&ScenarioSpec::FigureEightTangential {
            lobe_radius: r,
            resolution: m,
        })
        .unwrap();
        let config = FlowConfig {
            epsilon: eps,
            dyadic_level_k: k,
            ode_substeps: 2,
            t_final: tf,
            integrator: Integrator::Rk4,
            relift_each_step: false,
            snapshot_cadence: 64,
            mass_floor_fraction: 1e-3,
            sub_resolution_filter: 0.5,
        };
        let t0 = Instant::now();
        let traj = run_flow(s.varifold.clone(), &config, &s.id).unwrap();
        let el = t0.elapsed().as_secs_f64();
        let last = traj.diagnostics.last().unwrap();
        let collapse = collapse_check(&traj, 0.05);
        let dt = config.dt();
        let mut mass_ok = true;
        let mut beta_ok = true;
        for w in 1..traj.diagnostics.len() {
            if traj.diagnostics[w].mass > traj.diagnostics[w - 1].mass + 1e-2 * dt {
                mass_ok = false;
            }
            if traj.diagnostics[w].sup_beta > traj.diagnostics[w - 1].sup_beta + 1e-2 * dt {
                beta_ok = false;
            }
        }
        println!(
            "r={r} m={m} eps={eps} k={k}: {:?} t={:.4} mass {:.4}->{:.4} monotone={mass_ok} beta={beta_ok} collapse={} ({:+.4}) {el:.1}s",
            traj.termination,
            last.time,
            traj.diagnostics[0].mass,
            last.mass,
            collapse.ok,
            collapse.max_violation
        );
    }
}
