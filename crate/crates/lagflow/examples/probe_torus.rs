// Temporary: torus deformation anatomy.
use lagflow::flow::{run_flow, FlowConfig, Integrator};
use lagflow::scenarios::{generate, ScenarioSpec};
use std::time::Instant;

fn main() {
    let m = 64usize;
    let s = generate(&ScenarioSpec::ProductTorus {
        r1: 1.0,
        r2: 1.0,
        resolution: m,
    })
    .unwrap();
    let h = s.varifold.h_max();
    let config = FlowConfig {
        epsilon: 4.0 * h,
        dyadic_level_k: 7,
        ode_substeps: 1,
        t_final: 0.3,
        integrator: Integrator::Rk4,
        relift_each_step: false,
        snapshot_cadence: 8,
        mass_floor_fraction: 1e-3,
        sub_resolution_filter: 0.5,
    };
    let t0 = Instant::now();
    let traj = run_flow(s.varifold.clone(), &config, &s.id).unwrap();
    println!("ran in {:.1}s, {:?}", t0.elapsed().as_secs_f64(), traj.termination);
    for snap in traj.snapshots.iter().step_by(2) {
        let v = &snap.varifold;
        let mut r1min = f64::INFINITY;
        let mut r1max = 0.0_f64;
        let mut r2min = f64::INFINITY;
        let mut r2max = 0.0_f64;
        let mut w_min = f64::INFINITY;
        let mut w_max = 0.0_f64;
        for p in v.particles() {
            let r1 = (p.position[0].powi(2) + p.position[2].powi(2)).sqrt();
            let r2 = (p.position[1].powi(2) + p.position[3].powi(2)).sqrt();
            r1min = r1min.min(r1);
            r1max = r1max.max(r1);
            r2min = r2min.min(r2);
            r2max = r2max.max(r2);
            w_min = w_min.min(p.weight);
            w_max = w_max.max(p.weight);
        }
        let exact = (1.0 - 2.0 * snap.time).max(0.0).sqrt();
        println!(
            "t={:.4}: r1 [{:.4},{:.4}] r2 [{:.4},{:.4}] exact {:.4} w [{:.2e},{:.2e}] sup_beta {:.4}",
            snap.time, r1min, r1max, r2min, r2max, exact, w_min, w_max, snap.diagnostics.sup_beta
        );
    }
    // where is the r1 max? correlate with grid position of worst particle
    let last = traj.final_state();
    let mut worst = (0usize, 0.0_f64);
    for (i, p) in last.varifold.particles().iter().enumerate() {
        let r1 = (p.position[0].powi(2) + p.position[2].powi(2)).sqrt();
        if r1 > worst.1 {
            worst = (i, r1);
        }
    }
    println!(
        "worst r1 particle {} (grid {},{}), lift {:.4}",
        worst.0,
        worst.0 / m,
        worst.0 % m,
        last.lift.beta[worst.0]
    );
    // lift range
    let bmin = last.lift.beta.iter().cloned().fold(f64::INFINITY, f64::min);
    let bmax = last.lift.beta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    println!("lift range [{bmin:.3}, {bmax:.3}]");
}
