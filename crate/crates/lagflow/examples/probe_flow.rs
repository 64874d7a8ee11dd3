// Temporary flow probe used during development.
use lagflow::flow::{collapse_check, energy_bound_check, run_flow, FlowConfig, Integrator};
use lagflow::scenarios::{generate, ScenarioSpec};
use std::time::Instant;

fn main() {
    // acceptance-#1 shaped run: circle R=1, m=400, eps=0.05, dt=2^-10, rk4x4
    let s = generate(&ScenarioSpec::Circle {
        radius: 1.0,
        resolution: 400,
        spacing_modulation: 0.0,
    })
    .unwrap();
    let config = FlowConfig {
        epsilon: 0.05,
        dyadic_level_k: 10,
        ode_substeps: 4,
        t_final: 0.3,
        integrator: Integrator::Rk4,
        relift_each_step: false,
        snapshot_cadence: 64,
        mass_floor_fraction: 1e-3,
        sub_resolution_filter: 0.5,
    };
    let t0 = Instant::now();
    let traj = run_flow(s.varifold, &config, &s.id).unwrap();
    let elapsed = t0.elapsed().as_secs_f64();
    let last = traj.final_state();
    let mean_radius: f64 = last
        .varifold
        .particles()
        .iter()
        .map(|p| p.mass() * p.position.norm())
        .sum::<f64>()
        / last.varifold.total_mass();
    println!(
        "circle: {} steps in {elapsed:.2} s, t_end={}, mean radius {mean_radius:.6} (exact 0.632456), rel err {:.4}%",
        traj.diagnostics.len() - 1,
        last.time,
        (mean_radius - 0.6324555) / 0.6324555 * 100.0
    );
    let collapse = collapse_check(&traj, 0.05);
    let energy = energy_bound_check(&traj);
    println!(
        "  collapse max violation {:.5} ok={} | energy {:.3} <= {:.3} ok={}",
        collapse.max_violation, collapse.ok, energy.energy_integral, energy.bound, energy.ok
    );
    let mut mass_ok = true;
    let mut beta_ok = true;
    let dt = config.dt();
    for w in 1..traj.diagnostics.len() {
        if traj.diagnostics[w].mass > traj.diagnostics[w - 1].mass + 1e-2 * dt {
            mass_ok = false;
        }
        if traj.diagnostics[w].sup_beta > traj.diagnostics[w - 1].sup_beta + 1e-2 * dt {
            beta_ok = false;
        }
    }
    let omega_max = traj
        .diagnostics
        .iter()
        .map(|d| d.omega_residual_max)
        .fold(0.0_f64, f64::max);
    println!("  mass monotone: {mass_ok}, sup_beta controlled: {beta_ok}, omega_max {omega_max:.2e}");
    let diss0 = traj.diagnostics[0].dissipation;
    let h2 = traj.diagnostics[0].h_l2_raw.powi(2);
    println!(
        "  dissipation(0) = {diss0:.4} vs -||H||^2 = {:.4}: rel {:.4}",
        -h2,
        (diss0 + h2).abs() / h2
    );
    println!(
        "  angle residual rows 1..4: {:?}",
        &traj.diagnostics[1..5]
            .iter()
            .map(|d| d.angle_evolution_residual)
            .collect::<Vec<_>>()
    );

    // tangential figure eight at eps = 4h
    let s = generate(&ScenarioSpec::FigureEightTangential {
        lobe_radius: 0.5,
        resolution: 600,
    })
    .unwrap();
    let h = s.varifold.h_max();
    for k in [10u32, 11] {
        let config = FlowConfig {
            epsilon: 4.0 * h,
            dyadic_level_k: k,
            ode_substeps: 2,
            t_final: 0.11,
            integrator: Integrator::Rk4,
            relift_each_step: false,
            snapshot_cadence: 1024,
            mass_floor_fraction: 1e-3,
            sub_resolution_filter: 0.5,
        };
        let t0 = Instant::now();
        let traj = run_flow(s.varifold.clone(), &config, &s.id).unwrap();
        let elapsed = t0.elapsed().as_secs_f64();
        let last = traj.diagnostics.last().unwrap();
        let collapse = collapse_check(&traj, 0.05);
        let mut mass_ok = true;
        let mut beta_ok = true;
        let dt = config.dt();
        for w in 1..traj.diagnostics.len() {
            if traj.diagnostics[w].mass > traj.diagnostics[w - 1].mass + 1e-2 * dt {
                mass_ok = false;
            }
            if traj.diagnostics[w].sup_beta > traj.diagnostics[w - 1].sup_beta + 1e-2 * dt {
                beta_ok = false;
            }
        }
        println!(
            "fig8 k={k} (eps={:.4}): {:?} at t={}, mass {:.4}->{:.4}, monotone={mass_ok}, beta={beta_ok}, collapse ok={} ({:.4}), {elapsed:.1}s",
            4.0 * h,
            traj.termination,
            last.time,
            traj.diagnostics[0].mass,
            last.mass,
            collapse.ok,
            collapse.max_violation
        );
    }

    // product torus at eps = 4h, 64x64
    let s = generate(&ScenarioSpec::ProductTorus {
        r1: 1.0,
        r2: 1.0,
        resolution: 64,
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
        snapshot_cadence: 16,
        mass_floor_fraction: 1e-3,
        sub_resolution_filter: 0.5,
    };
    let t0 = Instant::now();
    let traj = run_flow(s.varifold, &config, &s.id).unwrap();
    let elapsed = t0.elapsed().as_secs_f64();
    let last = traj.diagnostics.last().unwrap();
    let collapse = collapse_check(&traj, 0.05);
    let energy = energy_bound_check(&traj);
    let omega_max = traj
        .diagnostics
        .iter()
        .map(|d| d.omega_residual_max)
        .fold(0.0_f64, f64::max);
    // exact torus: each factor radius sqrt(1-2t), mass 4 pi^2 (1-2t)
    let exact_mass = 4.0 * std::f64::consts::PI.powi(2) * (1.0 - 2.0 * last.time);
    println!(
        "torus 64x64 eps={:.4}: t={}, mass {:.3} (exact {exact_mass:.3}, rel {:.3}%), omega {omega_max:.2e}, collapse ok={} ({:.4}), energy ok={}, {elapsed:.1}s",
        4.0 * h,
        last.time,
        last.mass,
        (last.mass - exact_mass) / exact_mass * 100.0,
        collapse.ok,
        collapse.max_violation,
        energy.ok
    );
    // worst collapse rows
    let mut rows: Vec<_> = collapse.rows.iter().collect();
    rows.sort_by(|a, b| (b.support_radius - b.bound).partial_cmp(&(a.support_radius - a.bound)).unwrap());
    for r in rows.iter().take(4) {
        println!("  t={:.4} support {:.5} bound {:.5} gap {:+.5}", r.time, r.support_radius, r.bound, r.support_radius - r.bound);
    }
    let mut mass_ok = true;
    let dt = config.dt();
    for w in 1..traj.diagnostics.len() {
        if traj.diagnostics[w].mass > traj.diagnostics[w - 1].mass + 1e-2 * dt {
            mass_ok = false;
        }
    }
    println!("  torus mass monotone: {mass_ok}");
}
