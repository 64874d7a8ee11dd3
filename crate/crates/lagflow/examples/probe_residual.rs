// Temporary: angle-evolution residual anatomy on circle and ellipse-like data.
use lagflow::flow::{flow_step, FlowConfig, FlowState, Integrator};
use lagflow::mollify::{Mollification, Mollifier};
use lagflow::scenarios::{generate, ScenarioSpec};

fn main() {
    for &(m, eps) in &[(400usize, 0.1_f64), (400, 0.05), (128, 0.3)] {
        println!("circle m={m} eps={eps}:");
        for k in [6u32, 7, 8, 9, 10] {
            let s = generate(&ScenarioSpec::Circle { radius: 1.0, resolution: m }).unwrap();
            let moll = Mollifier::new(eps, 1);
            let cfg = FlowConfig {
                epsilon: eps,
                dyadic_level_k: k,
                ode_substeps: 2,
                t_final: 1.0,
                integrator: Integrator::Rk4,
                relift_each_step: false,
                snapshot_cadence: 8,
                mass_floor_fraction: 1e-3,
                sub_resolution_filter: 0.5,
            };
            let state = FlowState::initial(s.varifold, &moll).unwrap();
            let next = flow_step(&state, &cfg, &moll).unwrap();
            // decompose the residual by hand
            let field = Mollification::new(&state.varifold, &moll);
            let dt = cfg.dt();
            let mut num2 = 0.0;
            let mut den2 = 0.0;
            for (i, p) in state.varifold.particles().iter().enumerate() {
                let jet = field.angle_jet(&state.lift.beta, &p.position);
                let div = p.frame.trace_restricted(&jet.hessian);
                let rate = (next.lift.beta[i] - state.lift.beta[i]) / dt;
                num2 += p.mass() * (rate - div).powi(2);
                den2 += p.mass() * div * div;
            }
            println!(
                "  k={k}: residual {:.4e}  ||num|| {:.4e}  ||div|| {:.4e}",
                next.diagnostics.angle_evolution_residual,
                num2.sqrt(),
                den2.sqrt()
            );
        }
    }
}
