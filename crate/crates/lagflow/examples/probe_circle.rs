// Temporary: per-step inspection of the circle run.
use lagflow::flow::{flow_step, FlowConfig, FlowState, Integrator};
use lagflow::mollify::{Mollification, Mollifier};
use lagflow::scenarios::{generate, ScenarioSpec};

fn main() {
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
        snapshot_cadence: 1,
        mass_floor_fraction: 1e-3,
        sub_resolution_filter: 0.5,
    };
    let moll = Mollifier::new(config.epsilon, 1);
    let mut state = FlowState::initial(s.varifold, &moll).unwrap();
    for step in 0..308 {
        let v = &state.varifold;
        let field = Mollification::new(v, &moll);
        let mut max_speed = 0.0_f64;
        let mut argmax = 0;
        let mut rmin = f64::INFINITY;
        let mut rmax = 0.0_f64;
        for (i, p) in v.particles().iter().enumerate() {
            let g = field.angle_gradient(&state.lift.beta, &p.position).norm();
            if g > max_speed {
                max_speed = g;
                argmax = i;
            }
            let r = p.position.norm();
            rmin = rmin.min(r);
            rmax = rmax.max(r);
        }
        // lift drift vs frame angles
        let raw = lagflow::maslov::raw_angles(v).unwrap();
        let drift = state
            .lift
            .beta
            .iter()
            .zip(&raw)
            .map(|(b, r)| lagflow::geometry::wrap_angle(r - b).abs())
            .fold(0.0_f64, f64::max);
        if step % 16 == 0 || step > 290 {
            println!(
                "step {step:3}: mass {:.6} r in [{rmin:.5},{rmax:.5}] max_speed {max_speed:8.3} at {argmax:3} drift {drift:.2e}",
                v.total_mass()
            );
        }
        match flow_step(&state, &config, &moll) {
            Ok(next) => state = next,
            Err(e) => {
                println!("step {} failed: {e}", step + 1);
                // where are the neighbors of the worst particle?
                let p = state.varifold.particle(argmax);
                println!("worst particle at {:?}", p.position.as_slice());
                for d in [-2i64, -1, 0, 1, 2] {
                    let idx = (argmax as i64 + d).rem_euclid(400) as usize;
                    let q = state.varifold.particle(idx);
                    println!(
                        "  {idx}: pos ({:+.6}, {:+.6}) w {:.6} beta {:.6}",
                        q.position[0],
                        q.position[1],
                        q.weight,
                        state.lift.beta[idx]
                    );
                }
                break;
            }
        }
    }
}
