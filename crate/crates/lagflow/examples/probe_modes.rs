// Temporary: measured growth rate of normal perturbation modes on the circle.
use lagflow::geometry::ComplexStructure;
use lagflow::mollify::{Mollification, Mollifier};
use lagflow::scenarios::{generate, ScenarioSpec};
use lagflow::varifold::DiscreteVarifold;

fn velocity_normal_profile(v: &DiscreteVarifold, lift: &[f64], moll: &Mollifier) -> Vec<f64> {
    let field = Mollification::new(v, moll);
    let j = ComplexStructure::new(1);
    v.particles()
        .iter()
        .map(|p| {
            let vel = j.apply(&field.angle_gradient(lift, &p.position));
            // outward normal component
            let n = &p.position / p.position.norm();
            vel.dot(&n)
        })
        .collect()
}

fn main() {
    let m = 400usize;
    let eps = 0.05;
    let delta = 1e-7;
    let base = generate(&ScenarioSpec::Circle {
        radius: 1.0,
        resolution: m,
        spacing_modulation: 0.0,
    })
    .unwrap()
    .varifold;
    let moll = Mollifier::new(eps, 1);
    let lift0 = lagflow::maslov::lift_angle(&base).unwrap();
    let v0 = velocity_normal_profile(&base, &lift0.beta, &moll);

    println!("mode-k normal response lambda_k (positions perturbed, angle data options):");
    for &k in &[40usize, 80, 100, 120, 139, 160, 180, 200] {
        // perturbed positions
        let mut pert = base.clone();
        for (i, p) in pert.particles_mut().iter_mut().enumerate() {
            let theta = 2.0 * std::f64::consts::PI * i as f64 / m as f64;
            let r = 1.0 + delta * (k as f64 * theta).cos();
            p.position[0] = r * theta.cos();
            p.position[1] = r * theta.sin();
        }
        pert.refresh_h_max();

        // (a) smooth material data: beta of the UNperturbed circle
        let va = velocity_normal_profile(&pert, &lift0.beta, &moll);
        // (b) frame-derived data of the perturbed curve
        let liftb = lagflow::maslov::lift_angle(&pert).unwrap();
        let vb = velocity_normal_profile(&pert, &liftb.beta, &moll);

        // project (v - v0)/delta onto cos(k theta)
        let mut proj_a = 0.0;
        let mut proj_b = 0.0;
        for i in 0..m {
            let theta = 2.0 * std::f64::consts::PI * i as f64 / m as f64;
            let c = (k as f64 * theta).cos();
            proj_a += (va[i] - v0[i]) / delta * c;
            proj_b += (vb[i] - v0[i]) / delta * c;
        }
        proj_a *= 2.0 / m as f64;
        proj_b *= 2.0 / m as f64;
        println!("  k={k:3}: lambda(smooth data) = {proj_a:10.2}   lambda(frame data) = {proj_b:10.2}");
    }
}
