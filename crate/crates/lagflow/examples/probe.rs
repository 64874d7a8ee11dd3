// Temporary numeric probe used during development.
use lagflow::maslov;
use lagflow::mollify::{Mollification, Mollifier};
use lagflow::scenarios::{generate, ScenarioSpec};
use lagflow::varifold::{mean_curvature_estimate, CurvatureMethod};
use nalgebra::DVector;

fn main() {
    // 1. tangential angle gradient accuracy on the circle across eps/h
    for &(m, eps) in &[
        (400usize, 0.05_f64),
        (400, 0.0628),
        (400, 0.1),
        (800, 0.05),
        (1600, 0.05),
        (1600, 0.0157),
    ] {
        let s = generate(&ScenarioSpec::Circle {
            radius: 1.0,
            resolution: m,
            spacing_modulation: 0.0,
        })
        .unwrap();
        let v = &s.varifold;
        let lift = maslov::lift_angle(v).unwrap();
        let moll = Mollifier::new(eps, 1);
        let field = Mollification::new(v, &moll);
        let mut max_dev = 0.0_f64;
        let mut sum_dev = 0.0;
        let mut max_idx = 0;
        for (i, p) in v.particles().iter().enumerate() {
            let jet = field.angle_jet(&lift.beta, &p.position);
            let t = p.frame.project(&jet.gradient);
            let dev = t.norm() - 1.0;
            if dev.abs() > max_dev {
                max_dev = dev.abs();
                max_idx = i;
            }
            sum_dev += dev;
        }
        println!(
            "m={m:5} eps={eps:.4} eps/h={:.2}: max|dev|={max_dev:.5} at {max_idx}, mean dev={:.6}",
            eps / v.h_max(),
            sum_dev / m as f64
        );
    }

    // 2. error-term decay on the circle
    let s = generate(&ScenarioSpec::Circle {
        radius: 1.0,
        resolution: 1600,
        spacing_modulation: 0.0,
    })
    .unwrap();
    let v = &s.varifold;
    let lift = maslov::lift_angle(v).unwrap();
    let h = mean_curvature_estimate(v, CurvatureMethod::Frenet).unwrap();
    let j = lagflow::geometry::ComplexStructure::new(1);
    let b: Vec<DVector<f64>> = h
        .iter()
        .zip(&lift.beta)
        .map(|(hv, &beta)| -j.apply(hv) + hv * beta)
        .collect();
    for &eps in &[0.2, 0.1, 0.05, 0.025] {
        let moll = Mollifier::new(eps, 1);
        let field = Mollification::new(v, &moll);
        let mut e2 = 0.0;
        let mut bound_violations = 0;
        for p in v.particles() {
            let d = field.error_decomposition(&lift.beta, &b, &h, &p.position, &p.frame);
            e2 += p.mass() * d.error.norm_squared();
            if d.error.norm() > d.apriori_bound + 1e-12 {
                bound_violations += 1;
            }
        }
        println!("eps={eps:.3}: int|E|^2 = {e2:.6e}  bound violations: {bound_violations}");
    }

    // 3. HL residual under refinement on the ellipse
    for &m in &[400usize, 800, 1600] {
        let v = generate(&ScenarioSpec::Ellipse {
            a: 2.0,
            b: 1.0,
            resolution: m,
        })
        .unwrap()
        .varifold;
        let lift = maslov::lift_angle(&v).unwrap();
        let moll = Mollifier::new(4.0 * v.h_max(), 1);
        let r = maslov::harvey_lawson_residual(&v, &lift, &moll).unwrap();
        println!("ellipse m={m}: HL residual = {:.5} (h_max {:.5})", r.value, v.h_max());
    }
}
