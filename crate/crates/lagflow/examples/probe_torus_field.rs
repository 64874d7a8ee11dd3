// Temporary: initial torus velocity-field anatomy across the lift seam.
use lagflow::geometry::ComplexStructure;
use lagflow::mollify::{Mollification, Mollifier};
use lagflow::scenarios::{generate, ScenarioSpec};

fn main() {
    let m = 64usize;
    let s = generate(&ScenarioSpec::ProductTorus {
        r1: 1.0,
        r2: 1.0,
        resolution: m,
    })
    .unwrap();
    let v = &s.varifold;
    let h = v.h_max();
    let moll = Mollifier::new(4.0 * h, 2);
    let lift = lagflow::maslov::lift_angle(v).unwrap();
    let field = Mollification::new(v, &moll);
    let j = ComplexStructure::new(2);
    // radial velocity of factor 1 per particle; should be uniform
    let mut min_v = f64::INFINITY;
    let mut max_v = f64::NEG_INFINITY;
    let mut argmin = 0;
    let mut argmax = 0;
    let mut profile_row0 = Vec::new();
    for (idx, p) in v.particles().iter().enumerate() {
        let vel = j.apply(&field.angle_gradient(&lift.beta, &p.position));
        let r1 = (p.position[0].powi(2) + p.position[2].powi(2)).sqrt();
        let vr1 = (vel[0] * p.position[0] + vel[2] * p.position[2]) / r1;
        if vr1 < min_v {
            min_v = vr1;
            argmin = idx;
        }
        if vr1 > max_v {
            max_v = vr1;
            argmax = idx;
        }
        if idx / m == 0 {
            profile_row0.push(vr1);
        }
    }
    println!("v_r1 range [{min_v:.6}, {max_v:.6}] (expected uniform ~ -1)");
    println!("argmin grid ({},{}), argmax grid ({},{})", argmin / m, argmin % m, argmax / m, argmax % m);
    print!("row 0 profile: ");
    for (jj, val) in profile_row0.iter().enumerate() {
        if jj % 8 == 0 {
            print!("[{jj}]={val:.4} ");
        }
    }
    println!();
    // seam columns: lift jumps
    let mut max_jump = 0.0_f64;
    let mut where_jump = (0, 0);
    for i in 0..m {
        for jj in 0..m {
            let a = lift.beta[i * m + jj];
            let b = lift.beta[i * m + (jj + 1) % m];
            if (a - b).abs() > max_jump {
                max_jump = (a - b).abs();
                where_jump = (i, jj);
            }
        }
    }
    println!("max column-direction lift jump {max_jump:.3} at {where_jump:?}");

    // local lift structure + evaluation anatomy at a dip vs a clean point
    for &(gi, gj) in &[(0usize, 16usize), (0, 32), (0, 48), (28, 16)] {
        let idx = gi * m + gj;
        let p = v.particle(idx);
        let kmass = field.kernel_mass(&p.position);
        let beta_eps = field.angle_value(&lift.beta, &p.position);
        println!(
            "grid ({gi},{gj}): lift {:+.4}, beta_eps {:+.4}, kmass {:.4}",
            lift.beta[idx], beta_eps, kmass
        );
        print!("   lift row {gi}, cols {}..{}: ", gj.saturating_sub(3), gj + 3);
        for dj in -3i64..=3 {
            let jj = (gj as i64 + dj).rem_euclid(m as i64) as usize;
            print!("{:+.3} ", lift.beta[gi * m + jj]);
        }
        println!();
        print!("   lift col {gj}, rows ..: ");
        for di in -3i64..=3 {
            let ii = (gi as i64 + di).rem_euclid(m as i64) as usize;
            print!("{:+.3} ", lift.beta[ii * m + gj]);
        }
        println!();
    }
}

#[allow(dead_code)]
fn extra() {}
