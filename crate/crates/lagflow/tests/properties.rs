//! Property suites for the geometric invariants: random lagrangian frames
//! via unitary matrices, random fields and weights.

use lagflow::geometry::{
    beta_first_variation, lagrangian_angle, omega_residual, wrap_angle, ComplexStructure,
    LagrangianFrame, VectorFieldSample,
};
use lagflow::mollify::{Mollification, Mollifier};
use lagflow::scenarios::{generate, ScenarioSpec};
use lagflow::varifold::DiscreteVarifold;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use std::f64::consts::PI;

/// A random lagrangian frame in C^n from a product of complex Givens-style
/// rotations applied to the standard real frame.
fn random_lagrangian_frame(n: usize, params: &[f64]) -> LagrangianFrame {
    // start from the real plane R^n in C^n
    let mut frame = DMatrix::<f64>::zeros(2 * n, n);
    for k in 0..n {
        frame[(k, k)] = 1.0;
    }
    let j = ComplexStructure::new(n);
    let mut p = 0usize;
    // per-column phase rotations e^{i phi}: x -> cos(phi) x + sin(phi) Jx
    for k in 0..n {
        let phi = params.get(p).copied().unwrap_or(0.3);
        p += 1;
        let col = frame.column(k).clone_owned();
        let jcol = j.apply(&col);
        frame.set_column(k, &(col * phi.cos() + jcol * phi.sin()));
    }
    // real rotations mixing columns keep the plane lagrangian
    for a in 0..n {
        for b in (a + 1)..n {
            let t = params.get(p).copied().unwrap_or(0.7);
            p += 1;
            let ca = frame.column(a).clone_owned();
            let cb = frame.column(b).clone_owned();
            frame.set_column(a, &(&ca * t.cos() + &cb * t.sin()));
            frame.set_column(b, &(&cb * t.cos() - &ca * t.sin()));
        }
    }
    LagrangianFrame::from_matrix(frame).expect("rotation of a lagrangian frame")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_lagrangian_frames_have_zero_omega_residual(
        params in prop::collection::vec(-3.0..3.0f64, 6)
    ) {
        for n in 1..=2usize {
            let f = random_lagrangian_frame(n, &params);
            prop_assert!(omega_residual(&f).unwrap() < 1e-10);
            prop_assert!(lagrangian_angle(&f).is_ok());
        }
    }

    #[test]
    fn angle_parity_under_column_permutation(
        params in prop::collection::vec(-3.0..3.0f64, 6)
    ) {
        let f = random_lagrangian_frame(2, &params);
        let beta = lagrangian_angle(&f).unwrap();
        let swapped = LagrangianFrame::new(vec![
            f.column(1).clone_owned(),
            f.column(0).clone_owned(),
        ])
        .unwrap();
        let beta_swapped = lagrangian_angle(&swapped).unwrap();
        // odd permutation shifts the oriented angle by pi
        prop_assert!((wrap_angle(beta_swapped - beta).abs() - PI).abs() < 1e-9);
    }

    #[test]
    fn beta_first_variation_is_linear(
        params in prop::collection::vec(-3.0..3.0f64, 6),
        entries_a in prop::collection::vec(-2.0..2.0f64, 16),
        entries_b in prop::collection::vec(-2.0..2.0f64, 16),
        c1 in -3.0..3.0f64,
        c2 in -3.0..3.0f64,
    ) {
        let f = random_lagrangian_frame(2, &params);
        let ja = DMatrix::from_column_slice(4, 4, &entries_a);
        let jb = DMatrix::from_column_slice(4, 4, &entries_b);
        let sample = |jac: DMatrix<f64>| VectorFieldSample {
            value: DVector::zeros(4),
            jacobian: jac,
        };
        let lhs = beta_first_variation(&f, &sample(&ja * c1 + &jb * c2));
        let rhs = c1 * beta_first_variation(&f, &sample(ja.clone()))
            + c2 * beta_first_variation(&f, &sample(jb.clone()));
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs().max(rhs.abs())));
    }

    #[test]
    fn mollified_sup_bound_is_exact(
        values in prop::collection::vec(-10.0..10.0f64, 48),
        eps in 0.05..0.8f64,
    ) {
        let v = generate(&ScenarioSpec::Circle {
            radius: 1.0,
            resolution: 48,
            spacing_modulation: 0.0,
        })
        .unwrap()
        .varifold;
        let moll = Mollifier::new(eps, 1);
        let field = Mollification::new(&v, &moll);
        let sup = values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for idx in [0usize, 11, 23, 40] {
            let val = field.scalar(&values, &v.particle(idx).position);
            prop_assert!(val.abs() <= sup + 1e-12);
        }
    }

    #[test]
    fn varifold_json_round_trip_is_lossless(
        seed_weights in prop::collection::vec(0.1..5.0f64, 24),
        mults in prop::collection::vec(1u32..4, 24),
    ) {
        let mut v = generate(&ScenarioSpec::Circle {
            radius: 1.0,
            resolution: 24,
            spacing_modulation: 0.0,
        })
        .unwrap()
        .varifold;
        for (p, (w, m)) in v.particles_mut().iter_mut().zip(seed_weights.iter().zip(&mults)) {
            p.weight = *w;
            p.multiplicity = *m;
        }
        let json = serde_json::to_string(&v).unwrap();
        let back: DiscreteVarifold = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(serde_json::to_string(&back).unwrap(), json);
        for (p, q) in v.particles().iter().zip(back.particles()) {
            prop_assert_eq!(p.weight.to_bits(), q.weight.to_bits());
            prop_assert_eq!(p.position[0].to_bits(), q.position[0].to_bits());
        }
    }

    #[test]
    fn total_mass_is_reordering_invariant_and_additive(
        weights in prop::collection::vec(0.1..3.0f64, 20),
    ) {
        let mut v = generate(&ScenarioSpec::Circle {
            radius: 1.0,
            resolution: 20,
            spacing_modulation: 0.0,
        })
        .unwrap()
        .varifold;
        for (p, w) in v.particles_mut().iter_mut().zip(&weights) {
            p.weight = *w;
        }
        let mass = v.total_mass();
        let mut reversed: Vec<_> = v.particles().to_vec();
        reversed.reverse();
        let w = DiscreteVarifold::new(1, reversed, &[]).unwrap();
        prop_assert!((w.total_mass() - mass).abs() <= 1e-12 * mass);
    }
}
