//! Scalar lifts of the S^1 lagrangian angle over meshed varifolds, winding
//! numbers of mesh loops, and the quantitative defect of the pointwise
//! identity between the angle gradient and the mean curvature.

use crate::geometry::{lagrangian_angle, wrap_angle, ComplexStructure, GeometryError};
use crate::mollify::{Mollification, Mollifier};
use crate::varifold::{mean_curvature_estimate, CurvatureMethod, DiscreteVarifold, VarifoldError};
use std::collections::VecDeque;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MaslovError {
    #[error("cannot unwrap the angle across edge ({0}, {1}): raw jump {2:.4} rad >= pi/2")]
    UnwrapAmbiguous(usize, usize, f64),
    #[error("loop winding is not near an integer: residual {0:.4}")]
    NonIntegerWinding(f64),
    #[error("path is too short")]
    EmptyPath,
    #[error("particle {index}: {source}")]
    Frame {
        index: usize,
        source: GeometryError,
    },
    #[error(transparent)]
    Varifold(#[from] VarifoldError),
}

/// A mesh cycle whose accumulated angle winding is nonzero, so the lift
/// cannot be globally single valued.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleDefect {
    pub edge: (usize, usize),
    pub winding: i64,
}

/// A scalar lift of the S^1 angle over one varifold.
#[derive(Debug, Clone)]
pub struct AngleLift {
    /// Lift value per particle.
    pub beta: Vec<f64>,
    /// Base particle of the first mesh component.
    pub base_index: usize,
    /// Number of tree edges where the unwrap crossed a 2 pi branch.
    pub branch_jumps: usize,
    /// Non-tree mesh edges whose cycle carries nonzero winding; empty
    /// exactly when the lift is globally consistent (zero Maslov on the
    /// mesh's cycle basis).
    pub cycle_defects: Vec<CycleDefect>,
    /// Mesh component id per particle.
    pub components: Vec<usize>,
}

impl AngleLift {
    /// True when every independent mesh cycle has zero winding.
    pub fn is_consistent(&self) -> bool {
        self.cycle_defects.is_empty()
    }

    pub fn sup_beta(&self) -> f64 {
        self.beta.iter().fold(0.0_f64, |m, b| m.max(b.abs()))
    }
}

/// Raw oriented angles per particle, in [0, 2 pi).
pub fn raw_angles(v: &DiscreteVarifold) -> Result<Vec<f64>, MaslovError> {
    v.particles()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            lagrangian_angle(&p.frame).map_err(|source| MaslovError::Frame { index: i, source })
        })
        .collect()
}

/// Breadth-first unwrap of the raw angles into a scalar lift.
///
/// Each mesh component is unwrapped from its lowest-index particle, whose
/// lift value is the principal representative of its raw angle. An edge
/// whose raw angle jump reaches pi/2 aborts with `UnwrapAmbiguous`; cycles
/// with nonzero winding are recorded on the lift, not fatal.
pub fn lift_angle(v: &DiscreteVarifold) -> Result<AngleLift, MaslovError> {
    let raw = raw_angles(v)?;
    let m = v.len();
    let mut beta = vec![f64::NAN; m];
    let mut visited = vec![false; m];
    let mut components = vec![0usize; m];
    let mut branch_jumps = 0usize;
    let mut cycle_defects = Vec::new();
    let mut base_index = 0usize;
    let mut component_id = 0usize;
    let mut first_component = true;

    for start in 0..m {
        if visited[start] {
            continue;
        }
        if first_component {
            base_index = start;
            first_component = false;
        }
        visited[start] = true;
        components[start] = component_id;
        beta[start] = wrap_angle(raw[start]);
        let mut queue = VecDeque::new();
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            for &j in &v.adjacency()[i] {
                let delta = wrap_angle(raw[j] - raw[i]);
                if delta.abs() >= PI / 2.0 {
                    return Err(MaslovError::UnwrapAmbiguous(i, j, delta.abs()));
                }
                if !visited[j] {
                    visited[j] = true;
                    components[j] = component_id;
                    beta[j] = beta[i] + delta;
                    // count 2 pi branch changes along tree edges
                    let ki = ((beta[i] - wrap_angle(raw[i])) / (2.0 * PI)).round() as i64;
                    let kj = ((beta[j] - wrap_angle(raw[j])) / (2.0 * PI)).round() as i64;
                    if ki != kj {
                        branch_jumps += 1;
                    }
                    queue.push_back(j);
                } else if i < j {
                    let defect = beta[j] - beta[i] - delta;
                    let winding = (defect / (2.0 * PI)).round() as i64;
                    if winding != 0 {
                        cycle_defects.push(CycleDefect {
                            edge: (i, j),
                            winding,
                        });
                    }
                }
            }
        }
        component_id += 1;
    }
    Ok(AngleLift {
        beta,
        base_index,
        branch_jumps,
        cycle_defects,
        components,
    })
}

/// Winding number `(1/2 pi) sum of principal angle differences` around a
/// closed index loop.
pub fn maslov_index(v: &DiscreteVarifold, loop_indices: &[usize]) -> Result<i64, MaslovError> {
    if loop_indices.len() < 2 {
        return Err(MaslovError::EmptyPath);
    }
    let raw = raw_angles(v)?;
    let mut total = 0.0;
    for w in 0..loop_indices.len() {
        let i = loop_indices[w];
        let j = loop_indices[(w + 1) % loop_indices.len()];
        total += wrap_angle(raw[j] - raw[i]);
    }
    let winding = total / (2.0 * PI);
    let nearest = winding.round();
    let residual = (winding - nearest).abs();
    if residual >= 0.05 {
        return Err(MaslovError::NonIntegerWinding(residual));
    }
    Ok(nearest as i64)
}

/// Total angle change along an open index path (sum of principal
/// differences; not required to be a multiple of 2 pi).
pub fn angle_change_along_path(
    v: &DiscreteVarifold,
    path: &[usize],
) -> Result<f64, MaslovError> {
    if path.len() < 2 {
        return Err(MaslovError::EmptyPath);
    }
    let raw = raw_angles(v)?;
    let mut total = 0.0;
    for w in 0..path.len() - 1 {
        total += wrap_angle(raw[path[w + 1]] - raw[path[w]]);
    }
    Ok(total)
}

/// Fundamental cycles of the mesh (one per non-tree edge of a BFS forest),
/// as closed index loops. Used to verify zero winding on a cycle basis.
pub fn cycle_basis(v: &DiscreteVarifold) -> Vec<Vec<usize>> {
    let m = v.len();
    let mut parent = vec![usize::MAX; m];
    let mut depth = vec![0usize; m];
    let mut visited = vec![false; m];
    let mut cycles = Vec::new();
    for start in 0..m {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        let mut queue = VecDeque::new();
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            for &j in &v.adjacency()[i] {
                if !visited[j] {
                    visited[j] = true;
                    parent[j] = i;
                    depth[j] = depth[i] + 1;
                    queue.push_back(j);
                } else if i < j && parent[i] != j && parent[j] != i {
                    // walk both endpoints up to their common ancestor
                    let mut left = vec![i];
                    let mut right = vec![j];
                    let (mut a, mut b) = (i, j);
                    while depth[a] > depth[b] {
                        a = parent[a];
                        left.push(a);
                    }
                    while depth[b] > depth[a] {
                        b = parent[b];
                        right.push(b);
                    }
                    while a != b {
                        a = parent[a];
                        b = parent[b];
                        left.push(a);
                        right.push(b);
                    }
                    right.pop();
                    right.reverse();
                    left.extend(right);
                    cycles.push(left);
                }
            }
        }
    }
    cycles
}

/// The normalized defect of `grad beta = -J H`.
#[derive(Debug, Clone, Copy)]
pub struct HlResidual {
    pub value: f64,
    /// True when the curvature norm vanished and the value is the absolute
    /// (unnormalized) residual instead.
    pub absolute: bool,
}

/// Harvey-Lawson residual
/// `|| P_S D beta_eps + J H ||_{L2(V)} / || H ||_{L2(V)}`.
///
/// Uses the circumcircle estimator for curves and the angle-gradient
/// estimator in higher dimension.
pub fn harvey_lawson_residual(
    v: &DiscreteVarifold,
    lift: &AngleLift,
    moll: &Mollifier,
) -> Result<HlResidual, MaslovError> {
    let method = if v.n() == 1 && v.has_mesh() {
        CurvatureMethod::Frenet
    } else {
        CurvatureMethod::AngleGradient {
            lift,
            mollifier: moll,
        }
    };
    let h = mean_curvature_estimate(v, method)?;
    let field = Mollification::new(v, moll);
    let j = ComplexStructure::new(v.n());
    let mut num2 = 0.0;
    let mut den2 = 0.0;
    for (i, p) in v.particles().iter().enumerate() {
        let grad = field.angle_gradient(&lift.beta, &p.position);
        let tangential = p.frame.project(&grad);
        let defect = tangential + j.apply(&h[i]);
        num2 += p.mass() * defect.norm_squared();
        den2 += p.mass() * h[i].norm_squared();
    }
    let num = num2.sqrt();
    let den = den2.sqrt();
    if den <= 1e-12 * v.total_mass().max(1.0) {
        Ok(HlResidual {
            value: num,
            absolute: true,
        })
    } else {
        Ok(HlResidual {
            value: num / den,
            absolute: false,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::{generate, ScenarioSpec, SegmentSpec};
    use approx::assert_relative_eq;

    fn circle(m: usize) -> DiscreteVarifold {
        generate(&ScenarioSpec::Circle {
            radius: 1.0,
            resolution: m,
            spacing_modulation: 0.0,
        })
        .unwrap()
        .varifold
    }

    #[test]
    fn straight_line_lift_is_constant_with_no_jumps() {
        let v = generate(&ScenarioSpec::SegmentUnion {
            segments: vec![SegmentSpec {
                start: vec![0.0, 0.0],
                end: vec![2.0, 1.0],
                resolution: 64,
                multiplicity: 1,
            }],
        })
        .unwrap()
        .varifold;
        let lift = lift_angle(&v).unwrap();
        assert_eq!(lift.branch_jumps, 0);
        assert!(lift.is_consistent());
        let b0 = lift.beta[0];
        for b in &lift.beta {
            assert_relative_eq!(*b, b0, epsilon = 1e-12);
        }
    }

    #[test]
    fn circle_lift_winds_once() {
        let v = circle(400);
        let lift = lift_angle(&v).unwrap();
        // one inconsistent cycle with winding 1
        assert_eq!(lift.cycle_defects.len(), 1);
        assert_eq!(lift.cycle_defects[0].winding.abs(), 1);
        let span = lift.beta.iter().fold(f64::NEG_INFINITY, |m, b| m.max(*b))
            - lift.beta.iter().fold(f64::INFINITY, |m, b| m.min(*b));
        assert_relative_eq!(span, 2.0 * PI, max_relative = 0.02);
    }

    #[test]
    fn circle_maslov_index_is_one() {
        let v = circle(256);
        let full: Vec<usize> = (0..v.len()).collect();
        assert_eq!(maslov_index(&v, &full).unwrap(), 1);
        let mut reversed = full.clone();
        reversed.reverse();
        assert_eq!(maslov_index(&v, &reversed).unwrap(), -1);
    }

    #[test]
    fn maslov_index_is_independent_of_the_starting_point() {
        let v = circle(128);
        let m = v.len();
        for start in [0usize, 17, 63] {
            let loop_: Vec<usize> = (0..m).map(|i| (i + start) % m).collect();
            assert_eq!(maslov_index(&v, &loop_).unwrap(), 1);
        }
    }

    #[test]
    fn transverse_figure_eight_windings() {
        let s = generate(&ScenarioSpec::FigureEightTransverse {
            scale: 1.0,
            resolution: 600,
        })
        .unwrap();
        let v = &s.varifold;
        let full: Vec<usize> = (0..v.len()).collect();
        assert_eq!(maslov_index(v, &full).unwrap(), 0);

        // the lift exists because the total winding vanishes
        let lift = lift_angle(v).unwrap();
        assert!(lift.is_consistent());

        // each lobe turns by 3 pi / 2 in opposite directions
        let lobes = s.metadata.lobes.as_ref().unwrap();
        let c1 = angle_change_along_path(v, &lobes[0]).unwrap();
        let c2 = angle_change_along_path(v, &lobes[1]).unwrap();
        assert_relative_eq!(c1.abs(), 1.5 * PI, epsilon = 0.05);
        assert_relative_eq!(c2.abs(), 1.5 * PI, epsilon = 0.05);
        assert!(c1 * c2 < 0.0, "lobe turnings must have opposite signs");
        assert_relative_eq!(c1 + c2, 0.0, epsilon = 0.05);
    }

    #[test]
    fn tangential_figure_eight_lobe_windings_sum_to_zero() {
        let s = generate(&ScenarioSpec::FigureEightTangential {
            lobe_radius: 0.5,
            resolution: 600,
        })
        .unwrap();
        let v = &s.varifold;
        let lobes = s.metadata.lobes.as_ref().unwrap();
        let w1 = maslov_index(v, &lobes[0]).unwrap();
        let w2 = maslov_index(v, &lobes[1]).unwrap();
        assert_eq!(w1.abs(), 1);
        assert_eq!(w2.abs(), 1);
        assert_eq!(w1 + w2, 0);
        let full: Vec<usize> = (0..v.len()).collect();
        assert_eq!(maslov_index(v, &full).unwrap(), 0);
    }

    #[test]
    fn cycle_basis_of_a_circle_is_one_loop() {
        let v = circle(64);
        let cycles = cycle_basis(&v);
        assert_eq!(cycles.len(), 1);
        assert_eq!(cycles[0].len(), 64);
    }

    #[test]
    fn harvey_lawson_residual_on_circle_is_small() {
        let v = circle(800);
        let lift = lift_angle(&v).unwrap();
        let h = v.h_max();
        let moll = Mollifier::new(4.0 * h, 1);
        let r = harvey_lawson_residual(&v, &lift, &moll).unwrap();
        assert!(!r.absolute);
        assert!(r.value < 0.05, "residual {}", r.value);
    }

    #[test]
    fn harvey_lawson_residual_on_straight_line_is_flagged_absolute_zero() {
        let v = generate(&ScenarioSpec::SegmentUnion {
            segments: vec![SegmentSpec {
                start: vec![-1.0, 0.0],
                end: vec![1.0, 0.0],
                resolution: 100,
                multiplicity: 1,
            }],
        })
        .unwrap()
        .varifold;
        let lift = lift_angle(&v).unwrap();
        let moll = Mollifier::new(0.1, 1);
        let r = harvey_lawson_residual(&v, &lift, &moll).unwrap();
        assert!(r.absolute);
        assert!(r.value < 1e-8, "absolute residual {}", r.value);
    }

    #[test]
    fn harvey_lawson_residual_decreases_under_refinement_on_ellipse() {
        let mut values = Vec::new();
        for &m in &[400usize, 800, 1600] {
            let v = generate(&ScenarioSpec::Ellipse {
                a: 2.0,
                b: 1.0,
                resolution: m,
            })
            .unwrap()
            .varifold;
            let lift = lift_angle(&v).unwrap();
            let moll = Mollifier::new(4.0 * v.h_max(), 1);
            values.push(harvey_lawson_residual(&v, &lift, &moll).unwrap().value);
        }
        assert!(values[1] < values[0] && values[2] < values[1], "{values:?}");
    }
}
