//! Deterministic generators for the initial varifolds used in tests and
//! acceptance runs, each with analytic ground truth attached.

use crate::geometry::LagrangianFrame;
use crate::varifold::{DiscreteVarifold, Particle, VarifoldError};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid scenario spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Varifold(#[from] VarifoldError),
}

fn default_separation() -> f64 {
    4.0
}

/// One straight segment of a [`ScenarioSpec::SegmentUnion`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SegmentSpec {
    pub start: Vec<f64>,
    pub end: Vec<f64>,
    pub resolution: usize,
    #[serde(default = "one")]
    pub multiplicity: u32,
}

fn one() -> u32 {
    1
}

/// Declarative description of an initial varifold.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScenarioSpec {
    /// Round circle of the given radius in C^1. A nonzero spacing
    /// modulation samples the same circle nonuniformly (spacing scaled by
    /// `1 + modulation cos(t)`), which breaks the exact m-fold symmetry of
    /// the uniform mesh.
    Circle {
        radius: f64,
        resolution: usize,
        #[serde(default)]
        spacing_modulation: f64,
    },
    /// Axis-aligned ellipse with semi-axes `a`, `b`.
    Ellipse { a: f64, b: f64, resolution: usize },
    /// Transversely self-intersecting figure eight (Gerono-style lemniscate),
    /// duplicated particles at the crossing.
    FigureEightTransverse { scale: f64, resolution: usize },
    /// Two externally tangent circles traversed with opposite orientations.
    FigureEightTangential { lobe_radius: f64, resolution: usize },
    /// Union of straight segments.
    SegmentUnion { segments: Vec<SegmentSpec> },
    /// Straight lines with prescribed tangent angles and masses (= lengths).
    /// Line `k` is centred at `(0, k * separation)`; zero separation makes
    /// all lines cross at the origin.
    LineUnionPhases {
        angles: Vec<f64>,
        masses: Vec<f64>,
        resolution: usize,
        #[serde(default = "default_separation")]
        separation: f64,
    },
    /// Product of two circles in C^2, quad-meshed.
    ProductTorus {
        r1: f64,
        r2: f64,
        /// particles per factor circle
        resolution: usize,
    },
    /// Gradient graph {(x, Du(x))} of the quadratic u(x) = x^T Q x / 2 over
    /// a square grid, lagrangian by symmetry of Q.
    GraphLagrangian {
        q11: f64,
        q12: f64,
        q22: f64,
        extent: f64,
        resolution: usize,
    },
}

impl ScenarioSpec {
    pub fn id(&self) -> String {
        match self {
            ScenarioSpec::Circle {
                radius, resolution, ..
            } => {
                format!("circle_r{radius}_m{resolution}")
            }
            ScenarioSpec::Ellipse { a, b, resolution } => format!("ellipse_{a}x{b}_m{resolution}"),
            ScenarioSpec::FigureEightTransverse { scale, resolution } => {
                format!("fig8_transverse_s{scale}_m{resolution}")
            }
            ScenarioSpec::FigureEightTangential {
                lobe_radius,
                resolution,
            } => format!("fig8_tangential_r{lobe_radius}_m{resolution}"),
            ScenarioSpec::SegmentUnion { segments } => format!("segments_{}", segments.len()),
            ScenarioSpec::LineUnionPhases { angles, .. } => {
                format!("lines_{}phases", angles.len())
            }
            ScenarioSpec::ProductTorus { r1, r2, resolution } => {
                format!("torus_{r1}x{r2}_m{resolution}")
            }
            ScenarioSpec::GraphLagrangian { resolution, .. } => {
                format!("graph_lagrangian_m{resolution}")
            }
        }
    }
}

/// Analytic ground truth carried alongside a generated varifold.
#[derive(Debug, Clone, Default)]
pub struct ScenarioMetadata {
    pub exact_mass: f64,
    pub support_radius: f64,
    /// `|H|` per particle where an analytic formula exists.
    pub exact_curvature: Option<Vec<f64>>,
    /// Exact mod-pi phases per particle for piecewise-flat scenarios.
    pub exact_phases: Option<Vec<f64>>,
    /// Index paths of the figure-eight lobes (parameter order).
    pub lobes: Option<Vec<Vec<usize>>>,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub varifold: DiscreteVarifold,
    pub metadata: ScenarioMetadata,
    pub id: String,
}

/// Generate the varifold and its metadata for a spec.
pub fn generate(spec: &ScenarioSpec) -> Result<Scenario, ScenarioError> {
    let scenario = match spec {
        ScenarioSpec::Circle {
            radius,
            resolution,
            spacing_modulation,
        } => circle(*radius, *resolution, *spacing_modulation)?,
        ScenarioSpec::Ellipse { a, b, resolution } => ellipse(*a, *b, *resolution)?,
        ScenarioSpec::FigureEightTransverse { scale, resolution } => {
            figure_eight_transverse(*scale, *resolution)?
        }
        ScenarioSpec::FigureEightTangential {
            lobe_radius,
            resolution,
        } => figure_eight_tangential(*lobe_radius, *resolution)?,
        ScenarioSpec::SegmentUnion { segments } => segment_union(segments)?,
        ScenarioSpec::LineUnionPhases {
            angles,
            masses,
            resolution,
            separation,
        } => line_union(angles, masses, *resolution, *separation)?,
        ScenarioSpec::ProductTorus { r1, r2, resolution } => torus(*r1, *r2, *resolution)?,
        ScenarioSpec::GraphLagrangian {
            q11,
            q12,
            q22,
            extent,
            resolution,
        } => graph_lagrangian(*q11, *q12, *q22, *extent, *resolution)?,
    };
    Ok(Scenario {
        id: spec.id(),
        ..scenario
    })
}

fn check_resolution(m: usize) -> Result<(), ScenarioError> {
    if m < 16 {
        return Err(ScenarioError::InvalidSpec(format!(
            "resolution {m} is below the minimum of 16"
        )));
    }
    Ok(())
}

fn frame1(dir: [f64; 2]) -> LagrangianFrame {
    LagrangianFrame::new(vec![DVector::from_column_slice(&dir)]).expect("unit tangent")
}

/// Closed polygon from a list of positions in traversal order. Vertex
/// weights are half the two adjacent edge lengths, so the total mass is the
/// polygon perimeter exactly.
fn closed_polygon(points: Vec<DVector<f64>>) -> Result<DiscreteVarifold, VarifoldError> {
    let m = points.len();
    let mut particles = Vec::with_capacity(m);
    let mut edges = Vec::with_capacity(m);
    for i in 0..m {
        let prev = &points[(i + m - 1) % m];
        let next = &points[(i + 1) % m];
        let tangent = next - prev;
        let frame = frame1([tangent[0], tangent[1]]);
        let w = 0.5 * ((&points[i] - prev).norm() + (next - &points[i]).norm());
        particles.push(Particle {
            position: points[i].clone(),
            frame,
            weight: w,
            multiplicity: 1,
        });
        edges.push((i, (i + 1) % m));
    }
    DiscreteVarifold::new(1, particles, &edges)
}

fn circle(radius: f64, m: usize, spacing_modulation: f64) -> Result<Scenario, ScenarioError> {
    check_resolution(m)?;
    if !(radius > 0.0) {
        return Err(ScenarioError::InvalidSpec("radius must be positive".into()));
    }
    if spacing_modulation.abs() >= 0.9 {
        return Err(ScenarioError::InvalidSpec(
            "spacing modulation must stay below 0.9".into(),
        ));
    }
    let points: Vec<_> = (0..m)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / m as f64;
            let theta = t + spacing_modulation * t.sin();
            DVector::from_column_slice(&[radius * theta.cos(), radius * theta.sin()])
        })
        .collect();
    let varifold = closed_polygon(points)?;
    Ok(Scenario {
        varifold,
        metadata: ScenarioMetadata {
            exact_mass: 2.0 * PI * radius,
            support_radius: radius,
            exact_curvature: Some(vec![1.0 / radius; m]),
            exact_phases: None,
            lobes: None,
        },
        id: String::new(),
    })
}

fn ellipse(a: f64, b: f64, m: usize) -> Result<Scenario, ScenarioError> {
    check_resolution(m)?;
    if !(a > 0.0 && b > 0.0) {
        return Err(ScenarioError::InvalidSpec("semi-axes must be positive".into()));
    }
    let points: Vec<_> = (0..m)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / m as f64;
            DVector::from_column_slice(&[a * t.cos(), b * t.sin()])
        })
        .collect();
    let varifold = closed_polygon(points)?;
    let exact_mass = varifold.total_mass(); // polygonal perimeter; analytic one has no closed form
    let curvature = (0..m)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / m as f64;
            a * b / (a * a * t.sin().powi(2) + b * b * t.cos().powi(2)).powf(1.5)
        })
        .collect();
    Ok(Scenario {
        varifold,
        metadata: ScenarioMetadata {
            exact_mass,
            support_radius: a.max(b),
            exact_curvature: Some(curvature),
            exact_phases: None,
            lobes: None,
        },
        id: String::new(),
    })
}

/// Gerono-style lemniscate (cos t, scale * sin t cos t); the two passes
/// through the origin at t = pi/2, 3pi/2 give duplicated crossing particles
/// with transverse tangents.
fn figure_eight_transverse(scale: f64, m: usize) -> Result<Scenario, ScenarioError> {
    check_resolution(m)?;
    if !(scale > 0.0) {
        return Err(ScenarioError::InvalidSpec("scale must be positive".into()));
    }
    let points: Vec<_> = (0..m)
        .map(|i| {
            let t = 2.0 * PI * (i as f64 + 0.25) / m as f64;
            DVector::from_column_slice(&[t.cos(), scale * t.sin() * t.cos()])
        })
        .collect();
    let varifold = closed_polygon(points)?;
    // lobe 1: parameters in (pi/2, 3pi/2); lobe 2: the rest, listed in
    // traversal order across the parameter wrap so each lobe is a
    // contiguous mesh path
    let in_lobe1 = |i: usize| {
        let t = 2.0 * PI * (i as f64 + 0.25) / m as f64;
        t > PI / 2.0 && t < 1.5 * PI
    };
    let lobe1: Vec<usize> = (0..m).filter(|&i| in_lobe1(i)).collect();
    let first = lobe1.first().copied().unwrap_or(0);
    let last = lobe1.last().copied().unwrap_or(0);
    let mut lobe2: Vec<usize> = ((last + 1)..m).collect();
    lobe2.extend(0..first);
    let exact_mass = varifold.total_mass();
    let support_radius = varifold.support_radius();
    Ok(Scenario {
        varifold,
        metadata: ScenarioMetadata {
            exact_mass,
            support_radius,
            exact_curvature: None,
            exact_phases: None,
            lobes: Some(vec![lobe1, lobe2]),
        },
        id: String::new(),
    })
}

/// Two circles of radius `r` tangent at the origin, traversed as one
/// immersed loop: lobe windings +1 and -1.
fn figure_eight_tangential(r: f64, m: usize) -> Result<Scenario, ScenarioError> {
    check_resolution(m)?;
    if !(r > 0.0) {
        return Err(ScenarioError::InvalidSpec("lobe radius must be positive".into()));
    }
    let half = m / 2;
    let mut points = Vec::with_capacity(2 * half);
    // left circle, counter-clockwise, starting at the origin
    for i in 0..half {
        let t = 2.0 * PI * i as f64 / half as f64;
        points.push(DVector::from_column_slice(&[
            -r + r * t.cos(),
            r * t.sin(),
        ]));
    }
    // right circle, clockwise, starting at the origin
    for i in 0..half {
        let t = 2.0 * PI * i as f64 / half as f64;
        points.push(DVector::from_column_slice(&[
            r - r * t.cos(),
            r * t.sin(),
        ]));
    }
    let varifold = closed_polygon(points)?;
    let lobes = vec![(0..half).collect::<Vec<_>>(), (half..2 * half).collect()];
    let exact_mass = 4.0 * PI * r;
    Ok(Scenario {
        varifold,
        metadata: ScenarioMetadata {
            exact_mass,
            support_radius: 2.0 * r,
            exact_curvature: Some(vec![1.0 / r; 2 * half]),
            exact_phases: None,
            lobes: Some(lobes),
        },
        id: String::new(),
    })
}

/// Open chain for one straight segment, midpoint-sampled so each particle
/// carries exactly `length / resolution` of weight.
fn segment_chain(
    seg: &SegmentSpec,
    index_offset: usize,
) -> Result<(Vec<Particle>, Vec<(usize, usize)>), ScenarioError> {
    check_resolution(seg.resolution)?;
    if seg.start.len() != 2 || seg.end.len() != 2 {
        return Err(ScenarioError::InvalidSpec(
            "segments live in the plane (n = 1)".into(),
        ));
    }
    let a = DVector::from_column_slice(&seg.start);
    let b = DVector::from_column_slice(&seg.end);
    let dir = &b - &a;
    let len = dir.norm();
    if len == 0.0 {
        return Err(ScenarioError::InvalidSpec("zero-length segment".into()));
    }
    let m = seg.resolution;
    let frame = frame1([dir[0] / len, dir[1] / len]);
    let mut particles = Vec::with_capacity(m);
    let mut edges = Vec::with_capacity(m.saturating_sub(1));
    for i in 0..m {
        let t = (i as f64 + 0.5) / m as f64;
        particles.push(Particle {
            position: &a + &dir * t,
            frame: frame.clone(),
            weight: len / m as f64,
            multiplicity: seg.multiplicity,
        });
        if i + 1 < m {
            edges.push((index_offset + i, index_offset + i + 1));
        }
    }
    Ok((particles, edges))
}

fn segment_union(segments: &[SegmentSpec]) -> Result<Scenario, ScenarioError> {
    if segments.is_empty() {
        return Err(ScenarioError::InvalidSpec("no segments".into()));
    }
    let mut particles = Vec::new();
    let mut edges = Vec::new();
    let mut exact_mass = 0.0;
    let mut phases = Vec::new();
    for seg in segments {
        let (ps, es) = segment_chain(seg, particles.len())?;
        let a = DVector::from_column_slice(&seg.start);
        let b = DVector::from_column_slice(&seg.end);
        let d = &b - &a;
        let phase = d[1].atan2(d[0]).rem_euclid(PI);
        exact_mass += d.norm() * seg.multiplicity as f64;
        phases.extend(std::iter::repeat(phase).take(ps.len()));
        particles.extend(ps);
        edges.extend(es);
    }
    let varifold = DiscreteVarifold::new(1, particles, &edges)?;
    let support_radius = varifold.support_radius();
    Ok(Scenario {
        varifold,
        metadata: ScenarioMetadata {
            exact_mass,
            support_radius,
            exact_curvature: None,
            exact_phases: Some(phases),
            lobes: None,
        },
        id: String::new(),
    })
}

fn line_union(
    angles: &[f64],
    masses: &[f64],
    resolution: usize,
    separation: f64,
) -> Result<Scenario, ScenarioError> {
    if angles.len() != masses.len() || angles.is_empty() {
        return Err(ScenarioError::InvalidSpec(
            "angles and masses must be non-empty and of equal length".into(),
        ));
    }
    let segments: Vec<SegmentSpec> = angles
        .iter()
        .zip(masses)
        .enumerate()
        .map(|(k, (&theta, &mass))| {
            let half = 0.5 * mass;
            let center = DVector::from_column_slice(&[0.0, separation * k as f64]);
            let dir = DVector::from_column_slice(&[theta.cos(), theta.sin()]);
            SegmentSpec {
                start: (&center - &dir * half).as_slice().to_vec(),
                end: (&center + &dir * half).as_slice().to_vec(),
                resolution,
                multiplicity: 1,
            }
        })
        .collect();
    segment_union(&segments)
}

/// Product of two circles in C^2 on a quad grid; tangent frames are the
/// product of the factor tangents, so the raw angle is t1 + t2 + pi.
fn torus(r1: f64, r2: f64, m: usize) -> Result<Scenario, ScenarioError> {
    check_resolution(m)?;
    if !(r1 > 0.0 && r2 > 0.0) {
        return Err(ScenarioError::InvalidSpec("radii must be positive".into()));
    }
    let mut particles = Vec::with_capacity(m * m);
    let mut edges = Vec::new();
    let w = (2.0 * PI * r1 / m as f64) * (2.0 * PI * r2 / m as f64);
    let idx = |i: usize, j: usize| i * m + j;
    for i in 0..m {
        let t1 = 2.0 * PI * i as f64 / m as f64;
        for j in 0..m {
            let t2 = 2.0 * PI * j as f64 / m as f64;
            // complex coordinates z1 = x1 + i x3, z2 = x2 + i x4
            let position = DVector::from_column_slice(&[
                r1 * t1.cos(),
                r2 * t2.cos(),
                r1 * t1.sin(),
                r2 * t2.sin(),
            ]);
            let e1 = DVector::from_column_slice(&[-t1.sin(), 0.0, t1.cos(), 0.0]);
            let e2 = DVector::from_column_slice(&[0.0, -t2.sin(), 0.0, t2.cos()]);
            let frame = LagrangianFrame::new(vec![e1, e2]).expect("torus frame");
            particles.push(Particle {
                position,
                frame,
                weight: w,
                multiplicity: 1,
            });
            edges.push((idx(i, j), idx((i + 1) % m, j)));
            edges.push((idx(i, j), idx(i, (j + 1) % m)));
        }
    }
    let varifold = DiscreteVarifold::new(2, particles, &edges)?;
    let kappa = (1.0 / (r1 * r1) + 1.0 / (r2 * r2)).sqrt();
    Ok(Scenario {
        varifold,
        metadata: ScenarioMetadata {
            exact_mass: 4.0 * PI * PI * r1 * r2,
            support_radius: (r1 * r1 + r2 * r2).sqrt(),
            exact_curvature: Some(vec![kappa; m * m]),
            exact_phases: None,
            lobes: None,
        },
        id: String::new(),
    })
}

fn graph_lagrangian(
    q11: f64,
    q12: f64,
    q22: f64,
    extent: f64,
    m: usize,
) -> Result<Scenario, ScenarioError> {
    check_resolution(m)?;
    if !(extent > 0.0) {
        return Err(ScenarioError::InvalidSpec("extent must be positive".into()));
    }
    // u(x) = x^T Q x / 2 with symmetric Q; Du = Q x; tangents (e_k, Q e_k).
    let q = DMatrix::from_column_slice(2, 2, &[q11, q12, q12, q22]);
    let cell = 2.0 * extent / m as f64;
    // the graph over a base cell has area cell^2 * sqrt(det(I + Q^T Q))
    let gram = DMatrix::identity(2, 2) + q.transpose() * &q;
    let area_factor = gram.determinant().sqrt();
    let mut particles = Vec::with_capacity(m * m);
    let mut edges = Vec::new();
    let idx = |i: usize, j: usize| i * m + j;
    for i in 0..m {
        let x1 = -extent + cell * (i as f64 + 0.5);
        for j in 0..m {
            let x2 = -extent + cell * (j as f64 + 0.5);
            let x = DVector::from_column_slice(&[x1, x2]);
            let du = &q * &x;
            let position = DVector::from_column_slice(&[x1, x2, du[0], du[1]]);
            let e1 = DVector::from_column_slice(&[1.0, 0.0, q[(0, 0)], q[(1, 0)]]);
            let e2 = DVector::from_column_slice(&[0.0, 1.0, q[(0, 1)], q[(1, 1)]]);
            let frame = LagrangianFrame::new(vec![e1, e2]).expect("graph frame");
            particles.push(Particle {
                position,
                frame,
                weight: cell * cell * area_factor,
                multiplicity: 1,
            });
            if i + 1 < m {
                edges.push((idx(i, j), idx(i + 1, j)));
            }
            if j + 1 < m {
                edges.push((idx(i, j), idx(i, j + 1)));
            }
        }
    }
    let varifold = DiscreteVarifold::new(2, particles, &edges)?;
    let exact_mass = (2.0 * extent).powi(2) * area_factor;
    let support_radius = varifold.support_radius();
    Ok(Scenario {
        varifold,
        metadata: ScenarioMetadata {
            exact_mass,
            support_radius,
            exact_curvature: Some(vec![0.0; m * m]),
            exact_phases: None,
            lobes: None,
        },
        id: String::new(),
    })
}

/// The scenario catalogue for `lagflow scenarios`.
pub fn catalogue() -> Vec<(&'static str, &'static str)> {
    vec![
        ("circle", "round circle: radius, resolution"),
        ("ellipse", "axis-aligned ellipse: a, b, resolution"),
        (
            "figure_eight_transverse",
            "lemniscate with a transverse crossing: scale, resolution",
        ),
        (
            "figure_eight_tangential",
            "two tangent circles with opposite orientations: lobe_radius, resolution",
        ),
        ("segment_union", "union of straight segments"),
        (
            "line_union_phases",
            "straight lines with prescribed angles and masses: angles, masses, resolution, separation",
        ),
        ("product_torus", "circle x circle in C^2: r1, r2, resolution"),
        (
            "graph_lagrangian",
            "gradient graph of a quadratic over a square: q11, q12, q22, extent, resolution",
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::omega_residual;
    use approx::assert_relative_eq;

    #[test]
    fn circle_metadata_matches_mass() {
        let s = generate(&ScenarioSpec::Circle {
            radius: 1.0,
            resolution: 400,
            spacing_modulation: 0.0,
        })
        .unwrap();
        assert_relative_eq!(
            s.varifold.total_mass(),
            s.metadata.exact_mass,
            max_relative = 1e-3
        );
        assert_relative_eq!(s.varifold.support_radius(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn resolution_below_16_is_rejected() {
        assert!(matches!(
            generate(&ScenarioSpec::Circle {
                radius: 1.0,
                resolution: 8,
                spacing_modulation: 0.0,
            }),
            Err(ScenarioError::InvalidSpec(_))
        ));
    }

    #[test]
    fn every_generated_frame_is_lagrangian_and_orthonormal() {
        let specs = vec![
            ScenarioSpec::Circle {
                radius: 1.0,
                resolution: 64,
                spacing_modulation: 0.0,
            },
            ScenarioSpec::Ellipse {
                a: 2.0,
                b: 1.0,
                resolution: 64,
            },
            ScenarioSpec::FigureEightTransverse {
                scale: 1.0,
                resolution: 64,
            },
            ScenarioSpec::FigureEightTangential {
                lobe_radius: 0.5,
                resolution: 128,
            },
            ScenarioSpec::ProductTorus {
                r1: 1.0,
                r2: 1.0,
                resolution: 16,
            },
            ScenarioSpec::GraphLagrangian {
                q11: 1.0,
                q12: 0.0,
                q22: -1.0,
                extent: 1.0,
                resolution: 16,
            },
        ];
        for spec in specs {
            let s = generate(&spec).unwrap();
            for p in s.varifold.particles() {
                assert!(omega_residual(&p.frame).unwrap() < 1e-10, "{:?}", spec);
                assert!(crate::geometry::lagrangian_angle(&p.frame).is_ok());
            }
            assert_relative_eq!(
                s.varifold.total_mass(),
                s.metadata.exact_mass,
                max_relative = 1.1e-3
            );
        }
    }

    #[test]
    fn torus_mass_and_mesh() {
        let s = generate(&ScenarioSpec::ProductTorus {
            r1: 1.0,
            r2: 1.0,
            resolution: 24,
        })
        .unwrap();
        assert_relative_eq!(
            s.varifold.total_mass(),
            4.0 * PI * PI,
            epsilon = 1e-10
        );
        for adj in s.varifold.adjacency() {
            assert_eq!(adj.len(), 4);
        }
    }

    #[test]
    fn graph_lagrangian_omega_residual_is_tiny() {
        let s = generate(&ScenarioSpec::GraphLagrangian {
            q11: 1.0,
            q12: 0.0,
            q22: -1.0,
            extent: 1.0,
            resolution: 16,
        })
        .unwrap();
        for p in s.varifold.particles() {
            assert!(omega_residual(&p.frame).unwrap() < 1e-10);
        }
    }

    #[test]
    fn line_union_masses_are_exact() {
        let s = generate(&ScenarioSpec::LineUnionPhases {
            angles: vec![0.0, PI / 4.0, PI / 2.0],
            masses: vec![1.0, 2.0, 3.0],
            resolution: 100,
            separation: 4.0,
        })
        .unwrap();
        assert_relative_eq!(s.varifold.total_mass(), 6.0, epsilon = 1e-12);
        let phases = s.metadata.exact_phases.unwrap();
        assert_relative_eq!(phases[0], 0.0, epsilon = 1e-12);
        assert_relative_eq!(phases[150], PI / 4.0, epsilon = 1e-12);
        assert_relative_eq!(phases[250], PI / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn scenario_spec_round_trips_through_json() {
        let spec = ScenarioSpec::ProductTorus {
            r1: 1.0,
            r2: 0.5,
            resolution: 32,
        };
        let json = serde_json::to_string(&spec).unwrap();
        let back: ScenarioSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(json, serde_json::to_string(&back).unwrap());
    }
}
