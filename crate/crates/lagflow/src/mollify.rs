//! Mollification of particle data with respect to the varifold measure.
//!
//! The kernel is the compactly supported bump
//! `phi_eps(x) = C eps^{-n} g(|x| / eps)` with `g(t) = exp(1 / (t^2 - 1))`
//! on `[0, 1)`, normalized so the integral of `phi_eps` over an n-plane is 1.
//! A mollified function is a ratio of kernel sums over particles,
//!
//! `f_eps(x) = sum_j f_j phi_eps(x - x_j) m_j / (sum_j phi_eps(x - x_j) m_j + reg)`,
//!
//! where the regularizer `reg = eps^{n+2}` keeps the denominator positive
//! away from the support. Kernel sums go through a uniform spatial hash of
//! cell size `eps`, so one evaluation costs O(neighbors).

use crate::geometry::{wrap_angle, ComplexStructure, LagrangianFrame};
use crate::varifold::{DiscreteVarifold, ScalarFieldOnV};
use nalgebra::{DMatrix, DVector};
use std::collections::HashMap;
use std::sync::OnceLock;

// ---------------------------------------------------------------------------
// radial profile
// ---------------------------------------------------------------------------

/// `g(t) = exp(1/(t^2 - 1))` for `t` in `[0, 1)`, zero beyond.
#[inline]
pub fn profile(t: f64) -> f64 {
    if t >= 1.0 {
        0.0
    } else {
        (1.0 / (t * t - 1.0)).exp()
    }
}

/// First derivative of the profile.
#[inline]
pub fn profile_d1(t: f64) -> f64 {
    if t >= 1.0 {
        0.0
    } else {
        let s = t * t - 1.0;
        profile(t) * (-2.0 * t / (s * s))
    }
}

/// Second derivative of the profile.
#[inline]
pub fn profile_d2(t: f64) -> f64 {
    if t >= 1.0 {
        0.0
    } else {
        let s = t * t - 1.0;
        profile(t) * (4.0 * t * t / (s * s * s * s) + (6.0 * t * t + 2.0) / (s * s * s))
    }
}

/// sup of |g'| on [0, 1); a pure kernel constant used in derivative bounds.
pub fn max_profile_d1() -> f64 {
    static VALUE: OnceLock<f64> = OnceLock::new();
    *VALUE.get_or_init(|| {
        let mut max = 0.0_f64;
        for i in 0..200_000 {
            let t = i as f64 / 200_000.0;
            max = max.max(profile_d1(t).abs());
        }
        max
    })
}

/// sup of |g'| / sqrt(g) on [0, 1); enters the tilt-excess error bound.
pub fn profile_ratio_constant() -> f64 {
    static VALUE: OnceLock<f64> = OnceLock::new();
    *VALUE.get_or_init(|| {
        let mut max = 0.0_f64;
        for i in 1..200_000 {
            let t = i as f64 / 200_000.0;
            let g = profile(t);
            if g > 0.0 {
                max = max.max(profile_d1(t).abs() / g.sqrt());
            }
        }
        max
    })
}

// ---------------------------------------------------------------------------
// quadrature and normalization
// ---------------------------------------------------------------------------

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn adaptive_step(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        adaptive_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + adaptive_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Adaptive Simpson quadrature on [a, b].
pub fn adaptive_quadrature(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(a, b, fa, fm, fb);
    adaptive_step(&f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Surface area of the unit (n-1)-sphere, `2 pi^{n/2} / Gamma(n/2)`.
fn unit_sphere_area(n: usize) -> f64 {
    // Gamma(n/2) for integer n >= 1
    let mut gamma = if n % 2 == 0 {
        1.0 // Gamma(1)
    } else {
        std::f64::consts::PI.sqrt() // Gamma(1/2)
    };
    let mut x = if n % 2 == 0 { 1.0 } else { 0.5 };
    while 2.0 * x < n as f64 {
        gamma *= x;
        x += 1.0;
    }
    2.0 * std::f64::consts::PI.powf(n as f64 / 2.0) / gamma
}

/// Normalization constant `C` with `integral over R^n of C g(|t|) dt = 1`,
/// computed by adaptive radial quadrature to relative error 1e-8.
pub fn normalization_constant(n: usize) -> f64 {
    assert!(n >= 1);
    static CACHE: OnceLock<std::sync::Mutex<HashMap<usize, f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| std::sync::Mutex::new(HashMap::new()));
    if let Some(&c) = cache.lock().unwrap().get(&n) {
        return c;
    }
    let radial = adaptive_quadrature(
        |r| r.powi(n as i32 - 1) * profile(r),
        0.0,
        1.0,
        1e-12,
    );
    let c = 1.0 / (unit_sphere_area(n) * radial);
    cache.lock().unwrap().insert(n, c);
    c
}

// ---------------------------------------------------------------------------
// mollifier
// ---------------------------------------------------------------------------

/// The kernel `phi_eps` at scale `eps` for an n-dimensional varifold.
#[derive(Debug, Clone)]
pub struct Mollifier {
    epsilon: f64,
    n: usize,
    norm_const: f64,
}

impl Mollifier {
    pub fn new(epsilon: f64, n: usize) -> Self {
        assert!(epsilon > 0.0, "mollification scale must be positive");
        assert!(n >= 1);
        Mollifier {
            epsilon,
            n,
            norm_const: normalization_constant(n),
        }
    }

    #[inline]
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn norm_const(&self) -> f64 {
        self.norm_const
    }

    /// The kernel support radius (= eps exactly).
    #[inline]
    pub fn support_radius(&self) -> f64 {
        self.epsilon
    }

    /// Denominator regularizer `eps^{n+3}`, positive everywhere and one
    /// order below every kernel-derivative scale the estimates track, so
    /// the on-support damping it causes stays negligible at usable scales.
    #[inline]
    pub fn regularizer(&self) -> f64 {
        self.epsilon.powi(self.n as i32 + 3)
    }

    /// Kernel value at distance `r`.
    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        self.norm_const * self.epsilon.powi(-(self.n as i32)) * profile(r / self.epsilon)
    }

    /// Radial derivative `psi'(r)`.
    #[inline]
    pub fn d1(&self, r: f64) -> f64 {
        self.norm_const * self.epsilon.powi(-(self.n as i32) - 1) * profile_d1(r / self.epsilon)
    }

    /// Second radial derivative `psi''(r)`.
    #[inline]
    pub fn d2(&self, r: f64) -> f64 {
        self.norm_const * self.epsilon.powi(-(self.n as i32) - 2) * profile_d2(r / self.epsilon)
    }

    /// n-dimensional integral of the kernel, recomputed by quadrature;
    /// equals 1 up to quadrature error for every eps.
    pub fn mass_integral(&self) -> f64 {
        let eps = self.epsilon;
        let c = self.norm_const * eps.powi(-(self.n as i32));
        unit_sphere_area(self.n)
            * adaptive_quadrature(
                |r| r.powi(self.n as i32 - 1) * c * profile(r / eps),
                0.0,
                eps,
                1e-12,
            )
    }
}

// ---------------------------------------------------------------------------
// mollified evaluation
// ---------------------------------------------------------------------------

/// Value, gradient and hessian of a mollified scalar at one point.
#[derive(Debug, Clone)]
pub struct ScalarJet {
    pub value: f64,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
}

/// The three mollified pieces of the tangential angle gradient and the
/// residual that is left over:
/// `P_S D beta_eps = B_eps - beta_eps H_eps + error`.
#[derive(Debug, Clone)]
pub struct ErrorDecomposition {
    pub b_eps: DVector<f64>,
    pub h_eps: DVector<f64>,
    pub beta_eps: f64,
    pub tangential_gradient: DVector<f64>,
    pub error: DVector<f64>,
    /// A-priori bound on |error| from the tilt excess in the kernel ball.
    pub apriori_bound: f64,
}

/// One quadrature node of the kernel summation: a point with a mass weight
/// whose data value interpolates up to four anchor particles (two for edge
/// nodes, four for quad-cell nodes, one for bare point masses).
#[derive(Debug, Clone)]
struct QuadNode {
    position: Vec<f64>,
    mass: f64,
    corners: [u32; 4],
    weights: [f64; 4],
}

impl QuadNode {
    fn point(i: usize, position: Vec<f64>, mass: f64) -> Self {
        QuadNode {
            position,
            mass,
            corners: [i as u32; 4],
            weights: [1.0, 0.0, 0.0, 0.0],
        }
    }

    #[inline]
    fn value(&self, f: &[f64]) -> f64 {
        let mut acc = 0.0;
        for k in 0..4 {
            if self.weights[k] != 0.0 {
                acc += self.weights[k] * f[self.corners[k] as usize];
            }
        }
        acc
    }

    /// Interpolation for angle lifts: anchor at the first corner and walk
    /// the short arc to the others, so mesh cells whose corner lifts sit on
    /// different 2 pi branches still interpolate geometrically.
    #[inline]
    fn angle(&self, lift: &[f64]) -> f64 {
        let l0 = lift[self.corners[0] as usize];
        let mut acc = l0;
        for k in 1..4 {
            if self.weights[k] != 0.0 {
                acc += self.weights[k] * wrap_angle(lift[self.corners[k] as usize] - l0);
            }
        }
        acc
    }
}

/// Kernel sums over meshed varifolds integrate along the mesh: each edge
/// (curves) or quad cell (surfaces) is split into sub-nodes at spacing
/// around eps / NODES_PER_SUPPORT, with data interpolated between the
/// anchor particles. Bare point-mass sums at 3-6 particles per kernel
/// support misquadrate the sharply peaked gradient kernel by tens of
/// percent; mesh subdivision restores the accuracy without refining the
/// particle system.
const NODES_PER_SUPPORT_CURVE: f64 = 20.0;
const NODES_PER_SUPPORT_SURFACE: f64 = 8.0;
const MAX_NODES_PER_EDGE: usize = 64;

fn build_nodes(v: &DiscreteVarifold, eps: f64) -> Vec<QuadNode> {
    let dim = v.ambient_dim();
    let mut nodes = Vec::new();
    if v.n() == 1 && v.has_mesh() {
        // distribute each edge's mass along its segment
        let mut covered = vec![0.0_f64; v.len()];
        for (a, b) in v.edges() {
            let pa = &v.particle(a).position;
            let pb = &v.particle(b).position;
            let len = (pb - pa).norm();
            if len == 0.0 {
                continue;
            }
            let theta_a = v.particle(a).multiplicity as f64;
            let theta_b = v.particle(b).multiplicity as f64;
            covered[a] += 0.5 * len * theta_a;
            covered[b] += 0.5 * len * theta_b;
            let q = ((len / (eps / NODES_PER_SUPPORT_CURVE)).ceil() as usize)
                .clamp(1, MAX_NODES_PER_EDGE);
            for k in 0..q {
                let t = (k as f64 + 0.5) / q as f64;
                let mut position = vec![0.0; dim];
                for d in 0..dim {
                    position[d] = (1.0 - t) * pa[d] + t * pb[d];
                }
                let theta = (1.0 - t) * theta_a + t * theta_b;
                nodes.push(QuadNode {
                    position,
                    mass: len / q as f64 * theta,
                    corners: [a as u32, b as u32, a as u32, a as u32],
                    weights: [1.0 - t, t, 0.0, 0.0],
                });
            }
        }
        push_leftover_point_masses(v, &covered, &mut nodes);
    } else if v.n() == 2 && v.has_mesh() {
        let faces = v.quad_faces();
        if faces.is_empty() {
            push_all_point_masses(v, &mut nodes);
            return nodes;
        }
        let mut covered = vec![0.0_f64; v.len()];
        for face in &faces {
            let corners: Vec<&DVector<f64>> =
                face.iter().map(|&i| &v.particle(i).position).collect();
            let thetas: Vec<f64> = face
                .iter()
                .map(|&i| v.particle(i).multiplicity as f64)
                .collect();
            // bilinear patch x(s,t); subdivision scale from the longest side
            let side = (corners[1] - corners[0])
                .norm()
                .max((corners[2] - corners[1]).norm())
                .max((corners[3] - corners[2]).norm())
                .max((corners[0] - corners[3]).norm());
            if side == 0.0 {
                continue;
            }
            let q = ((side / (eps / NODES_PER_SUPPORT_SURFACE)).ceil() as usize)
                .clamp(1, MAX_NODES_PER_EDGE);
            let mut face_mass = 0.0;
            for ks in 0..q {
                let sp = (ks as f64 + 0.5) / q as f64;
                for kt in 0..q {
                    let tp = (kt as f64 + 0.5) / q as f64;
                    let w = [
                        (1.0 - sp) * (1.0 - tp),
                        sp * (1.0 - tp),
                        sp * tp,
                        (1.0 - sp) * tp,
                    ];
                    let mut position = vec![0.0; dim];
                    for d in 0..dim {
                        position[d] = w[0] * corners[0][d]
                            + w[1] * corners[1][d]
                            + w[2] * corners[2][d]
                            + w[3] * corners[3][d];
                    }
                    // tangent vectors of the bilinear map at (sp, tp)
                    let mut du = vec![0.0; dim];
                    let mut dv = vec![0.0; dim];
                    for d in 0..dim {
                        du[d] = (1.0 - tp) * (corners[1][d] - corners[0][d])
                            + tp * (corners[2][d] - corners[3][d]);
                        dv[d] = (1.0 - sp) * (corners[3][d] - corners[0][d])
                            + sp * (corners[2][d] - corners[1][d]);
                    }
                    let (mut uu, mut vv, mut uv) = (0.0, 0.0, 0.0);
                    for d in 0..dim {
                        uu += du[d] * du[d];
                        vv += dv[d] * dv[d];
                        uv += du[d] * dv[d];
                    }
                    let cell_area = (uu * vv - uv * uv).max(0.0).sqrt() / (q * q) as f64;
                    let theta =
                        w[0] * thetas[0] + w[1] * thetas[1] + w[2] * thetas[2] + w[3] * thetas[3];
                    let mass = cell_area * theta;
                    face_mass += mass;
                    nodes.push(QuadNode {
                        position,
                        mass,
                        corners: [
                            face[0] as u32,
                            face[1] as u32,
                            face[2] as u32,
                            face[3] as u32,
                        ],
                        weights: w,
                    });
                }
            }
            for &i in face {
                covered[i] += face_mass / 4.0;
            }
        }
        push_leftover_point_masses(v, &covered, &mut nodes);
    } else {
        push_all_point_masses(v, &mut nodes);
    }
    nodes
}

fn push_leftover_point_masses(v: &DiscreteVarifold, covered: &[f64], nodes: &mut Vec<QuadNode>) {
    for (i, p) in v.particles().iter().enumerate() {
        let leftover = p.mass() - covered[i];
        if leftover > 1e-12 * p.mass().max(1.0) {
            nodes.push(QuadNode::point(i, p.position.as_slice().to_vec(), leftover));
        }
    }
}

fn push_all_point_masses(v: &DiscreteVarifold, nodes: &mut Vec<QuadNode>) {
    for (i, p) in v.particles().iter().enumerate() {
        nodes.push(QuadNode::point(i, p.position.as_slice().to_vec(), p.mass()));
    }
}

/// Uniform-grid spatial hash over quadrature nodes with cell size equal to
/// the kernel support, so everything within `eps` of a query point lives in
/// the 3^d adjacent cells. Hash collisions only add candidates; every
/// candidate is distance filtered by the caller.
struct NodeHash {
    cell: f64,
    dim: usize,
    buckets: HashMap<u64, Vec<u32>>,
}

impl NodeHash {
    fn cell_key(coords: &[i64]) -> u64 {
        // splitmix64 finalizer per coordinate; plain FNV-style mixing of
        // sign-extended cell indices collides constantly on the small
        // coordinate ranges a grid produces, silently double counting
        // whole buckets during a gather
        let mut h = 0x9e37_79b9_7f4a_7c15_u64;
        for &c in coords {
            let mut z = (c as u64).wrapping_add(0x9e37_79b9_7f4a_7c15);
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
            z ^= z >> 31;
            h = (h ^ z).wrapping_mul(0x1000_0000_01b3);
        }
        h
    }

    fn build(nodes: &[QuadNode], dim: usize, cell: f64) -> Self {
        let mut buckets: HashMap<u64, Vec<u32>> = HashMap::new();
        let mut coords = vec![0i64; dim];
        for (i, node) in nodes.iter().enumerate() {
            for (k, c) in coords.iter_mut().enumerate() {
                *c = (node.position[k] / cell).floor() as i64;
            }
            buckets
                .entry(Self::cell_key(&coords))
                .or_default()
                .push(i as u32);
        }
        NodeHash { cell, dim, buckets }
    }

    /// Collect candidate node indices around `x` (deterministic order).
    fn gather(&self, x: &[f64], out: &mut Vec<u32>) {
        out.clear();
        let dim = self.dim;
        let base: Vec<i64> = (0..dim).map(|k| (x[k] / self.cell).floor() as i64).collect();
        let mut offset = vec![-1i64; dim];
        let mut coords = vec![0i64; dim];
        loop {
            for k in 0..dim {
                coords[k] = base[k] + offset[k];
            }
            if let Some(bucket) = self.buckets.get(&Self::cell_key(&coords)) {
                out.extend_from_slice(bucket);
            }
            // odometer over {-1, 0, 1}^dim
            let mut k = 0;
            loop {
                if k == dim {
                    return;
                }
                offset[k] += 1;
                if offset[k] <= 1 {
                    break;
                }
                offset[k] = -1;
                k += 1;
            }
        }
    }
}

/// Retained kernel-summation state over one varifold: the quadrature nodes,
/// their spatial hash and the regularizer.
pub struct Mollification<'a> {
    v: &'a DiscreteVarifold,
    moll: &'a Mollifier,
    nodes: Vec<QuadNode>,
    hash: NodeHash,
    reg: f64,
}

impl<'a> Mollification<'a> {
    pub fn new(v: &'a DiscreteVarifold, moll: &'a Mollifier) -> Self {
        assert_eq!(v.n(), moll.n(), "mollifier dimension must match varifold");
        let nodes = build_nodes(v, moll.support_radius());
        let hash = NodeHash::build(&nodes, v.ambient_dim(), moll.support_radius());
        Mollification {
            v,
            moll,
            nodes,
            hash,
            reg: moll.regularizer(),
        }
    }

    pub fn varifold(&self) -> &DiscreteVarifold {
        self.v
    }

    /// Test hook: (candidate count, deduplicated count) of one gather.
    pub fn debug_gather_counts(&self, x: &DVector<f64>) -> (usize, usize) {
        let nbrs = self.neighbors(x.as_slice());
        let mut unique = nbrs.clone();
        unique.sort_unstable();
        unique.dedup();
        (nbrs.len(), unique.len())
    }

    pub fn mollifier(&self) -> &Mollifier {
        self.moll
    }

    fn neighbors(&self, x: &[f64]) -> Vec<u32> {
        let mut out = Vec::new();
        self.hash.gather(x, &mut out);
        out
    }

    /// Kernel mass `integral of phi_eps(x - y) d||V||(y)`.
    pub fn kernel_mass(&self, x: &DVector<f64>) -> f64 {
        let eps = self.moll.support_radius();
        let mut acc = 0.0;
        for &j in &self.neighbors(x.as_slice()) {
            let node = &self.nodes[j as usize];
            let r = dist(x.as_slice(), &node.position);
            if r < eps {
                acc += self.moll.value(r) * node.mass;
            }
        }
        acc
    }

    /// Mollified scalar `f_eps(x)`.
    pub fn scalar(&self, f: &[f64], x: &DVector<f64>) -> f64 {
        let eps = self.moll.support_radius();
        let mut num = 0.0;
        let mut den = self.reg;
        for &j in &self.neighbors(x.as_slice()) {
            let node = &self.nodes[j as usize];
            let r = dist(x.as_slice(), &node.position);
            if r < eps {
                let w = self.moll.value(r) * node.mass;
                num += node.value(f) * w;
                den += w;
            }
        }
        num / den
    }

    /// Analytic gradient of the mollified scalar (quotient rule on both
    /// kernel sums).
    pub fn scalar_gradient(&self, f: &[f64], x: &DVector<f64>) -> DVector<f64> {
        let nbrs = self.neighbors(x.as_slice());
        self.grad_with_nodes(x, &nbrs, |node| node.value(f)).1
    }

    /// Value and gradient only; skips the hessian accumulation.
    fn grad_with_nodes(
        &self,
        x: &DVector<f64>,
        nbrs: &[u32],
        value_of: impl Fn(&QuadNode) -> f64,
    ) -> (f64, DVector<f64>) {
        let eps = self.moll.support_radius();
        let dim = self.v.ambient_dim();
        let mut num = 0.0;
        let mut den = self.reg;
        let mut num_grad = DVector::<f64>::zeros(dim);
        let mut den_grad = DVector::<f64>::zeros(dim);
        let mut diff = vec![0.0_f64; dim];
        for &j in nbrs {
            let node = &self.nodes[j as usize];
            let mut r2 = 0.0;
            for k in 0..dim {
                let d = x[k] - node.position[k];
                diff[k] = d;
                r2 += d * d;
            }
            let r = r2.sqrt();
            if r >= eps {
                continue;
            }
            let m = node.mass;
            let fj = value_of(node);
            let w = self.moll.value(r) * m;
            num += fj * w;
            den += w;
            if r < 1e-14 * eps {
                continue;
            }
            let d1 = self.moll.d1(r) * m / r;
            for k in 0..dim {
                let gk = d1 * diff[k];
                num_grad[k] += fj * gk;
                den_grad[k] += gk;
            }
        }
        let value = num / den;
        let gradient = (&num_grad - &den_grad * value) / den;
        (value, gradient)
    }

    /// Value, gradient and hessian of the mollified scalar.
    pub fn scalar_jet(&self, f: &[f64], x: &DVector<f64>) -> ScalarJet {
        let nbrs = self.neighbors(x.as_slice());
        self.jet_with_nodes(x, &nbrs, |node| node.value(f))
    }

    /// Mollification of a per-particle vector field, componentwise.
    pub fn vector(&self, field: &[DVector<f64>], x: &DVector<f64>) -> DVector<f64> {
        let eps = self.moll.support_radius();
        let dim = self.v.ambient_dim();
        let mut num = DVector::zeros(dim);
        let mut den = self.reg;
        for &j in &self.neighbors(x.as_slice()) {
            let node = &self.nodes[j as usize];
            let r = dist(x.as_slice(), &node.position);
            if r < eps {
                let w = self.moll.value(r) * node.mass;
                for k in 0..4 {
                    if node.weights[k] != 0.0 {
                        num.axpy(w * node.weights[k], &field[node.corners[k] as usize], 1.0);
                    }
                }
                den += w;
            }
        }
        num / den
    }

    /// The branch base for angle evaluation near `x`: the kernel-weighted
    /// circular mean of the window's angles, anchored to the dominant
    /// contributor's branch. The mean varies continuously with `x`, so the
    /// branch assignment of the window data never flips along a smooth
    /// stretch of the lift; the anchor can only jump by whole multiples of
    /// 2 pi, under which the evaluation is exactly equivariant.
    fn branch_center(&self, lift: &[f64], nbrs: &[u32], x: &DVector<f64>) -> Option<f64> {
        let eps = self.moll.support_radius();
        let mut cos_sum = 0.0;
        let mut sin_sum = 0.0;
        let mut best: Option<(f64, u32)> = None;
        for &j in nbrs {
            let node = &self.nodes[j as usize];
            let r = dist(x.as_slice(), &node.position);
            if r < eps {
                let w = self.moll.value(r) * node.mass;
                let a = node.angle(lift);
                cos_sum += w * a.cos();
                sin_sum += w * a.sin();
                match best {
                    Some((bw, bj)) if w < bw || (w == bw && j >= bj) => {}
                    _ => best = Some((w, j)),
                }
            }
        }
        best.map(|(_, j)| {
            let anchor = self.nodes[j as usize].angle(lift);
            let mean = sin_sum.atan2(cos_sum);
            anchor + wrap_angle(mean - anchor)
        })
    }

    /// Mollified angle jet with local branch re-centering: every lift value
    /// in the kernel window is moved to the 2 pi branch closest to the
    /// dominant contributor, the deviation from that center is mollified,
    /// and the center is added back. Mollifying the deviation rather than
    /// the absolute value makes the evaluation exactly equivariant under
    /// 2 pi branch shifts despite the denominator regularizer; otherwise a
    /// center flip across the lift's seam kicks the field by
    /// O(reg / eps^2), and those kicks sit exactly in the kernel's
    /// anti-diffusive band.
    pub fn angle_jet(&self, lift: &[f64], x: &DVector<f64>) -> ScalarJet {
        let nbrs = self.neighbors(x.as_slice());
        match self.branch_center(lift, &nbrs, x) {
            None => ScalarJet {
                value: 0.0,
                gradient: DVector::zeros(self.v.ambient_dim()),
                hessian: DMatrix::zeros(self.v.ambient_dim(), self.v.ambient_dim()),
            },
            Some(c) => {
                let mut jet =
                    self.jet_with_nodes(x, &nbrs, |node| wrap_angle(node.angle(lift) - c));
                jet.value += c;
                jet
            }
        }
    }

    /// Mollified angle value with branch re-centering.
    pub fn angle_value(&self, lift: &[f64], x: &DVector<f64>) -> f64 {
        let nbrs = self.neighbors(x.as_slice());
        match self.branch_center(lift, &nbrs, x) {
            None => 0.0,
            Some(c) => {
                let eps = self.moll.support_radius();
                let mut num = 0.0;
                let mut den = self.reg;
                for &j in &nbrs {
                    let node = &self.nodes[j as usize];
                    let r = dist(x.as_slice(), &node.position);
                    if r < eps {
                        let w = self.moll.value(r) * node.mass;
                        num += wrap_angle(node.angle(lift) - c) * w;
                        den += w;
                    }
                }
                c + num / den
            }
        }
    }

    /// Mollified angle gradient with branch re-centering (no hessian).
    pub fn angle_gradient(&self, lift: &[f64], x: &DVector<f64>) -> DVector<f64> {
        let nbrs = self.neighbors(x.as_slice());
        match self.branch_center(lift, &nbrs, x) {
            None => DVector::zeros(self.v.ambient_dim()),
            Some(c) => {
                self.grad_with_nodes(x, &nbrs, |node| wrap_angle(node.angle(lift) - c))
                    .1
            }
        }
    }

    fn jet_with_nodes(
        &self,
        x: &DVector<f64>,
        nbrs: &[u32],
        value_of: impl Fn(&QuadNode) -> f64,
    ) -> ScalarJet {
        let eps = self.moll.support_radius();
        let dim = self.v.ambient_dim();
        let mut num = 0.0;
        let mut den = self.reg;
        let mut num_grad = DVector::<f64>::zeros(dim);
        let mut den_grad = DVector::<f64>::zeros(dim);
        let mut num_hess = DMatrix::<f64>::zeros(dim, dim);
        let mut den_hess = DMatrix::<f64>::zeros(dim, dim);
        let mut diff = vec![0.0_f64; dim];

        for &j in nbrs {
            let node = &self.nodes[j as usize];
            let mut r2 = 0.0;
            for k in 0..dim {
                let d = x[k] - node.position[k];
                diff[k] = d;
                r2 += d * d;
            }
            let r = r2.sqrt();
            if r >= eps {
                continue;
            }
            let m = node.mass;
            let fj = value_of(node);
            let w = self.moll.value(r) * m;
            num += fj * w;
            den += w;

            if r < 1e-14 * eps {
                // at the center the kernel is smooth with D phi = 0 and
                // D^2 phi = psi''(0) I
                let h0 = self.moll.d2(0.0) * m;
                for k in 0..dim {
                    num_hess[(k, k)] += fj * h0;
                    den_hess[(k, k)] += h0;
                }
                continue;
            }

            let d1 = self.moll.d1(r) * m;
            let d2 = self.moll.d2(r) * m;
            let inv_r = 1.0 / r;
            // gradient: psi'(r) * diff / r
            for k in 0..dim {
                let gk = d1 * diff[k] * inv_r;
                num_grad[k] += fj * gk;
                den_grad[k] += gk;
            }
            // hessian: psi'' u u^T + (psi'/r)(I - u u^T)
            let radial = (d2 - d1 * inv_r) * inv_r * inv_r;
            let lateral = d1 * inv_r;
            for a in 0..dim {
                for b in 0..dim {
                    let mut h = radial * diff[a] * diff[b];
                    if a == b {
                        h += lateral;
                    }
                    num_hess[(a, b)] += fj * h;
                    den_hess[(a, b)] += h;
                }
            }
        }

        let value = num / den;
        let inv_den = 1.0 / den;
        // quotient rule
        let gradient = (&num_grad - &den_grad * value) * inv_den;
        let mut hessian = DMatrix::<f64>::zeros(dim, dim);
        for a in 0..dim {
            for b in 0..dim {
                hessian[(a, b)] = num_hess[(a, b)] * inv_den
                    - (num_grad[a] * den_grad[b] + den_grad[a] * num_grad[b]) * inv_den * inv_den
                    - num * den_hess[(a, b)] * inv_den * inv_den
                    + 2.0 * num * den_grad[a] * den_grad[b] * inv_den * inv_den * inv_den;
            }
        }
        ScalarJet {
            value,
            gradient,
            hessian,
        }
    }

    /// Decompose the tangential mollified angle gradient at `x` into the
    /// mollified weak derivative, the mollified curvature term and the
    /// tilt-excess residual. `b_hat` and `h_hat` are per-particle estimates
    /// of the weak derivative and the mean curvature; the beta-proportional
    /// part of `b_hat` is moved to the local angle branch along with the
    /// lift values so the decomposition stays consistent across seams.
    pub fn error_decomposition(
        &self,
        lift: &[f64],
        b_hat: &[DVector<f64>],
        h_hat: &[DVector<f64>],
        x: &DVector<f64>,
        frame: &LagrangianFrame,
    ) -> ErrorDecomposition {
        let eps = self.moll.support_radius();
        let dim = self.v.ambient_dim();
        let nbrs = self.neighbors(x.as_slice());
        let center = self.branch_center(lift, &nbrs, x);

        let jet = match center {
            Some(c) => {
                let mut jet =
                    self.jet_with_nodes(x, &nbrs, |node| wrap_angle(node.angle(lift) - c));
                jet.value += c;
                jet
            }
            None => ScalarJet {
                value: 0.0,
                gradient: DVector::zeros(dim),
                hessian: DMatrix::zeros(dim, dim),
            },
        };
        let tangential = frame.project(&jet.gradient);

        let lerp_vec = |node: &QuadNode, field: &[DVector<f64>]| -> DVector<f64> {
            let mut acc = DVector::<f64>::zeros(dim);
            for k in 0..4 {
                if node.weights[k] != 0.0 {
                    acc.axpy(node.weights[k], &field[node.corners[k] as usize], 1.0);
                }
            }
            acc
        };

        let p_ref = frame.projection();
        let mut b_num = DVector::<f64>::zeros(dim);
        let mut h_num = DVector::<f64>::zeros(dim);
        let mut den = self.reg;
        let mut window_sup_beta = 0.0_f64;
        let mut tilt = 0.0;
        let mut kmass = 0.0;
        for &j in &nbrs {
            let node = &self.nodes[j as usize];
            let r = dist(x.as_slice(), &node.position);
            if r >= eps {
                continue;
            }
            let w = self.moll.value(r) * node.mass;
            // branch-adjust the endpoint data before interpolating: the
            // beta-proportional part of the weak derivative moves with the
            // local branch, B~ = B + (beta~ - beta) H per endpoint
            let adjusted = |i: usize| -> DVector<f64> {
                let shift = match center {
                    Some(c) => c + wrap_angle(lift[i] - c) - lift[i],
                    None => 0.0,
                };
                &b_hat[i] + &h_hat[i] * shift
            };
            let mut b_node = DVector::<f64>::zeros(dim);
            for k in 0..4 {
                if node.weights[k] != 0.0 {
                    b_node.axpy(node.weights[k], &adjusted(node.corners[k] as usize), 1.0);
                }
            }
            let h_node = lerp_vec(node, h_hat);
            let beta_local = match center {
                Some(c) => c + wrap_angle(node.angle(lift) - c),
                None => node.angle(lift),
            };
            b_num.axpy(w, &b_node, 1.0);
            h_num.axpy(w, &h_node, 1.0);
            den += w;
            kmass += w;
            window_sup_beta = window_sup_beta.max(beta_local.abs());
            // interpolated tangent projection for the tilt integrand
            let mut p_node = DMatrix::<f64>::zeros(dim, dim);
            for k in 0..4 {
                if node.weights[k] != 0.0 {
                    p_node += self.v.particle(node.corners[k] as usize).frame.projection()
                        * node.weights[k];
                }
            }
            tilt += node.mass * (p_node - &p_ref).norm_squared();
        }
        let b_eps = b_num / den;
        let h_eps = h_num / den;
        let error = &tangential - &b_eps + &h_eps * jet.value;

        // |E| <= sqrt(C) eps^{-n/2 - 1} K_g (sup|beta| + |beta_eps|)
        //        * sqrt(tilt-sum / kernel-mass)
        let apriori_bound = if kmass > 0.0 {
            self.moll.norm_const().sqrt()
                * eps.powf(-(self.v.n() as f64) / 2.0 - 1.0)
                * profile_ratio_constant()
                * (window_sup_beta + jet.value.abs())
                * (tilt / kmass).sqrt()
        } else {
            0.0
        };

        ErrorDecomposition {
            b_eps,
            h_eps,
            beta_eps: jet.value,
            tangential_gradient: tangential,
            error,
            apriori_bound,
        }
    }
}

#[inline]
fn dist(x: &[f64], y: &[f64]) -> f64 {
    let mut acc = 0.0;
    for k in 0..x.len() {
        let d = x[k] - y[k];
        acc += d * d;
    }
    acc.sqrt()
}

// ---------------------------------------------------------------------------
// op-level wrappers
// ---------------------------------------------------------------------------

/// One-shot mollified scalar evaluation (builds the spatial hash; use
/// [`Mollification`] to amortize over many evaluations).
pub fn mollify_scalar(
    f: &ScalarFieldOnV,
    v: &DiscreteVarifold,
    moll: &Mollifier,
    x: &DVector<f64>,
) -> f64 {
    Mollification::new(v, moll).scalar(f.values(), x)
}

/// One-shot mollified gradient evaluation.
pub fn mollify_gradient(
    f: &ScalarFieldOnV,
    v: &DiscreteVarifold,
    moll: &Mollifier,
    x: &DVector<f64>,
) -> DVector<f64> {
    Mollification::new(v, moll).scalar_gradient(f.values(), x)
}

/// Ambient-divergence check for hamiltonian fields: `tr(J D^2 f_eps)`
/// vanishes identically because the hessian is symmetric.
pub fn hamiltonian_divergence(jet: &ScalarJet, j: &ComplexStructure) -> f64 {
    let jh = j.apply_matrix(&jet.hessian);
    jh.trace()
}
