//! The mollified-angle flow: iterate hamiltonian diffeomorphisms generated
//! by the mollified lagrangian angle over dyadic time steps, transporting
//! particles, frames, weights and the angle lift, and recording the
//! diagnostics that the monotonicity, collapse and energy statements
//! constrain.
//!
//! Within a macro step of length `2^-k` the mollified angle is frozen at the
//! step-start varifold; the particle ODE `dz/dt = J D beta_eps(z)` and its
//! monodromy `dM/dt = J D^2 beta_eps(z) M` are integrated together by the
//! configured integrator.

use crate::geometry::{omega_residual, ComplexStructure, GeometryError, VectorFieldSample};
use crate::maslov::{lift_angle, AngleLift, MaslovError};
use crate::mollify::{Mollification, Mollifier};
use crate::varifold::{mean_curvature_estimate, CurvatureMethod, DiscreteVarifold, VarifoldError};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("invalid flow configuration: {0}")]
    Config(String),
    #[error("initial varifold admits no locally continuous angle lift: {0}")]
    InitialNotZeroMaslov(MaslovError),
    #[error(
        "CFL violation: dt * max speed = {dt} * {max_speed:.3} exceeds mesh resolution {h_max:.5}"
    )]
    CflViolation {
        dt: f64,
        max_speed: f64,
        h_max: f64,
    },
    #[error("angle lift lost during transport: {0}")]
    Lift(#[from] MaslovError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Varifold(#[from] VarifoldError),
}

/// Time integrator for the within-step particle ODE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    ExplicitEuler,
    Rk4,
}

/// Configuration of one flow run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowConfig {
    /// Mollification scale (held fixed over the run).
    pub epsilon: f64,
    /// Macro step length is `2^-dyadic_level_k`.
    pub dyadic_level_k: u32,
    /// ODE substeps inside one macro step.
    pub ode_substeps: usize,
    pub t_final: f64,
    pub integrator: Integrator,
    /// Re-run the breadth-first unwrap after each step instead of keeping
    /// per-particle transported branches.
    pub relift_each_step: bool,
    /// Keep a full state snapshot every this many macro steps.
    #[serde(default = "default_cadence")]
    pub snapshot_cadence: usize,
    /// Stop when mass falls below this fraction of the initial mass.
    #[serde(default = "default_mass_floor")]
    pub mass_floor_fraction: f64,
    /// Strength of the conservative mesh-scale filter applied to the
    /// carried angle and weights after each macro step (0 disables, 1/2
    /// kills the alternating mode). Sub-mesh zigzags in the carried data
    /// couple to the kernel's anti-diffusive band and must not accumulate;
    /// the filter is exactly neutral on data that is linear along the mesh.
    #[serde(default = "default_filter")]
    pub sub_resolution_filter: f64,
}

fn default_filter() -> f64 {
    0.5
}

fn default_cadence() -> usize {
    1
}

fn default_mass_floor() -> f64 {
    1e-3
}

impl FlowConfig {
    #[inline]
    pub fn dt(&self) -> f64 {
        0.5_f64.powi(self.dyadic_level_k as i32)
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.epsilon > 0.0) {
            return Err("epsilon must be positive".into());
        }
        if self.ode_substeps == 0 {
            return Err("ode_substeps must be at least 1".into());
        }
        if !(self.t_final > 0.0) {
            return Err("t_final must be positive".into());
        }
        if self.snapshot_cadence == 0 {
            return Err("snapshot_cadence must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.sub_resolution_filter) {
            return Err("sub_resolution_filter must lie in [0, 1]".into());
        }
        Ok(())
    }
}

/// Scalar diagnostics recorded once per macro step.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagnosticsRow {
    pub time: f64,
    /// Total mass of the varifold.
    pub mass: f64,
    /// Sup norm of the angle lift.
    pub sup_beta: f64,
    /// Curvature norm in the mass-normalized measure,
    /// `|| H ||_{L2(V / mass)}`.
    pub h_l2_normalized: f64,
    /// Unnormalized `|| H ||_{L2(V)}`.
    pub h_l2_raw: f64,
    /// Largest particle distance from the origin.
    pub support_radius: f64,
    /// `- integral of (J D beta_eps) . H` against the varifold measure; the
    /// first-variation prediction for d(mass)/dt.
    pub dissipation: f64,
    /// Normalized defect of the angle evolution equation over the last
    /// macro step (zero for the initial row).
    pub angle_evolution_residual: f64,
    /// Running integral of `|| H ||^2_{L2(V)}`.
    pub energy_integral: f64,
    /// Largest omega-residual over all frames.
    pub omega_residual_max: f64,
}

/// Varifold + time + lift + diagnostics of one flow instant.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub varifold: DiscreteVarifold,
    pub time: f64,
    pub lift: AngleLift,
    pub diagnostics: DiagnosticsRow,
}

/// Why a run stopped.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Termination {
    TFinal,
    MassFloor,
    CflViolation { step: usize, max_speed: f64 },
    StepFailed { step: usize, message: String },
}

impl Termination {
    pub fn label(&self) -> &'static str {
        match self {
            Termination::TFinal => "t_final",
            Termination::MassFloor => "mass_floor",
            Termination::CflViolation { .. } => "cfl_violation",
            Termination::StepFailed { .. } => "step_failed",
        }
    }
}

/// The recorded output of one flow run: snapshots at the configured cadence
/// plus per-step diagnostics.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshots: Vec<FlowState>,
    pub diagnostics: Vec<DiagnosticsRow>,
    pub config: FlowConfig,
    pub scenario_id: String,
    pub termination: Termination,
    /// True when every independent mesh cycle of the initial varifold had
    /// zero winding.
    pub zero_maslov_verified: bool,
}

impl Trajectory {
    pub fn final_state(&self) -> &FlowState {
        self.snapshots.last().expect("trajectory has states")
    }
}

/// The hamiltonian field `x -> J D beta_eps(x)` of a frozen state, with
/// analytic jacobian `J D^2 beta_eps`.
pub struct HamiltonianField<'a> {
    field: &'a Mollification<'a>,
    lift: &'a [f64],
    j: ComplexStructure,
}

impl<'a> HamiltonianField<'a> {
    pub fn new(field: &'a Mollification<'a>, lift: &'a [f64]) -> Self {
        let j = ComplexStructure::new(field.varifold().n());
        HamiltonianField { field, lift, j }
    }
}

impl crate::geometry::AmbientField for HamiltonianField<'_> {
    fn sample(&self, x: &DVector<f64>) -> VectorFieldSample {
        let jet = self.field.angle_jet(self.lift, x);
        VectorFieldSample {
            value: self.j.apply(&jet.gradient),
            jacobian: self.j.apply_matrix(&jet.hessian),
        }
    }
}

/// Curvature estimate used by flow diagnostics: circumcircle on meshed
/// curves, angle gradient otherwise.
fn best_curvature(
    v: &DiscreteVarifold,
    lift: &AngleLift,
    field: &Mollification<'_>,
) -> Result<Vec<DVector<f64>>, VarifoldError> {
    if v.n() == 1 && v.has_mesh() {
        mean_curvature_estimate(v, CurvatureMethod::Frenet)
    } else {
        let j = ComplexStructure::new(v.n());
        Ok(v.particles()
            .iter()
            .map(|p| {
                let grad = field.angle_gradient(&lift.beta, &p.position);
                j.apply(&p.frame.project(&grad))
            })
            .collect())
    }
}

fn compute_diagnostics(
    v: &DiscreteVarifold,
    lift: &AngleLift,
    moll: &Mollifier,
    time: f64,
    angle_evolution_residual: f64,
    prev_energy: f64,
    dt_for_energy: f64,
) -> Result<DiagnosticsRow, FlowError> {
    let mass = v.total_mass();
    let field = Mollification::new(v, moll);
    let j = ComplexStructure::new(v.n());
    let h = best_curvature(v, lift, &field)?;
    let mut h2 = 0.0;
    let mut dissipation = 0.0;
    let mut omega_max = 0.0_f64;
    for (i, p) in v.particles().iter().enumerate() {
        let m = p.mass();
        h2 += m * h[i].norm_squared();
        let velocity = j.apply(&field.angle_gradient(&lift.beta, &p.position));
        dissipation -= m * velocity.dot(&h[i]);
        omega_max = omega_max.max(omega_residual(&p.frame)?);
    }
    let h_l2_raw = h2.sqrt();
    let h_l2_normalized = if mass > 0.0 { (h2 / mass).sqrt() } else { 0.0 };
    Ok(DiagnosticsRow {
        time,
        mass,
        sup_beta: lift.sup_beta(),
        h_l2_normalized,
        h_l2_raw,
        support_radius: v.support_radius(),
        dissipation,
        angle_evolution_residual,
        energy_integral: prev_energy + dt_for_energy * h2,
        omega_residual_max: omega_max,
    })
}

impl FlowState {
    /// Initial state of a run: unwraps the angle and records diagnostics.
    pub fn initial(varifold: DiscreteVarifold, moll: &Mollifier) -> Result<Self, FlowError> {
        let lift = lift_angle(&varifold).map_err(FlowError::InitialNotZeroMaslov)?;
        let diagnostics = compute_diagnostics(&varifold, &lift, moll, 0.0, 0.0, 0.0, 0.0)?;
        Ok(FlowState {
            varifold,
            time: 0.0,
            lift,
            diagnostics,
        })
    }
}

/// Trace of an ambient operator restricted to the plane spanned by the
/// (not yet orthonormal) columns of `frame`.
fn trace_on_span(hessian: &DMatrix<f64>, frame: &DMatrix<f64>) -> f64 {
    match crate::geometry::LagrangianFrame::from_matrix(frame.clone()) {
        Ok(f) => f.trace_restricted(hessian),
        Err(_) => 0.0,
    }
}

/// Integrate one particle through the frozen field: position, monodromy and
/// the material angle together.
///
/// The angle obeys the first-variation identity
/// `d beta / dt = tr_S D^2 beta_eps` along the hamiltonian trajectory, with
/// the trace over the transported plane. Carrying beta as material data
/// keeps the angle field smooth: re-deriving it from the transported frames
/// every step would feed sub-kernel-scale frame noise straight back into
/// the hamiltonian, which is anti-diffusive at wavelengths just below the
/// mollification scale.
fn integrate_particle(
    field: &Mollification<'_>,
    lift: &[f64],
    j: &ComplexStructure,
    z0: &DVector<f64>,
    frame0: &DMatrix<f64>,
    beta0: f64,
    dt: f64,
    substeps: usize,
    integrator: Integrator,
) -> (DVector<f64>, DMatrix<f64>, f64) {
    let dim = z0.len();
    let h = dt / substeps as f64;
    let mut z = z0.clone();
    let mut m = DMatrix::<f64>::identity(dim, dim);
    let mut beta = beta0;
    let eval = |z: &DVector<f64>, m: &DMatrix<f64>| -> (DVector<f64>, DMatrix<f64>, f64) {
        let jet = field.angle_jet(lift, z);
        let span = m * frame0;
        let dbeta = trace_on_span(&jet.hessian, &span);
        (j.apply(&jet.gradient), j.apply_matrix(&jet.hessian), dbeta)
    };
    for _ in 0..substeps {
        match integrator {
            Integrator::ExplicitEuler => {
                let (v, a, db) = eval(&z, &m);
                m = &m + (&a * &m) * h;
                z += v * h;
                beta += db * h;
            }
            Integrator::Rk4 => {
                let (k1z, a1, k1b) = eval(&z, &m);
                let k1m = &a1 * &m;
                let z2 = &z + &k1z * (0.5 * h);
                let m2 = &m + &k1m * (0.5 * h);
                let (k2z, a2, k2b) = eval(&z2, &m2);
                let k2m = &a2 * &m2;
                let z3 = &z + &k2z * (0.5 * h);
                let m3 = &m + &k2m * (0.5 * h);
                let (k3z, a3, k3b) = eval(&z3, &m3);
                let k3m = &a3 * &m3;
                let z4 = &z + &k3z * h;
                let m4 = &m + &k3m * h;
                let (k4z, a4, k4b) = eval(&z4, &m4);
                let k4m = &a4 * &m4;
                z += (k1z + k2z * 2.0 + k3z * 2.0 + k4z) * (h / 6.0);
                m += (k1m + k2m * 2.0 + k3m * 2.0 + k4m) * (h / 6.0);
                beta += (k1b + 2.0 * k2b + 2.0 * k3b + k4b) * (h / 6.0);
            }
        }
    }
    (z, m, beta)
}

/// Advance one macro step of length `2^-k`, freezing the mollified angle at
/// the step start.
pub fn flow_step(
    state: &FlowState,
    config: &FlowConfig,
    moll: &Mollifier,
) -> Result<FlowState, FlowError> {
    let v = &state.varifold;
    let dt = config.dt();
    let j = ComplexStructure::new(v.n());
    let field = Mollification::new(v, moll);
    let lift = &state.lift.beta;

    // CFL-style sanity bound against the current mesh resolution
    let mut max_speed = 0.0_f64;
    for p in v.particles() {
        let g = field.angle_gradient(lift, &p.position);
        max_speed = max_speed.max(g.norm());
    }
    let h_max = v.h_max();
    if h_max > 0.0 && dt * max_speed >= h_max {
        return Err(FlowError::CflViolation {
            dt,
            max_speed,
            h_max,
        });
    }

    // transport particles, frames, weights and the material angle
    let mut new_particles = Vec::with_capacity(v.len());
    let mut new_beta = Vec::with_capacity(v.len());
    for (i, p) in v.particles().iter().enumerate() {
        let (z, monodromy, beta) = integrate_particle(
            &field,
            lift,
            &j,
            &p.position,
            p.frame.matrix(),
            state.lift.beta[i],
            dt,
            config.ode_substeps,
            config.integrator,
        );
        // weight multiplier from the raw image volume; the stored frame is
        // the complex orthonormalization of the image, which projects the
        // integrator's symplectic residual back onto lagrangian planes
        // without touching the angle
        let image = &monodromy * p.frame.matrix();
        let volume_factor = crate::geometry::parallelepiped_volume(&image);
        let frame = crate::geometry::lagrangian_orthonormalize(&image)?
            .with_orientation(p.frame.orientation());
        new_particles.push(crate::varifold::Particle {
            position: z,
            frame,
            weight: p.weight * volume_factor,
            multiplicity: p.multiplicity,
        });
        new_beta.push(beta);
    }
    let edges = v.edges();
    let mut new_varifold = DiscreteVarifold::new(v.n(), new_particles, &edges)?;
    apply_mesh_filter(&mut new_varifold, &mut new_beta, config.sub_resolution_filter);

    let new_lift = if config.relift_each_step {
        let mut relift = lift_angle(&new_varifold)?;
        // shift each mesh component by the 2 pi multiple that matches the
        // transported branch at the component's first particle
        let mut component_offset: std::collections::HashMap<usize, f64> =
            std::collections::HashMap::new();
        for i in 0..new_varifold.len() {
            let c = relift.components[i];
            component_offset.entry(c).or_insert_with(|| {
                let d = new_beta[i] - relift.beta[i];
                2.0 * std::f64::consts::PI * (d / (2.0 * std::f64::consts::PI)).round()
            });
        }
        for i in 0..new_varifold.len() {
            relift.beta[i] += component_offset[&relift.components[i]];
        }
        relift
    } else {
        let mut lift = state.lift.clone();
        lift.beta = std::mem::take(&mut new_beta);
        lift
    };

    let time = state.time + dt;
    let residual = residual_with_field(state, &field, &new_lift.beta, dt);
    let diagnostics = compute_diagnostics(
        &new_varifold,
        &new_lift,
        moll,
        time,
        residual,
        state.diagnostics.energy_integral,
        dt,
    )?;
    Ok(FlowState {
        varifold: new_varifold,
        time,
        lift: new_lift,
        diagnostics,
    })
}

/// One pass of the conservative mesh-scale filter on the carried scalar
/// data: every regular vertex (2 mesh neighbours on curves, 4 on quad
/// grids) moves toward the mean of its neighbours. Total mass is conserved
/// exactly; data that is linear along the mesh is a fixed point. Nothing
/// geometric (positions, frames) is touched.
fn apply_mesh_filter(v: &mut DiscreteVarifold, beta: &mut [f64], gamma: f64) {
    // two passes: the anti-diffusive band sits between the mesh scale and
    // the kernel scale, and drifts toward longer mesh wavelengths as a
    // shrinking curve carries its mesh with it
    for _ in 0..2 {
        filter_pass(v, beta, gamma);
    }
}

fn filter_pass(v: &mut DiscreteVarifold, beta: &mut [f64], gamma: f64) {
    if gamma == 0.0 || !v.has_mesh() {
        return;
    }
    let regular = if v.n() == 1 { 2 } else { 4 };
    let m = v.len();
    let mut new_beta = beta.to_vec();
    let mut delta_w = vec![0.0_f64; m];
    for i in 0..m {
        let nbrs = &v.adjacency()[i];
        if nbrs.len() != regular {
            continue;
        }
        if nbrs.iter().any(|&j| v.adjacency()[j].len() != regular) {
            continue;
        }
        // branch-aware average: a lift seam inside the stencil must not
        // contaminate the mean
        let mut beta_delta = 0.0;
        for &j in nbrs {
            beta_delta += crate::geometry::wrap_angle(beta[j] - beta[i]);
        }
        beta_delta /= nbrs.len() as f64;
        new_beta[i] = beta[i] + gamma * beta_delta;
        // symmetric pairwise exchange keeps the total exactly conserved
        let wi = v.particle(i).weight;
        for &j in nbrs {
            let flux = gamma / nbrs.len() as f64 * (v.particle(j).weight - wi);
            delta_w[i] += flux;
            delta_w[j] -= flux;
        }
    }
    beta.copy_from_slice(&new_beta);
    for (i, p) in v.particles_mut().iter_mut().enumerate() {
        p.weight += 0.5 * delta_w[i];
    }
}

/// Normalized L2 defect of the angle evolution equation over one macro
/// step: the material angle increment per unit time against the tangential
/// divergence `tr_S D^2 beta_eps` of the frozen field at the step start.
pub fn angle_evolution_residual(before: &FlowState, after: &FlowState, moll: &Mollifier) -> f64 {
    residual_impl(before, &after.lift.beta, after.time - before.time, moll)
}

fn residual_impl(before: &FlowState, beta_after: &[f64], dt: f64, moll: &Mollifier) -> f64 {
    let field = Mollification::new(&before.varifold, moll);
    residual_with_field(before, &field, beta_after, dt)
}

fn residual_with_field(
    before: &FlowState,
    field: &Mollification<'_>,
    beta_after: &[f64],
    dt: f64,
) -> f64 {
    let v = &before.varifold;
    let mut num2 = 0.0;
    let mut den2 = 0.0;
    for (i, p) in v.particles().iter().enumerate() {
        let jet = field.angle_jet(&before.lift.beta, &p.position);
        let div = p.frame.trace_restricted(&jet.hessian);
        let rate = (beta_after[i] - before.lift.beta[i]) / dt;
        num2 += p.mass() * (rate - div).powi(2);
        den2 += p.mass() * div * div;
    }
    num2.sqrt() / (den2.sqrt() + 1e-12)
}

/// Run the flow from an initial varifold until `t_final` or the mass floor.
///
/// The initial angle must unwrap into a locally continuous lift; nonzero
/// windings on mesh cycles are recorded on the trajectory (the classical
/// examples with nonzero Maslov index remain flowable, their lift just
/// carries one branch seam). Errors after the first state truncate the
/// trajectory with a recorded termination reason instead of failing.
pub fn run_flow(
    initial: DiscreteVarifold,
    config: &FlowConfig,
    scenario_id: &str,
) -> Result<Trajectory, FlowError> {
    config.validate().map_err(FlowError::Config)?;
    let moll = Mollifier::new(config.epsilon, initial.n());
    let state0 = FlowState::initial(initial, &moll)?;
    let zero_maslov_verified = state0.lift.is_consistent();
    let mass0 = state0.varifold.total_mass();
    let floor = config.mass_floor_fraction * mass0;
    let dt = config.dt();
    let total_steps = (config.t_final / dt).ceil() as usize;

    let mut diagnostics = vec![state0.diagnostics.clone()];
    let mut snapshots = vec![state0.clone()];
    let mut current = state0;
    let mut termination = Termination::TFinal;

    for step in 1..=total_steps {
        match flow_step(&current, config, &moll) {
            Ok(next) => {
                diagnostics.push(next.diagnostics.clone());
                if step % config.snapshot_cadence == 0 || step == total_steps {
                    snapshots.push(next.clone());
                }
                let mass = next.diagnostics.mass;
                current = next;
                if mass < floor {
                    termination = Termination::MassFloor;
                    break;
                }
            }
            Err(FlowError::CflViolation { max_speed, .. }) => {
                termination = Termination::CflViolation { step, max_speed };
                break;
            }
            Err(e) => {
                termination = Termination::StepFailed {
                    step,
                    message: e.to_string(),
                };
                break;
            }
        }
    }
    // make sure the last computed state is snapshotted
    if snapshots
        .last()
        .map(|s| s.time != current.time)
        .unwrap_or(true)
    {
        snapshots.push(current);
    }
    Ok(Trajectory {
        snapshots,
        diagnostics,
        config: config.clone(),
        scenario_id: scenario_id.to_string(),
        termination,
        zero_maslov_verified,
    })
}

/// Report of the collapse bound `support_radius(t) <= sqrt(R^2 - 2nt) + slack`.
#[derive(Debug, Clone, Serialize)]
pub struct CollapseReport {
    pub initial_radius: f64,
    pub slack: f64,
    pub max_violation: f64,
    pub ok: bool,
    pub rows: Vec<CollapseRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CollapseRow {
    pub time: f64,
    pub support_radius: f64,
    pub bound: f64,
}

/// Check every recorded diagnostics row against the collapse bound.
pub fn collapse_check(trajectory: &Trajectory, slack: f64) -> CollapseReport {
    let n = trajectory
        .snapshots
        .first()
        .map(|s| s.varifold.n())
        .unwrap_or(1) as f64;
    let r0 = trajectory
        .diagnostics
        .first()
        .map(|d| d.support_radius)
        .unwrap_or(0.0);
    let mut rows = Vec::with_capacity(trajectory.diagnostics.len());
    let mut max_violation = f64::NEG_INFINITY;
    for d in &trajectory.diagnostics {
        let bound = (r0 * r0 - 2.0 * n * d.time).max(0.0).sqrt() + slack;
        max_violation = max_violation.max(d.support_radius - bound);
        rows.push(CollapseRow {
            time: d.time,
            support_radius: d.support_radius,
            bound,
        });
    }
    CollapseReport {
        initial_radius: r0,
        slack,
        max_violation,
        ok: max_violation <= 0.0,
        rows,
    }
}

/// Report of the energy inequality
/// `integral of ||H||^2_{L2} dt <= (4 / alpha) * mass(0)^2` with
/// `alpha = min recorded mass`.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyReport {
    pub energy_integral: f64,
    pub alpha: f64,
    pub bound: f64,
    pub ok: bool,
}

pub fn energy_bound_check(trajectory: &Trajectory) -> EnergyReport {
    let mass0 = trajectory
        .diagnostics
        .first()
        .map(|d| d.mass)
        .unwrap_or(0.0);
    let alpha = trajectory
        .diagnostics
        .iter()
        .map(|d| d.mass)
        .fold(f64::INFINITY, f64::min);
    let energy = trajectory
        .diagnostics
        .last()
        .map(|d| d.energy_integral)
        .unwrap_or(0.0);
    let bound = if alpha > 0.0 {
        4.0 / alpha * mass0 * mass0
    } else {
        f64::INFINITY
    };
    EnergyReport {
        energy_integral: energy,
        alpha,
        bound,
        ok: energy <= bound,
    }
}
