//! Particle-based simulation and analysis of mass-decreasing lagrangian
//! varifold flows in flat `C^n = R^{2n}`.
//!
//! A lagrangian varifold is represented as a weighted particle cloud with
//! oriented lagrangian tangent frames ([`varifold::DiscreteVarifold`]). The
//! lagrangian angle of each frame is the argument of the complex determinant
//! of the frame read in complex coordinates ([`geometry::lagrangian_angle`]);
//! mollifying its scalar lift against the varifold measure
//! ([`mollify::Mollification`]) produces a smooth ambient hamiltonian whose
//! flow moves the particles ([`flow::run_flow`]). Along the way the library
//! measures the quantities the theory controls: mass monotonicity, sup-angle
//! bounds, the collapse radius, the dissipation identity and the energy
//! inequality.
//!
//! A quick tour (mirrored in the book's introduction):
//!
//! ```
//! use lagflow::scenarios::{generate, ScenarioSpec};
//! use lagflow::flow::{run_flow, FlowConfig, Integrator};
//!
//! let scenario = generate(&ScenarioSpec::Circle { radius: 1.0, resolution: 64, spacing_modulation: 0.0 }).unwrap();
//! let config = FlowConfig {
//!     epsilon: 0.2,
//!     dyadic_level_k: 7,       // macro step 2^-7
//!     ode_substeps: 2,
//!     t_final: 0.1,
//!     integrator: Integrator::Rk4,
//!     relift_each_step: false,
//!     snapshot_cadence: 4,
//!     mass_floor_fraction: 1e-3,
//!     sub_resolution_filter: 0.5,
//! };
//! let trajectory = run_flow(scenario.varifold, &config, &scenario.id).unwrap();
//! let first = trajectory.diagnostics.first().unwrap();
//! let last = trajectory.diagnostics.last().unwrap();
//! assert!(last.mass < first.mass, "a circle loses mass under the flow");
//! ```

pub mod decomp;
pub mod flow;
pub mod geometry;
pub mod io;
pub mod maslov;
pub mod mollify;
pub mod scenarios;
pub mod varifold;

pub use flow::{run_flow, FlowConfig, Trajectory};
pub use geometry::{lagrangian_angle, LagrangianFrame};
pub use mollify::Mollifier;
pub use varifold::DiscreteVarifold;
