//! Reaction-diffusion electrodeposition on evolving surfaces.
//!
//! The morphology `eta` drives the surface in its normal direction with speed
//! `kappa * eta` while `eta` and the surface chemistry `theta` react and
//! diffuse on it. Space is discretised with lumped piecewise-linear surface
//! finite elements on a moving triangulation and time with an IMEX Euler
//! scheme (explicit motion and reaction, implicit diffusion).
//!
//! Setting `kappa = 0` recovers the fixed-surface model on flat or curved
//! domains.

pub mod assembly;
pub mod diagnostics;
pub mod error;
pub mod io;
pub mod kinetics;
pub mod mesh;
pub mod meshgen;
pub mod solver;
pub mod sparse;
pub mod stepper;
pub mod verify;

pub use assembly::{assemble_lumped_mass, assemble_stiffness, Assembler, LumpedMass, StiffnessMatrix};
pub use diagnostics::{area_growth_fit, increment_norm, mass_integral, thickness_function, DiagnosticsSeries};
pub use error::{Error, Result};
pub use kinetics::{initial_condition, FieldPair, KineticsParams, NoReaction, Perturbation, Reaction};
pub use mesh::{compute_node_normals, mesh_quality, NodeNormals, Point, QualityReport, SurfaceMesh};
pub use meshgen::{generate_icosphere, generate_square, DomainKind, DomainSpec};
pub use solver::{solve_spd, solve_spd_from};
pub use stepper::{run, step, SimState, SolverConfig, StationarySolver, StepOutcome, Stepper, Termination};
