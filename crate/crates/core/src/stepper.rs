//! Modified IMEX Euler time stepping on an evolving surface.
//!
//! One step, from `(x_n, a_n, b_n)`:
//!
//! 1. move nodes explicitly: `x_{n+1} = x_n + tau * kappa * a_n * n_n`;
//! 2. assemble `M_n` on `x_n` and `M_{n+1}`, `K_{n+1}` on `x_{n+1}`;
//! 3. `(M_n / tau + K_{n+1}) a_{n+1} = M_n a_n / tau + rho M_n f(a_n, b_n)`;
//! 4. `(M_{n+1} / tau + d K_{n+1}) b_{n+1} = M_n b_n / tau + rho M_n g(a_n, b_n)`.
//!
//! The morphology `a` keeps the old mass on both sides, so it is not diluted
//! by area growth; the chemistry `b` is transported with the surface and its
//! lumped integral is conserved when `g = 0`.

use crate::assembly::{Assembler, LumpedMass};
use crate::diagnostics::{DiagnosticsSeries, Sample};
use crate::error::{Error, Result};
use crate::kinetics::{eval_sources, FieldPair, KineticsParams, Reaction};
use crate::mesh::{compute_node_normals, mesh_quality, Point, QualityReport, SurfaceMesh};
use crate::solver::solve_spd_from;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone)]
pub struct SimState {
    pub time: f64,
    pub step_index: usize,
    pub mesh: SurfaceMesh,
    pub eta: Vec<f64>,
    pub theta: Vec<f64>,
    /// Mean triangle area of the initial mesh; the degeneracy threshold is relative to it.
    pub reference_area: f64,
}

impl SimState {
    pub fn new(mesh: SurfaceMesh, fields: FieldPair) -> Result<Self> {
        let n = mesh.node_count();
        for len in [fields.eta.len(), fields.theta.len()] {
            if len != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    actual: len,
                });
            }
        }
        check_finite("eta", &fields.eta)?;
        check_finite("theta", &fields.theta)?;
        Ok(SimState {
            time: 0.0,
            step_index: 0,
            reference_area: mesh.mean_triangle_area(),
            mesh,
            eta: fields.eta,
            theta: fields.theta,
        })
    }
}

fn check_finite(field: &'static str, values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(node) => Err(Error::BlowUp { field, node }),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub tau: f64,
    pub final_time: f64,
    pub cg_tol: f64,
    pub cg_max_iter: usize,
    /// Stop when a triangle area falls below this fraction of the initial mean area.
    pub min_area_ratio: f64,
    /// Stop when any interior angle falls below this many degrees.
    pub min_angle_deg: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tau: 1e-2,
            final_time: 1.0,
            cg_tol: 1e-10,
            cg_max_iter: 10_000,
            min_area_ratio: 1e-12,
            min_angle_deg: 0.5,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let invalid = |name, reason: String| Err(Error::InvalidParameter { name, reason });
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return invalid("solver.tau", format!("must be positive, got {}", self.tau));
        }
        if !(self.cg_tol > 0.0) {
            return invalid("solver.cg_tol", format!("must be positive, got {}", self.cg_tol));
        }
        if self.cg_max_iter == 0 {
            return invalid("solver.cg_maxiter", "must be at least 1".into());
        }
        if !(self.final_time >= 0.0 && self.final_time.is_finite()) {
            return invalid(
                "solver.T",
                format!("must be non-negative, got {}", self.final_time),
            );
        }
        if !(self.min_area_ratio >= 0.0) || !(self.min_angle_deg >= 0.0) {
            return invalid(
                "solver.min_area_ratio",
                "degeneracy thresholds must be non-negative".into(),
            );
        }
        Ok(())
    }

    /// Number of steps to reach `final_time`, `ceil(T / tau)`.
    pub fn step_count(&self) -> usize {
        let ratio = self.final_time / self.tau;
        // absorb representation error such as 12 / 0.01 = 1200.0000000000002
        (ratio - 1e-9 * ratio.max(1.0)).ceil().max(0.0) as usize
    }
}

#[derive(Debug, Clone)]
pub enum StepOutcome {
    Advanced(SimState),
    /// The displaced mesh crossed a degeneracy threshold; the input state is
    /// the last valid one.
    Degenerate(QualityReport),
}

/// Holds the sparsity pattern and system buffers for one connectivity.
#[derive(Debug, Clone)]
pub struct Stepper {
    assembler: Assembler,
    system: CsrMatrix,
}

impl Stepper {
    pub fn new(mesh: &SurfaceMesh) -> Self {
        let assembler = Assembler::new(mesh);
        let system = CsrMatrix::zeros(assembler.pattern().clone());
        Stepper { assembler, system }
    }

    pub fn step<R: Reaction + ?Sized>(
        &mut self,
        state: &SimState,
        params: &KineticsParams,
        reaction: &R,
        cfg: &SolverConfig,
    ) -> Result<StepOutcome> {
        let tau = cfg.tau;
        let mesh_n = &state.mesh;

        // (1) explicit normal motion
        let mesh_next = if params.kappa == 0.0 {
            mesh_n.clone()
        } else {
            let normals = compute_node_normals(mesh_n)?;
            let displacement: Vec<Point> = normals
                .as_slice()
                .iter()
                .zip(&state.eta)
                .map(|(normal, &a)| normal * (tau * params.kappa * a))
                .collect();
            mesh_n.displaced(&displacement)?
        };
        let quality = mesh_quality(&mesh_next);
        if quality.min_area < cfg.min_area_ratio * state.reference_area
            || quality.min_angle_deg < cfg.min_angle_deg
        {
            return Ok(StepOutcome::Degenerate(quality));
        }

        // (2) matrices
        let mass_old = self.assembler.lumped_mass(mesh_n)?;
        let mass_new = self.assembler.lumped_mass(&mesh_next)?;
        let stiffness = self.assembler.stiffness(&mesh_next)?;

        let (f, g) = eval_sources(reaction, &state.eta, &state.theta);

        // (3) morphology, old mass on both sides
        let rhs = explicit_rhs(&mass_old, &state.eta, &f, tau, params.rho);
        check_finite("eta", &rhs)?;
        self.assembler
            .system_matrix_into(&mass_old, &stiffness, tau, 1.0, &mut self.system);
        let mut eta = state.eta.clone();
        solve_spd_from(&self.system, &rhs, &mut eta, cfg.cg_tol, cfg.cg_max_iter)?;

        // (4) chemistry, new mass on the left
        let rhs = explicit_rhs(&mass_old, &state.theta, &g, tau, params.rho);
        check_finite("theta", &rhs)?;
        self.assembler.system_matrix_into(
            &mass_new,
            &stiffness,
            tau,
            params.diffusivity,
            &mut self.system,
        );
        let mut theta = state.theta.clone();
        solve_spd_from(&self.system, &rhs, &mut theta, cfg.cg_tol, cfg.cg_max_iter)?;

        check_finite("eta", &eta)?;
        check_finite("theta", &theta)?;

        Ok(StepOutcome::Advanced(SimState {
            time: (state.step_index + 1) as f64 * tau,
            step_index: state.step_index + 1,
            mesh: mesh_next,
            eta,
            theta,
            reference_area: state.reference_area,
        }))
    }
}

/// `M u / tau + rho M s`, evaluated nodewise.
pub(crate) fn explicit_rhs(
    mass: &LumpedMass,
    u: &[f64],
    source: &[f64],
    tau: f64,
    rho: f64,
) -> Vec<f64> {
    mass.diag()
        .iter()
        .zip(u)
        .zip(source)
        .map(|((&m, &ui), &si)| m * ui / tau + rho * m * si)
        .collect()
}

/// One step with the DIB kinetics of `params`. Builds a fresh [`Stepper`];
/// loops should keep one instead.
pub fn step(state: &SimState, params: &KineticsParams, cfg: &SolverConfig) -> Result<StepOutcome> {
    Stepper::new(&state.mesh).step(state, params, params, cfg)
}

/// Callback invoked by [`run`] on every recorded sample.
pub trait Observer {
    fn observe(&mut self, state: &SimState, sample: &Sample) -> Result<()>;

    /// Called once with the last valid state.
    fn finish(&mut self, _state: &SimState, _termination: &Termination) -> Result<()> {
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    Completed,
    Degenerate(QualityReport),
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub state: SimState,
    pub termination: Termination,
    pub series: DiagnosticsSeries,
}

/// Steps until `cfg.final_time` or a degeneracy stop, recording a diagnostics
/// sample every `stride` steps and at the last valid state.
pub fn run<R: Reaction + ?Sized>(
    initial: SimState,
    params: &KineticsParams,
    reaction: &R,
    cfg: &SolverConfig,
    stride: usize,
    observers: &mut [&mut dyn Observer],
) -> Result<RunOutcome> {
    cfg.validate()?;
    params.validate()?;
    let stride = stride.max(1);
    let steps = cfg.step_count();
    let mut stepper = Stepper::new(&initial.mesh);
    let mut series = DiagnosticsSeries::default();
    let mut state = initial;
    let mut previous: Option<SimState> = None;
    let mut sampled = true;
    let mut termination = Termination::Completed;

    for k in 0..steps {
        let outcome = stepper
            .step(&state, params, reaction, cfg)
            .map_err(|e| e.at_step(state.step_index + 1))?;
        let next = match outcome {
            StepOutcome::Advanced(next) => next,
            StepOutcome::Degenerate(quality) => {
                termination = Termination::Degenerate(quality);
                // Record the last valid state unless it was just sampled.
                if let (Some(prev), false) = (&previous, sampled) {
                    let sample = Sample::record(prev, &state)?;
                    for observer in observers.iter_mut() {
                        observer.observe(&state, &sample)?;
                    }
                    series.push(sample);
                }
                break;
            }
        };
        sampled = next.step_index % stride == 0 || k + 1 == steps;
        if sampled {
            let sample = Sample::record(&state, &next)?;
            for observer in observers.iter_mut() {
                observer.observe(&next, &sample)?;
            }
            series.push(sample);
        }
        previous = Some(std::mem::replace(&mut state, next));
    }
    for observer in observers.iter_mut() {
        observer.finish(&state, &termination)?;
    }
    Ok(RunOutcome {
        state,
        termination,
        series,
    })
}

/// Fixed-surface solver: assembles `M` and `K` once and reuses both system
/// matrices for every step. Only valid for `kappa = 0`.
#[derive(Debug)]
pub struct StationarySolver {
    mass: LumpedMass,
    eta_system: CsrMatrix,
    theta_system: CsrMatrix,
    params: KineticsParams,
    cfg: SolverConfig,
}

impl StationarySolver {
    pub fn new(mesh: &SurfaceMesh, params: &KineticsParams, cfg: &SolverConfig) -> Result<Self> {
        if !params.is_stationary() {
            return Err(Error::InvalidParameter {
                name: "kinetics.kappa",
                reason: "stationary solver requires kappa = 0".into(),
            });
        }
        cfg.validate()?;
        params.validate()?;
        let assembler = Assembler::new(mesh);
        let mass = assembler.lumped_mass(mesh)?;
        let stiffness = assembler.stiffness(mesh)?;
        let eta_system = assembler.system_matrix(&mass, &stiffness, cfg.tau, 1.0);
        let theta_system = assembler.system_matrix(&mass, &stiffness, cfg.tau, params.diffusivity);
        Ok(StationarySolver {
            mass,
            eta_system,
            theta_system,
            params: *params,
            cfg: *cfg,
        })
    }

    pub fn mass(&self) -> &LumpedMass {
        &self.mass
    }

    /// Advances `fields` by one step in place.
    pub fn advance<R: Reaction + ?Sized>(&self, fields: &mut FieldPair, reaction: &R) -> Result<()> {
        let (tau, rho) = (self.cfg.tau, self.params.rho);
        let (f, g) = eval_sources(reaction, &fields.eta, &fields.theta);
        let rhs_eta = explicit_rhs(&self.mass, &fields.eta, &f, tau, rho);
        let rhs_theta = explicit_rhs(&self.mass, &fields.theta, &g, tau, rho);
        check_finite("eta", &rhs_eta)?;
        check_finite("theta", &rhs_theta)?;
        let (tol, max_iter) = (self.cfg.cg_tol, self.cfg.cg_max_iter);
        solve_spd_from(&self.eta_system, &rhs_eta, &mut fields.eta, tol, max_iter)?;
        solve_spd_from(&self.theta_system, &rhs_theta, &mut fields.theta, tol, max_iter)?;
        check_finite("eta", &fields.eta)?;
        check_finite("theta", &fields.theta)
    }

    /// Runs to `final_time`, calling `visit` after every step with the step
    /// index and the current fields.
    pub fn run<R, F>(&self, mut fields: FieldPair, reaction: &R, mut visit: F) -> Result<FieldPair>
    where
        R: Reaction + ?Sized,
        F: FnMut(usize, &FieldPair),
    {
        for k in 1..=self.cfg.step_count() {
            self.advance(&mut fields, reaction).map_err(|e| e.at_step(k))?;
            visit(k, &fields);
        }
        Ok(fields)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetics::NoReaction;
    use crate::meshgen::{generate_icosphere, generate_square};
    use approx::assert_relative_eq;

    fn transport(kappa: f64) -> KineticsParams {
        KineticsParams::standard(30.0, 3.0).unwrap().with_kappa(kappa)
    }

    fn advance(state: &SimState, params: &KineticsParams, cfg: &SolverConfig) -> SimState {
        match Stepper::new(&state.mesh)
            .step(state, params, &NoReaction, cfg)
            .unwrap()
        {
            StepOutcome::Advanced(next) => next,
            StepOutcome::Degenerate(q) => panic!("unexpected degeneracy {q:?}"),
        }
    }

    #[test]
    fn constants_are_preserved_without_motion() {
        let mesh = generate_square(1.0, 8);
        let n = mesh.node_count();
        let state = SimState::new(mesh, FieldPair::uniform(n, 0.3, 0.3)).unwrap();
        let next = advance(&state, &transport(0.0), &SolverConfig::default());
        for (&a, &b) in next.eta.iter().zip(&next.theta) {
            assert_relative_eq!(a, 0.3, max_relative = 1e-10);
            assert_relative_eq!(b, 0.3, max_relative = 1e-10);
        }
        assert_eq!(next.step_index, 1);
        assert_relative_eq!(next.time, 0.01);
    }

    #[test]
    fn sphere_moves_outward_by_tau_kappa_eta() {
        let mesh = generate_icosphere(2.0, 4);
        let n = mesh.node_count();
        let eta0 = 0.7;
        let state = SimState::new(mesh, FieldPair::uniform(n, eta0, 0.5)).unwrap();
        let cfg = SolverConfig::default();
        let next = advance(&state, &transport(0.2), &cfg);
        let expected = 2.0 + cfg.tau * 0.2 * eta0;
        for p in next.mesh.nodes() {
            assert!((p.norm() - expected).abs() < 1e-6);
        }
    }

    #[test]
    fn theta_mass_is_conserved_under_motion() {
        let mesh = generate_icosphere(1.0, 3);
        let n = mesh.node_count();
        let eta: Vec<f64> = mesh.nodes().iter().map(|p| 1.0 + 0.5 * p.x).collect();
        let theta: Vec<f64> = mesh.nodes().iter().map(|p| 0.5 + 0.3 * p.z).collect();
        let state = SimState::new(mesh, FieldPair { eta, theta }).unwrap();
        let cfg = SolverConfig::default();
        let before: f64 = crate::assembly::assemble_lumped_mass(&state.mesh)
            .unwrap()
            .diag()
            .iter()
            .zip(&state.theta)
            .map(|(m, b)| m * b)
            .sum();
        let next = advance(&state, &transport(0.2), &cfg);
        let after: f64 = crate::assembly::assemble_lumped_mass(&next.mesh)
            .unwrap()
            .diag()
            .iter()
            .zip(&next.theta)
            .map(|(m, b)| m * b)
            .sum();
        assert!(((after - before) / before).abs() < 1e-9);
        assert!(next.mesh.surface_area() > state.mesh.surface_area());
        assert_eq!(n, next.eta.len());
    }

    #[test]
    fn degeneracy_stop_preserves_state() {
        let mesh = generate_square(1.0, 4);
        let n = mesh.node_count();
        let state = SimState::new(mesh, FieldPair::uniform(n, 0.0, 0.5)).unwrap();
        let cfg = SolverConfig {
            min_angle_deg: 50.0,
            ..SolverConfig::default()
        };
        let outcome = Stepper::new(&state.mesh)
            .step(&state, &transport(0.2), &NoReaction, &cfg)
            .unwrap();
        assert!(matches!(outcome, StepOutcome::Degenerate(q) if (q.min_angle_deg - 45.0).abs() < 1e-9));
    }

    #[test]
    fn run_samples_last_state_before_degeneracy() {
        let mesh = generate_square(1.0, 4);
        let eta: Vec<f64> = mesh.nodes().iter().map(|p| 4.0 * p.x).collect();
        let theta = vec![0.5; eta.len()];
        let state = SimState::new(mesh, FieldPair { eta, theta }).unwrap();
        let cfg = SolverConfig {
            min_angle_deg: 44.0,
            ..SolverConfig::default()
        };
        let outcome = run(state, &transport(0.2), &NoReaction, &cfg, 1000, &mut []).unwrap();
        assert!(matches!(outcome.termination, Termination::Degenerate(_)));
        assert!(outcome.state.step_index > 1);
        let last = outcome.series.last().expect("last valid state is sampled");
        assert_eq!(last.step_index, outcome.state.step_index);
        assert_eq!(last.time, outcome.state.time);
    }

    #[test]
    fn blow_up_is_reported() {
        let mesh = generate_square(1.0, 4);
        let n = mesh.node_count();
        let mut fields = FieldPair::uniform(n, 0.0, 0.5);
        fields.eta[3] = 1e200;
        let state = SimState::new(mesh, fields).unwrap();
        let params = KineticsParams::standard(30.0, 3.0).unwrap().with_kappa(0.0);
        let err = step(&state, &params, &SolverConfig::default()).unwrap_err();
        assert!(matches!(err, Error::BlowUp { field: "eta", node: 3 }));
    }

    #[test]
    fn step_count_rounds_up() {
        let cfg = |t: f64, tau: f64| SolverConfig {
            final_time: t,
            tau,
            ..SolverConfig::default()
        };
        assert_eq!(cfg(12.0, 0.01).step_count(), 1200);
        assert_eq!(cfg(0.0, 0.01).step_count(), 0);
        assert_eq!(cfg(0.015, 0.01).step_count(), 2);
        assert_eq!(cfg(1.0, 0.1).step_count(), 10);
    }

    #[test]
    fn zero_final_time_returns_initial_state() {
        let mesh = generate_square(1.0, 2);
        let n = mesh.node_count();
        let state = SimState::new(mesh, FieldPair::uniform(n, 0.1, 0.5)).unwrap();
        let cfg = SolverConfig {
            final_time: 0.0,
            ..SolverConfig::default()
        };
        let out = run(state.clone(), &transport(0.2), &NoReaction, &cfg, 10, &mut []).unwrap();
        assert!(out.series.samples().is_empty());
        assert_eq!(out.state.eta, state.eta);
        assert_eq!(out.state.step_index, 0);
        assert_eq!(out.termination, Termination::Completed);
    }

    #[test]
    fn stationary_solver_rejects_motion() {
        let mesh = generate_square(1.0, 2);
        assert!(StationarySolver::new(&mesh, &transport(0.2), &SolverConfig::default()).is_err());
    }

    #[test]
    fn invalid_config() {
        let cfg = SolverConfig {
            tau: -1.0,
            ..SolverConfig::default()
        };
        assert!(matches!(
            cfg.validate(),
            Err(Error::InvalidParameter { name: "solver.tau", .. })
        ));
    }
}
