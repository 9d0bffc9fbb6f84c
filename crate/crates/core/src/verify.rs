//! Quick analytic self-checks of the discretisation, run by `esdib verify`.

use crate::assembly::{assemble_lumped_mass, assemble_stiffness};
use crate::diagnostics::mass_integral;
use crate::error::Result;
use crate::kinetics::{FieldPair, KineticsParams, NoReaction};
use crate::mesh::Point;
use crate::mesh::SurfaceMesh;
use crate::meshgen::generate_icosphere;
use crate::stepper::{SimState, SolverConfig, StationarySolver, StepOutcome, Stepper};

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, result: Result<(bool, String)>) -> Check {
    match result {
        Ok((passed, detail)) => Check {
            name,
            passed,
            detail,
        },
        Err(e) => Check {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn element_oracle() -> Result<(bool, String)> {
    let mesh = SurfaceMesh::new(
        vec![
            Point::new(0.0, 0.0, 0.0),
            Point::new(1.0, 0.0, 0.0),
            Point::new(0.0, 1.0, 0.0),
        ],
        vec![[0, 1, 2]],
    )?;
    let k = assemble_stiffness(&mesh)?.0.to_dense();
    let expected = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
    let k_err = (0..9)
        .map(|e| (k[e / 3][e % 3] - expected[e / 3][e % 3]).abs())
        .fold(0.0, f64::max);
    let m = assemble_lumped_mass(&mesh)?;
    let m_err = m
        .diag()
        .iter()
        .map(|d| (d - 1.0 / 6.0).abs())
        .fold(0.0, f64::max);
    Ok((
        k_err <= 1e-14 && m_err <= 1e-14,
        format!("stiffness error {k_err:e}, mass error {m_err:e}"),
    ))
}

fn sphere_area() -> Result<(bool, String)> {
    let area = generate_icosphere(1.0, 5).surface_area();
    let rel = (area - 4.0 * std::f64::consts::PI).abs() / (4.0 * std::f64::consts::PI);
    Ok((rel < 5e-4, format!("relative error {rel:e} at level 5")))
}

fn transport_params(kappa: f64) -> Result<KineticsParams> {
    Ok(KineticsParams::standard(30.0, 3.0)?.with_kappa(kappa))
}

fn advance(stepper: &mut Stepper, state: &SimState, p: &KineticsParams, cfg: &SolverConfig) -> Result<SimState> {
    match stepper.step(state, p, &NoReaction, cfg)? {
        StepOutcome::Advanced(next) => Ok(next),
        StepOutcome::Degenerate(q) => Err(crate::error::Error::Data(format!(
            "unexpected degeneracy stop: {q:?}"
        ))),
    }
}

/// Expanding sphere with `f = g = 0`: radius `1 + kappa t`, theta `1 / R^2`.
fn expanding_sphere() -> Result<(bool, String)> {
    let mesh = generate_icosphere(1.0, 3);
    let n = mesh.node_count();
    let p = transport_params(0.2)?;
    let cfg = SolverConfig::default();
    let mut state = SimState::new(mesh, FieldPair::uniform(n, 1.0, 1.0))?;
    let mut stepper = Stepper::new(&state.mesh);
    for _ in 0..100 {
        state = advance(&mut stepper, &state, &p, &cfg)?;
    }
    let radius = state.mesh.nodes().iter().map(|x| x.norm()).sum::<f64>() / n as f64;
    let theta = state.theta.iter().sum::<f64>() / n as f64;
    let r_err = (radius - 1.2).abs() / 1.2;
    let t_err = (theta - 1.0 / 1.44).abs() * 1.44;
    Ok((
        r_err < 0.01 && t_err < 0.02,
        format!("radius error {r_err:e}, theta error {t_err:e}"),
    ))
}

fn theta_mass_conservation() -> Result<(bool, String)> {
    let mesh = generate_icosphere(1.0, 3);
    let eta: Vec<f64> = mesh.nodes().iter().map(|x| 1.0 + 0.5 * x.x).collect();
    let theta: Vec<f64> = mesh.nodes().iter().map(|x| 0.5 + 0.2 * x.z).collect();
    let p = transport_params(0.2)?;
    let cfg = SolverConfig::default();
    let mut state = SimState::new(mesh, FieldPair { eta, theta })?;
    let initial = mass_integral(&assemble_lumped_mass(&state.mesh)?, &state.theta);
    let mut stepper = Stepper::new(&state.mesh);
    let mut drift: f64 = 0.0;
    for _ in 0..100 {
        state = advance(&mut stepper, &state, &p, &cfg)?;
        let mass = mass_integral(&assemble_lumped_mass(&state.mesh)?, &state.theta);
        drift = drift.max(((mass - initial) / initial).abs());
    }
    Ok((drift <= 1e-8, format!("max relative drift {drift:e} over 100 steps")))
}

/// theta_0 = z on the unit sphere decays like exp(-2 d t).
fn heat_decay() -> Result<(bool, String)> {
    let mesh = generate_icosphere(1.0, 3);
    let n = mesh.node_count();
    let p = transport_params(0.0)?;
    let cfg = SolverConfig {
        tau: 1e-3,
        final_time: 0.05,
        ..SolverConfig::default()
    };
    let z: Vec<f64> = mesh.nodes().iter().map(|x| x.z).collect();
    let solver = StationarySolver::new(&mesh, &p, &cfg)?;
    let mass = solver.mass().clone();
    let zz = mass_integral(&mass, &z.iter().map(|v| v * v).collect::<Vec<_>>());
    let coefficient =
        |theta: &[f64]| mass_integral(&mass, &theta.iter().zip(&z).map(|(a, b)| a * b).collect::<Vec<_>>()) / zz;
    let mut times = vec![0.0];
    let mut logs = vec![coefficient(&z).ln()];
    solver.run(
        FieldPair {
            eta: vec![0.0; n],
            theta: z.clone(),
        },
        &NoReaction,
        |k, fields| {
            times.push(k as f64 * cfg.tau);
            logs.push(coefficient(&fields.theta).ln());
        },
    )?;
    let rate = -(logs.last().unwrap() - logs[0]) / times.last().unwrap();
    let expected = 2.0 * p.diffusivity;
    let rel = (rate - expected).abs() / expected;
    Ok((rel < 0.05, format!("decay rate {rate:.4}, expected {expected}")))
}

pub fn run_checks() -> Vec<Check> {
    vec![
        check("element stiffness and mass", element_oracle()),
        check("icosphere area", sphere_area()),
        check("theta mass conservation", theta_mass_conservation()),
        check("expanding sphere", expanding_sphere()),
        check("spherical heat decay", heat_decay()),
    ]
}
