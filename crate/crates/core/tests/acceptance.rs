//! Acceptance suite. Every test prints one `PASS`/`FAIL` line and then
//! asserts it, so `cargo test -p esdib --test acceptance -- --nocapture`
//! gives a readable report.

use std::time::Instant;

use esdib::assembly::element_stiffness;
use esdib::diagnostics::nodal_std;
use esdib::io::{run_experiment, RunConfig};
use esdib::sparse::CsrMatrix;
use esdib::{
    assemble_lumped_mass, assemble_stiffness, generate_icosphere, generate_square, initial_condition, mass_integral,
    run, solve_spd_from, Assembler, FieldPair, KineticsParams, NoReaction, Point, SimState, SolverConfig,
    StationarySolver, StepOutcome, Stepper, SurfaceMesh, Termination,
};
use nalgebra::{Rotation3, Unit, Vector3};

fn report(name: &str, passed: bool, detail: &str) {
    println!("{} {name}: {detail}", if passed { "PASS" } else { "FAIL" });
    assert!(passed, "{name}: {detail}");
}

fn transport(kappa: f64) -> KineticsParams {
    KineticsParams::standard(30.0, 3.0).unwrap().with_kappa(kappa)
}

fn advance(stepper: &mut Stepper, state: &SimState, params: &KineticsParams, cfg: &SolverConfig) -> SimState {
    match stepper.step(state, params, &NoReaction, cfg).unwrap() {
        StepOutcome::Advanced(next) => next,
        StepOutcome::Degenerate(q) => panic!("unexpected degeneracy stop {q:?}"),
    }
}

fn rigid_motion(mesh: &SurfaceMesh) -> SurfaceMesh {
    let rotation = Rotation3::from_axis_angle(&Unit::new_normalize(Vector3::new(1.0, -2.0, 0.5)), 0.7);
    let shift = Point::new(3.0, -1.5, 2.25);
    let nodes: Vec<Point> = mesh.nodes().iter().map(|p| rotation * p + shift).collect();
    mesh.with_nodes(nodes).unwrap()
}

#[test]
fn stiffness_algebra() {
    let start = Instant::now();
    let meshes = [
        ("square n=10", generate_square(20.0, 10)),
        ("square n=50", generate_square(20.0, 50)),
        ("icosphere level 2", generate_icosphere(1.0, 2)),
        ("icosphere level 4", generate_icosphere(1.0, 4)),
    ];
    let mut passed = true;
    let mut details = Vec::new();
    for (name, mesh) in &meshes {
        let k = assemble_stiffness(mesh).unwrap().0;
        let moved = assemble_stiffness(&rigid_motion(mesh)).unwrap().0;
        let pattern = k.pattern();
        let mut symmetric = true;
        let mut worst_row = 0.0f64;
        for i in 0..k.dim() {
            let (cols, range) = pattern.row(i);
            let row = &k.values()[range];
            for (&j, &v) in cols.iter().zip(row) {
                symmetric &= k.get(j, i).to_bits() == v.to_bits();
            }
            let sum: f64 = row.iter().sum();
            let scale = row.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            worst_row = worst_row.max(sum.abs() / scale);
        }
        let motion = k
            .values()
            .iter()
            .zip(moved.values())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let ok = symmetric && worst_row <= 1e-12 && motion <= 1e-12;
        passed &= ok;
        details.push(format!(
            "{name}: symmetric={symmetric} row/max={worst_row:.1e} motion={motion:.1e}"
        ));
    }
    let elapsed = start.elapsed().as_secs_f64();
    passed &= elapsed < 5.0;
    details.push(format!("{elapsed:.2} s"));
    report("stiffness algebra", passed, &details.join("; "));
}

#[test]
fn element_oracle() {
    let p = [
        Point::new(0.0, 0.0, 0.0),
        Point::new(1.0, 0.0, 0.0),
        Point::new(0.0, 1.0, 0.0),
    ];
    let expected = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
    let mesh = SurfaceMesh::new(p.to_vec(), vec![[0, 1, 2]]).unwrap();
    let assembled = assemble_stiffness(&mesh).unwrap().0.to_dense();
    let local = element_stiffness(&p).unwrap();
    let mut k_err = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            k_err = k_err
                .max((assembled[i][j] - expected[i][j]).abs())
                .max((local[i][j] - expected[i][j]).abs());
        }
    }
    let mass = assemble_lumped_mass(&mesh).unwrap();
    let m_err = mass.diag().iter().fold(0.0f64, |m, v| m.max((v - 1.0 / 6.0).abs()));
    report(
        "element oracle",
        k_err <= 1e-14 && m_err <= 1e-14,
        &format!("stiffness error {k_err:.1e}, mass error {m_err:.1e}"),
    );
}

#[test]
fn theta_mass_conservation() {
    let start = Instant::now();
    let edge = 20.0;
    let mesh = generate_square(edge, 40);
    let wave = |p: &Point, i: f64, j: f64| {
        (i * std::f64::consts::PI * p.x / edge).cos() * (j * std::f64::consts::PI * p.y / edge).cos()
    };
    let eta: Vec<f64> = mesh.nodes().iter().map(|p| wave(p, 2.0, 2.0) + 0.3 * wave(p, 3.0, 1.0)).collect();
    let theta: Vec<f64> = mesh.nodes().iter().map(|p| 0.5 + 0.2 * wave(p, 1.0, 4.0)).collect();
    let params = transport(0.2);
    let cfg = SolverConfig::default();
    let mut state = SimState::new(mesh, FieldPair { eta, theta }).unwrap();
    let initial = mass_integral(&assemble_lumped_mass(&state.mesh).unwrap(), &state.theta);
    let initial_area = state.mesh.surface_area();
    let mut stepper = Stepper::new(&state.mesh);
    let mut drift = 0.0f64;
    for _ in 0..500 {
        state = advance(&mut stepper, &state, &params, &cfg);
        let mass = mass_integral(&assemble_lumped_mass(&state.mesh).unwrap(), &state.theta);
        drift = drift.max(((mass - initial) / initial).abs());
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "theta mass conservation",
        drift <= 1e-8 && elapsed < 60.0,
        &format!(
            "max relative drift {drift:.2e} over 500 steps, area {initial_area:.1} -> {:.3}, {elapsed:.1} s",
            state.mesh.surface_area()
        ),
    );
}

#[test]
fn eta_is_not_diluted() {
    let mesh = generate_icosphere(1.0, 3);
    let n = mesh.node_count();
    let params = transport(0.2);
    let cfg = SolverConfig::default();
    let mut state = SimState::new(mesh, FieldPair::uniform(n, 1.0, 0.5)).unwrap();
    let initial_area = state.mesh.surface_area();
    let mut stepper = Stepper::new(&state.mesh);
    for _ in 0..100 {
        state = advance(&mut stepper, &state, &params, &cfg);
    }
    let min = state.eta.iter().copied().fold(f64::INFINITY, f64::min);
    let max = state.eta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let off = state.eta.iter().fold(0.0f64, |m, v| m.max((v - 1.0).abs()));
    report(
        "eta not diluted",
        max - min <= 1e-9 && off <= 1e-9,
        &format!(
            "spread {:.1e}, max |eta - 1| {off:.1e}, area grew by {:.3}",
            max - min,
            state.mesh.surface_area() / initial_area
        ),
    );
}

/// Relative errors of mean radius and mean theta against `R = 1 + 0.2 t`,
/// `theta = 1 / R^2` at `t = 1`.
fn expanding_sphere_errors(level: u32, tau: f64) -> (f64, f64) {
    let mesh = generate_icosphere(1.0, level);
    let n = mesh.node_count();
    let params = transport(0.2);
    let cfg = SolverConfig {
        tau,
        final_time: 1.0,
        ..SolverConfig::default()
    };
    let state = SimState::new(mesh, FieldPair::uniform(n, 1.0, 1.0)).unwrap();
    let outcome = run(state, &params, &NoReaction, &cfg, 1000, &mut []).unwrap();
    assert_eq!(outcome.termination, Termination::Completed);
    let state = outcome.state;
    assert!((state.time - 1.0).abs() < 1e-12);
    let radius = state.mesh.nodes().iter().map(|p| p.norm()).sum::<f64>() / n as f64;
    let theta = state.theta.iter().sum::<f64>() / n as f64;
    ((radius - 1.2).abs() / 1.2, (theta - 1.0 / 1.44).abs() * 1.44)
}

#[test]
fn expanding_sphere() {
    let (r4, t4) = expanding_sphere_errors(4, 1e-2);
    let (r5, t5) = expanding_sphere_errors(5, 5e-3);
    let passed = r4 < 0.01 && t4 < 0.02 && r5 < r4 && t5 < t4;
    report(
        "expanding sphere",
        passed,
        &format!(
            "level 4, tau 1e-2: radius {r4:.2e}, theta {t4:.2e}; level 5, tau 5e-3: radius {r5:.2e}, theta {t5:.2e}"
        ),
    );
}

/// Least-squares slope of `ys` against `xs`.
fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[test]
fn stationary_heat_decay() {
    let mesh = generate_icosphere(1.0, 4);
    let n = mesh.node_count();
    let params = transport(0.0);
    let cfg = SolverConfig {
        tau: 1e-3,
        final_time: 0.05,
        ..SolverConfig::default()
    };
    let z: Vec<f64> = mesh.nodes().iter().map(|p| p.z).collect();
    let solver = StationarySolver::new(&mesh, &params, &cfg).unwrap();
    let mass = solver.mass().clone();
    let zz: f64 = mass.diag().iter().zip(&z).map(|(m, v)| m * v * v).sum();
    let coefficient = |theta: &[f64]| mass.diag().iter().zip(theta).zip(&z).map(|((m, a), b)| m * a * b).sum::<f64>() / zz;
    let mut times = vec![0.0];
    let mut logs = vec![0.0];
    let fields = FieldPair {
        eta: vec![0.0; n],
        theta: z.clone(),
    };
    solver
        .run(fields, &NoReaction, |k, f| {
            times.push(k as f64 * cfg.tau);
            logs.push(coefficient(&f.theta).ln());
        })
        .unwrap();
    let rate = -slope(&times, &logs);
    let expected = 2.0 * params.diffusivity;
    let rel = (rate - expected).abs() / expected;
    report(
        "stationary heat decay",
        rel < 0.05,
        &format!("fitted rate {rate:.3}, expected {expected}, relative error {rel:.2e}"),
    );
}

/// Plain fixed-domain IMEX loop assembled once from the public building blocks.
fn direct_fixed_domain(mesh: &SurfaceMesh, params: &KineticsParams, cfg: &SolverConfig, mut fields: FieldPair) -> FieldPair {
    let assembler = Assembler::new(mesh);
    let m = assembler.lumped_mass(mesh).unwrap();
    let k = assembler.stiffness(mesh).unwrap();
    let eta_matrix: CsrMatrix = assembler.system_matrix(&m, &k, cfg.tau, 1.0);
    let theta_matrix = assembler.system_matrix(&m, &k, cfg.tau, params.diffusivity);
    let rhs = |u: &[f64], s: &[f64]| -> Vec<f64> {
        m.diag()
            .iter()
            .zip(u)
            .zip(s)
            .map(|((&mi, &ui), &si)| mi * ui / cfg.tau + params.rho * mi * si)
            .collect()
    };
    for _ in 0..cfg.step_count() {
        let f: Vec<f64> = fields.eta.iter().zip(&fields.theta).map(|(&e, &t)| params.eval_f(e, t)).collect();
        let g: Vec<f64> = fields.eta.iter().zip(&fields.theta).map(|(&e, &t)| params.eval_g(e, t)).collect();
        let (b_eta, b_theta) = (rhs(&fields.eta, &f), rhs(&fields.theta, &g));
        solve_spd_from(&eta_matrix, &b_eta, &mut fields.eta, cfg.cg_tol, cfg.cg_max_iter).unwrap();
        solve_spd_from(&theta_matrix, &b_theta, &mut fields.theta, cfg.cg_tol, cfg.cg_max_iter).unwrap();
    }
    fields
}

#[test]
fn stationary_mode_equivalence() {
    let mut cfg = RunConfig::from_preset(1).unwrap();
    cfg.kinetics = cfg.kinetics.with_kappa(0.0);
    cfg.perturbation.seed = 42;
    cfg.domain.resolution = 32;
    cfg.solver.final_time = 2.0;
    let mesh = cfg.domain.generate().unwrap();
    let fields = initial_condition(&mesh, &cfg.kinetics, &cfg.perturbation).unwrap();

    let evolving = run(
        SimState::new(mesh.clone(), fields.clone()).unwrap(),
        &cfg.kinetics,
        &cfg.kinetics,
        &cfg.solver,
        10,
        &mut [],
    )
    .unwrap()
    .state;
    let stationary = StationarySolver::new(&mesh, &cfg.kinetics, &cfg.solver)
        .unwrap()
        .run(fields.clone(), &cfg.kinetics, |_, _| {})
        .unwrap();
    let direct = direct_fixed_domain(&mesh, &cfg.kinetics, &cfg.solver, fields);

    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    let same = |a: &FieldPair| bits(&a.eta) == bits(&evolving.eta) && bits(&a.theta) == bits(&evolving.theta);
    let geometry = evolving
        .mesh
        .nodes()
        .iter()
        .zip(mesh.nodes())
        .all(|(a, b)| a == b);
    let passed = same(&stationary) && same(&direct) && geometry;
    report(
        "stationary mode equivalence",
        passed,
        &format!(
            "{} steps on {} nodes: stationary solver identical={}, direct loop identical={}, nodes fixed={geometry}, eta std {:.2e}",
            cfg.solver.step_count(),
            mesh.node_count(),
            same(&stationary),
            same(&direct),
            nodal_std(&evolving.eta)
        ),
    );
}

struct TuringResult {
    id: u8,
    initial_std: f64,
    final_std: f64,
    area_ratio: f64,
    monotone_area: bool,
    stopped_at: Option<f64>,
    final_time: f64,
    seconds: f64,
}

impl TuringResult {
    fn passed(&self) -> bool {
        self.initial_std <= 1e-4 && self.final_std >= 1e-2 && self.monotone_area && self.area_ratio > 1.05
    }
}

fn turing_run(id: u8) -> TuringResult {
    let start = Instant::now();
    let mut cfg = RunConfig::from_preset(id).unwrap();
    cfg.domain.resolution = match cfg.domain.kind {
        esdib::DomainKind::Square { .. } => 64,
        esdib::DomainKind::Sphere { .. } => 4,
    };
    cfg.solver.final_time = cfg.solver.final_time.min(10.0);
    let mesh = cfg.domain.generate().unwrap();
    let fields = initial_condition(&mesh, &cfg.kinetics, &cfg.perturbation).unwrap();
    let initial = SimState::new(mesh, fields).unwrap();
    let initial_std = nodal_std(&initial.eta);
    let initial_area = initial.mesh.surface_area();
    let outcome = run(initial, &cfg.kinetics, &cfg.kinetics, &cfg.solver, 10, &mut []).unwrap();
    let mut areas = vec![initial_area];
    areas.extend(outcome.series.areas());
    let last = outcome.series.last().unwrap();
    TuringResult {
        id,
        initial_std,
        final_std: last.eta_std,
        area_ratio: last.area / initial_area,
        monotone_area: areas.windows(2).all(|w| w[1] > w[0]),
        stopped_at: match outcome.termination {
            Termination::Completed => None,
            Termination::Degenerate(_) => Some(outcome.state.time),
        },
        final_time: cfg.solver.final_time,
        seconds: start.elapsed().as_secs_f64(),
    }
}

#[test]
fn turing_amplification() {
    let results: Vec<TuringResult> = std::thread::scope(|s| {
        let handles: Vec<_> = (1..=6).map(|id| s.spawn(move || turing_run(id))).collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut lines = Vec::new();
    for r in &results {
        let stop = match r.stopped_at {
            Some(t) => format!("degeneracy stop at t={t:.2} of {}", r.final_time),
            None => format!("reached t={}", r.final_time),
        };
        lines.push(format!(
            "  preset {} {}: eta std {:.1e} -> {:.1e}, area ratio {:.4}, area strictly increasing={}, {stop}, {:.0} s",
            r.id,
            if r.passed() { "ok" } else { "not met" },
            r.initial_std,
            r.final_std,
            r.area_ratio,
            r.monotone_area,
            r.seconds
        ));
    }
    let failing: Vec<u8> = results.iter().filter(|r| !r.passed()).map(|r| r.id).collect();
    let detail = if failing.is_empty() {
        "all presets".to_string()
    } else {
        format!("presets {failing:?} not met")
    };
    println!("{}", lines.join("\n"));
    report("turing amplification", failing.is_empty(), &detail);
}

#[test]
fn determinism() {
    let mut cfg = RunConfig::from_preset(4).unwrap();
    cfg.domain.resolution = 3;
    cfg.solver.final_time = 1.0;
    cfg.output.stride = 5;
    cfg.output.snapshot_stride = 25;
    cfg.output.obj = true;
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for dir in &dirs {
        run_experiment(&cfg, dir.path()).unwrap();
    }
    let mut files = vec![
        "diagnostics.csv".to_string(),
        "final.vtk".to_string(),
        "final.obj".to_string(),
        "summary.txt".to_string(),
        "config.txt".to_string(),
    ];
    let mut snapshots: Vec<String> = std::fs::read_dir(dirs[0].path().join("snapshots"))
        .unwrap()
        .map(|e| format!("snapshots/{}", e.unwrap().file_name().to_string_lossy()))
        .collect();
    snapshots.sort();
    let snapshot_count = snapshots.len();
    files.extend(snapshots);
    let differing: Vec<&String> = files
        .iter()
        .filter(|f| std::fs::read(dirs[0].path().join(f)).unwrap() != std::fs::read(dirs[1].path().join(f)).ok().unwrap_or_default())
        .collect();
    report(
        "determinism",
        differing.is_empty() && snapshot_count == 5,
        &format!("{} files compared ({snapshot_count} snapshots), differing: {differing:?}", files.len()),
    );
}
