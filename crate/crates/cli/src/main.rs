use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use esdib::io::{parse_config, run_experiment, write_obj, write_vtk, RunConfig};
use esdib::meshgen::{DomainKind, DomainSpec};
use esdib::{initial_condition, FieldPair, SimState};

const EXIT_CONFIG: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_DEGENERATE: u8 = 4;

#[derive(Parser)]
#[command(name = "esdib", version, about = "Electrodeposition patterns on evolving surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a config file and/or a preset.
    ///
    /// Any config key can be overridden with a dotted flag placed after the
    /// other options, e.g. `--solver.tau 0.005` or `--kinetics.kappa=0`.
    Run {
        /// Config file (flat `key = value` with [domain], [kinetics], [solver], [output]).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Experiment preset 1-6.
        #[arg(long)]
        preset: Option<u8>,
        /// Output directory.
        #[arg(long, short, default_value = "esdib-out")]
        out: PathBuf,
        /// Seed of the initial perturbation.
        #[arg(long)]
        seed: Option<u64>,
        /// Dotted key overrides: `--section.key value` or `--section.key=value`.
        #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "OVERRIDES")]
        overrides: Vec<String>,
    },
    /// Generate an initial domain and export it.
    Mesh {
        #[arg(value_enum)]
        kind: Shape,
        /// Square edge length or sphere radius.
        #[arg(long)]
        size: f64,
        /// Grid divisions (square) or subdivision level (sphere); defaults to spacing about 0.2.
        #[arg(long)]
        resolution: Option<u32>,
        /// Output path; `.obj` writes OBJ, anything else legacy VTK.
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Run the analytic self-checks.
    Verify,
    /// List the accepted config keys.
    Keys,
}

#[derive(Clone, Copy, ValueEnum)]
enum Shape {
    Square,
    Sphere,
}

/// Turns `--a.b v` / `--a.b=v` tokens into key/value pairs.
fn parse_overrides(tokens: &[String]) -> anyhow::Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    let mut iter = tokens.iter();
    while let Some(token) = iter.next() {
        let Some(flag) = token.strip_prefix("--") else {
            anyhow::bail!("unexpected argument `{token}`; overrides look like --section.key value");
        };
        if let Some((key, value)) = flag.split_once('=') {
            pairs.push((key.to_string(), value.to_string()));
        } else {
            let value = iter
                .next()
                .with_context(|| format!("missing value for --{flag}"))?;
            pairs.push((flag.to_string(), value.clone()));
        }
    }
    Ok(pairs)
}

fn load(
    config: Option<PathBuf>,
    preset: Option<u8>,
    seed: Option<u64>,
    overrides: &[String],
) -> anyhow::Result<RunConfig> {
    let text = match &config {
        Some(path) => std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?,
        None => String::new(),
    };
    let mut pairs = Vec::new();
    if let Some(id) = preset {
        pairs.push(("preset".to_string(), id.to_string()));
    }
    if let Some(seed) = seed {
        pairs.push(("kinetics.seed".to_string(), seed.to_string()));
    }
    pairs.extend(parse_overrides(overrides)?);
    Ok(parse_config(&text, &pairs)?)
}

fn run(
    config: Option<PathBuf>,
    preset: Option<u8>,
    out: PathBuf,
    seed: Option<u64>,
    overrides: Vec<String>,
) -> ExitCode {
    let cfg = match load(config, preset, seed, &overrides) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("config error: {e:#}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    eprintln!(
        "running {:?} with {} steps of tau = {} into {}",
        cfg.domain.kind,
        cfg.solver.step_count(),
        cfg.solver.tau,
        out.display()
    );
    match run_experiment(&cfg, &out) {
        Ok(report) => {
            let state = &report.outcome.state;
            println!(
                "t = {} ({} steps), area {:.6} -> {:.6} (ratio {:.4}), increment {:.3e}",
                state.time,
                state.step_index,
                report.initial_area,
                report.final_area,
                report.area_ratio(),
                report.final_increment
            );
            if report.is_degenerate() {
                eprintln!("stopped early: mesh degeneracy (see summary.txt)");
                ExitCode::from(EXIT_DEGENERATE)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) if e.is_config() => {
            eprintln!("config error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(e) => {
            eprintln!("solver error: {e}");
            ExitCode::from(EXIT_SOLVER)
        }
    }
}

fn mesh(kind: Shape, size: f64, resolution: Option<u32>, out: PathBuf) -> anyhow::Result<()> {
    let kind = match kind {
        Shape::Square => DomainKind::Square { edge: size },
        Shape::Sphere => DomainKind::Sphere { radius: size },
    };
    let mut spec = DomainSpec::with_default_resolution(kind);
    if let Some(r) = resolution {
        spec.resolution = r;
    }
    let mesh = spec.generate()?;
    println!(
        "{} nodes, {} triangles, area {}",
        mesh.node_count(),
        mesh.triangle_count(),
        mesh.surface_area()
    );
    if out.extension().is_some_and(|e| e == "obj") {
        write_obj(&mesh, &out)?;
    } else {
        let params = esdib::KineticsParams::standard(30.0, 3.0)?;
        let fields = initial_condition(
            &mesh,
            &params,
            &esdib::Perturbation {
                amplitude: 0.0,
                ..Default::default()
            },
        )?;
        let n = mesh.node_count();
        debug_assert_eq!(fields, FieldPair::uniform(n, 0.0, params.alpha));
        write_vtk(&SimState::new(mesh, fields)?, &out)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            preset,
            out,
            seed,
            overrides,
        } => run(config, preset, out, seed, overrides),
        Command::Mesh {
            kind,
            size,
            resolution,
            out,
        } => match mesh(kind, size, resolution, out) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(EXIT_CONFIG)
            }
        },
        Command::Verify => {
            let checks = esdib::verify::run_checks();
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if checks.iter().all(|c| c.passed) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_SOLVER)
            }
        }
        Command::Keys => {
            let mut out = std::io::stdout().lock();
            for (key, help) in esdib::io::config::KEYS {
                // A closed pipe (e.g. `| head`) is not an error.
                if writeln!(out, "{key:<24} {help}").is_err() {
                    break;
                }
            }
            ExitCode::SUCCESS
        }
    }
}
