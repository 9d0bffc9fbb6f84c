//! Flat sectioned `key = value` run configuration.
//!
//! ```text
//! preset = 1            # optional, fills domain and kinetics from a preset
//!
//! [domain]
//! kind = square         # square | sphere
//! edge = 20
//! resolution = 100
//!
//! [kinetics]
//! B = 30
//! C = 3
//! kappa = 0.2
//!
//! [solver]
//! tau = 0.01
//! T = 12
//!
//! [output]
//! stride = 10
//! ```
//!
//! Keys are strict: anything not listed in [`KEYS`] is rejected. The same
//! dotted names (`solver.tau`) are accepted as overrides.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::io::format_f64;
use crate::io::preset::ExperimentPreset;
use crate::kinetics::{KineticsParams, Perturbation};
use crate::meshgen::{DomainKind, DomainSpec};
use crate::stepper::SolverConfig;

/// Every accepted key with a one-line description.
pub const KEYS: &[(&str, &str)] = &[
    ("preset", "experiment preset 1-6; fills domain, B, C, rho and T"),
    ("domain.kind", "square | sphere"),
    ("domain.edge", "square edge length L"),
    ("domain.radius", "sphere radius R"),
    ("domain.resolution", "grid divisions per edge (square) or subdivision level (sphere)"),
    ("kinetics.A1", "charge-transfer coefficient (default 10)"),
    ("kinetics.A2", "mass-transport coefficient (default 1)"),
    ("kinetics.B", "adsorbate effect on growth"),
    ("kinetics.C", "adsorption rate; D is derived from C, alpha, gamma"),
    ("kinetics.alpha", "equilibrium coverage (default 0.5)"),
    ("kinetics.gamma", "default 0.2"),
    ("kinetics.k2", "default 2.5"),
    ("kinetics.k3", "default 1.5"),
    ("kinetics.d", "diffusivity of theta (default 20)"),
    ("kinetics.rho", "domain rescaling factor (default 1)"),
    ("kinetics.kappa", "normal velocity gain; 0 = stationary surface (default 0.2)"),
    ("kinetics.amplitude", "initial perturbation amplitude (default 1e-4)"),
    ("kinetics.seed", "random seed of the initial perturbation (default 0)"),
    ("kinetics.shared_noise", "same random draw for eta and theta (default false)"),
    ("solver.tau", "time step (default 0.01)"),
    ("solver.T", "final time"),
    ("solver.cg_tol", "CG relative residual tolerance (default 1e-10)"),
    ("solver.cg_maxiter", "CG iteration limit (default 10000)"),
    ("solver.min_area_ratio", "degeneracy stop: min area / initial mean area (default 1e-12)"),
    ("solver.min_angle_deg", "degeneracy stop: min interior angle (default 0.5)"),
    ("output.stride", "diagnostics sample every N steps (default 10)"),
    ("output.snapshot_stride", "VTK snapshot every N steps, 0 = final only (default 100)"),
    ("output.obj", "also write OBJ geometry for the final state (default false)"),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputConfig {
    pub stride: usize,
    pub snapshot_stride: usize,
    pub obj: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            stride: 10,
            snapshot_stride: 100,
            obj: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub preset: Option<u8>,
    pub domain: DomainSpec,
    pub kinetics: KineticsParams,
    pub perturbation: Perturbation,
    pub solver: SolverConfig,
    pub output: OutputConfig,
}

/// One `key = value` entry and where it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    /// Line number in the config file, `None` for overrides.
    pub line: Option<usize>,
}

/// Splits a config document into dotted-key entries.
pub fn parse_entries(text: &str) -> Result<Vec<Entry>> {
    let mut section: Option<String> = None;
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw
            .split(['#', ';'])
            .next()
            .unwrap_or_default()
            .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| Error::ConfigParse {
                line: line_no,
                message: format!("unterminated section header `{line}`"),
            })?;
            let name = name.trim();
            if !["domain", "kinetics", "solver", "output"].contains(&name) {
                return Err(Error::ConfigParse {
                    line: line_no,
                    message: format!("unknown section `[{name}]`"),
                });
            }
            section = Some(name.to_string());
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::ConfigParse {
            line: line_no,
            message: format!("expected `key = value`, got `{line}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(Error::ConfigParse {
                line: line_no,
                message: "empty key".into(),
            });
        }
        let key = match &section {
            Some(s) => format!("{s}.{key}"),
            None => key.to_string(),
        };
        if !KEYS.iter().any(|(k, _)| *k == key) {
            return Err(Error::ConfigParse {
                line: line_no,
                message: format!("unknown key `{key}`"),
            });
        }
        entries.push(Entry {
            key,
            value: value.to_string(),
            line: Some(line_no),
        });
    }
    Ok(entries)
}

fn parse_value<T: FromStr>(entry: &Entry) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    entry.value.parse::<T>().map_err(|e| Error::ConfigValue {
        key: entry.key.clone(),
        message: match entry.line {
            Some(line) => format!("line {line}: cannot parse `{}`: {e}", entry.value),
            None => format!("cannot parse `{}`: {e}", entry.value),
        },
    })
}

fn parse_bool(entry: &Entry) -> Result<bool> {
    match entry.value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        other => Err(Error::ConfigValue {
            key: entry.key.clone(),
            message: format!("expected a boolean, got `{other}`"),
        }),
    }
}

/// Builds a validated configuration from entries applied in order; later
/// entries win.
pub fn build_config(entries: &[Entry]) -> Result<RunConfig> {
    let mut preset = None;
    for entry in entries.iter().filter(|e| e.key == "preset") {
        let id: u8 = parse_value(entry)?;
        if ExperimentPreset::get(id).is_none() {
            return Err(Error::ConfigValue {
                key: "preset".into(),
                message: format!("no preset {id}; expected 1-6"),
            });
        }
        preset = Some(id);
    }

    let mut kind: Option<&str> = None;
    let mut edge = None;
    let mut radius = None;
    let mut resolution: Option<u32> = None;
    let mut b = None;
    let mut c = None;
    let mut solver = SolverConfig::default();
    let mut final_time = None;
    let mut rho = None;
    if let Some(p) = preset.and_then(ExperimentPreset::get) {
        match p.domain {
            DomainKind::Square { edge: l } => {
                kind = Some("square");
                edge = Some(l);
            }
            DomainKind::Sphere { radius: r } => {
                kind = Some("sphere");
                radius = Some(r);
            }
        }
        b = Some(p.b);
        c = Some(p.c);
        rho = Some(p.rho);
        final_time = Some(p.final_time);
    }

    let mut k = KineticsParams::standard(0.0, 1.0)?;
    let mut perturbation = Perturbation::default();
    let mut output = OutputConfig::default();

    for entry in entries {
        match entry.key.as_str() {
            "preset" => {}
            "domain.kind" => {
                kind = Some(match entry.value.as_str() {
                    "square" => "square",
                    "sphere" => "sphere",
                    other => {
                        return Err(Error::ConfigValue {
                            key: entry.key.clone(),
                            message: format!("expected `square` or `sphere`, got `{other}`"),
                        })
                    }
                })
            }
            "domain.edge" => edge = Some(parse_value(entry)?),
            "domain.radius" => radius = Some(parse_value(entry)?),
            "domain.resolution" => resolution = Some(parse_value(entry)?),
            "kinetics.A1" => k.a1 = parse_value(entry)?,
            "kinetics.A2" => k.a2 = parse_value(entry)?,
            "kinetics.B" => b = Some(parse_value(entry)?),
            "kinetics.C" => c = Some(parse_value(entry)?),
            "kinetics.alpha" => k.alpha = parse_value(entry)?,
            "kinetics.gamma" => k.gamma = parse_value(entry)?,
            "kinetics.k2" => k.k2 = parse_value(entry)?,
            "kinetics.k3" => k.k3 = parse_value(entry)?,
            "kinetics.d" => k.diffusivity = parse_value(entry)?,
            "kinetics.rho" => rho = Some(parse_value(entry)?),
            "kinetics.kappa" => k.kappa = parse_value(entry)?,
            "kinetics.amplitude" => perturbation.amplitude = parse_value(entry)?,
            "kinetics.seed" => perturbation.seed = parse_value(entry)?,
            "kinetics.shared_noise" => perturbation.shared_noise = parse_bool(entry)?,
            "solver.tau" => solver.tau = parse_value(entry)?,
            "solver.T" => final_time = Some(parse_value(entry)?),
            "solver.cg_tol" => solver.cg_tol = parse_value(entry)?,
            "solver.cg_maxiter" => solver.cg_max_iter = parse_value(entry)?,
            "solver.min_area_ratio" => solver.min_area_ratio = parse_value(entry)?,
            "solver.min_angle_deg" => solver.min_angle_deg = parse_value(entry)?,
            "output.stride" => output.stride = parse_value(entry)?,
            "output.snapshot_stride" => output.snapshot_stride = parse_value(entry)?,
            "output.obj" => output.obj = parse_bool(entry)?,
            other => {
                return Err(Error::ConfigValue {
                    key: other.to_string(),
                    message: "unknown key".into(),
                })
            }
        }
    }

    let missing = |key: &str| Error::ConfigValue {
        key: key.to_string(),
        message: "required (no preset given)".into(),
    };
    let domain_kind = match kind.ok_or_else(|| missing("domain.kind"))? {
        "square" => DomainKind::Square {
            edge: edge.ok_or_else(|| missing("domain.edge"))?,
        },
        _ => DomainKind::Sphere {
            radius: radius.ok_or_else(|| missing("domain.radius"))?,
        },
    };
    let domain = match resolution {
        Some(resolution) => DomainSpec {
            kind: domain_kind,
            resolution,
        },
        None => DomainSpec::with_default_resolution(domain_kind),
    };
    domain.validate()?;

    k.b = b.ok_or_else(|| missing("kinetics.B"))?;
    k.c = c.ok_or_else(|| missing("kinetics.C"))?;
    k.rho = rho.unwrap_or(1.0);
    let kinetics = k.with_derived_desorption()?;

    solver.final_time = final_time.ok_or_else(|| missing("solver.T"))?;
    solver.validate()?;

    if !(perturbation.amplitude >= 0.0 && perturbation.amplitude.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "kinetics.amplitude",
            reason: format!("must be non-negative, got {}", perturbation.amplitude),
        });
    }
    if output.stride == 0 {
        return Err(Error::InvalidParameter {
            name: "output.stride",
            reason: "must be at least 1".into(),
        });
    }
    if output.snapshot_stride % output.stride != 0 {
        return Err(Error::InvalidParameter {
            name: "output.snapshot_stride",
            reason: format!(
                "must be a multiple of output.stride ({}), got {}",
                output.stride, output.snapshot_stride
            ),
        });
    }

    Ok(RunConfig {
        preset,
        domain,
        kinetics,
        perturbation,
        solver,
        output,
    })
}

/// Parses a config document and applies `overrides` (dotted keys) on top.
pub fn parse_config(text: &str, overrides: &[(String, String)]) -> Result<RunConfig> {
    let mut entries = parse_entries(text)?;
    for (key, value) in overrides {
        if !KEYS.iter().any(|(k, _)| k == key) {
            return Err(Error::ConfigValue {
                key: key.clone(),
                message: "unknown key".into(),
            });
        }
        entries.push(Entry {
            key: key.clone(),
            value: value.clone(),
            line: None,
        });
    }
    build_config(&entries)
}

pub fn load_config(path: &Path, overrides: &[(String, String)]) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text, overrides)
}

impl RunConfig {
    /// Configuration of preset `id` with all defaults.
    pub fn from_preset(id: u8) -> Result<Self> {
        parse_config("", &[("preset".into(), id.to_string())])
    }

    /// Full configuration in the file format; parsing it back yields `self`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let f = |v: f64| format_f64(v);
        if let Some(id) = self.preset {
            let _ = writeln!(out, "preset = {id}\n");
        }
        out.push_str("[domain]\n");
        match self.domain.kind {
            DomainKind::Square { edge } => {
                let _ = writeln!(out, "kind = square\nedge = {}", f(edge));
            }
            DomainKind::Sphere { radius } => {
                let _ = writeln!(out, "kind = sphere\nradius = {}", f(radius));
            }
        }
        let _ = writeln!(out, "resolution = {}\n", self.domain.resolution);

        let k = &self.kinetics;
        let _ = writeln!(out, "[kinetics]");
        for (name, value) in [
            ("A1", k.a1),
            ("A2", k.a2),
            ("B", k.b),
            ("C", k.c),
            ("alpha", k.alpha),
            ("gamma", k.gamma),
            ("k2", k.k2),
            ("k3", k.k3),
            ("d", k.diffusivity),
            ("rho", k.rho),
            ("kappa", k.kappa),
            ("amplitude", self.perturbation.amplitude),
        ] {
            let _ = writeln!(out, "{name} = {}", f(value));
        }
        let _ = writeln!(out, "# derived: D = {}", f(k.d_rate));
        let _ = writeln!(out, "seed = {}", self.perturbation.seed);
        let _ = writeln!(out, "shared_noise = {}\n", self.perturbation.shared_noise);

        let s = &self.solver;
        let _ = writeln!(out, "[solver]");
        let _ = writeln!(out, "tau = {}", f(s.tau));
        let _ = writeln!(out, "T = {}", f(s.final_time));
        let _ = writeln!(out, "cg_tol = {}", f(s.cg_tol));
        let _ = writeln!(out, "cg_maxiter = {}", s.cg_max_iter);
        let _ = writeln!(out, "min_area_ratio = {}", f(s.min_area_ratio));
        let _ = writeln!(out, "min_angle_deg = {}\n", f(s.min_angle_deg));

        let o = &self.output;
        let _ = writeln!(out, "[output]");
        let _ = writeln!(out, "stride = {}", o.stride);
        let _ = writeln!(out, "snapshot_stride = {}", o.snapshot_stride);
        let _ = writeln!(out, "obj = {}", o.obj);
        out
    }
}
