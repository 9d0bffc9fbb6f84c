//! End-to-end experiment: build the domain, perturb the equilibrium, run,
//! and write the artifact directory.
//!
//! Layout of `out_dir`:
//!
//! ```text
//! config.txt          full configuration (re-loadable)
//! diagnostics.csv     one row per sample
//! snapshots/step_NNNNNN.vtk
//! final.vtk           last valid state (final.obj with output.obj)
//! summary.txt         key = value summary
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::diagnostics::Sample;
use crate::error::{Error, Result};
use crate::io::config::RunConfig;
use crate::io::export::{write_obj, write_vtk};
use crate::io::format_f64;
use crate::kinetics::initial_condition;
use crate::stepper::{run, Observer, RunOutcome, SimState, Termination};

struct SnapshotWriter {
    dir: PathBuf,
    stride: usize,
}

impl SnapshotWriter {
    fn write(&self, state: &SimState) -> Result<()> {
        write_vtk(
            state,
            &self.dir.join(format!("step_{:06}.vtk", state.step_index)),
        )
    }
}

impl Observer for SnapshotWriter {
    fn observe(&mut self, state: &SimState, _sample: &Sample) -> Result<()> {
        if self.stride > 0 && state.step_index % self.stride == 0 {
            self.write(state)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub dir: PathBuf,
    pub outcome: RunOutcome,
    pub initial_area: f64,
    pub final_area: f64,
    /// Increment norm of `eta` at the last recorded sample.
    pub final_increment: f64,
}

impl ExperimentReport {
    pub fn area_ratio(&self) -> f64 {
        self.final_area / self.initial_area
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self.outcome.termination, Termination::Degenerate(_))
    }

    fn summary(&self, cfg: &RunConfig) -> String {
        let mut s = String::new();
        let state = &self.outcome.state;
        let termination = match self.outcome.termination {
            Termination::Completed => "completed".to_string(),
            Termination::Degenerate(q) => format!(
                "degenerate (min_angle_deg = {}, min_area = {})",
                format_f64(q.min_angle_deg),
                format_f64(q.min_area)
            ),
        };
        let _ = writeln!(s, "termination = {termination}");
        let _ = writeln!(s, "steps = {}", state.step_index);
        let _ = writeln!(s, "requested_steps = {}", cfg.solver.step_count());
        let _ = writeln!(s, "final_time = {}", format_f64(state.time));
        let _ = writeln!(s, "nodes = {}", state.mesh.node_count());
        let _ = writeln!(s, "triangles = {}", state.mesh.triangle_count());
        let _ = writeln!(s, "initial_area = {}", format_f64(self.initial_area));
        let _ = writeln!(s, "final_area = {}", format_f64(self.final_area));
        let _ = writeln!(s, "area_ratio = {}", format_f64(self.area_ratio()));
        let _ = writeln!(s, "increment_at_T = {}", format_f64(self.final_increment));
        if let Some(last) = self.outcome.series.last() {
            let _ = writeln!(s, "eta_std = {}", format_f64(last.eta_std));
            let _ = writeln!(s, "theta_min = {}", format_f64(last.theta_min));
            let _ = writeln!(s, "theta_max = {}", format_f64(last.theta_max));
        }
        if let Ok(fit) = self.outcome.series.area_growth_fit() {
            let _ = writeln!(s, "area_growth_rate = {}", format_f64(fit.rate));
            if let Some(r2) = fit.r_squared {
                let _ = writeln!(s, "area_growth_r2 = {}", format_f64(r2));
            }
        }
        s
    }
}

/// Runs `cfg` and writes all artifacts into `out_dir` (created if missing).
/// A degeneracy stop is not an error: artifacts up to the stop are written
/// and the report says so.
pub fn run_experiment(cfg: &RunConfig, out_dir: &Path) -> Result<ExperimentReport> {
    let snapshots = out_dir.join("snapshots");
    fs::create_dir_all(&snapshots).map_err(|e| Error::io(&snapshots, e))?;
    let config_path = out_dir.join("config.txt");
    fs::write(&config_path, cfg.to_text()).map_err(|e| Error::io(&config_path, e))?;

    let mesh = cfg.domain.generate()?;
    let fields = initial_condition(&mesh, &cfg.kinetics, &cfg.perturbation)?;
    let initial = SimState::new(mesh, fields)?;
    let initial_area = initial.mesh.surface_area();

    let mut writer = SnapshotWriter {
        dir: snapshots,
        stride: cfg.output.snapshot_stride,
    };
    writer.write(&initial)?;

    let outcome = run(
        initial,
        &cfg.kinetics,
        &cfg.kinetics,
        &cfg.solver,
        cfg.output.stride,
        &mut [&mut writer],
    )?;

    let csv_path = out_dir.join("diagnostics.csv");
    let file = fs::File::create(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
    outcome.series.write_csv(std::io::BufWriter::new(file))?;

    write_vtk(&outcome.state, &out_dir.join("final.vtk"))?;
    if cfg.output.obj {
        write_obj(&outcome.state.mesh, &out_dir.join("final.obj"))?;
    }

    let final_increment = outcome.series.last().map_or(0.0, |s| s.inc_eta_l2);
    let report = ExperimentReport {
        dir: out_dir.to_path_buf(),
        initial_area,
        final_area: outcome.state.mesh.surface_area(),
        final_increment,
        outcome,
    };
    let summary_path = out_dir.join("summary.txt");
    fs::write(&summary_path, report.summary(cfg)).map_err(|e| Error::io(&summary_path, e))?;
    Ok(report)
}
