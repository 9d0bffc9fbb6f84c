//! Time series recorded during a run: surface area, solution increments,
//! chemistry mass, field ranges and mesh quality. Also the post-processing
//! helpers for thickness and area-growth rate.

use std::io::Write;

use crate::assembly::{assemble_lumped_mass, LumpedMass};
use crate::error::{Error, Result};
use crate::mesh::mesh_quality;
use crate::stepper::SimState;

/// Column order of the diagnostics CSV.
pub const CSV_HEADER: [&str; 12] = [
    "t",
    "area",
    "inc_eta_l2",
    "inc_eta_Ml2",
    "mass_theta",
    "eta_min",
    "eta_max",
    "theta_min",
    "theta_max",
    "eta_std",
    "min_angle_deg",
    "min_area",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub time: f64,
    pub step_index: usize,
    pub area: f64,
    /// Euclidean norm of the nodal increment of `eta` over the last step.
    pub inc_eta_l2: f64,
    /// Same increment measured with the lumped mass of the new mesh.
    pub inc_eta_ml2: f64,
    pub mass_theta: f64,
    pub eta_min: f64,
    pub eta_max: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    pub eta_std: f64,
    pub min_angle_deg: f64,
    pub min_area: f64,
}

fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}

/// Population standard deviation over nodes.
pub fn nodal_std(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
}

impl Sample {
    /// Sample of `current`, with increments measured against `previous`.
    pub fn record(previous: &SimState, current: &SimState) -> Result<Sample> {
        let mass = assemble_lumped_mass(&current.mesh)?;
        let quality = mesh_quality(&current.mesh);
        let diff: Vec<f64> = current
            .eta
            .iter()
            .zip(&previous.eta)
            .map(|(a, b)| a - b)
            .collect();
        let (eta_min, eta_max) = min_max(&current.eta);
        let (theta_min, theta_max) = min_max(&current.theta);
        Ok(Sample {
            time: current.time,
            step_index: current.step_index,
            area: current.mesh.surface_area(),
            inc_eta_l2: increment_norm(&previous.eta, &current.eta)?,
            inc_eta_ml2: mass_integral(&mass, &diff.iter().map(|d| d * d).collect::<Vec<_>>())
                .sqrt(),
            mass_theta: mass_integral(&mass, &current.theta),
            eta_min,
            eta_max,
            theta_min,
            theta_max,
            eta_std: nodal_std(&current.eta),
            min_angle_deg: quality.min_angle_deg,
            min_area: quality.min_area,
        })
    }

    fn csv_record(&self) -> [String; 12] {
        [
            self.time,
            self.area,
            self.inc_eta_l2,
            self.inc_eta_ml2,
            self.mass_theta,
            self.eta_min,
            self.eta_max,
            self.theta_min,
            self.theta_max,
            self.eta_std,
            self.min_angle_deg,
            self.min_area,
        ]
        .map(crate::io::format_f64)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiagnosticsSeries {
    samples: Vec<Sample>,
}

impl DiagnosticsSeries {
    /// Appends a sample; timestamps must be strictly increasing.
    pub fn push(&mut self, sample: Sample) {
        if let Some(last) = self.samples.last() {
            assert!(
                sample.time > last.time,
                "diagnostics samples must have increasing time"
            );
        }
        self.samples.push(sample);
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.time).collect()
    }

    pub fn areas(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.area).collect()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut csv = csv::Writer::from_writer(writer);
        let to_err = |e: csv::Error| Error::Data(format!("writing diagnostics CSV: {e}"));
        csv.write_record(CSV_HEADER).map_err(to_err)?;
        for sample in &self.samples {
            csv.write_record(sample.csv_record()).map_err(to_err)?;
        }
        csv.flush()
            .map_err(|e| Error::Data(format!("writing diagnostics CSV: {e}")))
    }
}

/// Euclidean norm of `next - prev` over nodal coefficients.
pub fn increment_norm(prev: &[f64], next: &[f64]) -> Result<f64> {
    if prev.len() != next.len() {
        return Err(Error::LengthMismatch {
            expected: prev.len(),
            actual: next.len(),
        });
    }
    Ok(prev
        .iter()
        .zip(next)
        .map(|(a, b)| (b - a) * (b - a))
        .sum::<f64>()
        .sqrt())
}

/// Lumped integral `sum_i M_ii b_i`.
pub fn mass_integral(mass: &LumpedMass, values: &[f64]) -> f64 {
    assert_eq!(mass.len(), values.len(), "mass and field lengths differ");
    mass.diag().iter().zip(values).map(|(m, b)| m * b).sum()
}

/// Whether the surface moves during a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceMode {
    Stationary,
    Evolving,
}

impl SurfaceMode {
    pub fn from_kappa(kappa: f64) -> Self {
        if kappa == 0.0 {
            SurfaceMode::Stationary
        } else {
            SurfaceMode::Evolving
        }
    }
}

/// Running trapezoidal integral of `eta` in time at each fixed node.
#[derive(Debug, Clone)]
pub struct ThicknessAccumulator {
    tau: f64,
    last: Vec<f64>,
    integral: Vec<f64>,
}

impl ThicknessAccumulator {
    pub fn new(initial: &[f64], tau: f64, mode: SurfaceMode) -> Result<Self> {
        if mode == SurfaceMode::Evolving {
            return Err(Error::EvolvingSurface);
        }
        Ok(ThicknessAccumulator {
            tau,
            last: initial.to_vec(),
            integral: vec![0.0; initial.len()],
        })
    }

    pub fn push(&mut self, eta: &[f64]) -> Result<()> {
        if eta.len() != self.last.len() {
            return Err(Error::LengthMismatch {
                expected: self.last.len(),
                actual: eta.len(),
            });
        }
        for ((h, prev), &next) in self.integral.iter_mut().zip(&mut self.last).zip(eta) {
            *h += 0.5 * self.tau * (*prev + next);
            *prev = next;
        }
        Ok(())
    }

    pub fn thickness(&self) -> &[f64] {
        &self.integral
    }
}

/// Thickness `h(x, T) = int_0^T eta(x, t) dt` from samples of `eta` spaced
/// `tau` apart, starting at `t = 0`.
pub fn thickness_function(samples: &[Vec<f64>], tau: f64, mode: SurfaceMode) -> Result<Vec<f64>> {
    let Some((first, rest)) = samples.split_first() else {
        return Err(Error::Data("thickness needs at least one sample".into()));
    };
    let mut acc = ThicknessAccumulator::new(first, tau, mode)?;
    for eta in rest {
        acc.push(eta)?;
    }
    Ok(acc.integral)
}

/// Least-squares fit of `log(area)` against time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaGrowthFit {
    /// Exponential growth rate (slope of the log-area fit).
    pub rate: f64,
    /// Coefficient of determination of the log-area fit; `None` when the
    /// log-area has no variance (constant area), which makes R^2 undefined.
    pub r_squared: Option<f64>,
    /// R^2 of a linear fit of `sqrt(area)` against time, i.e. quadratic
    /// area growth as for a sphere with constant normal speed.
    pub quadratic_r_squared: Option<f64>,
}

impl AreaGrowthFit {
    pub fn is_degenerate(&self) -> bool {
        self.r_squared.is_none()
    }

    /// The log-linear model explains the data at least as well as the quadratic one.
    pub fn is_exponential(&self) -> bool {
        match (self.r_squared, self.quadratic_r_squared) {
            (Some(log), Some(quad)) => log >= quad,
            _ => false,
        }
    }
}

/// Returns `(slope, r_squared)` of an ordinary least-squares line.
fn linear_fit(x: &[f64], y: &[f64]) -> (f64, Option<f64>) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    // relative to the magnitude of y, below this the variance is rounding noise
    let tiny = 1e-28 * n * my.abs().max(1.0).powi(2);
    let r2 = if syy > tiny && sxx > 0.0 {
        Some(sxy * sxy / (sxx * syy))
    } else {
        None
    };
    (slope, r2)
}

pub fn area_growth_fit(times: &[f64], areas: &[f64]) -> Result<AreaGrowthFit> {
    if times.len() != areas.len() {
        return Err(Error::LengthMismatch {
            expected: times.len(),
            actual: areas.len(),
        });
    }
    if times.len() < 10 {
        return Err(Error::Data(format!(
            "area growth fit needs at least 10 samples, got {}",
            times.len()
        )));
    }
    if let Some(bad) = areas.iter().find(|a| !(**a > 0.0)) {
        return Err(Error::Data(format!("non-positive area {bad} in series")));
    }
    let logs: Vec<f64> = areas.iter().map(|a| a.ln()).collect();
    let roots: Vec<f64> = areas.iter().map(|a| a.sqrt()).collect();
    let (rate, r_squared) = linear_fit(times, &logs);
    let (_, quadratic_r_squared) = linear_fit(times, &roots);
    Ok(AreaGrowthFit {
        rate,
        r_squared,
        quadratic_r_squared,
    })
}

impl DiagnosticsSeries {
    pub fn area_growth_fit(&self) -> Result<AreaGrowthFit> {
        area_growth_fit(&self.times(), &self.areas())
    }
}
