//! Configuration, experiment presets and file export.

pub mod config;
pub mod experiment;
pub mod export;
pub mod preset;

pub use config::{load_config, parse_config, OutputConfig, RunConfig};
pub use experiment::{run_experiment, ExperimentReport};
pub use export::{write_obj, write_vtk};
pub use preset::{ExperimentPreset, PRESETS};

/// Shortest round-trip representation of `v`, in plain decimal for
/// moderate magnitudes and scientific notation otherwise.
pub fn format_f64(v: f64) -> String {
    let magnitude = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&magnitude) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

#[cfg(test)]
mod tests {
    use super::format_f64;

    #[test]
    fn number_formatting_round_trips() {
        for v in [0.0, -0.0, 1.0, 400.0, 1e-4, -2.5e-7, 1e300, 0.1 + 0.2, 12345.678] {
            let text = format_f64(v);
            assert_eq!(text.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{text}");
        }
        assert_eq!(format_f64(1e-12), "1e-12");
        assert_eq!(format_f64(0.5), "0.5");
    }
}
