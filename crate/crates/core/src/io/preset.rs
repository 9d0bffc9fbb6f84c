//! The six reference experiments: domain, B, C, rho and final time.

use crate::meshgen::DomainKind;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentPreset {
    pub id: u8,
    pub domain: DomainKind,
    pub b: f64,
    pub c: f64,
    pub rho: f64,
    pub final_time: f64,
    /// Pattern class the parameters produce on a fixed domain.
    pub pattern: &'static str,
}

pub const PRESETS: [ExperimentPreset; 6] = [
    ExperimentPreset {
        id: 1,
        domain: DomainKind::Square { edge: 20.0 },
        b: 30.0,
        c: 3.0,
        rho: 2.0,
        final_time: 12.0,
        pattern: "holes",
    },
    ExperimentPreset {
        id: 2,
        domain: DomainKind::Square { edge: 30.0 },
        b: 66.0,
        c: 3.0,
        rho: 1.0,
        final_time: 20.0,
        pattern: "labyrinth",
    },
    ExperimentPreset {
        id: 3,
        domain: DomainKind::Square { edge: 20.0 },
        b: 62.0,
        c: 5.0,
        rho: 2.0,
        final_time: 60.0,
        pattern: "spots",
    },
    ExperimentPreset {
        id: 4,
        domain: DomainKind::Sphere { radius: 3.0 },
        b: 30.0,
        c: 3.0,
        rho: 2.0,
        final_time: 12.0,
        pattern: "holes",
    },
    ExperimentPreset {
        id: 5,
        domain: DomainKind::Sphere { radius: 10.0 },
        b: 66.0,
        c: 3.0,
        rho: 1.0,
        final_time: 20.0,
        pattern: "labyrinth",
    },
    ExperimentPreset {
        id: 6,
        domain: DomainKind::Sphere { radius: 5.0 },
        b: 62.0,
        c: 5.0,
        rho: 2.0,
        final_time: 50.0,
        pattern: "spots",
    },
];

impl ExperimentPreset {
    pub fn get(id: u8) -> Option<&'static ExperimentPreset> {
        PRESETS.iter().find(|p| p.id == id)
    }
}
