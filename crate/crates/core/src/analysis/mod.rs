//! Post-processing of simulated courses.

mod golden;
mod sweep;

use std::collections::HashMap;

pub use golden::{compare_to_golden, relative_error, GoldenCell, GoldenReport, GoldenRow, GoldenTable, Tolerance};
pub use sweep::{sweep, SweepEntry, SweepRun, SweepSummary, SWEEP_KEYS};

use crate::error::{Error, Result};
use crate::model::{survival_fraction, ModelParams, Phase};
use crate::schedule::Trajectory;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiffPoint {
    pub day: u32,
    pub phase: Phase,
    /// `phi_a - phi_b`.
    pub dphi: f64,
}

/// Velocity difference of two trajectories on their shared `(day, phase)` grid.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryDiff {
    pub points: Vec<DiffPoint>,
    /// Records present in only one of the two trajectories.
    pub unmatched: usize,
}

impl TrajectoryDiff {
    /// Number of sign changes in `dphi`, ignoring exact zeros.
    pub fn sign_changes(&self) -> usize {
        let signs: Vec<bool> = self.points.iter().filter(|p| p.dphi != 0.0).map(|p| p.dphi > 0.0).collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    }

    /// One-line description of the sign pattern, e.g. `"+ then -"`.
    pub fn sign_pattern(&self) -> String {
        let mut runs: Vec<&str> = Vec::new();
        for p in &self.points {
            let s = if p.dphi > 0.0 {
                "+"
            } else if p.dphi < 0.0 {
                "-"
            } else {
                continue;
            };
            if runs.last() != Some(&s) {
                runs.push(s);
            }
        }
        if runs.is_empty() {
            "0".to_string()
        } else {
            runs.join(" then ")
        }
    }
}

/// Pairwise `a.phi - b.phi`, in the record order of `a`.
pub fn diff_velocity(a: &Trajectory, b: &Trajectory) -> Result<TrajectoryDiff> {
    let lookup: HashMap<(u32, Phase), f64> = b.records.iter().map(|r| ((r.day, r.phase), r.phi)).collect();
    let points: Vec<DiffPoint> = a
        .records
        .iter()
        .filter_map(|r| {
            lookup.get(&(r.day, r.phase)).map(|phi_b| DiffPoint { day: r.day, phase: r.phase, dphi: r.phi - phi_b })
        })
        .collect();
    if points.is_empty() {
        return Err(Error::EmptyAlignment);
    }
    let unmatched = a.records.len() + b.records.len() - 2 * points.len();
    Ok(TrajectoryDiff { points, unmatched })
}

/// Total count after `pulses` pulses and no growth: `N0 · exp(-n(αd + βd²))`.
pub fn lq_closed_form(initial_total: f64, pulses: u32, params: &ModelParams) -> f64 {
    initial_total * survival_fraction(params).powi(pulses as i32)
}
