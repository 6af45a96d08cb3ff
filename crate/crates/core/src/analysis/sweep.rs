use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::PARAM_KEYS;
use crate::schedule::{Scenario, Termination, Trajectory};

/// Keys accepted by [`sweep`]: every model parameter plus `pulses_per_week`.
pub const SWEEP_KEYS: &[&str] = &[
    "alpha",
    "beta",
    "dose",
    "q_rad",
    "p_rad",
    "q_mix",
    "p_mix",
    "v0",
    "v1",
    "a",
    "theta",
    "weeks",
    "ode_step",
    "integer_rounding",
    "weekend_days",
    "pulses_per_week",
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepSummary {
    pub final_day: u32,
    pub final_total: f64,
    pub final_phi: f64,
    /// First day on which a recorded Φ exceeds the caller's threshold.
    pub first_day_above: Option<u32>,
    pub termination: Termination,
}

impl SweepSummary {
    pub fn of(trajectory: &Trajectory, phi_threshold: f64) -> Self {
        let last = trajectory.last();
        SweepSummary {
            final_day: last.map_or(0, |r| r.day),
            final_total: last.map_or(0.0, |r| r.total),
            final_phi: last.map_or(0.0, |r| r.phi),
            first_day_above: trajectory.records.iter().find(|r| r.phi > phi_threshold).map(|r| r.day),
            termination: trajectory.termination,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRun {
    pub summary: SweepSummary,
    pub trajectory: Trajectory,
}

#[derive(Debug)]
pub struct SweepEntry {
    pub value: f64,
    pub outcome: Result<SweepRun>,
}

fn scenario_with(base: &Scenario, key: &str, value: f64) -> Result<Scenario> {
    let mut scenario = base.clone();
    if key == "pulses_per_week" {
        if !(value.is_finite() && value >= 0.0 && value.fract() == 0.0 && value <= u32::MAX as f64) {
            return Err(Error::param(key, format!("expected a nonnegative integer, got {value}")));
        }
        scenario.schedule.pulses_per_week = value as u32;
        return Ok(scenario);
    }
    if !PARAM_KEYS.contains(&key) {
        return Err(Error::param(key, format!("unknown sweep key (expected one of {})", SWEEP_KEYS.join(", "))));
    }
    scenario.params = base.params.with_value(key, value)?;
    scenario.schedule.weeks = scenario.params.weeks;
    scenario.schedule.weekend_days = scenario.params.weekend_days;
    Ok(scenario)
}

/// One independent course per value of `key`.
///
/// Runs in parallel; results come back in the order of `values`. An invalid
/// value yields an error entry and the remaining values still run.
pub fn sweep(base: &Scenario, key: &str, values: &[f64], phi_threshold: f64) -> Vec<SweepEntry> {
    values
        .par_iter()
        .map(|&value| SweepEntry {
            value,
            outcome: scenario_with(base, key, value).and_then(|s| s.run()).map(|trajectory| SweepRun {
                summary: SweepSummary::of(&trajectory, phi_threshold),
                trajectory,
            }),
        })
        .collect()
}
