//! Invariant suite behind the `check` subcommand.

use std::fmt;

use crate::analysis::{compare_to_golden, lq_closed_form, relative_error, GoldenTable, Tolerance};
use crate::error::Result;
use crate::model::{PopulationState, Rounding, SIMPLEX_TOLERANCE};
use crate::radiation::RadiationOperator;
use crate::schedule::{Scenario, Termination};

pub const LQ_TOLERANCE: f64 = 1e-12;
pub const GOLDEN_COUNT_TOLERANCE: f64 = 0.005;
pub const GOLDEN_VELOCITY_TOLERANCE: f64 = 0.10;
/// Last day of the transcribed tables.
pub const GOLDEN_LAST_DAY: u32 = 48;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckItem {
    pub name: &'static str,
    pub status: CheckStatus,
    pub detail: String,
}

impl fmt::Display for CheckItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.status {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Skipped => "SKIP",
        };
        write!(f, "[{tag}] {}: {}", self.name, self.detail)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub items: Vec<CheckItem>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.status != CheckStatus::Fail)
    }
}

fn item(name: &'static str, ok: bool, detail: String) -> CheckItem {
    CheckItem { name, status: if ok { CheckStatus::Pass } else { CheckStatus::Fail }, detail }
}

fn skipped(name: &'static str, detail: &str) -> CheckItem {
    CheckItem { name, status: CheckStatus::Skipped, detail: detail.to_string() }
}

/// Runs the LQ identity, column-sum, simplex, bookkeeping and golden-table checks.
pub fn run_checks(scenario: &Scenario) -> Result<CheckReport> {
    let params = &scenario.params;
    params.validate()?;
    let op = RadiationOperator::from_params(params)?;
    let s = op.survival();
    let mut items = Vec::new();

    let course_pulses = scenario.schedule.weeks * scenario.schedule.pulses_per_week;
    let start = PopulationState { pulses_delivered: 0, ..scenario.initial };
    let worst_lq = [1, 30, course_pulses]
        .into_iter()
        .map(|n| {
            let total = op.pulse_power(n, &start, Rounding::Continuous).total();
            relative_error(total, lq_closed_form(start.total(), n, params))
        })
        .fold(0.0, f64::max);
    items.push(item(
        "lq_identity",
        worst_lq <= LQ_TOLERANCE,
        format!("max relative error {worst_lq:.3e} over n in {{1, 30, {course_pulses}}} (tolerance {LQ_TOLERANCE:e})"),
    ));

    let m = op.matrix();
    let worst_col = (0..3)
        .map(|j| relative_error((0..3).map(|i| m[i][j]).sum(), s))
        .fold(0.0, f64::max);
    items.push(item(
        "column_sums",
        worst_col <= LQ_TOLERANCE,
        format!("every column sums to S = {s:.9} within {worst_col:.3e}"),
    ));

    let trajectory = scenario.run()?;
    let worst_record = trajectory
        .records
        .iter()
        .filter(|r| r.total > 0.0)
        .map(|r| (r.fractions.iter().sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    items.push(item(
        "simplex",
        trajectory.max_ode_drift <= SIMPLEX_TOLERANCE && worst_record <= SIMPLEX_TOLERANCE,
        format!(
            "raw integrator drift {:.3e}, recorded drift {worst_record:.3e} (tolerance {SIMPLEX_TOLERANCE:e})",
            trajectory.max_ode_drift
        ),
    ));

    if trajectory.termination == Termination::Completed {
        let schedule = &scenario.schedule;
        let skips_first = schedule.initial_irradiated && schedule.pulses_per_week > 0;
        let start_pulses = if schedule.initial_irradiated {
            scenario.initial.pulses_delivered.max(1)
        } else {
            scenario.initial.pulses_delivered
        };
        let expected = start_pulses + course_pulses - u32::from(skips_first);
        items.push(item(
            "pulse_count",
            trajectory.pulses_delivered == expected,
            format!("{} pulses delivered, expected {expected}", trajectory.pulses_delivered),
        ));
    } else {
        items.push(skipped("pulse_count", "course ended early by extinction"));
    }

    let golden = GoldenTable::published()?;
    let applicable = params.is_unmixed()
        && golden.first_row().is_some_and(|row| row.counts == scenario.initial.counts)
        && scenario.schedule.initial_irradiated;
    if applicable {
        let early = compare_to_golden(&trajectory, &golden.days(1..=5), Tolerance::counts_only(GOLDEN_COUNT_TOLERANCE));
        items.push(item(
            "golden_days_1_5",
            early.passed(),
            format!("worst count error {:.3e} (tolerance {GOLDEN_COUNT_TOLERANCE})", early.max_error()),
        ));
        if trajectory.last_on_day(GOLDEN_LAST_DAY).is_some() {
            let late = compare_to_golden(
                &trajectory,
                &golden.days(GOLDEN_LAST_DAY..=GOLDEN_LAST_DAY),
                Tolerance::velocity_only(GOLDEN_VELOCITY_TOLERANCE),
            );
            items.push(item(
                "golden_day_48_velocity",
                late.passed(),
                format!("velocity error {:.3e} (tolerance {GOLDEN_VELOCITY_TOLERANCE})", late.max_error()),
            ));
        } else {
            items.push(skipped("golden_day_48_velocity", "course ends before day 48"));
        }
    } else {
        items.push(skipped(
            "golden_days_1_5",
            "reference tables cover the zero-coefficient run from the tabulated initial counts only",
        ));
    }

    Ok(CheckReport { items })
}
