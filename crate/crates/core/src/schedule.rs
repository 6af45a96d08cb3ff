//! Weekly fractionation schedule.
//!
//! Each weekday is a pulse followed by one day of growth; each weekend day is
//! growth only. Read as an operator string acting on the initial state, a week
//! is `(growth · radiation)^5 · growth^2`. By default the initial state is
//! taken to be the population right after the first pulse of day 1, so day 1
//! starts with growth.

use crate::error::{Error, Result};
use crate::growth::growth_day;
use crate::model::{
    mean_velocity, IntervalKind, ModelParams, Phase, PopulationState, Rounding, VelocityVector,
};
use crate::radiation::RadiationOperator;

/// Which phases end up in the trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PhaseLog {
    pub initial: bool,
    pub post_growth: bool,
    pub post_radiation: bool,
}

impl Default for PhaseLog {
    fn default() -> Self {
        PhaseLog { initial: true, post_growth: true, post_radiation: true }
    }
}

impl PhaseLog {
    pub fn includes(&self, phase: Phase) -> bool {
        match phase {
            Phase::Initial => self.initial,
            Phase::PostGrowth => self.post_growth,
            Phase::PostRadiation => self.post_radiation,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScheduleSpec {
    pub weeks: u32,
    pub pulses_per_week: u32,
    pub weekend_days: u32,
    /// The initial state already includes the day-1 pulse.
    pub initial_irradiated: bool,
    pub log_phases: PhaseLog,
}

impl Default for ScheduleSpec {
    fn default() -> Self {
        ScheduleSpec {
            weeks: 6,
            pulses_per_week: 5,
            weekend_days: 2,
            initial_irradiated: true,
            log_phases: PhaseLog::default(),
        }
    }
}

impl ScheduleSpec {
    /// Five pulses per week, with weeks and weekend length taken from `params`.
    pub fn from_params(params: &ModelParams) -> Self {
        ScheduleSpec {
            weeks: params.weeks,
            weekend_days: params.weekend_days,
            ..ScheduleSpec::default()
        }
    }

    pub fn days_per_week(&self) -> u32 {
        self.pulses_per_week + self.weekend_days
    }

    pub fn validate(&self) -> Result<()> {
        if self.weeks < 1 {
            return Err(Error::param("weeks", "expected weeks >= 1, got 0"));
        }
        Ok(())
    }
}

/// One row of the trajectory table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub day: u32,
    pub phase: Phase,
    pub counts: [f64; 3],
    pub fractions: [f64; 3],
    pub phi: f64,
    pub v2: f64,
    pub total: f64,
}

impl TrajectoryRecord {
    fn from_state(state: &PopulationState, velocities: &VelocityVector, report_phi: bool) -> Self {
        let (fractions, phi) = match state.fractions() {
            Ok(x) => (x.as_array(), if report_phi { mean_velocity(&x, velocities) } else { 0.0 }),
            Err(_) => ([0.0; 3], 0.0),
        };
        TrajectoryRecord {
            day: state.day,
            phase: state.phase,
            counts: state.counts,
            fractions,
            phi,
            v2: velocities.v2(),
            total: state.total(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Termination {
    Completed,
    /// Fewer than one cell remained (integer mode) after an operation on `day`.
    Extinct { day: u32 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub records: Vec<TrajectoryRecord>,
    pub termination: Termination,
    /// Count format used when writing the table.
    pub rounding: Rounding,
    /// Largest raw `|Σx - 1|` seen by the integrator over the course.
    pub max_ode_drift: f64,
    pub pulses_delivered: u32,
}

impl Trajectory {
    pub fn last(&self) -> Option<&TrajectoryRecord> {
        self.records.last()
    }

    /// Last record attributed to `day`.
    pub fn last_on_day(&self, day: u32) -> Option<&TrajectoryRecord> {
        self.records.iter().rev().find(|r| r.day == day)
    }

    pub fn post_growth(&self) -> impl Iterator<Item = &TrajectoryRecord> {
        self.records.iter().filter(|r| r.phase == Phase::PostGrowth)
    }
}

/// Everything needed to run one course.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub params: ModelParams,
    pub schedule: ScheduleSpec,
    pub initial: PopulationState,
}

impl Scenario {
    pub fn run(&self) -> Result<Trajectory> {
        simulate_course(&self.params, &self.schedule, &self.initial)
    }
}

/// Φ of `state` under the velocities in force for its pulse count and `kind`.
pub fn phase_velocity(state: &PopulationState, params: &ModelParams, kind: IntervalKind) -> Result<f64> {
    let v = VelocityVector::for_interval(params, state.pulses_delivered, kind);
    Ok(mean_velocity(&state.fractions()?, &v))
}

struct Recorder<'a> {
    log: &'a PhaseLog,
    rounding: Rounding,
    records: Vec<TrajectoryRecord>,
}

impl Recorder<'_> {
    /// Records `state`; returns true when the population has gone extinct.
    fn push(&mut self, state: &PopulationState, velocities: &VelocityVector, report_phi: bool) -> bool {
        if self.log.includes(state.phase) {
            self.records.push(TrajectoryRecord::from_state(state, velocities, report_phi));
        }
        self.rounding == Rounding::Integer && state.total() < 1.0
    }
}

/// Runs the full course and records every phase selected by `schedule.log_phases`.
///
/// The initial record reports Φ = 0. With `initial_irradiated` set and an
/// initial state carrying no pulses, the state is counted as having received one.
pub fn simulate_course(
    params: &ModelParams,
    schedule: &ScheduleSpec,
    initial: &PopulationState,
) -> Result<Trajectory> {
    params.validate()?;
    schedule.validate()?;
    if !(initial.total() > 0.0) {
        return Err(Error::InvalidState("initial population must be nonempty".into()));
    }
    let rounding = params.rounding();
    let radiation = RadiationOperator::from_params(params)?;

    let mut state = PopulationState {
        day: 1,
        phase: Phase::Initial,
        ..*initial
    };
    if schedule.initial_irradiated && state.pulses_delivered == 0 {
        state.pulses_delivered = 1;
    }
    let first_kind = if schedule.pulses_per_week > 0 {
        IntervalKind::RadiationPeriod
    } else {
        IntervalKind::Weekend
    };

    let mut recorder = Recorder { log: &schedule.log_phases, rounding, records: Vec::new() };
    let mut max_ode_drift: f64 = 0.0;
    let finish = |recorder: Recorder, termination, drift, pulses| Trajectory {
        records: recorder.records,
        termination,
        rounding,
        max_ode_drift: drift,
        pulses_delivered: pulses,
    };

    let v_initial = VelocityVector::for_interval(params, state.pulses_delivered, first_kind);
    if recorder.push(&state, &v_initial, false) {
        return Ok(finish(recorder, Termination::Extinct { day: 1 }, 0.0, state.pulses_delivered));
    }

    let days_per_week = schedule.days_per_week();
    for week in 0..schedule.weeks {
        for weekday in 0..days_per_week {
            let day = week * days_per_week + weekday + 1;
            state.day = day;
            let kind = if weekday < schedule.pulses_per_week {
                IntervalKind::RadiationPeriod
            } else {
                IntervalKind::Weekend
            };

            let pulse_today = kind == IntervalKind::RadiationPeriod && !(day == 1 && schedule.initial_irradiated);
            if pulse_today {
                state = radiation.apply_pulse(&state, rounding);
                let v = VelocityVector::for_interval(params, state.pulses_delivered, kind);
                if recorder.push(&state, &v, true) {
                    return Ok(finish(recorder, Termination::Extinct { day }, max_ode_drift, state.pulses_delivered));
                }
            }

            let step = growth_day(&state, params, kind)?;
            max_ode_drift = max_ode_drift.max(step.max_drift);
            state = step.state;
            if recorder.push(&state, &step.velocities, true) {
                return Ok(finish(recorder, Termination::Extinct { day }, max_ode_drift, state.pulses_delivered));
            }
        }
    }
    Ok(finish(recorder, Termination::Completed, max_ode_drift, state.pulses_delivered))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table_start() -> PopulationState {
        PopulationState::new([371_270_035.0, 210_386_353.0, 37_127_004.0]).unwrap()
    }

    #[test]
    fn empty_week_records_only_initial() {
        let schedule = ScheduleSpec { weeks: 1, pulses_per_week: 0, weekend_days: 0, ..ScheduleSpec::default() };
        let t = simulate_course(&ModelParams::default(), &schedule, &table_start()).unwrap();
        assert_eq!(t.records.len(), 1);
        assert_eq!(t.records[0].phase, Phase::Initial);
        assert_eq!(t.records[0].phi, 0.0);
        assert_eq!(t.termination, Termination::Completed);
    }

    #[test]
    fn first_week_layout() {
        let schedule = ScheduleSpec { weeks: 2, ..ScheduleSpec::default() };
        let t = simulate_course(&ModelParams::default(), &schedule, &table_start()).unwrap();
        let layout: Vec<(u32, Phase)> = t.records.iter().map(|r| (r.day, r.phase)).collect();
        use Phase::*;
        assert_eq!(
            &layout[..14],
            &[
                (1, Initial),
                (1, PostGrowth),
                (2, PostRadiation),
                (2, PostGrowth),
                (3, PostRadiation),
                (3, PostGrowth),
                (4, PostRadiation),
                (4, PostGrowth),
                (5, PostRadiation),
                (5, PostGrowth),
                (6, PostGrowth),
                (7, PostGrowth),
                (8, PostRadiation),
                (8, PostGrowth),
            ]
        );
        assert_eq!(t.records.len(), 24);
        assert_eq!(t.pulses_delivered, 10);
    }

    #[test]
    fn unirradiated_start_pulses_on_day_one() {
        let schedule = ScheduleSpec { weeks: 1, initial_irradiated: false, ..ScheduleSpec::default() };
        let t = simulate_course(&ModelParams::default(), &schedule, &table_start()).unwrap();
        assert_eq!(t.records[1].phase, Phase::PostRadiation);
        assert_eq!(t.records[1].day, 1);
        assert_eq!(t.records.len(), 1 + 2 * 5 + 2);
        assert_eq!(t.pulses_delivered, 5);
    }

    #[test]
    fn phase_filter() {
        let schedule = ScheduleSpec {
            weeks: 1,
            log_phases: PhaseLog { initial: false, post_growth: true, post_radiation: false },
            ..ScheduleSpec::default()
        };
        let t = simulate_course(&ModelParams::default(), &schedule, &table_start()).unwrap();
        assert_eq!(t.records.len(), 7);
        assert!(t.records.iter().all(|r| r.phase == Phase::PostGrowth));
    }

    #[test]
    fn extinction_stops_the_course() {
        let params = ModelParams { alpha: 3.0, weeks: 4, ..ModelParams::default() };
        let t = simulate_course(&params, &ScheduleSpec::from_params(&params), &PopulationState::new([50.0, 30.0, 20.0]).unwrap()).unwrap();
        match t.termination {
            Termination::Extinct { day } => assert_eq!(t.last().unwrap().day, day),
            other => panic!("expected extinction, got {other:?}"),
        }
        assert!(t.last().unwrap().total < 1.0);
    }

    #[test]
    fn phase_velocity_examples() {
        let p = ModelParams::default();
        let fast = PopulationState::new([0.0, 0.0, 10.0]).unwrap();
        let v2 = VelocityVector::for_interval(&p, 0, IntervalKind::Weekend).v2();
        assert_eq!(phase_velocity(&fast, &p, IntervalKind::Weekend).unwrap(), v2);
        let flat = ModelParams { v0: 0.03, v1: 0.03, a: 1.0, theta: 0.0, ..p };
        let s = PopulationState::new([3.0, 2.0, 5.0]).unwrap();
        assert!((phase_velocity(&s, &flat, IntervalKind::RadiationPeriod).unwrap() - 0.03).abs() < 1e-15);
    }

    #[test]
    fn empty_initial_rejected() {
        let s = PopulationState::new([0.0; 3]).unwrap();
        assert!(simulate_course(&ModelParams::default(), &ScheduleSpec::default(), &s).is_err());
    }
}
