//! Run configuration and the text formats for trajectories, difference
//! curves and sweep summaries.
//!
//! Configuration is a flat TOML document whose keys are the model parameter
//! names. Trajectories are comma-separated with the header
//! `day,phase,y0,y1,y2,x0,x1,x2,phi,v2,total`; real values carry nine decimals.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::analysis::{SweepEntry, TrajectoryDiff, DiffPoint};
use crate::error::{Error, Result};
use crate::model::{Fractions, ModelParams, Phase, PopulationState, Rounding, SIMPLEX_TOLERANCE};
use crate::schedule::{PhaseLog, Scenario, ScheduleSpec, Termination, Trajectory, TrajectoryRecord};

pub const TRAJECTORY_HEADER: [&str; 11] = ["day", "phase", "y0", "y1", "y2", "x0", "x1", "x2", "phi", "v2", "total"];
pub const DIFF_HEADER: [&str; 3] = ["day", "phase", "dphi"];

fn default_ode_step() -> f64 {
    0.01
}
fn default_true() -> bool {
    true
}
fn default_weekend_days() -> u32 {
    2
}
fn default_pulses_per_week() -> u32 {
    5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub alpha: f64,
    pub beta: f64,
    pub dose: f64,
    #[serde(default)]
    pub q_rad: f64,
    #[serde(default)]
    pub p_rad: f64,
    #[serde(default)]
    pub q_mix: f64,
    #[serde(default)]
    pub p_mix: f64,
    pub v0: f64,
    pub v1: f64,
    pub a: f64,
    pub theta: f64,
    pub weeks: u32,
    #[serde(default = "default_ode_step")]
    pub ode_step: f64,
    #[serde(default = "default_true")]
    pub integer_rounding: bool,
    #[serde(default = "default_weekend_days")]
    pub weekend_days: u32,
    #[serde(default = "default_pulses_per_week")]
    pub pulses_per_week: u32,
    /// The initial counts already include the day-1 pulse.
    #[serde(default = "default_true")]
    pub initial_irradiated: bool,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x2: Option<f64>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

/// The initial population as given in a config.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialPopulation {
    Counts([f64; 3]),
    Fractions { total: f64, fractions: [f64; 3] },
}

impl RunConfig {
    pub fn params(&self) -> ModelParams {
        ModelParams {
            alpha: self.alpha,
            beta: self.beta,
            dose: self.dose,
            q_rad: self.q_rad,
            p_rad: self.p_rad,
            q_mix: self.q_mix,
            p_mix: self.p_mix,
            v0: self.v0,
            v1: self.v1,
            a: self.a,
            theta: self.theta,
            weeks: self.weeks,
            ode_step: self.ode_step,
            integer_rounding: self.integer_rounding,
            weekend_days: self.weekend_days,
        }
    }

    pub fn schedule(&self) -> ScheduleSpec {
        ScheduleSpec {
            weeks: self.weeks,
            pulses_per_week: self.pulses_per_week,
            weekend_days: self.weekend_days,
            initial_irradiated: self.initial_irradiated,
            log_phases: PhaseLog::default(),
        }
    }

    pub fn initial_population(&self) -> Result<InitialPopulation> {
        let counts = [self.y0, self.y1, self.y2];
        let fractions = [self.x0, self.x1, self.x2];
        let any_counts = counts.iter().any(Option::is_some);
        let any_fractions = self.total.is_some() || fractions.iter().any(Option::is_some);
        match (any_counts, any_fractions) {
            (true, true) => Err(Error::param(
                "y0",
                "give either the three counts y0, y1, y2 or total with x0, x1, x2, not both",
            )),
            (false, false) => Err(Error::param(
                "y0",
                "missing initial population: give y0, y1, y2 or total with x0, x1, x2",
            )),
            (true, false) => {
                let mut y = [0.0; 3];
                for (i, c) in counts.iter().enumerate() {
                    y[i] = c.ok_or_else(|| Error::param(format!("y{i}"), "missing initial count"))?;
                }
                Ok(InitialPopulation::Counts(y))
            }
            (false, true) => {
                let total = self.total.ok_or_else(|| Error::param("total", "missing initial total"))?;
                let mut x = [0.0; 3];
                for (i, f) in fractions.iter().enumerate() {
                    x[i] = f.ok_or_else(|| Error::param(format!("x{i}"), "missing initial fraction"))?;
                }
                Ok(InitialPopulation::Fractions { total, fractions: x })
            }
        }
    }

    pub fn initial_state(&self) -> Result<PopulationState> {
        let rounding = Rounding::from_flag(self.integer_rounding);
        let state = match self.initial_population()? {
            InitialPopulation::Counts(y) => PopulationState::new(y)?,
            InitialPopulation::Fractions { total, fractions } => {
                let sum: f64 = fractions.iter().sum();
                if (sum - 1.0).abs() > SIMPLEX_TOLERANCE || fractions.iter().any(|x| *x < 0.0) {
                    return Err(Error::param(
                        "x0",
                        format!("initial fractions must be >= 0 and sum to 1 within 1e-9, got sum {sum}"),
                    ));
                }
                PopulationState::from_fractions(&Fractions::new(fractions)?, total, rounding)?
            }
        };
        if !(state.total() > 0.0) {
            return Err(Error::param("total", "initial population must be nonempty"));
        }
        Ok(state.with_pulses(u32::from(self.initial_irradiated)))
    }

    pub fn validate(&self) -> Result<()> {
        self.params().validate()?;
        self.initial_state().map(|_| ())
    }

    pub fn scenario(&self) -> Result<Scenario> {
        let params = self.params();
        params.validate()?;
        Ok(Scenario { schedule: self.schedule(), initial: self.initial_state()?, params })
    }
}

/// Parses and validates a config document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let config: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
    config.validate()?;
    Ok(config)
}

pub fn config_to_string(config: &RunConfig) -> Result<String> {
    toml::to_string(config).map_err(|e| Error::Config(e.to_string()))
}

/// The bundled zero-coefficient configuration.
pub const PAPER_CONFIG: &str = include_str!("../configs/paper.toml");
/// The bundled configuration with nonzero shift and mixing coefficients.
pub const SHIFTED_CONFIG: &str = include_str!("../configs/paper_shifted.toml");

fn real(value: f64) -> String {
    format!("{value:.9}")
}

fn count(value: f64, rounding: Rounding) -> String {
    match rounding {
        Rounding::Integer => format!("{value:.0}"),
        Rounding::Continuous => real(value),
    }
}

pub fn write_trajectory<W: Write>(trajectory: &Trajectory, out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(TRAJECTORY_HEADER)?;
    let rounding = trajectory.rounding;
    for r in &trajectory.records {
        writer.write_record([
            r.day.to_string(),
            r.phase.to_string(),
            count(r.counts[0], rounding),
            count(r.counts[1], rounding),
            count(r.counts[2], rounding),
            real(r.fractions[0]),
            real(r.fractions[1]),
            real(r.fractions[2]),
            real(r.phi),
            real(r.v2),
            count(r.total, rounding),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn trajectory_to_string(trajectory: &Trajectory) -> String {
    let mut buf = Vec::new();
    write_trajectory(trajectory, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("trajectory text is ASCII")
}

fn check_header(found: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    for (i, column) in expected.iter().enumerate() {
        if found.get(i) != Some(column) {
            return Err(Error::Schema {
                column: column.to_string(),
                message: format!("expected header `{column}` at position {i}, found {:?}", found.get(i)),
            });
        }
    }
    if let Some(extra) = found.get(expected.len()) {
        return Err(Error::Schema { column: extra.into(), message: "unexpected extra column".into() });
    }
    Ok(())
}

fn parse_field<T: std::str::FromStr>(record: &csv::StringRecord, header: &[&str], index: usize) -> Result<T> {
    let raw = record.get(index).ok_or_else(|| Error::Schema {
        column: header[index].into(),
        message: "missing value".into(),
    })?;
    raw.parse().map_err(|_| Error::Schema {
        column: header[index].into(),
        message: format!("cannot parse `{raw}`"),
    })
}

/// Reads a trajectory table. Counts written without a decimal point mark the
/// table as integer-valued.
pub fn read_trajectory(text: &str) -> Result<Trajectory> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(text.as_bytes());
    check_header(reader.headers()?, &TRAJECTORY_HEADER)?;
    let h = &TRAJECTORY_HEADER;
    let mut records = Vec::new();
    let mut integer = true;
    for row in reader.records() {
        let row = row?;
        integer &= (2..=4).all(|i| row.get(i).is_some_and(|s| !s.contains('.')));
        records.push(TrajectoryRecord {
            day: parse_field(&row, h, 0)?,
            phase: parse_field::<String>(&row, h, 1)?.parse::<Phase>()?,
            counts: [parse_field(&row, h, 2)?, parse_field(&row, h, 3)?, parse_field(&row, h, 4)?],
            fractions: [parse_field(&row, h, 5)?, parse_field(&row, h, 6)?, parse_field(&row, h, 7)?],
            phi: parse_field(&row, h, 8)?,
            v2: parse_field(&row, h, 9)?,
            total: parse_field(&row, h, 10)?,
        });
    }
    Ok(Trajectory {
        records,
        termination: Termination::Completed,
        rounding: if integer { Rounding::Integer } else { Rounding::Continuous },
        max_ode_drift: 0.0,
        pulses_delivered: 0,
    })
}

pub fn write_diff<W: Write>(diff: &TrajectoryDiff, out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(DIFF_HEADER)?;
    for p in &diff.points {
        writer.write_record([p.day.to_string(), p.phase.to_string(), real(p.dphi)])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_diff(text: &str) -> Result<TrajectoryDiff> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(text.as_bytes());
    check_header(reader.headers()?, &DIFF_HEADER)?;
    let mut points = Vec::new();
    for row in reader.records() {
        let row = row?;
        points.push(DiffPoint {
            day: parse_field(&row, &DIFF_HEADER, 0)?,
            phase: parse_field::<String>(&row, &DIFF_HEADER, 1)?.parse()?,
            dphi: parse_field(&row, &DIFF_HEADER, 2)?,
        });
    }
    Ok(TrajectoryDiff { points, unmatched: 0 })
}

pub fn write_sweep_summary<W: Write>(key: &str, entries: &[SweepEntry], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record([key, "status", "final_day", "final_total", "final_phi", "first_day_above", "error"])?;
    for entry in entries {
        let record = match &entry.outcome {
            Ok(run) => {
                let s = run.summary;
                let status = match s.termination {
                    Termination::Completed => "completed".to_string(),
                    Termination::Extinct { day } => format!("extinct_day_{day}"),
                };
                [
                    entry.value.to_string(),
                    status,
                    s.final_day.to_string(),
                    count(s.final_total, run.trajectory.rounding),
                    real(s.final_phi),
                    s.first_day_above.map(|d| d.to_string()).unwrap_or_default(),
                    String::new(),
                ]
            }
            Err(e) => [
                entry.value.to_string(),
                "error".into(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                e.to_string(),
            ],
        };
        writer.write_record(record)?;
    }
    writer.flush()?;
    Ok(())
}
