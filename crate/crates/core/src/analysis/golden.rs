//! Transcribed reference tables and trajectory comparison against them.

use std::ops::RangeInclusive;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::Phase;
use crate::schedule::Trajectory;

const PAPER_TABLES: &str = include_str!("../../data/tables.psv");
const PAPER_TABLES_SHA256: &str = include_str!("../../data/tables.sha256");

pub const GOLDEN_COLUMNS: [&str; 6] = ["day", "phase", "y0", "y1", "y2", "velocity"];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GoldenRow {
    pub day: u32,
    pub phase: Phase,
    pub counts: [f64; 3],
    pub velocity: f64,
}

/// Pipe-delimited reference table with columns `day|phase|y0|y1|y2|velocity`.
#[derive(Clone, Debug, PartialEq)]
pub struct GoldenTable {
    pub rows: Vec<GoldenRow>,
}

fn field<T: std::str::FromStr>(record: &csv::StringRecord, index: usize) -> Result<T> {
    let column = GOLDEN_COLUMNS[index];
    let raw = record.get(index).ok_or_else(|| Error::Schema {
        column: column.into(),
        message: "missing value".into(),
    })?;
    raw.trim().parse().map_err(|_| Error::Schema {
        column: column.into(),
        message: format!("cannot parse `{raw}`"),
    })
}

impl GoldenTable {
    pub fn parse(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .delimiter(b'|')
            .flexible(true)
            .from_reader(text.as_bytes());
        let header = reader.headers()?.clone();
        for (i, expected) in GOLDEN_COLUMNS.iter().enumerate() {
            match header.get(i) {
                Some(found) if found == *expected => {}
                found => {
                    return Err(Error::Schema {
                        column: expected.to_string(),
                        message: format!("expected header `{expected}` at position {i}, found {found:?}"),
                    })
                }
            }
        }
        if let Some(extra) = header.get(GOLDEN_COLUMNS.len()) {
            return Err(Error::Schema { column: extra.into(), message: "unexpected extra column".into() });
        }
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record?;
            rows.push(GoldenRow {
                day: field(&record, 0)?,
                phase: field(&record, 1)?,
                counts: [field(&record, 2)?, field(&record, 3)?, field(&record, 4)?],
                velocity: field(&record, 5)?,
            });
        }
        Ok(GoldenTable { rows })
    }

    /// The bundled transcription of the published day-by-day tables
    /// (days 1 to 48), verified against its SHA-256 checksum.
    pub fn published() -> Result<Self> {
        let expected = PAPER_TABLES_SHA256.split_whitespace().next().unwrap_or_default();
        let found = format!("{:x}", Sha256::digest(PAPER_TABLES.as_bytes()));
        if found != expected {
            return Err(Error::Checksum { expected: expected.into(), found });
        }
        GoldenTable::parse(PAPER_TABLES)
    }

    pub fn from_trajectory(trajectory: &Trajectory) -> Self {
        GoldenTable {
            rows: trajectory
                .records
                .iter()
                .map(|r| GoldenRow { day: r.day, phase: r.phase, counts: r.counts, velocity: r.phi })
                .collect(),
        }
    }

    pub fn days(&self, range: RangeInclusive<u32>) -> Self {
        GoldenTable { rows: self.rows.iter().filter(|r| range.contains(&r.day)).copied().collect() }
    }

    pub fn first_row(&self) -> Option<&GoldenRow> {
        self.rows.first()
    }
}

/// Relative tolerances for the count columns and the velocity column.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub counts: f64,
    pub velocity: f64,
}

impl Tolerance {
    pub fn uniform(tol: f64) -> Self {
        Tolerance { counts: tol, velocity: tol }
    }

    pub fn counts_only(tol: f64) -> Self {
        Tolerance { counts: tol, velocity: f64::INFINITY }
    }

    pub fn velocity_only(tol: f64) -> Self {
        Tolerance { counts: f64::INFINITY, velocity: tol }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GoldenCell {
    pub day: u32,
    pub phase: Phase,
    pub column: &'static str,
    pub expected: f64,
    pub actual: f64,
    pub rel_error: f64,
    pub tolerance: f64,
}

impl GoldenCell {
    pub fn passed(&self) -> bool {
        self.rel_error <= self.tolerance
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GoldenReport {
    pub cells: Vec<GoldenCell>,
    /// Golden rows with no matching `(day, phase)` record in the trajectory.
    pub missing: Vec<(u32, Phase)>,
}

impl GoldenReport {
    pub fn passed(&self) -> bool {
        self.missing.is_empty() && self.cells.iter().all(GoldenCell::passed)
    }

    /// Worst cell among the columns that carry a finite tolerance.
    pub fn worst(&self) -> Option<&GoldenCell> {
        self.cells
            .iter()
            .filter(|c| c.tolerance.is_finite())
            .max_by(|a, b| a.rel_error.total_cmp(&b.rel_error))
    }

    pub fn max_error(&self) -> f64 {
        self.worst().map_or(0.0, |c| c.rel_error)
    }
}

/// `|a - b| / max(|a|, |b|)`, zero when both are zero. Symmetric in its arguments.
pub fn relative_error(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Cell-by-cell comparison aligned on `(day, phase)`.
pub fn compare_to_golden(trajectory: &Trajectory, golden: &GoldenTable, tolerance: Tolerance) -> GoldenReport {
    let mut cells = Vec::new();
    let mut missing = Vec::new();
    for row in &golden.rows {
        let Some(record) = trajectory.records.iter().find(|r| r.day == row.day && r.phase == row.phase) else {
            missing.push((row.day, row.phase));
            continue;
        };
        let columns = [
            ("y0", row.counts[0], record.counts[0], tolerance.counts),
            ("y1", row.counts[1], record.counts[1], tolerance.counts),
            ("y2", row.counts[2], record.counts[2], tolerance.counts),
            ("velocity", row.velocity, record.phi, tolerance.velocity),
        ];
        cells.extend(columns.into_iter().map(|(column, expected, actual, tolerance)| GoldenCell {
            day: row.day,
            phase: row.phase,
            column,
            expected,
            actual,
            rel_error: relative_error(actual, expected),
            tolerance,
        }));
    }
    GoldenReport { cells, missing }
}
