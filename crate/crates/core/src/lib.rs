//! Deterministic simulation of a three-fraction tumor population under
//! pulsed, weekly fractionated radiotherapy.
//!
//! Each pulse is a lower-bidiagonal matrix acting on the cell counts
//! ([`radiation`]). Between pulses the fraction proportions follow replicator
//! equations with forward mutation, after which every fraction divides at its
//! own rate ([`growth`]). [`schedule`] strings pulses and growth days into a
//! treatment course and records the day-by-day trajectory; [`analysis`]
//! compares, differences and sweeps trajectories.
//!
//! ```
//! use repopulation::{ModelParams, PopulationState, ScheduleSpec, simulate_course};
//!
//! let params = ModelParams::default();
//! let initial = PopulationState::new([371_270_035.0, 210_386_353.0, 37_127_004.0])?;
//! let course = simulate_course(&params, &ScheduleSpec::from_params(&params), &initial)?;
//! let last = course.last().unwrap();
//! assert!(last.fractions[2] > 0.5);
//! # Ok::<(), repopulation::Error>(())
//! ```

pub mod analysis;
pub mod check;
pub mod cli;
mod error;
pub mod growth;
pub mod io;
pub mod model;
pub mod radiation;
pub mod schedule;

pub use error::{Error, Result};
pub use model::{
    counts_to_fractions, fractions_to_counts, mean_velocity, psi, survival_fraction, v2_of,
    velocity_from_doubling_time, Fractions, IntervalKind, ModelParams, Phase, PopulationState, Rounding,
    VelocityVector,
};
pub use radiation::RadiationOperator;
pub use schedule::{simulate_course, Scenario, ScheduleSpec, Termination, Trajectory, TrajectoryRecord};

// The guide's code listings compile and run as doctests of this crate.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/radiation.md")]
    mod radiation {}
    #[doc = include_str!("../../../book/src/growth.md")]
    mod growth {}
    #[doc = include_str!("../../../book/src/schedule.md")]
    mod schedule {}
    #[doc = include_str!("../../../book/src/analysis.md")]
    mod analysis {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
