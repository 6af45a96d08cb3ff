//! Model parameters, the population state, and the scalar model functions.
//!
//! A tumor is split into three fractions ordered by growth velocity: fraction 0
//! grows slowest, fraction 2 fastest. The state is tracked as cell counts
//! `y = (y0, y1, y2)`; fractions `x = y / N` live on the probability simplex.

use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Allowed deviation of `x0 + x1 + x2` from one (and of each entry below zero).
pub const SIMPLEX_TOLERANCE: f64 = 1e-9;

/// Count snapping policy applied after every operator that produces counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Rounding {
    /// Nearest integer, ties away from zero, floored at zero.
    #[default]
    Integer,
    Continuous,
}

impl Rounding {
    pub fn from_flag(integer_rounding: bool) -> Self {
        if integer_rounding {
            Rounding::Integer
        } else {
            Rounding::Continuous
        }
    }

    pub fn snap(self, count: f64) -> f64 {
        match self {
            Rounding::Integer => count.round().max(0.0),
            Rounding::Continuous => count.max(0.0),
        }
    }

    pub fn snap_all(self, counts: [f64; 3]) -> [f64; 3] {
        counts.map(|c| self.snap(c))
    }
}

/// Which form of the threshold function governs a growth interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntervalKind {
    /// A weekday on which a pulse is delivered.
    RadiationPeriod,
    /// A growth-only day without a pulse.
    Weekend,
}

/// Where in the daily cycle a state was recorded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Phase {
    Initial,
    PostGrowth,
    PostRadiation,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Initial => "initial",
            Phase::PostGrowth => "post_growth",
            Phase::PostRadiation => "post_radiation",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Phase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "initial" => Ok(Phase::Initial),
            "post_growth" => Ok(Phase::PostGrowth),
            "post_radiation" => Ok(Phase::PostRadiation),
            other => Err(Error::Schema {
                column: "phase".into(),
                message: format!(
                    "unknown phase `{other}` (expected initial, post_growth or post_radiation)"
                ),
            }),
        }
    }
}

/// All model constants plus the schedule length and numeric policy.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    /// Linear LQ coefficient (1/Gy).
    pub alpha: f64,
    /// Quadratic LQ coefficient (1/Gy^2).
    pub beta: f64,
    /// Dose per pulse (Gy).
    pub dose: f64,
    /// Per-pulse shift probability, fraction 0 -> 1.
    pub q_rad: f64,
    /// Per-pulse shift probability, fraction 1 -> 2.
    pub p_rad: f64,
    /// Mutation rate per division, fraction 0 -> 1.
    pub q_mix: f64,
    /// Mutation rate per division, fraction 1 -> 2.
    pub p_mix: f64,
    /// Growth velocity of fraction 0 (1/day).
    pub v0: f64,
    /// Growth velocity of fraction 1 (1/day).
    pub v1: f64,
    /// Multiplier linking the fast-fraction velocity to `v1`.
    pub a: f64,
    /// Threshold offset in the exponent of `psi`.
    pub theta: f64,
    pub weeks: u32,
    /// RK4 step (days).
    pub ode_step: f64,
    pub integer_rounding: bool,
    /// Growth-only days per week.
    pub weekend_days: u32,
}

impl Default for ModelParams {
    /// Zero-coefficient regime: α = 0.2, β = 0.02, d = 2 Gy, v0 = 0.01,
    /// v1 = 0.016, a = 5, θ = 0.005, six weeks.
    fn default() -> Self {
        ModelParams {
            alpha: 0.2,
            beta: 0.02,
            dose: 2.0,
            q_rad: 0.0,
            p_rad: 0.0,
            q_mix: 0.0,
            p_mix: 0.0,
            v0: 0.01,
            v1: 0.016,
            a: 5.0,
            theta: 0.005,
            weeks: 6,
            ode_step: 0.01,
            integer_rounding: true,
            weekend_days: 2,
        }
    }
}

/// Keys accepted by [`ModelParams::with_value`].
pub const PARAM_KEYS: &[&str] = &[
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
];

impl ModelParams {
    /// Default constants with the nonzero shift and mixing coefficients
    /// Q = P = 0.0005, Q' = P' = 0.1.
    pub fn shifted() -> Self {
        ModelParams {
            q_rad: 0.0005,
            p_rad: 0.0005,
            q_mix: 0.1,
            p_mix: 0.1,
            ..ModelParams::default()
        }
    }

    pub fn rounding(&self) -> Rounding {
        Rounding::from_flag(self.integer_rounding)
    }

    pub fn survival_fraction(&self) -> f64 {
        survival_fraction(self)
    }

    /// True when every shift and mixing coefficient is zero.
    pub fn is_unmixed(&self) -> bool {
        self.q_rad == 0.0 && self.p_rad == 0.0 && self.q_mix == 0.0 && self.p_mix == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = |key: &str, value: f64| {
            if value.is_finite() && value >= 0.0 {
                Ok(())
            } else {
                Err(Error::param(key, format!("expected a finite value >= 0, got {value}")))
            }
        };
        nonneg("alpha", self.alpha)?;
        nonneg("beta", self.beta)?;
        nonneg("dose", self.dose)?;
        nonneg("v0", self.v0)?;
        nonneg("v1", self.v1)?;
        nonneg("a", self.a)?;
        if !self.theta.is_finite() {
            return Err(Error::param("theta", format!("expected a finite value, got {}", self.theta)));
        }
        let s = self.survival_fraction();
        for (key, value) in [("q_rad", self.q_rad), ("p_rad", self.p_rad)] {
            if !(value.is_finite() && (0.0..=s).contains(&value)) {
                return Err(Error::param(
                    key,
                    format!("expected 0 <= {key} <= S = {s:.6}, got {value}"),
                ));
            }
        }
        for (key, value) in [("q_mix", self.q_mix), ("p_mix", self.p_mix)] {
            if !(value.is_finite() && (0.0..=1.0).contains(&value)) {
                return Err(Error::param(key, format!("expected 0 <= {key} <= 1, got {value}")));
            }
        }
        if self.weeks < 1 {
            return Err(Error::param("weeks", "expected weeks >= 1, got 0"));
        }
        if !(self.ode_step.is_finite() && self.ode_step > 0.0) {
            return Err(Error::param(
                "ode_step",
                format!("expected ode_step > 0, got {}", self.ode_step),
            ));
        }
        Ok(())
    }

    /// Returns a copy with one field replaced by name, validated.
    ///
    /// Integer and boolean fields accept only whole values (`integer_rounding`
    /// takes 0 or 1).
    pub fn with_value(&self, key: &str, value: f64) -> Result<ModelParams> {
        let whole = |value: f64| -> Result<u32> {
            if value.is_finite() && value >= 0.0 && value.fract() == 0.0 && value <= u32::MAX as f64 {
                Ok(value as u32)
            } else {
                Err(Error::param(key, format!("expected a nonnegative integer, got {value}")))
            }
        };
        let mut next = self.clone();
        match key {
            "alpha" => next.alpha = value,
            "beta" => next.beta = value,
            "dose" => next.dose = value,
            "q_rad" => next.q_rad = value,
            "p_rad" => next.p_rad = value,
            "q_mix" => next.q_mix = value,
            "p_mix" => next.p_mix = value,
            "v0" => next.v0 = value,
            "v1" => next.v1 = value,
            "a" => next.a = value,
            "theta" => next.theta = value,
            "weeks" => next.weeks = whole(value)?,
            "ode_step" => next.ode_step = value,
            "weekend_days" => next.weekend_days = whole(value)?,
            "integer_rounding" => {
                next.integer_rounding = match whole(value)? {
                    0 => false,
                    1 => true,
                    _ => return Err(Error::param(key, "expected 0 or 1")),
                }
            }
            _ => {
                return Err(Error::param(
                    key,
                    format!("unknown parameter (expected one of {})", PARAM_KEYS.join(", ")),
                ))
            }
        }
        next.validate()?;
        Ok(next)
    }
}

/// A point on the probability simplex.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fractions([f64; 3]);

impl Fractions {
    /// Validates that every entry is `>= -1e-9` and the sum is within `1e-9` of one.
    pub fn new(x: [f64; 3]) -> Result<Self> {
        let sum: f64 = x.iter().sum();
        if x.iter().any(|v| !v.is_finite() || *v < -SIMPLEX_TOLERANCE)
            || (sum - 1.0).abs() > SIMPLEX_TOLERANCE
        {
            return Err(Error::InvalidState(format!(
                "fractions {x:?} are not on the simplex (sum {sum})"
            )));
        }
        Ok(Fractions(x))
    }

    pub const fn vertex(i: usize) -> Self {
        let mut x = [0.0; 3];
        x[i] = 1.0;
        Fractions(x)
    }

    pub fn as_array(&self) -> [f64; 3] {
        self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// Per-fraction growth velocities (1/day).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VelocityVector(pub [f64; 3]);

impl VelocityVector {
    pub fn new(v0: f64, v1: f64, v2: f64) -> Self {
        VelocityVector([v0, v1, v2])
    }

    pub fn uniform(v: f64) -> Self {
        VelocityVector([v; 3])
    }

    /// Velocities in force after `pulses` pulses, with `v2` from [`v2_of`].
    pub fn for_interval(params: &ModelParams, pulses: u32, kind: IntervalKind) -> Self {
        VelocityVector([params.v0, params.v1, v2_of(params, pulses, kind)])
    }

    pub fn v2(&self) -> f64 {
        self.0[2]
    }
}

/// `S = exp(-alpha*d - beta*d^2)`.
pub fn survival_fraction(params: &ModelParams) -> f64 {
    let d = params.dose;
    (-params.alpha * d - params.beta * d * d).exp()
}

/// `ln 2 / T_d`.
pub fn velocity_from_doubling_time(doubling_time: f64) -> Result<f64> {
    if !(doubling_time.is_finite() && doubling_time > 0.0) {
        return Err(Error::param(
            "doubling_time",
            format!("expected a positive doubling time, got {doubling_time}"),
        ));
    }
    Ok(LN_2 / doubling_time)
}

/// Mean velocity `Φ = Σ vᵢ xᵢ`.
pub fn mean_velocity(x: &Fractions, v: &VelocityVector) -> f64 {
    dot(&x.0, &v.0)
}

pub(crate) fn dot(x: &[f64; 3], v: &[f64; 3]) -> f64 {
    v[0] * x[0] + v[1] * x[1] + v[2] * x[2]
}

/// Threshold factor after `pulses` delivered pulses.
///
/// On radiation days the exponent is `θ - n(√(Q²+P²)·d + √(Q'²+P'²)·d²)`;
/// on weekend days it is `θ - n·√(Q'²+P'²)`. Both forms are nonincreasing in
/// `n` and reduce to `exp(θ)` when all coefficients vanish.
pub fn psi(params: &ModelParams, pulses: u32, kind: IntervalKind) -> f64 {
    let n = f64::from(pulses);
    let pulse_norm = params.q_rad.hypot(params.p_rad);
    let mix_norm = params.q_mix.hypot(params.p_mix);
    let d = params.dose;
    let decrement = match kind {
        IntervalKind::RadiationPeriod => pulse_norm * d + mix_norm * d * d,
        IntervalKind::Weekend => mix_norm,
    };
    (params.theta - n * decrement).exp()
}

/// Fast-fraction velocity `v2 = a · v1 · ψ`.
pub fn v2_of(params: &ModelParams, pulses: u32, kind: IntervalKind) -> f64 {
    params.a * params.v1 * psi(params, pulses, kind)
}

/// The three fraction counts at one instant of the course.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PopulationState {
    pub counts: [f64; 3],
    pub day: u32,
    pub phase: Phase,
    pub pulses_delivered: u32,
}

impl PopulationState {
    pub fn new(counts: [f64; 3]) -> Result<Self> {
        if let Some((i, c)) = counts.iter().enumerate().find(|(_, c)| !(c.is_finite() && **c >= 0.0)) {
            return Err(Error::param(format!("y{i}"), format!("expected a finite count >= 0, got {c}")));
        }
        Ok(PopulationState {
            counts,
            day: 1,
            phase: Phase::Initial,
            pulses_delivered: 0,
        })
    }

    /// Builds a state from a total and a simplex point using `rounding`.
    pub fn from_fractions(x: &Fractions, total: f64, rounding: Rounding) -> Result<Self> {
        PopulationState::new(fractions_to_counts(x, total, rounding)?)
    }

    pub fn with_pulses(mut self, pulses: u32) -> Self {
        self.pulses_delivered = pulses;
        self
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }

    pub fn fractions(&self) -> Result<Fractions> {
        counts_to_fractions(self)
    }
}

/// `x = y / N`; fails with [`Error::EmptyPopulation`] when `N = 0`.
pub fn counts_to_fractions(state: &PopulationState) -> Result<Fractions> {
    let total = state.total();
    if total <= 0.0 {
        return Err(Error::EmptyPopulation);
    }
    Ok(Fractions(state.counts.map(|c| c / total)))
}

/// `y = x · N`, snapped per `rounding`.
///
/// With [`Rounding::Integer`] each component is rounded independently and the
/// remainder is not redistributed, so the rounded total can differ from
/// `total` by up to 1.5 cells.
pub fn fractions_to_counts(x: &Fractions, total: f64, rounding: Rounding) -> Result<[f64; 3]> {
    if !(total.is_finite() && total >= 0.0) {
        return Err(Error::param("total", format!("expected a finite total >= 0, got {total}")));
    }
    Ok(rounding.snap_all(x.0.map(|xi| xi * total)))
}
