//! Growth between pulses: replicator mixing of the fractions followed by
//! per-fraction division of the counts.

use crate::error::{Error, Result};
use crate::model::{
    dot, fractions_to_counts, Fractions, IntervalKind, ModelParams, Phase, PopulationState, Rounding,
    VelocityVector, SIMPLEX_TOLERANCE,
};

/// Drift of `Σx` above which the integrated fractions are rescaled.
pub const RENORMALIZE_THRESHOLD: f64 = 1e-12;

/// Replicator equations with forward mutation 0 -> 1 -> 2:
///
/// ```text
/// dx0/dt = v0 x0 (1 - Q')            - x0 Φ
/// dx1/dt = v1 x1 (1 - P') + v0 x0 Q' - x1 Φ
/// dx2/dt = v2 x2          + v1 x1 P' - x2 Φ
/// ```
///
/// The components sum to `Φ (1 - Σx)`, which vanishes on the simplex.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReplicatorField {
    pub velocities: VelocityVector,
    pub q_mix: f64,
    pub p_mix: f64,
}

impl ReplicatorField {
    pub fn new(velocities: VelocityVector, q_mix: f64, p_mix: f64) -> Self {
        ReplicatorField { velocities, q_mix, p_mix }
    }

    /// Field with `v2` frozen at its value after `pulses` pulses.
    pub fn from_params(params: &ModelParams, pulses: u32, kind: IntervalKind) -> Self {
        ReplicatorField::new(
            VelocityVector::for_interval(params, pulses, kind),
            params.q_mix,
            params.p_mix,
        )
    }

    fn eval(&self, x: &[f64; 3]) -> [f64; 3] {
        let v = &self.velocities.0;
        let phi = dot(x, v);
        [
            v[0] * x[0] * (1.0 - self.q_mix) - x[0] * phi,
            v[1] * x[1] * (1.0 - self.p_mix) + v[0] * x[0] * self.q_mix - x[1] * phi,
            v[2] * x[2] + v[1] * x[1] * self.p_mix - x[2] * phi,
        ]
    }
}

pub fn replicator_rhs(field: &ReplicatorField, x: &Fractions) -> [f64; 3] {
    field.eval(&x.as_array())
}

/// Raw RK4 result before any renormalization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integration {
    pub fractions: [f64; 3],
    /// Largest `|Σx - 1|` seen after any step.
    pub max_drift: f64,
    pub steps: usize,
}

fn axpy(x: &[f64; 3], h: f64, k: &[f64; 3]) -> [f64; 3] {
    [x[0] + h * k[0], x[1] + h * k[1], x[2] + h * k[2]]
}

/// Number of equal RK4 steps covering `duration` with steps no longer than `step`.
pub fn step_count(duration: f64, step: f64) -> usize {
    ((duration / step - 1e-9).ceil() as usize).max(1)
}

/// Classical fixed-step RK4 without renormalization.
pub fn integrate_growth_raw(
    field: &ReplicatorField,
    x: &Fractions,
    duration: f64,
    step: f64,
) -> Result<Integration> {
    if !(duration.is_finite() && duration > 0.0) {
        return Err(Error::param("duration", format!("expected duration > 0, got {duration}")));
    }
    if !(step.is_finite() && step > 0.0 && step <= duration) {
        return Err(Error::param(
            "ode_step",
            format!("expected 0 < ode_step <= {duration}, got {step}"),
        ));
    }
    let steps = step_count(duration, step);
    let h = duration / steps as f64;
    let mut y = x.as_array();
    let mut max_drift = (y.iter().sum::<f64>() - 1.0).abs();
    for i in 0..steps {
        let k1 = field.eval(&y);
        let k2 = field.eval(&axpy(&y, h / 2.0, &k1));
        let k3 = field.eval(&axpy(&y, h / 2.0, &k2));
        let k4 = field.eval(&axpy(&y, h, &k3));
        for c in 0..3 {
            y[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
        if let Some(component) = y
            .iter()
            .position(|v| !(v.is_finite() && (-SIMPLEX_TOLERANCE..=1.0 + SIMPLEX_TOLERANCE).contains(v)))
        {
            return Err(Error::NumericInstability {
                step: i + 1,
                time: (i + 1) as f64 * h,
                component,
                value: y[component],
            });
        }
        max_drift = max_drift.max((y.iter().sum::<f64>() - 1.0).abs());
    }
    Ok(Integration { fractions: y, max_drift, steps })
}

/// RK4 integration followed by proportional renormalization when the sum
/// drifts by more than [`RENORMALIZE_THRESHOLD`].
pub fn integrate_growth(field: &ReplicatorField, x: &Fractions, duration: f64, step: f64) -> Result<Fractions> {
    let raw = integrate_growth_raw(field, x, duration, step)?;
    Fractions::new(renormalize(raw.fractions))
}

fn renormalize(x: [f64; 3]) -> [f64; 3] {
    let sum: f64 = x.iter().sum();
    if (sum - 1.0).abs() > RENORMALIZE_THRESHOLD {
        x.map(|v| v / sum)
    } else {
        x
    }
}

/// `yᵢ' = yᵢ · 2^(vᵢ · duration)`.
pub fn apply_division(
    state: &PopulationState,
    velocities: &VelocityVector,
    duration: f64,
    rounding: Rounding,
) -> PopulationState {
    let v = velocities.0;
    let y = state.counts;
    PopulationState {
        counts: rounding.snap_all([
            y[0] * (v[0] * duration).exp2(),
            y[1] * (v[1] * duration).exp2(),
            y[2] * (v[2] * duration).exp2(),
        ]),
        phase: Phase::PostGrowth,
        ..*state
    }
}

/// Outcome of one growth interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthStep {
    pub state: PopulationState,
    /// Velocities in force during the interval.
    pub velocities: VelocityVector,
    pub max_drift: f64,
}

/// Mix, convert back to counts, divide: one growth interval of `duration` days.
pub fn growth_interval(
    state: &PopulationState,
    params: &ModelParams,
    kind: IntervalKind,
    duration: f64,
) -> Result<GrowthStep> {
    let rounding = params.rounding();
    let field = ReplicatorField::from_params(params, state.pulses_delivered, kind);
    let total = state.total();
    let x = state.fractions()?;
    let raw = integrate_growth_raw(&field, &x, duration, params.ode_step)?;
    let mixed = Fractions::new(renormalize(raw.fractions))?;
    let mixed_state = PopulationState {
        counts: fractions_to_counts(&mixed, total, rounding)?,
        ..*state
    };
    Ok(GrowthStep {
        state: apply_division(&mixed_state, &field.velocities, duration, rounding),
        velocities: field.velocities,
        max_drift: raw.max_drift,
    })
}

pub fn growth_day(state: &PopulationState, params: &ModelParams, kind: IntervalKind) -> Result<GrowthStep> {
    growth_interval(state, params, kind, 1.0)
}
