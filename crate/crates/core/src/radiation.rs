//! The radiation pulse operator.
//!
//! One pulse kills a fraction `1 - S` of every compartment and moves a share
//! `Q` of fraction 0 into fraction 1 and a share `P` of fraction 1 into
//! fraction 2:
//!
//! ```text
//! | S-Q   0    0 |
//! |  Q   S-P   0 |
//! |  0    P    S |
//! ```
//!
//! Every column sums to `S`, so the total count after `n` pulses is
//! `N0 · Sⁿ` regardless of `Q` and `P`.

use crate::error::{Error, Result};
use crate::model::{survival_fraction, ModelParams, Phase, PopulationState, Rounding};

pub type Matrix3 = [[f64; 3]; 3];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadiationOperator {
    s: f64,
    q: f64,
    p: f64,
}

impl RadiationOperator {
    /// Fails when `Q` or `P` exceed `S`, which would produce negative counts.
    pub fn new(s: f64, q: f64, p: f64) -> Result<Self> {
        if !(s.is_finite() && s > 0.0 && s <= 1.0) {
            return Err(Error::param("survival_fraction", format!("expected 0 < S <= 1, got {s}")));
        }
        for (key, value) in [("q_rad", q), ("p_rad", p)] {
            if !(value.is_finite() && (0.0..=s).contains(&value)) {
                return Err(Error::param(key, format!("expected 0 <= {key} <= S = {s:.6}, got {value}")));
            }
        }
        Ok(RadiationOperator { s, q, p })
    }

    pub fn from_params(params: &ModelParams) -> Result<Self> {
        RadiationOperator::new(survival_fraction(params), params.q_rad, params.p_rad)
    }

    pub fn survival(&self) -> f64 {
        self.s
    }

    pub fn matrix(&self) -> Matrix3 {
        let (s, q, p) = (self.s, self.q, self.p);
        [[s - q, 0.0, 0.0], [q, s - p, 0.0], [0.0, p, s]]
    }

    fn multiply(&self, y: [f64; 3]) -> [f64; 3] {
        let (s, q, p) = (self.s, self.q, self.p);
        [(s - q) * y[0], q * y[0] + (s - p) * y[1], p * y[1] + s * y[2]]
    }

    /// One pulse: `y' = R y`, snapped per `rounding`.
    pub fn apply_pulse(&self, state: &PopulationState, rounding: Rounding) -> PopulationState {
        PopulationState {
            counts: rounding.snap_all(self.multiply(state.counts)),
            phase: Phase::PostRadiation,
            pulses_delivered: state.pulses_delivered + 1,
            ..*state
        }
    }

    /// `n` pulses.
    ///
    /// In continuous mode the state is multiplied by `Rⁿ` computed by repeated
    /// squaring. Integer snapping happens after every pulse, so the integer
    /// mode iterates instead.
    pub fn pulse_power(&self, n: u32, state: &PopulationState, rounding: Rounding) -> PopulationState {
        let counts = match rounding {
            Rounding::Continuous => rounding.snap_all(mat_vec(&matrix_power(&self.matrix(), n), state.counts)),
            Rounding::Integer => {
                let mut y = state.counts;
                for _ in 0..n {
                    y = rounding.snap_all(self.multiply(y));
                }
                y
            }
        };
        PopulationState {
            counts,
            phase: if n == 0 { state.phase } else { Phase::PostRadiation },
            pulses_delivered: state.pulses_delivered + n,
            ..*state
        }
    }
}

pub fn mat_mul(a: &Matrix3, b: &Matrix3) -> Matrix3 {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn mat_vec(m: &Matrix3, y: [f64; 3]) -> [f64; 3] {
    m.map(|row| row[0] * y[0] + row[1] * y[1] + row[2] * y[2])
}

pub fn matrix_power(m: &Matrix3, mut n: u32) -> Matrix3 {
    let mut result = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let mut base = *m;
    while n > 0 {
        if n & 1 == 1 {
            result = mat_mul(&result, &base);
        }
        base = mat_mul(&base, &base);
        n >>= 1;
    }
    result
}
