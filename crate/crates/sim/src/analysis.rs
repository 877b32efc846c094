//! Post-processing of a written time series: the decay envelope check and
//! the recomputed blow-up accumulator.

use nsch_core::diagnostics::{self, DiagRecord};

use crate::error::{SimError, SimResult};

/// Relative slack allowed when comparing energies with the envelope.
pub const ENVELOPE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub a0: f64,
    /// Fitted so the envelope matches `E(0)` (never negative).
    pub c: f64,
    pub eps0: f64,
    pub mass0: f64,
    pub floor: f64,
    pub rows: usize,
    /// `(t, E, envelope)` for every row above the envelope.
    pub violations: Vec<(f64, f64, f64)>,
    pub e0: f64,
    pub e_end: f64,
    pub t_end: f64,
}

impl DecayReport {
    pub fn envelope_holds(&self) -> bool {
        self.violations.is_empty()
    }

    /// `E(t_end) <= E(0) / 2 + floor`.
    pub fn halved(&self) -> bool {
        self.e_end <= 0.5 * self.e0 + self.floor
    }
}

pub fn check_decay(records: &[DiagRecord], nu_star: f64, eps0: f64, c0: f64) -> SimResult<DecayReport> {
    let first = records
        .first()
        .ok_or_else(|| SimError::Format("time series has no rows".into()))?;
    let last = records.last().expect("non-empty");
    let a0 = diagnostics::a0_coefficient(nu_star, c0, eps0)
        .map_err(|e| SimError::invalid("check-decay", e.to_string()))?;
    let mass0 = first.mass;
    let floor = 0.25 * a0 * mass0;
    let c = ((first.energy - floor) / eps0).max(0.0);
    let violations = records
        .iter()
        .filter_map(|r| {
            let env = diagnostics::decay_envelope(r.t - first.t, c, eps0, a0, mass0);
            (r.energy > env * (1.0 + ENVELOPE_SLACK)).then_some((r.t, r.energy, env))
        })
        .collect();
    Ok(DecayReport {
        a0,
        c,
        eps0,
        mass0,
        floor,
        rows: records.len(),
        violations,
        e0: first.energy,
        e_end: last.energy,
        t_end: last.t,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SerrinReport {
    pub exponent: f64,
    /// Left-endpoint integral over the series rows.
    pub recomputed: f64,
    /// Accumulator stored in the last row.
    pub stored: f64,
    /// Rows where the stored accumulator decreased.
    pub decreasing_rows: Vec<usize>,
    pub finite: bool,
}

impl SerrinReport {
    pub fn ok(&self) -> bool {
        self.finite && self.decreasing_rows.is_empty()
    }
}

/// Rebuilds `int ||u||_{L^r}^{4r/(r-6)} dt` from the `lr_norm_u` column.
pub fn serrin_from_series(records: &[DiagRecord], r: f64) -> SimResult<SerrinReport> {
    let exponent = diagnostics::serrin_exponent(r).map_err(|e| SimError::invalid("r", e.to_string()))?;
    let mut acc = 0.0;
    for w in records.windows(2) {
        acc += (w[1].t - w[0].t) * w[0].lr_norm_u.powf(exponent);
    }
    let decreasing_rows = records
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1].serrin_acc < w[0].serrin_acc)
        .map(|(k, _)| k + 1)
        .collect();
    let stored = records.last().map_or(0.0, |r| r.serrin_acc);
    Ok(SerrinReport {
        exponent,
        recomputed: acc,
        stored,
        decreasing_rows,
        finite: acc.is_finite() && records.iter().all(|r| r.serrin_acc.is_finite()),
    })
}
