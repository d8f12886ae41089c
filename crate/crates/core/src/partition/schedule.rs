//! Increasing level sequences `η = η_0 < η_1 < … < η_l < u ≤ η_{l+1}`.

use serde::Serialize;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleKind {
    Geometric,
    Dyadic,
    Custom,
}

/// Levels `η_0 < … < η_l < u` plus the top level `η_{l+1} ≥ u`.
///
/// The top level is kept as generated (it may exceed `u`) for the bound and
/// diagnostic arithmetic; [`EtaSchedule::cells`] clips it to `u` when boxes
/// are materialized.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EtaSchedule {
    kind: ScheduleKind,
    u: f64,
    levels: Vec<f64>,
    top: f64,
}

impl EtaSchedule {
    /// Validates a caller-supplied sequence.
    pub fn custom(levels: Vec<f64>, top: f64, u: f64) -> Result<Self> {
        Self::checked(ScheduleKind::Custom, levels, top, u)
    }

    fn checked(kind: ScheduleKind, levels: Vec<f64>, top: f64, u: f64) -> Result<Self> {
        let bad = |msg: &str| Err(Error::InvalidArgument(format!("invalid schedule: {msg}")));
        let Some(&last) = levels.last() else {
            return bad("no levels");
        };
        if !(levels[0] > 0.0) {
            return bad("eta must be positive");
        }
        if !(u <= 0.5) {
            return bad("u must not exceed 1/2");
        }
        if levels.windows(2).any(|w| !(w[0] < w[1])) {
            return bad("levels must increase strictly");
        }
        if !(last < u && u <= top) {
            return bad("need eta_l < u <= eta_{l+1}");
        }
        Ok(EtaSchedule { kind, u, levels, top })
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn eta(&self) -> f64 {
        self.levels[0]
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    /// Index `l` of the last level below `u`.
    pub fn l(&self) -> usize {
        self.levels.len() - 1
    }

    /// `η_0, …, η_l`.
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// `η_{l+1}` as generated.
    pub fn top(&self) -> f64 {
        self.top
    }

    /// `η_0, …, η_{l+1}`.
    pub fn all_levels(&self) -> Vec<f64> {
        let mut v = self.levels.clone();
        v.push(self.top);
        v
    }

    /// Materialized cells `[η_i, η_{i+1}]`, the last clipped to `u`.
    pub fn cells(&self) -> Vec<(f64, f64)> {
        let mut v = self.all_levels();
        *v.last_mut().unwrap() = self.u;
        v.windows(2).map(|w| (w[0], w[1])).collect()
    }
}

/// `η_i = exp(((p+q)/(2p))^i log η)` while `η_i < u`; the first level at or
/// above `u` becomes the top.
pub fn geometric_schedule(eta: f64, u: f64, p: f64, q: f64) -> Result<EtaSchedule> {
    if !(eta > 0.0 && eta < u && u <= 0.5) {
        return Err(Error::InvalidArgument(format!(
            "geometric schedule needs 0 < eta < u <= 1/2, got eta={eta}, u={u}"
        )));
    }
    if !(q >= 1.0 && p > q && p.is_finite()) {
        return Err(Error::Regime(format!(
            "geometric schedule needs 1 <= q < p < inf, got p={p}, q={q}"
        )));
    }
    let r = (p + q) / (2.0 * p);
    let log_eta = eta.ln();
    let mut levels = vec![eta];
    let mut i = 1;
    let top = loop {
        let next = (r.powi(i) * log_eta).exp();
        if next >= u {
            break next;
        }
        levels.push(next);
        i += 1;
    };
    EtaSchedule::checked(ScheduleKind::Geometric, levels, top, u)
}

/// Largest integer strictly smaller than `x`.
pub fn strict_floor(x: f64) -> i64 {
    x.ceil() as i64 - 1
}

/// `η_i = 2^i η` for `i ≤ l = ⌊-log(2η)/log 2⌋` (strict floor), `u = η_{l+1} = 1/2`.
pub fn dyadic_schedule(eta: f64) -> Result<EtaSchedule> {
    if !(eta > 0.0 && eta < 0.5) {
        return Err(Error::InvalidArgument(format!(
            "dyadic schedule needs 0 < eta < 1/2, got {eta}"
        )));
    }
    let l = strict_floor(-(2.0 * eta).log2()).max(0) as i32;
    let levels = (0..=l).map(|i| eta * 2f64.powi(i)).collect();
    EtaSchedule::checked(ScheduleKind::Dyadic, levels, 0.5, 0.5)
}
