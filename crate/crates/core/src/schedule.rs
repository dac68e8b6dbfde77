//! Kept-fraction schedule for small-loss selection.
//!
//! At epoch T the selecting paradigms keep `1 − τ·min(T^c / T_k, 1)` of
//! each mini-batch: keep everything early, then drop progressively more
//! until the kept fraction saturates at 1−τ after the warm-up.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleParams {
    /// Asymptotic drop rate, usually set to the noise rate.
    pub tau: f64,
    /// Warm-up scale in epochs.
    pub t_k: usize,
    /// Exponent applied to the epoch index.
    pub c: f64,
}

impl ScheduleParams {
    pub fn new(tau: f64, t_k: usize, c: f64) -> Result<Self> {
        let p = ScheduleParams { tau, t_k, c };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::Domain(format!(
                "schedule: tau must lie in (0, 1), got {}",
                self.tau
            )));
        }
        if self.t_k < 1 {
            return Err(Error::Domain("schedule: t_k must be ≥ 1".into()));
        }
        if !(self.c > 0.0) {
            return Err(Error::Domain(format!(
                "schedule: exponent c must be > 0, got {}",
                self.c
            )));
        }
        Ok(())
    }
}

/// Kept fraction at 1-based epoch `t`; lies in [1−τ, 1], non-increasing
/// in `t`, and equals 1−τ once `t^c ≥ t_k`.
pub fn kept_fraction(t: usize, p: &ScheduleParams) -> Result<f64> {
    p.validate()?;
    if t < 1 {
        return Err(Error::Contract("epoch index starts at 1".into()));
    }
    let ramp = ((t as f64).powf(p.c) / p.t_k as f64).min(1.0);
    Ok(1.0 - p.tau * ramp)
}

/// Smallest kept count satisfying `count ≥ fraction · batch_size`,
/// floored at 1 so an update always has at least one sample.
pub fn kept_count(batch_size: usize, fraction: f64) -> Result<usize> {
    if batch_size == 0 {
        return Err(Error::Contract("kept_count: batch_size must be positive".into()));
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Contract(format!(
            "kept_count: fraction must lie in (0, 1], got {fraction}"
        )));
    }
    let count = (fraction * batch_size as f64).ceil() as usize;
    Ok(count.clamp(1, batch_size))
}
