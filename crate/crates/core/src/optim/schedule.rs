use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    Constant,
    OneCycle,
}

/// Learning-rate schedule over `total_steps` optimizer steps.
///
/// One-cycle: cosine warm-up from `max_lr / div_factor` to `max_lr` over the
/// first `round(pct_start · total_steps)` steps, then cosine annealing down to
/// `max_lr / final_div_factor` at `total_steps`.
#[derive(Clone, Debug, PartialEq)]
pub struct LrSchedule {
    pub kind: ScheduleKind,
    pub max_lr: f64,
    pub total_steps: usize,
    pub pct_start: f64,
    pub div_factor: f64,
    pub final_div_factor: f64,
}

impl LrSchedule {
    pub fn constant(lr: f64) -> Self {
        Self {
            kind: ScheduleKind::Constant,
            max_lr: lr,
            total_steps: 0,
            pct_start: 0.3,
            div_factor: 25.0,
            final_div_factor: 1e4,
        }
    }

    pub fn one_cycle(max_lr: f64, total_steps: usize) -> Self {
        Self {
            kind: ScheduleKind::OneCycle,
            total_steps,
            ..Self::constant(max_lr)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.max_lr > 0.0) {
            return Err(Error::invalid(format!(
                "max_lr must be > 0, got {}",
                self.max_lr
            )));
        }
        if self.kind == ScheduleKind::OneCycle {
            if !(self.pct_start > 0.0 && self.pct_start < 1.0) {
                return Err(Error::invalid(format!(
                    "pct_start must be in (0, 1), got {}",
                    self.pct_start
                )));
            }
            if !(self.div_factor > 1.0) || !(self.final_div_factor > 1.0) {
                return Err(Error::invalid("div factors must be > 1"));
            }
        }
        Ok(())
    }

    pub fn initial_lr(&self) -> f64 {
        match self.kind {
            ScheduleKind::Constant => self.max_lr,
            ScheduleKind::OneCycle => self.max_lr / self.div_factor,
        }
    }

    pub fn final_lr(&self) -> f64 {
        match self.kind {
            ScheduleKind::Constant => self.max_lr,
            ScheduleKind::OneCycle => self.max_lr / self.final_div_factor,
        }
    }

    pub fn peak_step(&self) -> usize {
        (self.pct_start * self.total_steps as f64).round() as usize
    }

    /// Steps past `total_steps` clamp to the final value.
    pub fn lr_at(&self, step: usize) -> f64 {
        if self.kind == ScheduleKind::Constant {
            return self.max_lr;
        }
        let step = step.min(self.total_steps);
        let peak = self.peak_step();
        if step <= peak {
            if peak == 0 {
                return self.max_lr;
            }
            cosine(self.initial_lr(), self.max_lr, step as f64 / peak as f64)
        } else {
            let span = (self.total_steps - peak) as f64;
            cosine(self.max_lr, self.final_lr(), (step - peak) as f64 / span)
        }
    }
}

/// Cosine interpolation from `start` (p = 0) to `end` (p = 1), exact at both ends.
fn cosine(start: f64, end: f64, p: f64) -> f64 {
    if p <= 0.0 {
        start
    } else if p >= 1.0 {
        end
    } else {
        end + (start - end) / 2.0 * (1.0 + (PI * p).cos())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_cycle_endpoints() {
        let s = LrSchedule::one_cycle(5e-3, 1000);
        assert_eq!(s.lr_at(0), 5e-3 / 25.0);
        assert_eq!(s.lr_at(300), 5e-3);
        assert_eq!(s.lr_at(1000), 5e-3 / 1e4);
        assert_eq!(s.lr_at(5000), 5e-3 / 1e4);
    }

    #[test]
    fn one_cycle_shape() {
        let s = LrSchedule::one_cycle(1.0, 777);
        let peak = s.peak_step();
        let lrs: Vec<f64> = (0..=777).map(|i| s.lr_at(i)).collect();
        assert!(lrs[..=peak].windows(2).all(|w| w[1] >= w[0]));
        assert!(lrs[peak..].windows(2).all(|w| w[1] <= w[0]));
        // continuity: no jump bigger than the steepest cosine slope allows
        let max_jump = lrs
            .windows(2)
            .map(|w| (w[1] - w[0]).abs())
            .fold(0.0, f64::max);
        assert!(max_jump < PI / 2.0 / peak as f64 * 1.01);
    }

    #[test]
    fn constant_is_flat() {
        let s = LrSchedule::constant(0.01);
        assert!((0..100).all(|i| s.lr_at(i) == 0.01));
    }

    #[test]
    fn validation() {
        let mut s = LrSchedule::one_cycle(0.1, 10);
        assert!(s.validate().is_ok());
        s.pct_start = 1.0;
        assert!(s.validate().is_err());
        s.pct_start = 0.3;
        s.div_factor = 1.0;
        assert!(s.validate().is_err());
    }
}
