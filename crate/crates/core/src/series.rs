//! Shared evaluation machinery for the alternating outage/diversity series.
//!
//! Outer sums run in linear f64 with Neumaier compensation; the size of the
//! largest term is tracked so callers can bound the cancellation noise floor
//! (`max_term * eps * n`) of the finished sum. Inner sums of positive terms
//! given in log space go through [`LogSumExp`].

use crate::outage::SeriesControl;

/// Online log-sum-exp accumulator for positive terms supplied as ln values.
/// -inf pushes (structurally zero terms) are ignored.
pub(crate) struct LogSumExp {
    max: f64,
    sum: f64,
}

impl LogSumExp {
    pub(crate) fn new() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    pub(crate) fn push(&mut self, ln_term: f64) {
        if ln_term == f64::NEG_INFINITY {
            return;
        }
        if ln_term <= self.max {
            self.sum += (ln_term - self.max).exp();
        } else if self.max == f64::NEG_INFINITY {
            self.max = ln_term;
            self.sum = 1.0;
        } else {
            self.sum = self.sum * (self.max - ln_term).exp() + 1.0;
            self.max = ln_term;
        }
    }

    pub(crate) fn ln_total(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}

/// Outcome of an outer series evaluation.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SeriesOutcome {
    /// Compensated partial sum (last finite value if the series blew up).
    pub sum: f64,
    /// Outer terms consumed.
    pub terms_used: usize,
    /// Stopping rule fired before `max_terms` and every term stayed finite.
    pub stopped: bool,
    /// Magnitude of the largest outer term seen.
    pub max_abs_term: f64,
}

impl SeriesOutcome {
    /// Bound on the floating-point noise left in `sum` after cancellation.
    pub(crate) fn noise_floor(&self) -> f64 {
        self.max_abs_term * f64::EPSILON * self.terms_used as f64
    }
}

/// Sums `term_fn(0) + term_fn(1) + ...` under the truncation policy: stop
/// once `consecutive_small` successive terms have magnitude below
/// `rel_tol * |partial sum|`. A non-finite term aborts with `stopped = false`
/// (the series is running away past f64 range).
pub(crate) fn sum_outer_series<F>(ctl: &SeriesControl, mut term_fn: F) -> SeriesOutcome
where
    F: FnMut(u32) -> f64,
{
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    let mut max_abs = 0.0_f64;
    let mut streak = 0usize;
    let mut terms = 0usize;
    let mut stopped = false;
    for q in 0..ctl.max_terms {
        let t = term_fn(q as u32);
        terms = q + 1;
        if !t.is_finite() {
            return SeriesOutcome {
                sum: sum + comp,
                terms_used: terms,
                stopped: false,
                max_abs_term: f64::INFINITY,
            };
        }
        let s = sum + t;
        comp += if sum.abs() >= t.abs() {
            (sum - s) + t
        } else {
            (t - s) + sum
        };
        sum = s;
        max_abs = max_abs.max(t.abs());
        let threshold = ctl.rel_tol * (sum + comp).abs().max(f64::MIN_POSITIVE);
        if t.abs() <= threshold {
            streak += 1;
            if streak >= ctl.consecutive_small {
                stopped = true;
                break;
            }
        } else {
            streak = 0;
        }
    }
    SeriesOutcome {
        sum: sum + comp,
        terms_used: terms,
        stopped,
        max_abs_term: max_abs,
    }
}
