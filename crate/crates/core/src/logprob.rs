//! Log-probabilities with an explicit representation of zero mass.

use std::fmt;

/// A natural-log probability (or density) value.
///
/// Zero mass is carried as [`LogProb::Impossible`] rather than a floating
/// `-inf`, so arithmetic on finite values never has to reason about
/// infinities. Conversion to `f64` happens only at export boundaries.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LogProb {
    Impossible,
    Finite(f64),
}

impl LogProb {
    pub const ONE: LogProb = LogProb::Finite(0.0);

    pub fn is_impossible(self) -> bool {
        matches!(self, LogProb::Impossible)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            LogProb::Impossible => None,
            LogProb::Finite(v) => Some(v),
        }
    }

    /// Lossy conversion for storage: zero mass becomes `f64::NEG_INFINITY`.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::NEG_INFINITY)
    }

    /// Product of probabilities (sum in log space).
    pub fn and(self, other: LogProb) -> LogProb {
        match (self, other) {
            (LogProb::Finite(a), LogProb::Finite(b)) => LogProb::Finite(a + b),
            _ => LogProb::Impossible,
        }
    }
}

impl fmt::Display for LogProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogProb::Impossible => f.write_str("-inf"),
            LogProb::Finite(v) => write!(f, "{v}"),
        }
    }
}

/// Streaming log-sum-exp accumulator over finite log terms.
#[derive(Clone, Copy, Debug)]
pub(crate) struct LogSumExp {
    max: f64,
    scaled: f64,
}

impl LogSumExp {
    pub(crate) fn new() -> Self {
        LogSumExp {
            max: f64::NAN,
            scaled: 0.0,
        }
    }

    pub(crate) fn push(&mut self, term: f64) {
        if self.max.is_nan() {
            self.max = term;
            self.scaled = 1.0;
        } else if term <= self.max {
            self.scaled += (term - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - term).exp() + 1.0;
            self.max = term;
        }
    }

    /// `None` when no term was pushed.
    pub(crate) fn value(&self) -> Option<f64> {
        if self.max.is_nan() {
            None
        } else {
            Some(self.max + self.scaled.ln())
        }
    }
}

/// `ln(sum(exp(terms)))` of a non-empty finite slice.
pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let mut acc = LogSumExp::new();
    for &t in terms {
        acc.push(t);
    }
    acc.value().unwrap_or(f64::NEG_INFINITY)
}
