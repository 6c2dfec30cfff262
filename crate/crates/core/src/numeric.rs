//! Small numeric helpers.

use serde::{Deserialize, Serialize};

/// A positive real stored as `mantissa · exp(log_scale)`.
///
/// Replica contractions produce values like `χ^{-4 N_A}` that underflow
/// binary64, so results carry their scale separately.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogValue {
    pub mantissa: f64,
    pub log_scale: f64,
}

impl LogValue {
    pub fn new(mantissa: f64, log_scale: f64) -> Self {
        LogValue { mantissa, log_scale }
    }

    pub fn from_value(v: f64) -> Self {
        LogValue { mantissa: v, log_scale: 0.0 }
    }

    /// Build from a natural logarithm.
    pub fn from_ln(ln: f64) -> Self {
        LogValue { mantissa: 1.0, log_scale: ln }
    }

    /// Natural logarithm of the (positive) value.
    pub fn ln(&self) -> f64 {
        self.mantissa.ln() + self.log_scale
    }

    /// The plain value; may under- or overflow.
    pub fn value(&self) -> f64 {
        self.mantissa * self.log_scale.exp()
    }

    /// Ratio `self / other` as a plain number.
    pub fn ratio(&self, other: &LogValue) -> f64 {
        (self.mantissa / other.mantissa) * (self.log_scale - other.log_scale).exp()
    }

    pub fn scale(self, factor: f64) -> Self {
        LogValue { mantissa: self.mantissa * factor, log_scale: self.log_scale }
    }
}

/// `n!` as a float.
pub fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Binomial coefficient as a float.
pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// Relative difference `|a − b| / max(|a|, |b|)`, zero when both vanish.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}
