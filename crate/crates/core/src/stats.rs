//! Small statistics helpers for Monte-Carlo measurements.

use serde::Serialize;

/// A measured proportion with its Wilson score interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Proportion {
    pub hits: u64,
    pub trials: u64,
    pub estimate: f64,
    pub low: f64,
    pub high: f64,
}

/// z for a two-sided 95% interval.
pub const Z95: f64 = 1.959_963_984_540_054;

impl Proportion {
    pub fn wilson(hits: u64, trials: u64) -> Self {
        if trials == 0 {
            return Proportion {
                hits,
                trials,
                estimate: 0.0,
                low: 0.0,
                high: 1.0,
            };
        }
        let n = trials as f64;
        let p = hits as f64 / n;
        let z2 = Z95 * Z95;
        let denom = 1.0 + z2 / n;
        let centre = (p + z2 / (2.0 * n)) / denom;
        let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        Proportion {
            hits,
            trials,
            estimate: p,
            low: (centre - half).max(0.0),
            high: (centre + half).min(1.0),
        }
    }

    pub fn contains(&self, value: f64) -> bool {
        self.low <= value && value <= self.high
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_reference_values() {
        let p = Proportion::wilson(50, 100);
        assert!((p.low - 0.403_831_5).abs() < 1e-6, "{}", p.low);
        assert!((p.high - 0.596_168_5).abs() < 1e-6);
        let zero = Proportion::wilson(0, 10);
        assert_eq!(zero.low, 0.0);
        assert!(zero.high > 0.2 && zero.high < 0.35);
        let all = Proportion::wilson(10, 10);
        assert!((all.high - 1.0).abs() < 1e-12);
    }
}
