//! Finite-n trend test for statements of the form "x_n → ∞".

use serde::Serialize;

use crate::error::{invalid, Result};

/// Verdict of the trend test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Trend {
    Growing,
    Bounded,
    Inconclusive,
}

impl std::fmt::Display for Trend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Trend::Growing => "growing",
            Trend::Bounded => "bounded",
            Trend::Inconclusive => "inconclusive",
        })
    }
}

/// Thresholds of the trend test.
///
/// Over the upper half of the index range, fit the statistic against `ln n`
/// by least squares. The series is growing if that slope exceeds
/// `slope_min` and the last value exceeds `growth_ratio` times the first
/// value of the whole range; otherwise bounded if `max/min` over the upper
/// half is below `bounded_ratio`; otherwise inconclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrendConfig {
    pub slope_min: f64,
    pub growth_ratio: f64,
    pub bounded_ratio: f64,
}

impl Default for TrendConfig {
    fn default() -> Self {
        TrendConfig {
            slope_min: 0.2,
            growth_ratio: 3.0,
            bounded_ratio: 2.0,
        }
    }
}

impl TrendConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.slope_min.is_finite() && self.growth_ratio > 0.0 && self.bounded_ratio > 1.0) {
            return invalid(format!("invalid trend thresholds {self:?}"));
        }
        Ok(())
    }
}

/// The fitted quantities behind a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrendFit {
    pub slope: f64,
    pub first: f64,
    pub last: f64,
    pub upper_max: f64,
    pub upper_min: f64,
    pub verdict: Trend,
}

/// Least-squares slope of `ys` against `xs`.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Applies the trend test to `values[k]` observed at index `ns[k]`.
pub fn trend_fit(ns: &[usize], values: &[f64], cfg: &TrendConfig) -> TrendFit {
    assert_eq!(ns.len(), values.len(), "one value per index");
    let inconclusive = |first: f64, last: f64| TrendFit {
        slope: f64::NAN,
        first,
        last,
        upper_max: f64::NAN,
        upper_min: f64::NAN,
        verdict: Trend::Inconclusive,
    };
    if ns.len() < 2 || values.iter().any(|v| !v.is_finite()) {
        return inconclusive(
            values.first().copied().unwrap_or(f64::NAN),
            values.last().copied().unwrap_or(f64::NAN),
        );
    }
    let first = values[0];
    let last = values[values.len() - 1];
    let half = ns.len() / 2;
    let upper_ns = &ns[half..];
    let upper = &values[half..];
    if upper_ns.len() < 2 || upper_ns.iter().all(|&n| n == upper_ns[0]) {
        return inconclusive(first, last);
    }
    let xs: Vec<f64> = upper_ns.iter().map(|&n| (n as f64).ln()).collect();
    let slope = least_squares_slope(&xs, upper);
    let upper_max = upper.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let upper_min = upper.iter().copied().fold(f64::INFINITY, f64::min);
    let verdict = if slope > cfg.slope_min && last > cfg.growth_ratio * first {
        Trend::Growing
    } else if upper_min > 0.0 && upper_max / upper_min < cfg.bounded_ratio {
        Trend::Bounded
    } else {
        Trend::Inconclusive
    };
    TrendFit {
        slope,
        first,
        last,
        upper_max,
        upper_min,
        verdict,
    }
}

pub fn trend_verdict(ns: &[usize], values: &[f64], cfg: &TrendConfig) -> Trend {
    trend_fit(ns, values, cfg).verdict
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logarithmic_growth_is_growing() {
        let ns: Vec<usize> = (1..=100).collect();
        let vs: Vec<f64> = ns.iter().map(|&n| (1.0 + n as f64).ln()).collect();
        let fit = trend_fit(&ns, &vs, &TrendConfig::default());
        assert!((fit.slope - 1.0).abs() < 0.05);
        assert_eq!(fit.verdict, Trend::Growing);
    }

    #[test]
    fn constants_are_bounded() {
        let ns: Vec<usize> = (1..=60).collect();
        let vs = vec![2f64.ln(); 60];
        assert_eq!(
            trend_verdict(&ns, &vs, &TrendConfig::default()),
            Trend::Bounded
        );
    }

    #[test]
    fn slow_growth_without_enough_range_is_not_growing() {
        // Slope above threshold but last < 3 × first.
        let ns: Vec<usize> = (1..=60).collect();
        let vs: Vec<f64> = ns.iter().map(|&n| 1.0 + 0.25 * (n as f64).ln()).collect();
        assert_eq!(
            trend_verdict(&ns, &vs, &TrendConfig::default()),
            Trend::Bounded
        );
    }

    #[test]
    fn degenerate_inputs_are_inconclusive() {
        let cfg = TrendConfig::default();
        assert_eq!(trend_verdict(&[5], &[1.0], &cfg), Trend::Inconclusive);
        assert_eq!(
            trend_verdict(&[1, 2, 3], &[1.0, f64::NAN, 2.0], &cfg),
            Trend::Inconclusive
        );
        let ns: Vec<usize> = (1..=20).collect();
        let wild: Vec<f64> = ns
            .iter()
            .map(|&n| if n % 2 == 0 { 1.0 } else { 5.0 })
            .collect();
        assert_eq!(trend_verdict(&ns, &wild, &cfg), Trend::Inconclusive);
    }
}
