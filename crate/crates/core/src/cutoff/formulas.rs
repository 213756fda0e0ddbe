//! Cutoff-time formulas for product families, evaluated in log-space.

use serde::Serialize;

use super::trend::{trend_fit, TrendConfig, TrendFit};
use crate::error::{invalid, Result};
use crate::numeric::LogValue;

fn check_logs(ln_row: &[f64]) -> Result<()> {
    if ln_row.is_empty() {
        return invalid("empty rate row");
    }
    if let Some(x) = ln_row.iter().find(|x| !x.is_finite()) {
        return invalid(format!("log-rate {x} is not finite"));
    }
    Ok(())
}

fn logs_of(row: &[f64]) -> Result<Vec<f64>> {
    if let Some(x) = row.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        return invalid(format!("rates must be positive, got {x}"));
    }
    Ok(row.iter().map(|x| x.ln()).collect())
}

/// `t = max_i ln(i+1)/ℓ_i` for a non-decreasing row.
pub fn theorem_tn(lrow: &[f64]) -> Result<LogValue> {
    theorem_tn_ln(&logs_of(lrow)?)
}

/// [`theorem_tn`] from `ln ℓ_i`.
pub fn theorem_tn_ln(ln_row: &[f64]) -> Result<LogValue> {
    check_logs(ln_row)?;
    if let Some(i) = (1..ln_row.len()).find(|&i| ln_row[i] < ln_row[i - 1]) {
        return invalid(format!("rate row decreases at position {}", i + 1));
    }
    Ok(LogValue::from_ln(
        ln_row
            .iter()
            .enumerate()
            .map(|(i, l)| ((i + 2) as f64).ln().ln() - l)
            .fold(f64::NEG_INFINITY, f64::max),
    ))
}

/// Monotonicity of a single-index rate sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Increasing,
    Decreasing,
}

impl std::str::FromStr for Direction {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "increasing" | "inc" => Ok(Direction::Increasing),
            "decreasing" | "dec" => Ok(Direction::Decreasing),
            _ => invalid(format!("unknown direction '{s}' (increasing | decreasing)")),
        }
    }
}

/// `u_n` for `ℓ_1..ℓ_n`: `max_i ln(i+1)/ℓ_i` when increasing,
/// `max_i ln(i+1)/ℓ_{n−i+1}` when decreasing.
pub fn theorem_un(lseq: &[f64], direction: Direction) -> Result<LogValue> {
    theorem_un_ln(&logs_of(lseq)?, direction)
}

pub fn theorem_un_ln(ln_seq: &[f64], direction: Direction) -> Result<LogValue> {
    check_logs(ln_seq)?;
    let n = ln_seq.len();
    let bad = (1..n).find(|&i| match direction {
        Direction::Increasing => ln_seq[i] < ln_seq[i - 1],
        Direction::Decreasing => ln_seq[i] > ln_seq[i - 1],
    });
    if let Some(i) = bad {
        return invalid(format!(
            "sequence is not {direction:?} at position {}",
            i + 1
        ));
    }
    let ln_u = (1..=n)
        .map(|i| {
            let l = match direction {
                Direction::Increasing => ln_seq[i - 1],
                Direction::Decreasing => ln_seq[n - i],
            };
            ((i + 1) as f64).ln().ln() - l
        })
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(LogValue::from_ln(ln_u))
}

/// The cutoff decision statistic: `u_n` when increasing, `u_n·ℓ_n` when
/// decreasing.
pub fn un_statistic(ln_seq: &[f64], direction: Direction) -> Result<f64> {
    let u = theorem_un_ln(ln_seq, direction)?;
    Ok(match direction {
        Direction::Increasing => u.value(),
        Direction::Decreasing => (u * LogValue::from_ln(*ln_seq.last().unwrap())).value(),
    })
}

/// Built-in rate sequences for the `u_n` probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum RateRule {
    /// `ℓ_n = n^γ`.
    Power { gamma: f64 },
    /// `ℓ_n = ln(n+1)^γ`.
    LogPower { gamma: f64 },
    /// `ℓ_n = e^{−n^γ}`.
    StretchedExp { gamma: f64 },
    /// `ℓ_n = r^n`.
    Geometric { r: f64 },
}

impl RateRule {
    pub fn ln_value(&self, n: usize) -> f64 {
        let x = n as f64;
        match *self {
            RateRule::Power { gamma } => gamma * x.ln(),
            RateRule::LogPower { gamma } => gamma * (x + 1.0).ln().ln(),
            RateRule::StretchedExp { gamma } => -x.powf(gamma),
            RateRule::Geometric { r } => x * r.ln(),
        }
    }

    /// Parses `power:γ`, `log-power:γ`, `stretched-exp:γ`, `geometric:r` or
    /// `constant`.
    pub fn parse(s: &str) -> Result<Self> {
        let (name, arg) = s.split_once(':').unwrap_or((s, ""));
        let num = || {
            arg.trim().parse::<f64>().map_err(|_| {
                crate::Error::InvalidParameter(format!("bad parameter in rate rule '{s}'"))
            })
        };
        let rule = match name.trim() {
            "constant" => RateRule::Power { gamma: 0.0 },
            "power" => RateRule::Power { gamma: num()? },
            "log-power" => RateRule::LogPower { gamma: num()? },
            "stretched-exp" | "exp" => RateRule::StretchedExp { gamma: num()? },
            "geometric" => {
                let r = num()?;
                if r.is_nan() || r <= 0.0 {
                    return invalid(format!("geometric ratio must be positive, got {r}"));
                }
                RateRule::Geometric { r }
            }
            other => return invalid(format!("unknown rate rule '{other}'")),
        };
        Ok(rule)
    }

    fn direction(&self) -> Direction {
        let increasing = match *self {
            RateRule::Power { gamma } | RateRule::LogPower { gamma } => gamma >= 0.0,
            RateRule::StretchedExp { gamma } => gamma <= 0.0,
            RateRule::Geometric { r } => r >= 1.0,
        };
        if increasing {
            Direction::Increasing
        } else {
            Direction::Decreasing
        }
    }

    /// Which clause of the `u_n` lemma applies, from the closed form.
    pub fn clause(&self) -> LemmaClause {
        match (self.direction(), *self) {
            (Direction::Increasing, rule) => {
                // sup ln n / ℓ_n is infinite exactly for slowly growing rates.
                let unbounded = match rule {
                    RateRule::Power { gamma } => gamma <= 0.0,
                    RateRule::LogPower { gamma } => gamma < 1.0,
                    RateRule::Geometric { r } => r <= 1.0,
                    RateRule::StretchedExp { .. } => true,
                };
                LemmaClause::Increasing {
                    sup_log_ratio_infinite: unbounded,
                }
            }
            (Direction::Decreasing, rule) => {
                let to_one = match rule {
                    RateRule::Power { .. } | RateRule::LogPower { .. } => true,
                    RateRule::StretchedExp { gamma } => gamma < 1.0,
                    RateRule::Geometric { .. } => false,
                };
                if to_one {
                    LemmaClause::DecreasingRatioToOne
                } else {
                    LemmaClause::DecreasingRatioAboveOne
                }
            }
        }
    }
}

/// The applicable clause and its prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "clause", rename_all = "kebab-case")]
pub enum LemmaClause {
    /// `u_n → ∞` iff `sup ln n/ℓ_n = ∞`.
    Increasing { sup_log_ratio_infinite: bool },
    /// `ℓ_n/ℓ_{n+1} → 1`, so `u_n ℓ_n → ∞`.
    DecreasingRatioToOne,
    /// `liminf ℓ_n/ℓ_{n+1} > 1`, so `u_n ℓ_n = O(1)`.
    DecreasingRatioAboveOne,
}

impl LemmaClause {
    pub fn predicts_growth(&self) -> bool {
        match self {
            LemmaClause::Increasing {
                sup_log_ratio_infinite,
            } => *sup_log_ratio_infinite,
            LemmaClause::DecreasingRatioToOne => true,
            LemmaClause::DecreasingRatioAboveOne => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeRow {
    pub n: usize,
    /// `ln n / ℓ_n`.
    pub log_over_rate: f64,
    /// `ℓ_n / ℓ_{n+1}`.
    pub ratio: f64,
    /// `u_n` (increasing) or `u_n ℓ_n` (decreasing).
    pub statistic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaProbe {
    pub rule: RateRule,
    pub direction: Direction,
    pub clause: LemmaClause,
    pub rows: Vec<ProbeRow>,
    pub fit: TrendFit,
}

/// Tabulates `ln n/ℓ_n`, `ℓ_n/ℓ_{n+1}` and the decision statistic over
/// `n_range`, and reports the clause that applies.
pub fn lemma_unln_probe(
    rule: RateRule,
    n_range: &[usize],
    cfg: &TrendConfig,
) -> Result<LemmaProbe> {
    cfg.validate()?;
    if n_range.is_empty() || n_range.contains(&0) {
        return invalid("n_range must be non-empty and start at 1 or later");
    }
    let direction = rule.direction();
    let max_n = *n_range.iter().max().unwrap();
    let ln_seq: Vec<f64> = (1..=max_n).map(|n| rule.ln_value(n)).collect();
    let rows = n_range
        .iter()
        .map(|&n| {
            Ok(ProbeRow {
                n,
                log_over_rate: ((n as f64).ln().ln() - ln_seq[n - 1]).exp(),
                ratio: (rule.ln_value(n) - rule.ln_value(n + 1)).exp(),
                statistic: un_statistic(&ln_seq[..n], direction)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let stats: Vec<f64> = rows.iter().map(|r| r.statistic).collect();
    let fit = trend_fit(n_range, &stats, cfg);
    Ok(LemmaProbe {
        rule,
        direction,
        clause: rule.clause(),
        rows,
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutoff::trend::Trend;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn tn_examples() {
        assert_abs_diff_eq!(
            theorem_tn(&[1.0, 1.0, 1.0]).unwrap().value(),
            4f64.ln(),
            epsilon = 1e-15
        );
        let dec: Vec<f64> = (1..=5).map(|i| (-(i as f64)).exp()).collect();
        assert!(theorem_tn(&dec).is_err());
        let logs: Vec<f64> = (1..=10).map(|i| ((i + 1) as f64).ln()).collect();
        assert_abs_diff_eq!(theorem_tn(&logs).unwrap().value(), 1.0, epsilon = 1e-15);
        assert!(theorem_tn(&[]).is_err());
        assert!(theorem_tn(&[0.0]).is_err());
    }

    #[test]
    fn tn_survives_underflowing_rates() {
        // e^{-60^{1.5}} underflows to zero in linear space.
        let ln_row = vec![-(60f64.powf(1.5)), -400.0];
        let t = theorem_tn_ln(&ln_row).unwrap();
        assert_abs_diff_eq!(t.ln(), 2f64.ln().ln() + 60f64.powf(1.5), epsilon = 1e-9);
    }

    #[test]
    fn un_examples() {
        let inc: Vec<f64> = (1..=30).map(|i| i as f64).collect();
        assert_abs_diff_eq!(
            theorem_un(&inc, Direction::Increasing).unwrap().value(),
            2f64.ln(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            theorem_un(&[0.5], Direction::Increasing).unwrap().value(),
            2f64.ln() / 0.5,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            theorem_un(&[0.5], Direction::Decreasing).unwrap().value(),
            2f64.ln() / 0.5,
            epsilon = 1e-15
        );
        let n = 20;
        let dec: Vec<f64> = (1..=n).map(|i| 1.0 / i as f64).collect();
        let direct = (1..=n)
            .map(|i| ((i + 1) as f64).ln() * (n - i + 1) as f64)
            .fold(0.0, f64::max);
        assert_abs_diff_eq!(
            theorem_un(&dec, Direction::Decreasing).unwrap().value(),
            direct,
            epsilon = 1e-12
        );
        assert!(theorem_un(&dec, Direction::Increasing).is_err());
        assert!(theorem_un(&inc, Direction::Decreasing).is_err());
    }

    #[test]
    fn harmonic_rates_give_growing_unln() {
        let probe = lemma_unln_probe(
            RateRule::Power { gamma: -1.0 },
            &(1..=200).collect::<Vec<_>>(),
            &TrendConfig::default(),
        )
        .unwrap();
        assert_eq!(probe.clause, LemmaClause::DecreasingRatioToOne);
        assert_eq!(probe.fit.verdict, Trend::Growing);
    }

    #[test]
    fn probe_examples() {
        let ns: Vec<usize> = (1..=200).collect();
        let cfg = TrendConfig::default();
        let slow = lemma_unln_probe(RateRule::StretchedExp { gamma: 0.5 }, &ns, &cfg).unwrap();
        assert_eq!(slow.clause, LemmaClause::DecreasingRatioToOne);
        assert!(slow.rows.last().unwrap().ratio < 1.05);
        assert!(slow
            .rows
            .windows(2)
            .all(|w| w[1].statistic >= w[0].statistic));
        // Growth is logarithmic: the 3x rise the trend test asks for takes
        // until n ≈ 1000.
        assert!(slow.fit.slope > cfg.slope_min);
        assert_eq!(slow.fit.verdict, Trend::Bounded);
        let long: Vec<usize> = (1..=2000).collect();
        let slow = lemma_unln_probe(RateRule::StretchedExp { gamma: 0.5 }, &long, &cfg).unwrap();
        assert_eq!(slow.fit.verdict, Trend::Growing);

        let geo = lemma_unln_probe(RateRule::Geometric { r: 0.5 }, &ns, &cfg).unwrap();
        assert_eq!(geo.clause, LemmaClause::DecreasingRatioAboveOne);
        let bound = 2.0
            * (1..=200)
                .map(|i| ((i + 1) as f64).ln() / 2f64.powi(i - 1))
                .fold(0.0, f64::max);
        assert!(geo.rows.iter().all(|r| r.statistic <= bound + 1e-12));
        assert_abs_diff_eq!(geo.rows[100].ratio, 2.0, epsilon = 1e-12);
        assert_eq!(geo.fit.verdict, Trend::Bounded);

        let flat = lemma_unln_probe(RateRule::parse("constant").unwrap(), &ns, &cfg).unwrap();
        assert_eq!(
            flat.clause,
            LemmaClause::Increasing {
                sup_log_ratio_infinite: true
            }
        );
        assert_abs_diff_eq!(flat.rows[199].statistic, 201f64.ln(), epsilon = 1e-12);
        assert_eq!(flat.fit.verdict, Trend::Growing);
    }

    #[test]
    fn rule_parsing() {
        assert_eq!(
            RateRule::parse("geometric:0.5").unwrap(),
            RateRule::Geometric { r: 0.5 }
        );
        assert_eq!(
            RateRule::parse("stretched-exp:0.5").unwrap(),
            RateRule::StretchedExp { gamma: 0.5 }
        );
        assert!(RateRule::parse("geometric:-1").is_err());
        assert!(RateRule::parse("bogus:1").is_err());
    }

    proptest! {
        #[test]
        fn tn_matches_brute_force(mut row in proptest::collection::vec(1e-3f64..1e3, 1..40)) {
            row.sort_by(f64::total_cmp);
            let brute = row.iter().enumerate().map(|(i, l)| ((i + 2) as f64).ln() / l).fold(0.0, f64::max);
            let t = theorem_tn(&row).unwrap().value();
            prop_assert!((t - brute).abs() <= 1e-12 * brute);
        }

        #[test]
        fn proxy_sum_at_multiples_of_tn(mut row in proptest::collection::vec(1e-3f64..1e3, 1..60), a in 1.05f64..6.0) {
            row.sort_by(f64::total_cmp);
            let t = theorem_tn(&row).unwrap().value();
            let f: f64 = row.iter().map(|l| (-l * a * t).exp()).sum();
            prop_assert!(f <= 1.0 / (a - 1.0) + 1e-12);
        }
    }
}
