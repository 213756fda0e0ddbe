//! Finite-n experiment drivers for the Heisenberg and randomized families.

use rayon::prelude::*;
use serde::Serialize;

use super::family::{
    build_family_with_diameters, FactorRecipe, Family, FamilySpec, Sampler, WeightRule,
};
use super::laplace::exp_sum_mixing;
use super::trend::{trend_fit, Trend, TrendConfig, TrendFit};
use crate::error::{invalid, Result};
use crate::growth::{check_moderate_growth, growth_profile};
use crate::product::{build_flat_with_cap, product_hellinger_ct_with, HellingerMemo};
use crate::walk::{hellinger_distance, moderate_c1, spectral_gap, walk_distribution};

/// One row of a cutoff report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutoffRow {
    pub n: usize,
    pub ln_t: f64,
    pub t: f64,
    pub ln_ell_1: f64,
    pub ell_1: f64,
    /// `t_n ℓ_{n,1}`, the decision statistic.
    pub t_ell_1: f64,
    /// `T_n(ε)` of the proxy sum `f_n` for each `ε` of the report.
    pub mixing: Vec<f64>,
    /// `T_n(ε) ℓ_{n,1}`: mixing time times the smallest rate.
    pub mixing_ell_1: Vec<f64>,
    pub ln_u: Option<f64>,
}

/// Per-n cutoff statistics of a family and the trend verdict on `t_n ℓ_{n,1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutoffReport {
    pub label: String,
    pub seed: u64,
    pub eps: Vec<f64>,
    pub rows: Vec<CutoffRow>,
    pub fit: TrendFit,
    pub verdict: Trend,
    pub trend: TrendConfig,
}

/// Tabulates a built family. With `with_mixing`, also inverts each proxy sum
/// on the family's `ε` grid.
pub fn cutoff_report(family: &Family, label: &str, with_mixing: bool) -> Result<CutoffReport> {
    let eps = if with_mixing {
        family.spec.eps.clone()
    } else {
        Vec::new()
    };
    let rows = family
        .rows
        .par_iter()
        .map(|row| {
            let mixing = eps
                .iter()
                .map(|&e| exp_sum_mixing(&row.proxy, e))
                .collect::<Result<Vec<_>>>()?;
            let ln_ell_1 = row.ln_ell[0];
            Ok(CutoffRow {
                n: row.n,
                ln_t: row.ln_t,
                t: row.ln_t.exp(),
                ln_ell_1,
                ell_1: ln_ell_1.exp(),
                t_ell_1: row.statistic(),
                mixing_ell_1: mixing.iter().map(|m| m * ln_ell_1.exp()).collect(),
                mixing,
                ln_u: row.ln_u.map(|(_, u)| u),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let ns: Vec<usize> = rows.iter().map(|r| r.n).collect();
    let stats: Vec<f64> = rows.iter().map(|r| r.t_ell_1).collect();
    let fit = trend_fit(&ns, &stats, &family.spec.trend);
    Ok(CutoffReport {
        label: label.to_string(),
        seed: family.spec.seed,
        eps,
        rows,
        verdict: fit.verdict,
        fit,
        trend: family.spec.trend,
    })
}

/// Evaluation mode of the Heisenberg experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HeisenbergMode {
    Formula,
    ExactSmall,
}

impl std::str::FromStr for HeisenbergMode {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "formula" => Ok(HeisenbergMode::Formula),
            "exact-small" | "exact" => Ok(HeisenbergMode::ExactSmall),
            _ => invalid(format!("unknown mode '{s}' (formula | exact-small)")),
        }
    }
}

/// Largest Heisenberg modulus evaluated exactly.
pub const EXACT_SMALL_MAX_MODULUS: usize = 5;
/// Largest factor count evaluated exactly.
pub const EXACT_SMALL_MAX_FACTORS: usize = 4;
/// Flat products up to this order also get a discrete-time column.
pub const EXACT_SMALL_FLAT_LIMIT: usize = 2000;

/// One time point of the exact product check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactRow {
    /// Multiple of `t_n`.
    pub a: f64,
    pub t: f64,
    /// Exact `d_H(t)²` of the continuous-time product.
    pub hellinger_sq: f64,
    /// `1 − exp(−g_n(2 C C₁ t)/16)`.
    pub lower: f64,
    /// `1 − exp(−2 C₁² f_n(η t/(2C)))`, for `t > A t_n` only.
    pub upper: Option<f64>,
    pub lower_holds: bool,
    pub upper_holds: Option<bool>,
    /// Discrete-time Hellinger distance after `round(t)` steps, when the
    /// flat product is small enough. Side-by-side only.
    pub discrete_hellinger: Option<f64>,
}

/// Exact Hellinger check of one small product against the rate-sum bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactSmallCheck {
    pub n: usize,
    pub t_n: f64,
    /// Comparability constant between `ℓ` and `p/(qρ²)`; 1 by construction.
    pub c: f64,
    /// Factor constant: `max(max_i λ_i ρ_i², √C_DS)` with `C_DS` the
    /// moderate-growth constant of the `(48, 3)` certificate.
    pub c1: f64,
    pub eta: f64,
    /// `(4C/η)(log₂ C₁ + 1/2)`; the upper bound is asserted for `t > A t_n`.
    pub a_threshold: f64,
    pub rows: Vec<ExactRow>,
}

impl ExactSmallCheck {
    pub fn all_hold(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.lower_holds && r.upper_holds.unwrap_or(true))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeisenbergExperiment {
    pub gamma: f64,
    pub mode: HeisenbergMode,
    pub report: CutoffReport,
    pub exact: Vec<ExactSmallCheck>,
}

/// Heisenberg family spec: factor `i` is the Heisenberg group mod `i + 2`
/// with weight `p_i = i² e^{−i^γ}`.
pub fn heisenberg_family_spec(gamma: f64, n_range: &[usize]) -> FamilySpec {
    FamilySpec::new(
        FactorRecipe::Heisenberg { offset: 2 },
        WeightRule::HeisenbergExp { gamma },
        n_range.to_vec(),
    )
}

const EXACT_MULTIPLES: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];
const BOUND_SLACK: f64 = 1e-12;

fn exact_small(family: &Family, heat_tol: f64) -> Result<Vec<ExactSmallCheck>> {
    let recipe = family.spec.factor;
    let cap = family.spec.cap;
    let memo = HellingerMemo::new();
    let c = 1.0;
    family
        .rows
        .iter()
        .filter(|r| {
            r.n <= EXACT_SMALL_MAX_FACTORS && recipe.modulus(r.n) <= EXACT_SMALL_MAX_MODULUS
        })
        .map(|row| {
            let pw = row.product_walk(&recipe, cap)?;
            let mut c1 = moderate_c1(48.0, 3.0).sqrt();
            let mut eta = f64::INFINITY;
            for (f, &rho) in pw.factors().iter().zip(&row.rho) {
                let profile = growth_profile(f.group(), f.support())?;
                if !check_moderate_growth(&profile, 48.0, 3.0).satisfied {
                    return invalid(format!(
                        "{} fails (48, 3)-moderate growth",
                        f.group().label()
                    ));
                }
                c1 = c1.max(spectral_gap(f)? * (rho * rho) as f64);
                eta = eta.min(f.eta());
            }
            let a_threshold = (4.0 * c / eta) * (c1.log2() + 0.5);
            let t_n = row.ln_t.exp();
            let ell: Vec<f64> = row.ln_ell.iter().map(|l| l.exp()).collect();
            let in_i: Vec<bool> = row
                .ell_factor
                .iter()
                .map(|&i| row.rho[i - 1] >= 4)
                .collect();
            let f_n = |t: f64| ell.iter().map(|l| (-l * t).exp()).sum::<f64>();
            let g_n = |t: f64| {
                ell.iter()
                    .zip(&in_i)
                    .filter(|(_, &keep)| keep)
                    .map(|(l, _)| (-l * t).exp())
                    .sum::<f64>()
            };
            let flat = if pw.flat_order() <= EXACT_SMALL_FLAT_LIMIT as u128 {
                Some(build_flat_with_cap(&pw, cap)?)
            } else {
                None
            };
            let multiples: Vec<f64> = EXACT_MULTIPLES
                .iter()
                .copied()
                .chain([a_threshold * 1.01, a_threshold * 2.0])
                .collect();
            let rows = multiples
                .iter()
                .map(|&a| {
                    let t = a * t_n;
                    let h = product_hellinger_ct_with(&pw, t, heat_tol, &memo)?;
                    let h2 = h * h;
                    let lower = -(-g_n(2.0 * c * c1 * t) / 16.0).exp_m1();
                    let upper = (a > a_threshold)
                        .then(|| -(-2.0 * c1 * c1 * f_n(eta * t / (2.0 * c))).exp_m1());
                    let discrete_hellinger = flat
                        .as_ref()
                        .map(|w| hellinger_distance(&walk_distribution(w, t.round() as u64)));
                    Ok(ExactRow {
                        a,
                        t,
                        hellinger_sq: h2,
                        lower,
                        upper,
                        lower_holds: lower <= h2 + BOUND_SLACK,
                        upper_holds: upper.map(|u| h2 <= u + BOUND_SLACK),
                        discrete_hellinger,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ExactSmallCheck {
                n: row.n,
                t_n,
                c,
                c1,
                eta,
                a_threshold,
                rows,
            })
        })
        .collect()
}

/// The Heisenberg product family at weights `n² e^{−n^γ}`.
pub fn experiment_heisenberg(
    gamma: f64,
    n_range: &[usize],
    mode: HeisenbergMode,
) -> Result<HeisenbergExperiment> {
    experiment_heisenberg_with(&heisenberg_family_spec(gamma, n_range), mode)
}

/// As [`experiment_heisenberg`] with the family spec (cap, trend, `ε`) given.
pub fn experiment_heisenberg_with(
    spec: &FamilySpec,
    mode: HeisenbergMode,
) -> Result<HeisenbergExperiment> {
    let gamma = match spec.weights {
        WeightRule::HeisenbergExp { gamma } => gamma,
        _ => return invalid("the Heisenberg experiment needs heis-exp weights"),
    };
    if !(gamma > 0.0 && gamma.is_finite()) {
        return invalid(format!("gamma must be positive, got {gamma}"));
    }
    let max_n = *spec
        .n_range
        .iter()
        .max()
        .ok_or_else(|| crate::Error::InvalidParameter("empty n_range".into()))?;
    let rho = spec.factor.diameters(max_n, spec.cap)?;
    let family = build_family_with_diameters(spec, &rho)?;
    let report = cutoff_report(&family, &format!("heisenberg gamma={gamma}"), true)?;
    let exact = match mode {
        HeisenbergMode::Formula => Vec::new(),
        HeisenbergMode::ExactSmall => exact_small(&family, 1e-12)?,
    };
    Ok(HeisenbergExperiment {
        gamma,
        mode,
        report,
        exact,
    })
}

/// Weight sequences of the randomized experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum RandomMode {
    /// `p_n = (X_1 + … + X_n)^γ`.
    Poly { gamma: f64 },
    /// `p_n = X_1 × … × X_n`.
    Exp,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub trial: usize,
    pub seed: u64,
    pub fit: TrendFit,
    pub verdict: Trend,
    pub statistic: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RandomizedExperiment {
    pub mode: RandomMode,
    pub sampler: Sampler,
    pub seed: u64,
    pub n_range: Vec<usize>,
    pub trend: TrendConfig,
    pub trials: Vec<TrialOutcome>,
    pub growing: usize,
    pub bounded: usize,
    pub inconclusive: usize,
}

impl RandomizedExperiment {
    pub fn fraction(&self, verdict: Trend) -> f64 {
        let count = match verdict {
            Trend::Growing => self.growing,
            Trend::Bounded => self.bounded,
            Trend::Inconclusive => self.inconclusive,
        };
        count as f64 / self.trials.len() as f64
    }
}

/// Products of lazy cycles `Z_{i+2}` with random weights; trial `k` uses
/// seed `seed + k`.
pub fn experiment_randomized(
    mode: RandomMode,
    sampler: Sampler,
    seed: u64,
    n_range: &[usize],
    trials: usize,
    trend: &TrendConfig,
) -> Result<RandomizedExperiment> {
    sampler.validate()?;
    trend.validate()?;
    if trials == 0 {
        return invalid("at least one trial is needed");
    }
    let weights = match mode {
        RandomMode::Poly { gamma } => {
            if !(gamma > 0.0 && gamma.is_finite()) {
                return invalid(format!("gamma must be positive, got {gamma}"));
            }
            WeightRule::PolySum { gamma, sampler }
        }
        RandomMode::Exp => {
            let el = sampler.expected_log();
            if el.is_nan() || el <= 0.0 {
                return invalid(format!("exp mode needs E[ln X] > 0; {sampler} has {el}"));
            }
            WeightRule::RandomProduct { sampler }
        }
    };
    let mut spec = FamilySpec::new(
        FactorRecipe::CycleLazy { offset: 2 },
        weights,
        n_range.to_vec(),
    );
    spec.trend = *trend;
    spec.validate()?;
    let max_n = *n_range.iter().max().unwrap();
    let rho = spec.factor.diameters(max_n, spec.cap)?;
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut s = spec.clone();
            s.seed = seed.wrapping_add(trial as u64);
            let family = build_family_with_diameters(&s, &rho)?;
            let report = cutoff_report(&family, "randomized", false)?;
            Ok(TrialOutcome {
                trial,
                seed: s.seed,
                verdict: report.verdict,
                fit: report.fit,
                statistic: report.rows.iter().map(|r| r.t_ell_1).collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let count = |v: Trend| outcomes.iter().filter(|o| o.verdict == v).count();
    Ok(RandomizedExperiment {
        mode,
        sampler,
        seed,
        n_range: n_range.to_vec(),
        trend: *trend,
        growing: count(Trend::Growing),
        bounded: count(Trend::Bounded),
        inconclusive: count(Trend::Inconclusive),
        trials: outcomes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heisenberg_fast_decay_is_bounded() {
        let ns: Vec<usize> = (1..=60).collect();
        let exp = experiment_heisenberg(1.5, &ns, HeisenbergMode::Formula).unwrap();
        assert_eq!(exp.report.verdict, Trend::Bounded);
        assert_eq!(exp.report.rows.len(), 60);
        assert!(exp.report.rows.iter().all(|r| r.t_ell_1.is_finite()));
    }

    #[test]
    fn heisenberg_reports_are_deterministic() {
        let ns: Vec<usize> = (1..=30).collect();
        let a = experiment_heisenberg(0.5, &ns, HeisenbergMode::Formula).unwrap();
        let b = experiment_heisenberg(0.5, &ns, HeisenbergMode::Formula).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn exact_small_bounds_hold() {
        let exp = experiment_heisenberg(0.5, &[1, 2, 3], HeisenbergMode::ExactSmall).unwrap();
        assert_eq!(exp.exact.len(), 3);
        for check in &exp.exact {
            assert!(check.all_hold(), "{check:?}");
            assert!(check.rows.iter().any(|r| r.upper.is_some()));
        }
        assert!(exp.exact[0].rows[0].discrete_hellinger.is_some());
        assert!(exp.exact[2].rows[0].discrete_hellinger.is_none());
    }

    #[test]
    fn randomized_inputs_are_validated() {
        let cfg = TrendConfig::default();
        let bad = Sampler::Uniform { a: 0.1, b: 0.5 };
        assert!(experiment_randomized(RandomMode::Exp, bad, 1, &[1, 2, 3], 2, &cfg).is_err());
        let ok = Sampler::Uniform { a: 1.0, b: 3.0 };
        assert!(experiment_randomized(RandomMode::Exp, ok, 1, &[1, 2, 3], 0, &cfg).is_err());
        assert!(experiment_randomized(
            RandomMode::Poly { gamma: -1.0 },
            ok,
            1,
            &[1, 2, 3],
            2,
            &cfg
        )
        .is_err());
    }

    #[test]
    fn randomized_trials_are_reproducible() {
        let cfg = TrendConfig::default();
        let s = Sampler::Uniform { a: 1.0, b: 3.0 };
        let ns: Vec<usize> = (1..=50).collect();
        let a = experiment_randomized(RandomMode::Exp, s, 9, &ns, 4, &cfg).unwrap();
        let b = experiment_randomized(RandomMode::Exp, s, 9, &ns, 4, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trials[3].seed, 12);
        assert_eq!(a.growing + a.bounded + a.inconclusive, 4);
    }
}
