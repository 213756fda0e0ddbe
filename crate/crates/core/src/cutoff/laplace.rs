//! Exponential sums `f(t) = Σ a_i e^{−λ_i t}` and the Laplace-transform
//! cutoff criterion built on `λ(c)` and `τ(c)`.

use serde::Serialize;

use super::trend::{trend_fit, Trend, TrendConfig, TrendFit};
use crate::error::{invalid, Error, Result};
use crate::numeric::{bisect_decreasing, compensated_sum, log_sum_exp};

/// `Σ a_i e^{−λ_i t}` with coefficients and rates stored as logarithms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentialSum {
    ln_a: Vec<f64>,
    ln_lam: Vec<f64>,
    /// Indices ordering `λ` ascending, ties kept in input order.
    sorted: Vec<usize>,
}

impl ExponentialSum {
    pub fn new(a: &[f64], lam: &[f64]) -> Result<Self> {
        if let Some(x) = a.iter().chain(lam).find(|x| !(x.is_finite() && **x > 0.0)) {
            return invalid(format!("exponential-sum entries must be positive, got {x}"));
        }
        Self::from_logs(
            a.iter().map(|x| x.ln()).collect(),
            lam.iter().map(|x| x.ln()).collect(),
        )
    }

    /// Builds from `ln a_i` and `ln λ_i`, so rates like `e^{−500}` survive.
    pub fn from_logs(ln_a: Vec<f64>, ln_lam: Vec<f64>) -> Result<Self> {
        if ln_a.is_empty() || ln_a.len() != ln_lam.len() {
            return invalid(format!(
                "exponential sum needs equal, non-zero lengths (got {} and {})",
                ln_a.len(),
                ln_lam.len()
            ));
        }
        if let Some(x) = ln_a.iter().chain(&ln_lam).find(|x| !x.is_finite()) {
            return invalid(format!("log-entry {x} is not finite"));
        }
        let mut sorted: Vec<usize> = (0..ln_lam.len()).collect();
        sorted.sort_by(|&i, &j| ln_lam[i].total_cmp(&ln_lam[j]));
        Ok(ExponentialSum {
            ln_a,
            ln_lam,
            sorted,
        })
    }

    pub fn len(&self) -> usize {
        self.ln_a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ln_a.is_empty()
    }

    pub fn ln_a(&self) -> &[f64] {
        &self.ln_a
    }

    pub fn ln_lambda(&self) -> &[f64] {
        &self.ln_lam
    }

    /// Indices of the terms in ascending-`λ` order.
    pub fn sorted_order(&self) -> &[usize] {
        &self.sorted
    }

    /// `Σ a_i`.
    pub fn total(&self) -> f64 {
        compensated_sum(self.ln_a.iter().map(|x| x.exp()))
    }
}

/// `ln f(t)`.
pub fn exp_sum_ln_eval(s: &ExponentialSum, t: f64) -> f64 {
    let terms: Vec<f64> = s
        .ln_a
        .iter()
        .zip(&s.ln_lam)
        .map(|(la, ll)| if t == 0.0 { *la } else { la - ll.exp() * t })
        .collect();
    log_sum_exp(&terms)
}

/// `f(t) = Σ a_i e^{−λ_i t}`.
pub fn exp_sum_eval(s: &ExponentialSum, t: f64) -> f64 {
    exp_sum_ln_eval(s, t).exp()
}

/// `T(ε) = min{t >= 0 : f(t) <= ε}`.
///
/// Bisection runs on `ln f` down to the resolution of `f64`, well inside the
/// `1e-10` relative time tolerance.
pub fn exp_sum_mixing(s: &ExponentialSum, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps.is_finite()) {
        return invalid(format!("eps must be positive and finite, got {eps}"));
    }
    let target = eps.ln();
    let f = |t: f64| exp_sum_ln_eval(s, t);
    if f(0.0) <= target {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    while f(hi) > target {
        hi *= 2.0;
        if !hi.is_finite() {
            return invalid("exponential-sum mixing time overflows");
        }
    }
    let lo = if hi > 1.0 { hi / 2.0 } else { 0.0 };
    Ok(bisect_decreasing(
        f,
        lo,
        hi,
        target,
        0.0,
        4.0 * f64::EPSILON,
    ))
}

/// `j(c)`, `λ(c)` and `τ(c)`, with rates in ascending order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaTau {
    /// 1-based position in ascending-`λ` order.
    pub j: usize,
    pub ln_lambda_c: f64,
    pub ln_tau_c: f64,
}

impl LambdaTau {
    pub fn lambda_c(&self) -> f64 {
        self.ln_lambda_c.exp()
    }

    pub fn tau_c(&self) -> f64 {
        self.ln_tau_c.exp()
    }

    /// `τ(c)·λ(c)`, formed in log-space.
    pub fn product(&self) -> f64 {
        (self.ln_tau_c + self.ln_lambda_c).exp()
    }
}

/// `j(c) = min{i : a_1 + … + a_i > c}` and
/// `τ(c) = max_{i >= j(c)} ln(1 + a_1 + … + a_i)/λ_i`, indexing the terms by
/// ascending `λ` with prefix sums of `a` in the same order.
pub fn lambda_tau(s: &ExponentialSum, c: f64) -> Result<LambdaTau> {
    if !(c > 0.0 && c.is_finite()) {
        return invalid(format!("c must be positive and finite, got {c}"));
    }
    let mut prefix = crate::numeric::CompensatedSum::new();
    let mut found: Option<(usize, f64)> = None;
    let mut ln_tau = f64::NEG_INFINITY;
    for (pos, &idx) in s.sorted.iter().enumerate() {
        prefix.add(s.ln_a[idx].exp());
        let p = prefix.value();
        if found.is_none() && p > c {
            found = Some((pos + 1, s.ln_lam[idx]));
        }
        if found.is_some() {
            ln_tau = ln_tau.max(p.ln_1p().ln() - s.ln_lam[idx]);
        }
    }
    match found {
        Some((j, ln_lambda_c)) => Ok(LambdaTau {
            j,
            ln_lambda_c,
            ln_tau_c: ln_tau,
        }),
        None => Err(Error::NoIndex {
            c,
            total: prefix.value(),
        }),
    }
}

/// One `(n, value)` series of a criterion scan; `None` marks skipped rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanSeries {
    pub c: f64,
    pub eps: Option<f64>,
    pub ns: Vec<usize>,
    pub values: Vec<Option<f64>>,
    /// Rows without an index `j(c)` (`c >= Σ a`).
    pub skipped: Vec<usize>,
    pub fit: TrendFit,
}

/// The Laplace-criterion tables over a family of exponential sums.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionScan {
    /// `τ_n(c)·λ_n(c)` for each `c`.
    pub tau_lambda: Vec<ScanSeries>,
    /// `T_n(ε)·λ_n(c)` for each `(c, ε)`.
    pub mix_lambda: Vec<ScanSeries>,
    /// Pairs `(c, c')`, `c < c'`, where `τλ` grows at `c` but not at `c'`.
    /// Growth at `c` forces growth at every larger `c'` in the limit.
    pub monotonicity_violations: Vec<(f64, f64)>,
    pub trend: TrendConfig,
}

impl CriterionScan {
    pub fn consistent(&self) -> bool {
        self.monotonicity_violations.is_empty()
    }
}

fn series(
    c: f64,
    eps: Option<f64>,
    rows: &[(usize, Option<f64>)],
    cfg: &TrendConfig,
) -> ScanSeries {
    let kept: Vec<(usize, f64)> = rows
        .iter()
        .filter_map(|(n, v)| v.map(|v| (*n, v)))
        .collect();
    let ns: Vec<usize> = kept.iter().map(|(n, _)| *n).collect();
    let vs: Vec<f64> = kept.iter().map(|(_, v)| *v).collect();
    ScanSeries {
        c,
        eps,
        ns: rows.iter().map(|(n, _)| *n).collect(),
        values: rows.iter().map(|(_, v)| *v).collect(),
        skipped: rows
            .iter()
            .filter(|(_, v)| v.is_none())
            .map(|(n, _)| *n)
            .collect(),
        fit: trend_fit(&ns, &vs, cfg),
    }
}

/// Tabulates `τ_n(c)λ_n(c)` and `T_n(ε)λ_n(c)` across `n` and applies the
/// trend test to each series.
pub fn cutoff_criterion_scan(
    rows: &[(usize, ExponentialSum)],
    c_grid: &[f64],
    eps_grid: &[f64],
    cfg: &TrendConfig,
) -> Result<CriterionScan> {
    cfg.validate()?;
    let mut c_sorted = c_grid.to_vec();
    c_sorted.sort_by(f64::total_cmp);
    let mut tau_lambda = Vec::new();
    let mut mix_lambda = Vec::new();
    let mixing: Vec<Vec<f64>> = rows
        .iter()
        .map(|(_, s)| eps_grid.iter().map(|&e| exp_sum_mixing(s, e)).collect())
        .collect::<Result<_>>()?;
    for &c in &c_sorted {
        let lt: Vec<(usize, Option<LambdaTau>)> = rows
            .iter()
            .map(|(n, s)| match lambda_tau(s, c) {
                Ok(v) => Ok((*n, Some(v))),
                Err(Error::NoIndex { .. }) => Ok((*n, None)),
                Err(e) => Err(e),
            })
            .collect::<Result<_>>()?;
        let tl: Vec<(usize, Option<f64>)> = lt
            .iter()
            .map(|(n, v)| (*n, v.map(|v| v.product())))
            .collect();
        tau_lambda.push(series(c, None, &tl, cfg));
        for (k, &eps) in eps_grid.iter().enumerate() {
            let ml: Vec<(usize, Option<f64>)> = lt
                .iter()
                .zip(&mixing)
                .map(|((n, v), t)| (*n, v.map(|v| t[k] * v.lambda_c())))
                .collect();
            mix_lambda.push(series(c, Some(eps), &ml, cfg));
        }
    }
    let mut monotonicity_violations = Vec::new();
    for (i, a) in tau_lambda.iter().enumerate() {
        if a.fit.verdict == Trend::Growing {
            for b in &tau_lambda[i + 1..] {
                if b.fit.verdict != Trend::Growing {
                    monotonicity_violations.push((a.c, b.c));
                }
            }
        }
    }
    Ok(CriterionScan {
        tau_lambda,
        mix_lambda,
        monotonicity_violations,
        trend: *cfg,
    })
}
