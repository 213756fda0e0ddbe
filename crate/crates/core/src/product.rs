//! Weighted product walks and the continuous-time Hellinger product identity.
//!
//! A product walk on `G_1 × … × G_n` picks coordinate `i` with probability
//! `p_i` and moves it by `Q_i`. In continuous time the semigroup factorizes as
//! `H_t = H_{1,p_1 t} ⊗ … ⊗ H_{n,p_n t}`, which makes the Hellinger distance
//! of the product an exact function of the factor distances:
//! `d_H(t)² = 1 − Π (1 − d_{i,H}(p_i t)²)`. Nothing like this holds in
//! discrete time.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::group::{GroupTable, DEFAULT_ENUMERATION_CAP};
use crate::numeric::compensated_sum;
use crate::walk::{continuous_distance, heat_distribution, Distribution, Metric, WalkSpec};

/// Default Lemma-style sandwich parameter `A = 1/√2`.
pub const DEFAULT_SANDWICH_A: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Factor walks with coordinate-selection weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductWalkSpec {
    factors: Vec<WalkSpec>,
    weights: Vec<f64>,
}

impl ProductWalkSpec {
    /// Weights must be positive and sum to 1 within `1e-12`.
    pub fn new(factors: Vec<WalkSpec>, weights: Vec<f64>) -> Result<Self> {
        if factors.is_empty() {
            return invalid("a product walk needs at least one factor");
        }
        if factors.len() != weights.len() {
            return invalid(format!(
                "{} factors but {} weights",
                factors.len(),
                weights.len()
            ));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return invalid(format!("product weight {w} is not positive"));
        }
        let total = compensated_sum(weights.iter().copied());
        if (total - 1.0).abs() > 1e-12 {
            return invalid(format!("product weights sum to {total}, not 1"));
        }
        Ok(ProductWalkSpec { factors, weights })
    }

    /// Normalizes positive raw weights before validating.
    pub fn normalized(factors: Vec<WalkSpec>, raw: &[f64]) -> Result<Self> {
        if let Some(w) = raw.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return invalid(format!("product weight {w} is not positive"));
        }
        let total = compensated_sum(raw.iter().copied());
        Self::new(factors, raw.iter().map(|w| w / total).collect())
    }

    pub fn factors(&self) -> &[WalkSpec] {
        &self.factors
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// `Π |G_i|`, saturating.
    pub fn flat_order(&self) -> u128 {
        self.factors
            .iter()
            .fold(1u128, |acc, f| acc.saturating_mul(f.order() as u128))
    }
}

/// Memo key of a factor walk: its group label and the exact bits of its law.
pub fn factor_key(w: &WalkSpec) -> String {
    let mut key = String::from(w.group().label());
    key.push('|');
    for (x, q) in w.law().probs().iter().enumerate() {
        if *q > 0.0 {
            let _ = write!(key, "{x}:{:016x};", q.to_bits());
        }
    }
    key
}

/// Flattens a product walk into one walk on the direct product group.
pub fn build_flat(pw: &ProductWalkSpec) -> Result<WalkSpec> {
    build_flat_with_cap(pw, DEFAULT_ENUMERATION_CAP)
}

pub fn build_flat_with_cap(pw: &ProductWalkSpec, cap: usize) -> Result<WalkSpec> {
    if pw.len() == 1 {
        return Ok(pw.factors[0].clone());
    }
    let group =
        GroupTable::product_with_cap(pw.factors.iter().map(|f| f.group().clone()).collect(), cap)?;
    let mut probs = vec![0.0; group.order()];
    for (i, (f, &p)) in pw.factors.iter().zip(&pw.weights).enumerate() {
        for (x, &q) in f.law().probs().iter().enumerate() {
            if q > 0.0 {
                probs[group.lift(i, x)] += p * q;
            }
        }
    }
    WalkSpec::new(group, Distribution::new(probs)?)
}

/// Memoized factor Hellinger distances keyed by `(factor, time, tol)`.
///
/// Insertions are idempotent, so concurrent writers racing on a key store the
/// same value. An optional backing file persists entries across runs.
#[derive(Debug, Default)]
pub struct HellingerMemo {
    table: Mutex<HashMap<(String, u64, u64), f64>>,
    path: Option<PathBuf>,
}

impl HellingerMemo {
    pub fn new() -> Self {
        Self::default()
    }

    /// Loads entries from `path` if it exists; [`save`](Self::save) writes back.
    pub fn open(path: &Path) -> Result<Self> {
        let mut table = HashMap::new();
        if path.exists() {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Error::InvalidParameter(format!("cannot read cache {}: {e}", path.display()))
            })?;
            for (lineno, line) in text.lines().enumerate() {
                let fields: Vec<&str> = line.split('\t').collect();
                let parsed = (fields.len() == 4)
                    .then(|| {
                        let t = u64::from_str_radix(fields[1], 16).ok()?;
                        let tol = u64::from_str_radix(fields[2], 16).ok()?;
                        let v = u64::from_str_radix(fields[3], 16).ok()?;
                        Some((t, tol, f64::from_bits(v)))
                    })
                    .flatten();
                match parsed {
                    Some((t, tol, v)) => {
                        table.insert((fields[0].to_string(), t, tol), v);
                    }
                    None => {
                        return invalid(format!(
                            "malformed cache line {} in {}",
                            lineno + 1,
                            path.display()
                        ))
                    }
                }
            }
        }
        Ok(HellingerMemo {
            table: Mutex::new(table),
            path: Some(path.to_path_buf()),
        })
    }

    pub fn len(&self) -> usize {
        self.table.lock().expect("memo lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Writes all entries, sorted, to the backing file (no-op without one).
    pub fn save(&self) -> Result<()> {
        let Some(path) = &self.path else {
            return Ok(());
        };
        let table = self.table.lock().expect("memo lock");
        let mut entries: Vec<_> = table.iter().collect();
        entries.sort_by(|a, b| a.0.cmp(b.0));
        let mut out = String::new();
        for ((key, t, tol), v) in entries {
            let _ = writeln!(out, "{key}\t{t:016x}\t{tol:016x}\t{:016x}", v.to_bits());
        }
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| {
                Error::InvalidParameter(format!("cannot create {}: {e}", dir.display()))
            })?;
        }
        std::fs::write(path, out).map_err(|e| {
            Error::InvalidParameter(format!("cannot write cache {}: {e}", path.display()))
        })
    }

    fn get_or_compute(&self, w: &WalkSpec, key: &str, t: f64, tol: f64) -> Result<f64> {
        let k = (key.to_string(), t.to_bits(), tol.to_bits());
        if let Some(v) = self.table.lock().expect("memo lock").get(&k) {
            return Ok(*v);
        }
        let v = continuous_distance(w, Metric::Hellinger, t, tol)?;
        self.table.lock().expect("memo lock").insert(k, v);
        Ok(v)
    }
}

/// `d_{i,H}(p_i t)` for every factor.
pub fn factor_hellinger(
    pw: &ProductWalkSpec,
    t: f64,
    tol: f64,
    memo: &HellingerMemo,
) -> Result<Vec<f64>> {
    if !(t.is_finite() && t >= 0.0) {
        return invalid(format!("time must be finite and >= 0, got {t}"));
    }
    pw.factors
        .par_iter()
        .zip(pw.weights.par_iter())
        .map(|(f, &p)| memo.get_or_compute(f, &factor_key(f), p * t, tol))
        .collect()
}

/// `sqrt(1 − Π(1 − d_i²))`, evaluated as `−expm1(Σ ln(1 − d_i²))`.
pub fn combine_hellinger(factor_distances: &[f64]) -> f64 {
    let log_keep = compensated_sum(factor_distances.iter().map(|d| (-d * d).ln_1p()));
    (-log_keep.exp_m1()).clamp(0.0, 1.0).sqrt()
}

/// Exact continuous-time Hellinger distance of the product walk.
pub fn product_hellinger_ct(pw: &ProductWalkSpec, t: f64, tol: f64) -> Result<f64> {
    product_hellinger_ct_with(pw, t, tol, &HellingerMemo::new())
}

pub fn product_hellinger_ct_with(
    pw: &ProductWalkSpec,
    t: f64,
    tol: f64,
    memo: &HellingerMemo,
) -> Result<f64> {
    Ok(combine_hellinger(&factor_hellinger(pw, t, tol, memo)?))
}

/// Sandwich bounds on the product Hellinger distance, all in distance units.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductHellingerBounds {
    /// `max_i d_{i,H}(p_i t)`.
    pub max_lower: f64,
    /// `sqrt(1 − exp(−Σ d_i²))`.
    pub lower: f64,
    /// `sqrt(1 − exp(−Σ d_i²/(1 − A²)))`; valid only when `precondition_holds`.
    pub upper: f64,
    /// `t >= max_i T_{i,H}(A)/p_i`, checked as `d_{i,H}(p_i t) <= A` for all `i`
    /// (equivalent because each factor curve is non-increasing).
    pub precondition_holds: bool,
    pub a: f64,
}

/// Lemma-style bounds from the factor distances at time `t`.
pub fn product_hellinger_bounds(
    pw: &ProductWalkSpec,
    t: f64,
    a: f64,
    tol: f64,
    memo: &HellingerMemo,
) -> Result<ProductHellingerBounds> {
    let ds = factor_hellinger(pw, t, tol, memo)?;
    hellinger_bounds_from_factors(&ds, a)
}

pub fn hellinger_bounds_from_factors(ds: &[f64], a: f64) -> Result<ProductHellingerBounds> {
    if !(a > 0.0 && a < 1.0) {
        return invalid(format!("sandwich parameter A must lie in (0, 1), got {a}"));
    }
    let sum_sq = compensated_sum(ds.iter().map(|d| d * d));
    let lower = (-(-sum_sq).exp_m1()).clamp(0.0, 1.0).sqrt();
    let upper = (-(-sum_sq / (1.0 - a * a)).exp_m1()).clamp(0.0, 1.0).sqrt();
    Ok(ProductHellingerBounds {
        max_lower: ds.iter().copied().fold(0.0, f64::max),
        lower,
        upper,
        precondition_holds: ds.iter().all(|&d| d <= a),
        a,
    })
}

/// TV bracket `[h², sqrt(h²(2 − h²))]` implied by the TV/Hellinger sandwich.
/// A bracket, not an estimate.
pub fn tv_bracket(h: f64) -> (f64, f64) {
    let h2 = (h * h).clamp(0.0, 1.0);
    (h2, (h2 * (2.0 - h2)).clamp(0.0, 1.0).sqrt())
}

pub fn product_tv_bracket(pw: &ProductWalkSpec, t: f64, tol: f64) -> Result<(f64, f64)> {
    Ok(tv_bracket(product_hellinger_ct(pw, t, tol)?))
}

/// `⊗_i H_{i, p_i t}` laid out on the flat product indexing.
pub fn tensor_heat_distribution(pw: &ProductWalkSpec, t: f64, tol: f64) -> Result<Distribution> {
    let parts = pw
        .factors
        .iter()
        .zip(&pw.weights)
        .map(|(f, &p)| heat_distribution(f, p * t, tol))
        .collect::<Result<Vec<_>>>()?;
    let mut out = vec![1.0];
    // First factor most significant, matching the product indexing.
    for part in &parts {
        out = out
            .iter()
            .flat_map(|&a| part.probs().iter().map(move |&b| a * b))
            .collect();
    }
    Distribution::new(out)
}
