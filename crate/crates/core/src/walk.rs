//! Exact evolution of a single random walk and its distances to uniform.
//!
//! A walk is driven by an increment law `Q` on a [`GroupTable`]; the kernel is
//! `K(x, y) = Q(x⁻¹y)` and the stationary law is uniform. Because every
//! distance is translation invariant, all distributions here start at the
//! identity unless stated otherwise.

use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::group::GroupTable;
use crate::growth::{GeneratorSet, GrowthProfile, ModerateGrowthCert};
use crate::numeric::{bisect_decreasing, compensated_sum};

const MASS_TOL: f64 = 1e-12;
const SYMMETRY_TOL: f64 = 1e-15;

/// Dense groups up to this order get a full symmetric eigendecomposition.
pub const DENSE_EIGEN_LIMIT: usize = 2000;

/// Default truncation tolerance for the Poisson mixture of the heat kernel.
pub const DEFAULT_HEAT_TOL: f64 = 1e-13;

/// Default cap on discrete mixing-time scans.
pub const DEFAULT_SCAN_CAP: u64 = 10_000_000;

/// A probability vector over the elements of a group.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution(Vec<f64>);

impl Distribution {
    /// Validates non-negativity and unit mass (within `1e-12`).
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return invalid("distribution over an empty set");
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return invalid(format!("probability {p} is negative or not finite"));
        }
        let mass = compensated_sum(probs.iter().copied());
        if (mass - 1.0).abs() > MASS_TOL {
            return invalid(format!("probabilities sum to {mass}, not 1"));
        }
        Ok(Distribution(probs))
    }

    pub fn point(order: usize, x: usize) -> Self {
        let mut v = vec![0.0; order];
        v[x] = 1.0;
        Distribution(v)
    }

    pub fn uniform(order: usize) -> Self {
        Distribution(vec![1.0 / order as f64; order])
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn from_raw(v: Vec<f64>) -> Self {
        Distribution(v)
    }
}

/// Which distance to the uniform law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Tv,
    Hellinger,
}

impl Metric {
    pub fn of(self, p: &Distribution) -> f64 {
        match self {
            Metric::Tv => tv_distance(p),
            Metric::Hellinger => hellinger_distance(p),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Tv => "tv",
            Metric::Hellinger => "hellinger",
        })
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tv" => Ok(Metric::Tv),
            "hellinger" | "h" => Ok(Metric::Hellinger),
            _ => invalid(format!("unknown metric '{s}' (tv | hellinger)")),
        }
    }
}

/// Discrete steps or the continuous-time (heat) semigroup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Clock {
    Discrete,
    Continuous,
}

impl fmt::Display for Clock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Clock::Discrete => "discrete",
            Clock::Continuous => "continuous",
        })
    }
}

impl std::str::FromStr for Clock {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "discrete" => Ok(Clock::Discrete),
            "continuous" | "cts" => Ok(Clock::Continuous),
            _ => invalid(format!("unknown clock '{s}' (discrete | continuous)")),
        }
    }
}

/// Distances sampled along a time grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceCurve {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub metric: Metric,
    pub clock: Clock,
}

/// A random walk `(G, Q, U)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkSpec {
    group: GroupTable,
    law: Distribution,
    support: GeneratorSet,
    /// `(s, Q(s))` over the support, in increasing element order.
    steps: Vec<(usize, f64)>,
    symmetric: bool,
}

impl WalkSpec {
    /// Validates the law and requires its support to generate the group.
    pub fn new(group: GroupTable, law: Distribution) -> Result<Self> {
        if law.len() != group.order() {
            return invalid(format!(
                "law has {} entries but {} has order {}",
                law.len(),
                group.label(),
                group.order()
            ));
        }
        let steps: Vec<(usize, f64)> = law
            .probs()
            .iter()
            .enumerate()
            .filter(|(_, &q)| q > 0.0)
            .map(|(s, &q)| (s, q))
            .collect();
        let members: Vec<usize> = steps.iter().map(|&(s, _)| s).collect();
        let support = GeneratorSet::new(&group, &members)?;
        let symmetric = (0..group.order())
            .all(|x| (law.probs()[x] - law.probs()[group.inv(x)]).abs() <= SYMMETRY_TOL);
        Ok(WalkSpec {
            group,
            law,
            support,
            steps,
            symmetric,
        })
    }

    /// Uniform law on the given elements.
    pub fn uniform_on(group: GroupTable, members: &[usize]) -> Result<Self> {
        let mut members = members.to_vec();
        members.sort_unstable();
        members.dedup();
        if members.is_empty() {
            return invalid("uniform law on an empty set");
        }
        let mut probs = vec![0.0; group.order()];
        for &x in &members {
            if x >= group.order() {
                return invalid(format!("element {x} is outside {}", group.label()));
            }
            probs[x] = 1.0 / members.len() as f64;
        }
        Self::new(group, Distribution::new(probs)?)
    }

    /// Holds with probability 1/2, otherwise moves uniformly over the
    /// non-identity members.
    pub fn lazy_on(group: GroupTable, members: &[usize]) -> Result<Self> {
        let mut moves: Vec<usize> = members.iter().copied().filter(|&x| x != 0).collect();
        moves.sort_unstable();
        moves.dedup();
        if moves.is_empty() {
            return invalid("lazy law needs at least one non-identity generator");
        }
        let mut probs = vec![0.0; group.order()];
        probs[0] = 0.5;
        for &x in &moves {
            if x >= group.order() {
                return invalid(format!("element {x} is outside {}", group.label()));
            }
            probs[x] = 0.5 / moves.len() as f64;
        }
        Self::new(group, Distribution::new(probs)?)
    }

    /// `Q(0) = 1/2`, `Q(±1) = 1/4` on `Z_n`.
    pub fn lazy_cycle(n: usize) -> Result<Self> {
        let g = GroupTable::cyclic(n)?;
        let gens = g.standard_generators();
        Self::lazy_on(g, &gens)
    }

    pub fn group(&self) -> &GroupTable {
        &self.group
    }

    pub fn law(&self) -> &Distribution {
        &self.law
    }

    pub fn support(&self) -> &GeneratorSet {
        &self.support
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn order(&self) -> usize {
        self.group.order()
    }

    /// `η = min{Q(x) : x ∈ supp Q}`.
    pub fn eta(&self) -> f64 {
        self.steps
            .iter()
            .map(|&(_, q)| q)
            .fold(f64::INFINITY, f64::min)
    }

    /// One step of the chain: `p ↦ p * Q`.
    pub fn step(&self, p: &Distribution) -> Distribution {
        let mut out = vec![0.0; self.order()];
        for (z, &pz) in p.probs().iter().enumerate() {
            if pz == 0.0 {
                continue;
            }
            for &(s, q) in &self.steps {
                out[self.group.op(z, s)] += pz * q;
            }
        }
        Distribution::from_raw(out)
    }

    /// `K^m(x, ·)` by stepping from `δ_x`.
    pub fn evolve_from(&self, start: usize, m: u64) -> Distribution {
        let mut p = Distribution::point(self.order(), start);
        for _ in 0..m {
            p = self.step(&p);
        }
        p
    }

    /// Mixes `δ_id` with `Q`, i.e. the law `(δ_id + Q)/2`.
    pub fn lazified(&self) -> Result<WalkSpec> {
        let mut probs: Vec<f64> = self.law.probs().iter().map(|q| q / 2.0).collect();
        probs[0] += 0.5;
        WalkSpec::new(self.group.clone(), Distribution::new(probs)?)
    }
}

/// `f * g (x) = Σ_z f(z) g(z⁻¹x)`.
pub fn convolve(f: &Distribution, g: &Distribution, group: &GroupTable) -> Result<Distribution> {
    let n = group.order();
    if f.len() != n || g.len() != n {
        return invalid(format!(
            "convolution sizes {} and {} do not match |G| = {n}",
            f.len(),
            g.len()
        ));
    }
    let mut out = vec![0.0; n];
    for (z, &fz) in f.probs().iter().enumerate() {
        if fz == 0.0 {
            continue;
        }
        for (w, &gw) in g.probs().iter().enumerate() {
            if gw != 0.0 {
                out[group.op(z, w)] += fz * gw;
            }
        }
    }
    Ok(Distribution::from_raw(out))
}

/// Cached powers `Q^{(2^k)}` for repeated squaring.
#[derive(Debug)]
pub struct PowerLadder<'a> {
    walk: &'a WalkSpec,
    rungs: Vec<Distribution>,
}

impl<'a> PowerLadder<'a> {
    pub fn new(walk: &'a WalkSpec) -> Self {
        PowerLadder {
            walk,
            rungs: vec![walk.law.clone()],
        }
    }

    fn rung(&mut self, k: usize) -> &Distribution {
        while self.rungs.len() <= k {
            let last = self.rungs.last().expect("ladder starts with Q");
            let next = convolve(last, last, &self.walk.group).expect("same group");
            self.rungs.push(next);
        }
        &self.rungs[k]
    }

    /// `Q^{(m)}` from the binary expansion of `m`.
    pub fn power(&mut self, m: u64) -> Distribution {
        let mut acc = Distribution::point(self.walk.order(), 0);
        let mut k = 0;
        let mut rest = m;
        while rest > 0 {
            if rest & 1 == 1 {
                let group = self.walk.group.clone();
                acc = convolve(&acc, self.rung(k), &group).expect("same group");
            }
            rest >>= 1;
            k += 1;
        }
        acc
    }
}

/// `Q^{(m)}`, the `m`-fold convolution power (`δ_id` for `m = 0`).
pub fn walk_distribution(w: &WalkSpec, m: u64) -> Distribution {
    PowerLadder::new(w).power(m)
}

/// Poisson(t) weights truncated so the dropped mass is at most `tol / 2`,
/// renormalized; returns the first index and the weights.
pub fn poisson_window(t: f64, tol: f64) -> (u64, Vec<f64>) {
    assert!(
        t >= 0.0 && t.is_finite(),
        "Poisson mean must be finite and >= 0"
    );
    if t == 0.0 {
        return (0, vec![1.0]);
    }
    let side_tol = tol / 4.0;
    let mode = t.floor() as u64;
    // Relative weights with w(mode) = 1.
    let mut right = vec![1.0];
    let mut total = 1.0;
    let mut m = mode;
    loop {
        let w = right.last().copied().unwrap() * t / (m + 1) as f64;
        m += 1;
        right.push(w);
        total += w;
        let r = t / (m + 1) as f64;
        if r < 1.0 && w * r / (1.0 - r) <= side_tol * total {
            break;
        }
    }
    let mut left = Vec::new();
    let mut m = mode;
    let mut w = 1.0;
    while m > 0 {
        w *= m as f64 / t;
        m -= 1;
        left.push(w);
        total += w;
        let r = m as f64 / t;
        if m == 0 || w * r / (1.0 - r) <= side_tol * total {
            break;
        }
    }
    let lo = mode - left.len() as u64;
    let mut weights: Vec<f64> = left.into_iter().rev().chain(right).collect();
    let norm = compensated_sum(weights.iter().copied());
    for x in &mut weights {
        *x /= norm;
    }
    (lo, weights)
}

/// `H_t(id, ·)` by uniformization: `e^{-t} Σ_m t^m/m! Q^{(m)}`.
pub fn heat_distribution(w: &WalkSpec, t: f64, tol: f64) -> Result<Distribution> {
    Ok(heat_distributions(w, &[t], tol)?.pop().expect("one time"))
}

/// Heat kernels at several times sharing one pass over the powers `Q^{(m)}`.
pub fn heat_distributions(w: &WalkSpec, times: &[f64], tol: f64) -> Result<Vec<Distribution>> {
    if !(tol > 0.0 && tol <= 1e-6) {
        return invalid(format!("heat tolerance must lie in (0, 1e-6], got {tol}"));
    }
    if let Some(t) = times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return invalid(format!("time must be finite and >= 0, got {t}"));
    }
    if times.is_empty() {
        return Ok(Vec::new());
    }
    let n = w.order();
    let windows: Vec<(u64, Vec<f64>)> = times.iter().map(|&t| poisson_window(t, tol)).collect();
    let first = windows.iter().map(|(lo, _)| *lo).min().unwrap();
    let last = windows
        .iter()
        .map(|(lo, ws)| lo + ws.len() as u64 - 1)
        .max()
        .unwrap();
    let mut acc = vec![vec![0.0; n]; times.len()];
    // Jump over the leading gap with repeated squaring when that is cheaper
    // than stepping through it.
    let step_cost = (n * w.support.len()) as f64;
    let jump_cost = (n * n) as f64 * (first.max(1) as f64).log2().max(1.0) * 2.0;
    let mut p = if first > 0 && step_cost * first as f64 > jump_cost {
        walk_distribution(w, first)
    } else {
        let mut p = Distribution::point(n, 0);
        for _ in 0..first {
            p = w.step(&p);
        }
        p
    };
    for m in first..=last {
        for ((lo, ws), out) in windows.iter().zip(acc.iter_mut()) {
            if m >= *lo && m < lo + ws.len() as u64 {
                let weight = ws[(m - lo) as usize];
                for (o, x) in out.iter_mut().zip(p.probs()) {
                    *o += weight * x;
                }
            }
        }
        if m < last {
            p = w.step(&p);
        }
    }
    Ok(acc.into_iter().map(Distribution::from_raw).collect())
}

/// `Σ_y max(p(y) − 1/|G|, 0)`.
pub fn tv_distance(p: &Distribution) -> f64 {
    let u = 1.0 / p.len() as f64;
    compensated_sum(p.probs().iter().map(|&x| (x - u).max(0.0))).clamp(0.0, 1.0)
}

/// `sqrt(½ Σ_y (√p(y) − √(1/|G|))²)`.
pub fn hellinger_distance(p: &Distribution) -> f64 {
    let u = 1.0 / p.len() as f64;
    let su = u.sqrt();
    let half_sq = compensated_sum(p.probs().iter().map(|&x| {
        // (√x − √u) = (x − u)/(√x + √u) avoids cancellation near uniform.
        let d = (x - u) / (x.sqrt() + su);
        d * d
    })) / 2.0;
    half_sq.clamp(0.0, 1.0).sqrt()
}

/// Distances after `0..=max_steps` discrete steps.
pub fn discrete_curve(w: &WalkSpec, metric: Metric, max_steps: u64) -> DistanceCurve {
    let mut p = Distribution::point(w.order(), 0);
    let mut times = Vec::with_capacity(max_steps as usize + 1);
    let mut values = Vec::with_capacity(max_steps as usize + 1);
    for m in 0..=max_steps {
        times.push(m as f64);
        values.push(metric.of(&p));
        if m < max_steps {
            p = w.step(&p);
        }
    }
    DistanceCurve {
        times,
        values,
        metric,
        clock: Clock::Discrete,
    }
}

/// Distances of the heat kernel at the given times.
pub fn continuous_curve(
    w: &WalkSpec,
    metric: Metric,
    times: &[f64],
    tol: f64,
) -> Result<DistanceCurve> {
    let values = heat_distributions(w, times, tol)?
        .iter()
        .map(|p| metric.of(p))
        .collect();
    Ok(DistanceCurve {
        times: times.to_vec(),
        values,
        metric,
        clock: Clock::Continuous,
    })
}

/// Continuous-time distance at a single time.
pub fn continuous_distance(w: &WalkSpec, metric: Metric, t: f64, tol: f64) -> Result<f64> {
    Ok(metric.of(&heat_distribution(w, t, tol)?))
}

/// A mixing time: a step count or a real time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum MixingTime {
    Steps(u64),
    Time(f64),
}

impl MixingTime {
    pub fn as_f64(self) -> f64 {
        match self {
            MixingTime::Steps(m) => m as f64,
            MixingTime::Time(t) => t,
        }
    }
}

/// Absolute time tolerance of the continuous mixing-time bisection.
pub const MIXING_TIME_TOL: f64 = 1e-7;

/// `min{m : d(m) <= eps}` (discrete) or `min{t : d(t) <= eps}` (continuous).
pub fn mixing_time(
    w: &WalkSpec,
    metric: Metric,
    clock: Clock,
    eps: f64,
    scan_cap: u64,
) -> Result<MixingTime> {
    if !(eps > 0.0 && eps < 1.0) {
        return invalid(format!("eps must lie in (0, 1), got {eps}"));
    }
    match clock {
        Clock::Discrete => {
            let mut p = Distribution::point(w.order(), 0);
            for m in 0..=scan_cap {
                if metric.of(&p) <= eps {
                    return Ok(MixingTime::Steps(m));
                }
                p = w.step(&p);
            }
            Err(Error::CapExceeded {
                what: format!("discrete {metric} mixing time at eps={eps}"),
                cap: scan_cap,
            })
        }
        Clock::Continuous => {
            let d =
                |t: f64| continuous_distance(w, metric, t, DEFAULT_HEAT_TOL).expect("valid time");
            if d(0.0) <= eps {
                return Ok(MixingTime::Time(0.0));
            }
            let mut hi = 1.0;
            while d(hi) > eps {
                hi *= 2.0;
                if hi > scan_cap as f64 {
                    return Err(Error::CapExceeded {
                        what: format!("continuous {metric} mixing time at eps={eps}"),
                        cap: scan_cap,
                    });
                }
            }
            let lo = if hi > 1.0 { hi / 2.0 } else { 0.0 };
            Ok(MixingTime::Time(bisect_decreasing(
                d,
                lo,
                hi,
                eps,
                MIXING_TIME_TOL,
                0.0,
            )))
        }
    }
}

/// Dense transition matrix `K(x, y) = Q(x⁻¹y)`.
pub fn transition_matrix(w: &WalkSpec) -> DMatrix<f64> {
    let n = w.order();
    let mut k = DMatrix::zeros(n, n);
    for x in 0..n {
        for &(s, q) in &w.steps {
            k[(x, w.group.op(x, s))] += q;
        }
    }
    k
}

fn require_symmetric(w: &WalkSpec) -> Result<()> {
    if !w.is_symmetric() {
        return Err(Error::Unsupported(format!(
            "spectral gap needs a symmetric law; the law on {} is not",
            w.group.label()
        )));
    }
    Ok(())
}

/// `1 − μ₂` where `μ₂` is the second largest eigenvalue of `K`.
///
/// Dense symmetric eigendecomposition up to [`DENSE_EIGEN_LIMIT`] elements,
/// deflated power iteration beyond.
pub fn spectral_gap(w: &WalkSpec) -> Result<f64> {
    require_symmetric(w)?;
    if w.order() <= DENSE_EIGEN_LIMIT {
        spectral_gap_dense(w)
    } else {
        spectral_gap_power(w, 1e-10)
    }
}

pub fn spectral_gap_dense(w: &WalkSpec) -> Result<f64> {
    require_symmetric(w)?;
    if w.order() == 1 {
        return invalid("the trivial group has no spectral gap");
    }
    let eig = SymmetricEigen::new(transition_matrix(w));
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(1.0 - values[1])
}

/// Power iteration on `(K + I)/2` restricted to mean-zero vectors.
///
/// The shift makes the spectrum non-negative, so the dominant eigenvalue on
/// the complement of constants is `(1 + μ₂)/2`.
pub fn spectral_gap_power(w: &WalkSpec, rel_tol: f64) -> Result<f64> {
    require_symmetric(w)?;
    let n = w.order();
    if n == 1 {
        return invalid("the trivial group has no spectral gap");
    }
    let apply = |v: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (x, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for &(s, q) in &w.steps {
                acc += q * v[w.group.op(x, s)];
            }
            *o = 0.5 * (acc + v[x]);
        }
        out
    };
    let center_normalize = |v: &mut Vec<f64>| {
        let mean = compensated_sum(v.iter().copied()) / n as f64;
        v.iter_mut().for_each(|x| *x -= mean);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
    };
    // Deterministic start with components along every non-trivial direction.
    let mut v: Vec<f64> = (0..n)
        .map(|x| ((x as f64 + 1.0) * 0.7548776662).fract() - 0.5)
        .collect();
    center_normalize(&mut v);
    let mut theta = 0.0;
    for _ in 0..2_000_000 {
        let bv = apply(&v);
        theta = v.iter().zip(&bv).map(|(a, b)| a * b).sum::<f64>();
        let residual = bv
            .iter()
            .zip(&v)
            .map(|(b, a)| (b - theta * a).powi(2))
            .sum::<f64>()
            .sqrt();
        let gap = 2.0 * (1.0 - theta);
        if residual <= rel_tol * gap.max(f64::EPSILON) {
            return Ok(gap);
        }
        v = bv;
        center_normalize(&mut v);
    }
    Ok(2.0 * (1.0 - theta))
}

/// Eigenvalues of `K` for a law on a product of cycles, via characters:
/// `Σ_x Q(x) cos(2π Σ_j k_j x_j / n_j)` for each character `k`.
pub fn abelian_spectrum(w: &WalkSpec) -> Option<Vec<f64>> {
    let moduli = w.group.cyclic_moduli()?;
    let coords: Vec<(Vec<usize>, f64)> = w
        .steps
        .iter()
        .map(|&(s, q)| (w.group.cyclic_coords(s), q))
        .collect();
    let n = w.order();
    let mut out = Vec::with_capacity(n);
    let mut k = vec![0usize; moduli.len()];
    for _ in 0..n {
        let value = compensated_sum(coords.iter().map(|(x, q)| {
            let phase: f64 = k
                .iter()
                .zip(x)
                .zip(&moduli)
                .map(|((&kj, &xj), &nj)| ((kj * xj) % nj) as f64 / nj as f64)
                .sum();
            q * (2.0 * std::f64::consts::PI * phase).cos()
        }));
        out.push(value);
        for (kj, &nj) in k.iter_mut().zip(&moduli).rev() {
            *kj += 1;
            if *kj < nj {
                break;
            }
            *kj = 0;
        }
    }
    Some(out)
}

/// Spectral gap from [`abelian_spectrum`], skipping the trivial character.
pub fn abelian_spectral_gap(w: &WalkSpec) -> Option<f64> {
    let spectrum = abelian_spectrum(w)?;
    let top = spectrum[1..]
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    Some(1.0 - top)
}

/// Whether a prerequisite of a bound was met.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", content = "reason", rename_all = "snake_case")]
pub enum Gate {
    Checked,
    PrerequisiteNotMet(String),
}

impl Gate {
    pub fn is_checked(&self) -> bool {
        matches!(self, Gate::Checked)
    }
}

/// One evaluation of a bound against an exact distance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub time: f64,
    pub distance: f64,
    pub bound: f64,
    pub holds: bool,
    /// `bound − distance` for upper bounds, `distance − bound` for lower bounds.
    pub margin: f64,
}

impl BoundCheck {
    fn upper(time: f64, distance: f64, bound: f64, slack: f64) -> Self {
        BoundCheck {
            time,
            distance,
            bound,
            holds: distance <= bound + slack,
            margin: bound - distance,
        }
    }

    fn lower(time: f64, distance: f64, bound: f64, slack: f64) -> Self {
        BoundCheck {
            time,
            distance,
            bound,
            holds: distance + slack >= bound,
            margin: distance - bound,
        }
    }
}

/// `C₁ = A^{1/2} 2^{d(d+3)/4}` of the discrete moderate-growth upper bound.
pub fn moderate_c1(a: f64, d: f64) -> f64 {
    a.sqrt() * 2f64.powf(d * (d + 3.0) / 4.0)
}

/// `C₂ = A² 2^{4d+2}` of the discrete moderate-growth lower bound.
pub fn moderate_c2(a: f64, d: f64) -> f64 {
    a * a * 2f64.powf(4.0 * d + 2.0)
}

/// Discrete moderate-growth bounds evaluated against the exact TV curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModerateBoundsReport {
    pub a: f64,
    pub d: f64,
    pub c1: f64,
    pub c2: f64,
    pub eta: f64,
    pub rho: usize,
    pub upper_gate: Gate,
    pub upper: Vec<BoundCheck>,
    pub lower_gate: Gate,
    pub lower: Vec<BoundCheck>,
}

impl ModerateBoundsReport {
    pub fn all_hold(&self) -> bool {
        self.upper.iter().chain(&self.lower).all(|c| c.holds)
    }
}

/// Slack on bound comparisons against exactly computed distances.
pub const BOUND_SLACK: f64 = 1e-12;

/// Checks `d_TV(m) <= C₁ e^{−ηm/ρ²}` and, when `ρ >= A·2^{2d+2}`,
/// `d_TV(m) >= ½ e^{−C₂m/ρ²}`.
///
/// `profile` must be the growth profile of the walk's own support.
pub fn check_moderate_bounds(
    w: &WalkSpec,
    cert: &ModerateGrowthCert,
    profile: &GrowthProfile,
    steps: &[u64],
) -> ModerateBoundsReport {
    let (a, d) = (cert.a, cert.d);
    let rho = profile.diameter;
    let eta = w.eta();
    let c1 = moderate_c1(a, d);
    let c2 = moderate_c2(a, d);
    let upper_gate = if !w.is_symmetric() {
        Gate::PrerequisiteNotMet("law is not symmetric".into())
    } else if !cert.satisfied {
        Gate::PrerequisiteNotMet(format!("({a}, {d})-moderate growth does not hold"))
    } else if !w.support().contains(0) {
        Gate::PrerequisiteNotMet("support does not contain the identity".into())
    } else if profile.group_order != w.order() {
        Gate::PrerequisiteNotMet("growth profile belongs to a different group".into())
    } else {
        Gate::Checked
    };
    let threshold = a * 2f64.powf(2.0 * d + 2.0);
    let lower_gate = match &upper_gate {
        Gate::PrerequisiteNotMet(r) => Gate::PrerequisiteNotMet(r.clone()),
        Gate::Checked if (rho as f64) < threshold => {
            Gate::PrerequisiteNotMet(format!("rho = {rho} < A*2^(2d+2) = {threshold}"))
        }
        Gate::Checked => Gate::Checked,
    };
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    if upper_gate.is_checked() {
        let max = steps.iter().copied().max().unwrap_or(0);
        let curve = discrete_curve(w, Metric::Tv, max);
        let r2 = (rho * rho) as f64;
        for &m in steps {
            let tv = curve.values[m as usize];
            let mf = m as f64;
            upper.push(BoundCheck::upper(
                mf,
                tv,
                c1 * (-eta * mf / r2).exp(),
                BOUND_SLACK,
            ));
            if lower_gate.is_checked() {
                lower.push(BoundCheck::lower(
                    mf,
                    tv,
                    0.5 * (-c2 * mf / r2).exp(),
                    BOUND_SLACK,
                ));
            }
        }
    }
    ModerateBoundsReport {
        a,
        d,
        c1,
        c2,
        eta,
        rho,
        upper_gate,
        upper,
        lower_gate,
        lower,
    }
}

/// One time point of the continuous-time bound check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CtsBoundRow {
    pub t: f64,
    pub tv: f64,
    pub hellinger: f64,
    /// `½ e^{−λt}`.
    pub tv_lower: f64,
    /// `C₁ e^{−ηt/(2ρ²)}`, when the growth certificate holds.
    pub tv_upper: Option<f64>,
    /// `sqrt(1 − sqrt(1 − tv_lower²))`, from the TV/Hellinger sandwich.
    pub hellinger_lower: f64,
    /// `sqrt(tv_upper)`.
    pub hellinger_upper: Option<f64>,
    pub lower_holds: bool,
    pub upper_holds: Option<bool>,
    /// `(tv − tv_lower)/tv_lower`.
    pub lower_rel_margin: f64,
}

/// Continuous-time spectral lower bound and moderate-growth upper bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CtsBoundsReport {
    pub lambda: f64,
    pub eta: f64,
    pub rho: usize,
    pub c1: f64,
    pub upper_gate: Gate,
    /// `λρ²`: the constant that makes `½e^{−Ct/ρ²}` the spectral lower bound.
    /// Reported, never asserted.
    pub empirical_c: f64,
    pub rows: Vec<CtsBoundRow>,
}

impl CtsBoundsReport {
    pub fn all_hold(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.lower_holds && r.upper_holds.unwrap_or(true))
    }
}

/// Checks `d_TV^{(c)}(t) >= ½e^{−λt}` and `d_TV^{(c)}(t) <= C₁e^{−ηt/(2ρ²)}`
/// (with their Hellinger counterparts) at each time.
pub fn check_cts_bounds(
    w: &WalkSpec,
    cert: &ModerateGrowthCert,
    profile: &GrowthProfile,
    times: &[f64],
    tol: f64,
) -> Result<CtsBoundsReport> {
    let lambda = spectral_gap(w)?;
    let eta = w.eta();
    let rho = profile.diameter;
    let c1 = moderate_c1(cert.a, cert.d);
    let upper_gate = if !cert.satisfied {
        Gate::PrerequisiteNotMet(format!(
            "({}, {})-moderate growth does not hold",
            cert.a, cert.d
        ))
    } else if profile.group_order != w.order() {
        Gate::PrerequisiteNotMet("growth profile belongs to a different group".into())
    } else {
        Gate::Checked
    };
    let heat = heat_distributions(w, times, tol)?;
    let r2 = (rho * rho) as f64;
    let slack = BOUND_SLACK + w.order() as f64 * tol;
    let rows = times
        .iter()
        .zip(&heat)
        .map(|(&t, p)| {
            let tv = tv_distance(p);
            let h = hellinger_distance(p);
            let tv_lower = 0.5 * (-lambda * t).exp();
            let hellinger_lower = (1.0 - (1.0 - tv_lower * tv_lower).sqrt()).max(0.0).sqrt();
            let tv_upper = upper_gate
                .is_checked()
                .then(|| c1 * (-eta * t / (2.0 * r2)).exp());
            let hellinger_upper = tv_upper.map(f64::sqrt);
            CtsBoundRow {
                t,
                tv,
                hellinger: h,
                tv_lower,
                tv_upper,
                hellinger_lower,
                hellinger_upper,
                lower_holds: tv + slack >= tv_lower && h + slack >= hellinger_lower,
                upper_holds: tv_upper
                    .map(|u| tv <= u + slack && h <= hellinger_upper.unwrap() + slack),
                lower_rel_margin: (tv - tv_lower) / tv_lower,
            }
        })
        .collect();
    Ok(CtsBoundsReport {
        lambda,
        eta,
        rho,
        c1,
        upper_gate,
        empirical_c: lambda * r2,
        rows,
    })
}

/// Parses a law descriptor over the given generators: `uniform`, `lazy`, or
/// `probs:<p0>,<p1>,...` (a full probability vector indexed by element).
pub fn walk_from_descriptor(group: GroupTable, gens: &[usize], law: &str) -> Result<WalkSpec> {
    match law.trim() {
        "uniform" => WalkSpec::uniform_on(group, gens),
        "lazy" => WalkSpec::lazy_on(group, gens),
        other => match other.strip_prefix("probs:") {
            Some(list) => {
                let probs = list
                    .split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<f64>()
                            .map_err(|_| Error::InvalidParameter(format!("bad probability '{s}'")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                WalkSpec::new(group, Distribution::new(probs)?)
            }
            None => invalid(format!(
                "unknown law '{other}' (uniform | lazy | probs:...)"
            )),
        },
    }
}
