//! Product families: factor recipes, weight rules and the per-n rate rows.

use std::fmt;

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Exp, LogNormal};
use rayon::prelude::*;
use serde::Serialize;

use super::formulas::{theorem_tn_ln, theorem_un_ln, Direction};
use super::laplace::ExponentialSum;
use super::trend::TrendConfig;
use crate::error::{invalid, Error, Result};
use crate::group::{GroupTable, DEFAULT_ENUMERATION_CAP};
use crate::growth::growth_profile;
use crate::numeric::log_sum_exp;
use crate::product::ProductWalkSpec;
use crate::walk::WalkSpec;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Splits `a=1,b=f(2,3)` on commas outside parentheses.
fn split_params(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    let last = s[start..].trim();
    if !last.is_empty() {
        out.push(last);
    }
    out
}

/// `name:key=value,...` into the name and its key/value pairs.
fn parse_call(s: &str) -> Result<(String, Vec<(String, String)>)> {
    let (name, rest) = s.split_once(':').unwrap_or((s, ""));
    let params = split_params(rest)
        .into_iter()
        .map(|p| {
            p.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| {
                    Error::InvalidParameter(format!("expected key=value in '{s}', got '{p}'"))
                })
        })
        .collect::<Result<_>>()?;
    Ok((name.trim().to_string(), params))
}

fn param<T: std::str::FromStr>(
    params: &[(String, String)],
    key: &str,
    default: Option<T>,
) -> Result<T> {
    match params.iter().find(|(k, _)| k == key) {
        Some((_, v)) => v
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad value '{v}' for '{key}'"))),
        None => {
            default.ok_or_else(|| Error::InvalidParameter(format!("missing parameter '{key}'")))
        }
    }
}

fn reject_unknown(params: &[(String, String)], known: &[&str]) -> Result<()> {
    match params.iter().find(|(k, _)| !known.contains(&k.as_str())) {
        Some((k, _)) => invalid(format!("unknown parameter '{k}'")),
        None => Ok(()),
    }
}

/// Positive random variables for random weight sequences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "dist", rename_all = "lowercase")]
pub enum Sampler {
    /// Uniform on the open interval `(a, b)`, `0 <= a < b`.
    Uniform {
        a: f64,
        b: f64,
    },
    Exponential {
        rate: f64,
    },
    LogNormal {
        mu: f64,
        sigma: f64,
    },
    Constant {
        c: f64,
    },
}

impl Sampler {
    /// Parses `uniform(a,b)`, `exponential(rate)`, `lognormal(mu,sigma)` or
    /// `constant(c)`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, args) = s
            .strip_suffix(')')
            .and_then(|body| body.split_once('('))
            .ok_or_else(|| {
                Error::InvalidParameter(format!("sampler '{s}' must look like name(args)"))
            })?;
        let args: Vec<f64> = args
            .split(',')
            .map(|a| {
                a.trim().parse::<f64>().map_err(|_| {
                    Error::InvalidParameter(format!("bad sampler argument '{a}' in '{s}'"))
                })
            })
            .collect::<Result<_>>()?;
        let arity = |k: usize| {
            if args.len() == k {
                Ok(())
            } else {
                invalid(format!(
                    "sampler '{name}' takes {k} argument(s), got {}",
                    args.len()
                ))
            }
        };
        let sampler = match name.trim() {
            "uniform" => {
                arity(2)?;
                Sampler::Uniform {
                    a: args[0],
                    b: args[1],
                }
            }
            "exponential" | "exp" => {
                arity(1)?;
                Sampler::Exponential { rate: args[0] }
            }
            "lognormal" => {
                arity(2)?;
                Sampler::LogNormal {
                    mu: args[0],
                    sigma: args[1],
                }
            }
            "constant" | "const" => {
                arity(1)?;
                Sampler::Constant { c: args[0] }
            }
            other => return invalid(format!("unknown sampler '{other}'")),
        };
        sampler.validate()?;
        Ok(sampler)
    }

    /// Rejects samplers that can produce non-positive values.
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Sampler::Uniform { a, b } => a.is_finite() && b.is_finite() && a >= 0.0 && b > a,
            Sampler::Exponential { rate } => rate.is_finite() && rate > 0.0,
            Sampler::LogNormal { mu, sigma } => mu.is_finite() && sigma.is_finite() && sigma >= 0.0,
            Sampler::Constant { c } => c.is_finite() && c > 0.0,
        };
        if ok {
            Ok(())
        } else {
            invalid(format!("sampler {self} is not a positive distribution"))
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            Sampler::Uniform { a, b } => {
                let u: f64 = rng.sample(Open01);
                a + (b - a) * u
            }
            Sampler::Exponential { rate } => Exp::new(rate).expect("validated rate").sample(rng),
            Sampler::LogNormal { mu, sigma } => LogNormal::new(mu, sigma)
                .expect("validated parameters")
                .sample(rng),
            Sampler::Constant { c } => c,
        }
    }

    /// `E[ln X]`.
    pub fn expected_log(&self) -> f64 {
        match *self {
            Sampler::Uniform { a, b } => {
                let xlnx = |x: f64| if x == 0.0 { 0.0 } else { x * x.ln() };
                (xlnx(b) - xlnx(a)) / (b - a) - 1.0
            }
            Sampler::Exponential { rate } => -EULER_GAMMA - rate.ln(),
            Sampler::LogNormal { mu, .. } => mu,
            Sampler::Constant { c } => c.ln(),
        }
    }
}

impl fmt::Display for Sampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Sampler::Uniform { a, b } => write!(f, "uniform({a},{b})"),
            Sampler::Exponential { rate } => write!(f, "exponential({rate})"),
            Sampler::LogNormal { mu, sigma } => write!(f, "lognormal({mu},{sigma})"),
            Sampler::Constant { c } => write!(f, "constant({c})"),
        }
    }
}

/// Factor `i` (1-based) of a family, as a function of `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "recipe", rename_all = "kebab-case")]
pub enum FactorRecipe {
    /// `Z_{i+offset}` with `Q(0) = 1/2`, `Q(±1) = 1/4`.
    CycleLazy { offset: usize },
    /// `Z_{i+offset}` uniform on `{0, ±1}`.
    CycleUniform { offset: usize },
    /// Heisenberg group mod `i+offset`, uniform on `{id, (±1,0,0), (0,±1,0)}`.
    Heisenberg { offset: usize },
}

impl FactorRecipe {
    pub fn parse(s: &str) -> Result<Self> {
        let (name, params) = parse_call(s)?;
        reject_unknown(&params, &["offset"])?;
        let offset: usize = param(&params, "offset", Some(2))?;
        let recipe = match name.as_str() {
            "cycle-lazy" => FactorRecipe::CycleLazy { offset },
            "cycle-uniform" => FactorRecipe::CycleUniform { offset },
            "heisenberg" => FactorRecipe::Heisenberg { offset },
            other => return invalid(format!("unknown factor recipe '{other}'")),
        };
        if recipe.modulus(1) < 2 {
            return invalid("factor recipe must start at a modulus of at least 2");
        }
        Ok(recipe)
    }

    pub fn modulus(&self, i: usize) -> usize {
        match *self {
            FactorRecipe::CycleLazy { offset }
            | FactorRecipe::CycleUniform { offset }
            | FactorRecipe::Heisenberg { offset } => i + offset,
        }
    }

    pub fn group_descriptor(&self, i: usize) -> String {
        match self {
            FactorRecipe::CycleLazy { .. } | FactorRecipe::CycleUniform { .. } => {
                format!("Z:{}", self.modulus(i))
            }
            FactorRecipe::Heisenberg { .. } => format!("H:{}", self.modulus(i)),
        }
    }

    pub fn walk(&self, i: usize, cap: usize) -> Result<WalkSpec> {
        let g = GroupTable::parse(&self.group_descriptor(i), cap)?;
        let gens = g.standard_generators();
        match self {
            FactorRecipe::CycleLazy { .. } => WalkSpec::lazy_on(g, &gens),
            _ => WalkSpec::uniform_on(g, &gens),
        }
    }

    /// Diameter of the factor's support. Heisenberg factors beyond the
    /// enumeration cap fall back to the lower end `m − 1` of the known
    /// bracket `[m − 1, m + 2]`.
    pub fn diameter(&self, i: usize, cap: usize) -> Result<usize> {
        let m = self.modulus(i);
        if let FactorRecipe::Heisenberg { .. } = self {
            if (m as u128).pow(3) > cap as u128 {
                return Ok(m - 1);
            }
        }
        let w = self.walk(i, cap)?;
        Ok(growth_profile(w.group(), w.support())?.diameter)
    }

    pub fn diameters(&self, count: usize, cap: usize) -> Result<Vec<usize>> {
        (1..=count)
            .into_par_iter()
            .map(|i| self.diameter(i, cap))
            .collect()
    }
}

impl fmt::Display for FactorRecipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            FactorRecipe::CycleLazy { offset } => write!(f, "cycle-lazy:offset={offset}"),
            FactorRecipe::CycleUniform { offset } => write!(f, "cycle-uniform:offset={offset}"),
            FactorRecipe::Heisenberg { offset } => write!(f, "heisenberg:offset={offset}"),
        }
    }
}

/// Weight `p_i` of factor `i`, as a function of `i` or of a random sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum WeightRule {
    Constant {
        c: f64,
    },
    /// `i^γ`.
    Power {
        gamma: f64,
    },
    /// `i² e^{−i^γ}`.
    HeisenbergExp {
        gamma: f64,
    },
    /// `r^i`.
    Geometric {
        r: f64,
    },
    /// `(X_1 + … + X_i)^γ`.
    PolySum {
        gamma: f64,
        sampler: Sampler,
    },
    /// `X_1 × … × X_i`.
    RandomProduct {
        sampler: Sampler,
    },
}

impl WeightRule {
    pub fn parse(s: &str) -> Result<Self> {
        let (name, params) = parse_call(s)?;
        let rule = match name.as_str() {
            "const" | "constant" => {
                reject_unknown(&params, &["c"])?;
                WeightRule::Constant {
                    c: param(&params, "c", Some(1.0))?,
                }
            }
            "power" => {
                reject_unknown(&params, &["gamma"])?;
                WeightRule::Power {
                    gamma: param(&params, "gamma", None)?,
                }
            }
            "heis-exp" => {
                reject_unknown(&params, &["gamma"])?;
                WeightRule::HeisenbergExp {
                    gamma: param(&params, "gamma", None)?,
                }
            }
            "geometric" => {
                reject_unknown(&params, &["r"])?;
                WeightRule::Geometric {
                    r: param(&params, "r", None)?,
                }
            }
            "poly-sum" => {
                reject_unknown(&params, &["gamma", "dist"])?;
                let dist: String = param(&params, "dist", None)?;
                WeightRule::PolySum {
                    gamma: param(&params, "gamma", None)?,
                    sampler: Sampler::parse(&dist)?,
                }
            }
            "product" => {
                reject_unknown(&params, &["dist"])?;
                let dist: String = param(&params, "dist", None)?;
                WeightRule::RandomProduct {
                    sampler: Sampler::parse(&dist)?,
                }
            }
            other => return invalid(format!("unknown weight rule '{other}'")),
        };
        rule.validate()?;
        Ok(rule)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            WeightRule::Constant { c } => c.is_finite() && c > 0.0,
            WeightRule::Power { gamma } | WeightRule::HeisenbergExp { gamma } => gamma.is_finite(),
            WeightRule::Geometric { r } => r.is_finite() && r > 0.0,
            WeightRule::PolySum { gamma, sampler } => {
                gamma.is_finite() && sampler.validate().is_ok()
            }
            WeightRule::RandomProduct { sampler } => sampler.validate().is_ok(),
        };
        if ok {
            Ok(())
        } else {
            invalid(format!("weight rule {self} does not give positive weights"))
        }
    }

    pub fn is_random(&self) -> bool {
        matches!(
            self,
            WeightRule::PolySum { .. } | WeightRule::RandomProduct { .. }
        )
    }

    /// `ln p_1, …, ln p_len`; random rules draw from `rng`.
    pub fn ln_weights(&self, len: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        match *self {
            WeightRule::Constant { c } => vec![c.ln(); len],
            WeightRule::Power { gamma } => (1..=len).map(|i| gamma * (i as f64).ln()).collect(),
            WeightRule::HeisenbergExp { gamma } => (1..=len)
                .map(|i| 2.0 * (i as f64).ln() - (i as f64).powf(gamma))
                .collect(),
            WeightRule::Geometric { r } => (1..=len).map(|i| i as f64 * r.ln()).collect(),
            WeightRule::PolySum { gamma, sampler } => {
                let mut sum = 0.0;
                (0..len)
                    .map(|_| {
                        sum += sampler.sample(rng);
                        gamma * sum.ln()
                    })
                    .collect()
            }
            WeightRule::RandomProduct { sampler } => {
                let mut ln_prod = 0.0;
                (0..len)
                    .map(|_| {
                        ln_prod += sampler.sample(rng).ln();
                        ln_prod
                    })
                    .collect()
            }
        }
    }
}

impl fmt::Display for WeightRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            WeightRule::Constant { c } => write!(f, "const:c={c}"),
            WeightRule::Power { gamma } => write!(f, "power:gamma={gamma}"),
            WeightRule::HeisenbergExp { gamma } => write!(f, "heis-exp:gamma={gamma}"),
            WeightRule::Geometric { r } => write!(f, "geometric:r={r}"),
            WeightRule::PolySum { gamma, sampler } => {
                write!(f, "poly-sum:gamma={gamma},dist={sampler}")
            }
            WeightRule::RandomProduct { sampler } => write!(f, "product:dist={sampler}"),
        }
    }
}

/// How rows are formed from the factor sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    /// Row `n` is the product of factors `1..=n` with one shared weight
    /// sequence.
    Nested,
    /// Row `n` has factors `1..=n` with weights drawn afresh for that row
    /// (seed `seed + n` for random rules).
    Triangular,
}

/// A family of product chains.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilySpec {
    pub kind: FamilyKind,
    pub factor: FactorRecipe,
    pub weights: WeightRule,
    pub n_range: Vec<usize>,
    pub seed: u64,
    pub trend: TrendConfig,
    /// `ε` grid for the proxy mixing times `T_n(ε)`.
    pub eps: Vec<f64>,
    pub cap: usize,
}

/// Parses `1..60`, `1..=60`, `5` or `1,2,10`.
pub fn parse_range(s: &str) -> Result<Vec<usize>> {
    let s = s.trim();
    let num = |x: &str| {
        x.trim()
            .parse::<usize>()
            .map_err(|_| Error::InvalidParameter(format!("bad index '{x}' in range '{s}'")))
    };
    let out: Vec<usize> = if let Some((a, b)) = s.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let (a, b) = (num(a)?, num(b)?);
        if a > b {
            return invalid(format!("empty range '{s}'"));
        }
        (a..=b).collect()
    } else {
        s.split(',').map(num).collect::<Result<_>>()?
    };
    if out.is_empty() || out.contains(&0) || out.windows(2).any(|w| w[0] >= w[1]) {
        return invalid(format!(
            "range '{s}' must be increasing and start at 1 or later"
        ));
    }
    Ok(out)
}

impl FamilySpec {
    pub fn new(factor: FactorRecipe, weights: WeightRule, n_range: Vec<usize>) -> Self {
        FamilySpec {
            kind: FamilyKind::Nested,
            factor,
            weights,
            n_range,
            seed: 0,
            trend: TrendConfig::default(),
            eps: vec![0.5],
            cap: DEFAULT_ENUMERATION_CAP,
        }
    }

    /// Parses the flat `key = value` format; `#` starts a comment.
    ///
    /// Keys: `kind`, `factor`, `weights`, `n_range`, `seed`, `eps`, `cap`,
    /// `trend.slope_min`, `trend.growth_ratio`, `trend.bounded_ratio`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut kind = FamilyKind::Nested;
        let mut factor = None;
        let mut weights = None;
        let mut n_range = None;
        let mut seed = 0u64;
        let mut trend = TrendConfig::default();
        let mut eps = vec![0.5];
        let mut cap = DEFAULT_ENUMERATION_CAP;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| {
                    Error::InvalidParameter(format!("line {}: expected key = value", lineno + 1))
                })?;
            let number = |v: &str| {
                v.parse::<f64>().map_err(|_| {
                    Error::InvalidParameter(format!("line {}: bad number '{v}'", lineno + 1))
                })
            };
            match key {
                "kind" => {
                    kind = match value {
                        "nested" | "G" => FamilyKind::Nested,
                        "triangular" | "F" => FamilyKind::Triangular,
                        _ => {
                            return invalid(format!("line {}: unknown kind '{value}'", lineno + 1))
                        }
                    }
                }
                "factor" => factor = Some(FactorRecipe::parse(value)?),
                "weights" => weights = Some(WeightRule::parse(value)?),
                "n_range" => n_range = Some(parse_range(value)?),
                "seed" => {
                    seed = value.parse().map_err(|_| {
                        Error::InvalidParameter(format!("line {}: bad seed '{value}'", lineno + 1))
                    })?
                }
                "eps" => {
                    eps = value
                        .split(',')
                        .map(|v| number(v.trim()))
                        .collect::<Result<_>>()?
                }
                "cap" => cap = number(value)? as usize,
                "trend.slope_min" => trend.slope_min = number(value)?,
                "trend.growth_ratio" => trend.growth_ratio = number(value)?,
                "trend.bounded_ratio" => trend.bounded_ratio = number(value)?,
                _ => return invalid(format!("line {}: unknown key '{key}'", lineno + 1)),
            }
        }
        let spec = FamilySpec {
            kind,
            factor: factor.ok_or_else(|| Error::InvalidParameter("missing 'factor'".into()))?,
            weights: weights.ok_or_else(|| Error::InvalidParameter("missing 'weights'".into()))?,
            n_range: n_range.ok_or_else(|| Error::InvalidParameter("missing 'n_range'".into()))?,
            seed,
            trend,
            eps,
            cap,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.trend.validate()?;
        self.weights.validate()?;
        if self.n_range.is_empty() || self.n_range.contains(&0) {
            return invalid("n_range must be non-empty and start at 1 or later");
        }
        if let Some(e) = self.eps.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
            return invalid(format!("eps values must be positive, got {e}"));
        }
        Ok(())
    }

    /// The effective configuration in the file format, one key per line.
    pub fn to_config(&self) -> String {
        let kind = match self.kind {
            FamilyKind::Nested => "nested",
            FamilyKind::Triangular => "triangular",
        };
        let range: Vec<String> = self.n_range.iter().map(|n| n.to_string()).collect();
        let eps: Vec<String> = self.eps.iter().map(|e| e.to_string()).collect();
        format!(
            "kind = {kind}\nfactor = {}\nweights = {}\nn_range = {}\nseed = {}\neps = {}\ncap = {}\n\
             trend.slope_min = {}\ntrend.growth_ratio = {}\ntrend.bounded_ratio = {}\n",
            self.factor,
            self.weights,
            range.join(","),
            self.seed,
            eps.join(","),
            self.cap,
            self.trend.slope_min,
            self.trend.growth_ratio,
            self.trend.bounded_ratio
        )
    }
}

/// Everything computed for one row `n` of a family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyRow {
    pub n: usize,
    /// `ln p_i` in factor order.
    pub ln_weights: Vec<f64>,
    /// `ρ_i` in factor order.
    pub rho: Vec<usize>,
    /// `ln q_n = ln Σ p_i`.
    pub ln_q: f64,
    /// `ln ℓ_{n,i}` sorted ascending, `ℓ = p/(qρ²)`.
    pub ln_ell: Vec<f64>,
    /// Factor index (1-based) behind each sorted rate.
    pub ell_factor: Vec<usize>,
    /// `ln t_n`.
    pub ln_t: f64,
    /// `ln u_n` when `p_i/ρ_i²` is monotone in `i` (nested families only).
    pub ln_u: Option<(Direction, f64)>,
    /// `f_n(t) = Σ e^{−ℓ_{n,i} t}`.
    pub proxy: ExponentialSum,
}

impl FamilyRow {
    /// `t_n ℓ_{n,1}`.
    pub fn statistic(&self) -> f64 {
        (self.ln_t + self.ln_ell[0]).exp()
    }

    /// The row as a product walk with weights `p_i/q_n`.
    pub fn product_walk(&self, recipe: &FactorRecipe, cap: usize) -> Result<ProductWalkSpec> {
        let factors = (1..=self.ln_weights.len())
            .map(|i| recipe.walk(i, cap))
            .collect::<Result<Vec<_>>>()?;
        let weights = self
            .ln_weights
            .iter()
            .map(|w| (w - self.ln_q).exp())
            .collect();
        ProductWalkSpec::new(factors, weights)
    }
}

/// A built family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Family {
    pub spec: FamilySpec,
    pub rows: Vec<FamilyRow>,
}

fn build_row(n: usize, ln_p: &[f64], rho: &[usize], nested: bool) -> Result<FamilyRow> {
    let ln_q = log_sum_exp(ln_p);
    let ln_ratio: Vec<f64> = ln_p
        .iter()
        .zip(rho)
        .map(|(lp, &r)| lp - ln_q - 2.0 * (r as f64).ln())
        .collect();
    if let Some(x) = ln_ratio.iter().find(|x| !x.is_finite()) {
        return invalid(format!("row {n}: rate {x} is not finite"));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| ln_ratio[a].total_cmp(&ln_ratio[b]));
    let ln_ell: Vec<f64> = order.iter().map(|&i| ln_ratio[i]).collect();
    let ln_t = theorem_tn_ln(&ln_ell)?.ln();
    let ln_u = if nested {
        let seq: Vec<f64> = ln_p
            .iter()
            .zip(rho)
            .map(|(lp, &r)| lp - 2.0 * (r as f64).ln())
            .collect();
        [Direction::Increasing, Direction::Decreasing]
            .into_iter()
            .find_map(|d| theorem_un_ln(&seq, d).ok().map(|u| (d, u.ln())))
    } else {
        None
    };
    Ok(FamilyRow {
        n,
        ln_weights: ln_p.to_vec(),
        rho: rho.to_vec(),
        ln_q,
        proxy: ExponentialSum::from_logs(vec![0.0; n], ln_ell.clone())?,
        ln_ell,
        ell_factor: order.iter().map(|i| i + 1).collect(),
        ln_t,
        ln_u,
    })
}

/// Builds every row of the family.
pub fn build_family(fs: &FamilySpec) -> Result<Family> {
    fs.validate()?;
    let max_n = *fs.n_range.iter().max().unwrap();
    let rho = fs.factor.diameters(max_n, fs.cap)?;
    build_family_with_diameters(fs, &rho)
}

/// [`build_family`] with precomputed factor diameters `ρ_1, ρ_2, …`.
pub fn build_family_with_diameters(fs: &FamilySpec, rho: &[usize]) -> Result<Family> {
    fs.validate()?;
    let max_n = *fs.n_range.iter().max().unwrap();
    if rho.len() < max_n {
        return invalid(format!("{} diameters given, {max_n} needed", rho.len()));
    }
    let rows = match fs.kind {
        FamilyKind::Nested => {
            let ln_p = fs
                .weights
                .ln_weights(max_n, &mut ChaCha8Rng::seed_from_u64(fs.seed));
            fs.n_range
                .par_iter()
                .map(|&n| build_row(n, &ln_p[..n], &rho[..n], true))
                .collect::<Result<Vec<_>>>()?
        }
        FamilyKind::Triangular => fs
            .n_range
            .par_iter()
            .map(|&n| {
                let mut rng = ChaCha8Rng::seed_from_u64(fs.seed.wrapping_add(n as u64));
                let ln_p = fs.weights.ln_weights(n, &mut rng);
                build_row(n, &ln_p, &rho[..n], false)
            })
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(Family {
        spec: fs.clone(),
        rows,
    })
}
