//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use walklab::cutoff::{
    exp_sum_eval, exp_sum_mixing, experiment_heisenberg, experiment_randomized, lambda_tau,
    ExponentialSum, HeisenbergMode, RandomMode, Sampler, Trend, TrendConfig,
};
use walklab::growth::{check_moderate_growth, growth_profile, minimal_a};
use walklab::product::{build_flat, combine_hellinger, product_hellinger_ct};
use walklab::verify::verify_all;
use walklab::walk::{
    check_moderate_bounds, heat_distributions, hellinger_distance, spectral_gap, tv_distance,
    walk_distribution, Gate, DEFAULT_HEAT_TOL,
};
use walklab::{Distribution, GeneratorSet, GroupTable, ProductWalkSpec, WalkSpec};

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    title: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn cycle_profile(n: usize) -> walklab::GrowthProfile {
    let g = GroupTable::cyclic(n).unwrap();
    let e = GeneratorSet::parse_cyclic(&g, "0,1,-1").unwrap();
    growth_profile(&g, &e).unwrap()
}

fn heisenberg_walk(m: usize) -> WalkSpec {
    let g = GroupTable::heisenberg(m).unwrap();
    let gens = g.standard_generators();
    WalkSpec::uniform_on(g, &gens).unwrap()
}

fn own_profile(w: &WalkSpec) -> walklab::GrowthProfile {
    growth_profile(w.group(), w.support()).unwrap()
}

fn diameters() -> Outcome {
    for n in 2..=40 {
        let rho = cycle_profile(n).diameter;
        ensure(rho == n / 2, || {
            format!("Z_{n}: rho = {rho}, expected {}", n / 2)
        })?;
    }
    let mut seen = Vec::new();
    for m in 3..=7 {
        let rho = own_profile(&heisenberg_walk(m)).diameter;
        ensure((m - 1..=m + 2).contains(&rho), || {
            format!("H_{m}: rho = {rho} outside [{}, {}]", m - 1, m + 2)
        })?;
        seen.push(format!("H{m}:{rho}"));
    }
    Ok(format!("Z_2..Z_40 exact; {}", seen.join(" ")))
}

fn moderate_growth() -> Outcome {
    let mut worst_cycle: f64 = 0.0;
    for n in 2..=40 {
        let p = cycle_profile(n);
        ensure(check_moderate_growth(&p, 1.0, 1.0).satisfied, || {
            format!("Z_{n} fails (1,1)")
        })?;
        worst_cycle = worst_cycle.max(minimal_a(&p, 1.0));
    }
    ensure(worst_cycle <= 1.0, || {
        format!("minimal A on cycles {worst_cycle} > 1")
    })?;
    let mut worst_h: f64 = 0.0;
    for m in 3..=7 {
        let p = own_profile(&heisenberg_walk(m));
        ensure(check_moderate_growth(&p, 48.0, 3.0).satisfied, || {
            format!("H_{m} fails (48,3)")
        })?;
        worst_h = worst_h.max(minimal_a(&p, 3.0));
    }
    ensure(worst_h <= 48.0, || {
        format!("minimal A on Heisenberg {worst_h} > 48")
    })?;
    Ok(format!(
        "max minimal A: cycles {worst_cycle:.4}, Heisenberg (d=3) {worst_h:.4}"
    ))
}

/// The six-chain battery; the product is returned flattened.
fn battery() -> Vec<(&'static str, WalkSpec)> {
    let z9 = GroupTable::cyclic(9).unwrap();
    let product = ProductWalkSpec::new(
        vec![
            WalkSpec::lazy_cycle(3).unwrap(),
            WalkSpec::lazy_cycle(5).unwrap(),
        ],
        vec![0.4, 0.6],
    )
    .unwrap();
    vec![
        ("Z3 lazy", WalkSpec::lazy_cycle(3).unwrap()),
        ("Z11 lazy", WalkSpec::lazy_cycle(11).unwrap()),
        (
            "Z9 sqrt jumps",
            WalkSpec::uniform_on(z9, &[0, 1, 8, 3, 6]).unwrap(),
        ),
        ("H3", heisenberg_walk(3)),
        ("H4", heisenberg_walk(4)),
        ("Z3xZ5", build_flat(&product).unwrap()),
    ]
}

fn powers(w: &WalkSpec, max: u64) -> Vec<Distribution> {
    let mut out = vec![Distribution::point(w.order(), 0)];
    for _ in 0..max {
        out.push(w.step(out.last().unwrap()));
    }
    out
}

/// `min(h² − (1 − sqrt(1 − tv²)), tv − h²)`.
fn sandwich_margin(p: &Distribution) -> f64 {
    let tv = tv_distance(p);
    let h = hellinger_distance(p);
    (h * h - (1.0 - (1.0 - tv * tv).sqrt())).min(tv - h * h)
}

fn sandwich() -> Outcome {
    let mut worst = f64::INFINITY;
    let mut evaluated = 0;
    for (name, w) in battery() {
        let rho = own_profile(&w).diameter as f64;
        let times = [0.0, 0.5, 1.0, 2.0, 4.0, 8.0, rho * rho, 4.0 * rho * rho];
        let dists = powers(&w, 64)
            .into_iter()
            .chain(heat_distributions(&w, &times, DEFAULT_HEAT_TOL).unwrap());
        for p in dists {
            let m = sandwich_margin(&p);
            ensure(m >= -1e-10, || format!("{name}: sandwich margin {m:.3e}"))?;
            worst = worst.min(m);
            evaluated += 1;
        }
    }
    Ok(format!(
        "{evaluated} (chain, time) pairs, worst margin {worst:.3e}"
    ))
}

fn product_identity() -> Outcome {
    let z = |n| WalkSpec::lazy_cycle(n).unwrap();
    let z9 = GroupTable::cyclic(9).unwrap();
    let products = vec![
        ProductWalkSpec::new(vec![z(3), z(5)], vec![0.4, 0.6]).unwrap(),
        ProductWalkSpec::new(vec![z(3), z(5), z(7)], vec![0.2, 0.3, 0.5]).unwrap(),
        ProductWalkSpec::new(vec![heisenberg_walk(3), z(11)], vec![0.5, 0.5]).unwrap(),
        ProductWalkSpec::new(
            vec![
                WalkSpec::uniform_on(z9, &[0, 1, 8, 3, 6]).unwrap(),
                heisenberg_walk(4),
            ],
            vec![0.7, 0.3],
        )
        .unwrap(),
    ];
    let times = [0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0];
    let mut worst: f64 = 0.0;
    for pw in &products {
        assert!(pw.flat_order() <= 2000);
        let flat = build_flat(pw).unwrap();
        let oracle = heat_distributions(&flat, &times, DEFAULT_HEAT_TOL).unwrap();
        for (&t, p) in times.iter().zip(&oracle) {
            let formula = product_hellinger_ct(pw, t, DEFAULT_HEAT_TOL).unwrap();
            worst = worst.max((formula - hellinger_distance(p)).abs());
        }
    }
    ensure(worst <= 1e-9, || {
        format!("max |formula - oracle| = {worst:.3e}")
    })?;
    let lazy3 = z(3);
    let pw = ProductWalkSpec::new(vec![lazy3.clone(), lazy3.clone()], vec![0.5, 0.5]).unwrap();
    let exact = hellinger_distance(&walk_distribution(&build_flat(&pw).unwrap(), 2));
    let d1 = hellinger_distance(&walk_distribution(&lazy3, 1));
    let miss = (exact - combine_hellinger(&[d1, d1])).abs();
    ensure(miss >= 1e-3, || {
        format!("discrete witness misses by only {miss:.3e}")
    })?;
    Ok(format!(
        "{} products, max error {worst:.3e}; discrete witness misses by {miss:.3e}",
        products.len()
    ))
}

/// Worst slack of `4d(a+b) <= 4d(a)·4d(b)` over `a + b < len` together
/// with monotonicity of `d`.
fn submultiplicative_slack(d: &[f64]) -> f64 {
    let mut worst = f64::INFINITY;
    for a in 0..d.len() {
        for b in 0..d.len() - a {
            worst = worst.min(16.0 * d[a] * d[b] - 4.0 * d[a + b]);
        }
        if a + 1 < d.len() {
            worst = worst.min(d[a] - d[a + 1]);
        }
    }
    worst
}

fn lemma_a3() -> Outcome {
    let mut details = Vec::new();
    for (name, w) in [
        ("Z11 lazy", WalkSpec::lazy_cycle(11).unwrap()),
        ("H3", heisenberg_walk(3)),
    ] {
        let d: Vec<f64> = powers(&w, 40).iter().map(hellinger_distance).collect();
        let s = submultiplicative_slack(&d);
        ensure(s >= -1e-10, || format!("{name} discrete slack {s:.3e}"))?;
        let rho = own_profile(&w).diameter as f64;
        let delta = rho * rho / 4.0;
        let times: Vec<f64> = (0..10).map(|k| k as f64 * delta).collect();
        let dc: Vec<f64> = heat_distributions(&w, &times, DEFAULT_HEAT_TOL)
            .unwrap()
            .iter()
            .map(hellinger_distance)
            .collect();
        let sc = submultiplicative_slack(&dc);
        ensure(sc >= -1e-10, || format!("{name} continuous slack {sc:.3e}"))?;
        details.push(format!("{name}: {s:.2e}/{sc:.2e}"));
    }
    Ok(format!(
        "worst slack discrete/continuous {}",
        details.join(", ")
    ))
}

fn moderate_bounds() -> Outcome {
    let steps: Vec<u64> = (0..=100).collect();
    let mut upper_checks = 0;
    let mut lower_checks = 0;
    let mut chains: Vec<(String, WalkSpec, f64, f64)> = Vec::new();
    for n in 5..=25 {
        let g = GroupTable::cyclic(n).unwrap();
        chains.push((
            format!("Z{n} lazy"),
            WalkSpec::lazy_on(g.clone(), &[0, 1, n - 1]).unwrap(),
            1.0,
            1.0,
        ));
        chains.push((
            format!("Z{n} uniform"),
            WalkSpec::uniform_on(g, &[0, 1, n - 1]).unwrap(),
            1.0,
            1.0,
        ));
    }
    for m in 3..=5 {
        chains.push((format!("H{m}"), heisenberg_walk(m), 48.0, 3.0));
    }
    // Cycles long enough for the lower-bound gate to open.
    for n in [32, 36, 40] {
        chains.push((
            format!("Z{n} lazy"),
            WalkSpec::lazy_cycle(n).unwrap(),
            1.0,
            1.0,
        ));
    }
    for (name, w, a, d) in &chains {
        let p = own_profile(w);
        let cert = check_moderate_growth(&p, *a, *d);
        let rep = check_moderate_bounds(w, &cert, &p, &steps);
        ensure(rep.upper_gate == Gate::Checked, || {
            format!("{name}: upper gate {:?}", rep.upper_gate)
        })?;
        ensure(rep.all_hold(), || format!("{name}: a bound fails"))?;
        upper_checks += rep.upper.len();
        lower_checks += rep.lower.len();
    }
    let w = WalkSpec::lazy_cycle(11).unwrap();
    let p = own_profile(&w);
    let rep = check_moderate_bounds(&w, &check_moderate_growth(&p, 1.0, 1.0), &p, &steps);
    let gated = matches!(&rep.lower_gate, Gate::PrerequisiteNotMet(_)) && rep.lower.is_empty();
    ensure(gated, || {
        format!("Z11 lower gate reported {:?}", rep.lower_gate)
    })?;
    Ok(format!(
        "{upper_checks} upper and {lower_checks} lower checks hold; Z11 lower bound: prerequisite not met"
    ))
}

fn spectral_lower() -> Outcome {
    let z2 = GroupTable::cyclic(2).unwrap();
    let mut worst_eq: f64 = 0.0;
    for w in [
        WalkSpec::uniform_on(z2.clone(), &[1]).unwrap(),
        WalkSpec::lazy_cycle(2).unwrap(),
    ] {
        let lambda = spectral_gap(&w).unwrap();
        let times = [0.0, 0.1, 0.5, 1.0, 2.0, 4.0, 8.0];
        for (t, p) in times
            .iter()
            .zip(heat_distributions(&w, &times, DEFAULT_HEAT_TOL).unwrap())
        {
            worst_eq = worst_eq.max((tv_distance(&p) - 0.5 * (-lambda * t).exp()).abs());
        }
    }
    ensure(worst_eq <= 1e-8, || {
        format!("Z2 equality off by {worst_eq:.3e}")
    })?;
    let mut worst_rel = f64::INFINITY;
    for (name, w) in battery() {
        let lambda = spectral_gap(&w).unwrap();
        let rho = own_profile(&w).diameter as f64;
        let times: Vec<f64> = [0.5, 1.0, 2.0, 4.0].iter().map(|a| a * rho * rho).collect();
        for (t, p) in times
            .iter()
            .zip(heat_distributions(&w, &times, DEFAULT_HEAT_TOL).unwrap())
        {
            let lower = 0.5 * (-lambda * t).exp();
            let tv = tv_distance(&p);
            ensure(tv > lower, || {
                format!("{name} at t={t}: tv {tv:.6e} <= {lower:.6e}")
            })?;
            worst_rel = worst_rel.min((tv - lower) / lower);
        }
    }
    Ok(format!(
        "Z2 equality to {worst_eq:.1e}; smallest relative margin {worst_rel:.3e}"
    ))
}

fn laplace() -> Outcome {
    let s = ExponentialSum::new(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).unwrap();
    let t05 = lambda_tau(&s, 0.5).unwrap().tau_c();
    let t15 = lambda_tau(&s, 1.5).unwrap().tau_c();
    let e1 = (t05 - 2f64.ln()).abs();
    let e2 = (t15 - (3f64.ln() / 2.0).max(4f64.ln() / 3.0)).abs();
    ensure(e1 <= 1e-12 && e2 <= 1e-12, || {
        format!("tau errors {e1:.3e}, {e2:.3e}")
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let k = rng.random_range(1..=30);
        let a: Vec<f64> = (0..k).map(|_| rng.random_range(0.01..5.0)).collect();
        let l: Vec<f64> = (0..k)
            .map(|_| 10f64.powf(rng.random_range(-3.0..3.0)))
            .collect();
        let s = ExponentialSum::new(&a, &l).unwrap();
        let eps = s.total() * rng.random_range(1e-6..0.999);
        let t = exp_sum_mixing(&s, eps).unwrap();
        worst = worst.max((exp_sum_eval(&s, t) - eps).abs() / eps);
    }
    ensure(worst <= 1e-9, || {
        format!("inversion relative error {worst:.3e}")
    })?;
    Ok(format!(
        "tau errors {e1:.1e}, {e2:.1e}; inversion max relative error {worst:.3e}"
    ))
}

fn phase_transition() -> Outcome {
    let ns: Vec<usize> = (1..=60).collect();
    let slow = experiment_heisenberg(0.5, &ns, HeisenbergMode::Formula).unwrap();
    let again = experiment_heisenberg(0.5, &ns, HeisenbergMode::Formula).unwrap();
    let fast = experiment_heisenberg(1.5, &ns, HeisenbergMode::Formula).unwrap();
    ensure(slow == again, || {
        "gamma = 0.5 run is not deterministic".into()
    })?;
    let f = &slow.report.fit;
    let g = &fast.report.fit;
    let detail = format!(
        "gamma=0.5: {} (slope {:.3}, first {:.3}, last {:.3}, last/first {:.3}); gamma=1.5: {} (upper max/min {:.3})",
        slow.report.verdict,
        f.slope,
        f.first,
        f.last,
        f.last / f.first,
        fast.report.verdict,
        g.upper_max / g.upper_min
    );
    ensure(
        slow.report.verdict == Trend::Growing && fast.report.verdict == Trend::Bounded,
        || detail.clone(),
    )?;
    Ok(detail)
}

fn randomized() -> Outcome {
    let ns: Vec<usize> = (1..=400).collect();
    let cfg = TrendConfig::default();
    let poly_x = Sampler::parse("uniform(0,2)").unwrap();
    let exp_x = Sampler::parse("uniform(1,3)").unwrap();
    let runs = [
        (
            "poly gamma=2",
            RandomMode::Poly { gamma: 2.0 },
            poly_x,
            Trend::Growing,
        ),
        (
            "poly gamma=3",
            RandomMode::Poly { gamma: 3.0 },
            poly_x,
            Trend::Bounded,
        ),
        ("exp uniform(1,3)", RandomMode::Exp, exp_x, Trend::Bounded),
    ];
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, mode, sampler, want) in runs {
        let exp = experiment_randomized(mode, sampler, 42, &ns, 20, &cfg).unwrap();
        let hits = exp.trials.iter().filter(|t| t.verdict == want).count();
        ok &= hits >= 19;
        parts.push(format!(
            "{name}: {hits}/20 {want} (g/b/i = {}/{}/{})",
            exp.growing, exp.bounded, exp.inconclusive
        ));
    }
    let detail = parts.join("; ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn determinism() -> Outcome {
    let a = serde_json::to_string(&verify_all(42).unwrap()).unwrap();
    let b = serde_json::to_string(&verify_all(42).unwrap()).unwrap();
    ensure(a == b, || "verify_all reports differ".into())?;
    let report = verify_all(42).unwrap();
    ensure(report.all_passed(), || {
        format!("{} checks failed", report.failed)
    })?;
    Ok(format!(
        "{} bytes identical; {} passed, {} skipped, {} failed",
        a.len(),
        report.passed,
        report.skipped,
        report.failed
    ))
}

fn main() {
    let criteria = [
        Criterion {
            id: 1,
            title: "diameters",
            budget: Duration::from_secs(5),
            run: diameters,
        },
        Criterion {
            id: 2,
            title: "moderate growth certificates",
            budget: Duration::from_secs(5),
            run: moderate_growth,
        },
        Criterion {
            id: 3,
            title: "TV/Hellinger sandwich",
            budget: Duration::from_secs(60),
            run: sandwich,
        },
        Criterion {
            id: 4,
            title: "product Hellinger identity",
            budget: Duration::from_secs(60),
            run: product_identity,
        },
        Criterion {
            id: 5,
            title: "4d_H monotone and submultiplicative",
            budget: Duration::from_secs(30),
            run: lemma_a3,
        },
        Criterion {
            id: 6,
            title: "moderate-growth bounds",
            budget: Duration::from_secs(60),
            run: moderate_bounds,
        },
        Criterion {
            id: 7,
            title: "continuous spectral lower bound",
            budget: Duration::from_secs(30),
            run: spectral_lower,
        },
        Criterion {
            id: 8,
            title: "Laplace criterion unit values",
            budget: Duration::from_secs(5),
            run: laplace,
        },
        Criterion {
            id: 9,
            title: "Heisenberg phase transition",
            budget: Duration::from_secs(10),
            run: phase_transition,
        },
        Criterion {
            id: 10,
            title: "randomized products",
            budget: Duration::from_secs(60),
            run: randomized,
        },
        Criterion {
            id: 11,
            title: "verify_all determinism",
            budget: Duration::from_secs(60),
            run: determinism,
        },
    ];
    let mut failed = Vec::new();
    for c in &criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(c.run).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let (status, detail) = match outcome {
            Ok(d) if elapsed <= c.budget => ("PASS", d),
            Ok(d) => (
                "FAIL",
                format!("{d}; took {elapsed:.2?} > budget {:?}", c.budget),
            ),
            Err(d) => ("FAIL", d),
        };
        println!(
            "criterion {:>2} {status}: {} [{:.2?} / {:?}] {detail}",
            c.id, c.title, elapsed, c.budget
        );
        if status == "FAIL" {
            failed.push(c.id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria pass", criteria.len());
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
