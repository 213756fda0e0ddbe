//! Subcommand implementations.

use std::path::Path;

use walklab::cutoff::experiment::{experiment_heisenberg_with, heisenberg_family_spec};
use walklab::cutoff::family::parse_range;
use walklab::cutoff::laplace::cutoff_criterion_scan;
use walklab::cutoff::{
    build_family, cutoff_report, exp_sum_mixing, experiment_randomized, lambda_tau, CutoffReport,
    ExponentialSum, FamilySpec, HeisenbergMode, RandomMode, Sampler, TrendConfig,
};
use walklab::growth::{check_moderate_growth, growth_profile, minimal_a, moderate_growth_sides};
use walklab::output::Cell;
use walklab::product::{
    build_flat_with_cap, product_hellinger_bounds, product_hellinger_ct_with, tv_bracket,
    HellingerMemo,
};
use walklab::verify::{default_fixtures, verify_fixtures, FixtureSpec, Grids, Suite};
use walklab::walk::{
    check_cts_bounds, check_moderate_bounds, discrete_curve, heat_distributions,
    hellinger_distance, mixing_time, tv_distance, walk_from_descriptor,
};
use walklab::{Clock, Error, GeneratorSet, GroupTable, Metric, ProductWalkSpec, Result, WalkSpec};

use crate::args::*;
use crate::emit::{Context, Format, Report};
use crate::parse::{element_label, parse_floats, parse_gens, parse_steps, parse_times};

/// Seed of `verify` when none is given.
pub const DEFAULT_VERIFY_SEED: u64 = 42;

/// What the process should report besides the written output.
pub enum Outcome {
    Done(Report),
    /// A verify run with at least one failed check.
    Failed(Report),
}

fn bad<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}

fn group(ctx: &Context, desc: &str) -> Result<GroupTable> {
    ctx.note(format!("enumerating {desc}"));
    GroupTable::parse(desc, ctx.cap)
}

fn walk(ctx: &Context, t: &WalkTarget) -> Result<WalkSpec> {
    let g = group(ctx, &t.group.group)?;
    let gens = parse_gens(&g, &t.group.gens)?;
    walk_from_descriptor(g, &gens, &t.law)
}

fn trend(t: &TrendArgs) -> Result<TrendConfig> {
    let cfg = TrendConfig {
        slope_min: t.slope_min,
        growth_ratio: t.growth_ratio,
        bounded_ratio: t.bounded_ratio,
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn run(ctx: &Context, cmd: &Command) -> Result<Outcome> {
    let report = match cmd {
        Command::Group(a) => group_cmd(ctx, a)?,
        Command::Growth(a) => growth_cmd(ctx, a)?,
        Command::Walk(WalkCommand::Curve(a)) => walk_curve(ctx, a)?,
        Command::Walk(WalkCommand::Mix(a)) => walk_mix(ctx, a)?,
        Command::Product(ProductCommand::Curve(a)) => product_curve(ctx, a)?,
        Command::Laplace(LaplaceCommand::Tau(a)) => laplace_tau(a)?,
        Command::Laplace(LaplaceCommand::Mix(a)) => laplace_mix(a)?,
        Command::Family(FamilyCommand::Scan(a)) => family_scan(ctx, a)?,
        Command::Experiment(ExperimentCommand::Heisenberg(a)) => heisenberg(ctx, a)?,
        Command::Experiment(ExperimentCommand::Randomized(a)) => randomized(ctx, a)?,
        Command::Verify(a) => return verify(ctx, a),
    };
    Ok(Outcome::Done(report))
}

fn group_cmd(ctx: &Context, a: &GroupArgs) -> Result<Report> {
    let g = group(ctx, &a.group)?;
    let gens = parse_gens(&g, &a.gens)?;
    let set = GeneratorSet::new(&g, &gens)?;
    let mut r = Report::new(&["index", "element", "inverse", "in_gens"]);
    for x in 0..g.order() {
        r.push(vec![
            x.into(),
            element_label(&g, x).into(),
            element_label(&g, g.inv(x)).into(),
            set.contains(x).into(),
        ]);
    }
    r.note("label", g.label());
    r.note("order", g.order());
    r.note("symmetric_gens", set.is_symmetric());
    r.set("label", g.label());
    r.set("order", g.order());
    r.set(
        "gens",
        gens.iter()
            .map(|&x| element_label(&g, x))
            .collect::<Vec<_>>(),
    );
    r.set("symmetric_gens", set.is_symmetric());
    Ok(r)
}

fn growth_cmd(ctx: &Context, a: &GrowthArgs) -> Result<Report> {
    let g = group(ctx, &a.target.group)?;
    let gens = parse_gens(&g, &a.target.gens)?;
    let set = GeneratorSet::new(&g, &gens)?;
    let profile = growth_profile(&g, &set)?;
    let d = a.cert_d;
    if !(d > 0.0 && d.is_finite()) {
        return bad(format!("cert-d must be positive, got {d}"));
    }
    let min_a = minimal_a(&profile, d);
    let cert_a = a.cert_a.unwrap_or(min_a);
    let cert = check_moderate_growth(&profile, cert_a, d);
    let mut r = Report::new(&[
        "m",
        "V(m)",
        "ball_fraction",
        "modgrowth_lhs",
        "modgrowth_rhs",
    ]);
    for m in 1..=profile.diameter {
        let v = profile.volume(m);
        let (lhs, rhs) = moderate_growth_sides(&profile, m, cert_a, d);
        r.push(vec![
            m.into(),
            v.into(),
            (v as f64 / g.order() as f64).into(),
            lhs.into(),
            rhs.into(),
        ]);
    }
    r.note("rho", profile.diameter);
    r.note("group_order", g.order());
    r.note("minimal_a", walklab::output::fmt_float(min_a));
    r.note(
        "certificate",
        format!("A={cert_a} d={d} satisfied={}", cert.satisfied),
    );
    r.set("rho", profile.diameter);
    r.set("group_order", g.order());
    r.set("minimal_a", min_a);
    r.set("certificate", cert);
    r.json_rows = true;
    Ok(r)
}

fn cert_for(
    profile: &walklab::GrowthProfile,
    a: Option<f64>,
    d: f64,
) -> walklab::ModerateGrowthCert {
    check_moderate_growth(profile, a.unwrap_or_else(|| minimal_a(profile, d)), d)
}

fn walk_curve(ctx: &Context, a: &CurveArgs) -> Result<Report> {
    let w = walk(ctx, &a.target)?;
    let clock: Clock = a.clock.parse()?;
    let profile = growth_profile(w.group(), w.support()).ok();
    let mut r = Report::new(&[
        "clock",
        "time",
        "tv",
        "hellinger",
        "tv_upper_bound",
        "tv_lower_bound",
    ]);
    match clock {
        Clock::Discrete => {
            ctx.note(format!("stepping {} steps", a.max_steps));
            let tv = discrete_curve(&w, Metric::Tv, a.max_steps);
            let h = discrete_curve(&w, Metric::Hellinger, a.max_steps);
            let steps: Vec<u64> = (0..=a.max_steps).collect();
            let bounds = profile.as_ref().map(|p| {
                let cert = cert_for(p, a.cert_a, a.cert_d);
                check_moderate_bounds(&w, &cert, p, &steps)
            });
            for m in 0..=a.max_steps as usize {
                let upper = bounds
                    .as_ref()
                    .and_then(|b| b.upper.get(m))
                    .map(|c| c.bound);
                let lower = bounds
                    .as_ref()
                    .and_then(|b| b.lower.get(m))
                    .map(|c| c.bound);
                r.push(vec![
                    "discrete".into(),
                    (m as u64).into(),
                    tv.values[m].into(),
                    h.values[m].into(),
                    upper.into(),
                    lower.into(),
                ]);
            }
            if let Some(b) = &bounds {
                r.note("upper_gate", format!("{:?}", b.upper_gate));
                r.note("lower_gate", format!("{:?}", b.lower_gate));
                r.set(
                    "bounds",
                    serde_json::json!({
                        "a": b.a, "d": b.d, "c1": b.c1, "c2": b.c2, "eta": b.eta, "rho": b.rho,
                        "upper_gate": b.upper_gate, "lower_gate": b.lower_gate,
                    }),
                );
            }
        }
        Clock::Continuous => {
            let times = parse_times(&a.times)?;
            ctx.note(format!("evaluating {} times", times.len()));
            match (&profile, w.is_symmetric()) {
                (Some(p), true) => {
                    let cert = cert_for(p, a.cert_a, a.cert_d);
                    let rep = check_cts_bounds(&w, &cert, p, &times, ctx.tol)?;
                    for row in &rep.rows {
                        r.push(vec![
                            "continuous".into(),
                            row.t.into(),
                            row.tv.into(),
                            row.hellinger.into(),
                            row.tv_upper.into(),
                            row.tv_lower.into(),
                        ]);
                    }
                    r.note("spectral_gap", walklab::output::fmt_float(rep.lambda));
                    r.note("upper_gate", format!("{:?}", rep.upper_gate));
                    r.set(
                        "bounds",
                        serde_json::json!({
                            "lambda": rep.lambda, "eta": rep.eta, "rho": rep.rho, "c1": rep.c1,
                            "upper_gate": rep.upper_gate, "empirical_c": rep.empirical_c,
                        }),
                    );
                }
                _ => {
                    r.note(
                        "bounds",
                        "unavailable (non-symmetric or non-generating law)",
                    );
                    for (t, p) in times.iter().zip(heat_distributions(&w, &times, ctx.tol)?) {
                        r.push(vec![
                            "continuous".into(),
                            (*t).into(),
                            tv_distance(&p).into(),
                            hellinger_distance(&p).into(),
                            Cell::Empty,
                            Cell::Empty,
                        ]);
                    }
                }
            }
        }
    }
    Ok(r)
}

fn walk_mix(ctx: &Context, a: &MixArgs) -> Result<Report> {
    let w = walk(ctx, &a.target)?;
    let metric: Metric = a.metric.parse()?;
    let clock: Clock = a.clock.parse()?;
    let t = mixing_time(&w, metric, clock, a.eps, ctx.time_cap)?;
    let mut r = Report::new(&["metric", "clock", "eps", "mixing_time"]);
    let value: Cell = match t {
        walklab::walk::MixingTime::Steps(m) => m.into(),
        walklab::walk::MixingTime::Time(x) => x.into(),
    };
    r.push(vec![
        metric.to_string().into(),
        clock.to_string().into(),
        a.eps.into(),
        value,
    ]);
    r.set("metric", metric.to_string());
    r.set("clock", clock.to_string());
    r.set("eps", a.eps);
    r.set("mixing_time", t);
    r.json_rows = false;
    r.default_format = Format::Json;
    Ok(r)
}

fn cache(ctx: &Context) -> Result<HellingerMemo> {
    match &ctx.cache_dir {
        Some(dir) => HellingerMemo::open(&dir.join("factor-hellinger.tsv")),
        None => Ok(HellingerMemo::new()),
    }
}

fn product_curve(ctx: &Context, a: &ProductCurveArgs) -> Result<Report> {
    let factors = a
        .factors
        .iter()
        .map(|f| {
            let (desc, law) = f.rsplit_once('@').unwrap_or((f.as_str(), "lazy"));
            let g = group(ctx, desc)?;
            let gens = g.standard_generators();
            walk_from_descriptor(g, &gens, law)
        })
        .collect::<Result<Vec<_>>>()?;
    let pw = ProductWalkSpec::new(factors, parse_floats(&a.weights)?)?;
    let times = parse_times(&a.times)?;
    let memo = cache(ctx)?;
    let oracle = if pw.flat_order() <= a.oracle_limit as u128 {
        ctx.note(format!(
            "building the flat product of order {}",
            pw.flat_order()
        ));
        let flat = build_flat_with_cap(&pw, ctx.cap)?;
        Some(heat_distributions(&flat, &times, ctx.tol)?)
    } else {
        None
    };
    let mut r = Report::new(&[
        "t",
        "hellinger_exact",
        "tv_lower",
        "tv_upper",
        "lemmaA1_lower",
        "lemmaA1_upper",
        "oracle_available",
        "oracle_value",
    ]);
    for (k, &t) in times.iter().enumerate() {
        let h = product_hellinger_ct_with(&pw, t, ctx.tol, &memo)?;
        let (lo, hi) = tv_bracket(h);
        let b = product_hellinger_bounds(&pw, t, a.sandwich_a, ctx.tol, &memo)?;
        let oracle_value = oracle.as_ref().map(|o| hellinger_distance(&o[k]));
        r.push(vec![
            t.into(),
            h.into(),
            lo.into(),
            hi.into(),
            b.lower.max(b.max_lower).into(),
            b.precondition_holds.then_some(b.upper).into(),
            oracle.is_some().into(),
            oracle_value.into(),
        ]);
    }
    memo.save()?;
    r.note("flat_order", pw.flat_order());
    r.set("flat_order", pw.flat_order() as f64);
    r.set("weights", pw.weights());
    Ok(r)
}

fn exp_sum(a: &SumArgs) -> Result<ExponentialSum> {
    ExponentialSum::new(&parse_floats(&a.a)?, &parse_floats(&a.lambda)?)
}

fn laplace_tau(a: &TauArgs) -> Result<Report> {
    let s = exp_sum(&a.sum)?;
    let mut r = Report::new(&["c", "j", "lambda_c", "tau_c", "tau_lambda"]);
    for c in parse_floats(&a.c)? {
        match lambda_tau(&s, c) {
            Ok(v) => r.push(vec![
                c.into(),
                (v.j as u64).into(),
                v.lambda_c().into(),
                v.tau_c().into(),
                v.product().into(),
            ]),
            Err(Error::NoIndex { .. }) => r.push(vec![
                c.into(),
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
            ]),
            Err(e) => return Err(e),
        }
    }
    r.note("total", walklab::output::fmt_float(s.total()));
    r.set("total", s.total());
    Ok(r)
}

fn laplace_mix(a: &LaplaceMixArgs) -> Result<Report> {
    let s = exp_sum(&a.sum)?;
    let mut r = Report::new(&["eps", "mixing_time"]);
    for eps in parse_floats(&a.eps)? {
        r.push(vec![eps.into(), exp_sum_mixing(&s, eps)?.into()]);
    }
    Ok(r)
}

fn cutoff_rows(r: &mut Report, rep: &CutoffReport) {
    for row in &rep.rows {
        let mut cells: Vec<Cell> = vec![
            row.n.into(),
            row.t.into(),
            row.ell_1.into(),
            row.t_ell_1.into(),
        ];
        for k in 0..rep.eps.len() {
            cells.push(row.mixing[k].into());
            cells.push(row.mixing_ell_1[k].into());
        }
        cells.push(row.ln_u.into());
        r.push(cells);
    }
    r.note("verdict", rep.verdict);
    r.note("slope", walklab::output::fmt_float(rep.fit.slope));
    r.set("verdict", rep.verdict);
    r.set("fit", rep.fit);
    r.set("trend", rep.trend);
}

fn cutoff_columns(eps: &[f64]) -> Vec<String> {
    let mut cols: Vec<String> = ["n", "t_n", "ell_1", "t_ell_1"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for e in eps {
        cols.push(format!("mixing_eps={e}"));
        cols.push(format!("mixing_ell_1_eps={e}"));
    }
    cols.push("ln_u".into());
    cols
}

fn family_scan(ctx: &Context, a: &ScanArgs) -> Result<Report> {
    let text = std::fs::read_to_string(&a.spec)
        .map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", a.spec.display())))?;
    let mut spec = FamilySpec::parse(&text)?;
    if let Some(seed) = ctx.seed {
        spec.seed = seed;
    }
    spec.cap = spec.cap.min(ctx.cap);
    ctx.note(format!("building {} rows", spec.n_range.len()));
    let family = build_family(&spec)?;
    let label = a
        .spec
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("family");
    let rep = cutoff_report(&family, label, a.with_mixing)?;
    let cols = cutoff_columns(&rep.eps);
    let mut r = Report::new(&cols.iter().map(String::as_str).collect::<Vec<_>>());
    cutoff_rows(&mut r, &rep);
    r.set("spec", spec.to_config());
    r.note("family_seed", spec.seed);
    if let Some(c_grid) = &a.c_grid {
        let c_grid = parse_floats(c_grid)?;
        let eps_grid = a
            .eps_grid
            .as_deref()
            .map(parse_floats)
            .transpose()?
            .unwrap_or_default();
        let rows: Vec<(usize, ExponentialSum)> = family
            .rows
            .iter()
            .map(|row| (row.n, row.proxy.clone()))
            .collect();
        let scan = cutoff_criterion_scan(&rows, &c_grid, &eps_grid, &spec.trend)?;
        r.note("criterion_consistent", scan.consistent());
        r.set("criterion", scan);
    }
    Ok(r)
}

fn heisenberg(ctx: &Context, a: &HeisenbergArgs) -> Result<Report> {
    let mode: HeisenbergMode = a.mode.parse()?;
    let mut spec = heisenberg_family_spec(a.gamma, &parse_range(&a.n_range)?);
    spec.trend = trend(&a.trend)?;
    spec.cap = ctx.cap;
    ctx.note(format!("heisenberg family, gamma = {}", a.gamma));
    let exp = experiment_heisenberg_with(&spec, mode)?;
    let cols = cutoff_columns(&exp.report.eps);
    let mut r = Report::new(&cols.iter().map(String::as_str).collect::<Vec<_>>());
    cutoff_rows(&mut r, &exp.report);
    r.set("gamma", exp.gamma);
    r.set("mode", exp.mode);
    if !exp.exact.is_empty() {
        let hold = exp.exact.iter().all(|c| c.all_hold());
        r.note("exact_bounds_hold", hold);
        r.set("exact", &exp.exact);
    }
    Ok(r)
}

fn randomized(ctx: &Context, a: &RandomizedArgs) -> Result<Report> {
    let mode = match (a.mode.as_str(), a.gamma) {
        ("poly", Some(gamma)) => RandomMode::Poly { gamma },
        ("poly", None) => return bad("poly mode needs --gamma"),
        ("exp", None) => RandomMode::Exp,
        ("exp", Some(_)) => return bad("exp mode takes no --gamma"),
        (m, _) => return bad(format!("unknown mode '{m}' (poly | exp)")),
    };
    let sampler = Sampler::parse(&a.dist)?;
    let seed = ctx.seed.unwrap_or(0);
    ctx.note(format!("{} trials from seed {seed}", a.trials));
    let exp = experiment_randomized(
        mode,
        sampler,
        seed,
        &parse_range(&a.n_range)?,
        a.trials,
        &trend(&a.trend)?,
    )?;
    let mut r = Report::new(&[
        "trial",
        "seed",
        "slope",
        "first",
        "last",
        "upper_max",
        "upper_min",
        "verdict",
    ]);
    for t in &exp.trials {
        r.push(vec![
            t.trial.into(),
            t.seed.into(),
            t.fit.slope.into(),
            t.fit.first.into(),
            t.fit.last.into(),
            t.fit.upper_max.into(),
            t.fit.upper_min.into(),
            t.verdict.to_string().into(),
        ]);
    }
    r.note("growing", exp.growing);
    r.note("bounded", exp.bounded);
    r.note("inconclusive", exp.inconclusive);
    r.set("mode", exp.mode);
    r.set("sampler", exp.sampler.to_string());
    r.set("trend", exp.trend);
    r.set("growing", exp.growing);
    r.set("bounded", exp.bounded);
    r.set("inconclusive", exp.inconclusive);
    Ok(r)
}

fn verify(ctx: &Context, a: &VerifyArgs) -> Result<Outcome> {
    let suites: Vec<Suite> = match a.suite.as_str() {
        "all" => Suite::ALL.to_vec(),
        s => vec![s.parse()?],
    };
    let grids = Grids {
        steps: parse_steps(&a.steps)?,
        times: a.times.as_deref().map(parse_times).transpose()?,
    };
    let cert = match &a.cert {
        Some(c) => match parse_floats(c)?.as_slice() {
            [a, d] => Some((*a, *d)),
            _ => return bad(format!("cert must be 'A,d', got '{c}'")),
        },
        None => None,
    };
    let (fixtures, global) = match &a.group {
        Some(desc) => {
            let g = group(ctx, desc)?;
            let gens = parse_gens(&g, &a.gens)?;
            let fx = FixtureSpec::Walk {
                name: desc.clone(),
                group: desc.clone(),
                gens: Some(gens),
                law: a.law.clone(),
                cert,
            };
            (vec![fx], false)
        }
        None => (default_fixtures(), a.suite == "all"),
    };
    let seed = ctx.seed.unwrap_or(DEFAULT_VERIFY_SEED);
    ctx.note(format!(
        "running {} suite(s) on {} fixture(s)",
        suites.len(),
        fixtures.len()
    ));
    let report = verify_fixtures(&fixtures, &suites, &grids, seed, global)?;
    let mut r = Report::new(&["check", "status", "detail"]);
    for c in &report.checks {
        let status = serde_json::to_value(c.status).expect("status");
        r.push(vec![
            c.name.as_str().into(),
            status.as_str().unwrap_or("").into(),
            c.detail.as_str().into(),
        ]);
    }
    r.note("passed", report.passed);
    r.note("failed", report.failed);
    r.note("skipped", report.skipped);
    r.set("passed", report.passed);
    r.set("failed", report.failed);
    r.set("skipped", report.skipped);
    r.set("checks", &report.checks);
    r.json_rows = false;
    Ok(if report.all_passed() {
        Outcome::Done(r)
    } else {
        Outcome::Failed(r)
    })
}

/// Reads a config file, for the error message path.
pub fn read_config(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", path.display())))
}
