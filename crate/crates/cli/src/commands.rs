use std::time::Duration;

use permcover_core::cache::{CacheKey, CacheLoad, CertificateCache};
use permcover_core::construct::{pigeonhole_lower, thm3_default_draws, thm3_upper, CertificateRecord, Deficiency};
use permcover_core::random::{
    gap_experiment, gap_p_paper, p_for_mean, threshold_sweep, GapOptions,
};
use permcover_core::{
    alteration_cover, exact_min_cover, greedy_cover, lambda_cover, lemma5_audit, lemma5_audit_sampled,
    verify_cover, BoundTable, CoverCertificate, CoverageGraph, Method, Verification,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::output::Run;
use crate::{
    BoundsArgs, Cli, Command, Failure, GapArgs, GraphArgs, LambdaArgs, SolveArgs, ThresholdArgs, EXIT_OK,
    EXIT_VIOLATION,
};

pub fn run(cli: &Cli) -> Result<i32, Failure> {
    let mut run = Run::new(cli);
    match &cli.command {
        Command::Solve(a) => solve(&mut run, a),
        Command::Graph(a) => graph(&mut run, a),
        Command::Threshold(a) => threshold(&mut run, a),
        Command::Gap(a) => gap(&mut run, a),
        Command::Bounds(a) => bounds(&mut run, a),
        Command::Lambda(a) => lambda(&mut run, a),
    }
}

fn build_graph(run: &Run, n: usize) -> Result<CoverageGraph, Failure> {
    Ok(CoverageGraph::build_with_limits(n, &run.cli.global.limits())?)
}

fn budget(seconds: f64) -> Result<Duration, Failure> {
    if !(seconds > 0.0 && seconds.is_finite()) {
        return Err(Failure::usage(format!("--budget-seconds must be positive, got {seconds}")));
    }
    Ok(Duration::from_secs_f64(seconds))
}

#[derive(Serialize)]
struct VerificationSummary {
    ok: bool,
    deficient_patterns: Vec<Deficiency>,
}

impl From<Verification> for VerificationSummary {
    fn from(v: Verification) -> Self {
        match v {
            Verification::Ok => VerificationSummary { ok: true, deficient_patterns: Vec::new() },
            Verification::Deficient(d) => VerificationSummary { ok: false, deficient_patterns: d },
        }
    }
}

#[derive(Serialize)]
struct SolvePayload {
    #[serde(flatten)]
    certificate: CertificateRecord,
    verification: VerificationSummary,
    cache: &'static str,
}

fn solve(run: &mut Run, a: &SolveArgs) -> Result<i32, Failure> {
    let method: Method = a.method.parse().map_err(|e: permcover_core::Error| Failure::usage(e.to_string()))?;
    let g = build_graph(run, a.n)?;
    let cache = CertificateCache::new(&run.cli.global.cache_dir);
    let key = CacheKey {
        n: a.n,
        lambda: a.lambda,
        method,
        seed: method.is_randomized().then_some(a.seed),
    };

    let mut cached = None;
    if !a.no_cache && a.initial_size.is_none() {
        match cache.load(&g, &key)? {
            CacheLoad::Hit(c) => cached = Some(c),
            CacheLoad::Miss => {}
            q => run.warn(q.warning().unwrap_or_default()),
        }
    }
    let hit = cached.is_some();
    let cert = match cached {
        Some(c) => c,
        None => construct(a, method, &g)?,
    };
    let verification = verify_cover(&g, &cert.selected, cert.lambda)?;
    let ok = verification.is_ok();
    if ok && !hit && !a.no_cache && a.initial_size.is_none() {
        if let Err(e) = cache.store(&cert) {
            run.warn(format!("could not store certificate in cache: {e}"));
        }
    }

    let out = a.out.as_deref();
    run.say(
        out,
        format!(
            "n={} λ={} method={} size={} status={:?} lower_bound={} verified={}{}",
            cert.n,
            cert.lambda,
            cert.method,
            cert.size(),
            cert.status,
            cert.lower_bound,
            ok,
            if hit { " (cached)" } else { "" }
        ),
    );
    let payload = SolvePayload {
        certificate: cert.to_record(),
        verification: verification.into(),
        cache: if a.no_cache { "disabled" } else if hit { "hit" } else { "miss" },
    };
    run.emit_json(out, &payload)?;
    Ok(if ok { EXIT_OK } else { EXIT_VIOLATION })
}

fn construct(a: &SolveArgs, method: Method, g: &CoverageGraph) -> Result<CoverCertificate, Failure> {
    Ok(match method {
        Method::Exact => exact_min_cover(g, a.lambda, budget(a.budget_seconds)?)?,
        Method::Greedy => greedy_cover(g, a.lambda)?,
        Method::Alteration => {
            if a.lambda != 1 {
                return Err(Failure::usage("the alteration method builds plain covers; use --lambda 1"));
            }
            alteration_cover(g, a.seed, a.initial_size)?
        }
        Method::LambdaSample => lambda_cover(g, a.lambda, a.seed)?,
        Method::External => return Err(Failure::usage("external certificates cannot be constructed")),
    })
}

fn graph(run: &mut Run, a: &GraphArgs) -> Result<i32, Failure> {
    let limits = run.cli.global.limits();
    let g = build_graph(run, a.n)?;
    let identities = g.identity_report();
    let mut payload = json!({
        "n": g.n(),
        "pattern_count": g.pattern_count(),
        "cover_count": g.cover_count(),
        "identities": identities,
        "identities_hold": identities.all_hold(),
    });
    let mut ok = identities.all_hold();
    let out = a.out.as_deref();
    run.say(
        out,
        format!(
            "n={} |S_n|={} |S_n+1|={} identities {}",
            g.n(),
            g.pattern_count(),
            g.cover_count(),
            if ok { "hold" } else { "FAIL" }
        ),
    );

    if a.audit {
        let report = match a.sample {
            Some(k) => lemma5_audit_sampled(&g, k, a.seed)?,
            None => lemma5_audit(&g, &limits).map_err(|e| match e {
                permcover_core::Error::ResourceLimit { .. } => Failure {
                    code: crate::EXIT_RESOURCE,
                    message: format!("{e}; pass --sample K for a sampled audit"),
                },
                e => e.into(),
            })?,
        };
        if report.sampled_patterns.is_some() {
            run.warn("sampled audit: maxima are lower bounds over the sampled patterns");
        }
        run.say(
            out,
            format!(
                "max_J={} max_C={} four-cover pairs={} adjacent-swap iff {}",
                report.max_j,
                report.max_c,
                report.four_cover_pair_count,
                if report.adjacent_swap_iff_holds { "holds" } else { "FAILS" }
            ),
        );
        for v in &report.violations {
            run.say(out, format!("violation: {v}"));
        }
        ok &= report.violations.is_empty();
        if let (Value::Object(obj), Value::Object(audit)) = (
            &mut payload,
            serde_json::to_value(&report).map_err(permcover_core::Error::from)?,
        ) {
            obj.extend(audit);
        }
    }
    run.emit_json(out, &payload)?;
    Ok(if ok { EXIT_OK } else { EXIT_VIOLATION })
}

fn threshold(run: &mut Run, a: &ThresholdArgs) -> Result<i32, Failure> {
    if a.steps == 0 {
        return Err(Failure::usage("--steps must be at least 1"));
    }
    if !(0.0 <= a.pmin && a.pmin <= a.pmax && a.pmax <= 1.0) {
        return Err(Failure::usage("need 0 ≤ pmin ≤ pmax ≤ 1"));
    }
    let g = build_graph(run, a.n)?;
    let grid: Vec<f64> = if a.steps == 1 {
        vec![a.pmin]
    } else {
        let h = (a.pmax - a.pmin) / (a.steps - 1) as f64;
        (0..a.steps).map(|i| if i + 1 == a.steps { a.pmax } else { a.pmin + h * i as f64 }).collect()
    };
    let report = threshold_sweep(&g, &grid, a.trials, a.seed)?;
    let out = a.out.as_deref();
    for r in &report.rows {
        run.say(
            out,
            format!("p={:.6} cover={:.4} [{:.4}, {:.4}] λ={:.4}", r.p, r.phat, r.ci_lo, r.ci_hi, r.lambda_exact),
        );
    }
    run.emit_csv(
        out,
        &report.rows,
        json!({ "n": report.n, "trials": report.trials, "master_seed": report.master_seed, "boundaries": report.boundaries }),
    )?;
    Ok(EXIT_OK)
}

fn gap(run: &mut Run, a: &GapArgs) -> Result<i32, Failure> {
    let g = build_graph(run, a.n)?;
    let p = match (a.k, a.lambda_target, a.p) {
        (Some(k), _, _) => gap_p_paper(a.n, k)?,
        (_, Some(t), _) => p_for_mean(a.n, t)?,
        (_, _, Some(p)) => p,
        _ => unreachable!("clap enforces exactly one source for p"),
    };
    let opts = GapOptions {
        k_nominal: a.k,
        lambda_target: a.lambda_target,
        limits: run.cli.global.limits(),
    };
    let report = gap_experiment(&g, p, a.trials, a.seed, &opts)?;
    for w in &report.warnings {
        run.warn(w.clone());
    }
    let out = a.out.as_deref();
    run.say(
        out,
        format!(
            "n={} p={:.6} λ={:.4} mean={:.4} var={:.4} TV={:.4}±{:.4} Stein-Chen={}",
            report.n,
            report.p,
            report.lambda_exact,
            report.empirical_mean,
            report.empirical_variance,
            report.tv_to_poisson,
            report.tv_standard_error,
            report.stein_chen_bound.map_or("n/a".to_string(), |b| format!("{b:.4}"))
        ),
    );
    run.emit_json(out, &report)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct BoundRow {
    n: usize,
    lambda: u32,
    pigeonhole_lower: u64,
    thm2_upper: f64,
    thm2_upper_n2: f64,
    thm3_upper: Option<f64>,
    best_known: Option<usize>,
    best_known_method: Option<Method>,
    best_known_status: Option<permcover_core::Status>,
}

fn bounds(run: &mut Run, a: &BoundsArgs) -> Result<i32, Failure> {
    if a.n_min == 0 || a.n_min > a.n_max {
        return Err(Failure::usage("need 1 ≤ n-min ≤ n-max"));
    }
    if a.n_max > permcover_core::perm::MAX_RANK_N {
        return Err(Failure::usage(format!("n-max is limited to {}", permcover_core::perm::MAX_RANK_N)));
    }
    if a.lambda == 0 {
        return Err(Failure::usage("--lambda must be at least 1"));
    }
    let cache = CertificateCache::new(&run.cli.global.cache_dir);
    let max_n = run.cli.global.limits().max_n;
    let mut rows = Vec::new();
    for n in a.n_min..=a.n_max {
        let t = BoundTable::new(n, a.lambda);
        let mut best = None;
        let has_entries = !cache.keys_for(n, a.lambda)?.is_empty();
        if n <= max_n && (has_entries || a.fill) && a.lambda <= (n * n + 1) as u32 {
            let g = build_graph(run, n)?;
            let (found, warnings) = cache.best_known(&g, a.lambda)?;
            for w in warnings {
                run.warn(w);
            }
            best = found;
            if best.is_none() && a.fill {
                let cert = exact_min_cover(&g, a.lambda, budget(a.budget_seconds)?)?;
                if let Err(e) = cache.store(&cert) {
                    run.warn(format!("could not store certificate in cache: {e}"));
                }
                best = Some(cert);
            }
        }
        rows.push(BoundRow {
            n,
            lambda: a.lambda,
            pigeonhole_lower: t.pigeonhole_lower,
            thm2_upper: t.thm2_upper,
            thm2_upper_n2: t.thm2_upper_n2,
            thm3_upper: t.thm3_upper,
            best_known: best.as_ref().map(|c| c.size()),
            best_known_method: best.as_ref().map(|c| c.method),
            best_known_status: best.as_ref().map(|c| c.status),
        });
    }
    let out = a.out.as_deref();
    for r in &rows {
        run.say(
            out,
            format!(
                "n={} lower={} thm2_upper={:.3} best_known={}",
                r.n,
                r.pigeonhole_lower,
                r.thm2_upper,
                r.best_known.map_or("-".to_string(), |s| s.to_string())
            ),
        );
    }
    run.emit_csv(out, &rows, json!({ "cache_dir": cache.dir() }))?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct LambdaRun {
    seed: u64,
    size: usize,
    initial_size: Option<u64>,
    verified: bool,
}

#[derive(Serialize)]
struct LambdaPayload {
    n: usize,
    lambda: u32,
    draws: u64,
    pigeonhole_lower: u64,
    thm3_upper: f64,
    runs: Vec<LambdaRun>,
    min_size: usize,
    max_size: usize,
    all_verified: bool,
    best: CertificateRecord,
}

fn lambda(run: &mut Run, a: &LambdaArgs) -> Result<i32, Failure> {
    if a.seeds == 0 {
        return Err(Failure::usage("--seeds must be at least 1"));
    }
    let g = build_graph(run, a.n)?;
    let draws = thm3_default_draws(a.n, a.lambda)?;
    let cache = CertificateCache::new(&run.cli.global.cache_dir);
    let mut runs = Vec::new();
    let mut best: Option<CoverCertificate> = None;
    for seed in a.seed..a.seed + a.seeds {
        let cert = lambda_cover(&g, a.lambda, seed)?;
        let verified = verify_cover(&g, &cert.selected, a.lambda)?.is_ok();
        if verified && !a.no_cache {
            if let Err(e) = cache.store(&cert) {
                run.warn(format!("could not store certificate in cache: {e}"));
            }
        }
        runs.push(LambdaRun { seed, size: cert.size(), initial_size: cert.initial_size, verified });
        if best.as_ref().is_none_or(|b| cert.size() < b.size()) {
            best = Some(cert);
        }
    }
    let best = best.expect("at least one seed");
    let payload = LambdaPayload {
        n: a.n,
        lambda: a.lambda,
        draws,
        pigeonhole_lower: pigeonhole_lower(a.n, a.lambda),
        thm3_upper: thm3_upper(a.n, a.lambda)?,
        min_size: runs.iter().map(|r| r.size).min().unwrap_or(0),
        max_size: runs.iter().map(|r| r.size).max().unwrap_or(0),
        all_verified: runs.iter().all(|r| r.verified),
        runs,
        best: best.to_record(),
    };
    let out = a.out.as_deref();
    run.say(
        out,
        format!(
            "n={} λ={} seeds={} sizes {}..{} lower={} thm3_upper={:.2} verified={}",
            payload.n,
            payload.lambda,
            a.seeds,
            payload.min_size,
            payload.max_size,
            payload.pigeonhole_lower,
            payload.thm3_upper,
            payload.all_verified
        ),
    );
    let ok = payload.all_verified;
    run.emit_json(out, &payload)?;
    Ok(if ok { EXIT_OK } else { EXIT_VIOLATION })
}
