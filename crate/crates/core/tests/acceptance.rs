//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Run with `cargo test --test acceptance`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use fracconv::analysis::{
    random_function, run_suite, verify_interpolation, Suite, SuiteReport, TrialConfig, DECAY_LAMBDA, DECAY_STEPS,
};
use fracconv::cli::{cmd_figure, ConvolveReport, RunConfig};
use fracconv::frames::{
    convolve_family, frame_perturbation_bounds, lambda_schedule, perturbation_r, riesz_bounds, symmetric_eigenvalues,
    trig_basis, GramMatrix, ScheduleKind, Side,
};
use fracconv::{FineGrid, GridFunction, NormSpec, Partition, RbOperator, ScaleVector};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn uniform(lo: f64, hi: f64, n: usize, m: usize) -> Arc<FineGrid> {
    FineGrid::new(Partition::uniform(lo, hi, n).unwrap(), m).unwrap()
}

fn clean(report: &SuiteReport, label: &str) -> Result<(), String> {
    let bad: Vec<String> =
        report.checks.iter().filter(|c| c.violations > 0).map(|c| format!("{}: {}", c.name, c.violations)).collect();
    ensure(bad.is_empty(), || format!("{label}: violations {}", bad.join(", ")))?;
    ensure(report.unconverged == 0, || format!("{label}: {} runs hit the iteration cap", report.unconverged))
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:.2?}, limit {limit:?}"))
}

fn constant_closed_form() -> Outcome {
    let start = Instant::now();
    let grid = uniform(0.0, 1.0, 2, 512);
    let op = RbOperator::new(grid.clone(), ScaleVector::constant(0.5, &grid).map_err(e)?).map_err(e)?;
    let conv = op.convolve(&GridFunction::constant(&grid, 1.0), &GridFunction::zeros(&grid)).map_err(e)?;
    let err = conv.samples.sup_distance(&GridFunction::constant(&grid, 2.0)).map_err(e)?;
    let elapsed = start.elapsed();
    ensure(err <= 1e-10, || format!("sup error {err:.3e}"))?;
    within(elapsed, Duration::from_secs(1))?;
    Ok(format!("sup error {err:.2e} in {elapsed:.2?}"))
}

fn idempotence_and_null_scale() -> Outcome {
    let tc = TrialConfig::default();
    let grid = tc.grid().map_err(e)?;
    for t in 0..20 {
        let mut rng = tc.rng(100, 0, t);
        let f = random_function(&mut rng, &grid, tc.max_degree).map_err(e)?;
        let b = random_function(&mut rng, &grid, tc.max_degree).map_err(e)?;
        let signed = fracconv::analysis::random_scale(&mut rng, &grid, 0.49).map_err(e)?;
        let op = RbOperator::new(grid.clone(), signed).map_err(e)?;
        let same = op.convolve(&f, &f).map_err(e)?.samples;
        ensure(same.values() == f.values(), || format!("trial {t}: f * f differs from f"))?;
        let zero = RbOperator::new(grid.clone(), ScaleVector::constant(0.0, &grid).map_err(e)?).map_err(e)?;
        let null = zero.convolve(&f, &b).map_err(e)?.samples;
        ensure(null.values() == f.values(), || format!("trial {t}: zero scale does not return f"))?;
    }
    Ok("20 trials, bitwise equal".into())
}

fn cross_method() -> Outcome {
    let start = Instant::now();
    let cfg = RunConfig::figure(1, 512).map_err(e)?;
    let conv_cfg = cfg.convolution().map_err(e)?;
    let conv = conv_cfg.fixed_point().map_err(e)?;
    let points = conv.samples.grid().points().to_vec();
    let pushed = conv_cfg.pushforward_at(&points, 12).map_err(e)?;
    let lambda = conv_cfg.lambda();
    let gap = conv_cfg.seed().sup_distance(conv_cfg.base()).map_err(e)?;
    let tol = cfg.tol + lambda.powi(12) / (1.0 - lambda) * gap;
    let dev = conv.samples.values().iter().zip(&pushed).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let elapsed = start.elapsed();
    ensure(dev <= tol, || format!("max deviation {dev:.3e} > {tol:.3e}"))?;
    within(elapsed, Duration::from_secs(10))?;
    Ok(format!("{} points, max deviation {dev:.2e} <= {tol:.2e}, {elapsed:.2?}", points.len()))
}

fn contraction() -> Outcome {
    let mut worst = 0.0f64;
    for p in [1.0, 2.0, f64::INFINITY, 0.5] {
        let tc = TrialConfig::default().with_p(p).map_err(e)?;
        let r = run_suite(Suite::Contraction, &tc).map_err(e)?;
        clean(&r, &format!("p = {p}"))?;
        let excess = r.worst_relative_excess();
        ensure(excess <= 1e-6, || format!("p = {p}: relative excess {excess:.3e}"))?;
        worst = worst.max(excess);
    }
    let fig = RunConfig::figure(1, 512).map_err(e)?.convolution().map_err(e)?;
    let g = fig.fixed_point().map_err(e)?.samples;
    let l2 = NormSpec::Norm(2.0);
    let ratio = l2.distance(&g, fig.seed()).map_err(e)? / l2.distance(fig.seed(), fig.base()).map_err(e)?;
    ensure(ratio <= 0.6, || format!("figure 1 ratio {ratio:.4}"))?;
    Ok(format!("4 x 300 trials, worst relative excess {worst:.1e}, figure 1 ratio {ratio:.4}"))
}

fn lipschitz() -> Outcome {
    let mut trials = 0;
    for p in [1.0, 2.0, f64::INFINITY, 0.5] {
        let r = run_suite(Suite::Lipschitz, &TrialConfig::default().with_p(p).map_err(e)?).map_err(e)?;
        clean(&r, &format!("p = {p}"))?;
        trials += r.checks.iter().map(|c| c.trials).sum::<usize>();
    }
    Ok(format!("{trials} comparisons, 0 violations"))
}

fn partial_null() -> Outcome {
    let mut names = Vec::new();
    for p in [2.0, f64::INFINITY] {
        let r = run_suite(Suite::PartialNull, &TrialConfig::default().with_p(p).map_err(e)?).map_err(e)?;
        clean(&r, &format!("p = {p}"))?;
        names = r.checks.iter().map(|c| c.name.clone()).collect();
        for needed in ["left-null-equality", "left-null-decay"] {
            ensure(r.check(needed).is_some_and(|c| c.trials > 0), || format!("p = {p}: no '{needed}' check"))?;
        }
    }

    let grid = uniform(0.0, 1.0, 4, 128);
    let op = RbOperator::new(grid.clone(), ScaleVector::constant(DECAY_LAMBDA, &grid).map_err(e)?).map_err(e)?;
    let b = GridFunction::from_fn(&grid, |x| (5.0 * x).sin() + x * x).map_err(e)?;
    let sup = NormSpec::Sup;
    let n0 = sup.size(&b);
    let c = DECAY_LAMBDA / (1.0 - DECAY_LAMBDA);
    for (k, g) in op.iterate_left_null(&b, DECAY_STEPS).map_err(e)?.iter().enumerate().skip(1) {
        let (nk, env) = (sup.size(g), c.powi(k as i32) * n0);
        ensure(nk <= env + 10.0 * op.tol() * n0 * k as f64, || format!("iterate {k}: {nk:.3e} above {env:.3e}"))?;
    }
    Ok(format!("{} checks at p = 2 and p = inf, decay under (1/3)^k for k <= {DECAY_STEPS}", names.len()))
}

fn sets() -> Outcome {
    for p in [1.0, 2.0, f64::INFINITY] {
        let tc = TrialConfig { trials: 20, ..TrialConfig::default().with_p(p).map_err(e)? };
        clean(&run_suite(Suite::Sets, &tc).map_err(e)?, &format!("sets p = {p}"))?;
        clean(&run_suite(Suite::Membership, &tc).map_err(e)?, &format!("membership p = {p}"))?;
    }
    Ok("20 trials of 5-element sets at p = 1, 2, inf; membership holds".into())
}

fn interpolation() -> Outcome {
    let ys = [0.5, -1.0, 2.0, 0.25, 1.25, -0.75, 1.0];
    let data: Vec<(f64, f64)> = ys.iter().enumerate().map(|(n, &y)| (n as f64 * 0.5, y)).collect();
    let tc = TrialConfig { interval: [0.0, 3.0], nodes: 6, ..TrialConfig::default() };
    let r = verify_interpolation(&data, &tc).map_err(e)?;
    clean(&r, "fixed data")?;
    for needed in ["node-values", "fixed-point-nodes", "endpoint-mismatch"] {
        ensure(r.check(needed).is_some_and(|c| c.trials > 0), || format!("no '{needed}' check"))?;
    }
    clean(&run_suite(Suite::Interpolation, &tc).map_err(e)?, "random data")?;
    Ok(format!("data on [0, 3] with N = 6, {} checks clean", r.checks.len()))
}

fn spectral_envelopes() -> Outcome {
    let grid = uniform(0.0, 1.0, 4, fracconv::cli::FAMILY_RESOLUTION);
    let fam = trig_basis(16, &grid).map_err(e)?;
    let spectrum = |side: Side, alpha: f64| -> Result<(f64, f64), String> {
        let op = RbOperator::new(grid.clone(), ScaleVector::constant(alpha, &grid).map_err(e)?).map_err(e)?;
        let rb = riesz_bounds(&convolve_family(&fam, side, &op, None).map_err(e)?).map_err(e)?;
        Ok((rb.lambda_min, rb.lambda_max))
    };
    let (lo, hi) = spectrum(Side::LeftNull, 0.3)?;
    ensure(lo >= 0.0532 - 1e-3 && hi <= 0.1837 + 1e-3, || format!("left-null spectrum [{lo:.6}, {hi:.6}]"))?;
    let (rlo, rhi) = spectrum(Side::RightNull, 0.2)?;
    ensure(rlo >= 1.0 / 1.44 - 1e-3 && rhi <= 1.0 / 0.64 + 1e-3, || format!("right-null spectrum [{rlo:.6}, {rhi:.6}]"))?;

    for (a, b, c) in [(2.0, 1.0, 2.0), (1.0, 0.0, -3.0), (0.3, -0.7, 1.9), (5.0, 2.5, 5.0)] {
        let m = GramMatrix::from_rows(&[vec![a, b], vec![b, c]]).map_err(e)?;
        let got = symmetric_eigenvalues(&m).map_err(e)?;
        let (mid, rad) = ((a + c) / 2.0, (((a - c) / 2.0f64).powi(2) + b * b).sqrt());
        for (g, w) in got.iter().zip([mid - rad, mid + rad]) {
            ensure((g - w).abs() <= 1e-12, || format!("[[{a}, {b}], [{b}, {c}]]: {got:?}"))?;
        }
    }
    Ok(format!("left-null [{lo:.4}, {hi:.4}], right-null [{rlo:.4}, {rhi:.4}], 2x2 cases exact"))
}

fn frame_perturbation() -> Outcome {
    let fr = frame_perturbation_bounds(1.0, 1.0, 0.25).map_err(e)?;
    ensure(fr.a_prime == 0.25 && fr.b_prime == 2.25, || format!("bounds ({}, {})", fr.a_prime, fr.b_prime))?;

    let grid = uniform(0.0, 1.0, 4, fracconv::cli::FAMILY_RESOLUTION);
    let schedule = lambda_schedule(ScheduleKind::OverM(0.3), 64).map_err(e)?;
    let template = RbOperator::new(grid.clone(), ScaleVector::constant(0.0, &grid).map_err(e)?).map_err(e)?;
    let pert = perturbation_r(&trig_basis(64, &grid).map_err(e)?, &schedule, &template).map_err(e)?;
    let report = frame_perturbation_bounds(1.0, 1.0, pert.r).map_err(e)?;
    ensure(pert.empirical <= pert.r, || format!("empirical {:.6} > R {:.6}", pert.empirical, pert.r))?;
    ensure(report.feasible && pert.r < 1.0, || format!("R = {:.6} infeasible", pert.r))?;
    Ok(format!("(0.25, 2.25) exact; R = {:.4}, empirical {:.4}, feasible", pert.r, pert.empirical))
}

fn figures() -> Outcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(e)?;
    let out = cmd_figure(dir.path(), fracconv::function::DEFAULT_RESOLUTION, None).map_err(e)?;
    ensure(out.status == 0, || format!("status {}", out.status))?;
    let mut worst = 0.0f64;
    for k in 1..=3 {
        let csv = dir.path().join(format!("figure{k}.csv"));
        let (xs, _) = fracconv::io::read_samples_file(&csv).map_err(e)?;
        ensure(!xs.is_empty(), || format!("figure {k}: no samples"))?;
        let text = std::fs::read_to_string(fracconv::io::sidecar_path(&csv)).map_err(e)?;
        let report: ConvolveReport = serde_json::from_str(&text).map_err(e)?;
        let tol = report.config.tol;
        ensure(report.self_residual <= 2.0 * tol, || format!("figure {k}: residual {:.3e}", report.self_residual))?;
        worst = worst.max(report.self_residual);
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(30))?;
    Ok(format!("3 figures, worst self residual {worst:.2e}, {elapsed:.2?}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("constant closed form", constant_closed_form),
        ("idempotence and null scale", idempotence_and_null_scale),
        ("cross-method oracle", cross_method),
        ("contraction bounds", contraction),
        ("base and seed Lipschitz bounds", lipschitz),
        ("partial null operators", partial_null),
        ("convolution sets", sets),
        ("interpolation", interpolation),
        ("spectral envelopes", spectral_envelopes),
        ("frame perturbation", frame_perturbation),
        ("figure reproduction", figures),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match result {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
