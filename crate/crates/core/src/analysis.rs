//! Randomized and configured checks of the inequalities satisfied by
//! fractal convolutions, partial convolutions with the null function and
//! convolution sets.
//!
//! Every check compares an attained value against a bound. A violation is
//! an excess beyond `10 tol_engine + q`. The operator reads `g` only at the
//! pullback points, so a bound that is exact for the continuous norms holds
//! on the grid once the fine-rule norms of some inputs are replaced by
//! their pullback-rule values (see [`NormSpec::coarse_size`]); `q` collects
//! those replacements, weighted by the factors the bound carries. For
//! `p = ∞` the pullback max never exceeds the grid max and `q` vanishes.

use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{IterationLog, RbOperator, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::error::{invalid, Error, Result};
use crate::function::{shared, FineGrid, GridFunction, ScaleVector, SharedFn};
use crate::metrics::{directed_hausdorff, hausdorff, set_delta, FunctionSet, NormSpec};
use crate::partition::Partition;

/// Ensemble settings shared by all suites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub seed: u64,
    pub trials: usize,
    pub norm: NormSpec,
    pub interval: [f64; 2],
    pub nodes: usize,
    pub resolution: usize,
    pub lambdas: Vec<f64>,
    /// highest frequency of the random trigonometric polynomials
    pub max_degree: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for TrialConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            trials: 100,
            norm: NormSpec::Norm(2.0),
            interval: [0.0, 1.0],
            nodes: 4,
            resolution: 128,
            lambdas: vec![0.1, 0.375, 0.49],
            max_degree: 8,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

impl TrialConfig {
    pub fn with_p(mut self, p: f64) -> Result<Self> {
        self.norm = NormSpec::new(p)?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(invalid("ensemble size must be at least 1"));
        }
        if self.lambdas.is_empty() {
            return Err(invalid("need at least one scale bound"));
        }
        if let Some(&l) = self.lambdas.iter().find(|l| !(0.0..1.0).contains(*l)) {
            return Err(invalid(format!("scale bound {l} is outside [0, 1)")));
        }
        if !(self.tol > 0.0) {
            return Err(invalid(format!("tolerance must be positive, got {}", self.tol)));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Arc<FineGrid>> {
        self.validate()?;
        FineGrid::new(Partition::uniform(self.interval[0], self.interval[1], self.nodes)?, self.resolution)
    }

    /// Independent stream per `(suite, lambda index, trial)`.
    pub fn rng(&self, suite: u64, lambda_index: usize, trial: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream((suite << 48) | ((lambda_index as u64) << 32) | trial as u64);
        rng
    }

    fn operator(&self, grid: &Arc<FineGrid>, scale: ScaleVector) -> Result<RbOperator> {
        RbOperator::with_tolerance(grid.clone(), scale, self.tol, self.max_iter)
    }
}

/// Trigonometric polynomial of random degree `<= max_degree` with
/// coefficients uniform in `[-1, 1]`.
pub fn random_trig(rng: &mut impl Rng, grid: &Arc<FineGrid>, max_degree: usize) -> Result<GridFunction> {
    let degree = rng.random_range(0..=max_degree);
    let a0: f64 = rng.random_range(-1.0..1.0);
    let coef: Vec<(f64, f64)> =
        (0..degree).map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let (lo, len) = (grid.partition().lo(), grid.partition().length());
    GridFunction::from_fn(grid, |x| {
        let u = 2.0 * std::f64::consts::PI * (x - lo) / len;
        coef.iter().enumerate().fold(a0, |acc, (k, (a, b))| {
            let w = (k + 1) as f64 * u;
            acc + a * w.cos() + b * w.sin()
        })
    })
}

/// Piecewise-linear function through `N + 1` knots: both endpoints plus
/// `N - 1` uniform interior abscissae, values uniform in `[-1, 1]`.
pub fn random_piecewise_linear(rng: &mut impl Rng, grid: &Arc<FineGrid>) -> Result<GridFunction> {
    let part = grid.partition();
    let n = part.count();
    let mut xs: Vec<f64> = (0..n.saturating_sub(1)).map(|_| rng.random_range(part.lo()..part.hi())).collect();
    xs.push(part.lo());
    xs.push(part.hi());
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let ys: Vec<f64> = xs.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
    GridFunction::from_fn(grid, |x| linear_through(&xs, &ys, x))
}

fn linear_through(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let i = xs.partition_point(|&k| k <= x).clamp(1, xs.len() - 1);
    let w = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    ys[i - 1] + w * (ys[i] - ys[i - 1])
}

pub fn random_function(rng: &mut impl Rng, grid: &Arc<FineGrid>, max_degree: usize) -> Result<GridFunction> {
    if rng.random_bool(0.5) {
        random_trig(rng, grid, max_degree)
    } else {
        random_piecewise_linear(rng, grid)
    }
}

/// `alpha_n ≡ ±lambda` with independent signs.
pub fn random_sign_scale(rng: &mut impl Rng, grid: &FineGrid, lambda: f64) -> Result<ScaleVector> {
    let values: Vec<f64> = (0..grid.partition().count())
        .map(|_| if rng.random_bool(0.5) { lambda } else { -lambda })
        .collect();
    ScaleVector::constants(&values, grid)
}

/// Constant scale functions with `|alpha_n| <= lambda`, one of them at
/// the bound.
pub fn random_constant_scale(rng: &mut impl Rng, grid: &FineGrid, lambda: f64) -> Result<ScaleVector> {
    let n = grid.partition().count();
    let hit = rng.random_range(0..n);
    let values: Vec<f64> = (0..n)
        .map(|k| if k == hit { lambda } else { lambda * rng.random_range(-1.0..1.0) })
        .collect();
    ScaleVector::constants(&values, grid)
}

/// Either `±lambda` constants or `lambda cos(w x + phi)` per subinterval.
pub fn random_scale(rng: &mut impl Rng, grid: &FineGrid, lambda: f64) -> Result<ScaleVector> {
    if rng.random_bool(0.5) {
        return random_sign_scale(rng, grid, lambda);
    }
    let len = grid.partition().length();
    let alphas: Vec<SharedFn> = (0..grid.partition().count())
        .map(|_| {
            let w = rng.random_range(0.0..4.0 * std::f64::consts::PI / len);
            let phi = rng.random_range(0.0..2.0 * std::f64::consts::PI);
            shared(move |x| lambda * (w * x + phi).cos())
        })
        .collect();
    ScaleVector::new(alphas, grid)
}

/// Outcome of one named inequality over an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub trials: usize,
    /// least `bound - attained` seen
    pub worst_slack: Option<f64>,
    /// largest `(attained - bound) / max(|attained|, |bound|)`
    pub worst_relative_excess: Option<f64>,
    pub violations: usize,
    /// largest tolerance applied
    pub tolerance: f64,
}

impl CheckReport {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            trials: 0,
            worst_slack: None,
            worst_relative_excess: None,
            violations: 0,
            tolerance: 0.0,
        }
    }

    /// `attained <= bound` up to `tol`.
    pub fn record(&mut self, attained: f64, bound: f64, tol: f64) {
        let scale = attained.abs().max(bound.abs());
        let rel = if scale == 0.0 { 0.0 } else { (attained - bound) / scale };
        self.push(bound - attained, rel, tol, !(attained <= bound + tol));
    }

    /// `a == b` up to `tol`.
    pub fn record_equal(&mut self, a: f64, b: f64, tol: f64) {
        let gap = (a - b).abs();
        let scale = a.abs().max(b.abs());
        let rel = if scale == 0.0 { 0.0 } else { gap / scale };
        self.push(-gap, rel, tol, !(gap <= tol));
    }

    fn push(&mut self, slack: f64, rel: f64, tol: f64, violated: bool) {
        self.trials += 1;
        self.worst_slack = Some(self.worst_slack.map_or(slack, |w| w.min(slack)));
        self.worst_relative_excess = Some(self.worst_relative_excess.map_or(rel, |w| w.max(rel)));
        self.tolerance = self.tolerance.max(tol);
        if violated {
            self.violations += 1;
        }
    }

    pub fn merge(&mut self, other: &CheckReport) {
        let min = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, y) => x.or(y),
        };
        let max = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (Some(x), Some(y)) => Some(x.max(y)),
            (x, y) => x.or(y),
        };
        self.trials += other.trials;
        self.worst_slack = min(self.worst_slack, other.worst_slack);
        self.worst_relative_excess = max(self.worst_relative_excess, other.worst_relative_excess);
        self.violations += other.violations;
        self.tolerance = self.tolerance.max(other.tolerance);
    }
}

/// A named series reported alongside the checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub config: TrialConfig,
    pub checks: Vec<CheckReport>,
    pub series: Vec<Series>,
    /// fixed-point runs that hit the iteration cap
    pub unconverged: usize,
}

impl SuiteReport {
    pub fn new(suite: impl Into<String>, config: &TrialConfig) -> Self {
        Self { suite: suite.into(), config: config.clone(), checks: Vec::new(), series: Vec::new(), unconverged: 0 }
    }

    pub fn check(&self, name: &str) -> Option<&CheckReport> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn entry(&mut self, name: &str) -> &mut CheckReport {
        let i = match self.checks.iter().position(|c| c.name == name) {
            Some(i) => i,
            None => {
                self.checks.push(CheckReport::new(name));
                self.checks.len() - 1
            }
        };
        &mut self.checks[i]
    }

    pub fn violations(&self) -> usize {
        self.checks.iter().map(|c| c.violations).sum()
    }

    pub fn passed(&self) -> bool {
        self.violations() == 0
    }

    pub fn worst_relative_excess(&self) -> f64 {
        self.checks.iter().filter_map(|c| c.worst_relative_excess).fold(f64::NEG_INFINITY, f64::max)
    }

    fn note(&mut self, log: &IterationLog) {
        if !log.converged {
            self.unconverged += 1;
        }
    }

    /// Check-wise union. Associative; order only affects listing order.
    pub fn merge(&mut self, other: SuiteReport) {
        if self.suite != other.suite {
            self.suite = format!("{}+{}", self.suite, other.suite);
        }
        for c in &other.checks {
            self.entry(&c.name).merge(c);
        }
        self.series.extend(other.series);
        self.unconverged += other.unconverged;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Contraction,
    Lipschitz,
    PartialNull,
    Sets,
    Interpolation,
    Membership,
    LambdaStudy,
    All,
}

impl Suite {
    pub const EACH: [Suite; 7] = [
        Suite::Contraction,
        Suite::Lipschitz,
        Suite::PartialNull,
        Suite::Sets,
        Suite::Interpolation,
        Suite::Membership,
        Suite::LambdaStudy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Contraction => "contraction",
            Suite::Lipschitz => "lipschitz",
            Suite::PartialNull => "partial-null",
            Suite::Sets => "sets",
            Suite::Interpolation => "interpolation",
            Suite::Membership => "membership",
            Suite::LambdaStudy => "lambda-study",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::EACH
            .into_iter()
            .chain([Suite::All])
            .find(|suite| suite.name() == s)
            .ok_or_else(|| invalid(format!("unknown suite '{s}'")))
    }
}

pub fn run_suite(suite: Suite, tc: &TrialConfig) -> Result<SuiteReport> {
    match suite {
        Suite::Contraction => verify_contraction_bounds(tc),
        Suite::Lipschitz => verify_lipschitz(tc),
        Suite::PartialNull => verify_partial_null(tc),
        Suite::Sets => verify_sets(tc),
        Suite::Interpolation => verify_interpolation_random(tc),
        Suite::Membership => verify_membership(tc),
        Suite::LambdaStudy => verify_lambda_study(tc),
        Suite::All => {
            let mut total = SuiteReport::new("all", tc);
            for s in Suite::EACH {
                let mut r = run_suite(s, tc)?;
                for c in &mut r.checks {
                    c.name = format!("{}/{}", s.name(), c.name);
                }
                total.checks.extend(r.checks);
                total.series.extend(r.series);
                total.unconverged += r.unconverged;
            }
            Ok(total)
        }
    }
}

/// Tolerance policy for one norm.
#[derive(Debug, Clone, Copy)]
struct Margin {
    spec: NormSpec,
    floor: f64,
}

impl Margin {
    fn new(spec: NormSpec, tol_engine: f64) -> Self {
        Self { spec, floor: 10.0 * tol_engine }
    }

    /// `10 tol_engine + q`
    fn tol(&self, q: f64) -> f64 {
        self.floor + q
    }

    /// How far the pullback-resolution rule exceeds the fine rule on `u`.
    fn over(&self, u: &GridFunction) -> f64 {
        (self.spec.coarse_size(u) - self.spec.size(u)).max(0.0)
    }

    /// How far the fine rule exceeds the pullback-resolution rule on `u`.
    fn under(&self, u: &GridFunction) -> f64 {
        (self.spec.size(u) - self.spec.coarse_size(u)).max(0.0)
    }

    fn size(&self, g: &GridFunction) -> f64 {
        self.spec.size(g)
    }
}

/// `||f*b - f|| <= lambda/(1-lambda) ||f - b||` (`lambda^p` for `p < 1`).
pub fn verify_contraction_bounds(tc: &TrialConfig) -> Result<SuiteReport> {
    let grid = tc.grid()?;
    let m = Margin::new(tc.norm, tc.tol);
    let mut report = SuiteReport::new("contraction", tc);
    for (li, &lambda) in tc.lambdas.iter().enumerate() {
        for t in 0..tc.trials {
            let mut rng = tc.rng(1, li, t);
            let f = random_function(&mut rng, &grid, tc.max_degree)?;
            let b = if t == 0 { f.clone() } else { random_function(&mut rng, &grid, tc.max_degree)? };
            let op = tc.operator(&grid, random_scale(&mut rng, &grid, lambda)?)?;
            let conv = op.convolve(&f, &b)?;
            report.note(&conv.log);
            let le = tc.norm.effective_lambda(op.lambda());
            let k = le / (1.0 - le);
            let d = conv.samples.sub(&f)?;
            let e = f.sub(&b)?;
            report.entry("contraction").record(m.size(&d), k * m.size(&e), m.tol(k * (m.over(&d) + m.over(&e))));
        }
    }
    Ok(report)
}

/// Lipschitz dependence on the seed, on the base, and on both.
pub fn verify_lipschitz(tc: &TrialConfig) -> Result<SuiteReport> {
    let grid = tc.grid()?;
    let m = Margin::new(tc.norm, tc.tol);
    let mut report = SuiteReport::new("lipschitz", tc);
    for (li, &lambda) in tc.lambdas.iter().enumerate() {
        for t in 0..tc.trials {
            let mut rng = tc.rng(2, li, t);
            let f = random_function(&mut rng, &grid, tc.max_degree)?;
            let f1 = if t == 0 { f.clone() } else { random_function(&mut rng, &grid, tc.max_degree)? };
            let b = random_function(&mut rng, &grid, tc.max_degree)?;
            let b1 = if t == 1 { b.clone() } else { random_function(&mut rng, &grid, tc.max_degree)? };
            let op = tc.operator(&grid, random_scale(&mut rng, &grid, lambda)?)?;
            let mut run = |x: &GridFunction, y: &GridFunction| -> Result<GridFunction> {
                let c = op.convolve(x, y)?;
                report.note(&c.log);
                Ok(c.samples)
            };
            let g = run(&f, &b)?;
            let g_seed = run(&f1, &b)?;
            let g_base = run(&f, &b1)?;
            let g_both = run(&f1, &b1)?;
            let le = tc.norm.effective_lambda(op.lambda());
            let inv = 1.0 / (1.0 - le);
            let df = f.sub(&f1)?;
            let db = b.sub(&b1)?;

            let d = g.sub(&g_seed)?;
            report.entry("seed").record(m.size(&d), inv * m.size(&df), m.tol(le * inv * m.over(&d)));
            let d = g.sub(&g_base)?;
            report.entry("base").record(m.size(&d), le * inv * m.size(&db), m.tol(le * inv * (m.over(&d) + m.over(&db))));
            let d = g.sub(&g_both)?;
            report.entry("combined").record(
                m.size(&d),
                inv * (m.size(&df) + le * m.size(&db)),
                m.tol(le * inv * (m.over(&d) + m.over(&db))),
            );
        }
    }
    Ok(report)
}

/// Scale bound of the left-null iteration decay check.
pub const DECAY_LAMBDA: f64 = 0.25;
/// Number of left-null iterations in the decay check.
pub const DECAY_STEPS: usize = 20;

/// Bounds on `0*b` and `f*0`, the equality for `alpha_n ≡ ±lambda`, the
/// lower bounds behind injectivity and closed range, and the decay of
/// iterated left-null convolutions.
pub fn verify_partial_null(tc: &TrialConfig) -> Result<SuiteReport> {
    let grid = tc.grid()?;
    let m = Margin::new(tc.norm, tc.tol);
    let mut report = SuiteReport::new("partial-null", tc);
    for (li, &lambda) in tc.lambdas.iter().enumerate() {
        for t in 0..tc.trials {
            let mut rng = tc.rng(3, li, t);
            let f = random_function(&mut rng, &grid, tc.max_degree)?;
            let b = random_function(&mut rng, &grid, tc.max_degree)?;
            let general = tc.operator(&grid, random_scale(&mut rng, &grid, lambda)?)?;
            partial_null_general(&general, &f, &b, &m, &mut report)?;
            if lambda > 0.0 {
                let signed = tc.operator(&grid, random_sign_scale(&mut rng, &grid, lambda)?)?;
                partial_null_signed(&signed, &b, &m, &mut report)?;
            }
            let constant = tc.operator(&grid, random_constant_scale(&mut rng, &grid, lambda)?)?;
            partial_null_constant(&constant, &b, &m, &mut report)?;
        }
    }
    left_null_decay(tc, &grid, &m, &mut report)?;
    Ok(report)
}

fn partial_null_general(
    op: &RbOperator,
    f: &GridFunction,
    b: &GridFunction,
    m: &Margin,
    report: &mut SuiteReport,
) -> Result<()> {
    let le = m.spec.effective_lambda(op.lambda());
    let inv = 1.0 / (1.0 - le);
    let left = op.left_null(b)?;
    let right = op.right_null(f)?;
    report.note(&left.log);
    report.note(&right.log);
    let (l, r) = (&left.samples, &right.samples);
    let l_minus = l.sub(b)?;
    let r_minus = r.sub(f)?;
    let (nb, nf, nl, nr) = (m.size(b), m.size(f), m.size(l), m.size(r));

    report.entry("left-null-norm").record(nl, le * inv * nb, m.tol(le * inv * (m.over(l) + m.over(b))));
    report.entry("left-null-minus-identity").record(m.size(&l_minus), inv * nb, m.tol(le * inv * m.over(&l_minus)));
    report.entry("right-null-norm").record(nr, inv * nf, m.tol(le * inv * m.over(r)));
    report.entry("right-null-minus-identity").record(m.size(&r_minus), le * inv * nf, m.tol(le * inv * (m.over(&r_minus) + m.over(f))));
    report.entry("right-null-self").record(m.size(&r_minus), le * nr, m.tol(le * m.over(r)));
    report.entry("right-null-lower").record(nf, (1.0 + le) * nr, m.tol(le * m.over(r)));
    Ok(())
}

fn partial_null_signed(op: &RbOperator, b: &GridFunction, m: &Margin, report: &mut SuiteReport) -> Result<()> {
    let le = m.spec.effective_lambda(op.lambda());
    let left = op.left_null(b)?;
    report.note(&left.log);
    let l = &left.samples;
    let l_minus = l.sub(b)?;
    let (nb, nl) = (m.size(b), m.size(l));
    let gap = (m.spec.size(&l_minus) - m.spec.coarse_size(&l_minus)).abs();
    report.entry("left-null-equality").record_equal(nl, le * m.size(&l_minus), m.tol(le * gap));
    // the same identity with the right side on the rule the maps pull back to
    report.entry("left-null-equality-pullback").record_equal(nl, le * m.spec.coarse_size(&l_minus), m.floor);
    report.entry("left-null-lower").record(nb, (1.0 + le) / le * nl, m.tol(m.under(b) + m.over(l)));
    if nb > 0.0 {
        report.entry("left-null-injective").record(m.floor, nl, 0.0);
    }
    Ok(())
}

fn partial_null_constant(op: &RbOperator, b: &GridFunction, m: &Margin, report: &mut SuiteReport) -> Result<()> {
    let le = m.spec.effective_lambda(op.lambda());
    let left = op.left_null(b)?;
    report.note(&left.log);
    let l = &left.samples;
    let l_minus = l.sub(b)?;
    let nd = m.size(&l_minus);
    report.entry("left-null-constant").record(m.size(l), le * nd, m.tol(le * m.over(&l_minus)));
    report.entry("difference-lower").record(m.size(b), (1.0 + le) * nd, m.tol(le * m.over(&l_minus)));
    Ok(())
}

/// `||0*(0*(...b))|| <= (lambda/(1-lambda))^k ||b||` with `lambda = 1/4`.
/// Trial 0 uses a constant `b` and `alpha ≡ 1/4`, where every step is an
/// equality.
fn left_null_decay(tc: &TrialConfig, grid: &Arc<FineGrid>, m: &Margin, report: &mut SuiteReport) -> Result<()> {
    let le = m.spec.effective_lambda(DECAY_LAMBDA);
    let c = le / (1.0 - le);
    for t in 0..tc.trials {
        let mut rng = tc.rng(4, 0, t);
        let (b, scale) = if t == 0 {
            (GridFunction::constant(grid, 1.0), ScaleVector::constant(DECAY_LAMBDA, grid)?)
        } else {
            (random_function(&mut rng, grid, tc.max_degree)?, random_sign_scale(&mut rng, grid, DECAY_LAMBDA)?)
        };
        let op = tc.operator(grid, scale)?;
        let iterates = op.iterate_left_null(&b, DECAY_STEPS)?;
        let n0 = m.size(&b);
        let mut carried = 0.0;
        let mut ratios = Vec::with_capacity(DECAY_STEPS);
        for k in 1..=DECAY_STEPS {
            let (prev, cur) = (&iterates[k - 1], &iterates[k]);
            let step = (10.0 * tc.tol * prev.sup_norm()).max(c * (m.over(prev) + m.over(cur)));
            carried = c * carried + step;
            let nk = m.size(cur);
            report.entry("left-null-decay").record(nk, c.powi(k as i32) * n0, carried);
            if t == 0 {
                ratios.push(nk / n0);
            }
        }
        if t == 0 {
            report.series.push(Series { name: "left-null-decay/constant".into(), values: ratios });
        }
    }
    Ok(())
}

/// `{f *_T b : f in F}`
pub fn convolve_set_seed(op: &RbOperator, set: &FunctionSet, b: &GridFunction) -> Result<FunctionSet> {
    FunctionSet::new(set.members().iter().map(|f| op.convolve(f, b).map(|c| c.samples)).collect::<Result<_>>()?)
}

/// `{f *_T b : b in B}`
pub fn convolve_set_base(op: &RbOperator, f: &GridFunction, set: &FunctionSet) -> Result<FunctionSet> {
    FunctionSet::new(set.members().iter().map(|b| op.convolve(f, b).map(|c| c.samples)).collect::<Result<_>>()?)
}

/// `{f *_T b : f in F, b in B}`
pub fn convolve_sets(op: &RbOperator, seeds: &FunctionSet, bases: &FunctionSet) -> Result<FunctionSet> {
    let mut out = Vec::with_capacity(seeds.len() * bases.len());
    for f in seeds.members() {
        for b in bases.members() {
            out.push(op.convolve(f, b)?.samples);
        }
    }
    FunctionSet::new(out)
}

/// Inputs of the set inequalities: `F, F', B, B'` and single functions
/// `f, f', b, b'`.
#[derive(Debug, Clone)]
pub struct SetScenario {
    pub seeds: FunctionSet,
    pub seeds_alt: FunctionSet,
    pub bases: FunctionSet,
    pub bases_alt: FunctionSet,
    pub f: GridFunction,
    pub f_alt: GridFunction,
    pub b: GridFunction,
    pub b_alt: GridFunction,
}

/// The seven Hausdorff bounds and four `δ` bounds for one scenario.
pub fn verify_set_inequalities(op: &RbOperator, s: &SetScenario, spec: NormSpec, report: &mut SuiteReport) -> Result<()> {
    let m = Margin::new(spec, op.tol());
    let le = spec.effective_lambda(op.lambda());
    let k = le / (1.0 - le);
    let inv = 1.0 / (1.0 - le);
    let (mf, mf1, mb, mb1) = (s.seeds.bound(&spec), s.seeds_alt.bound(&spec), s.bases.bound(&spec), s.bases_alt.bound(&spec));

    let fb = convolve_set_seed(op, &s.seeds, &s.b)?;
    let fb1 = convolve_set_seed(op, &s.seeds, &s.b_alt)?;
    let f_b = convolve_set_base(op, &s.f, &s.bases)?;
    let f1_b = convolve_set_base(op, &s.f_alt, &s.bases)?;
    let ff_bb = convolve_sets(op, &s.seeds, &s.bases)?;
    let ff1_bb = convolve_sets(op, &s.seeds_alt, &s.bases)?;
    let ff_bb1 = convolve_sets(op, &s.seeds, &s.bases_alt)?;
    let ff1_bb1 = convolve_sets(op, &s.seeds_alt, &s.bases_alt)?;

    let quad = [&s.seeds, &s.seeds_alt, &s.bases, &s.bases_alt, &fb, &fb1, &f_b, &f1_b, &ff_bb, &ff1_bb, &ff_bb1, &ff1_bb1]
        .iter()
        .flat_map(|set| set.members())
        .chain([&s.f, &s.f_alt, &s.b, &s.b_alt])
        .map(|g| m.over(g))
        .fold(0.0, f64::max);
    let tol = |factor: f64| m.tol(4.0 * factor * quad);

    let (nb, nf) = (m.size(&s.b), m.size(&s.f));
    let checks: [(&str, f64, f64, f64); 7] = [
        ("hausdorff-seed-set", hausdorff(&s.seeds, &fb, &spec)?, k * (mf + nb), k),
        ("hausdorff-base-set", hausdorff(&s.bases, &f_b, &spec)?, inv * (mb + nf), inv),
        ("hausdorff-seeds-product", hausdorff(&s.seeds, &ff_bb, &spec)?, k * (mf + mb), k),
        ("hausdorff-bases-product", hausdorff(&s.bases, &ff_bb, &spec)?, inv * (mb + mf), inv),
        ("hausdorff-seed-change", hausdorff(&ff_bb, &ff1_bb, &spec)?, inv * (mf + mf1), inv),
        ("hausdorff-base-change", hausdorff(&ff_bb, &ff_bb1, &spec)?, k * (mb + mb1), k),
        ("hausdorff-both-change", hausdorff(&ff_bb, &ff1_bb1, &spec)?, inv * ((mf + mf1) + le * (mb + mb1)), inv),
    ];
    for (name, attained, bound, factor) in checks {
        report.entry(name).record(attained, bound, tol(factor));
    }

    let db = m.size(&s.b.sub(&s.b_alt)?);
    let df = m.size(&s.f.sub(&s.f_alt)?);
    report.entry("delta-base-change").record(set_delta(&fb, &fb1, &spec)?, k * db, tol(k));
    report.entry("delta-seed-change").record(set_delta(&f_b, &f1_b, &spec)?, inv * df, tol(inv));
    report.entry("delta-seed-set").record(set_delta(&s.seeds, &fb, &spec)?, k * (mf + nb), tol(k));
    report.entry("delta-base-set").record(set_delta(&s.bases, &f_b, &spec)?, inv * (mb + nf), tol(inv));
    // directed distances are dominated by the symmetric one
    let directed = directed_hausdorff(&s.seeds, &fb, &spec)?;
    report.entry("directed-below-hausdorff").record(directed, hausdorff(&s.seeds, &fb, &spec)?, 0.0);
    Ok(())
}

/// Size of the random sets in the set suite.
pub const SET_SIZE: usize = 5;

fn random_set(rng: &mut impl Rng, grid: &Arc<FineGrid>, tc: &TrialConfig, size: usize) -> Result<FunctionSet> {
    FunctionSet::new((0..size).map(|_| random_function(rng, grid, tc.max_degree)).collect::<Result<_>>()?)
}

pub fn verify_sets(tc: &TrialConfig) -> Result<SuiteReport> {
    let grid = tc.grid()?;
    let mut report = SuiteReport::new("sets", tc);
    for (li, &lambda) in tc.lambdas.iter().enumerate() {
        for t in 0..tc.trials {
            let mut rng = tc.rng(5, li, t);
            let scenario = SetScenario {
                seeds: random_set(&mut rng, &grid, tc, SET_SIZE)?,
                seeds_alt: random_set(&mut rng, &grid, tc, SET_SIZE)?,
                bases: random_set(&mut rng, &grid, tc, SET_SIZE)?,
                bases_alt: random_set(&mut rng, &grid, tc, SET_SIZE)?,
                f: random_function(&mut rng, &grid, tc.max_degree)?,
                f_alt: random_function(&mut rng, &grid, tc.max_degree)?,
                b: random_function(&mut rng, &grid, tc.max_degree)?,
                b_alt: random_function(&mut rng, &grid, tc.max_degree)?,
            };
            let op = tc.operator(&grid, random_scale(&mut rng, &grid, lambda)?)?;
            verify_set_inequalities(&op, &scenario, tc.norm, &mut report)?;
        }
    }
    Ok(report)
}

fn sup_distance_to(g: &GridFunction, set: &FunctionSet) -> Result<f64> {
    set.members().iter().map(|h| g.sup_distance(h)).try_fold(f64::INFINITY, |acc, d| Ok(acc.min(d?)))
}

/// `b ∈ F ⇒ b ∈ F*b`, `f ∈ B ⇒ f ∈ f*B` and `F ∩ B ⊆ (F*B) ∩ (B*F)`, with
/// membership meaning sup distance at most `10 tol_engine` (relative to the
/// member's size).
pub fn verify_convolution_set_membership(
    op: &RbOperator,
    seeds: &FunctionSet,
    bases: &FunctionSet,
    report: &mut SuiteReport,
) -> Result<()> {
    let tol = |g: &GridFunction| 10.0 * op.tol() * g.sup_norm().max(1.0);
    for b in seeds.members() {
        let d = sup_distance_to(b, &convolve_set_seed(op, seeds, b)?)?;
        report.entry("base-in-seed-set").record(d, 0.0, tol(b));
    }
    for f in bases.members() {
        let d = sup_distance_to(f, &convolve_set_base(op, f, bases)?)?;
        report.entry("seed-in-base-set").record(d, 0.0, tol(f));
    }
    let fb = convolve_sets(op, seeds, bases)?;
    let bf = convolve_sets(op, bases, seeds)?;
    for h in seeds.members() {
        if sup_distance_to(h, bases)? <= tol(h) {
            let d = sup_distance_to(h, &fb)?.max(sup_distance_to(h, &bf)?);
            report.entry("intersection-in-products").record(d, 0.0, tol(h));
        }
    }
    Ok(())
}

/// Even trials use `F = B`, odd trials sets sharing one member.
pub fn verify_membership(tc: &TrialConfig) -> Result<SuiteReport> {
    let grid = tc.grid()?;
    let mut report = SuiteReport::new("membership", tc);
    for (li, &lambda) in tc.lambdas.iter().enumerate() {
        for t in 0..tc.trials {
            let mut rng = tc.rng(6, li, t);
            let seeds = random_set(&mut rng, &grid, tc, 3)?;
            let bases = if t % 2 == 0 {
                seeds.clone()
            } else {
                let mut members = vec![seeds.members()[0].clone()];
                members.extend(random_set(&mut rng, &grid, tc, 2)?.members().iter().cloned());
                FunctionSet::new(members)?
            };
            let op = tc.operator(&grid, random_scale(&mut rng, &grid, lambda)?)?;
            verify_convolution_set_membership(&op, &seeds, &bases, &mut report)?;
        }
    }
    Ok(report)
}

/// Piecewise-linear interpolant of `data` plus `Σ c_n sin(π (x - x_{n-1}) / h_n)`
/// on each subinterval; every such function passes through the data.
pub fn interpolant(grid: &Arc<FineGrid>, data: &[(f64, f64)], bumps: &[f64]) -> Result<GridFunction> {
    let xs: Vec<f64> = data.iter().map(|d| d.0).collect();
    let ys: Vec<f64> = data.iter().map(|d| d.1).collect();
    if bumps.len() + 1 != xs.len() {
        return Err(Error::ShapeMismatch(format!("{} bump weights for {} subintervals", bumps.len(), xs.len() - 1)));
    }
    let part = grid.partition();
    let values = grid
        .points()
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let k = grid.owner(i);
            let (a, b) = (part.nodes()[k], part.nodes()[k + 1]);
            let u = ((x - a) / (b - a)).clamp(0.0, 1.0);
            ys[k] + u * (ys[k + 1] - ys[k]) + bumps[k] * (std::f64::consts::PI * u).sin()
        })
        .collect();
    GridFunction::new(grid.clone(), values)
}

/// Resolutions of the continuity study.
pub const CONTINUITY_RESOLUTIONS: [usize; 4] = [64, 128, 256, 512];

fn max_adjacent_jump(g: &GridFunction) -> f64 {
    g.values().windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max)
}

/// Interpolation properties for data `D = {(x_n, y_n)}` whose abscissae
/// form the partition: node values, continuity under refinement, and the
/// node estimate for endpoint-matched inputs.
pub fn verify_interpolation(data: &[(f64, f64)], tc: &TrialConfig) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("interpolation", tc);
    interpolation_trials(data, tc, 0, &mut report)?;
    Ok(report)
}

/// [`verify_interpolation`] with fresh data on the configured partition
/// per trial block.
pub fn verify_interpolation_random(tc: &TrialConfig) -> Result<SuiteReport> {
    let grid = tc.grid()?;
    let mut report = SuiteReport::new("interpolation", tc);
    let mut rng = tc.rng(7, 0, 0);
    let data: Vec<(f64, f64)> = grid.partition().nodes().iter().map(|&x| (x, rng.random_range(-1.0..1.0))).collect();
    interpolation_trials(&data, tc, 1, &mut report)?;
    Ok(report)
}

fn interpolation_trials(data: &[(f64, f64)], tc: &TrialConfig, block: usize, report: &mut SuiteReport) -> Result<()> {
    tc.validate()?;
    if data.len() < 2 {
        return Err(invalid("interpolation data needs at least two points"));
    }
    let partition = Partition::new(data.iter().map(|d| d.0).collect())?;
    let n = partition.count();
    let grid = FineGrid::new(partition.clone(), tc.resolution)?;
    let m = Margin::new(tc.norm, tc.tol);
    for (li, &lambda) in tc.lambdas.iter().enumerate() {
        for t in 0..tc.trials {
            let mut rng = tc.rng(8 + block as u64, li, t);
            let bumps = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..n).map(|_| rng.random_range(-1.0..1.0)).collect() };
            let (cf, cb) = (bumps(&mut rng), bumps(&mut rng));
            let f = interpolant(&grid, data, &cf)?;
            let b = if t == 0 { f.clone() } else { interpolant(&grid, data, &cb)? };
            let op = tc.operator(&grid, random_scale(&mut rng, &grid, lambda)?)?;
            let conv = op.convolve(&f, &b)?;
            report.note(&conv.log);
            let nodes = op.node_values(&f, &b)?;
            let node_dev = nodes.iter().zip(data).map(|(v, d)| (v - d.1).abs()).fold(0.0, f64::max);
            report.entry("node-values").record(node_dev, 0.0, 1e-10);
            let fp_dev = (0..=n).map(|j| (conv.samples.at_node(j) - data[j].1).abs()).fold(0.0, f64::max);
            report.entry("fixed-point-nodes").record(fp_dev, 0.0, 2.0 * tc.tol);
            if t == 0 {
                report.entry("seed-equals-base").record(conv.samples.sup_distance(&f)?, 0.0, m.floor);
            }

            // b agrees with f up to ε(1 - Λ) at the endpoints
            let eps: f64 = rng.random_range(0.01..1.0);
            let delta = eps * (1.0 - op.lambda());
            let (s0, s1) = (rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0));
            let wiggle = rng.random_range(-1.0..1.0);
            let (lo, len) = (partition.lo(), partition.length());
            let shifted = f.add(&GridFunction::from_fn(&grid, |x| {
                let u = (x - lo) / len;
                delta * (s0 * (1.0 - u) + s1 * u) + wiggle * (3.0 * std::f64::consts::PI * u).sin()
            })?)?;
            let mismatched = op.node_values(&f, &shifted)?;
            let dev = mismatched.iter().enumerate().map(|(j, v)| (v - f.at_node(j)).abs()).fold(0.0, f64::max);
            report.entry("endpoint-mismatch").record(dev, eps, m.floor);
        }
        continuity_study(data, tc, li, lambda, block, report)?;
    }
    Ok(())
}

fn continuity_study(
    data: &[(f64, f64)],
    tc: &TrialConfig,
    li: usize,
    lambda: f64,
    block: usize,
    report: &mut SuiteReport,
) -> Result<()> {
    let partition = Partition::new(data.iter().map(|d| d.0).collect())?;
    let n = partition.count();
    let mut rng = tc.rng(10 + block as u64, li, 0);
    let cf: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let cb: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let signs: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.5) { lambda } else { -lambda }).collect();
    let mut jumps = Vec::with_capacity(CONTINUITY_RESOLUTIONS.len());
    for &res in &CONTINUITY_RESOLUTIONS {
        let grid = FineGrid::new(partition.clone(), res)?;
        let op = tc.operator(&grid, ScaleVector::constants(&signs, &grid)?)?;
        let conv = op.convolve(&interpolant(&grid, data, &cf)?, &interpolant(&grid, data, &cb)?)?;
        report.note(&conv.log);
        jumps.push(max_adjacent_jump(&conv.samples));
    }
    for w in jumps.windows(2) {
        report.entry("continuity").record(w[1], w[0], 0.0);
    }
    report.series.push(Series { name: format!("max-jump/lambda={lambda}"), values: jumps });
    Ok(())
}

/// Distances `||f*b - f||` for constant scale functions `alpha ≡ lambda_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaStudy {
    pub lambdas: Vec<f64>,
    pub distances: Vec<f64>,
    pub envelopes: Vec<f64>,
    /// tolerance applied to each envelope comparison
    pub tolerances: Vec<f64>,
}

impl LambdaStudy {
    pub fn within_envelope(&self) -> bool {
        self.distances.iter().zip(&self.envelopes).zip(&self.tolerances).all(|((d, e), t)| *d <= e + t)
    }

    pub fn decreasing(&self) -> bool {
        self.distances.windows(2).all(|w| w[1] <= w[0])
    }
}

pub fn lambda_convergence_study(
    grid: &Arc<FineGrid>,
    f: &GridFunction,
    b: &GridFunction,
    schedule: &[f64],
    spec: NormSpec,
    tol: f64,
) -> Result<LambdaStudy> {
    if schedule.windows(2).any(|w| w[1] > w[0]) {
        return Err(invalid("scale schedule must be non-increasing"));
    }
    let m = Margin::new(spec, tol);
    let e = f.sub(b)?;
    let ne = m.size(&e);
    let mut study = LambdaStudy {
        lambdas: schedule.to_vec(),
        distances: Vec::with_capacity(schedule.len()),
        envelopes: Vec::with_capacity(schedule.len()),
        tolerances: Vec::with_capacity(schedule.len()),
    };
    for &lambda in schedule {
        let op = RbOperator::with_tolerance(grid.clone(), ScaleVector::constant(lambda, grid)?, tol, DEFAULT_MAX_ITER)?;
        let d = op.convolve(f, b)?.samples.sub(f)?;
        let le = spec.effective_lambda(lambda);
        let k = le / (1.0 - le);
        study.distances.push(m.size(&d));
        study.envelopes.push(k * ne);
        study.tolerances.push(m.tol(k * (m.over(&d) + m.over(&e))));
    }
    Ok(study)
}

/// Length of the schedule `lambda_m = c / m` in the study suite.
pub const STUDY_LENGTH: usize = 10;

pub fn verify_lambda_study(tc: &TrialConfig) -> Result<SuiteReport> {
    let grid = tc.grid()?;
    let mut report = SuiteReport::new("lambda-study", tc);
    let c = tc.lambdas.iter().copied().fold(0.0, f64::max);
    let schedule: Vec<f64> = (1..=STUDY_LENGTH).map(|m| c / m as f64).collect();
    for t in 0..tc.trials {
        let mut rng = tc.rng(12, 0, t);
        let f = random_function(&mut rng, &grid, tc.max_degree)?;
        let b = if t == 0 { f.clone() } else { random_function(&mut rng, &grid, tc.max_degree)? };
        let study = lambda_convergence_study(&grid, &f, &b, &schedule, tc.norm, tc.tol)?;
        for ((d, e), tol) in study.distances.iter().zip(&study.envelopes).zip(&study.tolerances) {
            report.entry("envelope").record(*d, *e, *tol);
        }
        let first = study.distances[0];
        let last = study.distances[study.distances.len() - 1];
        report.entry("shrinks").record(last, first, 10.0 * tc.tol);
        if t == 1 {
            report.series.push(Series { name: "lambda-study/distances".into(), values: study.distances });
        }
    }
    Ok(report)
}
