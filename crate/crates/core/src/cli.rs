//! The `fracconv` command line: convolve, verify, basis, frame and figure.
//!
//! Exit status: 0 success, 1 usage or validation error, 2 check
//! violations, 3 a fixed-point run hit the iteration cap.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::analysis::{run_suite, Suite, SuiteReport, TrialConfig};
use crate::engine::{ConvolutionConfig, RbOperator, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::error::{invalid, Result};
use crate::expr::Expression;
use crate::frames::{
    convolve_family, frame_perturbation_bounds, gram_matrix, lambda_schedule, perturbation_r, riesz_bounds,
    symmetric_eigenvalues, trig_basis, FrameReport, RieszBounds, ScheduleKind, Side, SpectralEnvelope,
};
use crate::function::{FineGrid, ScaleVector, SharedFn, DEFAULT_RESOLUTION};
use crate::io;
use crate::metrics::NormSpec;
use crate::partition::Partition;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VIOLATIONS: i32 = 2;
pub const EXIT_UNCONVERGED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "fracconv", version, about = "Fractal convolution of functions on an interval")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample f *_T b on the fine grid and write CSV plus a JSON sidecar.
    Convolve(ConvolveArgs),
    /// Run a verification suite and emit its JSON report.
    Verify(VerifyArgs),
    /// Gram matrix, spectrum and Riesz bounds of a convolved family.
    Basis(BasisArgs),
    /// Perturbed frame bounds for f_m *_T 0 under a scale schedule.
    Frame(FrameArgs),
    /// Write the sample data of the three reference figures.
    Figure(FigureArgs),
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    pub interval: Option<Vec<f64>>,
    /// Number of subintervals N.
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Fine cells per subinterval M (even).
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ConvolveArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long = "seed-fn", default_value = "0", allow_hyphen_values = true)]
    pub seed_fn: String,
    #[arg(long = "base-fn", default_value = "0", allow_hyphen_values = true)]
    pub base_fn: String,
    /// One expression for every subinterval, or N comma-separated ones.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: String,
    /// Exponent of the reported distance (`inf` for the sup norm).
    #[arg(long, default_value = "2")]
    pub p: String,
    /// Samples CSV; the sidecar gets the same name with `.json`.
    #[arg(long, default_value = "convolution.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value = "all")]
    pub suite: String,
    #[arg(long, default_value = "2")]
    pub p: String,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// JSON report path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BasisArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value = "trig")]
    pub family: String,
    #[arg(long, default_value_t = 16)]
    pub count: usize,
    #[arg(long, default_value = "left-null")]
    pub side: String,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// `c/m:C` or `const:L`
    #[arg(long)]
    pub schedule: Option<String>,
    /// Output prefix: writes PREFIX_gram.csv, PREFIX_spectrum.csv and PREFIX.json.
    #[arg(long, default_value = "basis")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct FrameArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value = "trig")]
    pub family: String,
    #[arg(long, default_value_t = 64)]
    pub count: usize,
    #[arg(long, default_value = "c/m:0.3")]
    pub schedule: String,
    #[arg(long = "A", default_value_t = 1.0)]
    pub a: f64,
    #[arg(long = "B", default_value_t = 1.0)]
    pub b: f64,
    #[arg(long, default_value = "frame.json")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct FigureArgs {
    /// Fine cells per subinterval M (even).
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    pub grid: usize,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Convolve,
    Verify,
    Basis,
    Frame,
    Figure,
}

/// Everything a run depends on; copied into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub interval: [f64; 2],
    pub nodes: usize,
    pub grid: usize,
    pub norm: NormSpec,
    pub tol: f64,
    pub max_iter: usize,
    pub seed_fn: String,
    pub base_fn: String,
    pub alpha: Vec<String>,
    pub rng_seed: u64,
    pub trials: usize,
    pub suite: Option<String>,
    pub family: Option<String>,
    pub count: Option<usize>,
    pub side: Option<Side>,
    pub schedule: Option<ScheduleKind>,
    pub frame_bounds: Option<[f64; 2]>,
    pub out: PathBuf,
}

impl RunConfig {
    pub fn new(command: CommandKind) -> Self {
        Self {
            command,
            interval: [0.0, 1.0],
            nodes: 4,
            grid: DEFAULT_RESOLUTION,
            norm: NormSpec::Norm(2.0),
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            seed_fn: "0".into(),
            base_fn: "0".into(),
            alpha: vec!["0".into()],
            rng_seed: 42,
            trials: 100,
            suite: None,
            family: None,
            count: None,
            side: None,
            schedule: None,
            frame_bounds: None,
            out: PathBuf::from("."),
        }
    }

    /// Seed `sin(3πx)`, base `exp(x)`, `0` per figure, on `[0, 3]` with
    /// `N = 6` and `alpha_n(x) = x/8`.
    pub fn figure(index: usize, grid: usize) -> Result<Self> {
        let (seed, base) = match index {
            1 => ("sin(3*pi*x)", "exp(x)"),
            2 => ("0", "sin(3*pi*x)"),
            3 => ("sin(3*pi*x)", "0"),
            _ => return Err(invalid(format!("there is no figure {index}"))),
        };
        let mut cfg = RunConfig::new(CommandKind::Convolve);
        cfg.interval = [0.0, 3.0];
        cfg.nodes = 6;
        cfg.grid = grid;
        cfg.seed_fn = seed.into();
        cfg.base_fn = base.into();
        cfg.alpha = vec!["x/8".into()];
        cfg.out = PathBuf::from(format!("figure{index}.csv"));
        Ok(cfg)
    }

    fn apply_grid(&mut self, g: &GridArgs) {
        if let Some(iv) = &g.interval {
            self.interval = [iv[0], iv[1]];
        }
        if let Some(n) = g.nodes {
            self.nodes = n;
        }
        if let Some(m) = g.grid {
            self.grid = m;
        }
        if let Some(t) = g.tol {
            self.tol = t;
        }
        if let Some(k) = g.max_iter {
            self.max_iter = k;
        }
    }

    /// Numeric constraints of every downstream module.
    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.interval;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(invalid(format!("interval [{lo}, {hi}] must be finite with lo < hi")));
        }
        if self.nodes < 2 {
            return Err(invalid(format!("need at least 2 subintervals, got {}", self.nodes)));
        }
        if self.grid < 2 || !self.grid.is_multiple_of(2) {
            return Err(invalid(format!("grid resolution must be even and >= 2, got {}", self.grid)));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(invalid(format!("tolerance must be positive, got {}", self.tol)));
        }
        if self.max_iter < 1 {
            return Err(invalid("max-iter must be at least 1"));
        }
        if self.alpha.len() != 1 && self.alpha.len() != self.nodes {
            return Err(invalid(format!(
                "--alpha takes 1 or N = {} expressions, got {}",
                self.nodes,
                self.alpha.len()
            )));
        }
        if self.count == Some(0) {
            return Err(invalid("family size must be at least 1"));
        }
        if self.command == CommandKind::Verify && self.trials < 1 {
            return Err(invalid("trials must be at least 1"));
        }
        Ok(())
    }

    pub fn fine_grid(&self) -> Result<Arc<FineGrid>> {
        self.validate()?;
        FineGrid::new(Partition::uniform(self.interval[0], self.interval[1], self.nodes)?, self.grid)
    }

    pub fn scale(&self, grid: &FineGrid) -> Result<ScaleVector> {
        let exprs = parse_all(&self.alpha, "alpha")?;
        let fns: Vec<SharedFn> = exprs.into_iter().map(|e| Arc::new(e) as SharedFn).collect();
        if fns.len() == 1 {
            ScaleVector::replicated(fns[0].clone(), grid)
        } else {
            ScaleVector::new(fns, grid)
        }
    }

    pub fn operator(&self) -> Result<Arc<RbOperator>> {
        let grid = self.fine_grid()?;
        let scale = self.scale(&grid)?;
        Ok(Arc::new(RbOperator::with_tolerance(grid, scale, self.tol, self.max_iter)?))
    }

    pub fn convolution(&self) -> Result<ConvolutionConfig> {
        let seed = Arc::new(parse_one(&self.seed_fn, "seed-fn")?) as SharedFn;
        let base = Arc::new(parse_one(&self.base_fn, "base-fn")?) as SharedFn;
        ConvolutionConfig::new(self.operator()?, seed, base)
    }

    pub fn trial_config(&self) -> Result<TrialConfig> {
        self.validate()?;
        Ok(TrialConfig {
            seed: self.rng_seed,
            trials: self.trials,
            norm: self.norm,
            interval: self.interval,
            nodes: self.nodes,
            resolution: self.grid,
            tol: self.tol,
            max_iter: self.max_iter,
            ..TrialConfig::default()
        })
    }
}

fn parse_one(text: &str, flag: &str) -> Result<Expression> {
    Expression::parse(text).map_err(|e| invalid(format!("--{flag} '{text}': {e}")))
}

fn parse_all(texts: &[String], flag: &str) -> Result<Vec<Expression>> {
    texts.iter().map(|t| parse_one(t, flag)).collect()
}

fn parse_p(text: &str) -> Result<NormSpec> {
    let p: f64 = match text.trim() {
        "inf" | "infinity" | "∞" => f64::INFINITY,
        t => t.parse().map_err(|_| invalid(format!("--p '{text}' is not a number")))?,
    };
    NormSpec::new(p)
}

fn split_alpha(text: &str) -> Vec<String> {
    text.split(',').map(|s| s.trim().to_string()).collect()
}

/// What a command produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: i32,
    pub files: Vec<PathBuf>,
    pub summary: String,
}

/// Contents of the JSON sidecar written next to a samples CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvolveReport {
    pub config: RunConfig,
    pub lambda: f64,
    pub sweeps: usize,
    pub residual: f64,
    pub error_bound: f64,
    pub converged: bool,
    pub interpolated: bool,
    /// `sup |T g - g|` of the emitted samples
    pub self_residual: f64,
    pub node_values: Vec<f64>,
    /// `||f*b - f||_p`
    pub distance_to_seed: f64,
    /// `||f - b||_p`
    pub seed_base_distance: f64,
    /// `lambda/(1-lambda)` (`lambda^p` form for `p < 1`)
    pub bound_factor: f64,
    pub bound: f64,
    pub ratio: Option<f64>,
}

pub fn cmd_convolve(cfg: &RunConfig) -> Result<Outcome> {
    let conv_cfg = cfg.convolution()?;
    let conv = conv_cfg.fixed_point()?;
    let g = &conv.samples;
    let (f, b) = (conv_cfg.seed(), conv_cfg.base());
    let spec = cfg.norm;
    let le = spec.effective_lambda(conv_cfg.lambda());
    let factor = le / (1.0 - le);
    let distance = spec.distance(g, f)?;
    let seed_base = spec.distance(f, b)?;
    let report = ConvolveReport {
        config: cfg.clone(),
        lambda: conv_cfg.lambda(),
        sweeps: conv.log.sweeps,
        residual: conv.log.residual,
        error_bound: conv.log.error_bound,
        converged: conv.log.converged,
        interpolated: conv.log.interpolated,
        self_residual: conv_cfg.self_residual(g)?,
        node_values: conv_cfg.node_values()?,
        distance_to_seed: distance,
        seed_base_distance: seed_base,
        bound_factor: factor,
        bound: factor * seed_base,
        ratio: (seed_base > 0.0).then(|| distance / seed_base),
    };
    ensure_parent(&cfg.out)?;
    io::write_samples_file(&cfg.out, g)?;
    let sidecar = io::sidecar_path(&cfg.out);
    io::write_json(&sidecar, &report)?;
    let status = if conv.log.converged { EXIT_OK } else { EXIT_UNCONVERGED };
    Ok(Outcome {
        status,
        files: vec![cfg.out.clone(), sidecar],
        summary: format!(
            "lambda = {:.6}, {} sweeps, residual {:.3e}, ||f*b - f|| = {:.6e} <= {:.6e}",
            report.lambda, report.sweeps, report.residual, distance, report.bound
        ),
    })
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<(Outcome, SuiteReport)> {
    let suite: Suite = cfg.suite.as_deref().unwrap_or("all").parse()?;
    let report = run_suite(suite, &cfg.trial_config()?)?;
    let mut files = Vec::new();
    let json = serde_json::to_string_pretty(&report)?;
    if cfg.out.as_os_str().is_empty() {
        println!("{json}");
    } else {
        ensure_parent(&cfg.out)?;
        std::fs::write(&cfg.out, json + "\n")?;
        files.push(cfg.out.clone());
    }
    let status = if report.violations() > 0 {
        EXIT_VIOLATIONS
    } else if report.unconverged > 0 {
        EXIT_UNCONVERGED
    } else {
        EXIT_OK
    };
    let summary = format!(
        "suite {}: {} checks, {} violations, {} unconverged runs",
        report.suite,
        report.checks.len(),
        report.violations(),
        report.unconverged
    );
    Ok((Outcome { status, files, summary }, report))
}

/// Bounds file of the `basis` command.
#[derive(Debug, Clone, Serialize)]
pub struct BasisReport {
    pub config: RunConfig,
    pub lambda: f64,
    pub bounds: RieszBounds,
    pub envelope: Option<SpectralEnvelope>,
    pub envelope_tolerance: f64,
    pub within_envelope: Option<bool>,
}

/// Tolerance on the spectral envelopes.
pub const ENVELOPE_TOL: f64 = 1e-3;

/// Default `M` of `basis` and `frame`.
pub const FAMILY_RESOLUTION: usize = 2048;

fn constant_modulus(scale: &ScaleVector, grid: &FineGrid) -> Result<bool> {
    let lambda = scale.lambda();
    let points = grid.points().iter().chain(grid.pullback_points().iter()).copied().collect::<Vec<_>>();
    for alpha in scale.alphas() {
        for &x in &points {
            if (alpha.eval(x)?.abs() - lambda).abs() > 1e-14 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

pub fn cmd_basis(cfg: &RunConfig) -> Result<Outcome> {
    let count = cfg.count.unwrap_or(16);
    check_family(cfg)?;
    let side = cfg.side.unwrap_or(Side::LeftNull);
    let grid = cfg.fine_grid()?;
    let fam = trig_basis(count, &grid)?;
    let (convolved, lambda, envelope) = match cfg.schedule {
        Some(kind) => {
            let schedule = lambda_schedule(kind, count)?;
            let template = RbOperator::with_tolerance(grid.clone(), ScaleVector::constant(0.0, &grid)?, cfg.tol, cfg.max_iter)?;
            let fam = convolve_family(&fam, side, &template, Some(&schedule))?;
            let lambda = schedule.iter().copied().fold(0.0, f64::max);
            // one operator per member: the envelope of the largest scale covers
            // each member, not the cross terms
            (fam, lambda, None)
        }
        None => {
            let scale = cfg.scale(&grid)?;
            let modulus = constant_modulus(&scale, &grid)?;
            let op = RbOperator::with_tolerance(grid.clone(), scale, cfg.tol, cfg.max_iter)?;
            let lambda = op.lambda();
            (convolve_family(&fam, side, &op, None)?, lambda, Some(SpectralEnvelope::for_side(side, lambda, modulus)))
        }
    };
    let gram = gram_matrix(&convolved)?;
    let bounds = riesz_bounds(&convolved)?;
    debug_assert_eq!(bounds.spectrum, symmetric_eigenvalues(&gram)?);
    let within = envelope.map(|e| e.contains(&bounds, ENVELOPE_TOL));

    let prefix = cfg.out.to_string_lossy().into_owned();
    let gram_path = PathBuf::from(format!("{prefix}_gram.csv"));
    let spectrum_path = PathBuf::from(format!("{prefix}_spectrum.csv"));
    let json_path = PathBuf::from(format!("{prefix}.json"));
    ensure_parent(&gram_path)?;
    io::write_matrix(std::fs::File::create(&gram_path)?, &gram)?;
    io::write_vector(std::fs::File::create(&spectrum_path)?, &bounds.spectrum)?;
    let summary = format!(
        "{} members, spectrum [{:.6e}, {:.6e}]{}",
        count,
        bounds.lambda_min,
        bounds.lambda_max,
        match (envelope, within) {
            (Some(e), Some(ok)) => format!(
                ", envelope [{}, {:.6e}] {}",
                e.lower.map_or("-".to_string(), |l| format!("{l:.6e}")),
                e.upper,
                if ok { "holds" } else { "VIOLATED" }
            ),
            _ => String::new(),
        }
    );
    io::write_json(
        &json_path,
        &BasisReport { config: cfg.clone(), lambda, bounds, envelope, envelope_tolerance: ENVELOPE_TOL, within_envelope: within },
    )?;
    let status = if within == Some(false) { EXIT_VIOLATIONS } else { EXIT_OK };
    Ok(Outcome { status, files: vec![gram_path, spectrum_path, json_path], summary })
}

/// Report of the `frame` command.
#[derive(Debug, Clone, Serialize)]
pub struct FrameCommandReport {
    pub config: RunConfig,
    pub schedule: Vec<f64>,
    pub bounds: FrameReport,
    pub empirical: f64,
    pub empirical_within: bool,
    pub partial_sums: Vec<f64>,
    /// first member index at which the partial sums reach `A`
    pub diverges_at: Option<usize>,
}

pub fn cmd_frame(cfg: &RunConfig) -> Result<Outcome> {
    let count = cfg.count.unwrap_or(64);
    check_family(cfg)?;
    let [a, b] = cfg.frame_bounds.unwrap_or([1.0, 1.0]);
    let kind = cfg.schedule.ok_or_else(|| invalid("frame needs --schedule"))?;
    let grid = cfg.fine_grid()?;
    let schedule = lambda_schedule(kind, count)?;
    let fam = trig_basis(count, &grid)?;
    let template = RbOperator::with_tolerance(grid.clone(), ScaleVector::constant(0.0, &grid)?, cfg.tol, cfg.max_iter)?;
    let pert = perturbation_r(&fam, &schedule, &template)?;
    let bounds = frame_perturbation_bounds(a, b, pert.r)?;
    let tol = 10.0 * cfg.tol * count as f64;
    let report = FrameCommandReport {
        config: cfg.clone(),
        schedule,
        bounds,
        empirical: pert.empirical,
        empirical_within: pert.empirical_within(tol),
        partial_sums: pert.partial_sums.clone(),
        diverges_at: pert.diverges_at(a),
    };
    ensure_parent(&cfg.out)?;
    io::write_json(&cfg.out, &report)?;
    let summary = format!(
        "R = {:.6e}, A' = {:.6e}, B' = {:.6e}, {}; empirical {:.6e} {} R",
        bounds.r,
        bounds.a_prime,
        bounds.b_prime,
        if bounds.feasible { "feasible" } else { "infeasible (R >= A)" },
        pert.empirical,
        if report.empirical_within { "<=" } else { ">" }
    );
    let status = if report.empirical_within { EXIT_OK } else { EXIT_VIOLATIONS };
    Ok(Outcome { status, files: vec![cfg.out.clone()], summary })
}

/// Runs [`cmd_convolve`] for the three reference figures into `dir`.
pub fn cmd_figure(dir: &Path, grid: usize, tol: Option<f64>) -> Result<Outcome> {
    let mut files = Vec::new();
    let mut status = EXIT_OK;
    let mut lines = Vec::new();
    for index in 1..=3 {
        let mut cfg = RunConfig::figure(index, grid)?;
        cfg.command = CommandKind::Figure;
        if let Some(t) = tol {
            cfg.tol = t;
        }
        cfg.out = dir.join(format!("figure{index}.csv"));
        let out = cmd_convolve(&cfg)?;
        status = status.max(out.status);
        lines.push(format!("figure {index}: {}", out.summary));
        files.extend(out.files);
    }
    Ok(Outcome { status, files, summary: lines.join("\n") })
}

fn check_family(cfg: &RunConfig) -> Result<()> {
    match cfg.family.as_deref() {
        None | Some("trig") => Ok(()),
        Some(other) => Err(invalid(format!("unknown family '{other}' (only 'trig' is available)"))),
    }
}

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => Ok(std::fs::create_dir_all(dir)?),
        _ => Ok(()),
    }
}

/// Builds the [`RunConfig`] of a parsed command line.
pub fn run_config(command: &Command) -> Result<RunConfig> {
    let cfg = match command {
        Command::Convolve(a) => {
            let mut cfg = RunConfig::new(CommandKind::Convolve);
            cfg.apply_grid(&a.grid);
            cfg.seed_fn = a.seed_fn.clone();
            cfg.base_fn = a.base_fn.clone();
            cfg.alpha = split_alpha(&a.alpha);
            cfg.norm = parse_p(&a.p)?;
            cfg.out = a.out.clone();
            cfg
        }
        Command::Verify(a) => {
            let mut cfg = RunConfig::new(CommandKind::Verify);
            cfg.grid = TrialConfig::default().resolution;
            cfg.apply_grid(&a.grid);
            cfg.suite = Some(a.suite.parse::<Suite>()?.name().to_string());
            cfg.norm = parse_p(&a.p)?;
            cfg.trials = a.trials;
            cfg.rng_seed = a.seed;
            cfg.out = a.out.clone().unwrap_or_default();
            cfg
        }
        Command::Basis(a) => {
            let mut cfg = RunConfig::new(CommandKind::Basis);
            cfg.grid = FAMILY_RESOLUTION;
            cfg.apply_grid(&a.grid);
            cfg.family = Some(a.family.clone());
            cfg.count = Some(a.count);
            cfg.side = Some(a.side.parse()?);
            match (&a.alpha, &a.schedule) {
                (Some(_), Some(_)) => return Err(invalid("give either --alpha or --schedule, not both")),
                (None, None) => return Err(invalid("basis needs --alpha or --schedule")),
                (Some(alpha), None) => cfg.alpha = split_alpha(alpha),
                (None, Some(s)) => cfg.schedule = Some(s.parse()?),
            }
            cfg.out = a.out.clone();
            cfg
        }
        Command::Frame(a) => {
            let mut cfg = RunConfig::new(CommandKind::Frame);
            cfg.grid = FAMILY_RESOLUTION;
            cfg.apply_grid(&a.grid);
            cfg.family = Some(a.family.clone());
            cfg.count = Some(a.count);
            cfg.schedule = Some(a.schedule.parse()?);
            cfg.frame_bounds = Some([a.a, a.b]);
            cfg.out = a.out.clone();
            cfg
        }
        Command::Figure(a) => {
            let mut cfg = RunConfig::figure(1, a.grid)?;
            cfg.command = CommandKind::Figure;
            if let Some(t) = a.tol {
                cfg.tol = t;
            }
            cfg.out = a.out.clone();
            cfg
        }
    };
    cfg.validate()?;
    Ok(cfg)
}

fn execute(command: &Command) -> Result<Outcome> {
    let cfg = run_config(command)?;
    match cfg.command {
        CommandKind::Convolve => cmd_convolve(&cfg),
        CommandKind::Verify => cmd_verify(&cfg).map(|(o, _)| o),
        CommandKind::Basis => cmd_basis(&cfg),
        CommandKind::Frame => cmd_frame(&cfg),
        CommandKind::Figure => cmd_figure(&cfg.out, cfg.grid, Some(cfg.tol)),
    }
}

fn context(command: &Command) -> &'static str {
    match command {
        Command::Convolve(_) => "convolve",
        Command::Verify(_) => "verify",
        Command::Basis(_) => "basis",
        Command::Frame(_) => "frame",
        Command::Figure(_) => "figure",
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    match execute(&cli.command) {
        Ok(outcome) => {
            eprintln!("{}", outcome.summary);
            for f in &outcome.files {
                eprintln!("wrote {}", f.display());
            }
            outcome.status
        }
        Err(e) => {
            eprintln!("fracconv {}: {e}", context(&cli.command));
            EXIT_USAGE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn parse(args: &[&str]) -> Command {
        Cli::try_parse_from(std::iter::once("fracconv").chain(args.iter().copied())).unwrap().command
    }

    #[test]
    fn figure_one_config() {
        let cfg = RunConfig::figure(1, 64).unwrap();
        let conv = cfg.convolution().unwrap();
        assert_eq!(conv.lambda(), 0.375);
        assert!(RunConfig::figure(4, 64).is_err());
    }

    #[test]
    fn negative_interval_and_alpha_list() {
        let cmd = parse(&[
            "convolve", "--interval", "-1", "1", "--nodes", "3", "--alpha", "0.2, -0.3, x/4", "--seed-fn", "-x",
        ]);
        let cfg = run_config(&cmd).unwrap();
        assert_eq!(cfg.interval, [-1.0, 1.0]);
        assert_eq!(cfg.alpha, vec!["0.2", "-0.3", "x/4"]);
        assert_eq!(cfg.seed_fn, "-x");
        assert_eq!(cfg.operator().unwrap().lambda(), 0.3);
    }

    #[test]
    fn validation_errors() {
        let bad = |args: &[&str]| run_config(&parse(args)).is_err();
        assert!(bad(&["convolve", "--alpha", "0.1,0.2"]));
        assert!(bad(&["convolve", "--alpha", "0.1", "--grid", "7"]));
        assert!(bad(&["convolve", "--alpha", "0.1", "--interval", "1", "0"]));
        assert!(bad(&["convolve", "--alpha", "0.1", "--p", "0"]));
        assert!(bad(&["verify", "--suite", "nope"]));
        assert!(bad(&["basis", "--count", "0", "--alpha", "0.3"]));
        assert!(bad(&["basis", "--side", "middle", "--alpha", "0.3"]));
        assert!(bad(&["basis"]));
        assert!(bad(&["frame", "--schedule", "const:1.5"]) || cmd_frame(&run_config(&parse(&["frame", "--schedule", "const:1.5"])).unwrap()).is_err());
        assert!(RunConfig::figure(1, 64).unwrap().convolution().is_ok());
        let mut cfg = RunConfig::new(CommandKind::Convolve);
        cfg.alpha = vec!["1.5".into()];
        assert!(matches!(cfg.operator(), Err(Error::NotContractive { .. })));
        cfg.alpha = vec!["sin(".into()];
        assert!(cfg.operator().is_err());
    }

    #[test]
    fn p_spellings() {
        assert_eq!(parse_p("inf").unwrap(), NormSpec::Sup);
        assert_eq!(parse_p("0.5").unwrap(), NormSpec::Metric(0.5));
        assert!(parse_p("two").is_err());
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["fracconv", "bogus"]), EXIT_USAGE);
        assert_eq!(run(["fracconv", "verify", "--suite", "nope"]), EXIT_USAGE);
        assert_eq!(run(["fracconv", "--help"]), EXIT_OK);
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = RunConfig::figure(2, 128).unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), cfg);
    }
}
