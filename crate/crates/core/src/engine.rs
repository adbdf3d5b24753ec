//! The Read–Bajraktarević operator
//!
//! ```text
//! T g(x) = f(x) + alpha_k(L_k^{-1} x) * (g - b)(L_k^{-1} x),   x in I_k
//! ```
//!
//! its fixed point `f *_T b`, closed-form node values, and a push-forward
//! evaluator that works pointwise from exact function values.
//!
//! On a uniform partition the fine grid is closed under the inverse maps
//! (they send fine points of `I_k` to fine points with index stride `N`), so
//! the operator is applied without interpolation. On other partitions the
//! pulled-back values are linearly interpolated and the run is flagged.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::function::{FineGrid, GridFunction, ScaleVector, SharedFn};
use crate::partition::{address_count, AddressedPoint, AffineMaps};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone)]
enum Pullback {
    /// `t_j` is fine point `j * stride`
    Aligned { stride: usize },
    /// `t_j` lies in cell `i` at weight `w`
    Interpolated { cells: Vec<(usize, f64)> },
}

/// `P_{alpha, Delta}`: the fractal convolution for a fixed partition and
/// scale vector, acting on pairs of grid functions.
#[derive(Debug, Clone)]
pub struct RbOperator {
    grid: Arc<FineGrid>,
    maps: AffineMaps,
    scale: ScaleVector,
    pullback: Pullback,
    /// `alpha_k(t_j)` for `k < N`, `j <= m`
    alpha_pull: Vec<Vec<f64>>,
    tol: f64,
    max_iter: usize,
}

/// Sweep history of a fixed-point run.
#[derive(Debug, Clone, Serialize)]
pub struct IterationLog {
    /// `sup |g_{k+1} - g_k|` per sweep
    pub distances: Vec<f64>,
    pub sweeps: usize,
    /// last sweep distance
    pub residual: f64,
    /// a-posteriori bound `lambda / (1 - lambda) * residual` on the sup error
    pub error_bound: f64,
    pub converged: bool,
    pub interpolated: bool,
}

impl IterationLog {
    /// Successive ratios `d_{k+1} / d_k`, skipping sweeps with `d_k <= floor`.
    pub fn ratios(&self, floor: f64) -> Vec<f64> {
        self.distances
            .windows(2)
            .filter(|w| w[0] > floor)
            .map(|w| w[1] / w[0])
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct Convolution {
    pub samples: GridFunction,
    pub log: IterationLog,
}

impl RbOperator {
    pub fn new(grid: Arc<FineGrid>, scale: ScaleVector) -> Result<Self> {
        Self::with_tolerance(grid, scale, DEFAULT_TOL, DEFAULT_MAX_ITER)
    }

    pub fn with_tolerance(
        grid: Arc<FineGrid>,
        scale: ScaleVector,
        tol: f64,
        max_iter: usize,
    ) -> Result<Self> {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(invalid(format!("tolerance must be positive, got {tol}")));
        }
        if max_iter == 0 {
            return Err(invalid("max_iter must be at least 1"));
        }
        let n = grid.partition().count();
        if scale.alphas().len() != n {
            return Err(Error::ShapeMismatch(format!(
                "scale vector has {} functions for {n} subintervals",
                scale.alphas().len()
            )));
        }
        if scale.lambda() >= 1.0 {
            return Err(Error::NotContractive { lambda: scale.lambda() });
        }
        let t = grid.pullback_points();
        let pullback = if grid.is_uniform() {
            Pullback::Aligned { stride: n }
        } else {
            Pullback::Interpolated { cells: t.iter().map(|&x| grid.bracket(x)).collect::<Result<_>>()? }
        };
        let alpha_pull = scale
            .alphas()
            .iter()
            .map(|a| t.iter().map(|&x| a.eval(x)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let maps = AffineMaps::new(grid.partition());
        Ok(Self { grid, maps, scale, pullback, alpha_pull, tol, max_iter })
    }

    pub fn grid(&self) -> &Arc<FineGrid> {
        &self.grid
    }

    pub fn maps(&self) -> &AffineMaps {
        &self.maps
    }

    pub fn scale(&self) -> &ScaleVector {
        &self.scale
    }

    pub fn lambda(&self) -> f64 {
        self.scale.lambda()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn max_iter(&self) -> usize {
        self.max_iter
    }

    /// True when pullbacks need interpolation (non-uniform partition).
    pub fn interpolates(&self) -> bool {
        matches!(self.pullback, Pullback::Interpolated { .. })
    }

    fn check(&self, g: &GridFunction) -> Result<()> {
        if g.grid().as_ref() == self.grid.as_ref() {
            Ok(())
        } else {
            Err(Error::ShapeMismatch("function is not sampled on the operator grid".into()))
        }
    }

    /// `(g - b)(t_j)` for `j = 0..=m`
    fn pulled_difference(&self, g: &[f64], b: &[f64]) -> Vec<f64> {
        let m = self.grid.resolution();
        match &self.pullback {
            Pullback::Aligned { stride } => (0..=m).map(|j| g[j * stride] - b[j * stride]).collect(),
            Pullback::Interpolated { cells } => cells
                .iter()
                .map(|&(i, w)| {
                    if w == 0.0 {
                        g[i] - b[i]
                    } else {
                        (1.0 - w) * (g[i] - b[i]) + w * (g[i + 1] - b[i + 1])
                    }
                })
                .collect(),
        }
    }

    fn sweep(&self, f: &[f64], b: &[f64], g: &[f64]) -> Vec<f64> {
        let m = self.grid.resolution();
        let d = self.pulled_difference(g, b);
        let mut out = Vec::with_capacity(f.len());
        out.push(f[0] + self.alpha_pull[0][0] * d[0]);
        for (k, alpha) in self.alpha_pull.iter().enumerate() {
            let base = k * m;
            for j in 1..=m {
                out.push(f[base + j] + alpha[j] * d[j]);
            }
        }
        out
    }

    /// One application of `T` built from seed `f` and base `b`.
    pub fn apply(&self, f: &GridFunction, b: &GridFunction, g: &GridFunction) -> Result<GridFunction> {
        self.check(f)?;
        self.check(b)?;
        self.check(g)?;
        GridFunction::new(self.grid.clone(), self.sweep(f.values(), b.values(), g.values()))
    }

    /// `sup |T g - g|`
    pub fn self_residual(&self, f: &GridFunction, b: &GridFunction, g: &GridFunction) -> Result<f64> {
        self.apply(f, b, g)?.sup_distance(g)
    }

    /// Iterates `g_{k+1} = T g_k` from `g_0 = f` until the a-posteriori bound
    /// `lambda / (1 - lambda) * sup |g_{k+1} - g_k|` drops to `tol`. A run
    /// that exhausts `max_iter` returns its last iterate, flagged.
    pub fn convolve(&self, f: &GridFunction, b: &GridFunction) -> Result<Convolution> {
        self.check(f)?;
        self.check(b)?;
        let lambda = self.lambda();
        let factor = lambda / (1.0 - lambda);
        let (fv, bv) = (f.values(), b.values());
        let mut g = fv.to_vec();
        let mut distances = Vec::new();
        let mut converged = false;
        for _ in 0..self.max_iter {
            let next = self.sweep(fv, bv, &g);
            let d = next.iter().zip(&g).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            g = next;
            distances.push(d);
            if factor * d <= self.tol {
                converged = true;
                break;
            }
        }
        let residual = *distances.last().unwrap_or(&0.0);
        let log = IterationLog {
            sweeps: distances.len(),
            residual,
            error_bound: factor * residual,
            distances,
            converged,
            interpolated: self.interpolates(),
        };
        Ok(Convolution { samples: GridFunction::new(self.grid.clone(), g)?, log })
    }

    /// `0 *_T b`
    pub fn left_null(&self, b: &GridFunction) -> Result<Convolution> {
        self.convolve(&GridFunction::zeros(&self.grid), b)
    }

    /// `f *_T 0`
    pub fn right_null(&self, f: &GridFunction) -> Result<Convolution> {
        self.convolve(f, &GridFunction::zeros(&self.grid))
    }

    /// `b, 0*b, 0*(0*b), ...` (`count` terms after `b`). Each step is solved
    /// on a unit-sup rescaling so the absolute tolerance stays relative to
    /// the shrinking iterates.
    pub fn iterate_left_null(&self, b: &GridFunction, count: usize) -> Result<Vec<GridFunction>> {
        self.check(b)?;
        let mut out = Vec::with_capacity(count + 1);
        out.push(b.clone());
        for _ in 0..count {
            let prev = out.last().expect("nonempty");
            let s = prev.sup_norm();
            let next = if s == 0.0 {
                GridFunction::zeros(&self.grid)
            } else {
                self.left_null(&prev.scale(1.0 / s))?.samples.scale(s)
            };
            out.push(next);
        }
        Ok(out)
    }

    /// Exact attractor values at the partition nodes:
    /// `x_N` and `x_0` are one-point fixed points of `L_N` and `L_1`, and the
    /// interior node `x_k` (right end of `I_k`) pulls back to `x_N`.
    pub fn node_values(&self, f: &GridFunction, b: &GridFunction) -> Result<Vec<f64>> {
        self.check(f)?;
        self.check(b)?;
        let n = self.grid.partition().count();
        let m = self.grid.resolution();
        let solve = |alpha: f64, fv: f64, bv: f64| {
            let denom = 1.0 - alpha;
            assert!(denom.abs() > 1e-12, "singular node equation (alpha = {alpha})");
            (fv - alpha * bv) / denom
        };
        let (f0, b0) = (f.at_node(0), b.at_node(0));
        let (fl, bl) = (f.at_node(n), b.at_node(n));
        let first = solve(self.alpha_pull[0][0], f0, b0);
        let last = solve(self.alpha_pull[n - 1][m], fl, bl);
        let mut out = Vec::with_capacity(n + 1);
        out.push(first);
        for k in 1..n {
            out.push(f.at_node(k) + self.alpha_pull[k - 1][m] * (last - bl));
        }
        out.push(last);
        Ok(out)
    }
}

/// A full convolution problem: operator plus seed and base, kept both as
/// grid samples and as pointwise-evaluable functions.
#[derive(Clone)]
pub struct ConvolutionConfig {
    op: Arc<RbOperator>,
    seed: SharedFn,
    base: SharedFn,
    f: GridFunction,
    b: GridFunction,
}

/// A push-forward value at an addressed point.
#[derive(Debug, Clone)]
pub struct PushedPoint {
    pub point: AddressedPoint,
    pub value: f64,
}

impl ConvolutionConfig {
    pub fn new(op: Arc<RbOperator>, seed: SharedFn, base: SharedFn) -> Result<Self> {
        let f = GridFunction::sample(op.grid(), seed.as_ref())?;
        let b = GridFunction::sample(op.grid(), base.as_ref())?;
        Ok(Self { op, seed, base, f, b })
    }

    /// Seed and base given only as samples; off-grid values interpolate.
    pub fn from_samples(op: Arc<RbOperator>, f: GridFunction, b: GridFunction) -> Result<Self> {
        op.check(&f)?;
        op.check(&b)?;
        Ok(Self { seed: Arc::new(f.clone()), base: Arc::new(b.clone()), op, f, b })
    }

    pub fn operator(&self) -> &Arc<RbOperator> {
        &self.op
    }

    pub fn seed(&self) -> &GridFunction {
        &self.f
    }

    pub fn base(&self) -> &GridFunction {
        &self.b
    }

    pub fn lambda(&self) -> f64 {
        self.op.lambda()
    }

    pub fn apply_rb_operator(&self, g: &GridFunction) -> Result<GridFunction> {
        self.op.apply(&self.f, &self.b, g)
    }

    pub fn fixed_point(&self) -> Result<Convolution> {
        self.op.convolve(&self.f, &self.b)
    }

    pub fn node_values(&self) -> Result<Vec<f64>> {
        self.op.node_values(&self.f, &self.b)
    }

    pub fn self_residual(&self, g: &GridFunction) -> Result<f64> {
        self.op.self_residual(&self.f, &self.b, g)
    }

    fn step(&self, k: usize, t: f64, x: f64, value_at_t: f64) -> Result<f64> {
        let alpha = self.op.scale().alpha(k).eval(t)?;
        Ok(self.seed.eval(x)? + alpha * (value_at_t - self.base.eval(t)?))
    }

    /// Reads the self-referential equation forwards,
    /// `f~(L_k t) = f(L_k t) + alpha_k(t) (f~(t) - b(t))`, starting from
    /// estimates `base_values` at `base` and producing every depth-`depth`
    /// address point. Errors in the seeds shrink by `lambda^depth`.
    pub fn pushforward_eval(
        &self,
        depth: usize,
        base: &[f64],
        base_values: &[f64],
        cap: usize,
    ) -> Result<Vec<PushedPoint>> {
        if base.len() != base_values.len() {
            return Err(Error::ShapeMismatch("one seed value per base point".into()));
        }
        let maps = self.op.maps();
        let p = maps.partition();
        if let Some(&s) = base.iter().find(|&&s| !p.contains(s)) {
            return Err(Error::OutOfDomain { value: s, lo: p.lo(), hi: p.hi() });
        }
        address_count(maps.count(), depth, base.len(), cap)?;
        let mut level: Vec<PushedPoint> = base
            .iter()
            .zip(base_values)
            .map(|(&s, &v)| PushedPoint {
                point: AddressedPoint { address: Vec::new(), point: s, base: s },
                value: v,
            })
            .collect();
        for _ in 0..depth {
            let mut next = Vec::with_capacity(level.len() * maps.count());
            for k in 0..maps.count() {
                for pp in &level {
                    let t = pp.point.point;
                    let x = maps.forward_unchecked(k, t);
                    let mut address = Vec::with_capacity(pp.point.address.len() + 1);
                    address.push(k);
                    address.extend_from_slice(&pp.point.address);
                    next.push(PushedPoint {
                        value: self.step(k, t, x, pp.value)?,
                        point: AddressedPoint { address, point: x, base: pp.point.base },
                    });
                }
            }
            level = next;
        }
        Ok(level)
    }

    /// Attractor estimates at arbitrary points: each point is pulled back
    /// `depth` times along its own address, seeded with the seed function
    /// there, then pushed forward again. Error is at most
    /// `lambda^depth * lambda / (1 - lambda) * sup |f - b|`.
    pub fn pushforward_at(&self, points: &[f64], depth: usize) -> Result<Vec<f64>> {
        let maps = self.op.maps();
        let p = maps.partition();
        points
            .iter()
            .map(|&x0| {
                let mut path = Vec::with_capacity(depth);
                let mut x = x0;
                for _ in 0..depth {
                    let k = p.locate(x)?;
                    let t = p.snap(maps.inverse_unchecked(k, x));
                    path.push((k, x, t));
                    x = t;
                }
                let mut v = self.seed.eval(x)?;
                for &(k, x, t) in path.iter().rev() {
                    v = self.step(k, t, x, v)?;
                }
                Ok(v)
            })
            .collect()
    }
}
