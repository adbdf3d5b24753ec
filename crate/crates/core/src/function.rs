//! Sampled functions on a partition-aligned fine grid, and scale vectors.

use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::expr::Expression;
use crate::partition::Partition;

/// Default number of fine cells per subinterval.
pub const DEFAULT_RESOLUTION: usize = 512;

/// A real function that can be evaluated anywhere on the interval.
pub trait RealFn: Send + Sync {
    fn eval(&self, x: f64) -> Result<f64>;
}

pub type SharedFn = Arc<dyn RealFn>;

impl RealFn for Expression {
    fn eval(&self, x: f64) -> Result<f64> {
        Ok(self.evaluate(x)?)
    }
}

/// Wraps a closure as a [`RealFn`]; non-finite outputs become errors.
pub struct FnOf<F>(pub F);

impl<F: Fn(f64) -> f64 + Send + Sync> RealFn for FnOf<F> {
    fn eval(&self, x: f64) -> Result<f64> {
        let v = (self.0)(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(invalid(format!("function returned {v} at x = {x}")))
        }
    }
}

pub fn shared<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> SharedFn {
    Arc::new(FnOf(f))
}

pub fn constant_fn(c: f64) -> SharedFn {
    shared(move |_| c)
}

/// The fine grid: each subinterval split into `m` equal cells, nodes shared,
/// `N m + 1` points in all.
#[derive(Debug, Clone, PartialEq)]
pub struct FineGrid {
    partition: Partition,
    m: usize,
    xs: Vec<f64>,
    uniform: bool,
}

impl FineGrid {
    /// `m` must be even: the midpoint rule pairs adjacent cells.
    pub fn new(partition: Partition, m: usize) -> Result<Arc<Self>> {
        if m < 2 || !m.is_multiple_of(2) {
            return Err(invalid(format!("cells per subinterval must be even and >= 2, got {m}")));
        }
        let nodes = partition.nodes();
        let mut xs = Vec::with_capacity(partition.count() * m + 1);
        xs.push(nodes[0]);
        for w in nodes.windows(2) {
            let h = (w[1] - w[0]) / m as f64;
            xs.extend((1..m).map(|j| w[0] + j as f64 * h));
            xs.push(w[1]);
        }
        let uniform = partition.is_uniform();
        Ok(Arc::new(Self { partition, m, xs, uniform }))
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    /// Cells per subinterval.
    pub fn resolution(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.xs
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    /// Index of partition node `j` in the fine grid.
    pub fn node_index(&self, j: usize) -> usize {
        j * self.m
    }

    /// Subinterval owning fine point `i` under the half-open convention.
    pub fn owner(&self, i: usize) -> usize {
        if i == 0 {
            0
        } else {
            (i - 1) / self.m
        }
    }

    /// Cell width inside subinterval `k`.
    pub fn cell_width(&self, k: usize) -> f64 {
        let nodes = self.partition.nodes();
        (nodes[k + 1] - nodes[k]) / self.m as f64
    }

    /// The points `t_j = x_0 + j |I| / m`, `j = 0..=m`, onto which the
    /// inverse maps send the fine points of each subinterval. On uniform
    /// partitions these are the fine points with index stride `N`.
    pub fn pullback_points(&self) -> Vec<f64> {
        let n = self.partition.count();
        if self.uniform {
            (0..=self.m).map(|j| self.xs[j * n]).collect()
        } else {
            let (lo, len) = (self.partition.lo(), self.partition.length());
            let mut t: Vec<f64> = (0..=self.m).map(|j| lo + j as f64 * len / self.m as f64).collect();
            t[self.m] = self.partition.hi();
            t
        }
    }

    /// Cell `i` and weight `w` with `x = (1 - w) xs[i] + w xs[i + 1]`.
    pub fn bracket(&self, x: f64) -> Result<(usize, f64)> {
        let k = self.partition.locate(x)?;
        let nodes = self.partition.nodes();
        let h = self.cell_width(k);
        let local = ((x - nodes[k]) / h).floor().clamp(0.0, (self.m - 1) as f64) as usize;
        let i = k * self.m + local;
        let w = ((x - self.xs[i]) / (self.xs[i + 1] - self.xs[i])).clamp(0.0, 1.0);
        Ok((i, w))
    }
}

/// A function sampled on a [`FineGrid`].
#[derive(Clone, PartialEq)]
pub struct GridFunction {
    grid: Arc<FineGrid>,
    values: Vec<f64>,
}

impl fmt::Debug for GridFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GridFunction")
            .field("points", &self.values.len())
            .field("resolution", &self.grid.m)
            .finish()
    }
}

impl GridFunction {
    pub fn new(grid: Arc<FineGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("sample {i} is not finite ({})", values[i])));
        }
        Ok(Self { grid, values })
    }

    pub fn sample(grid: &Arc<FineGrid>, f: &dyn RealFn) -> Result<Self> {
        let values = grid.points().iter().map(|&x| f.eval(x)).collect::<Result<Vec<_>>>()?;
        Self::new(grid.clone(), values)
    }

    pub fn from_fn(grid: &Arc<FineGrid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid.clone(), grid.points().iter().map(|&x| f(x)).collect())
    }

    pub fn constant(grid: &Arc<FineGrid>, c: f64) -> Self {
        Self { grid: grid.clone(), values: vec![c; grid.len()] }
    }

    pub fn zeros(grid: &Arc<FineGrid>) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn grid(&self) -> &Arc<FineGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || self.grid == other.grid
    }

    pub(crate) fn check_shape(&self, other: &Self) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::ShapeMismatch("functions live on different grids".into()))
        }
    }

    /// Value at the `j`-th partition node.
    pub fn at_node(&self, j: usize) -> f64 {
        self.values[self.grid.node_index(j)]
    }

    /// Piecewise-linear interpolation between samples.
    pub fn interpolate(&self, x: f64) -> Result<f64> {
        let (i, w) = self.grid.bracket(x)?;
        Ok(if w == 0.0 { self.values[i] } else { (1.0 - w) * self.values[i] + w * self.values[i + 1] })
    }

    fn zip_with(&self, other: &Self, op: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_shape(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| op(a, b)).collect();
        Self::new(self.grid.clone(), values)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| c * v).collect() }
    }

    /// `c * self + other`
    pub fn axpy(&self, c: f64, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| c * a + b)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sup_distance(&self, other: &Self) -> Result<f64> {
        self.check_shape(other)?;
        Ok(self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }
}

impl RealFn for GridFunction {
    fn eval(&self, x: f64) -> Result<f64> {
        self.interpolate(x)
    }
}

/// Grid surrogate for `esssup |alpha_k|`: the largest `|alpha_k|` over the
/// fine grid and the pullback points, over all `k`.
pub fn compute_lambda(alphas: &[SharedFn], grid: &FineGrid) -> Result<f64> {
    let pull = grid.pullback_points();
    let mut lambda = 0.0f64;
    for alpha in alphas {
        for &x in grid.points().iter().chain(&pull) {
            lambda = lambda.max(alpha.eval(x)?.abs());
        }
    }
    Ok(lambda)
}

/// The scale functions `alpha_1..alpha_N` with their bound `lambda < 1`.
#[derive(Clone)]
pub struct ScaleVector {
    alphas: Vec<SharedFn>,
    lambda: f64,
    spacing: f64,
}

impl fmt::Debug for ScaleVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScaleVector")
            .field("count", &self.alphas.len())
            .field("lambda", &self.lambda)
            .finish()
    }
}

impl ScaleVector {
    pub fn new(alphas: Vec<SharedFn>, grid: &FineGrid) -> Result<Self> {
        let n = grid.partition().count();
        if alphas.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "need {n} scale functions, got {}",
                alphas.len()
            )));
        }
        let lambda = compute_lambda(&alphas, grid)?;
        if lambda >= 1.0 {
            return Err(Error::NotContractive { lambda });
        }
        let spacing = (0..n).map(|k| grid.cell_width(k)).fold(0.0, f64::max);
        Ok(Self { alphas, lambda, spacing })
    }

    /// The same function for every subinterval.
    pub fn replicated(alpha: SharedFn, grid: &FineGrid) -> Result<Self> {
        Self::new(vec![alpha; grid.partition().count()], grid)
    }

    /// Constant scale functions `alpha_k = values[k]`.
    pub fn constants(values: &[f64], grid: &FineGrid) -> Result<Self> {
        Self::new(values.iter().map(|&c| constant_fn(c)).collect(), grid)
    }

    pub fn constant(value: f64, grid: &FineGrid) -> Result<Self> {
        Self::constants(&vec![value; grid.partition().count()], grid)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Largest fine-grid spacing used when estimating `lambda`.
    pub fn grid_spacing(&self) -> f64 {
        self.spacing
    }

    pub fn alphas(&self) -> &[SharedFn] {
        &self.alphas
    }

    pub fn alpha(&self, k: usize) -> &SharedFn {
        &self.alphas[k]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, m: usize) -> Arc<FineGrid> {
        FineGrid::new(Partition::uniform(0.0, 3.0, n).unwrap(), m).unwrap()
    }

    #[test]
    fn fine_grid_contains_nodes() {
        let g = grid(6, 8);
        assert_eq!(g.len(), 49);
        for (j, &node) in g.partition().nodes().iter().enumerate() {
            assert_eq!(g.points()[g.node_index(j)], node);
        }
        assert_eq!(g.owner(0), 0);
        assert_eq!(g.owner(8), 0);
        assert_eq!(g.owner(9), 1);
        assert_eq!(g.owner(48), 5);

        let nonuni = FineGrid::new(Partition::new(vec![0.0, 0.25, 1.0]).unwrap(), 4).unwrap();
        assert_eq!(nonuni.points(), &[0.0, 0.0625, 0.125, 0.1875, 0.25, 0.4375, 0.625, 0.8125, 1.0]);
        assert!(!nonuni.is_uniform());
    }

    #[test]
    fn odd_resolution_is_rejected() {
        let p = Partition::uniform(0.0, 1.0, 2).unwrap();
        assert!(FineGrid::new(p.clone(), 3).is_err());
        assert!(FineGrid::new(p, 0).is_err());
    }

    #[test]
    fn pullback_points_are_grid_points_when_uniform() {
        let g = grid(6, 8);
        let t = g.pullback_points();
        assert_eq!(t.len(), 9);
        for (j, &tj) in t.iter().enumerate() {
            assert!((tj - 3.0 * j as f64 / 8.0).abs() < 1e-15);
            assert_eq!(tj, g.points()[6 * j]);
        }
    }

    #[test]
    fn lambda_examples() {
        let g = grid(6, 16);
        let alpha: SharedFn = Arc::new(Expression::parse("x/8").unwrap());
        assert_eq!(compute_lambda(&vec![alpha.clone(); 6], &g).unwrap(), 0.375);
        assert_eq!(ScaleVector::replicated(alpha, &g).unwrap().lambda(), 0.375);
        assert_eq!(ScaleVector::constant(0.0, &g).unwrap().lambda(), 0.0);
        assert!(matches!(ScaleVector::constant(1.0, &g), Err(Error::NotContractive { .. })));
        assert!(ScaleVector::constants(&[0.1, 0.2], &g).is_err());
    }

    #[test]
    fn linear_space_ops() {
        let g = grid(3, 4);
        let f = GridFunction::from_fn(&g, |x| x * x).unwrap();
        assert_eq!(f.add(&GridFunction::zeros(&g)).unwrap(), f);
        assert_eq!(GridFunction::constant(&g, 1.0).scale(2.0), GridFunction::constant(&g, 2.0));
        assert_eq!(f.sub(&f).unwrap(), GridFunction::zeros(&g));
        let other = GridFunction::zeros(&grid(3, 6));
        assert!(matches!(f.add(&other), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn interpolation_is_exact_at_samples_and_linear_between() {
        let g = FineGrid::new(Partition::new(vec![0.0, 0.25, 1.0]).unwrap(), 4).unwrap();
        let f = GridFunction::from_fn(&g, |x| 2.0 * x + 1.0).unwrap();
        for &x in g.points() {
            assert!((f.interpolate(x).unwrap() - (2.0 * x + 1.0)).abs() < 1e-15);
        }
        assert!((f.interpolate(0.3).unwrap() - 1.6).abs() < 1e-15);
        assert!(f.interpolate(1.5).is_err());
    }

    #[test]
    fn rejects_non_finite_samples() {
        let g = grid(2, 2);
        assert!(GridFunction::new(g.clone(), vec![0.0, 1.0, f64::NAN, 0.0, 0.0]).is_err());
        assert!(GridFunction::new(g, vec![0.0; 4]).is_err());
    }
}
