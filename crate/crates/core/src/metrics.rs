//! `L^p` norms, the `d_p` metric for `0 < p < 1`, the `L^2` inner product and
//! distances between finite sets of functions.
//!
//! Integrals use the composite midpoint rule with panels of two fine cells,
//! so integrands are sampled at odd fine-grid indices only. Partition nodes
//! sit at even indices and are never sampled, which keeps the jumps of an
//! attractor at the nodes out of the quadrature. `p = ∞` is the grid max.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::function::GridFunction;

/// How distances are measured.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "p", rename_all = "kebab-case")]
pub enum NormSpec {
    /// `||g||_p`, `1 <= p < ∞`
    Norm(f64),
    /// `d_p(g, h) = ∫ |g - h|^p`, `0 < p < 1`
    Metric(f64),
    /// grid max
    Sup,
}

impl NormSpec {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p <= 0.0 {
            Err(invalid(format!("p must be positive, got {p}")))
        } else if p.is_infinite() {
            Ok(NormSpec::Sup)
        } else if p < 1.0 {
            Ok(NormSpec::Metric(p))
        } else {
            Ok(NormSpec::Norm(p))
        }
    }

    pub fn p(&self) -> f64 {
        match *self {
            NormSpec::Norm(p) | NormSpec::Metric(p) => p,
            NormSpec::Sup => f64::INFINITY,
        }
    }

    /// `||g||_p`, or `d_p(g, 0)` in metric mode.
    pub fn size(&self, g: &GridFunction) -> f64 {
        match *self {
            NormSpec::Norm(p) => lp(g.values(), g, p),
            NormSpec::Metric(p) => integral_pow(g.values(), g, p),
            NormSpec::Sup => g.sup_norm(),
        }
    }

    pub fn distance(&self, g: &GridFunction, h: &GridFunction) -> Result<f64> {
        Ok(self.size(&g.sub(h)?))
    }

    /// The contraction constant as it enters the bounds: `lambda`, or
    /// `lambda^p` in metric mode.
    pub fn effective_lambda(&self, lambda: f64) -> f64 {
        match *self {
            NormSpec::Metric(p) => lambda.powf(p),
            _ => lambda,
        }
    }

    /// Same measure evaluated with the midpoint rule at the resolution the
    /// inverse maps pull the fine grid back to (`m/2` panels over the whole
    /// interval). The gap to [`size`](Self::size) is the quadrature
    /// inconsistency inherited by any inequality derived from the
    /// self-referential equation.
    /// For `p = ∞` it is the max over the pullback points.
    pub fn coarse_size(&self, g: &GridFunction) -> f64 {
        match *self {
            NormSpec::Sup => pullback_max(g),
            NormSpec::Norm(p) => coarse_integral(g, |v| v.abs().powf(p)).powf(1.0 / p),
            NormSpec::Metric(p) => coarse_integral(g, |v| v.abs().powf(p)),
        }
    }

    pub fn quadrature_error(&self, g: &GridFunction) -> f64 {
        (self.size(g) - self.coarse_size(g)).abs()
    }
}

/// `Σ 2 h_k φ(v_i)` over odd fine indices.
fn midpoint_sum(values: &[f64], g: &GridFunction, phi: impl Fn(f64) -> f64) -> f64 {
    let grid = g.grid();
    let m = grid.resolution();
    let n = grid.partition().count();
    let mut total = 0.0;
    for k in 0..n {
        let w = 2.0 * grid.cell_width(k);
        let start = k * m;
        let part: f64 = (0..m / 2).map(|i| phi(values[start + 2 * i + 1])).sum();
        total += w * part;
    }
    total
}

fn pullback_max(g: &GridFunction) -> f64 {
    let grid = g.grid();
    if grid.is_uniform() {
        let n = grid.partition().count();
        g.values().iter().step_by(n).fold(0.0, |acc, v| acc.max(v.abs()))
    } else {
        grid.pullback_points()
            .iter()
            .map(|&t| g.interpolate(t).expect("pullback point lies in the interval").abs())
            .fold(0.0, f64::max)
    }
}

fn coarse_integral(g: &GridFunction, phi: impl Fn(f64) -> f64) -> f64 {
    let grid = g.grid();
    let m = grid.resolution();
    let n = grid.partition().count();
    let panels = m / 2;
    let (lo, len) = (grid.partition().lo(), grid.partition().length());
    let width = len / panels as f64;
    let sum: f64 = (0..panels)
        .map(|i| {
            let v = if grid.is_uniform() {
                g.values()[(2 * i + 1) * n]
            } else {
                g.interpolate(lo + (i as f64 + 0.5) * width).expect("midpoint lies in the interval")
            };
            phi(v)
        })
        .sum();
    width * sum
}

fn integral_pow(values: &[f64], g: &GridFunction, p: f64) -> f64 {
    if p == 1.0 {
        midpoint_sum(values, g, f64::abs)
    } else if p == 2.0 {
        midpoint_sum(values, g, |v| v * v)
    } else {
        midpoint_sum(values, g, |v| v.abs().powf(p))
    }
}

fn lp(values: &[f64], g: &GridFunction, p: f64) -> f64 {
    let s = integral_pow(values, g, p);
    if p == 1.0 {
        s
    } else if p == 2.0 {
        s.sqrt()
    } else {
        s.powf(1.0 / p)
    }
}

/// `||g||_p` for `1 <= p <= ∞`.
pub fn lp_norm(g: &GridFunction, p: f64) -> Result<f64> {
    match NormSpec::new(p)? {
        NormSpec::Metric(p) => Err(invalid(format!("lp_norm needs p >= 1, got {p}; use dp_metric"))),
        spec => Ok(spec.size(g)),
    }
}

/// `d_p(g, h) = ∫ |g - h|^p` for `0 < p < 1`.
pub fn dp_metric(g: &GridFunction, h: &GridFunction, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid(format!("d_p needs 0 < p < 1, got {p}")));
    }
    NormSpec::Metric(p).distance(g, h)
}

/// `∫ g h`.
pub fn inner_product(g: &GridFunction, h: &GridFunction) -> Result<f64> {
    g.check_shape(h)?;
    let (gv, hv) = (g.values(), h.values());
    let grid = g.grid();
    let m = grid.resolution();
    let mut total = 0.0;
    for k in 0..grid.partition().count() {
        let w = 2.0 * grid.cell_width(k);
        let start = k * m;
        let part: f64 = (0..m / 2).map(|i| gv[start + 2 * i + 1] * hv[start + 2 * i + 1]).sum();
        total += w * part;
    }
    Ok(total)
}

/// A nonempty finite set of functions on one grid.
#[derive(Debug, Clone)]
pub struct FunctionSet {
    members: Vec<GridFunction>,
}

impl FunctionSet {
    pub fn new(members: Vec<GridFunction>) -> Result<Self> {
        let first = members.first().ok_or_else(|| invalid("function set is empty"))?;
        if members.iter().any(|g| !g.same_grid(first)) {
            return Err(Error::ShapeMismatch("set members live on different grids".into()));
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[GridFunction] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// `max ||g||` over the set.
    pub fn bound(&self, spec: &NormSpec) -> f64 {
        self.members.iter().map(|g| spec.size(g)).fold(0.0, f64::max)
    }

    fn check(&self, other: &Self) -> Result<()> {
        self.members[0].check_shape(&other.members[0])
    }

    fn distances(&self, other: &Self, spec: &NormSpec) -> Result<Vec<Vec<f64>>> {
        self.check(other)?;
        self.members
            .iter()
            .map(|g| other.members.iter().map(|h| spec.distance(g, h)).collect())
            .collect()
    }
}

/// `δ(A, C) = min ||g - g'||` over `g ∈ A`, `g' ∈ C`.
pub fn set_delta(a: &FunctionSet, c: &FunctionSet, spec: &NormSpec) -> Result<f64> {
    let d = a.distances(c, spec)?;
    Ok(d.iter().flatten().copied().fold(f64::INFINITY, f64::min))
}

/// Directed distance `sup_{g ∈ A} δ(g, C)`.
pub fn directed_hausdorff(a: &FunctionSet, c: &FunctionSet, spec: &NormSpec) -> Result<f64> {
    let d = a.distances(c, spec)?;
    Ok(d.iter()
        .map(|row| row.iter().copied().fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max))
}

pub fn hausdorff(a: &FunctionSet, c: &FunctionSet, spec: &NormSpec) -> Result<f64> {
    Ok(directed_hausdorff(a, c, spec)?.max(directed_hausdorff(c, a, spec)?))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::function::FineGrid;
    use crate::partition::Partition;

    fn grid(lo: f64, hi: f64, n: usize, m: usize) -> Arc<FineGrid> {
        FineGrid::new(Partition::uniform(lo, hi, n).unwrap(), m).unwrap()
    }

    #[test]
    fn norm_examples() {
        let g = grid(0.0, 3.0, 6, 64);
        let one = GridFunction::constant(&g, 1.0);
        assert!((lp_norm(&one, 2.0).unwrap() - 3f64.sqrt()).abs() < 1e-10);

        let m = 64;
        let g01 = grid(0.0, 1.0, 2, m);
        let x = GridFunction::from_fn(&g01, |x| x).unwrap();
        assert!((lp_norm(&x, 1.0).unwrap() - 0.5).abs() <= 1.0 / (m * m) as f64);

        let c = GridFunction::constant(&g, -2.5);
        assert_eq!(lp_norm(&c, f64::INFINITY).unwrap(), 2.5);

        assert!(lp_norm(&one, 0.0).is_err());
        assert!(lp_norm(&one, -1.0).is_err());
        assert!(lp_norm(&one, 0.5).is_err());
    }

    #[test]
    fn dp_examples() {
        let g = grid(0.0, 1.0, 2, 16);
        let zero = GridFunction::zeros(&g);
        let one = GridFunction::constant(&g, 1.0);
        assert!((dp_metric(&zero, &one, 0.5).unwrap() - 1.0).abs() < 1e-14);
        let s = GridFunction::from_fn(&g, |x| (7.0 * x).sin()).unwrap();
        assert_eq!(dp_metric(&s, &s, 0.5).unwrap(), 0.0);
        let t = GridFunction::from_fn(&g, |x| x * x).unwrap();
        let shift = GridFunction::constant(&g, 0.75);
        let base = dp_metric(&s, &t, 0.5).unwrap();
        let shifted = dp_metric(&s.add(&shift).unwrap(), &t.add(&shift).unwrap(), 0.5).unwrap();
        assert!((base - shifted).abs() < 1e-12);
        assert!(dp_metric(&s, &t, 1.0).is_err());
        assert!(dp_metric(&s, &t, 0.0).is_err());
    }

    #[test]
    fn inner_products() {
        let g = grid(0.0, 3.0, 6, 64);
        let one = GridFunction::constant(&g, 1.0);
        assert!((inner_product(&one, &one).unwrap() - 3.0).abs() < 1e-12);
        let w = 2.0 * std::f64::consts::PI / 3.0;
        let c = (2.0f64 / 3.0).sqrt();
        let s = GridFunction::from_fn(&g, |x| c * (w * x).sin()).unwrap();
        let co = GridFunction::from_fn(&g, |x| c * (w * x).cos()).unwrap();
        assert!(inner_product(&s, &co).unwrap().abs() < 1e-8);
        let l2 = lp_norm(&s, 2.0).unwrap();
        assert!((inner_product(&s, &s).unwrap() - l2 * l2).abs() < 1e-14);
    }

    #[test]
    fn quadrature_converges_quadratically_for_smooth_input() {
        let exact = (1.0 - (-3.0f64).exp()) / 1.0; // ∫_0^3 e^{-x} dx
        let mut prev = f64::INFINITY;
        for m in [16, 32, 64, 128] {
            let g = grid(0.0, 3.0, 6, m);
            let f = GridFunction::from_fn(&g, |x| (-x).exp()).unwrap();
            let err = (lp_norm(&f, 1.0).unwrap() - exact).abs();
            if prev.is_finite() {
                let ratio = prev / err;
                assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
            }
            prev = err;
        }
    }

    #[test]
    fn set_distances() {
        let g = grid(0.0, 1.0, 2, 16);
        let spec = NormSpec::new(2.0).unwrap();
        let zero = GridFunction::zeros(&g);
        let b = GridFunction::from_fn(&g, |x| 1.0 + x).unwrap();
        let f = GridFunction::from_fn(&g, |x| x * x).unwrap();
        let s0 = FunctionSet::new(vec![zero.clone()]).unwrap();
        let sb = FunctionSet::new(vec![b.clone()]).unwrap();
        let sf = FunctionSet::new(vec![f.clone()]).unwrap();
        assert!((set_delta(&s0, &sb, &spec).unwrap() - spec.size(&b)).abs() < 1e-15);
        assert_eq!(set_delta(&sb, &sb, &spec).unwrap(), 0.0);
        let dfb = spec.distance(&f, &b).unwrap();
        assert_eq!(set_delta(&sf, &sb, &spec).unwrap(), dfb);
        assert_eq!(hausdorff(&sf, &sb, &spec).unwrap(), dfb);
        let both = FunctionSet::new(vec![zero, f.clone()]).unwrap();
        assert_eq!(hausdorff(&both, &both, &spec).unwrap(), 0.0);
        assert_eq!(hausdorff(&both, &s0, &spec).unwrap(), spec.size(&f));
        assert!(FunctionSet::new(vec![]).is_err());
    }

    #[test]
    fn norm_spec_modes() {
        assert_eq!(NormSpec::new(2.0).unwrap(), NormSpec::Norm(2.0));
        assert_eq!(NormSpec::new(0.5).unwrap(), NormSpec::Metric(0.5));
        assert_eq!(NormSpec::new(f64::INFINITY).unwrap(), NormSpec::Sup);
        assert!(NormSpec::new(0.0).is_err());
        assert!(NormSpec::new(f64::NAN).is_err());
        assert_eq!(NormSpec::Metric(0.5).effective_lambda(0.25), 0.5);
    }
}
