//! Interval partitions, the affine maps `L_n` onto the subintervals, and
//! address grids built from compositions of those maps.
//!
//! Subintervals are indexed from zero here: subinterval `k` is the closed
//! interval `[x_0, x_1]` for `k = 0` and the half-open `(x_k, x_{k+1}]`
//! otherwise. Map `k` sends the whole interval onto subinterval `k`.

use crate::error::{invalid, Error, Result};

/// Default cap on the number of points an address grid may hold.
pub const DEFAULT_ADDRESS_CAP: usize = 1 << 22;

/// Relative distance under which a point is snapped onto a node.
const SNAP: f64 = 1e-12;

/// Strictly increasing nodes `x_0 < x_1 < ... < x_N` with `N >= 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    nodes: Vec<f64>,
}

impl Partition {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(invalid(format!(
                "a partition needs at least 2 subintervals, got {}",
                nodes.len().saturating_sub(1)
            )));
        }
        if nodes.iter().any(|x| !x.is_finite()) {
            return Err(invalid("partition nodes must be finite"));
        }
        if let Some(w) = nodes.windows(2).position(|w| w[0] >= w[1]) {
            return Err(invalid(format!(
                "partition nodes must be strictly increasing (node {} = {} >= node {} = {})",
                w,
                nodes[w],
                w + 1,
                nodes[w + 1]
            )));
        }
        Ok(Self { nodes })
    }

    /// Equally spaced nodes `lo + j (hi - lo) / n`.
    pub fn uniform(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(invalid("interval bounds must be finite"));
        }
        if lo >= hi {
            return Err(invalid(format!("empty interval [{lo}, {hi}]")));
        }
        if n < 2 {
            return Err(invalid(format!("need at least 2 subintervals, got {n}")));
        }
        let width = hi - lo;
        let mut nodes: Vec<f64> = (0..=n).map(|j| lo + j as f64 * width / n as f64).collect();
        nodes[n] = hi;
        Self::new(nodes)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Number of subintervals `N`.
    pub fn count(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn lo(&self) -> f64 {
        self.nodes[0]
    }

    pub fn hi(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn length(&self) -> f64 {
        self.hi() - self.lo()
    }

    /// True when all subintervals have the same width up to roundoff.
    pub fn is_uniform(&self) -> bool {
        let step = self.length() / self.count() as f64;
        self.nodes
            .windows(2)
            .all(|w| ((w[1] - w[0]) - step).abs() <= SNAP * self.length())
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo() && x <= self.hi()
    }

    /// Zero-based index of the subinterval holding `x`: `x_0` and every
    /// node `x_{k+1}` belong to subinterval `k`.
    pub fn locate(&self, x: f64) -> Result<usize> {
        if !self.contains(x) {
            return Err(Error::OutOfDomain { value: x, lo: self.lo(), hi: self.hi() });
        }
        // first node index j >= 1 with x <= nodes[j]
        let j = self.nodes[1..].partition_point(|&node| node < x);
        Ok(j)
    }

    /// Clamp `x` into the interval and snap it onto a node when it lies
    /// within roundoff of one.
    pub fn snap(&self, x: f64) -> f64 {
        let tol = SNAP * self.length();
        let x = x.clamp(self.lo(), self.hi());
        let j = self.nodes.partition_point(|&node| node < x);
        for k in [j.saturating_sub(1), j.min(self.nodes.len() - 1)] {
            if (self.nodes[k] - x).abs() <= tol {
                return self.nodes[k];
            }
        }
        x
    }
}

/// The affinities `L_k(t) = a_k t + c_k` with `L_k(x_0) = x_k` and
/// `L_k(x_N) = x_{k+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMaps {
    partition: Partition,
    slopes: Vec<f64>,
    intercepts: Vec<f64>,
}

impl AffineMaps {
    pub fn new(partition: &Partition) -> Self {
        let (lo, len) = (partition.lo(), partition.length());
        let (slopes, intercepts) = partition
            .nodes()
            .windows(2)
            .map(|w| {
                let a = (w[1] - w[0]) / len;
                (a, w[0] - a * lo)
            })
            .unzip();
        Self { partition: partition.clone(), slopes, intercepts }
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn count(&self) -> usize {
        self.slopes.len()
    }

    pub fn slope(&self, k: usize) -> f64 {
        self.slopes[k]
    }

    pub fn intercept(&self, k: usize) -> f64 {
        self.intercepts[k]
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    fn check_index(&self, k: usize) -> Result<()> {
        if k >= self.count() {
            return Err(invalid(format!("map index {k} out of range 0..{}", self.count())));
        }
        Ok(())
    }

    /// `L_k(t)` for `t` in the whole interval. Exact at the endpoints.
    pub fn forward(&self, k: usize, t: f64) -> Result<f64> {
        self.check_index(k)?;
        let p = &self.partition;
        if !p.contains(t) {
            return Err(Error::OutOfDomain { value: t, lo: p.lo(), hi: p.hi() });
        }
        Ok(self.forward_unchecked(k, t))
    }

    pub(crate) fn forward_unchecked(&self, k: usize, t: f64) -> f64 {
        let nodes = self.partition.nodes();
        if t == self.partition.lo() {
            return nodes[k];
        }
        if t == self.partition.hi() {
            return nodes[k + 1];
        }
        (self.slopes[k] * t + self.intercepts[k]).clamp(nodes[k], nodes[k + 1])
    }

    /// `L_k^{-1}(x)` for `x` in `[x_k, x_{k+1}]`. Exact at the endpoints.
    pub fn inverse(&self, k: usize, x: f64) -> Result<f64> {
        self.check_index(k)?;
        let nodes = self.partition.nodes();
        if !(nodes[k]..=nodes[k + 1]).contains(&x) {
            return Err(Error::OutOfDomain { value: x, lo: nodes[k], hi: nodes[k + 1] });
        }
        Ok(self.inverse_unchecked(k, x))
    }

    pub(crate) fn inverse_unchecked(&self, k: usize, x: f64) -> f64 {
        let nodes = self.partition.nodes();
        if x == nodes[k] {
            return self.partition.lo();
        }
        if x == nodes[k + 1] {
            return self.partition.hi();
        }
        ((x - self.intercepts[k]) / self.slopes[k]).clamp(self.partition.lo(), self.partition.hi())
    }
}

/// A point `L_{w_1} ∘ ... ∘ L_{w_k}(s)` together with its word `w` and the
/// base point `s` it was generated from.
#[derive(Debug, Clone, PartialEq)]
pub struct AddressedPoint {
    pub address: Vec<usize>,
    pub point: f64,
    pub base: f64,
}

impl AddressedPoint {
    pub fn depth(&self) -> usize {
        self.address.len()
    }
}

pub(crate) fn address_count(maps: usize, depth: usize, bases: usize, cap: usize) -> Result<usize> {
    let requested = (maps as u128)
        .checked_pow(depth as u32)
        .and_then(|c| c.checked_mul(bases as u128))
        .unwrap_or(u128::MAX);
    if requested > cap as u128 {
        return Err(Error::AddressCap { requested, cap });
    }
    Ok(requested as usize)
}

/// Every word of length `depth` applied to every base point, words in
/// lexicographic order with the outermost map first.
pub fn address_grid(
    maps: &AffineMaps,
    depth: usize,
    base: &[f64],
    cap: usize,
) -> Result<Vec<AddressedPoint>> {
    let p = maps.partition();
    if let Some(&s) = base.iter().find(|&&s| !p.contains(s)) {
        return Err(Error::OutOfDomain { value: s, lo: p.lo(), hi: p.hi() });
    }
    address_count(maps.count(), depth, base.len(), cap)?;
    let mut level: Vec<AddressedPoint> = base
        .iter()
        .map(|&s| AddressedPoint { address: Vec::new(), point: s, base: s })
        .collect();
    for _ in 0..depth {
        let mut next = Vec::with_capacity(level.len() * maps.count());
        for k in 0..maps.count() {
            for ap in &level {
                let mut address = Vec::with_capacity(ap.address.len() + 1);
                address.push(k);
                address.extend_from_slice(&ap.address);
                next.push(AddressedPoint {
                    address,
                    point: maps.forward_unchecked(k, ap.point),
                    base: ap.base,
                });
            }
        }
        level = next;
    }
    Ok(level)
}
