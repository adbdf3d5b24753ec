//! Convolved families of functions and their finite-section Bessel, Riesz
//! and frame bounds.
//!
//! Bounds are certified on finite sections only: the Gram matrix of the
//! first `m` members is assembled with the midpoint inner product and its
//! extreme eigenvalues are the best constants `A`, `B` with
//! `A |c|^2 <= ||Σ c_i g_i||^2 <= B |c|^2` for that section.

use std::f64::consts::PI;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::engine::RbOperator;
use crate::error::{invalid, Error, Result};
use crate::function::{FineGrid, GridFunction, ScaleVector};
use crate::metrics::{inner_product, NormSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    /// `0 *_T b_m`
    LeftNull,
    /// `f_m *_T 0`
    RightNull,
    /// `b_m - 0 *_T b_m`
    Difference,
}

impl FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left-null" => Ok(Side::LeftNull),
            "right-null" => Ok(Side::RightNull),
            "difference" => Ok(Side::Difference),
            other => Err(invalid(format!(
                "unknown side '{other}' (expected left-null, right-null or difference)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Trig,
    Custom,
    Convolved(Side),
    Union,
}

/// An ordered family of functions on one grid.
#[derive(Debug, Clone)]
pub struct FunctionFamily {
    members: Vec<GridFunction>,
    provenance: Provenance,
    /// per-member scale bound when the family was convolved
    scales: Option<Vec<f64>>,
}

impl FunctionFamily {
    pub fn new(members: Vec<GridFunction>, provenance: Provenance) -> Result<Self> {
        if let Some(first) = members.first() {
            if members.iter().any(|g| !g.same_grid(first)) {
                return Err(Error::ShapeMismatch("family members live on different grids".into()));
            }
        }
        Ok(Self { members, provenance, scales: None })
    }

    pub fn custom(members: Vec<GridFunction>) -> Result<Self> {
        Self::new(members, Provenance::Custom)
    }

    pub fn empty() -> Self {
        Self { members: Vec::new(), provenance: Provenance::Custom, scales: None }
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

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn scales(&self) -> Option<&[f64]> {
        self.scales.as_deref()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            members: self.members.iter().map(|g| g.scale(c)).collect(),
            provenance: Provenance::Custom,
            scales: None,
        }
    }
}

/// The first `count` members of the normalised trigonometric system on the
/// grid's interval: `1/√L`, then `√(2/L) cos(2πk(x-x_0)/L)` and
/// `√(2/L) sin(2πk(x-x_0)/L)` for `k = 1, 2, ...`.
pub fn trig_basis(count: usize, grid: &Arc<FineGrid>) -> Result<FunctionFamily> {
    if count < 1 {
        return Err(invalid("a trigonometric family needs at least one member"));
    }
    let (lo, len) = (grid.partition().lo(), grid.partition().length());
    let c0 = 1.0 / len.sqrt();
    let c = (2.0 / len).sqrt();
    let members = (0..count)
        .map(|i| {
            if i == 0 {
                return Ok(GridFunction::constant(grid, c0));
            }
            let k = i.div_ceil(2) as f64;
            let w = 2.0 * PI * k / len;
            if i % 2 == 1 {
                GridFunction::from_fn(grid, |x| c * (w * (x - lo)).cos())
            } else {
                GridFunction::from_fn(grid, |x| c * (w * (x - lo)).sin())
            }
        })
        .collect::<Result<Vec<_>>>()?;
    FunctionFamily::new(members, Provenance::Trig)
}

/// Which scale bounds the members of a convolved family use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "c")]
pub enum ScheduleKind {
    /// `lambda_m = c / m`
    #[serde(rename = "c/m")]
    OverM(f64),
    #[serde(rename = "const")]
    Constant(f64),
}

impl FromStr for ScheduleKind {
    type Err = Error;

    /// `c/m:C` or `const:L`
    fn from_str(s: &str) -> Result<Self> {
        let (kind, value) = s
            .split_once(':')
            .ok_or_else(|| invalid(format!("schedule '{s}' must look like c/m:C or const:L")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| invalid(format!("bad schedule parameter '{value}'")))?;
        match kind.trim() {
            "c/m" => Ok(ScheduleKind::OverM(value)),
            "const" => Ok(ScheduleKind::Constant(value)),
            other => Err(invalid(format!("unknown schedule kind '{other}'"))),
        }
    }
}

/// Explicit per-member scale bounds, realised as constant scale functions
/// `alpha_k^m ≡ lambda_m`.
pub fn lambda_schedule(kind: ScheduleKind, count: usize) -> Result<Vec<f64>> {
    let values: Vec<f64> = (1..=count)
        .map(|m| match kind {
            ScheduleKind::OverM(c) => c / m as f64,
            ScheduleKind::Constant(l) => l,
        })
        .collect();
    if let Some((m, &l)) = values.iter().enumerate().find(|(_, l)| !(0.0..1.0).contains(*l)) {
        return Err(invalid(format!("schedule value lambda_{} = {l} is outside [0, 1)", m + 1)));
    }
    Ok(values)
}

fn member_operator(template: &RbOperator, lambda: f64) -> Result<RbOperator> {
    let scale = ScaleVector::constant(lambda, template.grid())?;
    RbOperator::with_tolerance(template.grid().clone(), scale, template.tol(), template.max_iter())
}

/// Member-wise `0*b_m`, `f_m*0` or `b_m - 0*b_m`. Without a schedule every
/// member uses `op`; with one, member `m` uses constant scale `lambda_m` on
/// the same partition.
pub fn convolve_family(
    fam: &FunctionFamily,
    side: Side,
    op: &RbOperator,
    schedule: Option<&[f64]>,
) -> Result<FunctionFamily> {
    if let Some(s) = schedule {
        if s.len() < fam.len() {
            return Err(invalid(format!("schedule has {} values for {} members", s.len(), fam.len())));
        }
        if let Some(&l) = s.iter().find(|l| !(0.0..1.0).contains(*l)) {
            return Err(Error::NotContractive { lambda: l });
        }
    }
    let mut members = Vec::with_capacity(fam.len());
    let mut scales = Vec::with_capacity(fam.len());
    for (i, g) in fam.members().iter().enumerate() {
        let owned;
        let member_op = match schedule {
            Some(s) => {
                owned = member_operator(op, s[i])?;
                &owned
            }
            None => op,
        };
        let out = match side {
            Side::LeftNull => member_op.left_null(g)?.samples,
            Side::RightNull => member_op.right_null(g)?.samples,
            Side::Difference => g.sub(&member_op.left_null(g)?.samples)?,
        };
        members.push(out);
        scales.push(member_op.lambda());
    }
    let mut out = FunctionFamily::new(members, Provenance::Convolved(side))?;
    out.scales = Some(scales);
    Ok(out)
}

/// Concatenation of two families on the same grid.
pub fn union_family(a: &FunctionFamily, b: &FunctionFamily) -> Result<FunctionFamily> {
    if let (Some(x), Some(y)) = (a.members.first(), b.members.first()) {
        x.check_shape(y)?;
    }
    let members: Vec<GridFunction> = a.members.iter().chain(&b.members).cloned().collect();
    let provenance = if b.is_empty() {
        a.provenance.clone()
    } else if a.is_empty() {
        b.provenance.clone()
    } else {
        Provenance::Union
    };
    FunctionFamily::new(members, provenance)
}

/// Dense symmetric matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    n: usize,
    data: Vec<f64>,
}

impl GramMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::ShapeMismatch("matrix must be square".into()));
        }
        Ok(Self { n, data: rows.concat() })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.n.max(1))
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// `G_ij = <g_i, g_j>`; only the upper triangle is integrated, so the
/// result is exactly symmetric.
pub fn gram_matrix(fam: &FunctionFamily) -> Result<GramMatrix> {
    let n = fam.len();
    if n == 0 {
        return Err(invalid("Gram matrix of an empty family"));
    }
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = inner_product(&fam.members[i], &fam.members[j])?;
            data[i * n + j] = v;
            data[j * n + i] = v;
        }
    }
    Ok(GramMatrix { n, data })
}

const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, run until
/// the off-diagonal Frobenius mass is at most `1e-12 ||G||_F`. Sorted
/// ascending.
pub fn symmetric_eigenvalues(g: &GramMatrix) -> Result<Vec<f64>> {
    let n = g.n;
    let norm = g.frobenius();
    for i in 0..n {
        for j in i + 1..n {
            let gap = (g.get(i, j) - g.get(j, i)).abs();
            if gap > 1e-12 * norm.max(1.0) {
                return Err(Error::NotSymmetric { row: i, col: j, gap });
            }
        }
    }
    let mut a: Vec<Vec<f64>> = g.rows().map(|r| r.to_vec()).collect();
    let threshold = 1e-12 * norm;
    let off = |a: &Vec<Vec<f64>>| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i][j] * a[i][j];
                }
            }
        }
        s.sqrt()
    };
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off(&a) <= threshold {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                a[p][p] -= t * apq;
                a[q][q] += t * apq;
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let (arp, arq) = (a[r][p], a[r][q]);
                    a[r][p] = c * arp - s * arq;
                    a[p][r] = a[r][p];
                    a[r][q] = s * arp + c * arq;
                    a[q][r] = a[r][q];
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// Extreme Gram eigenvalues of a finite section.
#[derive(Debug, Clone, Serialize)]
pub struct RieszBounds {
    pub size: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub spectrum: Vec<f64>,
}

pub fn riesz_bounds(fam: &FunctionFamily) -> Result<RieszBounds> {
    let spectrum = symmetric_eigenvalues(&gram_matrix(fam)?)?;
    Ok(RieszBounds {
        size: spectrum.len(),
        lambda_min: spectrum[0],
        lambda_max: spectrum[spectrum.len() - 1],
        spectrum,
    })
}

/// Interval that must contain the Gram spectrum of a convolved orthonormal
/// family, from the operator-norm bounds of the partial convolutions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralEnvelope {
    pub lower: Option<f64>,
    pub upper: f64,
}

impl SpectralEnvelope {
    /// `constant_modulus`: every `alpha_k` is the constant `±lambda`, which
    /// the lower bounds of the left-null and difference sides need.
    pub fn for_side(side: Side, lambda: f64, constant_modulus: bool) -> Self {
        let sq = |v: f64| v * v;
        match side {
            Side::LeftNull => SpectralEnvelope {
                lower: (constant_modulus && lambda > 0.0).then(|| sq(lambda / (1.0 + lambda))),
                upper: sq(lambda / (1.0 - lambda)),
            },
            Side::RightNull => {
                SpectralEnvelope { lower: Some(sq(1.0 / (1.0 + lambda))), upper: sq(1.0 / (1.0 - lambda)) }
            }
            Side::Difference => SpectralEnvelope {
                lower: constant_modulus.then(|| sq(1.0 / (1.0 + lambda))),
                upper: sq(1.0 / (1.0 - lambda)),
            },
        }
    }

    pub fn contains(&self, bounds: &RieszBounds, tol: f64) -> bool {
        bounds.lambda_max <= self.upper + tol && self.lower.is_none_or(|lo| bounds.lambda_min >= lo - tol)
    }
}

/// `R = Σ (lambda_m / (1 - lambda_m))^2 ||f_m||_2^2` against the measured
/// `Σ ||f_m *_T 0 - f_m||_2^2`.
#[derive(Debug, Clone, Serialize)]
pub struct PerturbationReport {
    pub r: f64,
    pub empirical: f64,
    pub partial_sums: Vec<f64>,
    pub empirical_terms: Vec<f64>,
}

impl PerturbationReport {
    pub fn empirical_within(&self, tol: f64) -> bool {
        self.empirical <= self.r + tol
    }

    /// First member index at which the partial sums reach `a`.
    pub fn diverges_at(&self, a: f64) -> Option<usize> {
        self.partial_sums.iter().position(|&s| s >= a)
    }
}

pub fn perturbation_r(fam: &FunctionFamily, schedule: &[f64], template: &RbOperator) -> Result<PerturbationReport> {
    if schedule.len() < fam.len() {
        return Err(invalid(format!("schedule has {} values for {} members", schedule.len(), fam.len())));
    }
    let l2 = NormSpec::Norm(2.0);
    let convolved = convolve_family(fam, Side::RightNull, template, Some(schedule))?;
    let mut r = 0.0;
    let mut partial_sums = Vec::with_capacity(fam.len());
    let mut empirical_terms = Vec::with_capacity(fam.len());
    for ((f, g), &lambda) in fam.members().iter().zip(convolved.members()).zip(schedule) {
        let norm = l2.size(f);
        r += (lambda / (1.0 - lambda)).powi(2) * norm * norm;
        partial_sums.push(r);
        empirical_terms.push(l2.distance(g, f)?.powi(2));
    }
    Ok(PerturbationReport { r, empirical: empirical_terms.iter().sum(), partial_sums, empirical_terms })
}

/// Perturbed frame bounds `A (1 - √(R/A))^2` and `B (1 + √(R/B))^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameReport {
    pub a: f64,
    pub b: f64,
    pub r: f64,
    pub a_prime: f64,
    pub b_prime: f64,
    pub feasible: bool,
}

/// `R >= A` is reported as infeasible (with `A' = 0`), not as an error.
pub fn frame_perturbation_bounds(a: f64, b: f64, r: f64) -> Result<FrameReport> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(invalid(format!("frame bounds must be positive, got A = {a}, B = {b}")));
    }
    if !(r >= 0.0 && r.is_finite()) {
        return Err(invalid(format!("perturbation sum must be non-negative, got {r}")));
    }
    let feasible = r < a;
    let a_prime = if feasible { a * (1.0 - (r / a).sqrt()).powi(2) } else { 0.0 };
    let b_prime = b * (1.0 + (r / b).sqrt()).powi(2);
    Ok(FrameReport { a, b, r, a_prime, b_prime, feasible })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::Partition;

    fn grid(m: usize) -> Arc<FineGrid> {
        FineGrid::new(Partition::uniform(0.0, 3.0, 6).unwrap(), m).unwrap()
    }

    fn max_dev_from_identity(g: &GramMatrix) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..g.size() {
            for j in 0..g.size() {
                let id = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g.get(i, j) - id).abs());
            }
        }
        worst
    }

    #[test]
    fn trig_family_is_orthonormal() {
        let g = grid(64);
        let one = trig_basis(1, &g).unwrap();
        assert!((one.members()[0].values()[0] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        let fam = trig_basis(8, &g).unwrap();
        assert!(max_dev_from_identity(&gram_matrix(&fam).unwrap()) < 1e-8);
        for m in fam.members() {
            assert!((NormSpec::Norm(2.0).size(m) - 1.0).abs() < 1e-10);
        }
        assert!(trig_basis(0, &g).is_err());
    }

    #[test]
    fn gram_examples() {
        let g = grid(16);
        let h = GridFunction::from_fn(&g, |x| x - 1.0).unwrap();
        let single = FunctionFamily::custom(vec![h.clone()]).unwrap();
        let n2 = NormSpec::Norm(2.0).size(&h).powi(2);
        assert!((gram_matrix(&single).unwrap().get(0, 0) - n2).abs() < 1e-14);

        let fam = trig_basis(5, &g).unwrap();
        let base = gram_matrix(&fam).unwrap();
        let doubled = gram_matrix(&fam.scaled(2.0)).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert!((doubled.get(i, j) - 4.0 * base.get(i, j)).abs() < 1e-13);
            }
        }
        assert!(gram_matrix(&FunctionFamily::empty()).is_err());
    }

    #[test]
    fn jacobi_small_cases() {
        let id = GramMatrix::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
        assert_eq!(symmetric_eigenvalues(&id).unwrap(), vec![1.0; 3]);
        let d = GramMatrix::from_rows(&[vec![4.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(symmetric_eigenvalues(&d).unwrap(), vec![1.0, 4.0]);
        let a = GramMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let e = symmetric_eigenvalues(&a).unwrap();
        assert!((e[0] - 1.0).abs() < 1e-12 && (e[1] - 3.0).abs() < 1e-12);
        let bad = GramMatrix::from_rows(&[vec![2.0, 1.0], vec![0.0, 2.0]]).unwrap();
        assert!(matches!(symmetric_eigenvalues(&bad), Err(Error::NotSymmetric { .. })));
        assert!(GramMatrix::from_rows(&[vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn schedules() {
        let s = lambda_schedule(ScheduleKind::OverM(0.3), 3).unwrap();
        for (v, want) in s.iter().zip([0.3, 0.15, 0.1]) {
            assert!((v - want).abs() < 1e-16);
        }
        assert_eq!(lambda_schedule(ScheduleKind::Constant(0.0), 4).unwrap(), vec![0.0; 4]);
        assert!(lambda_schedule(ScheduleKind::OverM(1.2), 1).is_err());
        assert!(lambda_schedule(ScheduleKind::Constant(-0.1), 1).is_err());
        assert_eq!("c/m:0.3".parse::<ScheduleKind>().unwrap(), ScheduleKind::OverM(0.3));
        assert_eq!("const:0.2".parse::<ScheduleKind>().unwrap(), ScheduleKind::Constant(0.2));
        assert!("linear:0.2".parse::<ScheduleKind>().is_err());
        assert!("c/m".parse::<ScheduleKind>().is_err());
    }

    #[test]
    fn frame_bounds_formula() {
        let r = frame_perturbation_bounds(1.0, 1.0, 0.25).unwrap();
        assert_eq!((r.a_prime, r.b_prime), (0.25, 2.25));
        assert!(r.feasible);
        let r = frame_perturbation_bounds(0.7, 1.3, 0.0).unwrap();
        assert_eq!((r.a_prime, r.b_prime), (0.7, 1.3));
        let r = frame_perturbation_bounds(1.0, 2.0, 1.0).unwrap();
        assert_eq!(r.a_prime, 0.0);
        assert!(!r.feasible);
        assert!(frame_perturbation_bounds(0.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn null_scale_families() {
        let g = grid(32);
        let fam = trig_basis(6, &g).unwrap();
        let op = RbOperator::new(g.clone(), ScaleVector::constant(0.0, &g).unwrap()).unwrap();
        let left = convolve_family(&fam, Side::LeftNull, &op, None).unwrap();
        assert!(left.members().iter().all(|m| m.sup_norm() == 0.0));
        let right = convolve_family(&fam, Side::RightNull, &op, None).unwrap();
        assert_eq!(right.members(), fam.members());
        let b = riesz_bounds(&right).unwrap();
        assert!((b.lambda_min - 1.0).abs() < 1e-10 && (b.lambda_max - 1.0).abs() < 1e-10);
    }

    #[test]
    fn union_with_duplicate_has_zero_and_two() {
        let g = grid(32);
        let fam = trig_basis(4, &g).unwrap();
        assert_eq!(union_family(&fam, &FunctionFamily::empty()).unwrap().members(), fam.members());
        let u = union_family(&fam, &fam).unwrap();
        let e = riesz_bounds(&u).unwrap().spectrum;
        for v in &e[..4] {
            assert!(v.abs() < 1e-10);
        }
        for v in &e[4..] {
            assert!((v - 2.0).abs() < 1e-10);
        }
    }

    #[test]
    fn perturbation_sums() {
        let g = grid(32);
        let fam = trig_basis(4, &g).unwrap();
        let op = RbOperator::new(g.clone(), ScaleVector::constant(0.0, &g).unwrap()).unwrap();
        let zero = perturbation_r(&fam, &[0.0; 4], &op).unwrap();
        assert_eq!(zero.r, 0.0);
        assert!(zero.empirical < 1e-20);
        let third = perturbation_r(&fam, &[1.0 / 3.0; 4], &op).unwrap();
        assert!((third.r - 1.0).abs() < 1e-9);
        assert!(third.empirical_within(1e-9));
        assert_eq!(third.diverges_at(0.4), Some(1));
    }
}
