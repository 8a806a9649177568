//! Point clouds, measures, kernels, Gram and cost matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Result, UotError};
use crate::linalg::{symmetric_eigenvalues, DenseMatrix};
use crate::scalar::Scalar;

/// Eigenvalues at or below this are treated as a rank-deficient Gram matrix.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// Finite points of a common dimension, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud<T> {
    dim: usize,
    coords: Vec<T>,
}

impl<T: Scalar> PointCloud<T> {
    pub fn new(points: &[Vec<T>]) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| UotError::input("point cloud is empty"))?;
        let dim = first.len();
        if dim == 0 {
            return Err(UotError::input("points must have dimension >= 1"));
        }
        let mut coords = Vec::with_capacity(points.len() * dim);
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(UotError::dimension(format!(
                    "point {i} has dimension {}, expected {dim}",
                    p.len()
                )));
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(UotError::input(format!("point {i} has a non-finite coordinate")));
            }
            coords.extend_from_slice(p);
        }
        Ok(PointCloud { dim, coords })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn count(&self) -> usize {
        self.coords.len() / self.dim
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[T] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn point_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[T]> {
        self.coords.chunks(self.dim)
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.points().map(<[T]>::to_vec).collect()
    }

    /// Source and target stacked into one cloud.
    pub fn pooled(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(UotError::dimension(format!(
                "cannot pool clouds of dimension {} and {}",
                self.dim, other.dim
            )));
        }
        let mut coords = self.coords.clone();
        coords.extend_from_slice(&other.coords);
        Ok(PointCloud { dim: self.dim, coords })
    }
}

/// Nonnegative masses attached to the points of a cloud (not necessarily normalized).
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure<T> {
    weights: Vec<T>,
}

impl<T: Scalar> DiscreteMeasure<T> {
    pub fn new(weights: Vec<T>) -> Result<Self> {
        if let Some(i) = weights.iter().position(|w| !w.is_finite() || *w < T::zero()) {
            return Err(UotError::input(format!(
                "weight {i} is negative or non-finite"
            )));
        }
        Ok(DiscreteMeasure { weights })
    }

    /// `1/n` on each of `n` points.
    pub fn uniform(n: usize) -> Self {
        let w = T::one() / T::of_usize(n.max(1));
        DiscreteMeasure {
            weights: vec![w; n],
        }
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total_mass(&self) -> T {
        self.weights.iter().copied().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelFamily {
    /// `exp(-d²/2σ²)`
    Rbf,
    /// `(σ² + d²)^-1/2`
    Imq,
    /// `((1 + d²)/σ²)^-1/2`
    ImqV2,
}

impl KernelFamily {
    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::Rbf => "rbf",
            KernelFamily::Imq => "imq",
            KernelFamily::ImqV2 => "imq-v2",
        }
    }
}

impl std::str::FromStr for KernelFamily {
    type Err = UotError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rbf" | "gaussian" => Ok(KernelFamily::Rbf),
            "imq" => Ok(KernelFamily::Imq),
            "imq-v2" | "imq_v2" | "imqv2" => Ok(KernelFamily::ImqV2),
            other => Err(UotError::input(format!("unknown kernel family '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec<T> {
    pub family: KernelFamily,
    /// σ²
    pub bandwidth: T,
}

impl<T: Scalar> KernelSpec<T> {
    pub fn new(family: KernelFamily, bandwidth: T) -> Result<Self> {
        if !(bandwidth > T::zero()) || !bandwidth.is_finite() {
            return Err(UotError::input(format!(
                "kernel bandwidth must be positive and finite, got {bandwidth}"
            )));
        }
        Ok(KernelSpec { family, bandwidth })
    }

    /// Kernel as a function of the squared distance.
    #[inline]
    pub fn of_sq_dist(&self, d2: T) -> T {
        let s2 = self.bandwidth;
        match self.family {
            KernelFamily::Rbf => (-d2 / (T::lit(2.0) * s2)).exp(),
            KernelFamily::Imq => T::one() / (s2 + d2).sqrt(),
            KernelFamily::ImqV2 => T::one() / ((T::one() + d2) / s2).sqrt(),
        }
    }
}

pub fn squared_distance<T: Scalar>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).map(|(&a, &b)| (a - b) * (a - b)).sum()
}

pub fn kernel_eval<T: Scalar>(spec: &KernelSpec<T>, x: &[T], y: &[T]) -> Result<T> {
    if x.len() != y.len() {
        return Err(UotError::dimension(format!(
            "kernel arguments have dimensions {} and {}",
            x.len(),
            y.len()
        )));
    }
    Ok(spec.of_sq_dist(squared_distance(x, y)))
}

/// Symmetric kernel matrix with its extreme eigenvalues cached at construction.
#[derive(Debug, Clone)]
pub struct GramMatrix<T> {
    entries: DenseMatrix<T>,
    eig_min: T,
    eig_max: T,
}

impl<T: Scalar> GramMatrix<T> {
    /// Wraps a user-supplied matrix; it must be square and symmetric to 1e-12.
    pub fn from_matrix(entries: DenseMatrix<T>) -> Result<Self> {
        if entries.rows() != entries.cols() || entries.rows() == 0 {
            return Err(UotError::dimension(format!(
                "Gram matrix must be square and nonempty, got {}x{}",
                entries.rows(),
                entries.cols()
            )));
        }
        if entries.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(UotError::input("Gram matrix has non-finite entries"));
        }
        if entries.max_asymmetry() > T::lit(1e-12) {
            return Err(UotError::input("Gram matrix is not symmetric"));
        }
        let eig = symmetric_eigenvalues(&entries)?;
        let eig_min = eig[0];
        let eig_max = eig[eig.len() - 1];
        Ok(GramMatrix {
            entries,
            eig_min,
            eig_max,
        })
    }

    pub fn identity(n: usize) -> Self {
        GramMatrix {
            entries: DenseMatrix::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() }),
            eig_min: T::one(),
            eig_max: T::one(),
        }
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.entries.rows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries.get(i, j)
    }

    pub fn matrix(&self) -> &DenseMatrix<T> {
        &self.entries
    }

    pub fn eig_min(&self) -> T {
        self.eig_min
    }

    pub fn eig_max(&self) -> T {
        self.eig_max
    }

    /// Smallest eigenvalue is numerically zero (e.g. duplicate points).
    pub fn is_degenerate(&self) -> bool {
        self.eig_min <= T::lit(DEGENERACY_TOL)
    }
}

pub fn gram_matrix<T: Scalar>(spec: &KernelSpec<T>, cloud: &PointCloud<T>) -> Result<GramMatrix<T>> {
    let n = cloud.count();
    let mut m = DenseMatrix::zeros(n, n);
    for i in 0..n {
        m.set(i, i, spec.of_sq_dist(T::zero()));
        for j in (i + 1)..n {
            let k = spec.of_sq_dist(squared_distance(cloud.point(i), cloud.point(j)));
            m.set(i, j, k);
            m.set(j, i, k);
        }
    }
    GramMatrix::from_matrix(m)
}

/// Cross-kernel matrix `k(xᵢ, yⱼ)`.
pub fn cross_kernel<T: Scalar>(
    spec: &KernelSpec<T>,
    source: &PointCloud<T>,
    target: &PointCloud<T>,
) -> Result<DenseMatrix<T>> {
    if source.dim() != target.dim() {
        return Err(UotError::dimension("source and target dimensions differ"));
    }
    Ok(DenseMatrix::from_fn(source.count(), target.count(), |i, j| {
        spec.of_sq_dist(squared_distance(source.point(i), target.point(j)))
    }))
}

/// Median of squared distances over all unordered distinct index pairs of the pooled clouds.
///
/// Even counts take the lower middle value. Zero-distance pairs are kept.
pub fn median_heuristic<T: Scalar>(source: &PointCloud<T>, target: &PointCloud<T>) -> Result<T> {
    let pooled = source.pooled(target)?;
    let n = pooled.count();
    if n < 2 {
        return Err(UotError::input("median heuristic needs at least two points"));
    }
    let mut d2 = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            d2.push(squared_distance(pooled.point(i), pooled.point(j)));
        }
    }
    d2.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
    let med = d2[(d2.len() - 1) / 2];
    if !(med > T::zero()) {
        return Err(UotError::input(
            "median heuristic produced a zero bandwidth (too many identical points)",
        ));
    }
    Ok(med)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostKind {
    SquaredEuclidean,
    Cosine,
}

impl std::str::FromStr for CostKind {
    type Err = UotError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "squared-euclidean" | "sqeuclidean" | "euclidean2" => Ok(CostKind::SquaredEuclidean),
            "cosine" => Ok(CostKind::Cosine),
            other => Err(UotError::input(format!("unknown cost kind '{other}'"))),
        }
    }
}

/// Nonnegative m×n transport cost.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix<T> {
    entries: DenseMatrix<T>,
}

impl<T: Scalar> CostMatrix<T> {
    pub fn from_matrix(entries: DenseMatrix<T>) -> Result<Self> {
        if entries.rows() == 0 || entries.cols() == 0 {
            return Err(UotError::dimension("cost matrix is empty"));
        }
        if let Some(p) = entries
            .as_slice()
            .iter()
            .position(|c| !c.is_finite() || *c < T::zero())
        {
            return Err(UotError::input(format!(
                "cost entry ({}, {}) is negative or non-finite",
                p / entries.cols(),
                p % entries.cols()
            )));
        }
        Ok(CostMatrix { entries })
    }

    pub fn rows(&self) -> usize {
        self.entries.rows()
    }

    pub fn cols(&self) -> usize {
        self.entries.cols()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries.get(i, j)
    }

    pub fn matrix(&self) -> &DenseMatrix<T> {
        &self.entries
    }

    /// Divides every entry by the largest one; a no-op for the all-zero matrix.
    pub fn normalized(&self) -> Self {
        let max = self.entries.max_entry().unwrap_or_else(T::zero);
        if max > T::zero() {
            let data = self.entries.as_slice().iter().map(|&c| c / max).collect();
            CostMatrix {
                entries: DenseMatrix::from_row_major(self.rows(), self.cols(), data)
                    .expect("same shape"),
            }
        } else {
            self.clone()
        }
    }
}

pub fn cost_matrix<T: Scalar>(
    kind: CostKind,
    source: &PointCloud<T>,
    target: &PointCloud<T>,
    normalize: bool,
) -> Result<CostMatrix<T>> {
    if source.dim() != target.dim() {
        return Err(UotError::dimension(format!(
            "source dimension {} differs from target dimension {}",
            source.dim(),
            target.dim()
        )));
    }
    let entries = match kind {
        CostKind::SquaredEuclidean => DenseMatrix::from_fn(source.count(), target.count(), |i, j| {
            squared_distance(source.point(i), target.point(j))
        }),
        CostKind::Cosine => {
            let norms = |c: &PointCloud<T>, side: &str| -> Result<Vec<T>> {
                c.points()
                    .enumerate()
                    .map(|(i, p)| {
                        let nrm = p.iter().map(|&v| v * v).sum::<T>().sqrt();
                        if nrm > T::zero() {
                            Ok(nrm)
                        } else {
                            Err(UotError::input(format!(
                                "{side} point {i} has zero norm; cosine cost undefined"
                            )))
                        }
                    })
                    .collect()
            };
            let ns = norms(source, "source")?;
            let nt = norms(target, "target")?;
            DenseMatrix::from_fn(source.count(), target.count(), |i, j| {
                let cos = crate::linalg::dot(source.point(i), target.point(j)) / (ns[i] * nt[j]);
                // rounding can push 1 - cos slightly below zero
                (T::one() - cos).max(T::zero())
            })
        }
    };
    let c = CostMatrix::from_matrix(entries)?;
    Ok(if normalize { c.normalized() } else { c })
}
