//! Finite metric spaces, maps between them, and the mutual-reachability
//! transform used by robust single linkage.
//!
//! All tolerance checks in this module are absolute and equal to [`TOLERANCE`].

use crate::error::{Error, Result};

/// Absolute tolerance used for symmetry, triangle and non-expansiveness checks.
pub const TOLERANCE: f64 = 1e-9;

/// A finite set of points together with a symmetric distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpace {
    point_ids: Vec<String>,
    n: usize,
    dist: Vec<f64>,
}

impl MetricSpace {
    /// Euclidean metric on a point cloud. Duplicate points are allowed.
    pub fn from_point_cloud<P: AsRef<[f64]>>(points: &[P]) -> Result<Self> {
        let first = points.first().ok_or(Error::Empty("point cloud"))?;
        let dim = first.as_ref().len();
        for p in points {
            let p = p.as_ref();
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    context: "point coordinates",
                    expected: dim,
                    found: p.len(),
                });
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite("point coordinates"));
            }
        }
        let n = points.len();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = euclidean(points[i].as_ref(), points[j].as_ref());
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        Ok(Self {
            point_ids: default_ids(n),
            n,
            dist,
        })
    }

    /// Wraps a square distance matrix, symmetrizing it by averaging.
    ///
    /// Asymmetry beyond [`TOLERANCE`], negative entries and a nonzero diagonal
    /// are rejected. The triangle inequality is checked only when
    /// `validate_triangle` is set.
    pub fn from_distance_matrix<R: AsRef<[f64]>>(
        matrix: &[R],
        validate_triangle: bool,
    ) -> Result<Self> {
        let n = matrix.len();
        if n == 0 {
            return Err(Error::Empty("distance matrix"));
        }
        let mut dist = vec![0.0; n * n];
        for (i, row) in matrix.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    context: "distance matrix row",
                    expected: n,
                    found: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite("distance matrix"));
                }
                dist[i * n + j] = v;
            }
        }
        for i in 0..n {
            let dii = dist[i * n + i];
            if dii.abs() > TOLERANCE {
                return Err(Error::InvalidDistance { i, j: i, value: dii });
            }
            dist[i * n + i] = 0.0;
            for j in (i + 1)..n {
                let (dij, dji) = (dist[i * n + j], dist[j * n + i]);
                if (dij - dji).abs() > TOLERANCE {
                    return Err(Error::Asymmetric { i, j, dij, dji });
                }
                if dij < 0.0 || dji < 0.0 {
                    let value = dij.min(dji);
                    return Err(Error::InvalidDistance { i, j, value });
                }
                let avg = 0.5 * (dij + dji);
                dist[i * n + j] = avg;
                dist[j * n + i] = avg;
            }
        }
        let space = Self {
            point_ids: default_ids(n),
            n,
            dist,
        };
        if validate_triangle {
            space.check_triangle()?;
        }
        Ok(space)
    }

    /// Replaces the default `"0".."n-1"` identifiers.
    pub fn with_point_ids(mut self, ids: Vec<String>) -> Result<Self> {
        if ids.len() != self.n {
            return Err(Error::DimensionMismatch {
                context: "point ids",
                expected: self.n,
                found: ids.len(),
            });
        }
        self.point_ids = ids;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn point_ids(&self) -> &[String] {
        &self.point_ids
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    /// Row `i` of the distance matrix.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.dist[i * self.n..(i + 1) * self.n]
    }

    /// Distance matrix as nested rows.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    /// Same points with every distance multiplied by `factor` (must be ≥ 0).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor >= 0.0) {
            return Err(Error::OutOfRange {
                name: "scale factor",
                value: factor,
                range: "[0, inf)",
            });
        }
        Ok(Self {
            point_ids: self.point_ids.clone(),
            n: self.n,
            dist: self.dist.iter().map(|d| d * factor).collect(),
        })
    }

    /// Relabels points: point `i` of the result is point `order[i]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.n {
            return Err(Error::DimensionMismatch {
                context: "permutation",
                expected: self.n,
                found: order.len(),
            });
        }
        if !is_bijection(order, self.n) {
            return Err(Error::NotBijective);
        }
        let n = self.n;
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                dist[i * n + j] = self.dist(order[i], order[j]);
            }
        }
        Ok(Self {
            point_ids: order.iter().map(|&o| self.point_ids[o].clone()).collect(),
            n,
            dist,
        })
    }

    fn check_triangle(&self) -> Result<()> {
        let n = self.n;
        for i in 0..n {
            for k in 0..n {
                let direct = self.dist(i, k);
                for j in 0..n {
                    let detour = self.dist(i, j) + self.dist(j, k);
                    if direct > detour + TOLERANCE {
                        return Err(Error::TriangleViolation {
                            i,
                            j,
                            k,
                            direct,
                            detour,
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

fn default_ids(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn is_bijection(mapping: &[usize], target_size: usize) -> bool {
    if mapping.len() != target_size {
        return false;
    }
    let mut seen = vec![false; target_size];
    for &m in mapping {
        if m >= target_size || seen[m] {
            return false;
        }
        seen[m] = true;
    }
    true
}

/// A function between the point sets of two metric spaces.
#[derive(Debug, Clone)]
pub struct MetricMap<'a> {
    source: &'a MetricSpace,
    target: &'a MetricSpace,
    mapping: Vec<usize>,
}

impl<'a> MetricMap<'a> {
    pub fn new(source: &'a MetricSpace, target: &'a MetricSpace, mapping: Vec<usize>) -> Result<Self> {
        if mapping.len() != source.len() {
            return Err(Error::DimensionMismatch {
                context: "map domain",
                expected: source.len(),
                found: mapping.len(),
            });
        }
        if let Some(&index) = mapping.iter().find(|&&m| m >= target.len()) {
            return Err(Error::IndexOutOfRange {
                index,
                size: target.len(),
            });
        }
        Ok(Self {
            source,
            target,
            mapping,
        })
    }

    /// The identity map of a space onto a space of the same size.
    pub fn identity(source: &'a MetricSpace, target: &'a MetricSpace) -> Result<Self> {
        Self::new(source, target, (0..source.len()).collect())
    }

    pub fn source(&self) -> &'a MetricSpace {
        self.source
    }

    pub fn target(&self) -> &'a MetricSpace {
        self.target
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    pub fn is_bijective(&self) -> bool {
        is_bijection(&self.mapping, self.target.len())
    }

    /// `other ∘ self`. Fails unless `other` starts where `self` ends.
    pub fn then(&self, other: &MetricMap<'a>) -> Result<MetricMap<'a>> {
        if !std::ptr::eq(self.target, other.source) && self.target != other.source {
            return Err(Error::DimensionMismatch {
                context: "map composition",
                expected: self.target.len(),
                found: other.source.len(),
            });
        }
        let mapping = self.mapping.iter().map(|&i| other.mapping[i]).collect();
        MetricMap::new(self.source, other.target, mapping)
    }
}

/// True iff `d_Y(f(x_i), f(x_j)) ≤ d_X(x_i, x_j) + TOLERANCE` for every pair.
pub fn check_nonexpansive(f: &MetricMap<'_>) -> bool {
    let (x, y, m) = (f.source, f.target, &f.mapping);
    (0..x.len()).all(|i| {
        ((i + 1)..x.len()).all(|j| y.dist(m[i], m[j]) <= x.dist(i, j) + TOLERANCE)
    })
}

fn check_density_param(a1: f64) -> Result<()> {
    if a1 > 0.0 && a1 <= 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name: "a1",
            value: a1,
            range: "(0, 1]",
        })
    }
}

/// Neighbour rank used by [`core_distance`]: `floor(a1·|X|)` clamped to `|X| − 1`.
pub fn neighbor_rank(n: usize, a1: f64) -> usize {
    let k = (a1 * n as f64).floor() as usize;
    k.min(n.saturating_sub(1))
}

/// Distance from each point to its k-th nearest *other* point, with
/// `k = floor(a1·|X|)` clamped to `|X| − 1`. A rank of zero yields zero.
pub fn core_distance(space: &MetricSpace, a1: f64) -> Result<Vec<f64>> {
    check_density_param(a1)?;
    let n = space.len();
    let k = neighbor_rank(n, a1);
    if k == 0 {
        return Ok(vec![0.0; n]);
    }
    let mut scratch = Vec::with_capacity(n);
    Ok((0..n)
        .map(|i| {
            scratch.clear();
            scratch.extend(
                space
                    .row(i)
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &d)| d),
            );
            let (_, kth, _) = scratch.select_nth_unstable_by(k - 1, f64::total_cmp);
            *kth
        })
        .collect())
}

/// The mutual-reachability space `(X, d^{a1})` where
/// `d^{a1}(x, y) = max(d(x, y), core(x), core(y))` off the diagonal.
///
/// The result can break the triangle inequality; it is not re-validated.
pub fn mutual_reachability(space: &MetricSpace, a1: f64) -> Result<MetricSpace> {
    let core = core_distance(space, a1)?;
    let n = space.len();
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = space.dist(i, j).max(core[i]).max(core[j]);
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    Ok(MetricSpace {
        point_ids: space.point_ids.clone(),
        n,
        dist,
    })
}
