//! Hyperparameter spaces and the hyperparameter-indexed clustering functors:
//! single linkage and robust single linkage.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{mutual_reachability, MetricSpace};
use crate::partition::Partition;

/// One coordinate axis of a hyperparameter box.
///
/// The interval is `(lo, hi]` unless `closed` is set, in which case it is
/// `[lo, hi]`. `lo == hi` denotes a single point. When `opposite` is set the
/// axis is ordered by `≥` instead of `≤`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    #[serde(default)]
    pub opposite: bool,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub closed: bool,
}

impl Axis {
    /// `(0, 1]` with the reversed order, the axis of every shipped functor.
    pub const UNIT_OP: Axis = Axis {
        lo: 0.0,
        hi: 1.0,
        opposite: true,
        closed: false,
    };

    pub fn contains(&self, x: f64) -> bool {
        if !x.is_finite() {
            return false;
        }
        if self.lo == self.hi {
            return x == self.lo;
        }
        let above_lo = if self.closed { x >= self.lo } else { x > self.lo };
        above_lo && x <= self.hi
    }

    fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite()) {
            return Err(Error::NonFinite("hyperparameter axis bounds"));
        }
        if self.lo > self.hi {
            return Err(Error::OutOfRange {
                name: "axis lower bound",
                value: self.lo,
                range: "lo <= hi",
            });
        }
        Ok(())
    }
}

/// A box of hyperparameters ordered by the product of its axis orders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceRepr")]
pub struct HyperparamSpace {
    axes: Vec<Axis>,
}

#[derive(Deserialize)]
struct SpaceRepr {
    axes: Vec<Axis>,
}

impl TryFrom<SpaceRepr> for HyperparamSpace {
    type Error = Error;

    fn try_from(repr: SpaceRepr) -> Result<Self> {
        HyperparamSpace::new(repr.axes)
    }
}

impl HyperparamSpace {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::Empty("hyperparameter axes"));
        }
        for axis in &axes {
            axis.validate()?;
        }
        Ok(Self { axes })
    }

    /// `((0,1]^op)^dims`.
    pub fn unit_op(dims: usize) -> Self {
        Self {
            axes: vec![Axis::UNIT_OP; dims.max(1)],
        }
    }

    pub fn dims(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn contains(&self, point: &HyperparamPoint) -> bool {
        point.dims() == self.dims()
            && self
                .axes
                .iter()
                .zip(point.coords())
                .all(|(axis, &x)| axis.contains(x))
    }

    /// Checks that `point` lies in the box.
    pub fn check(&self, point: &HyperparamPoint) -> Result<()> {
        if point.dims() != self.dims() {
            return Err(Error::DimensionMismatch {
                context: "hyperparameter point",
                expected: self.dims(),
                found: point.dims(),
            });
        }
        if let Some((_, &value)) = self
            .axes
            .iter()
            .zip(point.coords())
            .find(|(axis, &x)| !axis.contains(x))
        {
            return Err(Error::OutOfRange {
                name: "hyperparameter coordinate",
                value,
                range: "axis interval",
            });
        }
        Ok(())
    }

    /// Maps a point of `[0, 1)^d` into the box: `(lo, hi]` axes are filled
    /// from the top so that the open end is never produced.
    pub fn from_unit_cube(&self, unit: &[f64]) -> HyperparamPoint {
        let coords = self
            .axes
            .iter()
            .zip(unit)
            .map(|(axis, &u)| {
                if axis.closed {
                    axis.lo + u * (axis.hi - axis.lo)
                } else {
                    axis.hi - u * (axis.hi - axis.lo)
                }
            })
            .collect();
        HyperparamPoint::new(coords)
    }
}

/// A point of a hyperparameter space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HyperparamPoint(Vec<f64>);

impl HyperparamPoint {
    pub fn new(coords: Vec<f64>) -> Self {
        Self(coords)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dims(&self) -> usize {
        self.0.len()
    }
}

impl From<Vec<f64>> for HyperparamPoint {
    fn from(coords: Vec<f64>) -> Self {
        Self(coords)
    }
}

/// `a ≤ b` in the product order of `space`, with opposite axes reversed.
pub fn order_leq(space: &HyperparamSpace, a: &HyperparamPoint, b: &HyperparamPoint) -> Result<bool> {
    for p in [a, b] {
        if p.dims() != space.dims() {
            return Err(Error::DimensionMismatch {
                context: "hyperparameter point",
                expected: space.dims(),
                found: p.dims(),
            });
        }
    }
    Ok(space
        .axes
        .iter()
        .zip(a.coords().iter().zip(b.coords()))
        .all(|(axis, (&x, &y))| if axis.opposite { x >= y } else { x <= y }))
}

/// The category of metric maps a functor is known to respect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Category {
    /// All non-expansive maps.
    Met,
    /// Bijective non-expansive maps only.
    MetBij,
}

/// A clustering algorithm indexed by a partially ordered hyperparameter space.
///
/// Implementations are expected to coarsen along the order of
/// [`space`](Self::space) and to send non-expansive maps of the declared
/// [`category`](Self::category) to partition morphisms. Neither property is
/// assumed by the rest of the crate.
pub trait ClusteringFunctor: Send + Sync {
    fn name(&self) -> &str;
    fn space(&self) -> &HyperparamSpace;
    fn category(&self) -> Category;
    fn evaluate(&self, space: &MetricSpace, a: &HyperparamPoint) -> Result<Partition>;
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[x] != root {
            let next = self.parent[x];
            self.parent[x] = root;
            x = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.rank[a] < self.rank[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        if self.rank[a] == self.rank[b] {
            self.rank[a] += 1;
        }
    }
}

/// Connected components of the graph joining points at distance `≤ delta`.
pub fn vr_components(space: &MetricSpace, delta: f64) -> Result<Partition> {
    if delta.is_nan() || delta < 0.0 {
        return Err(Error::OutOfRange {
            name: "delta",
            value: delta,
            range: "[0, inf]",
        });
    }
    let n = space.len();
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for (j, &d) in space.row(i).iter().enumerate().skip(i + 1) {
            if d <= delta {
                uf.union(i, j);
            }
        }
    }
    let mut block_of_root = vec![usize::MAX; n];
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        let root = uf.find(i);
        if block_of_root[root] == usize::MAX {
            block_of_root[root] = blocks.len();
            blocks.push(Vec::new());
        }
        blocks[block_of_root[root]].push(i);
    }
    // Blocks are created in order of their smallest member, members ascending.
    Partition::new(n, blocks)
}

fn check_unit(name: &'static str, a: f64) -> Result<()> {
    if a > 0.0 && a <= 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value: a,
            range: "(0, 1]",
        })
    }
}

/// Components of the `−ln(a)`-Vietoris–Rips complex.
pub fn single_linkage(space: &MetricSpace, a: f64) -> Result<Partition> {
    check_unit("a", a)?;
    vr_components(space, -a.ln())
}

/// Components of the `−ln(a2)`-Vietoris–Rips complex of the
/// mutual-reachability space `(X, d^{a1})`.
pub fn robust_single_linkage(space: &MetricSpace, a1: f64, a2: f64) -> Result<Partition> {
    check_unit("a1", a1)?;
    check_unit("a2", a2)?;
    vr_components(&mutual_reachability(space, a1)?, -a2.ln())
}

/// Single linkage over `(0,1]^op`, functorial over all of `Met`.
#[derive(Debug, Clone)]
pub struct SingleLinkage {
    space: HyperparamSpace,
}

impl Default for SingleLinkage {
    fn default() -> Self {
        Self {
            space: HyperparamSpace::unit_op(1),
        }
    }
}

impl ClusteringFunctor for SingleLinkage {
    fn name(&self) -> &str {
        "single-linkage"
    }

    fn space(&self) -> &HyperparamSpace {
        &self.space
    }

    fn category(&self) -> Category {
        Category::Met
    }

    fn evaluate(&self, space: &MetricSpace, a: &HyperparamPoint) -> Result<Partition> {
        self.space.check(a)?;
        single_linkage(space, a.coords()[0])
    }
}

/// Robust single linkage over `(0,1]^op × (0,1]^op`; the core-distance rank
/// depends on `|X|`, so it is only functorial over bijections.
#[derive(Debug, Clone)]
pub struct RobustSingleLinkage {
    space: HyperparamSpace,
}

impl Default for RobustSingleLinkage {
    fn default() -> Self {
        Self {
            space: HyperparamSpace::unit_op(2),
        }
    }
}

impl ClusteringFunctor for RobustSingleLinkage {
    fn name(&self) -> &str {
        "robust-single-linkage"
    }

    fn space(&self) -> &HyperparamSpace {
        &self.space
    }

    fn category(&self) -> Category {
        Category::MetBij
    }

    fn evaluate(&self, space: &MetricSpace, a: &HyperparamPoint) -> Result<Partition> {
        self.space.check(a)?;
        robust_single_linkage(space, a.coords()[0], a.coords()[1])
    }
}

pub fn make_single_linkage_functor() -> SingleLinkage {
    SingleLinkage::default()
}

pub fn make_robust_sl_functor() -> RobustSingleLinkage {
    RobustSingleLinkage::default()
}

/// Looks up a shipped functor by its command-line name.
pub fn functor_by_name(name: &str) -> Result<Box<dyn ClusteringFunctor>> {
    match name {
        "single-linkage" => Ok(Box::new(make_single_linkage_functor())),
        "robust-single-linkage" => Ok(Box::new(make_robust_sl_functor())),
        other => Err(Error::Unknown {
            kind: "functor",
            name: other.to_string(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> MetricSpace {
        let pts: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        MetricSpace::from_point_cloud(&pts).unwrap()
    }

    fn blocks(p: &Partition) -> Vec<Vec<usize>> {
        p.blocks().to_vec()
    }

    #[test]
    fn order_examples() {
        let o1 = HyperparamSpace::unit_op(1);
        let p = |v: &[f64]| HyperparamPoint::new(v.to_vec());
        assert!(order_leq(&o1, &p(&[0.9]), &p(&[0.5])).unwrap());
        assert!(!order_leq(&o1, &p(&[0.5]), &p(&[0.9])).unwrap());
        let o2 = HyperparamSpace::unit_op(2);
        assert!(!order_leq(&o2, &p(&[0.9, 0.2]), &p(&[0.5, 0.4])).unwrap());
        assert!(!order_leq(&o2, &p(&[0.5, 0.4]), &p(&[0.9, 0.2])).unwrap());
        assert!(order_leq(&o2, &p(&[0.3, 0.3]), &p(&[0.3, 0.3])).unwrap());
        assert!(order_leq(&o2, &p(&[0.3]), &p(&[0.3, 0.3])).is_err());
    }

    #[test]
    fn axis_membership() {
        let axis = Axis::UNIT_OP;
        assert!(axis.contains(1.0));
        assert!(!axis.contains(0.0));
        assert!(!axis.contains(1.5));
        let closed = Axis { closed: true, ..axis };
        assert!(closed.contains(0.0));
        let point = Axis { lo: 0.3, hi: 0.3, opposite: false, closed: false };
        assert!(point.contains(0.3));
    }

    #[test]
    fn vr_examples() {
        let x = line(&[0.0, 1.0, 5.0]);
        assert_eq!(blocks(&vr_components(&x, 2.0).unwrap()), vec![vec![0, 1], vec![2]]);
        assert_eq!(vr_components(&x, 0.0).unwrap(), Partition::singletons(3));
        assert_eq!(vr_components(&x, 5.0).unwrap(), Partition::whole(3));
        assert_eq!(vr_components(&x, f64::INFINITY).unwrap(), Partition::whole(3));
        assert!(vr_components(&x, -1.0).is_err());
    }

    #[test]
    fn single_linkage_examples() {
        let x = line(&[0.0, 1.0, 5.0]);
        assert_eq!(single_linkage(&x, 1.0).unwrap(), Partition::singletons(3));
        assert_eq!(
            blocks(&single_linkage(&x, (-2.0f64).exp()).unwrap()),
            vec![vec![0, 1], vec![2]]
        );
        assert_eq!(single_linkage(&x, (-5.0f64).exp()).unwrap(), Partition::whole(3));
        assert!(single_linkage(&x, 0.0).is_err());
    }

    #[test]
    fn robust_single_linkage_examples() {
        let x = line(&[0.0, 1.0, 3.0]);
        for a2 in [0.9, 0.3, 0.01] {
            assert_eq!(
                robust_single_linkage(&x, 0.2, a2).unwrap(),
                single_linkage(&x, a2).unwrap()
            );
        }
        assert_eq!(
            robust_single_linkage(&x, 0.67, (-3.0f64).exp()).unwrap(),
            Partition::whole(3)
        );
        assert_eq!(
            robust_single_linkage(&x, 0.67, (-2.0f64).exp()).unwrap(),
            Partition::singletons(3)
        );
        assert!(robust_single_linkage(&x, 0.5, 1.5).is_err());
    }

    #[test]
    fn functor_objects() {
        let sl = make_single_linkage_functor();
        assert_eq!(sl.space().dims(), 1);
        assert_eq!(sl.category(), Category::Met);
        let x = line(&[0.0, 1.0, 5.0]);
        assert_eq!(
            sl.evaluate(&x, &HyperparamPoint::new(vec![1.0])).unwrap(),
            Partition::singletons(3)
        );
        assert!(sl.evaluate(&x, &HyperparamPoint::new(vec![1.0, 1.0])).is_err());
        let rsl = make_robust_sl_functor();
        assert_eq!(rsl.space().dims(), 2);
        assert_eq!(rsl.category(), Category::MetBij);
        assert!(functor_by_name("tomato").is_err());
    }
}
