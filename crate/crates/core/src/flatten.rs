//! Flattening: from the partitions a clustering functor produces across a
//! hyperparameter measure to a single partition.
//!
//! The clusters seen across hyperparameter values form the partition
//! collection. Each cluster is weighted by the measure of the hyperparameters
//! at which it appears, and the heaviest pairwise-disjoint selection is found
//! by solving a binary integer program with
//!
//! ```text
//! c_i = mass_i      A = (M − 1)·I      B_ij = [s_i ∩ s_j ≠ ∅]      u_i = M
//! ```
//!
//! where `M` is the collection size. Row `i` of `A + B` then reads `M` on the
//! diagonal and one for every overlapping set, so `v_i = 1` forces every set
//! overlapping `s_i` to zero.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bayes::{rng_from_seed, ParamMeasure};
use crate::bip::{solve_exact, BinaryIntegerProgram, BipMorphism, BoolMatrix, Matrix, Solution};
use crate::clustering::ClusteringFunctor;
use crate::error::{Error, Result};
use crate::metric::{is_bijection, MetricSpace};
use crate::partition::Partition;

/// How cluster masses are estimated from the measure.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Monte Carlo: draw `n_samples` hyperparameters and count appearances.
    #[default]
    Sampling,
    /// Evaluate every support particle and sum exact weights.
    Particle,
}

/// The distinct clusters produced across hyperparameter draws, with masses.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionCollection {
    n: usize,
    sets: Vec<Vec<usize>>,
    mass: Vec<f64>,
    provenance: Vec<Vec<usize>>,
    draw_weights: Vec<f64>,
    mode: Mode,
}

impl PartitionCollection {
    /// Builds a collection from evaluated draws.
    ///
    /// `draws[t]` is the partition produced at draw `t`, or `None` for draws
    /// that carry no weight; `draw_weights[t]` is that draw's weight.
    fn from_draws(n: usize, draws: &[Option<Partition>], draw_weights: Vec<f64>, mode: Mode) -> Self {
        let mut index: HashMap<&[usize], usize> = HashMap::new();
        let mut sets: Vec<Vec<usize>> = Vec::new();
        let mut provenance: Vec<Vec<usize>> = Vec::new();
        for (t, draw) in draws.iter().enumerate() {
            let Some(part) = draw else { continue };
            for block in part.blocks() {
                let id = *index.entry(block.as_slice()).or_insert_with(|| {
                    sets.push(block.clone());
                    provenance.push(Vec::new());
                    sets.len() - 1
                });
                provenance[id].push(t);
            }
        }
        let n_draws = draws.len() as f64;
        let mass: Vec<f64> = provenance
            .iter()
            .map(|prov| match mode {
                Mode::Sampling => prov.len() as f64 / n_draws,
                Mode::Particle => prov.iter().map(|&t| draw_weights[t]).sum(),
            })
            .collect();

        let mut order: Vec<usize> = (0..sets.len()).collect();
        order.sort_by(|&a, &b| mass[b].total_cmp(&mass[a]).then_with(|| sets[a].cmp(&sets[b])));
        Self {
            n,
            sets: order.iter().map(|&i| sets[i].clone()).collect(),
            mass: order.iter().map(|&i| mass[i]).collect(),
            provenance: order.iter().map(|&i| provenance[i].clone()).collect(),
            draw_weights,
            mode,
        }
    }

    /// Collection of a list of weighted partitions, as in particle mode.
    pub fn from_weighted_partitions(n: usize, parts: &[(Partition, f64)]) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::Empty("partition list"));
        }
        let mut draws = Vec::with_capacity(parts.len());
        let mut weights = Vec::with_capacity(parts.len());
        for (p, w) in parts {
            if p.ground_size() != n {
                return Err(Error::GroundSizeMismatch { left: n, right: p.ground_size() });
            }
            draws.push((*w > 0.0).then(|| p.clone()));
            weights.push(*w);
        }
        Ok(Self::from_draws(n, &draws, weights, Mode::Particle))
    }

    /// A collection with given sets and masses and no draw provenance.
    /// Sets are canonicalized and reordered by descending mass.
    pub fn from_sets(n: usize, sets: Vec<Vec<usize>>, mass: Vec<f64>) -> Result<Self> {
        if sets.len() != mass.len() {
            return Err(Error::DimensionMismatch {
                context: "collection masses",
                expected: sets.len(),
                found: mass.len(),
            });
        }
        if mass.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::NonFinite("collection masses"));
        }
        let mut sets = sets;
        for set in &mut sets {
            if set.is_empty() {
                return Err(Error::InvalidPartition("empty set in collection".into()));
            }
            set.sort_unstable();
            set.dedup();
            if let Some(&x) = set.iter().find(|&&x| x >= n) {
                return Err(Error::IndexOutOfRange { index: x, size: n });
            }
        }
        let mut order: Vec<usize> = (0..sets.len()).collect();
        order.sort_by(|&a, &b| mass[b].total_cmp(&mass[a]).then_with(|| sets[a].cmp(&sets[b])));
        let mut sorted = sets.clone();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidPartition("duplicate set in collection".into()));
        }
        Ok(Self {
            n,
            sets: order.iter().map(|&i| sets[i].clone()).collect(),
            mass: order.iter().map(|&i| mass[i]).collect(),
            provenance: vec![Vec::new(); order.len()],
            draw_weights: Vec::new(),
            mode: Mode::Particle,
        })
    }

    pub fn ground_size(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// Draw indices (samples or particles) in which each set appeared.
    pub fn provenance(&self) -> &[Vec<usize>] {
        &self.provenance
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Weight of the draws in which `self.sets[i]` and `other.sets[j]` both
    /// appeared. Both collections must come from the same draws.
    pub fn joint_mass(&self, other: &PartitionCollection, i: usize, j: usize) -> f64 {
        let (a, b) = (&self.provenance[i], &other.provenance[j]);
        let (mut x, mut y, mut total) = (0, 0, 0.0);
        while x < a.len() && y < b.len() {
            match a[x].cmp(&b[y]) {
                std::cmp::Ordering::Less => x += 1,
                std::cmp::Ordering::Greater => y += 1,
                std::cmp::Ordering::Equal => {
                    total += match self.mode {
                        Mode::Sampling => 1.0 / self.draw_weights.len() as f64,
                        Mode::Particle => self.draw_weights[a[x]],
                    };
                    x += 1;
                    y += 1;
                }
            }
        }
        total
    }

    /// Whether two collections were built from the same draws.
    pub fn shares_draws_with(&self, other: &PartitionCollection) -> bool {
        self.mode == other.mode && self.draw_weights == other.draw_weights
    }

    /// Turns a selection of pairwise-disjoint sets into a partition, adding
    /// each uncovered point as a singleton block flagged as noise.
    pub fn decode(&self, selected: &[usize]) -> Result<Partition> {
        let mut covered = vec![false; self.n];
        let mut blocks = Vec::with_capacity(selected.len());
        for &i in selected {
            let set = self.sets.get(i).ok_or(Error::IndexOutOfRange { index: i, size: self.len() })?;
            for &x in set {
                if covered[x] {
                    return Err(Error::InvalidPartition(format!("selected sets overlap at point {x}")));
                }
                covered[x] = true;
            }
            blocks.push(set.clone());
        }
        let noise: Vec<usize> = (0..self.n).filter(|&x| !covered[x]).collect();
        blocks.extend(noise.iter().map(|&x| vec![x]));
        Partition::new(self.n, blocks)?.with_noise(noise)
    }

    /// Sum of masses of the selected sets, in index order.
    pub fn selection_mass(&self, selected: &[usize]) -> f64 {
        let mut sorted = selected.to_vec();
        sorted.sort_unstable();
        sorted.iter().map(|&i| self.mass[i]).sum()
    }
}

fn evaluate_all(
    functor: &dyn ClusteringFunctor,
    measure: &ParamMeasure,
    space: &MetricSpace,
    which: &[usize],
) -> Result<Vec<Partition>> {
    which
        .par_iter()
        .map(|&i| functor.evaluate(space, &measure.particles()[i].point))
        .collect()
}

/// Evaluates the functor across the measure and collects distinct clusters.
///
/// In sampling mode `n_samples` particles are drawn with the generator from
/// [`rng_from_seed`]`(seed, 0)` and each set's mass is its appearance count
/// divided by `n_samples`; provenance records sample indices. In particle
/// mode every positively weighted particle is evaluated once, masses are
/// exact weight sums, `n_samples` and `seed` are ignored, and provenance
/// records particle indices.
pub fn collect_partitions(
    functor: &dyn ClusteringFunctor,
    measure: &ParamMeasure,
    space: &MetricSpace,
    n_samples: usize,
    seed: u64,
    mode: Mode,
) -> Result<PartitionCollection> {
    if space.is_empty() {
        return Err(Error::Empty("metric space"));
    }
    let support = measure.support();
    if support.is_empty() {
        return Err(Error::InvalidMeasure("empty support".into()));
    }
    match mode {
        Mode::Particle => {
            let parts = evaluate_all(functor, measure, space, &support)?;
            let mut draws: Vec<Option<Partition>> = vec![None; measure.len()];
            for (i, p) in support.iter().zip(parts) {
                draws[*i] = Some(p);
            }
            Ok(PartitionCollection::from_draws(space.len(), &draws, measure.weights(), mode))
        }
        Mode::Sampling => {
            if n_samples == 0 {
                return Err(Error::OutOfRange {
                    name: "n_samples",
                    value: 0.0,
                    range: "[1, inf)",
                });
            }
            let mut rng = rng_from_seed(seed, 0);
            let picks: Vec<usize> = (0..n_samples).map(|_| measure.sample_index(&mut rng)).collect();
            let mut distinct = picks.clone();
            distinct.sort_unstable();
            distinct.dedup();
            let parts = evaluate_all(functor, measure, space, &distinct)?;
            let draws: Vec<Option<Partition>> = picks
                .iter()
                .map(|p| Some(parts[distinct.binary_search(p).expect("pick is distinct")].clone()))
                .collect();
            let weights = vec![1.0 / n_samples as f64; n_samples];
            Ok(PartitionCollection::from_draws(space.len(), &draws, weights, mode))
        }
    }
}

/// The selection program of a collection.
pub fn build_bip(collection: &PartitionCollection) -> Result<BinaryIntegerProgram> {
    let m = collection.len();
    if m == 0 {
        return Err(Error::Empty("partition collection"));
    }
    let mut members = vec![vec![false; collection.n]; m];
    for (i, set) in collection.sets.iter().enumerate() {
        for &x in set {
            members[i][x] = true;
        }
    }
    let mut b = BoolMatrix::zeros(m, m);
    for i in 0..m {
        b.set(i, i, true);
        for j in (i + 1)..m {
            let overlap = collection.sets[j].iter().any(|&x| members[i][x]);
            b.set(i, j, overlap);
            b.set(j, i, overlap);
        }
    }
    BinaryIntegerProgram::new(
        collection.mass.clone(),
        Matrix::rectangular_diagonal(m, m, (m - 1) as f64),
        b,
        vec![m as f64; m],
    )
}

/// Everything computed by one flattening run.
#[derive(Debug, Clone)]
pub struct FlattenOutput {
    pub partition: Partition,
    pub collection: PartitionCollection,
    pub program: BinaryIntegerProgram,
    pub solution: Solution,
}

/// Collects clusters, builds the selection program, solves it exactly and
/// decodes the optimum into a partition.
pub fn flatten_detailed(
    functor: &dyn ClusteringFunctor,
    measure: &ParamMeasure,
    space: &MetricSpace,
    n_samples: usize,
    seed: u64,
    mode: Mode,
) -> Result<FlattenOutput> {
    let collection = collect_partitions(functor, measure, space, n_samples, seed, mode)?;
    let program = build_bip(&collection)?;
    let solution = solve_exact(&program)?;
    let partition = collection.decode(&solution.selected())?;
    Ok(FlattenOutput {
        partition,
        collection,
        program,
        solution,
    })
}

pub fn flatten(
    functor: &dyn ClusteringFunctor,
    measure: &ParamMeasure,
    space: &MetricSpace,
    n_samples: usize,
    seed: u64,
    mode: Mode,
) -> Result<Partition> {
    Ok(flatten_detailed(functor, measure, space, n_samples, seed, mode)?.partition)
}

/// The morphism between the selection programs of `source` and `target`
/// induced by a bijection `f` of their ground sets.
///
/// `joint_mass(i, j)` is the measure of hyperparameters at which
/// `source.sets()[i]` and `target.sets()[j]` both appear. `P_B[j][i]` is set
/// when `f(s_i) ⊆ s_j` and that joint mass is positive.
pub fn build_morphism(
    source: &PartitionCollection,
    target: &PartitionCollection,
    f: &[usize],
    joint_mass: impl Fn(usize, usize) -> f64,
) -> Result<BipMorphism> {
    if source.n != target.n || f.len() != source.n || !is_bijection(f, target.n) {
        return Err(Error::NotBijective);
    }
    let (mx, my) = (source.len(), target.len());
    if my > mx {
        return Err(Error::InvalidMorphism(format!(
            "target collection has {my} sets but source has only {mx}"
        )));
    }
    if mx == 0 {
        return Err(Error::Empty("partition collection"));
    }

    let mut target_member = vec![vec![false; target.n]; my];
    for (j, set) in target.sets.iter().enumerate() {
        for &y in set {
            target_member[j][y] = true;
        }
    }
    let mut p_c = Matrix::zeros(mx, my);
    let mut p_b = BoolMatrix::zeros(my, mx);
    for (i, set) in source.sets.iter().enumerate() {
        for j in 0..my {
            if !set.iter().all(|&x| target_member[j][f[x]]) {
                continue;
            }
            let denom = target.mass[j];
            if denom <= 0.0 {
                return Err(Error::InvalidMorphism(format!(
                    "target set {j} has zero mass but contains the image of source set {i}"
                )));
            }
            let joint = joint_mass(i, j);
            // Containment alone would also link a cluster to the coarser
            // clusters it merges into at other hyperparameters; only pairs
            // that co-occur are kept, which makes the identity map to I.
            if joint > 0.0 {
                p_b.set(j, i, true);
                p_c.set(i, j, joint / denom);
            }
        }
    }
    let a_scale = if mx == 1 {
        1.0
    } else {
        ((my as f64 - 1.0) / (mx as f64 - 1.0)).sqrt()
    };
    let p_a = Matrix::rectangular_diagonal(my, mx, a_scale);
    Ok(BipMorphism {
        p_c,
        p_u: Matrix::rectangular_diagonal(my, mx, my as f64 / mx as f64),
        p_a_star: p_a.transpose(),
        p_a,
        p_b_star: p_b.transpose(),
        p_b,
    })
}

/// [`build_morphism`] with joint masses read from shared draw provenance.
pub fn build_morphism_from_provenance(
    source: &PartitionCollection,
    target: &PartitionCollection,
    f: &[usize],
) -> Result<BipMorphism> {
    if !source.shares_draws_with(target) {
        return Err(Error::InvalidMorphism(
            "collections were not built from the same draws".into(),
        ));
    }
    build_morphism(source, target, f, |i, j| source.joint_mass(target, i, j))
}

/// Result of the tree-traversal flattening.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeFlattenOutput {
    pub partition: Partition,
    /// Selected set indices into the collection, ascending.
    pub selected: Vec<usize>,
    /// Sum of selected masses in index order.
    pub objective: f64,
}

/// Containment forest of a laminar family: `parent[i]` is the smallest set
/// strictly containing set `i`.
fn containment_forest(collection: &PartitionCollection) -> Result<Vec<Option<usize>>> {
    let m = collection.len();
    let mut members = vec![vec![false; collection.n]; m];
    for (i, set) in collection.sets.iter().enumerate() {
        for &x in set {
            members[i][x] = true;
        }
    }
    let mut parent: Vec<Option<usize>> = vec![None; m];
    for i in 0..m {
        for j in 0..m {
            if i == j {
                continue;
            }
            let (si, sj) = (&collection.sets[i], &collection.sets[j]);
            let shared = si.iter().filter(|&&x| members[j][x]).count();
            if shared == 0 {
                continue;
            }
            if shared == si.len() && si.len() < sj.len() {
                // sj strictly contains si
                if parent[i].is_none_or(|p| collection.sets[p].len() > sj.len()) {
                    parent[i] = Some(j);
                }
            } else if shared != sj.len() {
                return Err(Error::NotLaminar(i.min(j), i.max(j)));
            }
        }
    }
    Ok(parent)
}

/// Flattening by bottom-up dynamic programming over the containment forest.
///
/// Requires a one-dimensional hyperparameter space, whose clusters form a
/// laminar family. Uses particle-exact masses. At every node the children are
/// preferred when their best total is at least the node's own mass.
pub fn flatten_tree(
    functor: &dyn ClusteringFunctor,
    measure: &ParamMeasure,
    space: &MetricSpace,
) -> Result<TreeFlattenOutput> {
    if functor.space().dims() != 1 {
        return Err(Error::DimensionMismatch {
            context: "tree flattening needs a totally ordered hyperparameter space",
            expected: 1,
            found: functor.space().dims(),
        });
    }
    let collection = collect_partitions(functor, measure, space, 1, 0, Mode::Particle)?;
    flatten_collection_tree(&collection)
}

/// Tree-traversal flattening of an existing laminar collection.
pub fn flatten_collection_tree(collection: &PartitionCollection) -> Result<TreeFlattenOutput> {
    let m = collection.len();
    if m == 0 {
        return Err(Error::Empty("partition collection"));
    }
    let parent = containment_forest(collection)?;
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (i, p) in parent.iter().enumerate() {
        if let Some(p) = p {
            children[*p].push(i);
        }
    }
    // Children are strictly smaller than parents, so ascending size is a
    // valid bottom-up order.
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by_key(|&i| (collection.sets[i].len(), i));
    let mut best = vec![0.0; m];
    let mut take_self = vec![false; m];
    for &i in &order {
        let below: f64 = children[i].iter().map(|&c| best[c]).sum();
        if children[i].is_empty() || collection.mass[i] > below {
            best[i] = collection.mass[i];
            take_self[i] = true;
        } else {
            best[i] = below;
        }
    }
    let mut selected = Vec::new();
    let mut stack: Vec<usize> = (0..m).filter(|&i| parent[i].is_none()).collect();
    while let Some(i) = stack.pop() {
        if take_self[i] {
            selected.push(i);
        } else {
            stack.extend(&children[i]);
        }
    }
    selected.sort_unstable();
    Ok(TreeFlattenOutput {
        partition: collection.decode(&selected)?,
        objective: collection.selection_mass(&selected),
        selected,
    })
}
