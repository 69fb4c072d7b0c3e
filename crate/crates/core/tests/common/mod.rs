#![allow(dead_code)]

use flatclust::metric::MetricSpace;
use flatclust::partition::Partition;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Every partition of `{0..n}` as a restricted growth string.
pub fn all_label_vectors(n: usize) -> Vec<Vec<usize>> {
    fn grow(prefix: &mut Vec<usize>, max: usize, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for label in 0..=max + 1 {
            prefix.push(label);
            grow(prefix, max.max(label), n, out);
            prefix.pop();
        }
    }
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    let mut prefix = vec![0];
    grow(&mut prefix, 0, n, &mut out);
    out
}

pub fn labels_to_partition(labels: &[usize]) -> Partition {
    Partition::from_labels(&labels.iter().map(|&l| l as i64).collect::<Vec<_>>())
}

pub fn random_partition<R: Rng>(rng: &mut R, n: usize) -> Partition {
    let k = rng.random_range(1..=n);
    let labels: Vec<i64> = (0..n).map(|_| rng.random_range(0..k) as i64).collect();
    Partition::from_labels(&labels)
}

pub fn random_cloud<R: Rng>(rng: &mut R, n: usize, dims: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..dims).map(|_| rng.random::<f64>() * 4.0).collect())
        .collect()
}

pub fn random_space<R: Rng>(rng: &mut R, n: usize, dims: usize) -> MetricSpace {
    MetricSpace::from_point_cloud(&random_cloud(rng, n, dims)).unwrap()
}

/// A hyperparameter in (0, 1].
pub fn unit_param<R: Rng>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

pub fn random_permutation<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// Inverse of a point order: `f[order[i]] = i`.
pub fn inverse(order: &[usize]) -> Vec<usize> {
    let mut f = vec![0; order.len()];
    for (i, &o) in order.iter().enumerate() {
        f[o] = i;
    }
    f
}

/// A source cloud with a non-expansive map onto `target`: point `i` is
/// `target[f(i)]` with extra coordinates appended, so distances can only grow.
pub fn nonexpansive_preimage<R: Rng>(rng: &mut R, target: &[Vec<f64>], f: &[usize], extra: usize) -> Vec<Vec<f64>> {
    f.iter()
        .map(|&y| {
            let mut p = target[y].clone();
            p.extend((0..extra).map(|_| rng.random::<f64>() * 2.0));
            p
        })
        .collect()
}
