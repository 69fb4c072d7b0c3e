//! Partitions of `{0, …, n−1}`, partition morphisms, the Rand-index
//! likelihood over all partitions of a ground set, and the adjusted Rand score.

use std::collections::HashMap;
use std::sync::OnceLock;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest ground size accepted by [`bell_ratio`].
pub const MAX_BELL_N: usize = 500;

/// A partition of `{0, …, n−1}` kept in canonical form: members ascending
/// within each block, blocks ordered by their smallest member.
///
/// `noise` lists points that were completed as singleton blocks because no
/// selected cluster covered them.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PartitionRepr", into = "PartitionRepr")]
pub struct Partition {
    n: usize,
    blocks: Vec<Vec<usize>>,
    noise: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct PartitionRepr {
    n: usize,
    blocks: Vec<Vec<usize>>,
    #[serde(default)]
    noise: Vec<usize>,
}

impl TryFrom<PartitionRepr> for Partition {
    type Error = Error;

    fn try_from(repr: PartitionRepr) -> Result<Self> {
        Partition::new(repr.n, repr.blocks)?.with_noise(repr.noise)
    }
}

impl From<Partition> for PartitionRepr {
    fn from(p: Partition) -> Self {
        PartitionRepr {
            n: p.n,
            blocks: p.blocks,
            noise: p.noise,
        }
    }
}

impl Partition {
    /// Validates and canonicalizes `blocks` as a partition of `{0, …, n−1}`.
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n];
        let mut blocks = blocks;
        for block in &mut blocks {
            if block.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            for &x in block.iter() {
                if x >= n {
                    return Err(Error::IndexOutOfRange { index: x, size: n });
                }
                if seen[x] {
                    return Err(Error::InvalidPartition(format!(
                        "point {x} appears in more than one block"
                    )));
                }
                seen[x] = true;
            }
            block.sort_unstable();
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidPartition(format!("point {missing} not covered")));
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        Ok(Self {
            n,
            blocks,
            noise: Vec::new(),
        })
    }

    /// Builds a partition from one label per point. Points with a negative
    /// label become singleton blocks flagged as noise.
    pub fn from_labels(labels: &[i64]) -> Self {
        let n = labels.len();
        let mut by_label: HashMap<i64, Vec<usize>> = HashMap::new();
        let mut blocks = Vec::new();
        let mut noise = Vec::new();
        for (i, &label) in labels.iter().enumerate() {
            if label < 0 {
                blocks.push(vec![i]);
                noise.push(i);
            } else {
                by_label.entry(label).or_default().push(i);
            }
        }
        blocks.extend(by_label.into_values());
        blocks.sort_unstable_by_key(|b| b[0]);
        Self { n, blocks, noise }
    }

    /// Every point in its own block.
    pub fn singletons(n: usize) -> Self {
        Self {
            n,
            blocks: (0..n).map(|i| vec![i]).collect(),
            noise: Vec::new(),
        }
    }

    /// One block containing every point (no blocks when `n == 0`).
    pub fn whole(n: usize) -> Self {
        let blocks = if n == 0 { vec![] } else { vec![(0..n).collect()] };
        Self {
            n,
            blocks,
            noise: Vec::new(),
        }
    }

    /// Marks points as noise. Each must already be a singleton block.
    pub fn with_noise(mut self, mut noise: Vec<usize>) -> Result<Self> {
        noise.sort_unstable();
        noise.dedup();
        let labels = self.labels();
        for &p in &noise {
            if p >= self.n {
                return Err(Error::IndexOutOfRange { index: p, size: self.n });
            }
            if self.blocks[labels[p]].len() != 1 {
                return Err(Error::InvalidPartition(format!(
                    "noise point {p} is not a singleton block"
                )));
            }
        }
        self.noise = noise;
        Ok(self)
    }

    pub fn ground_size(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn noise(&self) -> &[usize] {
        &self.noise
    }

    pub fn is_noise(&self, point: usize) -> bool {
        self.noise.binary_search(&point).is_ok()
    }

    /// Drops the noise flags, keeping the blocks.
    pub fn without_noise(&self) -> Self {
        Self {
            n: self.n,
            blocks: self.blocks.clone(),
            noise: Vec::new(),
        }
    }

    /// Same blocks, regardless of noise flags.
    pub fn same_blocks(&self, other: &Partition) -> bool {
        self.n == other.n && self.blocks == other.blocks
    }

    /// Block index of every point (blocks numbered in canonical order).
    pub fn labels(&self) -> Vec<usize> {
        let mut labels = vec![0; self.n];
        for (b, block) in self.blocks.iter().enumerate() {
            for &x in block {
                labels[x] = b;
            }
        }
        labels
    }

    /// Number of unordered pairs of distinct points sharing a block.
    pub fn co_clustered_pairs(&self) -> u64 {
        self.blocks
            .iter()
            .map(|b| choose2(b.len() as u64))
            .sum()
    }
}

fn choose2(k: u64) -> u64 {
    k * k.saturating_sub(1) / 2
}

fn check_same_size(p: &Partition, q: &Partition) -> Result<usize> {
    if p.n != q.n {
        return Err(Error::GroundSizeMismatch { left: p.n, right: q.n });
    }
    Ok(p.n)
}

/// True iff every block of `p` is mapped by `f` into a single block of `q`.
pub fn is_partition_morphism(f: &[usize], p: &Partition, q: &Partition) -> Result<bool> {
    if f.len() != p.n {
        return Err(Error::DimensionMismatch {
            context: "partition morphism domain",
            expected: p.n,
            found: f.len(),
        });
    }
    if let Some(&index) = f.iter().find(|&&y| y >= q.n) {
        return Err(Error::IndexOutOfRange { index, size: q.n });
    }
    let q_labels = q.labels();
    Ok(p.blocks.iter().all(|block| {
        let target = q_labels[f[block[0]]];
        block.iter().all(|&x| q_labels[f[x]] == target)
    }))
}

/// True iff every block of `p` lies inside some block of `q`.
pub fn refines(p: &Partition, q: &Partition) -> Result<bool> {
    check_same_size(p, q)?;
    let identity: Vec<usize> = (0..p.n).collect();
    is_partition_morphism(&identity, p, q)
}

fn bell_table() -> &'static [BigUint] {
    static TABLE: OnceLock<Vec<BigUint>> = OnceLock::new();
    TABLE.get_or_init(|| {
        // Bell triangle: each row starts with the last entry of the previous
        // row; the first entry of row n is B_n.
        let mut bells = Vec::with_capacity(MAX_BELL_N + 1);
        let mut row = vec![BigUint::one()];
        bells.push(BigUint::one());
        for _ in 0..MAX_BELL_N {
            let mut next = Vec::with_capacity(row.len() + 1);
            next.push(row.last().cloned().unwrap_or_else(BigUint::zero));
            for entry in &row {
                let value = next.last().unwrap() + entry;
                next.push(value);
            }
            bells.push(next[0].clone());
            row = next;
        }
        bells
    })
}

/// Exact Bell number `B_n` for `n ≤ MAX_BELL_N`.
pub fn bell_number(n: usize) -> Result<BigUint> {
    if n > MAX_BELL_N {
        return Err(Error::OutOfRange {
            name: "n",
            value: n as f64,
            range: "[0, 500]",
        });
    }
    Ok(bell_table()[n].clone())
}

/// Ratio of two big integers as a float, exact up to rounding of the result.
fn big_ratio(num: &BigUint, den: &BigUint) -> f64 {
    let shift = den.bits().saturating_sub(96);
    let num = (num >> shift).to_f64().unwrap_or(f64::INFINITY);
    let den = (den >> shift).to_f64().unwrap_or(f64::INFINITY);
    num / den
}

/// Natural log of a positive big integer.
fn big_ln(x: &BigUint) -> f64 {
    let shift = x.bits().saturating_sub(64);
    let top = (x >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `B_{n−1} / B_n` for `1 ≤ n ≤ 500`.
pub fn bell_ratio(n: usize) -> Result<f64> {
    if n == 0 || n > MAX_BELL_N {
        return Err(Error::OutOfRange {
            name: "n",
            value: n as f64,
            range: "[1, 500]",
        });
    }
    let table = bell_table();
    Ok(big_ratio(&table[n - 1], &table[n]))
}

/// Pair-agreement counts between an observed and a produced partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairCounts {
    /// Pairs co-clustered by both partitions.
    pub both: u64,
    /// Pairs co-clustered by neither partition.
    pub neither: u64,
    /// Pairs co-clustered by the produced partition.
    pub produced_together: u64,
    /// All unordered pairs of distinct points.
    pub total: u64,
}

/// Counts unordered pairs co-clustered in both / neither partition.
pub fn pair_counts(observed: &Partition, produced: &Partition) -> Result<PairCounts> {
    let n = check_same_size(observed, produced)?;
    let obs = observed.labels();
    let prod = produced.labels();
    let mut both = 0;
    let mut neither = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            match (obs[i] == obs[j], prod[i] == prod[j]) {
                (true, true) => both += 1,
                (false, false) => neither += 1,
                _ => {}
            }
        }
    }
    let total = choose2(n as u64);
    Ok(PairCounts {
        both,
        neither,
        produced_together: produced.co_clustered_pairs(),
        total,
    })
}

/// The normalizer divided by `B_n`:
/// `k·B_{n−1}/B_n + (m−k)·(1 − B_{n−1}/B_n)`.
fn scaled_normalizer(n: usize, counts: &PairCounts) -> Result<f64> {
    let r = bell_ratio(n)?;
    let k = counts.produced_together as f64;
    let others = (counts.total - counts.produced_together) as f64;
    Ok(k * r + others * (1.0 - r))
}

fn check_likelihood_size(observed: &Partition, produced: &Partition) -> Result<usize> {
    let n = check_same_size(observed, produced)?;
    if n < 2 {
        return Err(Error::OutOfRange {
            name: "ground size",
            value: n as f64,
            range: "[2, 500]",
        });
    }
    Ok(n)
}

/// Rand-index likelihood of `observed` given the clustering output `produced`:
/// agreeing pairs divided by the sum of agreeing pairs over every partition of
/// the ground set.
///
/// The sum over all `B_n` partitions is evaluated in closed form: each pair
/// co-clustered by `produced` is co-clustered by `B_{n−1}` partitions, and each
/// other pair is separated by `B_n − B_{n−1}` of them.
pub fn rand_likelihood(observed: &Partition, produced: &Partition) -> Result<f64> {
    let n = check_likelihood_size(observed, produced)?;
    let counts = pair_counts(observed, produced)?;
    let agree = (counts.both + counts.neither) as f64;
    if agree == 0.0 {
        return Ok(0.0);
    }
    let scaled = scaled_normalizer(n, &counts)?;
    let ln = agree.ln() - big_ln(&bell_table()[n]) - scaled.ln();
    Ok(ln.exp())
}

/// [`rand_likelihood`] multiplied by `B_n`.
///
/// For a fixed ground set this is proportional to the likelihood with the same
/// constant for every produced partition, so posterior weights are unchanged,
/// and unlike the exact value it does not underflow for large `n`.
pub fn rand_likelihood_scaled(observed: &Partition, produced: &Partition) -> Result<f64> {
    let n = check_likelihood_size(observed, produced)?;
    let counts = pair_counts(observed, produced)?;
    let agree = (counts.both + counts.neither) as f64;
    Ok(agree / scaled_normalizer(n, &counts)?)
}

/// The exact normalizer `Σ_{P'} |both(P')| + |neither(P')|` as a big integer.
pub fn rand_normalizer(produced: &Partition) -> Result<BigUint> {
    let n = produced.n;
    if n == 0 || n > MAX_BELL_N {
        return Err(Error::OutOfRange {
            name: "ground size",
            value: n as f64,
            range: "[1, 500]",
        });
    }
    let table = bell_table();
    let k = produced.co_clustered_pairs();
    let m = choose2(n as u64);
    let separated = &table[n] - &table[n - 1];
    Ok(&table[n - 1] * BigUint::from(k) + separated * BigUint::from(m - k))
}

/// Adjusted Rand score via the pair-counting contingency formula.
///
/// Returns 1.0 when both partitions are trivially identical (the expected and
/// maximum indices coincide).
pub fn adjusted_rand_score(p: &Partition, q: &Partition) -> Result<f64> {
    let n = check_same_size(p, q)?;
    let pl = p.labels();
    let ql = q.labels();
    let mut table: HashMap<(usize, usize), u64> = HashMap::new();
    for i in 0..n {
        *table.entry((pl[i], ql[i])).or_insert(0) += 1;
    }
    // Scaled by 2·total so numerator and denominator are exact integers.
    let index: i128 = table.values().map(|&c| choose2(c) as i128).sum();
    let sum_p = p.co_clustered_pairs() as i128;
    let sum_q = q.co_clustered_pairs() as i128;
    let total = choose2(n as u64) as i128;
    if total == 0 {
        return Ok(1.0);
    }
    let num = 2 * (index * total - sum_p * sum_q);
    let den = (sum_p + sum_q) * total - 2 * sum_p * sum_q;
    if den == 0 {
        return Ok(1.0);
    }
    Ok(num as f64 / den as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn part(n: usize, blocks: &[&[usize]]) -> Partition {
        Partition::new(n, blocks.iter().map(|b| b.to_vec()).collect()).unwrap()
    }

    #[test]
    fn canonical_form() {
        let p = part(4, &[&[3, 1], &[2, 0]]);
        assert_eq!(p.blocks(), &[vec![0, 2], vec![1, 3]]);
        assert_eq!(p, part(4, &[&[0, 2], &[1, 3]]));
    }

    #[test]
    fn invalid_partitions() {
        assert!(Partition::new(3, vec![vec![0, 1]]).is_err());
        assert!(Partition::new(2, vec![vec![0, 1], vec![1]]).is_err());
        assert!(Partition::new(2, vec![vec![0, 1], vec![]]).is_err());
        assert!(Partition::new(2, vec![vec![0, 2]]).is_err());
    }

    #[test]
    fn labels_with_noise() {
        let p = Partition::from_labels(&[5, -1, 5, 2]);
        assert_eq!(p.blocks(), &[vec![0, 2], vec![1], vec![3]]);
        assert_eq!(p.noise(), &[1]);
    }

    #[test]
    fn morphism_examples() {
        let id: Vec<usize> = (0..3).collect();
        let p = part(3, &[&[0, 1], &[2]]);
        assert!(is_partition_morphism(&id, &p, &p).unwrap());
        assert!(is_partition_morphism(&id, &Partition::singletons(3), &p).unwrap());
        let joined = part(2, &[&[0, 1]]);
        assert!(!is_partition_morphism(&[0, 1], &joined, &Partition::singletons(2)).unwrap());
        assert!(is_partition_morphism(&[0, 5, 1], &p, &p).is_err());
    }

    #[test]
    fn refines_examples() {
        let q = part(3, &[&[0], &[1, 2]]);
        assert!(refines(&Partition::singletons(3), &q).unwrap());
        assert!(refines(&q, &q).unwrap());
        assert!(!refines(&part(3, &[&[0, 1], &[2]]), &q).unwrap());
        assert!(refines(&q, &Partition::singletons(4)).is_err());
    }

    #[test]
    fn bell_values() {
        let firsts: Vec<u64> = (0..8).map(|n| bell_number(n).unwrap().to_u64().unwrap()).collect();
        assert_eq!(firsts, vec![1, 1, 2, 5, 15, 52, 203, 877]);
        assert_eq!(bell_ratio(1).unwrap(), 1.0);
        assert!((bell_ratio(3).unwrap() - 0.4).abs() < 1e-15);
        assert!((bell_ratio(5).unwrap() - 15.0 / 52.0).abs() < 1e-15);
        assert!(bell_ratio(500).unwrap() > 0.0);
        assert!(bell_ratio(0).is_err());
        assert!(bell_ratio(501).is_err());
    }

    #[test]
    fn rand_likelihood_examples() {
        let p = part(3, &[&[0, 1], &[2]]);
        assert!((rand_likelihood(&p, &p).unwrap() - 3.0 / 8.0).abs() < 1e-15);
        let s2 = Partition::singletons(2);
        assert!((rand_likelihood(&s2, &s2).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(rand_likelihood(&Partition::whole(2), &s2).unwrap(), 0.0);
        assert_eq!(rand_normalizer(&p).unwrap(), BigUint::from(8u32));
        assert!(rand_likelihood(&Partition::whole(1), &Partition::whole(1)).is_err());
        assert!(rand_likelihood(&p, &s2).is_err());
    }

    #[test]
    fn scaled_likelihood_is_proportional() {
        let obs = part(5, &[&[0, 1], &[2, 3, 4]]);
        let a = part(5, &[&[0, 1, 2], &[3, 4]]);
        let b = Partition::singletons(5);
        let ratio = rand_likelihood(&obs, &a).unwrap() / rand_likelihood(&obs, &b).unwrap();
        let scaled = rand_likelihood_scaled(&obs, &a).unwrap() / rand_likelihood_scaled(&obs, &b).unwrap();
        assert!((ratio - scaled).abs() < 1e-12);
    }

    #[test]
    fn large_ground_sets_do_not_overflow() {
        let n = 300;
        let p = Partition::singletons(n);
        assert!(rand_likelihood_scaled(&p, &p).unwrap().is_finite());
        assert!(rand_likelihood_scaled(&p, &p).unwrap() > 0.0);
    }

    #[test]
    fn ars_examples() {
        let p = part(4, &[&[0, 1], &[2, 3]]);
        let q = part(4, &[&[0, 2], &[1, 3]]);
        assert_eq!(adjusted_rand_score(&p, &p).unwrap(), 1.0);
        assert!((adjusted_rand_score(&p, &q).unwrap() + 0.5).abs() < 1e-12);
        let all = Partition::whole(4);
        assert_eq!(adjusted_rand_score(&all, &Partition::singletons(4)).unwrap(), 0.0);
        assert_eq!(
            adjusted_rand_score(&Partition::singletons(3), &Partition::singletons(3)).unwrap(),
            1.0
        );
    }

    #[test]
    fn json_round_trip() {
        let p = Partition::from_labels(&[0, 0, -1, 1]);
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(text, r#"{"n":4,"blocks":[[0,1],[2],[3]],"noise":[2]}"#);
        let back: Partition = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<Partition>(r#"{"n":3,"blocks":[[0,1]]}"#).is_err());
    }
}
