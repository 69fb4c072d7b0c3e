//! Experiment runners: posterior consistency on random point sets, posterior
//! histograms, and a flatten-versus-fixed-hyperparameter benchmark on
//! Gaussian blobs.

use std::time::Instant;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bayes::{bayes_update, effective_sample_size, rng_from_seed, ParamMeasure, uniform_measure};
use crate::clustering::{functor_by_name, ClusteringFunctor, HyperparamPoint, HyperparamSpace};
use crate::error::{Error, Result};
use crate::flatten::{flatten_detailed, Mode};
use crate::metric::MetricSpace;
use crate::partition::{adjusted_rand_score, Partition};

/// Settings for [`consistency_experiment`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyConfig {
    /// Per-dimension `(lo, hi)` bounds of the region points are drawn from.
    pub region: Vec<(f64, f64)>,
    /// Points per dataset.
    pub k: usize,
    pub n_updates: usize,
    pub n_particles: usize,
    pub functor: String,
    pub seed: u64,
    pub trials: usize,
}

impl Default for ConsistencyConfig {
    fn default() -> Self {
        Self {
            region: vec![(0.0, 1.0); 2],
            k: 6,
            n_updates: 50,
            n_particles: 400,
            functor: "single-linkage".into(),
            seed: 0,
            trials: 40,
        }
    }
}

impl ConsistencyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::OutOfRange {
                name: "k",
                value: self.k as f64,
                range: "[2, inf)",
            });
        }
        if self.n_particles == 0 || self.trials == 0 {
            return Err(Error::Empty("particles or trials"));
        }
        if self.region.is_empty() {
            return Err(Error::Empty("region"));
        }
        for &(lo, hi) in &self.region {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::OutOfRange {
                    name: "region bound",
                    value: lo,
                    range: "finite lo <= hi",
                });
            }
        }
        Ok(())
    }
}

/// Outcome of one consistency trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub a_star: Vec<f64>,
    /// Evaluation point set `X` the recovery check is made on.
    pub eval_points: Vec<Vec<f64>>,
    /// Flattening with the final posterior reproduced `H(X)(a*)`.
    pub recovered: bool,
    /// Update index at which the posterior collapsed, if it did.
    pub collapsed_at: Option<usize>,
    /// Posterior mass of `{a : H(X)(a) = H(X)(a*)}` before the first update
    /// and after each update, for the evaluation set `X`.
    pub mass_near: Vec<f64>,
    pub ess: Vec<f64>,
    /// Every non-noise block of the flattened output is a cluster of
    /// `H(X)(a)` for some particle in the posterior support.
    pub selection_sound: bool,
}

impl TrialRecord {
    /// Fraction of updates that did not decrease `mass_near`.
    pub fn nondecreasing_fraction(&self) -> f64 {
        let steps = self.mass_near.len().saturating_sub(1);
        if steps == 0 {
            return 1.0;
        }
        let up = self
            .mass_near
            .windows(2)
            .filter(|w| w[1] >= w[0] - 1e-12)
            .count();
        up as f64 / steps as f64
    }
}

/// Per-trial records and aggregate recovery rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ConsistencyConfig,
    pub trials: Vec<TrialRecord>,
    pub recovery_rate: f64,
    /// Wall-clock time; kept out of the JSON so reports are reproducible.
    #[serde(skip)]
    pub runtime_secs: f64,
    /// Final posterior of each trial (the last valid one if it collapsed).
    #[serde(skip)]
    pub posteriors: Vec<ParamMeasure>,
}

impl ExperimentReport {
    /// Plain-text summary table.
    pub fn to_table(&self) -> String {
        let mut out = String::from("trial  a*                      recovered  mass_near(final)  ess(final)\n");
        for (t, r) in self.trials.iter().enumerate() {
            let a: Vec<String> = r.a_star.iter().map(|x| format!("{x:.4}")).collect();
            out.push_str(&format!(
                "{t:>5}  {:<22}  {:<9}  {:>16.6}  {:>10.3}\n",
                a.join(","),
                if r.recovered { "yes" } else { "no" },
                r.mass_near.last().copied().unwrap_or(0.0),
                r.ess.last().copied().unwrap_or(f64::NAN),
            ));
        }
        out.push_str(&format!(
            "recovery rate: {:.4} ({} / {})\n",
            self.recovery_rate,
            self.trials.iter().filter(|r| r.recovered).count(),
            self.trials.len()
        ));
        out
    }
}

fn random_points<R: Rng + ?Sized>(rng: &mut R, region: &[(f64, f64)], k: usize) -> Vec<Vec<f64>> {
    (0..k)
        .map(|_| {
            region
                .iter()
                .map(|&(lo, hi)| lo + rng.random::<f64>() * (hi - lo))
                .collect()
        })
        .collect()
}

fn random_space<R: Rng + ?Sized>(rng: &mut R, region: &[(f64, f64)], k: usize) -> Result<MetricSpace> {
    MetricSpace::from_point_cloud(&random_points(rng, region, k))
}

fn run_trial(
    cfg: &ConsistencyConfig,
    functor: &dyn ClusteringFunctor,
    trial: usize,
) -> Result<(TrialRecord, ParamMeasure)> {
    let space = functor.space();
    let mut rng = rng_from_seed(cfg.seed, trial as u64 + 1);
    let unit: Vec<f64> = (0..space.dims()).map(|_| rng.random::<f64>()).collect();
    let a_star = space.from_unit_cube(&unit);
    let mut measure = uniform_measure(space, cfg.n_particles, rng.random())?;

    let eval_points = random_points(&mut rng, &cfg.region, cfg.k);
    let eval_space = MetricSpace::from_point_cloud(&eval_points)?;
    let target = functor.evaluate(&eval_space, &a_star)?;
    let eval_parts: Vec<Partition> = measure
        .particles()
        .par_iter()
        .map(|p| functor.evaluate(&eval_space, &p.point))
        .collect::<Result<_>>()?;
    let near: Vec<bool> = eval_parts.iter().map(|p| p.same_blocks(&target)).collect();
    let mass_near = |m: &ParamMeasure| m.mass_where(|i, _| near[i]);

    let mut trace = vec![mass_near(&measure)];
    let mut ess = vec![effective_sample_size(&measure)];
    let mut collapsed_at = None;
    for step in 0..cfg.n_updates {
        let data = random_space(&mut rng, &cfg.region, cfg.k)?;
        let observed = functor.evaluate(&data, &a_star)?;
        match bayes_update(&measure, functor, &data, &observed) {
            Ok(next) => measure = next,
            Err(Error::PosteriorCollapse { .. }) => {
                collapsed_at = Some(step);
                break;
            }
            Err(e) => return Err(e),
        }
        trace.push(mass_near(&measure));
        ess.push(effective_sample_size(&measure));
    }

    let (recovered, selection_sound) = if collapsed_at.is_some() {
        (false, true)
    } else {
        let out = flatten_detailed(functor, &measure, &eval_space, 1, 0, Mode::Particle)?;
        let support = measure.support();
        let sound = out
            .partition
            .blocks()
            .iter()
            .filter(|b| !(b.len() == 1 && out.partition.is_noise(b[0])))
            .all(|b| support.iter().any(|&i| eval_parts[i].blocks().contains(b)));
        (out.partition.same_blocks(&target), sound)
    };
    let record = TrialRecord {
        a_star: a_star.coords().to_vec(),
        eval_points,
        recovered,
        collapsed_at,
        mass_near: trace,
        ess,
        selection_sound,
    };
    Ok((record, measure))
}

/// Draws `a*` uniformly, learns a posterior from `n_updates` random labeled
/// `k`-point datasets, then checks whether flattening a fresh dataset with
/// the posterior reproduces `H(X)(a*)`. Trials run in parallel, each with its
/// own generator stream.
pub fn consistency_experiment(cfg: &ConsistencyConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let functor = functor_by_name(&cfg.functor)?;
    let start = Instant::now();
    let runs: Vec<(TrialRecord, ParamMeasure)> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, functor.as_ref(), t))
        .collect::<Result<_>>()?;
    let (trials, posteriors): (Vec<_>, Vec<_>) = runs.into_iter().unzip();
    let recovered = trials.iter().filter(|r| r.recovered).count();
    Ok(ExperimentReport {
        config: cfg.clone(),
        recovery_rate: recovered as f64 / trials.len() as f64,
        trials,
        runtime_secs: start.elapsed().as_secs_f64(),
        posteriors,
    })
}

/// Posterior mass per equal-width bin along one axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_lo: Vec<f64>,
    pub bin_hi: Vec<f64>,
    pub mass: Vec<f64>,
}

impl Histogram {
    /// `bin_lo,bin_hi,mass` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_lo,bin_hi,mass\n");
        for ((lo, hi), m) in self.bin_lo.iter().zip(&self.bin_hi).zip(&self.mass) {
            out.push_str(&format!("{lo:?},{hi:?},{m:?}\n"));
        }
        out
    }

    /// Index of the heaviest bin (first on ties).
    pub fn mode_bin(&self) -> usize {
        let mut best = 0;
        for (i, &m) in self.mass.iter().enumerate() {
            if m > self.mass[best] {
                best = i;
            }
        }
        best
    }
}

pub fn posterior_histogram(measure: &ParamMeasure, axis: usize, bins: usize) -> Result<Histogram> {
    let dims = measure.space().dims();
    if axis >= dims {
        return Err(Error::IndexOutOfRange { index: axis, size: dims });
    }
    if bins == 0 {
        return Err(Error::OutOfRange {
            name: "bins",
            value: 0.0,
            range: "[1, inf)",
        });
    }
    let ax = measure.space().axes()[axis];
    let width = (ax.hi - ax.lo) / bins as f64;
    let mut mass = vec![0.0; bins];
    for p in measure.particles() {
        let x = p.point.coords()[axis];
        let bin = if width > 0.0 {
            (((x - ax.lo) / width).floor() as isize).clamp(0, bins as isize - 1) as usize
        } else {
            0
        };
        mass[bin] += p.weight;
    }
    Ok(Histogram {
        bin_lo: (0..bins).map(|i| ax.lo + i as f64 * width).collect(),
        bin_hi: (0..bins).map(|i| ax.lo + (i + 1) as f64 * width).collect(),
        mass,
    })
}

/// Gaussian blobs with centers evenly spaced on a circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlobConfig {
    pub n_blobs: usize,
    pub per_blob: usize,
    /// Standard deviation of each coordinate around the blob center.
    pub std: f64,
    /// Radius of the circle carrying the centers.
    pub radius: f64,
}

impl Default for BlobConfig {
    fn default() -> Self {
        Self {
            n_blobs: 3,
            per_blob: 10,
            std: 0.05,
            radius: 1.0,
        }
    }
}

/// Seeded 2-d blobs and their ground-truth labels.
pub fn gaussian_blobs(cfg: &BlobConfig, seed: u64) -> Result<(Vec<Vec<f64>>, Vec<i64>)> {
    if cfg.n_blobs == 0 || cfg.per_blob == 0 {
        return Err(Error::Empty("blobs"));
    }
    let normal = Normal::new(0.0, cfg.std).map_err(|_| Error::OutOfRange {
        name: "std",
        value: cfg.std,
        range: "[0, inf)",
    })?;
    let mut rng = rng_from_seed(seed, 0);
    let mut points = Vec::with_capacity(cfg.n_blobs * cfg.per_blob);
    let mut labels = Vec::with_capacity(points.capacity());
    for b in 0..cfg.n_blobs {
        let angle = std::f64::consts::TAU * b as f64 / cfg.n_blobs as f64;
        let (cx, cy) = if cfg.n_blobs == 1 {
            (0.0, 0.0)
        } else {
            (cfg.radius * angle.cos(), cfg.radius * angle.sin())
        };
        for _ in 0..cfg.per_blob {
            points.push(vec![cx + normal.sample(&mut rng), cy + normal.sample(&mut rng)]);
            labels.push(b as i64);
        }
    }
    Ok((points, labels))
}

fn radical_inverse(mut i: usize, base: usize) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut x = 0.0;
    while i > 0 {
        x += (i % base) as f64 * f;
        i /= base;
        f *= inv;
    }
    x
}

/// Deterministic grid of `size` hyperparameter points: bin midpoints on a
/// one-dimensional space, a Halton sequence otherwise.
pub fn hyperparameter_grid(space: &HyperparamSpace, size: usize) -> Vec<HyperparamPoint> {
    const PRIMES: [usize; 8] = [2, 3, 5, 7, 11, 13, 17, 19];
    (0..size)
        .map(|i| {
            let unit: Vec<f64> = if space.dims() == 1 {
                vec![(i as f64 + 0.5) / size as f64]
            } else {
                (0..space.dims())
                    .map(|d| radical_inverse(i + 1, PRIMES[d % PRIMES.len()]))
                    .collect()
            };
            space.from_unit_cube(&unit)
        })
        .collect()
}

/// One row of the benchmark table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub method: String,
    pub a: Option<Vec<f64>>,
    pub ars: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub functor: String,
    pub rows: Vec<BenchRow>,
    pub flatten_ars: f64,
    pub best_grid_ars: f64,
    pub median_grid_ars: f64,
}

impl BenchmarkReport {
    pub fn flatten_beats_median(&self) -> bool {
        self.flatten_ars >= self.median_grid_ars
    }

    pub fn to_table(&self) -> String {
        let mut out = format!("{:<10} {:<24} {:>9}\n", "method", "a", "ars");
        for row in &self.rows {
            let a = row
                .a
                .as_ref()
                .map(|a| a.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(","))
                .unwrap_or_else(|| "-".into());
            out.push_str(&format!("{:<10} {:<24} {:>9.6}\n", row.method, a, row.ars));
        }
        out.push_str(&format!(
            "flatten ars {:.6} | best grid ars {:.6} | median grid ars {:.6}\n",
            self.flatten_ars, self.best_grid_ars, self.median_grid_ars
        ));
        out
    }
}

/// Settings for [`benchmark_flatten_vs_fixed`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub blobs: BlobConfig,
    pub grid_size: usize,
    pub n_samples: usize,
    pub mode: Mode,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            blobs: BlobConfig::default(),
            grid_size: 20,
            n_samples: 200,
            mode: Mode::Particle,
            seed: 0,
        }
    }
}

/// Compares the adjusted Rand score of flattening against the functor at each
/// point of a fixed hyperparameter grid, on seeded Gaussian blobs.
pub fn benchmark_flatten_vs_fixed(
    functor: &dyn ClusteringFunctor,
    prior: &ParamMeasure,
    cfg: &BenchConfig,
) -> Result<BenchmarkReport> {
    if cfg.grid_size == 0 {
        return Err(Error::Empty("hyperparameter grid"));
    }
    let (points, labels) = gaussian_blobs(&cfg.blobs, cfg.seed)?;
    let truth = Partition::from_labels(&labels);
    let space = MetricSpace::from_point_cloud(&points)?;

    let flat = flatten_detailed(functor, prior, &space, cfg.n_samples, cfg.seed, cfg.mode)?;
    let flatten_ars = adjusted_rand_score(&flat.partition, &truth)?;
    let mut rows = vec![BenchRow {
        method: "flatten".into(),
        a: None,
        ars: flatten_ars,
    }];
    let grid = hyperparameter_grid(functor.space(), cfg.grid_size);
    let grid_ars: Vec<f64> = grid
        .par_iter()
        .map(|a| adjusted_rand_score(&functor.evaluate(&space, a)?, &truth))
        .collect::<Result<_>>()?;
    for (a, &ars) in grid.iter().zip(&grid_ars) {
        rows.push(BenchRow {
            method: "fixed".into(),
            a: Some(a.coords().to_vec()),
            ars,
        });
    }
    let mut sorted = grid_ars.clone();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    };
    Ok(BenchmarkReport {
        functor: functor.name().to_string(),
        rows,
        flatten_ars,
        best_grid_ars: *sorted.last().expect("nonempty grid"),
        median_grid_ars: median,
    })
}
