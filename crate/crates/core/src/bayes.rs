//! Finitely supported probability measures over hyperparameter spaces and
//! Bayesian updating of those measures from labeled partitions.
//!
//! Every random draw in the crate comes from [`rng_from_seed`], a ChaCha8
//! stream keyed by the 64-bit seed, so serial and parallel runs agree.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clustering::{ClusteringFunctor, HyperparamPoint, HyperparamSpace};
use crate::error::{Error, Result};
use crate::metric::MetricSpace;
use crate::partition::{rand_likelihood_scaled, Partition};

/// Weights must sum to one within this tolerance.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// The generator behind every seeded computation: ChaCha8 seeded with
/// `seed_from_u64(seed)` on stream `stream`.
pub fn rng_from_seed(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A weighted support point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    #[serde(rename = "a")]
    pub point: HyperparamPoint,
    #[serde(rename = "w")]
    pub weight: f64,
}

/// A probability measure supported on finitely many hyperparameter points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureRepr")]
pub struct ParamMeasure {
    space: HyperparamSpace,
    particles: Vec<Particle>,
}

#[derive(Deserialize)]
struct MeasureRepr {
    space: HyperparamSpace,
    particles: Vec<Particle>,
}

impl TryFrom<MeasureRepr> for ParamMeasure {
    type Error = Error;

    fn try_from(repr: MeasureRepr) -> Result<Self> {
        ParamMeasure::new(repr.space, repr.particles)
    }
}

impl ParamMeasure {
    /// Validates a normalized particle set.
    pub fn new(space: HyperparamSpace, particles: Vec<Particle>) -> Result<Self> {
        let total = Self::check_particles(&space, &particles)?;
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { space, particles })
    }

    /// Normalizes arbitrary non-negative weights.
    pub fn from_weighted(space: HyperparamSpace, mut particles: Vec<Particle>) -> Result<Self> {
        let total = Self::check_particles(&space, &particles)?;
        for p in &mut particles {
            p.weight /= total;
        }
        Ok(Self { space, particles })
    }

    fn check_particles(space: &HyperparamSpace, particles: &[Particle]) -> Result<f64> {
        if particles.is_empty() {
            return Err(Error::InvalidMeasure("no particles".into()));
        }
        for p in particles {
            if !(p.weight.is_finite() && p.weight >= 0.0) {
                return Err(Error::InvalidMeasure(format!("invalid weight {}", p.weight)));
            }
            space.check(&p.point)?;
        }
        let total: f64 = particles.iter().map(|p| p.weight).sum();
        if total <= 0.0 {
            return Err(Error::InvalidMeasure("no particle has positive weight".into()));
        }
        Ok(total)
    }

    pub fn space(&self) -> &HyperparamSpace {
        &self.space
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.particles.iter().map(|p| p.weight).collect()
    }

    /// Indices of particles with positive weight.
    pub fn support(&self) -> Vec<usize> {
        self.particles
            .iter()
            .enumerate()
            .filter(|(_, p)| p.weight > 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    /// Total weight of the particles selected by `pred`.
    pub fn mass_where(&self, mut pred: impl FnMut(usize, &HyperparamPoint) -> bool) -> f64 {
        self.particles
            .iter()
            .enumerate()
            .filter(|(i, p)| pred(*i, &p.point))
            .map(|(_, p)| p.weight)
            .sum()
    }

    /// Draws a particle index with probability proportional to its weight.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        if self.particles.len() == 1 {
            return 0;
        }
        let dist = WeightedIndex::new(self.particles.iter().map(|p| p.weight))
            .expect("validated measure has positive total weight");
        dist.sample(rng)
    }
}

/// `n_particles` points drawn uniformly from the box, equally weighted.
pub fn uniform_measure(space: &HyperparamSpace, n_particles: usize, seed: u64) -> Result<ParamMeasure> {
    if n_particles == 0 {
        return Err(Error::Empty("particles"));
    }
    let mut rng = rng_from_seed(seed, 0);
    let weight = 1.0 / n_particles as f64;
    let particles = (0..n_particles)
        .map(|_| {
            let unit: Vec<f64> = (0..space.dims()).map(|_| rng.random::<f64>()).collect();
            Particle {
                point: space.from_unit_cube(&unit),
                weight,
            }
        })
        .collect();
    ParamMeasure::new(space.clone(), particles)
}

/// A single particle of weight one.
pub fn dirac_measure(space: &HyperparamSpace, a: HyperparamPoint) -> Result<ParamMeasure> {
    ParamMeasure::new(space.clone(), vec![Particle { point: a, weight: 1.0 }])
}

/// Draws one hyperparameter point from `measure`.
pub fn sample<R: Rng + ?Sized>(measure: &ParamMeasure, rng: &mut R) -> HyperparamPoint {
    measure.particles[measure.sample_index(rng)].point.clone()
}

/// `1 / Σ w_i²`.
pub fn effective_sample_size(measure: &ParamMeasure) -> f64 {
    1.0 / measure.particles.iter().map(|p| p.weight * p.weight).sum::<f64>()
}

/// How well a clustering output explains an observed partition.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Likelihood {
    /// Rand-index likelihood normalized over all partitions of the ground set.
    #[default]
    RandIndex,
    /// One when the output equals the observation, zero otherwise.
    ExactMatch,
}

impl Likelihood {
    /// Likelihood up to a factor that depends only on the ground size.
    pub fn evaluate(self, observed: &Partition, produced: &Partition) -> Result<f64> {
        match self {
            Likelihood::RandIndex => rand_likelihood_scaled(observed, produced),
            Likelihood::ExactMatch => {
                if observed.ground_size() != produced.ground_size() {
                    return Err(Error::GroundSizeMismatch {
                        left: observed.ground_size(),
                        right: produced.ground_size(),
                    });
                }
                Ok(if observed.same_blocks(produced) { 1.0 } else { 0.0 })
            }
        }
    }
}

/// Metric spaces paired with their observed partitions.
#[derive(Debug, Clone, Default)]
pub struct LabeledDataset {
    items: Vec<(MetricSpace, Partition)>,
}

impl LabeledDataset {
    pub fn new(items: Vec<(MetricSpace, Partition)>) -> Result<Self> {
        for (space, part) in &items {
            if space.len() != part.ground_size() {
                return Err(Error::GroundSizeMismatch {
                    left: space.len(),
                    right: part.ground_size(),
                });
            }
        }
        Ok(Self { items })
    }

    pub fn items(&self) -> &[(MetricSpace, Partition)] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

fn update_at_step(
    measure: &ParamMeasure,
    functor: &dyn ClusteringFunctor,
    space: &MetricSpace,
    observed: &Partition,
    likelihood: Likelihood,
    step: usize,
) -> Result<ParamMeasure> {
    if space.len() != observed.ground_size() {
        return Err(Error::GroundSizeMismatch {
            left: space.len(),
            right: observed.ground_size(),
        });
    }
    let likelihoods: Vec<f64> = measure
        .particles
        .par_iter()
        .map(|p| {
            if p.weight == 0.0 {
                return Ok(0.0);
            }
            let produced = functor.evaluate(space, &p.point)?;
            likelihood.evaluate(observed, &produced)
        })
        .collect::<Result<_>>()?;
    let unnormalized: Vec<f64> = measure
        .particles
        .iter()
        .zip(&likelihoods)
        .map(|(p, l)| p.weight * l)
        .collect();
    let total: f64 = unnormalized.iter().sum();
    if !(total > 0.0) {
        return Err(Error::PosteriorCollapse { step });
    }
    let particles = measure
        .particles
        .iter()
        .zip(unnormalized)
        .map(|(p, w)| Particle {
            point: p.point.clone(),
            weight: w / total,
        })
        .collect();
    Ok(ParamMeasure {
        space: measure.space.clone(),
        particles,
    })
}

/// One Bayesian update with the Rand-index likelihood.
pub fn bayes_update(
    measure: &ParamMeasure,
    functor: &dyn ClusteringFunctor,
    space: &MetricSpace,
    observed: &Partition,
) -> Result<ParamMeasure> {
    bayes_update_with(measure, functor, space, observed, Likelihood::RandIndex)
}

/// One Bayesian update: `w_i' ∝ w_i · L(observed | H(X)(a_i))`.
pub fn bayes_update_with(
    measure: &ParamMeasure,
    functor: &dyn ClusteringFunctor,
    space: &MetricSpace,
    observed: &Partition,
    likelihood: Likelihood,
) -> Result<ParamMeasure> {
    update_at_step(measure, functor, space, observed, likelihood, 0)
}

/// Result of folding updates over a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    pub measure: ParamMeasure,
    /// Effective sample size after each update.
    pub ess_trace: Vec<f64>,
}

/// Folds [`bayes_update`] over the dataset in order.
pub fn bayes_update_all(
    prior: &ParamMeasure,
    functor: &dyn ClusteringFunctor,
    data: &LabeledDataset,
) -> Result<Posterior> {
    bayes_update_all_with(prior, functor, data, Likelihood::RandIndex)
}

pub fn bayes_update_all_with(
    prior: &ParamMeasure,
    functor: &dyn ClusteringFunctor,
    data: &LabeledDataset,
    likelihood: Likelihood,
) -> Result<Posterior> {
    if data.is_empty() {
        return Err(Error::Empty("labeled dataset"));
    }
    let mut measure = prior.clone();
    let mut ess_trace = Vec::with_capacity(data.len());
    for (step, (space, observed)) in data.items.iter().enumerate() {
        measure = update_at_step(&measure, functor, space, observed, likelihood, step)?;
        ess_trace.push(effective_sample_size(&measure));
    }
    Ok(Posterior { measure, ess_trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::make_single_linkage_functor;

    fn point(a: f64) -> HyperparamPoint {
        HyperparamPoint::new(vec![a])
    }

    fn two_particles(w: [f64; 2], a: [f64; 2]) -> ParamMeasure {
        ParamMeasure::new(
            HyperparamSpace::unit_op(1),
            vec![
                Particle { point: point(a[0]), weight: w[0] },
                Particle { point: point(a[1]), weight: w[1] },
            ],
        )
        .unwrap()
    }

    fn line(xs: &[f64]) -> MetricSpace {
        let pts: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        MetricSpace::from_point_cloud(&pts).unwrap()
    }

    #[test]
    fn measure_validation() {
        let space = HyperparamSpace::unit_op(1);
        assert!(ParamMeasure::new(space.clone(), vec![]).is_err());
        let bad = vec![Particle { point: point(0.5), weight: 0.5 }];
        assert!(ParamMeasure::new(space.clone(), bad.clone()).is_err());
        assert_eq!(ParamMeasure::from_weighted(space.clone(), bad).unwrap().weights(), vec![1.0]);
        let outside = vec![Particle { point: point(1.5), weight: 1.0 }];
        assert!(ParamMeasure::new(space.clone(), outside).is_err());
        let zero = vec![Particle { point: point(0.5), weight: 0.0 }];
        assert!(ParamMeasure::from_weighted(space, zero).is_err());
    }

    #[test]
    fn uniform_measure_examples() {
        let space = HyperparamSpace::unit_op(1);
        let one = uniform_measure(&space, 1, 3).unwrap();
        assert_eq!(one.weights(), vec![1.0]);
        let big = uniform_measure(&space, 1000, 7).unwrap();
        let mean = big.particles().iter().map(|p| p.point.coords()[0]).sum::<f64>() / 1000.0;
        assert!((0.45..=0.55).contains(&mean), "mean {mean}");
        assert_eq!(big, uniform_measure(&space, 1000, 7).unwrap());
        assert!(big.particles().iter().all(|p| space.contains(&p.point)));
        assert!(uniform_measure(&space, 0, 7).is_err());
    }

    #[test]
    fn sampling_examples() {
        let space = HyperparamSpace::unit_op(1);
        let dirac = dirac_measure(&space, point(0.3)).unwrap();
        let mut rng = rng_from_seed(1, 0);
        assert!((0..20).all(|_| sample(&dirac, &mut rng) == point(0.3)));
        let first_only = two_particles([1.0, 0.0], [0.2, 0.8]);
        assert!((0..200).all(|_| first_only.sample_index(&mut rng) == 0));
        let skewed = two_particles([0.75, 0.25], [0.2, 0.8]);
        let mut rng = rng_from_seed(11, 0);
        let hits = (0..10_000).filter(|_| skewed.sample_index(&mut rng) == 0).count();
        let freq = hits as f64 / 10_000.0;
        assert!((0.73..=0.77).contains(&freq), "freq {freq}");
        assert!(dirac_measure(&space, point(2.0)).is_err());
    }

    #[test]
    fn ess_examples() {
        let space = HyperparamSpace::unit_op(1);
        let u = uniform_measure(&space, 8, 0).unwrap();
        assert!((effective_sample_size(&u) - 8.0).abs() < 1e-9);
        assert_eq!(effective_sample_size(&dirac_measure(&space, point(0.5)).unwrap()), 1.0);
        let s = effective_sample_size(&two_particles([0.75, 0.25], [0.2, 0.8]));
        assert!((s - 1.6).abs() < 1e-12);
    }

    /// Returns `low` for coordinates below 0.5 and `high` otherwise.
    struct Switch {
        space: HyperparamSpace,
        low: Partition,
        high: Partition,
    }

    impl ClusteringFunctor for Switch {
        fn name(&self) -> &str {
            "switch"
        }
        fn space(&self) -> &HyperparamSpace {
            &self.space
        }
        fn category(&self) -> crate::clustering::Category {
            crate::clustering::Category::MetBij
        }
        fn evaluate(&self, _: &MetricSpace, a: &HyperparamPoint) -> Result<Partition> {
            Ok(if a.coords()[0] < 0.5 { self.low.clone() } else { self.high.clone() })
        }
    }

    #[test]
    fn update_with_known_likelihoods() {
        // Against the observation {{0,1},{2}}, producing {{0,1},{2}} scores
        // 3/8 and producing {{0,2},{1}} scores 1/8.
        let observed = Partition::new(3, vec![vec![0, 1], vec![2]]).unwrap();
        let switch = Switch {
            space: HyperparamSpace::unit_op(1),
            low: observed.clone(),
            high: Partition::new(3, vec![vec![0, 2], vec![1]]).unwrap(),
        };
        let x = line(&[0.0, 1.0, 5.0]);
        let prior = two_particles([0.5, 0.5], [0.2, 0.8]);
        let post = bayes_update(&prior, &switch, &x, &observed).unwrap();
        let w = post.weights();
        assert!((w[0] - 0.75).abs() < 1e-12 && (w[1] - 0.25).abs() < 1e-12, "{w:?}");
    }

    #[test]
    fn constant_likelihood_keeps_measure() {
        let x = line(&[0.0, 10.0]);
        let observed = Partition::singletons(2);
        let sl = make_single_linkage_functor();
        let prior = two_particles([0.3, 0.7], [0.9, 0.5]);
        let post = bayes_update(&prior, &sl, &x, &observed).unwrap();
        for (a, b) in post.weights().iter().zip(prior.weights()) {
            assert!((a - b).abs() < 1e-12);
        }
        let data = LabeledDataset::new(vec![(x, observed)]).unwrap();
        let all = bayes_update_all(&prior, &sl, &data).unwrap();
        assert_eq!(all.ess_trace.len(), 1);
    }

    #[test]
    fn collapse_is_an_error() {
        let x = line(&[0.0, 1.0]);
        let observed = Partition::whole(2);
        let sl = make_single_linkage_functor();
        let prior = two_particles([0.5, 0.5], [0.9, 0.8]);
        // Both particles produce singletons; Rand likelihood of a merged
        // observation is then zero for n = 2.
        assert_eq!(
            bayes_update(&prior, &sl, &x, &observed),
            Err(Error::PosteriorCollapse { step: 0 })
        );
        let data = LabeledDataset::new(vec![
            (x.clone(), Partition::singletons(2)),
            (x, observed),
        ])
        .unwrap();
        assert_eq!(
            bayes_update_all(&prior, &sl, &data),
            Err(Error::PosteriorCollapse { step: 1 })
        );
    }

    #[test]
    fn dirac_stays_dirac() {
        let space = HyperparamSpace::unit_op(1);
        let dirac = dirac_measure(&space, point(0.4)).unwrap();
        let x = line(&[0.0, 1.0, 5.0]);
        let observed = Partition::new(3, vec![vec![0, 1], vec![2]]).unwrap();
        let post = bayes_update(&dirac, &make_single_linkage_functor(), &x, &observed).unwrap();
        assert_eq!(post, dirac);
    }

    #[test]
    fn measure_json_round_trip() {
        let m = two_particles([0.25, 0.75], [0.5, 0.125]);
        let text = serde_json::to_string(&m).unwrap();
        assert_eq!(
            text,
            r#"{"space":{"axes":[{"lo":0.0,"hi":1.0,"opposite":true}]},"particles":[{"a":[0.5],"w":0.25},{"a":[0.125],"w":0.75}]}"#
        );
        assert_eq!(serde_json::from_str::<ParamMeasure>(&text).unwrap(), m);
    }
}
