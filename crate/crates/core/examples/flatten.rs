//! Flattening single linkage over a hyperparameter measure into one
//! partition, in both sampling and particle-exact modes.

use flatclust::bayes::{dirac_measure, uniform_measure, ParamMeasure, Particle};
use flatclust::clustering::{make_single_linkage_functor, ClusteringFunctor, HyperparamPoint};
use flatclust::flatten::{flatten, flatten_detailed, Mode};
use flatclust::metric::MetricSpace;

fn main() -> flatclust::Result<()> {
    let sl = make_single_linkage_functor();
    let x = MetricSpace::from_point_cloud(&[[0.0], [0.2], [0.4], [3.0], [3.1], [9.0]])?;

    let dirac = dirac_measure(sl.space(), HyperparamPoint::new(vec![0.5]))?;
    println!("Dirac at a = 0.5: {:?}", flatten(&sl, &dirac, &x, 10, 0, Mode::Sampling)?.blocks());

    let two = ParamMeasure::new(
        sl.space().clone(),
        vec![
            Particle { point: HyperparamPoint::new(vec![0.7]), weight: 0.5 },
            Particle { point: HyperparamPoint::new(vec![0.05]), weight: 0.5 },
        ],
    )?;
    let out = flatten_detailed(&sl, &two, &x, 1, 0, Mode::Particle)?;
    for (set, mass) in out.collection.sets().iter().zip(out.collection.mass()) {
        println!("  cluster {set:?} mass {mass}");
    }
    println!("two-particle measure: {:?} (objective {})", out.partition.blocks(), out.solution.objective);

    let uniform = uniform_measure(sl.space(), 500, 7)?;
    let sampled = flatten(&sl, &uniform, &x, 200, 7, Mode::Sampling)?;
    let exact = flatten(&sl, &uniform, &x, 0, 0, Mode::Particle)?;
    println!("uniform measure, 200 draws: {:?} noise {:?}", sampled.blocks(), sampled.noise());
    println!("uniform measure, particle-exact: {:?} noise {:?}", exact.blocks(), exact.noise());
    Ok(())
}
