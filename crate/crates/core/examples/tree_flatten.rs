//! The dynamic-programming fast path for one-parameter clusterings, checked
//! against the general solver.

use flatclust::bayes::uniform_measure;
use flatclust::clustering::{make_single_linkage_functor, ClusteringFunctor};
use flatclust::flatten::{flatten_detailed, flatten_tree, Mode};
use flatclust::metric::MetricSpace;

fn main() -> flatclust::Result<()> {
    let sl = make_single_linkage_functor();
    let points: Vec<[f64; 2]> = (0..24)
        .map(|i| {
            let t = i as f64;
            [(t * 1.7).sin() * (1.0 + t / 6.0), (t * 0.9).cos() * (1.0 + t / 8.0)]
        })
        .collect();
    let x = MetricSpace::from_point_cloud(&points)?;
    let measure = uniform_measure(sl.space(), 300, 3)?;

    let tree = flatten_tree(&sl, &measure, &x)?;
    let general = flatten_detailed(&sl, &measure, &x, 0, 0, Mode::Particle)?;
    println!("tree objective    {}", tree.objective);
    println!("general objective {}", general.solution.objective);
    println!("same partition: {}", tree.partition.same_blocks(&general.partition));
    println!("{} candidate clusters, {} selected", general.collection.len(), tree.selected.len());
    Ok(())
}
