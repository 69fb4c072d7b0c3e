//! Flattening versus every value of a fixed hyperparameter grid on seeded
//! Gaussian blobs.

use flatclust::bayes::uniform_measure;
use flatclust::clustering::{make_single_linkage_functor, ClusteringFunctor};
use flatclust::harness::{benchmark_flatten_vs_fixed, BenchConfig, BlobConfig};

fn main() -> flatclust::Result<()> {
    let sl = make_single_linkage_functor();
    let prior = uniform_measure(sl.space(), 200, 0)?;
    for std in [0.05, 0.1] {
        let cfg = BenchConfig {
            blobs: BlobConfig { std, ..Default::default() },
            ..Default::default()
        };
        let report = benchmark_flatten_vs_fixed(&sl, &prior, &cfg)?;
        println!("blob std {std}");
        print!("{}", report.to_table());
        println!();
    }
    Ok(())
}
