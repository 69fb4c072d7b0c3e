//! Learning a posterior over the single-linkage scale from labeled examples.

use flatclust::bayes::{bayes_update_all, uniform_measure, LabeledDataset};
use flatclust::clustering::{make_single_linkage_functor, ClusteringFunctor, HyperparamPoint};
use flatclust::harness::posterior_histogram;
use flatclust::metric::MetricSpace;
use rand::Rng;

fn main() -> flatclust::Result<()> {
    let sl = make_single_linkage_functor();
    let truth = HyperparamPoint::new(vec![0.3]);
    let mut rng = flatclust::bayes::rng_from_seed(11, 0);
    let mut items = Vec::new();
    for _ in 0..30 {
        let pts: Vec<Vec<f64>> = (0..6).map(|_| vec![rng.random::<f64>() * 3.0, rng.random::<f64>() * 3.0]).collect();
        let x = MetricSpace::from_point_cloud(&pts)?;
        let labels = sl.evaluate(&x, &truth)?;
        items.push((x, labels));
    }
    let data = LabeledDataset::new(items)?;
    let prior = uniform_measure(sl.space(), 400, 1)?;
    let posterior = bayes_update_all(&prior, &sl, &data)?;

    let ess = &posterior.ess_trace;
    println!("ESS after 1, 10, 30 updates: {:.1} {:.1} {:.1}", ess[0], ess[9], ess[29]);
    let hist = posterior_histogram(&posterior.measure, 0, 10)?;
    print!("{}", hist.to_csv());
    let mode = hist.mode_bin();
    println!("mode bin [{:.2}, {:.2}] (true a = 0.3)", hist.bin_lo[mode], hist.bin_hi[mode]);
    Ok(())
}
