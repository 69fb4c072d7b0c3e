//! Posterior consistency: learn from random labeled point sets, then check
//! whether flattening recovers the true clustering on a fresh set.

use flatclust::harness::{consistency_experiment, ConsistencyConfig};

fn main() -> flatclust::Result<()> {
    let cfg = ConsistencyConfig {
        trials: 10,
        n_updates: 30,
        n_particles: 200,
        seed: 4,
        ..Default::default()
    };
    let report = consistency_experiment(&cfg)?;
    print!("{}", report.to_table());
    let steady = report.trials.iter().filter(|t| t.nondecreasing_fraction() > 0.5).count();
    println!("trials whose mass near a* mostly grew: {steady} / {}", report.trials.len());
    Ok(())
}
