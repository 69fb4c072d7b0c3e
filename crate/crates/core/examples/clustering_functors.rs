//! Single linkage and robust single linkage across their hyperparameters.

use flatclust::clustering::{functor_by_name, HyperparamPoint};
use flatclust::metric::MetricSpace;

fn main() -> flatclust::Result<()> {
    let x = MetricSpace::from_point_cloud(&[[0.0], [1.0], [5.0], [5.5], [12.0]])?;

    let sl = functor_by_name("single-linkage")?;
    for a in [0.9, 0.5, 0.2, 0.01, 0.001] {
        let p = sl.evaluate(&x, &HyperparamPoint::new(vec![a]))?;
        println!("SL(a = {a:<5}) delta = {:>6.3}: {:?}", -f64::ln(a), p.blocks());
    }

    let rsl = functor_by_name("robust-single-linkage")?;
    for (a1, a2) in [(0.01, 0.2), (0.4, 0.2), (0.4, 0.001)] {
        let p = rsl.evaluate(&x, &HyperparamPoint::new(vec![a1, a2]))?;
        println!("RSL(a1 = {a1}, a2 = {a2}): {:?}", p.blocks());
    }
    Ok(())
}
