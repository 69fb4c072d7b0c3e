//! A metric scaling induces a morphism between the two selection programs;
//! the morphism equations and composition are checked numerically.

use flatclust::bayes::ParamMeasure;
use flatclust::bayes::Particle;
use flatclust::bip::{compose_morphisms, verify_morphism};
use flatclust::clustering::{make_single_linkage_functor, ClusteringFunctor, HyperparamPoint};
use flatclust::flatten::{build_bip, build_morphism_from_provenance, collect_partitions, Mode};
use flatclust::metric::MetricSpace;

fn main() -> flatclust::Result<()> {
    let sl = make_single_linkage_functor();
    let measure = ParamMeasure::from_weighted(
        sl.space().clone(),
        [0.3, 3.0, 30.0, 300.0]
            .iter()
            .map(|delta: &f64| Particle { point: HyperparamPoint::new(vec![(-delta).exp()]), weight: 1.0 })
            .collect(),
    )?;
    let x = MetricSpace::from_point_cloud(&[[0.0], [1.0], [11.0], [111.0]])?;
    let y = x.scaled(0.5)?;
    let z = y.scaled(0.5)?;
    let identity: Vec<usize> = (0..4).collect();

    let cx = collect_partitions(&sl, &measure, &x, 1, 0, Mode::Particle)?;
    let cy = collect_partitions(&sl, &measure, &y, 1, 0, Mode::Particle)?;
    let cz = collect_partitions(&sl, &measure, &z, 1, 0, Mode::Particle)?;
    let (px, py, pz) = (build_bip(&cx)?, build_bip(&cy)?, build_bip(&cz)?);

    let phi = build_morphism_from_provenance(&cx, &cy, &identity)?;
    let psi = build_morphism_from_provenance(&cy, &cz, &identity)?;
    println!("X has {} clusters, Y {}, Z {}", cx.len(), cy.len(), cz.len());
    println!("phi: X -> Y verifies: {}", verify_morphism(&px, &py, &phi)?);
    println!("psi: Y -> Z verifies: {}", verify_morphism(&py, &pz, &psi)?);
    let composed = compose_morphisms(&phi, &psi)?;
    println!("psi . phi verifies: {}", verify_morphism(&px, &pz, &composed)?);
    println!("P_c of phi: {:?}", phi.p_c.to_rows());
    Ok(())
}
