//! Building metric spaces, checking maps between them, and the
//! mutual-reachability distance used by robust single linkage.

use flatclust::metric::{check_nonexpansive, core_distance, mutual_reachability, MetricMap, MetricSpace};

fn main() -> flatclust::Result<()> {
    let line = MetricSpace::from_point_cloud(&[[0.0], [1.0], [5.0]])?;
    println!("line distances: {:?}", line.to_rows());

    let square = MetricSpace::from_distance_matrix(
        &[
            [0.0, 1.0, 2.0, 1.0],
            [1.0, 0.0, 1.0, 2.0],
            [2.0, 1.0, 0.0, 1.0],
            [1.0, 2.0, 1.0, 0.0],
        ],
        true,
    )?;
    println!("core distances at a1 = 0.5: {:?}", core_distance(&square, 0.5)?);
    println!("mutual reachability at a1 = 0.5: {:?}", mutual_reachability(&square, 0.5)?.to_rows());

    // Halving every distance is non-expansive; doubling is not.
    let half = line.scaled(0.5)?;
    let double = line.scaled(2.0)?;
    let shrink = MetricMap::identity(&line, &half)?;
    let stretch = MetricMap::identity(&line, &double)?;
    println!("identity onto half-scale is non-expansive: {}", check_nonexpansive(&shrink));
    println!("identity onto double-scale is non-expansive: {}", check_nonexpansive(&stretch));

    match MetricSpace::from_distance_matrix(&[[0.0, 1.0, 5.0], [1.0, 0.0, 1.0], [5.0, 1.0, 0.0]], true) {
        Ok(_) => println!("unexpected: triangle violation accepted"),
        Err(e) => println!("rejected: {e}"),
    }
    Ok(())
}
