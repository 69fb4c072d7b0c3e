//! The binary integer program behind flat-cluster selection, solved exactly
//! and cross-checked against enumeration.

use flatclust::bip::{solve_bruteforce, solve_exact, BinaryIntegerProgram, BoolMatrix, Matrix};
use flatclust::flatten::{build_bip, PartitionCollection};

fn main() -> flatclust::Result<()> {
    // Sets {0,1}, {2}, {0,1,2} with masses 0.6, 0.6, 1.0: the first two are
    // disjoint and together beat the third.
    let sets = PartitionCollection::from_sets(3, vec![vec![0, 1], vec![2], vec![0, 1, 2]], vec![0.6, 0.6, 1.0])?;
    let prog = build_bip(&sets)?;
    println!("A = {:?}", prog.a().to_rows());
    println!("B = {:?}", prog.b().to_rows());
    println!("u = {:?}", prog.u());
    let exact = solve_exact(&prog)?;
    let brute = solve_bruteforce(&prog)?;
    println!("exact: v = {:?}, objective = {}", exact.v, exact.objective);
    println!("brute: v = {:?}, objective = {}", brute.v, brute.objective);

    // Forty independent variables: far beyond enumeration, trivial for the
    // decomposing branch and bound.
    let m = 40;
    let big = BinaryIntegerProgram::new(
        (0..m).map(|i| 1.0 + i as f64 / m as f64).collect(),
        Matrix::identity(m),
        BoolMatrix::zeros(m, m),
        vec![1.0; m],
    )?;
    let sol = solve_exact(&big)?;
    println!("40-variable program selects {} variables", sol.selected().len());
    println!("{}", serde_json::to_string(&prog).map_err(flatclust::Error::from)?);
    Ok(())
}
