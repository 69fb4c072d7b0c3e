//! Binary integer programs `max cᵀv s.t. Av + Bv ≤ u, v ∈ {0,1}^m`, their
//! morphisms, and an exact branch-and-bound solver.
//!
//! Solutions are unique by construction: among all feasible vectors whose
//! objective is within [`TIE_TOLERANCE`] of the optimum, the lexicographically
//! smallest one is returned (`v_0` is the most significant position, `0 < 1`).
//! Objectives are always summed in index order so that equal vectors give
//! bit-identical values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance on constraint rows and on matrix equations.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-9;
/// Objectives closer than this to the optimum count as optimal.
pub const TIE_TOLERANCE: f64 = 1e-9;
/// Largest `m` accepted by [`solve_bruteforce`].
pub const MAX_BRUTEFORCE_VARS: usize = 25;

/// Dense row-major real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// `value` on the main diagonal of a possibly rectangular matrix.
    pub fn rectangular_diagonal(rows: usize, cols: usize, value: f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows.min(cols) {
            m.set(i, i, value);
        }
        m
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    context: "matrix row",
                    expected: cols,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                context: "matrix product",
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch {
                context: "matrix-vector product",
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Same shape and every entry within `tol`.
    pub fn approx_eq(&self, other: &Matrix, tol: f64) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| (a - b).abs() <= tol)
    }
}

/// Dense row-major `{0,1}` matrix with products over the boolean semiring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoolMatrix {
    rows: usize,
    cols: usize,
    data: Vec<bool>,
}

impl BoolMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![false; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    context: "matrix row",
                    expected: cols,
                    found: row.len(),
                });
            }
            for &x in row {
                match x {
                    0 => data.push(false),
                    1 => data.push(true),
                    _ => {
                        return Err(Error::OutOfRange {
                            name: "boolean matrix entry",
                            value: x as f64,
                            range: "{0, 1}",
                        })
                    }
                }
            }
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        self.data[i * self.cols + j] = value;
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) as u8).collect())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// Logical product: entry `(i, j)` is `OR_k (self[i][k] AND other[k][j])`.
    pub fn logical_matmul(&self, other: &BoolMatrix) -> Result<BoolMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                context: "logical matrix product",
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if !self.get(i, k) {
                    continue;
                }
                for j in 0..other.cols {
                    if other.get(k, j) {
                        out.set(i, j, true);
                    }
                }
            }
        }
        Ok(out)
    }
}

/// The program `max cᵀv s.t. Av + Bv ≤ u` over `v ∈ {0,1}^m` with `n` rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProgramRepr", into = "ProgramRepr")]
pub struct BinaryIntegerProgram {
    c: Vec<f64>,
    a: Matrix,
    b: BoolMatrix,
    u: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ProgramRepr {
    n: usize,
    m: usize,
    c: Vec<f64>,
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    b: Vec<Vec<u8>>,
    u: Vec<f64>,
}

impl TryFrom<ProgramRepr> for BinaryIntegerProgram {
    type Error = Error;

    fn try_from(repr: ProgramRepr) -> Result<Self> {
        let a = if repr.a.is_empty() {
            Matrix::zeros(0, repr.m)
        } else {
            Matrix::from_rows(&repr.a)?
        };
        let b = if repr.b.is_empty() {
            BoolMatrix::zeros(0, repr.m)
        } else {
            BoolMatrix::from_rows(&repr.b)?
        };
        let prog = BinaryIntegerProgram::new(repr.c, a, b, repr.u)?;
        if prog.n() != repr.n || prog.m() != repr.m {
            return Err(Error::DimensionMismatch {
                context: "declared program size",
                expected: repr.n * repr.m,
                found: prog.n() * prog.m(),
            });
        }
        Ok(prog)
    }
}

impl From<BinaryIntegerProgram> for ProgramRepr {
    fn from(p: BinaryIntegerProgram) -> Self {
        ProgramRepr {
            n: p.n(),
            m: p.m(),
            a: p.a.to_rows(),
            b: p.b.to_rows(),
            c: p.c,
            u: p.u,
        }
    }
}

impl BinaryIntegerProgram {
    pub fn new(c: Vec<f64>, a: Matrix, b: BoolMatrix, u: Vec<f64>) -> Result<Self> {
        let (n, m) = (u.len(), c.len());
        for (context, rows, cols) in [
            ("A shape", a.rows(), a.cols()),
            ("B shape", b.rows(), b.cols()),
        ] {
            if rows != n {
                return Err(Error::DimensionMismatch { context, expected: n, found: rows });
            }
            if cols != m {
                return Err(Error::DimensionMismatch { context, expected: m, found: cols });
            }
        }
        if c.iter().chain(&u).chain(&a.data).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("binary integer program"));
        }
        Ok(Self { c, a, b, u })
    }

    /// Row count.
    pub fn n(&self) -> usize {
        self.u.len()
    }

    /// Variable count.
    pub fn m(&self) -> usize {
        self.c.len()
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &BoolMatrix {
        &self.b
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    /// `cᵀv`, summed in index order.
    pub fn objective(&self, v: &[bool]) -> f64 {
        self.c
            .iter()
            .zip(v)
            .filter(|(_, &x)| x)
            .map(|(c, _)| *c)
            .sum()
    }

    /// Row coefficients of `A + B`.
    fn combined(&self) -> Vec<Vec<f64>> {
        (0..self.n())
            .map(|r| {
                (0..self.m())
                    .map(|j| self.a.get(r, j) + if self.b.get(r, j) { 1.0 } else { 0.0 })
                    .collect()
            })
            .collect()
    }
}

fn feasible_with(coef: &[Vec<f64>], u: &[f64], v: &[bool]) -> bool {
    coef.iter().zip(u).all(|(row, &bound)| {
        let lhs: f64 = row
            .iter()
            .zip(v)
            .filter(|(_, &x)| x)
            .map(|(a, _)| *a)
            .sum();
        lhs <= bound + FEASIBILITY_TOLERANCE
    })
}

/// True iff `(A + B)v ≤ u` elementwise within [`FEASIBILITY_TOLERANCE`].
pub fn check_feasible(prog: &BinaryIntegerProgram, v: &[bool]) -> Result<bool> {
    if v.len() != prog.m() {
        return Err(Error::DimensionMismatch {
            context: "assignment length",
            expected: prog.m(),
            found: v.len(),
        });
    }
    Ok(feasible_with(&prog.combined(), &prog.u, v))
}

/// An optimal assignment and its objective value.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub v: Vec<bool>,
    pub objective: f64,
}

impl Solution {
    /// Indices of the variables set to one.
    pub fn selected(&self) -> Vec<usize> {
        self.v
            .iter()
            .enumerate()
            .filter(|(_, &x)| x)
            .map(|(i, _)| i)
            .collect()
    }
}

fn mask_to_vec(mask: u64, m: usize) -> Vec<bool> {
    (0..m).map(|j| mask >> (m - 1 - j) & 1 == 1).collect()
}

/// Enumerates all `2^m` assignments. Oracle for [`solve_exact`].
pub fn solve_bruteforce(prog: &BinaryIntegerProgram) -> Result<Solution> {
    let m = prog.m();
    if m > MAX_BRUTEFORCE_VARS {
        return Err(Error::TooManyVariables {
            m,
            max: MAX_BRUTEFORCE_VARS,
        });
    }
    let coef = prog.combined();
    // Increasing masks visit vectors in lexicographic order.
    let feasible = |mask: u64| {
        let v = mask_to_vec(mask, m);
        feasible_with(&coef, &prog.u, &v).then_some(v)
    };
    let best = (0..1u64 << m)
        .filter_map(feasible)
        .map(|v| prog.objective(&v))
        .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.max(x))))
        .ok_or(Error::Infeasible)?;
    let v = (0..1u64 << m)
        .filter_map(feasible)
        .find(|v| prog.objective(v) >= best - TIE_TOLERANCE)
        .ok_or(Error::Infeasible)?;
    Ok(Solution {
        objective: prog.objective(&v),
        v,
    })
}

/// Exact branch-and-bound solver; same output contract as [`solve_bruteforce`].
///
/// The optimum is found by branching on the free variable with the largest
/// objective coefficient, bounding by the sum of the remaining positive
/// coefficients, pruning partial assignments whose rows can no longer be
/// satisfied, and splitting the free variables into independent blocks
/// whenever no constraint row that can still bind links them. The
/// lexicographically smallest optimal vector is then fixed one variable at a
/// time, each step checked by re-solving with the prefix held fixed.
pub fn solve_exact(prog: &BinaryIntegerProgram) -> Result<Solution> {
    let search = Search::new(prog);
    let m = prog.m();
    let mut fixed = vec![None; m];
    let best = search.best_with(&fixed).ok_or(Error::Infeasible)?;
    let target = best - TIE_TOLERANCE;
    for j in 0..m {
        fixed[j] = Some(false);
        let reachable = search.best_with(&fixed).is_some_and(|v| v >= target);
        if !reachable {
            fixed[j] = Some(true);
        }
    }
    let v: Vec<bool> = fixed.into_iter().map(|x| x == Some(true)).collect();
    debug_assert!(feasible_with(&search.coef, &prog.u, &v));
    Ok(Solution {
        objective: prog.objective(&v),
        v,
    })
}

struct Search<'a> {
    prog: &'a BinaryIntegerProgram,
    coef: Vec<Vec<f64>>,
    /// Per-row slack for rounding in partial sums.
    round: Vec<f64>,
}

impl<'a> Search<'a> {
    fn new(prog: &'a BinaryIntegerProgram) -> Self {
        let coef = prog.combined();
        let round = coef
            .iter()
            .zip(&prog.u)
            .map(|(row, u)| 1e-12 * (1.0 + u.abs() + row.iter().map(|x| x.abs()).sum::<f64>()))
            .collect();
        Self { prog, coef, round }
    }

    /// Best objective with some variables held fixed, or `None` if infeasible.
    fn best_with(&self, fixed: &[Option<bool>]) -> Option<f64> {
        let n = self.prog.n();
        let mut row_sum = vec![0.0; n];
        let mut offset = 0.0;
        let mut free = Vec::new();
        for (j, x) in fixed.iter().enumerate() {
            match x {
                Some(true) => {
                    offset += self.prog.c[j];
                    for r in 0..n {
                        row_sum[r] += self.coef[r][j];
                    }
                }
                Some(false) => {}
                None => free.push(j),
            }
        }
        let rows: Vec<usize> = (0..n).collect();
        self.solve(&free, &rows, &mut row_sum).map(|v| v + offset)
    }

    fn limit(&self, r: usize) -> f64 {
        self.prog.u[r] + FEASIBILITY_TOLERANCE
    }

    /// Best additional objective over `free`, constrained only by `rows`.
    fn solve(&self, free: &[usize], rows: &[usize], row_sum: &mut [f64]) -> Option<f64> {
        let c = &self.prog.c;
        let mut free = free.to_vec();
        let mut gained = 0.0;
        let mut touched: Vec<(usize, bool)> = Vec::new();

        let result = 'node: {
            // Propagate forced assignments until nothing changes.
            loop {
                let lower: Vec<f64> = rows
                    .iter()
                    .map(|&r| row_sum[r] + free.iter().map(|&j| self.coef[r][j].min(0.0)).sum::<f64>())
                    .collect();
                if rows
                    .iter()
                    .zip(&lower)
                    .any(|(&r, &lo)| lo - self.round[r] > self.limit(r))
                {
                    break 'node None;
                }
                let mut forced = None;
                for (pos, &j) in free.iter().enumerate() {
                    let mut cannot_take = false;
                    let mut cannot_skip = false;
                    let mut any_positive = false;
                    let mut any_negative = false;
                    for (&r, &lo) in rows.iter().zip(&lower) {
                        let a = self.coef[r][j];
                        any_positive |= a > 0.0;
                        any_negative |= a < 0.0;
                        cannot_take |= lo + a.max(0.0) - self.round[r] > self.limit(r);
                        cannot_skip |= lo - a.min(0.0) - self.round[r] > self.limit(r);
                    }
                    let decision = match (cannot_take, cannot_skip) {
                        (true, true) => break 'node None,
                        (true, false) => Some(false),
                        (false, true) => Some(true),
                        // Dominated choices: skipping never hurts a
                        // non-positive coefficient that only consumes capacity.
                        (false, false) if c[j] <= 0.0 && !any_negative => Some(false),
                        (false, false) if c[j] >= 0.0 && !any_positive => Some(true),
                        _ => None,
                    };
                    if let Some(take) = decision {
                        forced = Some((pos, take));
                        break;
                    }
                }
                match forced {
                    Some((pos, take)) => {
                        let j = free.remove(pos);
                        if take {
                            gained += c[j];
                            for &r in rows {
                                row_sum[r] += self.coef[r][j];
                            }
                        }
                        touched.push((j, take));
                    }
                    None => break,
                }
            }

            if free.is_empty() {
                break 'node Some(0.0);
            }

            // Rows that may still bind given the free variables.
            let binding: Vec<usize> = rows
                .iter()
                .copied()
                .filter(|&r| {
                    let upper = row_sum[r] + free.iter().map(|&j| self.coef[r][j].max(0.0)).sum::<f64>();
                    upper + self.round[r] > self.limit(r)
                })
                .collect();

            let components = components(&free, &binding, &self.coef);
            let mut total = 0.0;
            for (vars, comp_rows) in components {
                match self.branch(&vars, &comp_rows, row_sum) {
                    Some(v) => total += v,
                    None => break 'node None,
                }
            }
            Some(total)
        };

        for &(j, take) in touched.iter().rev() {
            if take {
                for &r in rows {
                    row_sum[r] -= self.coef[r][j];
                }
            }
        }
        result.map(|v| v + gained)
    }

    /// Branches on the largest-coefficient variable of one independent block.
    fn branch(&self, vars: &[usize], rows: &[usize], row_sum: &mut [f64]) -> Option<f64> {
        let c = &self.prog.c;
        let pos = (0..vars.len())
            .max_by(|&a, &b| c[vars[a]].total_cmp(&c[vars[b]]).then(vars[b].cmp(&vars[a])))
            .expect("nonempty block");
        let j = vars[pos];
        let rest: Vec<usize> = vars.iter().copied().filter(|&l| l != j).collect();

        for &r in rows {
            row_sum[r] += self.coef[r][j];
        }
        let with = self.solve(&rest, rows, row_sum).map(|v| v + c[j]);
        for &r in rows {
            row_sum[r] -= self.coef[r][j];
        }

        let bound: f64 = rest.iter().map(|&l| c[l].max(0.0)).sum();
        if let Some(w) = with {
            if bound <= w {
                return Some(w);
            }
        }
        let without = self.solve(&rest, rows, row_sum);
        match (with, without) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        }
    }
}

/// Splits `vars` into groups linked by nonzero coefficients in shared rows.
fn components(vars: &[usize], rows: &[usize], coef: &[Vec<f64>]) -> Vec<(Vec<usize>, Vec<usize>)> {
    let k = vars.len();
    let mut parent: Vec<usize> = (0..k).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut row_owner = vec![None; rows.len()];
    for (ri, &r) in rows.iter().enumerate() {
        let mut first: Option<usize> = None;
        for (p, &j) in vars.iter().enumerate() {
            if coef[r][j] != 0.0 {
                match first {
                    None => first = Some(p),
                    Some(f) => {
                        let (a, b) = (find(&mut parent, f), find(&mut parent, p));
                        parent[b] = a;
                    }
                }
            }
        }
        row_owner[ri] = first;
    }
    let mut group_of = vec![usize::MAX; k];
    let mut groups: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    for p in 0..k {
        let root = find(&mut parent, p);
        if group_of[root] == usize::MAX {
            group_of[root] = groups.len();
            groups.push((Vec::new(), Vec::new()));
        }
        groups[group_of[root]].0.push(vars[p]);
    }
    for (ri, owner) in row_owner.into_iter().enumerate() {
        if let Some(p) = owner {
            let g = group_of[find(&mut parent, p)];
            groups[g].1.push(rows[ri]);
        }
    }
    groups
}

/// A morphism `(P_c, P_u, P_A, P_A*, P_B, P_B*)` between two programs.
#[derive(Debug, Clone, PartialEq)]
pub struct BipMorphism {
    /// `m × m'`
    pub p_c: Matrix,
    /// `n' × n`
    pub p_u: Matrix,
    /// `n' × n`
    pub p_a: Matrix,
    /// `m × m'`
    pub p_a_star: Matrix,
    /// `n' × n`
    pub p_b: BoolMatrix,
    /// `m × m'`
    pub p_b_star: BoolMatrix,
}

impl BipMorphism {
    pub fn identity(prog: &BinaryIntegerProgram) -> Self {
        let (n, m) = (prog.n(), prog.m());
        Self {
            p_c: Matrix::identity(m),
            p_u: Matrix::identity(n),
            p_a: Matrix::identity(n),
            p_a_star: Matrix::identity(m),
            p_b: BoolMatrix::identity(n),
            p_b_star: BoolMatrix::identity(m),
        }
    }
}

fn check_shape(context: &'static str, got: (usize, usize), want: (usize, usize)) -> Result<()> {
    if got.0 != want.0 {
        return Err(Error::DimensionMismatch { context, expected: want.0, found: got.0 });
    }
    if got.1 != want.1 {
        return Err(Error::DimensionMismatch { context, expected: want.1, found: got.1 });
    }
    Ok(())
}

/// Checks `P_c c' = c`, `P_u u = u'`, `P_A A P_A* = A'` (within
/// [`FEASIBILITY_TOLERANCE`]) and the logical identity `P_B B P_B* = B'`.
pub fn verify_morphism(src: &BinaryIntegerProgram, dst: &BinaryIntegerProgram, phi: &BipMorphism) -> Result<bool> {
    let (n, m, n2, m2) = (src.n(), src.m(), dst.n(), dst.m());
    check_shape("P_c", (phi.p_c.rows(), phi.p_c.cols()), (m, m2))?;
    check_shape("P_u", (phi.p_u.rows(), phi.p_u.cols()), (n2, n))?;
    check_shape("P_A", (phi.p_a.rows(), phi.p_a.cols()), (n2, n))?;
    check_shape("P_A*", (phi.p_a_star.rows(), phi.p_a_star.cols()), (m, m2))?;
    check_shape("P_B", (phi.p_b.rows(), phi.p_b.cols()), (n2, n))?;
    check_shape("P_B*", (phi.p_b_star.rows(), phi.p_b_star.cols()), (m, m2))?;

    let close = |x: &[f64], y: &[f64]| x.iter().zip(y).all(|(a, b)| (a - b).abs() <= FEASIBILITY_TOLERANCE);
    let c_ok = close(&phi.p_c.matvec(&dst.c)?, &src.c);
    let u_ok = close(&phi.p_u.matvec(&src.u)?, &dst.u);
    let a_ok = phi
        .p_a
        .matmul(&src.a)?
        .matmul(&phi.p_a_star)?
        .approx_eq(&dst.a, FEASIBILITY_TOLERANCE);
    let b_ok = phi.p_b.logical_matmul(&src.b)?.logical_matmul(&phi.p_b_star)? == dst.b;
    Ok(c_ok && u_ok && a_ok && b_ok)
}

/// `psi ∘ phi` for `phi: P → Q` and `psi: Q → R`.
///
/// Row-side matrices (`P_u`, `P_A`, `P_B`) compose as `psi · phi`; column-side
/// matrices (`P_c`, `P_A*`, `P_B*`) as `phi · psi`.
pub fn compose_morphisms(phi: &BipMorphism, psi: &BipMorphism) -> Result<BipMorphism> {
    Ok(BipMorphism {
        p_c: phi.p_c.matmul(&psi.p_c)?,
        p_u: psi.p_u.matmul(&phi.p_u)?,
        p_a: psi.p_a.matmul(&phi.p_a)?,
        p_a_star: phi.p_a_star.matmul(&psi.p_a_star)?,
        p_b: psi.p_b.logical_matmul(&phi.p_b)?,
        p_b_star: phi.p_b_star.logical_matmul(&psi.p_b_star)?,
    })
}
