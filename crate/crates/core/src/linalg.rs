//! Dense arbitrary-precision integer matrices: Smith normal form,
//! determinants via fraction-free (Bareiss) elimination, and the kernel /
//! lattice-membership helpers built on the Smith transforms.
//!
//! Everything is exact. Matrices at the scale this crate targets (graph
//! Laplacians of at most a few thousand rows) are handled densely; entries
//! can grow large during elimination, which big integers absorb. Modular or
//! probabilistic shortcuts are deliberately absent.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::{Error, Result};

/// Dense row-major matrix over arbitrary-precision integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            entries: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMatrix::zero(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    /// Builds a matrix from explicit rows; panics if the rows are ragged.
    pub fn from_rows<T: Into<BigInt> + Clone>(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            entries.extend(row.iter().cloned().map(Into::into));
        }
        IntMatrix { rows: r, cols: c, entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Matrix with row `i` and column `i` removed.
    pub fn principal_minor(&self, i: usize) -> IntMatrix {
        assert!(self.is_square() && i < self.rows);
        let n = self.rows;
        let mut out = IntMatrix::zero(n - 1, n - 1);
        for r in 0..n {
            if r == i {
                continue;
            }
            for c in 0..n {
                if c == i {
                    continue;
                }
                let rr = if r < i { r } else { r - 1 };
                let cc = if c < i { c } else { c - 1 };
                out[(rr, cc)] = self[(r, c)].clone();
            }
        }
        out
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in mul");
        let mut out = IntMatrix::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = a * &other[(k, j)];
                    out[(i, j)] += prod;
                }
            }
        }
        out
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.entries.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.entries.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    fn negate_row(&mut self, r: usize) {
        for j in 0..self.cols {
            let v = -std::mem::take(&mut self[(r, j)]);
            self[(r, j)] = v;
        }
    }

    /// row[dst] -= q * row[src]
    fn sub_scaled_row(&mut self, dst: usize, src: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let delta = q * &self[(src, j)];
            self[(dst, j)] -= delta;
        }
    }

    /// col[dst] -= q * col[src]
    fn sub_scaled_col(&mut self, dst: usize, src: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let delta = q * &self[(i, src)];
            self[(i, dst)] -= delta;
        }
    }

    /// row[dst] += row[src]
    fn add_row(&mut self, dst: usize, src: usize) {
        for j in 0..self.cols {
            let v = self[(src, j)].clone();
            self[(dst, j)] += v;
        }
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;
    fn index(&self, (r, c): (usize, usize)) -> &BigInt {
        &self.entries[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut BigInt {
        &mut self.entries[r * self.cols + c]
    }
}

impl std::fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in 0..self.rows {
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self[(i, j)])?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

/// Smith normal form of an integer matrix.
///
/// `diag` holds all `min(rows, cols)` invariant factors, zeros included;
/// the nonzero entries form a divisibility chain and zeros sit at the tail.
/// When transforms are requested, `left * A * right` equals the diagonal
/// matrix and both transforms are unimodular.
#[derive(Debug, Clone)]
pub struct SmithForm {
    pub diag: Vec<BigInt>,
    pub left: Option<IntMatrix>,
    pub right: Option<IntMatrix>,
}

impl SmithForm {
    pub fn rank(&self) -> usize {
        self.diag.iter().filter(|d| !d.is_zero()).count()
    }

    /// Product of the nonzero invariant factors (1 for the zero matrix).
    pub fn nonzero_product(&self) -> BigInt {
        self.diag
            .iter()
            .filter(|d| !d.is_zero())
            .fold(BigInt::one(), |acc, d| acc * d)
    }
}

fn find_min_pivot(a: &IntMatrix, from: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    let mut best_abs = BigInt::zero();
    for i in from..a.rows() {
        for j in from..a.cols() {
            let v = &a[(i, j)];
            if v.is_zero() {
                continue;
            }
            let abs = v.abs();
            if best.is_none() || abs < best_abs {
                best = Some((i, j));
                best_abs = abs;
            }
        }
    }
    best
}

/// Computes the Smith normal form by elimination, always pivoting on the
/// entry of minimal absolute value, with a divisibility-fixing pass so that
/// each invariant factor divides the next.
pub fn smith_normal_form(a: &IntMatrix, want_transforms: bool) -> SmithForm {
    let mut m = a.clone();
    let (rows, cols) = (m.rows(), m.cols());
    let mut left = want_transforms.then(|| IntMatrix::identity(rows));
    let mut right = want_transforms.then(|| IntMatrix::identity(cols));
    let ndiag = rows.min(cols);
    let mut diag = vec![BigInt::zero(); ndiag];

    for k in 0..ndiag {
        'pivot: loop {
            let Some((pi, pj)) = find_min_pivot(&m, k) else {
                // trailing block is zero; remaining invariant factors are 0
                return SmithForm { diag, left, right };
            };
            m.swap_rows(k, pi);
            m.swap_cols(k, pj);
            if let Some(l) = left.as_mut() {
                l.swap_rows(k, pi);
            }
            if let Some(r) = right.as_mut() {
                r.swap_cols(k, pj);
            }

            // Clear column k below/above is not needed (rows < k already 0);
            // reduce the column, then the row, re-selecting the pivot when a
            // nonzero remainder shows up.
            let mut dirty = false;
            for i in k + 1..rows {
                if m[(i, k)].is_zero() {
                    continue;
                }
                let q = &m[(i, k)] / &m[(k, k)];
                m.sub_scaled_row(i, k, &q);
                if let Some(l) = left.as_mut() {
                    l.sub_scaled_row(i, k, &q);
                }
                if !m[(i, k)].is_zero() {
                    dirty = true;
                }
            }
            for j in k + 1..cols {
                if m[(k, j)].is_zero() {
                    continue;
                }
                let q = &m[(k, j)] / &m[(k, k)];
                m.sub_scaled_col(j, k, &q);
                if let Some(r) = right.as_mut() {
                    r.sub_scaled_col(j, k, &q);
                }
                if !m[(k, j)].is_zero() {
                    dirty = true;
                }
            }
            if dirty {
                continue 'pivot;
            }

            // Pivot now divides its cleared row/column; make it divide the
            // whole trailing block before moving on.
            for i in k + 1..rows {
                for j in k + 1..cols {
                    if !(&m[(i, j)] % &m[(k, k)]).is_zero() {
                        m.add_row(k, i);
                        if let Some(l) = left.as_mut() {
                            l.add_row(k, i);
                        }
                        continue 'pivot;
                    }
                }
            }
            break 'pivot;
        }

        if m[(k, k)].is_negative() {
            m.negate_row(k);
            if let Some(l) = left.as_mut() {
                l.negate_row(k);
            }
        }
        diag[k] = m[(k, k)].clone();
    }

    SmithForm { diag, left, right }
}

/// Exact determinant by Bareiss fraction-free elimination.
///
/// Errors on non-square input. The 0x0 matrix has determinant 1.
pub fn determinant(a: &IntMatrix) -> Result<BigInt> {
    if !a.is_square() {
        return Err(Error::NonSquareMatrix { rows: a.rows(), cols: a.cols() });
    }
    let n = a.rows();
    if n == 0 {
        return Ok(BigInt::one());
    }
    let mut m = a.clone();
    let mut sign = 1i32;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[(k, k)].is_zero() {
            let Some(swap) = (k + 1..n).find(|&i| !m[(i, k)].is_zero()) else {
                return Ok(BigInt::zero());
            };
            m.swap_rows(k, swap);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &m[(i, j)] * &m[(k, k)] - &m[(i, k)] * &m[(k, j)];
                m[(i, j)] = num / &prev; // exact by Sylvester's identity
            }
            m[(i, k)] = BigInt::zero();
        }
        prev = m[(k, k)].clone();
    }
    let det = m[(n - 1, n - 1)].clone();
    Ok(if sign < 0 { -det } else { det })
}

/// Basis of the integer kernel `{x : A x = 0}`, as column vectors.
pub fn kernel_basis(a: &IntMatrix) -> Vec<Vec<BigInt>> {
    let snf = smith_normal_form(a, true);
    let right = snf.right.expect("transforms requested");
    let mut basis = Vec::new();
    for j in 0..a.cols() {
        let zero_diag = j >= snf.diag.len() || snf.diag[j].is_zero();
        if zero_diag {
            basis.push((0..a.cols()).map(|i| right[(i, j)].clone()).collect());
        }
    }
    basis
}

/// Decides whether `x` lies in the column lattice of `basis`, using the
/// Smith transforms: `x` is in the lattice iff `left * x` is componentwise
/// divisible by the invariant factors (zero where the factor is zero).
pub struct LatticeSolver {
    snf: SmithForm,
    rows: usize,
}

impl LatticeSolver {
    pub fn new(basis: &IntMatrix) -> Self {
        LatticeSolver {
            snf: smith_normal_form(basis, true),
            rows: basis.rows(),
        }
    }

    pub fn contains(&self, x: &[BigInt]) -> bool {
        assert_eq!(x.len(), self.rows);
        let left = self.snf.left.as_ref().expect("transforms requested");
        for i in 0..self.rows {
            let mut acc = BigInt::zero();
            for j in 0..self.rows {
                acc += &left[(i, j)] * &x[j];
            }
            let ok = if i < self.snf.diag.len() && !self.snf.diag[i].is_zero() {
                (&acc % &self.snf.diag[i]).is_zero()
            } else {
                acc.is_zero()
            };
            if !ok {
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn big(v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn diag_of(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| big(x)).collect()
    }

    #[test]
    fn snf_normalizes_diagonal() {
        let a = IntMatrix::from_rows(&[vec![2, 0], vec![0, 3]]);
        let snf = smith_normal_form(&a, false);
        assert_eq!(snf.diag, diag_of(&[1, 6]));
    }

    #[test]
    fn snf_zero_matrix() {
        let a = IntMatrix::zero(3, 3);
        let snf = smith_normal_form(&a, false);
        assert_eq!(snf.diag, diag_of(&[0, 0, 0]));
    }

    #[test]
    fn snf_reduced_cycle_laplacian() {
        // reduced Laplacian of the 3-cycle
        let a = IntMatrix::from_rows(&[vec![2, -1], vec![-1, 2]]);
        let snf = smith_normal_form(&a, false);
        assert_eq!(snf.diag, diag_of(&[1, 3]));
    }

    #[test]
    fn snf_nonsquare() {
        let a = IntMatrix::from_rows(&[vec![2, 4, 4]]);
        let snf = smith_normal_form(&a, false);
        assert_eq!(snf.diag, diag_of(&[2]));
        let b = IntMatrix::from_rows(&[vec![0, 0], vec![0, 0], vec![0, 3]]);
        let snf = smith_normal_form(&b, false);
        assert_eq!(snf.diag, diag_of(&[3, 0]));
    }

    #[test]
    fn snf_transforms_are_unimodular_and_diagonalize() {
        let a = IntMatrix::from_rows(&[vec![-6, 111, -36, 6], vec![5, -672, 210, 74], vec![0, -255, 81, 24], vec![-7, 255, -81, -10]]);
        let snf = smith_normal_form(&a, true);
        assert_eq!(snf.diag, diag_of(&[1, 3, 21, 0]));
        let l = snf.left.clone().unwrap();
        let r = snf.right.clone().unwrap();
        assert_eq!(determinant(&l).unwrap().abs(), big(1));
        assert_eq!(determinant(&r).unwrap().abs(), big(1));
        let prod = l.mul(&a).mul(&r);
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { snf.diag[i].clone() } else { BigInt::zero() };
                assert_eq!(prod[(i, j)], expect, "at ({i},{j})");
            }
        }
    }

    #[test]
    fn determinant_identity() {
        assert_eq!(determinant(&IntMatrix::identity(4)).unwrap(), big(1));
    }

    #[test]
    fn determinant_small() {
        let a = IntMatrix::from_rows(&[vec![2, -1], vec![-1, 2]]);
        assert_eq!(determinant(&a).unwrap(), big(3));
        let b = IntMatrix::from_rows(&[vec![1, 2], vec![3, 4]]);
        assert_eq!(determinant(&b).unwrap(), big(-2));
    }

    #[test]
    fn determinant_rejects_nonsquare() {
        let a = IntMatrix::zero(2, 3);
        assert!(matches!(determinant(&a), Err(Error::NonSquareMatrix { .. })));
    }

    #[test]
    fn determinant_reduced_k4() {
        // reduced Laplacian of K4
        let a = IntMatrix::from_rows(&[vec![3, -1, -1], vec![-1, 3, -1], vec![-1, -1, 3]]);
        assert_eq!(determinant(&a).unwrap(), big(16));
    }

    #[test]
    fn kernel_of_cycle_laplacian() {
        let a = IntMatrix::from_rows(&[vec![2, -1, -1], vec![-1, 2, -1], vec![-1, -1, 2]]);
        let basis = kernel_basis(&a);
        assert_eq!(basis.len(), 1);
        let v = &basis[0];
        assert!(v[0] == v[1] && v[1] == v[2] && !v[0].is_zero());
    }

    #[test]
    fn lattice_membership() {
        // lattice spanned by (2,0) and (0,3) inside Z^2
        let b = IntMatrix::from_rows(&[vec![2, 0], vec![0, 3]]);
        let solver = LatticeSolver::new(&b);
        assert!(solver.contains(&[big(4), big(-3)]));
        assert!(!solver.contains(&[big(1), big(0)]));
        assert!(solver.contains(&[big(0), big(0)]));
    }

    fn divisibility_chain_ok(diag: &[BigInt]) -> bool {
        let nonzero: Vec<_> = diag.iter().filter(|d| !d.is_zero()).collect();
        // zeros only at the tail
        let tail_zeros = diag.len() - nonzero.len();
        if diag[diag.len() - tail_zeros..].iter().any(|d| !d.is_zero()) {
            return false;
        }
        nonzero.windows(2).all(|w| (w[1] % w[0]).is_zero())
    }

    proptest! {
        #[test]
        fn snf_matches_determinant(rows in 1usize..=6, cols in 1usize..=6, seed in proptest::collection::vec(-9i64..=9, 36)) {
            let m = IntMatrix::from_rows(
                &(0..rows).map(|i| seed[i * cols..(i + 1) * cols].to_vec()).collect::<Vec<_>>(),
            );
            let snf = smith_normal_form(&m, false);
            prop_assert!(divisibility_chain_ok(&snf.diag));
            if rows == cols {
                let det = determinant(&m).unwrap();
                if !det.is_zero() {
                    prop_assert_eq!(snf.nonzero_product(), det.abs());
                } else {
                    prop_assert!(snf.diag.iter().any(|d| d.is_zero()));
                }
            }
        }

        #[test]
        fn snf_invariant_under_permutation(seed in proptest::collection::vec(-9i64..=9, 16), rp in 0usize..24, cp in 0usize..24) {
            let m = IntMatrix::from_rows(&(0..4).map(|i| seed[i * 4..(i + 1) * 4].to_vec()).collect::<Vec<_>>());
            let perms: Vec<Vec<usize>> = permutations_of_4();
            let rperm = &perms[rp];
            let cperm = &perms[cp];
            let mut p = IntMatrix::zero(4, 4);
            for i in 0..4 {
                for j in 0..4 {
                    p[(i, j)] = m[(rperm[i], cperm[j])].clone();
                }
            }
            let a = smith_normal_form(&m, false);
            let b = smith_normal_form(&p, false);
            prop_assert_eq!(a.diag, b.diag);
        }
    }

    fn permutations_of_4() -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut items = [0usize, 1, 2, 3];
        permute(&mut items, 0, &mut out);
        out
    }

    fn permute(items: &mut [usize; 4], k: usize, out: &mut Vec<Vec<usize>>) {
        if k == 4 {
            out.push(items.to_vec());
            return;
        }
        for i in k..4 {
            items.swap(k, i);
            permute(items, k + 1, out);
            items.swap(k, i);
        }
    }

    #[test]
    fn bareiss_agrees_with_snf_product_on_random_instances() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x51f7);
        for _ in 0..100 {
            let n = rng.gen_range(1..=6);
            let rows: Vec<Vec<i64>> = (0..n)
                .map(|_| (0..n).map(|_| rng.gen_range(-9..=9)).collect())
                .collect();
            let m = IntMatrix::from_rows(&rows);
            let det = determinant(&m).unwrap();
            let snf = smith_normal_form(&m, false);
            if det.is_zero() {
                assert!(snf.diag.iter().any(|d| d.is_zero()));
            } else {
                assert_eq!(det.abs(), snf.nonzero_product());
            }
        }
    }
}
