//! Exact linear algebra over the rationals: row reduction, kernels, affine
//! solves and left nullspaces.
//!
//! Pivoting is deterministic (first nonzero entry, scanning columns left to
//! right and rows top to bottom) so bases come out identical across runs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::symbolic::{fmt_rational, int, Rational, SparseExpr};

#[derive(Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl fmt::Debug for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RationalMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(fmt_rational).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Rational>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::DimensionMismatch { expected: cols, found: row.len() });
            }
            for (c, x) in row.iter().enumerate() {
                m.set(r, c, x.clone());
            }
        }
        Ok(m)
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let rows: Vec<Vec<Rational>> = rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect();
        Self::from_rows(&rows).expect("ragged integer matrix")
    }

    pub fn from_sparse_rows(rows: &[Vec<(usize, Rational)>], cols: usize) -> Self {
        let mut m = Self::zeros(rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            for (c, x) in row {
                let cur = m.get(r, *c).clone();
                m.set(r, *c, cur + x);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, x: Rational) {
        self.data[r * self.cols + c] = x;
    }

    pub fn row(&self, r: usize) -> &[Rational] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Rational> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c).clone());
            }
        }
        t
    }

    /// Reorders columns: column `k` of the result is column `perm[k]` of `self`.
    pub fn permute_columns(&self, perm: &[usize]) -> Self {
        let mut out = Self::zeros(self.rows, perm.len());
        for r in 0..self.rows {
            for (k, &c) in perm.iter().enumerate() {
                out.set(r, k, self.get(r, c).clone());
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[Rational]) -> Result<Vec<Rational>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, found: x.len() });
        }
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(x)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect())
    }

    /// `row * self` for a row vector of length `rows`.
    pub fn vec_mul(&self, row: &[Rational]) -> Result<Vec<Rational>> {
        self.transpose().mul_vec(row)
    }

    pub fn mul(&self, other: &RationalMatrix) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, found: other.rows });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = other.get(k, c);
                    if !b.is_zero() {
                        let cur = out.get(r, c) + a * b;
                        out.set(r, c, cur);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }
}

/// Something that can ride along as an augmented column during elimination.
pub trait Augment: Clone {
    /// `self -= factor * other`
    fn sub_scaled(&mut self, factor: &Rational, other: &Self);
    fn scale(&mut self, factor: &Rational);
    fn is_zero_entry(&self) -> bool;
}

impl Augment for Rational {
    fn sub_scaled(&mut self, factor: &Rational, other: &Self) {
        if !other.is_zero() {
            *self -= factor * other;
        }
    }

    fn scale(&mut self, factor: &Rational) {
        *self *= factor;
    }

    fn is_zero_entry(&self) -> bool {
        self.is_zero()
    }
}

impl Augment for SparseExpr {
    fn sub_scaled(&mut self, factor: &Rational, other: &Self) {
        if !other.is_zero() {
            *self = &*self - &other.scale(factor);
        }
    }

    fn scale(&mut self, factor: &Rational) {
        *self = SparseExpr::scale(self, factor);
    }

    fn is_zero_entry(&self) -> bool {
        self.is_zero()
    }
}

/// Reduces `m` to reduced row echelon form in place, applying the same row
/// operations to `aug` (one entry per row, or empty). Returns pivot columns.
pub fn eliminate<A: Augment>(m: &mut RationalMatrix, aug: &mut [A]) -> Vec<usize> {
    let with_aug = !aug.is_empty();
    assert!(!with_aug || aug.len() == m.rows, "augmented column length");
    let mut pivots = Vec::new();
    let mut prow = 0;
    for col in 0..m.cols {
        if prow == m.rows {
            break;
        }
        let Some(r) = (prow..m.rows).find(|&r| !m.get(r, col).is_zero()) else {
            continue;
        };
        m.swap_rows(prow, r);
        if with_aug {
            aug.swap(prow, r);
        }
        let inv = m.get(prow, col).recip();
        for c in col..m.cols {
            let x = m.get(prow, c) * &inv;
            m.set(prow, c, x);
        }
        if with_aug {
            aug[prow].scale(&inv);
        }
        let pivot_row: Vec<Rational> = m.row(prow)[col..].to_vec();
        let pivot_aug = if with_aug { Some(aug[prow].clone()) } else { None };
        for r in 0..m.rows {
            if r == prow {
                continue;
            }
            let f = m.get(r, col).clone();
            if f.is_zero() {
                continue;
            }
            for (k, p) in pivot_row.iter().enumerate() {
                if !p.is_zero() {
                    let x = m.get(r, col + k) - &f * p;
                    m.set(r, col + k, x);
                }
            }
            if let Some(pa) = &pivot_aug {
                aug[r].sub_scaled(&f, pa);
            }
        }
        pivots.push(col);
        prow += 1;
    }
    pivots
}

/// Reduced row echelon form and its pivot columns.
pub fn rref(m: &RationalMatrix) -> (RationalMatrix, Vec<usize>) {
    let mut r = m.clone();
    let pivots = eliminate::<Rational>(&mut r, &mut []);
    (r, pivots)
}

pub fn rank(m: &RationalMatrix) -> usize {
    rref(m).1.len()
}

/// Rank computed by eliminating the transpose, i.e. with the roles of rows
/// and columns exchanged. Used as an independent cross-check of [`rank`].
pub fn rank_by_columns(m: &RationalMatrix) -> usize {
    rank(&m.transpose())
}

/// Basis of the right nullspace, one vector per free column.
pub fn kernel_basis(m: &RationalMatrix) -> Vec<Vec<Rational>> {
    let (r, pivots) = rref(m);
    kernel_from_rref(&r, &pivots)
}

fn kernel_from_rref(r: &RationalMatrix, pivots: &[usize]) -> Vec<Vec<Rational>> {
    let mut is_pivot = vec![false; r.cols];
    for &p in pivots {
        is_pivot[p] = true;
    }
    (0..r.cols)
        .filter(|&c| !is_pivot[c])
        .map(|free| {
            let mut x = vec![Rational::zero(); r.cols];
            x[free] = Rational::one();
            for (row, &p) in pivots.iter().enumerate() {
                let a = r.get(row, free);
                if !a.is_zero() {
                    x[p] = -a.clone();
                }
            }
            x
        })
        .collect()
}

/// Solution set `{particular + span(basis)}` of `m x = rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineSolutionSpace {
    pub particular: Option<Vec<Rational>>,
    pub basis: Vec<Vec<Rational>>,
}

impl AffineSolutionSpace {
    pub fn is_consistent(&self) -> bool {
        self.particular.is_some()
    }

    pub fn dimension(&self) -> Option<usize> {
        self.particular.as_ref().map(|_| self.basis.len())
    }
}

pub fn solve_affine(m: &RationalMatrix, rhs: &[Rational]) -> Result<AffineSolutionSpace> {
    if rhs.len() != m.rows {
        return Err(Error::DimensionMismatch { expected: m.rows, found: rhs.len() });
    }
    let mut r = m.clone();
    let mut b = rhs.to_vec();
    let pivots = if m.rows == 0 { Vec::new() } else { eliminate(&mut r, &mut b) };
    let basis = kernel_from_rref(&r, &pivots);
    if b[pivots.len()..].iter().any(|x| !x.is_zero()) {
        return Ok(AffineSolutionSpace { particular: None, basis });
    }
    let mut x = vec![Rational::zero(); m.cols];
    for (row, &p) in pivots.iter().enumerate() {
        x[p] = b[row].clone();
    }
    Ok(AffineSolutionSpace { particular: Some(x), basis })
}

/// Basis of `{ r : r m = 0 }`; a right-hand side `b` is in the column span
/// iff `r . b = 0` for every returned row.
pub fn left_nullspace(m: &RationalMatrix) -> Vec<Vec<Rational>> {
    kernel_basis(&m.transpose())
}

/// Builds a matrix from sparse columns keyed by arbitrary row labels; rows
/// come out in label order and the labels are returned alongside.
pub fn matrix_from_columns<K: Ord + Clone>(columns: &[BTreeMap<K, Rational>]) -> (RationalMatrix, Vec<K>) {
    let keys: BTreeSet<K> = columns.iter().flat_map(|c| c.keys().cloned()).collect();
    let keys: Vec<K> = keys.into_iter().collect();
    let index: BTreeMap<&K, usize> = keys.iter().enumerate().map(|(i, k)| (k, i)).collect();
    let mut m = RationalMatrix::zeros(keys.len(), columns.len());
    for (c, col) in columns.iter().enumerate() {
        for (k, x) in col {
            m.set(index[k], c, x.clone());
        }
    }
    (m, keys)
}

/// Inverse of a square matrix, `None` if singular.
pub fn inverse(m: &RationalMatrix) -> Option<RationalMatrix> {
    if m.rows != m.cols {
        return None;
    }
    let n = m.rows;
    let mut aug = RationalMatrix::zeros(n, 2 * n);
    for r in 0..n {
        for c in 0..n {
            aug.set(r, c, m.get(r, c).clone());
        }
        aug.set(r, n + r, Rational::one());
    }
    let (red, pivots) = rref(&aug);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    let mut inv = RationalMatrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            inv.set(r, c, red.get(r, n + c).clone());
        }
    }
    Some(inv)
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).filter(|(x, y)| !x.is_zero() && !y.is_zero()).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn rref_examples() {
        let id = RationalMatrix::identity(3);
        assert_eq!(rref(&id), (id.clone(), vec![0, 1, 2]));

        let m = RationalMatrix::from_i64(&[&[1, 1], &[2, 2]]);
        assert_eq!(rref(&m), (RationalMatrix::from_i64(&[&[1, 1], &[0, 0]]), vec![0]));

        let swap = RationalMatrix::from_i64(&[&[0, 1], &[1, 0]]);
        assert_eq!(rref(&swap), (RationalMatrix::identity(2), vec![0, 1]));
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(kernel_basis(&RationalMatrix::from_i64(&[&[1, 1]])), vec![v(&[-1, 1])]);
        assert!(kernel_basis(&RationalMatrix::identity(4)).is_empty());
        assert_eq!(kernel_basis(&RationalMatrix::zeros(2, 3)).len(), 3);
    }

    #[test]
    fn solve_examples() {
        let b = v(&[3, -1, 2]);
        let s = solve_affine(&RationalMatrix::identity(3), &b).unwrap();
        assert_eq!(s.particular, Some(b));
        assert!(s.basis.is_empty());

        let m = RationalMatrix::from_i64(&[&[1, 1]]);
        let s = solve_affine(&m, &v(&[2])).unwrap();
        let x = s.particular.unwrap();
        assert_eq!(m.mul_vec(&x).unwrap(), v(&[2]));
        assert_eq!(s.basis.len(), 1);
        assert_eq!(m.mul_vec(&s.basis[0]).unwrap(), v(&[0]));

        let m = RationalMatrix::from_i64(&[&[1], &[1]]);
        assert_eq!(solve_affine(&m, &v(&[1, 2])).unwrap().particular, None);
    }

    #[test]
    fn solve_dimension_mismatch() {
        let m = RationalMatrix::identity(2);
        assert!(matches!(solve_affine(&m, &v(&[1])), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn left_nullspace_examples() {
        assert_eq!(left_nullspace(&RationalMatrix::from_i64(&[&[1], &[1]])), vec![v(&[-1, 1])]);
        assert!(left_nullspace(&RationalMatrix::from_i64(&[&[2, 1], &[1, 1]])).is_empty());
        assert_eq!(left_nullspace(&RationalMatrix::from_i64(&[&[1, 0], &[0, 0]])), vec![v(&[0, 1])]);
    }

    #[test]
    fn symbolic_augmented_column() {
        let mut m = RationalMatrix::from_i64(&[&[1, 1], &[1, 1]]);
        let mut aug: Vec<SparseExpr> = vec!["p0".parse().unwrap(), "p1".parse().unwrap()];
        let pivots = eliminate(&mut m, &mut aug);
        assert_eq!(pivots, vec![0]);
        assert_eq!(aug[1], "p1 - p0".parse().unwrap());
    }

    #[test]
    fn inverse_and_columns() {
        let m = RationalMatrix::from_i64(&[&[2, 1], &[1, 1]]);
        let inv = inverse(&m).unwrap();
        assert_eq!(m.mul(&inv).unwrap(), RationalMatrix::identity(2));
        assert!(inverse(&RationalMatrix::from_i64(&[&[1, 1], &[1, 1]])).is_none());

        let cols = vec![BTreeMap::from([("b", int(1))]), BTreeMap::from([("a", int(2)), ("b", int(3))])];
        let (m, keys) = matrix_from_columns(&cols);
        assert_eq!(keys, vec!["a", "b"]);
        assert_eq!(m, RationalMatrix::from_i64(&[&[0, 2], &[1, 3]]));
    }

    #[test]
    fn rank_two_ways_agree() {
        let m = RationalMatrix::from_i64(&[&[1, 2, 3], &[2, 4, 6], &[0, 1, 1]]);
        assert_eq!(rank(&m), 2);
        assert_eq!(rank_by_columns(&m), 2);
    }
}
