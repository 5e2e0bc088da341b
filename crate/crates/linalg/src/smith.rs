//! Smith normal form with unimodular transforms (dense, desk scale).

use num_traits::{Signed, Zero};

use crate::dense::DenseMatrix;
use crate::int::Int;
use crate::sparse::SparseIntMatrix;

/// `u * a * v == s`, with `s` diagonal, `s[i][i] | s[i+1][i+1]`, all entries `>= 0`.
#[derive(Clone, Debug)]
pub struct Smith {
    pub u: DenseMatrix,
    pub s: SparseIntMatrix,
    pub v: DenseMatrix,
    /// Nonzero diagonal entries in order; its length is the rank.
    pub diagonal: Vec<Int>,
}

impl Smith {
    pub fn rank(&self) -> usize {
        self.diagonal.len()
    }

    /// Diagonal entries greater than one.
    pub fn invariant_factors(&self) -> Vec<Int> {
        self.diagonal
            .iter()
            .filter(|d| *d > &Int::from(1))
            .cloned()
            .collect()
    }
}

/// Smith form of a sparse matrix. Total: every integer matrix has one.
pub fn smith_normal_form(a: &SparseIntMatrix) -> Smith {
    let full = dense_smith(a.to_dense());
    Smith {
        u: full.u,
        s: SparseIntMatrix::from_dense(&full.s),
        v: full.v,
        diagonal: full.diagonal,
    }
}

/// Dense Smith reduction that also records `v_inv` with `v * v_inv == I`.
pub(crate) struct DenseSmith {
    pub u: DenseMatrix,
    pub s: DenseMatrix,
    pub v: DenseMatrix,
    pub v_inv: DenseMatrix,
    pub diagonal: Vec<Int>,
}

pub(crate) fn dense_smith(mut a: DenseMatrix) -> DenseSmith {
    let (m, n) = (a.rows(), a.cols());
    let mut u = DenseMatrix::identity(m);
    let mut v = DenseMatrix::identity(n);
    let mut v_inv = DenseMatrix::identity(n);
    let mut diagonal = Vec::new();

    for t in 0..m.min(n) {
        loop {
            let Some((pi, pj)) = min_abs_entry(&a, t) else {
                return finish(a, u, v, v_inv, diagonal);
            };
            a.swap_rows(t, pi);
            u.swap_rows(t, pi);
            a.swap_cols(t, pj);
            v.swap_cols(t, pj);
            v_inv.swap_rows(t, pj);

            let mut dirty = false;
            for i in t + 1..m {
                if a[(i, t)].is_zero() {
                    continue;
                }
                let q = -(&a[(i, t)] / &a[(t, t)]);
                a.add_row_multiple(i, t, &q);
                u.add_row_multiple(i, t, &q);
                dirty |= !a[(i, t)].is_zero();
            }
            for j in t + 1..n {
                if a[(t, j)].is_zero() {
                    continue;
                }
                let q = -(&a[(t, j)] / &a[(t, t)]);
                a.add_col_multiple(j, t, &q);
                v.add_col_multiple(j, t, &q);
                v_inv.add_row_multiple(t, j, &(-&q));
                dirty |= !a[(t, j)].is_zero();
            }
            if dirty {
                continue;
            }
            let pivot = a[(t, t)].clone();
            let offender = (t + 1..m).find(|&i| {
                (t + 1..n).any(|j| !(&a[(i, j)] % &pivot).is_zero())
            });
            match offender {
                Some(i) => {
                    let one = Int::from(1);
                    a.add_row_multiple(t, i, &one);
                    u.add_row_multiple(t, i, &one);
                }
                None => break,
            }
        }
        if a[(t, t)].is_negative() {
            a.negate_row(t);
            u.negate_row(t);
        }
        diagonal.push(a[(t, t)].clone());
    }
    finish(a, u, v, v_inv, diagonal)
}

fn finish(
    s: DenseMatrix,
    u: DenseMatrix,
    v: DenseMatrix,
    v_inv: DenseMatrix,
    diagonal: Vec<Int>,
) -> DenseSmith {
    DenseSmith {
        u,
        s,
        v,
        v_inv,
        diagonal,
    }
}

fn min_abs_entry(a: &DenseMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(Int, usize, usize)> = None;
    for i in t..a.rows() {
        for j in t..a.cols() {
            let x = &a[(i, j)];
            if x.is_zero() {
                continue;
            }
            let ax = x.abs();
            if best.as_ref().is_none_or(|(b, _, _)| ax < *b) {
                let done = ax == Int::from(1);
                best = Some((ax, i, j));
                if done {
                    return best.map(|(_, i, j)| (i, j));
                }
            }
        }
    }
    best.map(|(_, i, j)| (i, j))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_zero() {
        let id = SparseIntMatrix::identity(3);
        let s = smith_normal_form(&id);
        assert_eq!(s.s, SparseIntMatrix::identity(3));
        let z = SparseIntMatrix::zeros(2, 2);
        let s = smith_normal_form(&z);
        assert!(s.s.is_zero());
        assert_eq!(s.rank(), 0);
    }

    #[test]
    fn transforms_recompose() {
        let a = SparseIntMatrix::from_dense_rows(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]);
        let snf = dense_smith(a.to_dense());
        assert_eq!(snf.u.mul(&a.to_dense()).mul(&snf.v), snf.s);
        assert_eq!(snf.v.mul(&snf.v_inv), DenseMatrix::identity(3));
        assert_eq!(
            snf.diagonal,
            vec![Int::from(2), Int::from(6), Int::from(12)]
        );
    }
}
