//! Row-style Hermite normal form over the integers and lattice helpers.

use num_traits::{Signed, Zero};

use crate::dense::DenseMatrix;
use crate::int::{ext_gcd, floor_div, Int};

/// `t * a == h` with `t` unimodular and `h` in reduced row echelon form:
/// positive pivots, entries above each pivot in `[0, pivot)`.
#[derive(Clone, Debug)]
pub struct Hermite {
    pub h: DenseMatrix,
    pub t: DenseMatrix,
    /// Pivot column of each of the first `rank` rows.
    pub pivots: Vec<usize>,
}

impl Hermite {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Nonzero rows of `h`: a basis of the row lattice.
    pub fn basis(&self) -> Vec<Vec<Int>> {
        (0..self.rank()).map(|i| self.h.row(i).to_vec()).collect()
    }

    /// Rows of `t` spanning the left kernel `{x : x a = 0}`.
    pub fn left_kernel(&self) -> Vec<Vec<Int>> {
        (self.rank()..self.t.rows())
            .map(|i| self.t.row(i).to_vec())
            .collect()
    }

    /// Reduces `v` modulo the row lattice; the result is the unique
    /// representative of `v + lattice` with entries at pivot columns in `[0, pivot)`.
    pub fn reduce(&self, v: &[Int]) -> Vec<Int> {
        let mut v = v.to_vec();
        for (k, &c) in self.pivots.iter().enumerate() {
            let p = &self.h[(k, c)];
            let q = floor_div(&v[c], p);
            if q.is_zero() {
                continue;
            }
            for (j, x) in v.iter_mut().enumerate() {
                let hv = &self.h[(k, j)];
                if !hv.is_zero() {
                    *x -= &q * hv;
                }
            }
        }
        v
    }

    /// Coefficients `y` with `y * basis == v`, if `v` lies in the row lattice.
    pub fn express(&self, v: &[Int]) -> Option<Vec<Int>> {
        let mut rest = v.to_vec();
        let mut coeffs = Vec::with_capacity(self.rank());
        for (k, &c) in self.pivots.iter().enumerate() {
            let p = &self.h[(k, c)];
            if !(&rest[c] % p).is_zero() {
                return None;
            }
            let q = &rest[c] / p;
            for (j, x) in rest.iter_mut().enumerate() {
                let hv = &self.h[(k, j)];
                if !hv.is_zero() {
                    *x -= &q * hv;
                }
            }
            coeffs.push(q);
        }
        rest.iter().all(|x| x.is_zero()).then_some(coeffs)
    }

    pub fn contains(&self, v: &[Int]) -> bool {
        self.express(v).is_some()
    }
}

pub fn hermite_form(a: &DenseMatrix) -> Hermite {
    let (m, n) = (a.rows(), a.cols());
    let mut h = a.clone();
    let mut t = DenseMatrix::identity(m);
    let mut pivots = Vec::new();
    let mut k = 0;
    for c in 0..n {
        if k == m {
            break;
        }
        for i in k + 1..m {
            if h[(i, c)].is_zero() {
                continue;
            }
            if h[(k, c)].is_zero() {
                h.swap_rows(k, i);
                t.swap_rows(k, i);
                continue;
            }
            let (g, x, y) = ext_gcd(&h[(k, c)], &h[(i, c)]);
            let z = -(&h[(i, c)] / &g);
            let w = &h[(k, c)] / &g;
            h.combine_rows(k, i, &x, &y, &z, &w);
            t.combine_rows(k, i, &x, &y, &z, &w);
        }
        if h[(k, c)].is_zero() {
            continue;
        }
        if h[(k, c)].is_negative() {
            h.negate_row(k);
            t.negate_row(k);
        }
        let p = h[(k, c)].clone();
        for i in 0..k {
            let q = floor_div(&h[(i, c)], &p);
            if !q.is_zero() {
                let f = -q;
                h.add_row_multiple(i, k, &f);
                t.add_row_multiple(i, k, &f);
            }
        }
        pivots.push(c);
        k += 1;
    }
    Hermite { h, t, pivots }
}

/// Hermite basis of the lattice spanned by `rows` (each of length `dim`).
pub fn lattice_hermite(dim: usize, rows: &[Vec<Int>]) -> Hermite {
    let mut m = DenseMatrix::zeros(rows.len(), dim);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r.len(), dim);
        for (j, v) in r.iter().enumerate() {
            m[(i, j)] = v.clone();
        }
    }
    hermite_form(&m)
}
