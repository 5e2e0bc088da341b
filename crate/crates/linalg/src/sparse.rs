//! Sparse integer vectors and matrices.
//!
//! A [`SparseVec`] is a list of `(index, value)` pairs sorted by index with no
//! stored zeros. Matrices are stored row-wise.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use crate::dense::DenseMatrix;
use crate::int::Int;
use crate::LinalgError;

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SparseVec {
    entries: Vec<(usize, Int)>,
}

impl SparseVec {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a vector from unsorted pairs, summing duplicates and dropping zeros.
    pub fn from_pairs<I: IntoIterator<Item = (usize, Int)>>(pairs: I) -> Self {
        let mut acc: BTreeMap<usize, Int> = BTreeMap::new();
        for (i, v) in pairs {
            *acc.entry(i).or_insert_with(Int::zero) += v;
        }
        Self {
            entries: acc.into_iter().filter(|(_, v)| !v.is_zero()).collect(),
        }
    }

    /// Trusts the caller: pairs sorted by index, no duplicates, no zeros.
    pub(crate) fn from_sorted_unchecked(entries: Vec<(usize, Int)>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(entries.iter().all(|(_, v)| !v.is_zero()));
        Self { entries }
    }

    pub fn unit(i: usize) -> Self {
        Self {
            entries: vec![(i, Int::from(1))],
        }
    }

    pub fn from_dense(values: &[Int]) -> Self {
        Self {
            entries: values
                .iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(i, v)| (i, v.clone()))
                .collect(),
        }
    }

    pub fn to_dense(&self, len: usize) -> Vec<Int> {
        let mut out = vec![Int::zero(); len];
        for (i, v) in &self.entries {
            out[*i] = v.clone();
        }
        out
    }

    pub fn entries(&self) -> &[(usize, Int)] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<(usize, Int)> {
        self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<&Int> {
        self.entries
            .binary_search_by_key(&i, |(j, _)| *j)
            .ok()
            .map(|k| &self.entries[k].1)
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.last().map(|(i, _)| *i)
    }

    /// `self + factor * other`.
    pub fn add_scaled(&self, factor: &Int, other: &SparseVec) -> SparseVec {
        if factor.is_zero() {
            return self.clone();
        }
        let (a, b) = (&self.entries, &other.entries);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            if j >= b.len() || (i < a.len() && a[i].0 < b[j].0) {
                out.push(a[i].clone());
                i += 1;
            } else if i >= a.len() || b[j].0 < a[i].0 {
                out.push((b[j].0, factor * &b[j].1));
                j += 1;
            } else {
                let v = &a[i].1 + factor * &b[j].1;
                if !v.is_zero() {
                    out.push((a[i].0, v));
                }
                i += 1;
                j += 1;
            }
        }
        SparseVec { entries: out }
    }

    pub fn scale(&self, factor: &Int) -> SparseVec {
        if factor.is_zero() {
            return SparseVec::new();
        }
        SparseVec {
            entries: self
                .entries
                .iter()
                .map(|(i, v)| (*i, v * factor))
                .collect(),
        }
    }

    pub fn neg(&self) -> SparseVec {
        SparseVec {
            entries: self.entries.iter().map(|(i, v)| (*i, -v)).collect(),
        }
    }

    /// Reindexes entries through `map`; entries mapped to `None` are dropped.
    pub fn reindex(&self, map: impl Fn(usize) -> Option<usize>) -> SparseVec {
        SparseVec::from_pairs(
            self.entries
                .iter()
                .filter_map(|(i, v)| map(*i).map(|j| (j, v.clone()))),
        )
    }

    pub fn dot_dense(&self, dense: &[Int]) -> Int {
        self.entries
            .iter()
            .fold(Int::zero(), |acc, (i, v)| acc + v * &dense[*i])
    }

    pub fn max_abs(&self) -> Int {
        self.entries
            .iter()
            .map(|(_, v)| v.abs())
            .max()
            .unwrap_or_else(Int::zero)
    }
}

impl FromIterator<(usize, Int)> for SparseVec {
    fn from_iter<T: IntoIterator<Item = (usize, Int)>>(iter: T) -> Self {
        SparseVec::from_pairs(iter)
    }
}

/// Row-major sparse integer matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseIntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<SparseVec>,
}

impl SparseIntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![SparseVec::new(); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            data: (0..n).map(SparseVec::unit).collect(),
        }
    }

    pub fn from_rows(cols: usize, rows: Vec<SparseVec>) -> Result<Self, LinalgError> {
        for (r, row) in rows.iter().enumerate() {
            if let Some(c) = row.max_index() {
                if c >= cols {
                    return Err(LinalgError::IndexOutOfBounds {
                        row: r,
                        col: c,
                        rows: rows.len(),
                        cols,
                    });
                }
            }
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows,
        })
    }

    pub fn from_dense_rows(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let data = rows
            .iter()
            .map(|r| {
                assert_eq!(r.len(), cols, "ragged dense input");
                SparseVec::from_pairs(r.iter().enumerate().map(|(j, v)| (j, Int::from(*v))))
            })
            .collect();
        Self {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn from_dense(m: &DenseMatrix) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            data: (0..m.rows())
                .map(|i| SparseVec::from_dense(m.row(i)))
                .collect(),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.rows, self.cols);
        for (i, row) in self.data.iter().enumerate() {
            for (j, v) in row.entries() {
                m[(i, *j)] = v.clone();
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

    pub fn row(&self, i: usize) -> &SparseVec {
        &self.data[i]
    }

    pub fn row_vecs(&self) -> &[SparseVec] {
        &self.data
    }

    pub fn into_row_vecs(self) -> Vec<SparseVec> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> Int {
        self.data[i].get(j).cloned().unwrap_or_else(Int::zero)
    }

    pub fn set(&mut self, i: usize, j: usize, value: Int) -> Result<(), LinalgError> {
        if i >= self.rows || j >= self.cols {
            return Err(LinalgError::IndexOutOfBounds {
                row: i,
                col: j,
                rows: self.rows,
                cols: self.cols,
            });
        }
        let mut pairs: Vec<(usize, Int)> = self.data[i]
            .entries()
            .iter()
            .filter(|(c, _)| *c != j)
            .cloned()
            .collect();
        pairs.push((j, value));
        self.data[i] = SparseVec::from_pairs(pairs);
        Ok(())
    }

    pub fn push_row(&mut self, row: SparseVec) -> Result<(), LinalgError> {
        if let Some(c) = row.max_index() {
            if c >= self.cols {
                return Err(LinalgError::IndexOutOfBounds {
                    row: self.rows,
                    col: c,
                    rows: self.rows + 1,
                    cols: self.cols,
                });
            }
        }
        self.data.push(row);
        self.rows += 1;
        Ok(())
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().map(|r| r.len()).sum()
    }

    pub fn transpose(&self) -> SparseIntMatrix {
        let mut cols: Vec<Vec<(usize, Int)>> = vec![Vec::new(); self.cols];
        for (i, row) in self.data.iter().enumerate() {
            for (j, v) in row.entries() {
                cols[*j].push((i, v.clone()));
            }
        }
        SparseIntMatrix {
            rows: self.cols,
            cols: self.rows,
            data: cols
                .into_iter()
                .map(SparseVec::from_sorted_unchecked)
                .collect(),
        }
    }

    /// Matrix-vector product `A x` for a dense column vector.
    pub fn mul_vec(&self, x: &[Int]) -> Vec<Int> {
        assert_eq!(x.len(), self.cols);
        self.data.iter().map(|row| row.dot_dense(x)).collect()
    }

    /// Row vector times matrix: `x A`.
    pub fn left_mul_sparse(&self, x: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        for (i, v) in x.entries() {
            out = out.add_scaled(v, &self.data[*i]);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|r| r.is_zero())
    }
}
