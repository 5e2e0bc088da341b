//! Linear algebra over `Z/mZ` for arbitrary `m >= 2`.
//!
//! Rows are kept in Howell form: a row echelon form whose pivots are divisors
//! of `m`, closed under the annihilator rows `(m/p) * row`. This makes the
//! canonical reduction of a vector well defined (it depends only on its coset)
//! and lets kernels be read off from the rows whose leading column lies past a
//! given limit, even when `m` is composite.
//!
//! Residues are `u64` with products taken in `u128`; `m` must fit in `u64`.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::int::{modulo, Int};

/// Sparse row over `Z/m`: sorted by column, no zero residues.
pub type ModRow = Vec<(usize, u64)>;

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

#[inline]
pub fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    let s = a as u128 + b as u128;
    (s % m as u128) as u64
}

#[inline]
pub fn sub_mod(a: u64, b: u64, m: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        m - (b - a)
    }
}

pub fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (g, x, _) = ext_gcd_i128(a as i128, m as i128);
    (g == 1).then(|| x.rem_euclid(m as i128) as u64)
}

fn ext_gcd_i128(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i128, 0i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

/// Residue of an arbitrary integer.
pub fn residue(x: &Int, m: u64) -> u64 {
    modulo(x, &Int::from(m))
        .to_u64()
        .expect("residue below a u64 modulus")
}

/// Sparse row from integer pairs, reduced mod `m`.
pub fn mod_row_from_ints<'a, I>(pairs: I, m: u64) -> ModRow
where
    I: IntoIterator<Item = (usize, &'a Int)>,
{
    let mut out: Vec<(usize, u64)> = pairs
        .into_iter()
        .map(|(i, v)| (i, residue(v, m)))
        .collect();
    normalize_row(&mut out, m);
    out
}

/// Sorts, merges duplicates and drops zeros.
pub fn normalize_row(row: &mut ModRow, m: u64) {
    row.sort_unstable_by_key(|(i, _)| *i);
    let mut out: ModRow = Vec::with_capacity(row.len());
    for &(i, v) in row.iter() {
        match out.last_mut() {
            Some((j, w)) if *j == i => *w = add_mod(*w, v, m),
            _ => out.push((i, v % m)),
        }
    }
    out.retain(|(_, v)| *v != 0);
    *row = out;
}

pub fn scale_row(row: &[(usize, u64)], f: u64, m: u64) -> ModRow {
    row.iter()
        .filter_map(|&(i, v)| {
            let x = mul_mod(v, f, m);
            (x != 0).then_some((i, x))
        })
        .collect()
}

/// `a + f * b`.
pub fn add_scaled_row(a: &[(usize, u64)], f: u64, b: &[(usize, u64)], m: u64) -> ModRow {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j >= b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i]);
            i += 1;
        } else if i >= a.len() || b[j].0 < a[i].0 {
            let x = mul_mod(b[j].1, f, m);
            if x != 0 {
                out.push((b[j].0, x));
            }
            j += 1;
        } else {
            let x = add_mod(a[i].1, mul_mod(b[j].1, f, m), m);
            if x != 0 {
                out.push((a[i].0, x));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// A unit `u` with `u * a == gcd(a, m)` mod `m`.
fn normalizing_unit(a: u64, m: u64) -> u64 {
    let g = gcd_u64(a, m);
    let mg = m / g;
    if mg == 1 {
        return 1;
    }
    let base = inv_mod((a / g) % mg, mg).expect("cofactor is a unit mod m/g");
    let mut u = base;
    while gcd_u64(u, m) != 1 {
        u += mg;
    }
    u % m
}

#[derive(Clone, Debug)]
pub struct ModEchelon {
    m: u64,
    ncols: usize,
    rows: Vec<Option<ModRow>>,
    count: usize,
}

impl ModEchelon {
    pub fn new(m: u64, ncols: usize) -> Self {
        assert!(m >= 2, "modulus must be at least 2");
        Self {
            m,
            ncols,
            rows: vec![None; ncols],
            count: 0,
        }
    }

    pub fn modulus(&self) -> u64 {
        self.m
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// Number of rows in the echelon form.
    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Rows as `(pivot column, row)` in pivot order.
    pub fn rows(&self) -> impl Iterator<Item = (usize, &ModRow)> {
        self.rows
            .iter()
            .enumerate()
            .filter_map(|(c, r)| r.as_ref().map(|r| (c, r)))
    }

    pub fn pivot_value(&self, c: usize) -> Option<u64> {
        self.rows[c].as_ref().map(|r| r[0].1)
    }

    pub fn insert(&mut self, row: ModRow) {
        let mut queue = vec![row];
        while let Some(v) = queue.pop() {
            let v = self.reduce(&v);
            let Some(&(c, x)) = v.first() else { continue };
            match self.rows[c].take() {
                None => {
                    let u = normalizing_unit(x, self.m);
                    let v = scale_row(&v, u, self.m);
                    let g = v[0].1;
                    if g != 1 {
                        queue.push(scale_row(&v, self.m / g, self.m));
                    }
                    self.rows[c] = Some(v);
                    self.count += 1;
                }
                Some(w) => {
                    // x is a nonzero remainder below the pivot p; merge by a 2x2 unimodular step.
                    let p = w[0].1;
                    let (g, s, t) = ext_gcd_i128(p as i128, x as i128);
                    let m = self.m as i128;
                    let s = s.rem_euclid(m) as u64;
                    let t = t.rem_euclid(m) as u64;
                    let new = add_scaled_row(&scale_row(&w, s, self.m), t, &v, self.m);
                    let other = add_scaled_row(
                        &scale_row(&w, (x as i128 / g) as u64 % self.m, self.m),
                        self.m - ((p as i128 / g) as u64 % self.m),
                        &v,
                        self.m,
                    );
                    debug_assert_eq!(new.first().map(|e| e.0), Some(c));
                    queue.push(other);
                    // Re-queue the merged row so it is normalized and its annihilator added.
                    self.count -= 1;
                    queue.push(new);
                }
            }
        }
    }

    pub fn extend<I: IntoIterator<Item = ModRow>>(&mut self, rows: I) {
        for r in rows {
            self.insert(r);
        }
    }

    /// Canonical representative of `v` modulo the row span.
    pub fn reduce(&self, v: &[(usize, u64)]) -> ModRow {
        self.reduce_from(v, 0)
    }

    /// Like [`reduce`](Self::reduce) but only pivots at columns `>= start` are used.
    pub fn reduce_from(&self, v: &[(usize, u64)], start: usize) -> ModRow {
        let m = self.m;
        let mut dense: Vec<u64> = vec![0; self.ncols];
        let mut queued: Vec<bool> = vec![false; self.ncols];
        let mut heap = BinaryHeap::with_capacity(v.len() * 2);
        for &(i, x) in v {
            dense[i] = add_mod(dense[i], x, m);
            if !queued[i] {
                queued[i] = true;
                heap.push(Reverse(i));
            }
        }
        let mut out = Vec::new();
        while let Some(Reverse(c)) = heap.pop() {
            let x = dense[c];
            if x == 0 {
                continue;
            }
            if c >= start {
                if let Some(row) = &self.rows[c] {
                    let p = row[0].1;
                    let q = x / p;
                    if q != 0 {
                        let f = m - q % m;
                        for &(j, w) in row {
                            dense[j] = add_mod(dense[j], mul_mod(w, f, m), m);
                            if !queued[j] {
                                queued[j] = true;
                                heap.push(Reverse(j));
                            }
                        }
                    }
                }
            }
            if dense[c] != 0 {
                out.push((c, dense[c]));
            }
        }
        out
    }

    pub fn contains(&self, v: &[(usize, u64)]) -> bool {
        self.reduce(v).is_empty()
    }

    /// Order of the row span as a subgroup of `(Z/m)^ncols`.
    pub fn order(&self) -> Int {
        self.rows()
            .fold(Int::from(1), |acc, (_, r)| acc * Int::from(self.m / r[0].1))
    }

    /// Rows with leading column `>= limit`, with those columns shifted down by `limit`.
    pub fn rows_past(&self, limit: usize) -> Vec<ModRow> {
        self.rows()
            .filter(|(c, _)| *c >= limit)
            .map(|(_, r)| r.iter().map(|&(j, v)| (j - limit, v)).collect())
            .collect()
    }

    /// True when every pivot is 1 (the span is a free summand).
    pub fn all_unit_pivots(&self) -> bool {
        self.rows().all(|(_, r)| r[0].1 == 1)
    }
}

/// Solver for `x * A = b` over `Z/m`, where `A` is given by its rows.
///
/// Internally echelonizes `[A | I]`; the rows with zero `A`-part span the left kernel.
#[derive(Clone, Debug)]
pub struct LeftSolver {
    ech: ModEchelon,
    ncols: usize,
    nrows: usize,
}

impl LeftSolver {
    pub fn new(m: u64, rows: &[ModRow], ncols: usize) -> Self {
        let nrows = rows.len();
        let mut ech = ModEchelon::new(m, ncols + nrows);
        for (i, r) in rows.iter().enumerate() {
            let mut aug = r.clone();
            aug.push((ncols + i, 1));
            ech.insert(aug);
        }
        Self { ech, ncols, nrows }
    }

    pub fn modulus(&self) -> u64 {
        self.ech.modulus()
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// Echelon rows of `[A | I]` whose pivot lies in `lo..hi`, columns unshifted.
    ///
    /// With `hi` past the end these generate every row of the span vanishing on `0..lo`.
    pub fn echelon_rows(&self, lo: usize, hi: usize) -> Vec<ModRow> {
        self.ech
            .rows()
            .filter(|(c, _)| *c >= lo && *c < hi)
            .map(|(_, r)| r.clone())
            .collect()
    }

    /// Howell generators of `{x : x A = 0}`.
    pub fn kernel(&self) -> Vec<ModRow> {
        self.ech.rows_past(self.ncols)
    }

    /// Order of the left kernel.
    pub fn kernel_order(&self) -> Int {
        self.ech
            .rows()
            .filter(|(c, _)| *c >= self.ncols)
            .fold(Int::from(1), |acc, (_, r)| {
                acc * Int::from(self.ech.modulus() / r[0].1)
            })
    }

    /// Order of the row span of `A`.
    pub fn image_order(&self) -> Int {
        self.ech
            .rows()
            .filter(|(c, _)| *c < self.ncols)
            .fold(Int::from(1), |acc, (_, r)| {
                acc * Int::from(self.ech.modulus() / r[0].1)
            })
    }

    /// Canonical solution of `x A = b`, reduced modulo the kernel.
    pub fn solve(&self, b: &[(usize, u64)]) -> Option<ModRow> {
        let m = self.ech.modulus();
        let red = self.ech.reduce(b);
        if red.first().is_some_and(|(c, _)| *c < self.ncols) {
            return None;
        }
        // red = b - cA on the A-part (zero) and -c on the tag part.
        let neg: ModRow = red
            .iter()
            .map(|&(j, v)| (j, (m - v) % m))
            .filter(|(_, v)| *v != 0)
            .collect();
        let canon = self.ech.reduce_from(&neg, self.ncols);
        Some(canon.into_iter().map(|(j, v)| (j - self.ncols, v)).collect())
    }

    /// Canonical representative of `x` modulo the left kernel.
    pub fn reduce_solution(&self, x: &[(usize, u64)]) -> ModRow {
        let shifted: ModRow = x.iter().map(|&(j, v)| (j + self.ncols, v)).collect();
        self.ech
            .reduce_from(&shifted, self.ncols)
            .into_iter()
            .map(|(j, v)| (j - self.ncols, v))
            .collect()
    }
}

/// `x * A` for a sparse row `x` and the rows of `A`.
pub fn row_times(x: &[(usize, u64)], rows: &[ModRow], m: u64) -> ModRow {
    let mut acc: ModRow = Vec::new();
    for &(i, v) in x {
        acc = add_scaled_row(&acc, v, &rows[i], m);
    }
    acc
}

/// Tests whether a big integer is zero modulo `m`.
pub fn divisible(x: &Int, m: u64) -> bool {
    (x % Int::from(m)).is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn span_brute(m: u64, rows: &[Vec<u64>], n: usize) -> std::collections::BTreeSet<Vec<u64>> {
        let mut span = std::collections::BTreeSet::new();
        span.insert(vec![0; n]);
        loop {
            let mut grew = false;
            let current: Vec<Vec<u64>> = span.iter().cloned().collect();
            for v in &current {
                for r in rows {
                    let w: Vec<u64> = v.iter().zip(r).map(|(a, b)| (a + b) % m).collect();
                    grew |= span.insert(w);
                }
            }
            if !grew {
                return span;
            }
        }
    }

    fn sparse(v: &[u64]) -> ModRow {
        v.iter()
            .enumerate()
            .filter(|(_, x)| **x != 0)
            .map(|(i, x)| (i, *x))
            .collect()
    }

    #[test]
    fn howell_order_and_membership_match_brute_force() {
        let cases: Vec<(u64, Vec<Vec<u64>>)> = vec![
            (9, vec![vec![3, 1, 0], vec![6, 0, 3]]),
            (15, vec![vec![5, 3, 0], vec![3, 5, 1], vec![0, 0, 5]]),
            (4, vec![vec![2, 1], vec![0, 2]]),
            (12, vec![vec![4, 6, 3], vec![6, 4, 0]]),
        ];
        for (m, rows) in cases {
            let n = rows[0].len();
            let mut ech = ModEchelon::new(m, n);
            for r in &rows {
                ech.insert(sparse(r));
            }
            let span = span_brute(m, &rows, n);
            assert_eq!(ech.order(), Int::from(span.len()), "order for m={m}");
            let mut reps = std::collections::BTreeSet::new();
            let total = (m as usize).pow(n as u32);
            for code in 0..total {
                let mut v = vec![0u64; n];
                let mut c = code;
                for x in v.iter_mut() {
                    *x = (c % m as usize) as u64;
                    c /= m as usize;
                }
                assert_eq!(ech.contains(&sparse(&v)), span.contains(&v));
                reps.insert(ech.reduce(&sparse(&v)));
            }
            assert_eq!(reps.len() * span.len(), total, "canonical reps for m={m}");
        }
    }

    #[test]
    fn left_solver_over_z9() {
        let rows = vec![vec![(0, 3), (1, 1)], vec![(0, 6), (1, 2)], vec![(1, 3)]];
        let s = LeftSolver::new(9, &rows, 2);
        let x = s.solve(&[(0, 3), (1, 4)]).expect("solvable");
        assert_eq!(row_times(&x, &rows, 9), vec![(0, 3), (1, 4)]);
        assert!(s.solve(&[(0, 1)]).is_none());
        for k in s.kernel() {
            assert!(row_times(&k, &rows, 9).is_empty());
        }
    }

    #[test]
    fn inverse_and_units() {
        assert_eq!(inv_mod(2, 3), Some(2));
        assert_eq!(inv_mod(3, 9), None);
        let u = normalizing_unit(6, 9);
        assert_eq!(mul_mod(u, 6, 9), 3);
    }
}
