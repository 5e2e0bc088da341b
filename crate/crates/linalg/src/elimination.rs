//! Sparse elimination of relation matrices.
//!
//! Relations are eliminated with unit pivots chosen Markowitz-style (shortest
//! row first, then the sparsest column, ties by smallest index). Whatever is
//! left once no unit pivot remains is a small dense core that goes through
//! [`dense_smith`]. Together this gives canonical coordinates on the quotient
//! `Z^n / rowspace(R)`.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};

use crate::dense::DenseMatrix;
use crate::int::{modulo, Int};
use crate::smith::dense_smith;
use crate::sparse::{SparseIntMatrix, SparseVec};

/// Kind of a quotient coordinate: torsion with the given modulus, or free.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoordKind {
    Torsion(Int),
    Free,
}

#[derive(Clone, Debug)]
pub(crate) struct NormalForm {
    ngens: usize,
    /// Pivot columns in elimination order.
    pivot_order: Vec<usize>,
    /// For pivot columns: `e_c == expr[c]` in the quotient, `expr[c]` supported on non-pivot columns.
    expr: Vec<Option<SparseVec>>,
    /// Non-pivot columns touched by the residual relations, and their position.
    core_cols: Vec<usize>,
    core_pos: Vec<Option<usize>>,
    /// Non-pivot columns untouched by any residual relation.
    pure_free: Vec<usize>,
    core_diag: Vec<Int>,
    core_v: DenseMatrix,
    core_v_inv: DenseMatrix,
    /// Coordinate layout: for each coordinate, its source (core index or pure free column) and kind.
    coords: Vec<(CoordSource, CoordKind)>,
}

#[derive(Clone, Copy, Debug)]
enum CoordSource {
    Core(usize),
    Pure(usize),
}

/// Result of the sparse forward pass: unit pivots plus the residual rows.
pub(crate) struct UnitElimination {
    pub pivots: Vec<(usize, SparseVec)>,
    pub residual: Vec<SparseVec>,
}

pub(crate) fn unit_eliminate(ncols: usize, rows: Vec<SparseVec>) -> UnitElimination {
    let mut active: Vec<Option<SparseVec>> = rows
        .into_iter()
        .map(|r| if r.is_zero() { None } else { Some(r) })
        .collect();
    let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); ncols];
    let mut col_count: Vec<usize> = vec![0; ncols];
    let mut by_len: BTreeSet<(usize, usize)> = BTreeSet::new();
    // Rows currently known to have no unit entry; revisited only after they change.
    let mut no_unit: BTreeSet<usize> = BTreeSet::new();
    for (i, r) in active.iter().enumerate() {
        if let Some(r) = r {
            for (c, _) in r.entries() {
                col_rows[*c].push(i);
                col_count[*c] += 1;
            }
            by_len.insert((r.len(), i));
        }
    }

    let mut pivots = Vec::new();
    loop {
        // Shortest active row with a unit entry.
        let mut choice = None;
        let mut skipped = Vec::new();
        for &(len, i) in by_len.iter() {
            let row = active[i].as_ref().expect("indexed row is active");
            let best = row
                .entries()
                .iter()
                .filter(|(_, v)| v.abs().is_one())
                .min_by_key(|(c, _)| (col_count[*c], *c));
            match best {
                Some((c, _)) => {
                    choice = Some((i, *c));
                    break;
                }
                None => skipped.push((len, i)),
            }
        }
        for key in skipped {
            by_len.remove(&key);
            no_unit.insert(key.1);
        }
        let Some((pi, pc)) = choice else { break };

        let prow = active[pi].take().expect("pivot row is active");
        by_len.remove(&(prow.len(), pi));
        for (c, _) in prow.entries() {
            col_count[*c] -= 1;
        }
        let sign = prow.get(pc).expect("pivot entry").clone();

        let mut targets = std::mem::take(&mut col_rows[pc]);
        targets.sort_unstable();
        targets.dedup();
        for j in targets {
            let Some(row) = active[j].as_ref() else { continue };
            let Some(a) = row.get(pc) else { continue };
            // row -= a * sign * prow  (sign = +-1 is its own inverse)
            let factor = -(a * &sign);
            let old_len = row.len();
            let was_no_unit = no_unit.remove(&j);
            if !was_no_unit {
                by_len.remove(&(old_len, j));
            }
            let new_row = row.add_scaled(&factor, &prow);
            let old = active[j].take().expect("row is active");
            update_counts(&old, &new_row, &mut col_count, &mut col_rows, j);
            if !new_row.is_zero() {
                by_len.insert((new_row.len(), j));
                active[j] = Some(new_row);
            }
        }
        pivots.push((pc, prow));
    }

    let residual = active.into_iter().flatten().collect();
    UnitElimination { pivots, residual }
}

fn update_counts(
    old: &SparseVec,
    new: &SparseVec,
    col_count: &mut [usize],
    col_rows: &mut [Vec<usize>],
    row: usize,
) {
    let (a, b) = (old.entries(), new.entries());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j >= b.len() || (i < a.len() && a[i].0 < b[j].0) {
            col_count[a[i].0] -= 1;
            i += 1;
        } else if i >= a.len() || b[j].0 < a[i].0 {
            col_count[b[j].0] += 1;
            col_rows[b[j].0].push(row);
            j += 1;
        } else {
            i += 1;
            j += 1;
        }
    }
}

impl NormalForm {
    pub(crate) fn compute(relations: &SparseIntMatrix) -> Self {
        let n = relations.cols();
        let UnitElimination { pivots, residual } =
            unit_eliminate(n, relations.row_vecs().to_vec());

        let mut is_pivot = vec![false; n];
        for (c, _) in &pivots {
            is_pivot[*c] = true;
        }

        // Back substitution, last pivot first: e_c = -sign * (row - sign*e_c).
        let mut expr: Vec<Option<SparseVec>> = vec![None; n];
        for (c, row) in pivots.iter().rev() {
            let sign = row.get(*c).expect("pivot entry").clone();
            let mut acc = SparseVec::new();
            let mut direct = Vec::new();
            for (j, v) in row.entries() {
                if *j == *c {
                    continue;
                }
                if is_pivot[*j] {
                    let sub = expr[*j].as_ref().expect("later pivot already expressed");
                    acc = acc.add_scaled(&(-(v * &sign)), sub);
                } else {
                    direct.push((*j, -(v * &sign)));
                }
            }
            let direct = SparseVec::from_pairs(direct);
            expr[*c] = Some(acc.add_scaled(&Int::one(), &direct));
        }

        let mut core_cols: Vec<usize> = residual
            .iter()
            .flat_map(|r| r.entries().iter().map(|(c, _)| *c))
            .collect();
        core_cols.sort_unstable();
        core_cols.dedup();
        let mut core_pos = vec![None; n];
        for (k, c) in core_cols.iter().enumerate() {
            core_pos[*c] = Some(k);
        }
        let pure_free: Vec<usize> = (0..n)
            .filter(|c| !is_pivot[*c] && core_pos[*c].is_none())
            .collect();

        let mut core = DenseMatrix::zeros(residual.len(), core_cols.len());
        for (i, r) in residual.iter().enumerate() {
            for (c, v) in r.entries() {
                core[(i, core_pos[*c].expect("core column"))] = v.clone();
            }
        }
        let snf = dense_smith(core);

        let mut coords = Vec::new();
        for (k, d) in snf.diagonal.iter().enumerate() {
            if !d.is_one() {
                coords.push((CoordSource::Core(k), CoordKind::Torsion(d.clone())));
            }
        }
        for k in snf.diagonal.len()..core_cols.len() {
            coords.push((CoordSource::Core(k), CoordKind::Free));
        }
        for c in &pure_free {
            coords.push((CoordSource::Pure(*c), CoordKind::Free));
        }

        NormalForm {
            ngens: n,
            pivot_order: pivots.iter().map(|(c, _)| *c).collect(),
            expr,
            core_cols,
            core_pos,
            pure_free,
            core_diag: snf.diagonal,
            core_v: snf.v,
            core_v_inv: snf.v_inv,
            coords,
        }
    }

    pub(crate) fn coord_kinds(&self) -> Vec<CoordKind> {
        self.coords.iter().map(|(_, k)| k.clone()).collect()
    }

    pub(crate) fn invariant_factors(&self) -> Vec<Int> {
        self.coords
            .iter()
            .filter_map(|(_, k)| match k {
                CoordKind::Torsion(d) => Some(d.clone()),
                CoordKind::Free => None,
            })
            .collect()
    }

    pub(crate) fn free_rank(&self) -> usize {
        self.coords
            .iter()
            .filter(|(_, k)| *k == CoordKind::Free)
            .count()
    }

    pub(crate) fn relation_rank(&self) -> usize {
        self.pivot_order.len() + self.core_diag.len()
    }

    /// Rewrites `x` over the non-pivot columns.
    pub(crate) fn substitute(&self, x: &SparseVec) -> SparseVec {
        let mut direct = Vec::new();
        let mut acc = SparseVec::new();
        for (c, v) in x.entries() {
            match &self.expr[*c] {
                Some(e) => acc = acc.add_scaled(v, e),
                None => direct.push((*c, v.clone())),
            }
        }
        acc.add_scaled(&Int::one(), &SparseVec::from_pairs(direct))
    }

    /// Canonical coordinates of the class of `x`.
    pub(crate) fn coordinates(&self, x: &SparseVec) -> Vec<Int> {
        let y = self.substitute(x);
        let mut core_part = vec![Int::zero(); self.core_cols.len()];
        let mut pure = std::collections::HashMap::new();
        for (c, v) in y.entries() {
            match self.core_pos[*c] {
                Some(k) => core_part[k] = v.clone(),
                None => {
                    pure.insert(*c, v.clone());
                }
            }
        }
        let transformed: Vec<Int> = if self.core_cols.is_empty() {
            Vec::new()
        } else {
            (0..self.core_cols.len())
                .map(|j| {
                    core_part
                        .iter()
                        .enumerate()
                        .filter(|(_, v)| !v.is_zero())
                        .fold(Int::zero(), |acc, (i, v)| acc + v * &self.core_v[(i, j)])
                })
                .collect()
        };
        self.coords
            .iter()
            .map(|(src, kind)| {
                let raw = match src {
                    CoordSource::Core(k) => transformed[*k].clone(),
                    CoordSource::Pure(c) => pure.get(c).cloned().unwrap_or_else(Int::zero),
                };
                match kind {
                    CoordKind::Torsion(d) => modulo(&raw, d),
                    CoordKind::Free => raw,
                }
            })
            .collect()
    }

    /// A generator-space vector whose coordinates are the `k`-th unit vector.
    pub(crate) fn lift(&self, k: usize) -> SparseVec {
        match self.coords[k].0 {
            CoordSource::Pure(c) => SparseVec::unit(c),
            CoordSource::Core(j) => SparseVec::from_pairs(
                (0..self.core_cols.len()).map(|i| (self.core_cols[i], self.core_v_inv[(j, i)].clone())),
            ),
        }
    }

    pub(crate) fn ngens(&self) -> usize {
        self.ngens
    }

    pub(crate) fn is_trivially_free(&self) -> bool {
        self.core_cols.is_empty()
    }

    /// Generator columns that serve directly as free basis elements (when the core is empty).
    pub(crate) fn free_columns(&self) -> &[usize] {
        &self.pure_free
    }
}
