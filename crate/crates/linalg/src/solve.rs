//! Linear systems `A x = b` over the integers or over `Z/m`.

use num_traits::{Signed, ToPrimitive, Zero};

use crate::dense::DenseMatrix;
use crate::hermite::{hermite_form, lattice_hermite};
use crate::int::{modulo, Int};
use crate::modular::{residue, LeftSolver, ModRow};
use crate::sparse::SparseIntMatrix;

/// Solves `A x = b` (mod `modulus`, or over `Z` when `modulus` is zero).
///
/// The returned solution is canonical: over `Z` it is reduced against a
/// Hermite basis of the kernel lattice, over `Z/m` against the Howell form of
/// the kernel, with entries in `[0, m)`. Returns `None` when inconsistent.
pub fn solve_linear(a: &SparseIntMatrix, b: &[Int], modulus: &Int) -> Option<Vec<Int>> {
    if b.len() != a.rows() || modulus.is_negative() {
        return None;
    }
    if modulus.is_zero() {
        return solve_over_z(a, b);
    }
    if *modulus == Int::from(1) {
        return Some(vec![Int::zero(); a.cols()]);
    }
    match modulus.to_u64() {
        Some(m) => solve_mod(a, b, m),
        None => solve_big_modulus(a, b, modulus),
    }
}

fn solve_over_z(a: &SparseIntMatrix, b: &[Int]) -> Option<Vec<Int>> {
    let n = a.cols();
    // x^T A^T = b^T: b must lie in the row lattice of A^T.
    let at = a.transpose().to_dense();
    let hf = hermite_form(&at);
    let y = hf.express(b)?;
    let mut x = vec![Int::zero(); n];
    for (k, yk) in y.iter().enumerate() {
        if yk.is_zero() {
            continue;
        }
        for (j, t) in hf.t.row(k).iter().enumerate() {
            x[j] += yk * t;
        }
    }
    let kernel = hf.left_kernel();
    if kernel.is_empty() {
        return Some(x);
    }
    Some(lattice_hermite(n, &kernel).reduce(&x))
}

fn solve_mod(a: &SparseIntMatrix, b: &[Int], m: u64) -> Option<Vec<Int>> {
    let n = a.cols();
    let at = a.transpose();
    let rows: Vec<ModRow> = at
        .row_vecs()
        .iter()
        .map(|r| {
            r.entries()
                .iter()
                .map(|(j, v)| (*j, residue(v, m)))
                .filter(|(_, v)| *v != 0)
                .collect()
        })
        .collect();
    let solver = LeftSolver::new(m, &rows, a.rows());
    let rhs: ModRow = b
        .iter()
        .enumerate()
        .map(|(i, v)| (i, residue(v, m)))
        .filter(|(_, v)| *v != 0)
        .collect();
    let x = solver.solve(&rhs)?;
    let mut out = vec![Int::zero(); n];
    for (j, v) in x {
        out[j] = Int::from(v);
    }
    Some(out)
}

/// Moduli beyond `u64`: solve `A x + m y = b` over `Z` and reduce.
fn solve_big_modulus(a: &SparseIntMatrix, b: &[Int], m: &Int) -> Option<Vec<Int>> {
    let (rows, n) = (a.rows(), a.cols());
    let mut aug = DenseMatrix::zeros(rows, n + rows);
    for i in 0..rows {
        for (j, v) in a.row(i).entries() {
            aug[(i, *j)] = v.clone();
        }
        aug[(i, n + i)] = m.clone();
    }
    let x = solve_over_z(&SparseIntMatrix::from_dense(&aug), b)?;
    // Canonical choice modulo {x : A x = 0 mod m}, which contains m Z^n.
    let at = SparseIntMatrix::from_dense(&aug).transpose().to_dense();
    let hf = hermite_form(&at);
    let mut kernel: Vec<Vec<Int>> = hf.left_kernel().into_iter().map(|k| k[..n].to_vec()).collect();
    for j in 0..n {
        let mut e = vec![Int::zero(); n];
        e[j] = m.clone();
        kernel.push(e);
    }
    let red = lattice_hermite(n, &kernel).reduce(&x[..n]);
    Some(red.iter().map(|v| modulo(v, m)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<Int> {
        v.iter().map(|x| Int::from(*x)).collect()
    }

    #[test]
    fn one_by_one_cases() {
        let one = SparseIntMatrix::from_dense_rows(&[vec![1]]);
        assert_eq!(solve_linear(&one, &ints(&[5]), &Int::from(0)), Some(ints(&[5])));
        let two = SparseIntMatrix::from_dense_rows(&[vec![2]]);
        assert_eq!(solve_linear(&two, &ints(&[1]), &Int::from(0)), None);
        assert_eq!(solve_linear(&two, &ints(&[1]), &Int::from(3)), Some(ints(&[2])));
    }

    #[test]
    fn integer_solution_is_canonical() {
        // x + 2y = 3 has solutions (3 - 2t, t); the canonical one does not depend on the column order.
        let a = SparseIntMatrix::from_dense_rows(&[vec![1, 2]]);
        let x = solve_linear(&a, &ints(&[3]), &Int::from(0)).unwrap();
        assert_eq!(&x[0] + Int::from(2) * &x[1], Int::from(3));
        let again = solve_linear(&a, &ints(&[3]), &Int::from(0)).unwrap();
        assert_eq!(x, again);
    }

    #[test]
    fn huge_modulus_path_agrees() {
        let a = SparseIntMatrix::from_dense_rows(&[vec![2, 1], vec![0, 3]]);
        let b = ints(&[1, 2]);
        let m = Int::from(7);
        let small = solve_linear(&a, &b, &m).unwrap();
        let big = solve_big_modulus(&a, &b, &m).unwrap();
        for x in [&small, &big] {
            let ax = a.mul_vec(x);
            for (l, r) in ax.iter().zip(&b) {
                assert!(((l - r) % &m).is_zero());
            }
        }
        assert_eq!(small, big);
    }
}
