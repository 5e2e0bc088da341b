use kolyrec_linalg::{
    smith_normal_form, solve_linear, DenseMatrix, Int, ModuleHom, PresentedModule, SparseIntMatrix,
    SparseVec,
};
use num_traits::{Signed, Zero};
use proptest::prelude::*;

/// k-th determinantal divisor: gcd of all k x k minors.
fn determinantal_divisor(a: &[Vec<i64>], k: usize) -> Int {
    let (m, n) = (a.len(), a[0].len());
    let mut g = Int::zero();
    for rows in subsets(m, k) {
        for cols in subsets(n, k) {
            let minor: Vec<Vec<i64>> = rows
                .iter()
                .map(|&i| cols.iter().map(|&j| a[i][j]).collect())
                .collect();
            let d = DenseMatrix::from_rows(&minor).determinant();
            g = num_integer::Integer::gcd(&g, &d);
        }
    }
    g
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

/// Smith diagonal from determinantal divisors, independent of any elimination.
fn oracle_diagonal(a: &[Vec<i64>]) -> Vec<Int> {
    let r = a.len().min(a[0].len());
    let mut out = Vec::new();
    let mut prev = Int::from(1);
    for k in 1..=r {
        let d = determinantal_divisor(a, k);
        if d.is_zero() {
            break;
        }
        out.push(&d / &prev);
        prev = d;
    }
    out
}

#[test]
fn smith_two_by_two_example() {
    let a = SparseIntMatrix::from_dense_rows(&[vec![2, 4], vec![6, 8]]);
    let s = smith_normal_form(&a);
    assert_eq!(s.diagonal, vec![Int::from(2), Int::from(4)]);
    assert_eq!(oracle_diagonal(&[vec![2, 4], vec![6, 8]]), s.diagonal);
}

fn small_matrix() -> impl Strategy<Value = Vec<Vec<i64>>> {
    (1usize..5, 1usize..5).prop_flat_map(|(m, n)| {
        prop::collection::vec(prop::collection::vec(-6i64..7, n), m)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn smith_recomposes_with_unimodular_transforms(rows in small_matrix()) {
        let a = SparseIntMatrix::from_dense_rows(&rows);
        let s = smith_normal_form(&a);
        prop_assert_eq!(s.u.mul(&a.to_dense()).mul(&s.v), s.s.to_dense());
        prop_assert!(s.s.to_dense().is_diagonal());
        prop_assert_eq!(s.u.determinant().abs(), Int::from(1));
        prop_assert_eq!(s.v.determinant().abs(), Int::from(1));
        for w in s.diagonal.windows(2) {
            prop_assert!((&w[1] % &w[0]).is_zero());
        }
        prop_assert!(s.diagonal.iter().all(|d| d.is_positive()));
        prop_assert_eq!(s.diagonal.clone(), oracle_diagonal(&rows));
    }

    #[test]
    fn presented_invariants_ignore_generator_order(rows in small_matrix(), seed in 0u64..1000) {
        let n = rows[0].len();
        let mut perm: Vec<usize> = (0..n).collect();
        // Deterministic shuffle from the seed.
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let a = PresentedModule::new((0..n).collect(), SparseIntMatrix::from_dense_rows(&rows)).unwrap();
        let permuted: Vec<Vec<i64>> = rows
            .iter()
            .map(|r| (0..n).map(|j| r[perm[j]]).collect())
            .collect();
        let b = PresentedModule::new(perm.clone(), SparseIntMatrix::from_dense_rows(&permuted)).unwrap();
        prop_assert_eq!(a.invariant_factors(), b.invariant_factors());
        prop_assert_eq!(a.free_rank(), b.free_rank());
        prop_assert!(a.free_rank() + a.invariant_factors().len() <= n);
        let diag = oracle_diagonal(&rows);
        let tors: Vec<Int> = diag.iter().filter(|d| **d > Int::from(1)).cloned().collect();
        prop_assert_eq!(a.invariant_factors(), tors);
        prop_assert_eq!(a.free_rank(), n - diag.len());
        for rel in a.relations().row_vecs() {
            prop_assert!(a.is_zero(rel));
        }
    }

    #[test]
    fn coordinates_are_class_invariants(rows in small_matrix(), x in prop::collection::vec(-5i64..6, 4), c in prop::collection::vec(-3i64..4, 4)) {
        let n = rows[0].len();
        let a = PresentedModule::new((0..n).collect(), SparseIntMatrix::from_dense_rows(&rows)).unwrap();
        let xv = SparseVec::from_pairs(x.iter().take(n).enumerate().map(|(i, v)| (i, Int::from(*v))));
        let mut shifted = xv.clone();
        for (i, r) in a.relations().row_vecs().iter().enumerate() {
            shifted = shifted.add_scaled(&Int::from(c[i % c.len()]), r);
        }
        prop_assert_eq!(a.coordinates(&xv), a.coordinates(&shifted));
        let back = a.from_coordinates(&a.coordinates(&xv));
        prop_assert!(a.equal(&back, &xv));
    }

    #[test]
    fn solve_matches_exhaustive_search(
        modulus in 2u64..6,
        m in 1usize..4,
        n in 1usize..4,
        entries in prop::collection::vec(0i64..5, 9),
        rhs in prop::collection::vec(0i64..5, 3),
    ) {
        let rows: Vec<Vec<i64>> = (0..m).map(|i| (0..n).map(|j| entries[i * 3 + j]).collect()).collect();
        let a = SparseIntMatrix::from_dense_rows(&rows);
        let b: Vec<Int> = rhs[..m].iter().map(|v| Int::from(*v)).collect();
        let md = Int::from(modulus);
        let got = solve_linear(&a, &b, &md);
        let mut found = false;
        let total = (modulus as usize).pow(n as u32);
        for code in 0..total {
            let mut x = Vec::with_capacity(n);
            let mut t = code;
            for _ in 0..n {
                x.push(Int::from(t % modulus as usize));
                t /= modulus as usize;
            }
            let ax = a.mul_vec(&x);
            if ax.iter().zip(&b).all(|(l, r)| ((l - r) % &md).is_zero()) {
                found = true;
                break;
            }
        }
        match got {
            Some(x) => {
                let ax = a.mul_vec(&x);
                prop_assert!(ax.iter().zip(&b).all(|(l, r)| ((l - r) % &md).is_zero()));
                prop_assert!(found);
            }
            None => prop_assert!(!found),
        }
    }

    #[test]
    fn integer_solve_is_correct(rows in small_matrix(), x in prop::collection::vec(-4i64..5, 4)) {
        let n = rows[0].len();
        let a = SparseIntMatrix::from_dense_rows(&rows);
        let xs: Vec<Int> = x.iter().take(n).map(|v| Int::from(*v)).collect();
        let b = a.mul_vec(&xs);
        let sol = solve_linear(&a, &b, &Int::from(0)).expect("consistent by construction");
        prop_assert_eq!(a.mul_vec(&sol), b);
    }
}

#[test]
fn cokernel_of_six_minus_frobenius_on_a_point() {
    // On U_1 = Z[0], Frob acts trivially, so 7 - Frob is multiplication by 6.
    let u1 = PresentedModule::free(vec!["0"]);
    let hom = ModuleHom::new(&u1, &u1, vec![SparseVec::from_pairs([(0, Int::from(6))])]).unwrap();
    assert_eq!(hom.cokernel().invariant_factors(), vec![Int::from(6)]);
}
