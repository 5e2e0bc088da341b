//! Finitely presented abelian groups, their elements and homomorphisms.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;
use std::sync::{Arc, OnceLock};

use num_traits::{One, Zero};

use crate::dense::DenseMatrix;
use crate::elimination::{CoordKind, NormalForm};
use crate::hermite::hermite_form;
use crate::int::Int;
use crate::sparse::{SparseIntMatrix, SparseVec};
use crate::LinalgError;

/// `Z^gens / rowspace(relations)`, with normal-form data computed on first use.
pub struct PresentedModule<L> {
    labels: Vec<L>,
    index: HashMap<L, usize>,
    relations: SparseIntMatrix,
    nf: OnceLock<NormalForm>,
}

impl<L: Clone> Clone for PresentedModule<L>
where
    L: Eq + Hash,
{
    fn clone(&self) -> Self {
        Self {
            labels: self.labels.clone(),
            index: self.index.clone(),
            relations: self.relations.clone(),
            nf: self.nf.clone(),
        }
    }
}

impl<L: fmt::Debug> fmt::Debug for PresentedModule<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PresentedModule")
            .field("gens", &self.labels.len())
            .field("relations", &self.relations.rows())
            .finish()
    }
}

/// Builds the quotient of the free group on `gens` by the rows of `relations`.
pub fn present_quotient<L>(gens: Vec<L>, relations: SparseIntMatrix) -> Result<PresentedModule<L>, LinalgError>
where
    L: Clone + Eq + Hash,
{
    PresentedModule::new(gens, relations)
}

impl<L: Clone + Eq + Hash> PresentedModule<L> {
    pub fn new(labels: Vec<L>, relations: SparseIntMatrix) -> Result<Self, LinalgError> {
        if relations.cols() != labels.len() {
            return Err(LinalgError::DimensionMismatch {
                expected: labels.len(),
                found: relations.cols(),
            });
        }
        let index: HashMap<L, usize> = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i))
            .collect();
        if index.len() != labels.len() {
            return Err(LinalgError::DuplicateLabel);
        }
        Ok(Self {
            labels,
            index,
            relations,
            nf: OnceLock::new(),
        })
    }

    /// Free abelian group on `labels`.
    pub fn free(labels: Vec<L>) -> Self {
        let n = labels.len();
        Self::new(labels, SparseIntMatrix::zeros(0, n)).expect("labels are distinct")
    }

    pub fn from_relation_rows(labels: Vec<L>, rows: Vec<SparseVec>) -> Result<Self, LinalgError> {
        let n = labels.len();
        Self::new(labels, SparseIntMatrix::from_rows(n, rows)?)
    }

    /// Quotient by additional relations (given over the same generators).
    pub fn quotient(&self, extra: impl IntoIterator<Item = SparseVec>) -> Result<Self, LinalgError> {
        let mut rows = self.relations.row_vecs().to_vec();
        rows.extend(extra);
        Self::from_relation_rows(self.labels.clone(), rows)
    }

    /// `self / m * self`.
    pub fn mod_m(&self, m: &Int) -> Self {
        let n = self.ngens();
        self.quotient((0..n).map(|i| SparseVec::from_pairs([(i, m.clone())])))
            .expect("generator indices in range")
    }

    pub fn label_index(&self, label: &L) -> Option<usize> {
        self.index.get(label).copied()
    }

    /// Sparse vector from labelled coefficients; errors on an unknown label.
    pub fn vector_from_labels<I>(&self, terms: I) -> Result<SparseVec, LinalgError>
    where
        I: IntoIterator<Item = (L, Int)>,
    {
        let mut pairs = Vec::new();
        for (l, v) in terms {
            let i = self.label_index(&l).ok_or(LinalgError::UnknownLabel)?;
            pairs.push((i, v));
        }
        Ok(SparseVec::from_pairs(pairs))
    }
}

impl<L> PresentedModule<L> {
    fn nf(&self) -> &NormalForm {
        self.nf.get_or_init(|| NormalForm::compute(&self.relations))
    }

    pub fn ngens(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[L] {
        &self.labels
    }

    pub fn relations(&self) -> &SparseIntMatrix {
        &self.relations
    }

    /// Invariant factors `d_1 | d_2 | ...`, all at least 2.
    pub fn invariant_factors(&self) -> Vec<Int> {
        let mut f = self.nf().invariant_factors();
        f.sort();
        f
    }

    pub fn free_rank(&self) -> usize {
        self.nf().free_rank()
    }

    pub fn relation_rank(&self) -> usize {
        self.nf().relation_rank()
    }

    pub fn is_torsion_free(&self) -> bool {
        self.invariant_factors().is_empty()
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank() == 0 && self.invariant_factors().is_empty()
    }

    /// Group order, or `None` when infinite.
    pub fn order(&self) -> Option<Int> {
        (self.free_rank() == 0).then(|| self.invariant_factors().iter().product())
    }

    /// Number of normal-form coordinates (torsion first, then free).
    pub fn ncoords(&self) -> usize {
        self.nf().coord_kinds().len()
    }

    pub fn coord_kinds(&self) -> Vec<CoordKind> {
        self.nf().coord_kinds()
    }

    /// Canonical coordinates of the class of `x`; two vectors are equal in
    /// the module exactly when their coordinates agree.
    pub fn coordinates(&self, x: &SparseVec) -> Vec<Int> {
        self.nf().coordinates(x)
    }

    pub fn is_zero(&self, x: &SparseVec) -> bool {
        self.coordinates(x).iter().all(|c| c.is_zero())
    }

    pub fn equal(&self, x: &SparseVec, y: &SparseVec) -> bool {
        self.is_zero(&x.add_scaled(&-Int::one(), y))
    }

    /// A generator vector representing the `k`-th coordinate unit.
    pub fn coordinate_lift(&self, k: usize) -> SparseVec {
        self.nf().lift(k)
    }

    /// Vector with the given coordinates.
    pub fn from_coordinates(&self, coords: &[Int]) -> SparseVec {
        let mut acc = SparseVec::new();
        for (k, c) in coords.iter().enumerate() {
            if !c.is_zero() {
                acc = acc.add_scaled(c, &self.coordinate_lift(k));
            }
        }
        acc
    }

    /// Rewrites `x` over the generators that survive unit elimination.
    pub fn substitute(&self, x: &SparseVec) -> SparseVec {
        self.nf().substitute(x)
    }

    /// Generators forming a free basis, when the module is free with a trivial core.
    pub fn basis_columns(&self) -> Option<&[usize]> {
        let nf = self.nf();
        (nf.is_trivially_free() && nf.ngens() == self.labels.len()).then(|| nf.free_columns())
    }

    pub fn element(self: &Arc<Self>, coeffs: SparseVec) -> ModuleElement<L> {
        ModuleElement {
            parent: Arc::clone(self),
            coeffs,
        }
    }

    /// Submodule generated by `gens`, presented on those generators.
    ///
    /// Returns the presentation whose relations are all integer combinations
    /// of `gens` vanishing in `self`.
    pub fn submodule(&self, gens: &[SparseVec]) -> PresentedModule<usize> {
        let kinds = self.coord_kinds();
        let nc = kinds.len();
        let torsion: Vec<(usize, Int)> = kinds
            .iter()
            .enumerate()
            .filter_map(|(k, kind)| match kind {
                CoordKind::Torsion(d) => Some((k, d.clone())),
                CoordKind::Free => None,
            })
            .collect();
        let n = gens.len();
        let mut a = DenseMatrix::zeros(n + torsion.len(), nc);
        for (i, g) in gens.iter().enumerate() {
            for (k, c) in self.coordinates(g).into_iter().enumerate() {
                a[(i, k)] = c;
            }
        }
        for (t, (k, d)) in torsion.iter().enumerate() {
            a[(n + t, *k)] = d.clone();
        }
        let hf = hermite_form(&a);
        let rows: Vec<SparseVec> = hf
            .left_kernel()
            .into_iter()
            .map(|k| SparseVec::from_dense(&k[..n]))
            .filter(|v| !v.is_zero())
            .collect();
        PresentedModule::from_relation_rows((0..n).collect(), rows).expect("kernel rows fit")
    }
}

/// An element of a presented module. Equality compares normal forms.
#[derive(Clone)]
pub struct ModuleElement<L> {
    parent: Arc<PresentedModule<L>>,
    coeffs: SparseVec,
}

impl<L> ModuleElement<L> {
    pub fn parent(&self) -> &Arc<PresentedModule<L>> {
        &self.parent
    }

    pub fn coeffs(&self) -> &SparseVec {
        &self.coeffs
    }

    pub fn coordinates(&self) -> Vec<Int> {
        self.parent.coordinates(&self.coeffs)
    }

    pub fn is_zero(&self) -> bool {
        self.parent.is_zero(&self.coeffs)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert!(Arc::ptr_eq(&self.parent, &other.parent), "elements of different modules");
        Self {
            parent: Arc::clone(&self.parent),
            coeffs: self.coeffs.add_scaled(&Int::one(), &other.coeffs),
        }
    }

    pub fn scale(&self, f: &Int) -> Self {
        Self {
            parent: Arc::clone(&self.parent),
            coeffs: self.coeffs.scale(f),
        }
    }
}

impl<L> PartialEq for ModuleElement<L> {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.parent, &other.parent)
            && self.parent.equal(&self.coeffs, &other.coeffs)
    }
}

impl<L: fmt::Debug> fmt::Debug for ModuleElement<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .entries()
            .iter()
            .map(|(i, v)| format!("{v}*{:?}", self.parent.labels[*i]))
            .collect();
        write!(f, "ModuleElement({})", terms.join(" + "))
    }
}

/// A homomorphism given by the images of the source generators.
pub struct ModuleHom<'a, S, T> {
    source: &'a PresentedModule<S>,
    target: &'a PresentedModule<T>,
    images: Vec<SparseVec>,
}

/// Kernel of a homomorphism with its inclusion into the source.
pub struct KernelData {
    pub module: PresentedModule<usize>,
    /// Image in the source of each kernel generator.
    pub inclusion: Vec<SparseVec>,
}

impl<'a, S, T> ModuleHom<'a, S, T> {
    /// Checks that every source relation maps to zero.
    pub fn new(
        source: &'a PresentedModule<S>,
        target: &'a PresentedModule<T>,
        images: Vec<SparseVec>,
    ) -> Result<Self, LinalgError> {
        if images.len() != source.ngens() {
            return Err(LinalgError::DimensionMismatch {
                expected: source.ngens(),
                found: images.len(),
            });
        }
        if let Some(bad) = images.iter().find_map(|v| v.max_index().filter(|c| *c >= target.ngens())) {
            return Err(LinalgError::IndexOutOfBounds {
                row: 0,
                col: bad,
                rows: images.len(),
                cols: target.ngens(),
            });
        }
        let hom = Self {
            source,
            target,
            images,
        };
        for (i, rel) in source.relations().row_vecs().iter().enumerate() {
            if !target.is_zero(&hom.apply(rel)) {
                return Err(LinalgError::NotAHomomorphism { relation: i });
            }
        }
        Ok(hom)
    }

    pub fn apply(&self, x: &SparseVec) -> SparseVec {
        let mut acc = SparseVec::new();
        for (i, v) in x.entries() {
            acc = acc.add_scaled(v, &self.images[*i]);
        }
        acc
    }

    pub fn images(&self) -> &[SparseVec] {
        &self.images
    }

    /// `target / image`, on the target generators; the projection is the identity on generators.
    pub fn cokernel(&self) -> PresentedModule<T>
    where
        T: Clone + Eq + Hash,
    {
        self.target
            .quotient(self.images.iter().cloned())
            .expect("images lie in the target")
    }

    /// Image, presented on the images of the source generators.
    pub fn image(&self) -> PresentedModule<usize> {
        self.target.submodule(&self.images)
    }

    /// True when the map is injective.
    pub fn is_injective(&self) -> bool {
        self.kernel().module.is_trivial()
    }

    pub fn is_surjective(&self) -> bool
    where
        T: Clone + Eq + Hash,
    {
        self.cokernel().is_trivial()
    }

    /// Kernel as a submodule of the source.
    pub fn kernel(&self) -> KernelData {
        let src = self.source;
        let tgt = self.target;
        let src_kinds = src.coord_kinds();
        let tgt_kinds = tgt.coord_kinds();
        let n = src_kinds.len();
        let lifts: Vec<SparseVec> = (0..n).map(|k| src.coordinate_lift(k)).collect();
        let rows: Vec<Vec<Int>> = lifts.iter().map(|x| tgt.coordinates(&self.apply(x))).collect();

        // Fast path: free target and injective on coordinates.
        let src_torsion = src_kinds.iter().any(|k| *k != CoordKind::Free);
        let tgt_torsion = tgt_kinds.iter().any(|k| *k != CoordKind::Free);
        if !src_torsion && !tgt_torsion {
            let m = SparseIntMatrix::from_rows(
                tgt_kinds.len(),
                rows.iter().map(|r| SparseVec::from_dense(r)).collect(),
            )
            .expect("coordinate rows fit");
            if NormalForm::compute(&m).relation_rank() == n {
                return KernelData {
                    module: PresentedModule::free(Vec::new()),
                    inclusion: Vec::new(),
                };
            }
        }

        // x in ker  <=>  sum x_k rows_k + sum y_j d_j e_j = 0 with x_k mod the source torsion.
        let tgt_torsion: Vec<(usize, Int)> = torsion_coords(&tgt_kinds);
        let mut a = DenseMatrix::zeros(n + tgt_torsion.len(), tgt_kinds.len());
        for (i, r) in rows.iter().enumerate() {
            for (k, c) in r.iter().enumerate() {
                a[(i, k)] = c.clone();
            }
        }
        for (t, (k, d)) in tgt_torsion.iter().enumerate() {
            a[(n + t, *k)] = d.clone();
        }
        let hf = hermite_form(&a);
        let mut gens: Vec<SparseVec> = Vec::new();
        for k in hf.left_kernel() {
            let mut v = SparseVec::new();
            for (i, c) in k[..n].iter().enumerate() {
                if !c.is_zero() {
                    v = v.add_scaled(c, &lifts[i]);
                }
            }
            if !src.is_zero(&v) {
                gens.push(v);
            }
        }
        let module = src.submodule(&gens);
        KernelData {
            module,
            inclusion: gens,
        }
    }
}

fn torsion_coords(kinds: &[CoordKind]) -> Vec<(usize, Int)> {
    kinds
        .iter()
        .enumerate()
        .filter_map(|(k, kind)| match kind {
            CoordKind::Torsion(d) => Some((k, d.clone())),
            CoordKind::Free => None,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<Int> {
        v.iter().map(|x| Int::from(*x)).collect()
    }

    #[test]
    fn single_generator_cases() {
        let free = PresentedModule::free(vec!["x"]);
        assert_eq!(free.free_rank(), 1);
        assert!(free.invariant_factors().is_empty());

        let six = PresentedModule::new(vec!["x"], SparseIntMatrix::from_dense_rows(&[vec![6]])).unwrap();
        assert_eq!(six.free_rank(), 0);
        assert_eq!(six.invariant_factors(), ints(&[6]));
        assert!(six.is_zero(&SparseVec::from_pairs([(0, Int::from(12))])));
    }

    #[test]
    fn seven_generators_one_relation() {
        let rel = SparseIntMatrix::from_dense_rows(&[vec![0, 1, 1, 1, 1, 1, 1]]);
        let m = PresentedModule::new((0..7).collect::<Vec<_>>(), rel).unwrap();
        assert_eq!(m.free_rank(), 6);
        assert!(m.is_torsion_free());
    }

    #[test]
    fn multiplication_by_six() {
        let z = PresentedModule::free(vec![0usize]);
        let hom = ModuleHom::new(&z, &z, vec![SparseVec::from_pairs([(0, Int::from(6))])]).unwrap();
        let coker = hom.cokernel();
        assert_eq!(coker.invariant_factors(), ints(&[6]));
        assert_eq!(coker.free_rank(), 0);
        assert!(hom.is_injective());
        assert_eq!(hom.image().free_rank(), 1);
    }

    #[test]
    fn zero_map_kernel() {
        let z2 = PresentedModule::free(vec![0usize, 1]);
        let hom = ModuleHom::new(&z2, &z2, vec![SparseVec::new(), SparseVec::new()]).unwrap();
        let k = hom.kernel();
        assert_eq!(k.module.free_rank(), 2);
        assert!(k.module.is_torsion_free());
    }

    #[test]
    fn rejects_non_homomorphism() {
        let z6 = PresentedModule::new(vec![0usize], SparseIntMatrix::from_dense_rows(&[vec![6]])).unwrap();
        let z = PresentedModule::free(vec![0usize]);
        let err = ModuleHom::new(&z6, &z, vec![SparseVec::unit(0)]).err();
        assert_eq!(err, Some(LinalgError::NotAHomomorphism { relation: 0 }));
        // Z/6 -> Z/3 reduction is fine.
        let z3 = PresentedModule::new(vec![0usize], SparseIntMatrix::from_dense_rows(&[vec![3]])).unwrap();
        let hom = ModuleHom::new(&z6, &z3, vec![SparseVec::unit(0)]).unwrap();
        let k = hom.kernel();
        assert_eq!(k.module.order(), Some(Int::from(2)));
    }

    #[test]
    fn torsion_kernel_and_image() {
        // Z/4 x Z  --(x,y) -> 2x mod 4 in Z/4-->  kernel {0,2} x Z
        let src = PresentedModule::new(vec![0usize, 1], SparseIntMatrix::from_dense_rows(&[vec![4, 0]])).unwrap();
        let tgt = PresentedModule::new(vec![0usize], SparseIntMatrix::from_dense_rows(&[vec![4]])).unwrap();
        let hom = ModuleHom::new(&src, &tgt, vec![SparseVec::from_pairs([(0, Int::from(2))]), SparseVec::new()]).unwrap();
        let k = hom.kernel();
        assert_eq!(k.module.free_rank(), 1);
        assert_eq!(k.module.invariant_factors(), ints(&[2]));
        assert_eq!(hom.image().order(), Some(Int::from(2)));
        assert_eq!(hom.cokernel().order(), Some(Int::from(2)));
    }
}
