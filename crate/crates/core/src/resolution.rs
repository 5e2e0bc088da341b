//! The complex `L(r)` resolving `U_r`, the contraction `s_l`, the quotient
//! `L(r)/L'` and the short exact sequence relating it to `L(r/l)`.

use std::collections::HashMap;

use kolyrec_linalg::{rank, Int, PresentedModule, SparseIntMatrix, SparseVec};
use num_traits::{One, Zero};
use serde_json::json;

use crate::context::{inverse_mod, scale_index, Context, Fraction, GroupElement, Level};
use crate::distribution::{preimages, u_mod_i};
use crate::{ints_json, CoreError, Engine, Outcome};

/// `[a, g]` with `a = num / r` and `g` a pool bitmask dividing `r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LSymbol {
    pub num: u64,
    pub g: u32,
}

impl LSymbol {
    pub fn degree(&self) -> i32 {
        -(self.g.count_ones() as i32)
    }

    pub fn fraction(&self, r: u64) -> Fraction {
        Fraction::from_index(self.num, r)
    }
}

/// Number of set bits of `mask` below bit `i`.
pub(crate) fn bits_below(mask: u32, i: usize) -> u32 {
    (mask & ((1u32 << i) - 1)).count_ones()
}

pub(crate) fn sign(parity: u32) -> Int {
    if parity.is_multiple_of(2) {
        Int::one()
    } else {
        -Int::one()
    }
}

#[derive(Debug)]
pub struct LComplex {
    level: Level,
    /// `symbols[k]` lists the symbols of degree `-k`.
    symbols: Vec<Vec<LSymbol>>,
    index: HashMap<LSymbol, usize>,
    /// `d[k]` maps degree `-k` to `-k+1`, rows indexed by `symbols[k]`; `d[0]` is empty.
    d: Vec<SparseIntMatrix>,
}

/// Differential of one symbol, as `(symbol, coefficient)` pairs.
pub fn d_symbol(ctx: &Context, level: Level, x: LSymbol) -> Vec<(LSymbol, Int)> {
    let r = level.value();
    let mut out = Vec::new();
    for i in level.prime_indices() {
        if x.g >> i & 1 == 0 {
            continue;
        }
        let l = ctx.primes()[i];
        let s = sign(bits_below(x.g, i));
        let g = x.g & !(1 << i);
        out.push((LSymbol { num: x.num, g }, s.clone()));
        for b in preimages(x.num, l, r) {
            out.push((LSymbol { num: b, g }, -s.clone()));
        }
    }
    out
}

pub fn build_l(ctx: &Context, level: Level) -> LComplex {
    let r = level.value();
    let w = level.omega();
    let mut symbols = vec![Vec::new(); w + 1];
    let mut divisors = level.divisors(ctx);
    divisors.sort_by_key(|g| g.value());
    for g in &divisors {
        for num in (0..r).step_by(g.value() as usize) {
            symbols[g.omega()].push(LSymbol { num, g: g.mask() });
        }
    }
    let mut index = HashMap::new();
    for list in &symbols {
        for (i, s) in list.iter().enumerate() {
            index.insert(*s, i);
        }
    }
    let mut d = vec![SparseIntMatrix::zeros(0, 0)];
    for k in 1..=w {
        let rows = symbols[k]
            .iter()
            .map(|x| {
                SparseVec::from_pairs(d_symbol(ctx, level, *x).into_iter().map(|(y, c)| (index[&y], c)))
            })
            .collect();
        d.push(SparseIntMatrix::from_rows(symbols[k - 1].len(), rows).expect("images in degree above"));
    }
    LComplex {
        level,
        symbols,
        index,
        d,
    }
}

impl LComplex {
    pub fn level(&self) -> Level {
        self.level
    }

    /// Symbols of degree `n` (`n <= 0`).
    pub fn symbols(&self, n: i32) -> &[LSymbol] {
        &self.symbols[(-n) as usize]
    }

    pub fn index_of(&self, x: &LSymbol) -> Option<usize> {
        self.index.get(x).copied()
    }

    /// `d` from degree `n` to `n + 1`.
    pub fn differential(&self, n: i32) -> &SparseIntMatrix {
        &self.d[(-n) as usize]
    }

    pub fn apply_d(&self, n: i32, v: &SparseVec) -> SparseVec {
        self.differential(n).left_mul_sparse(v)
    }

    pub fn min_degree(&self) -> i32 {
        -(self.symbols.len() as i32 - 1)
    }

    pub fn dims(&self) -> Vec<usize> {
        self.symbols.iter().map(|s| s.len()).collect()
    }
}

/// Cohomology of one degree: free rank and torsion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cohomology {
    pub degree: i32,
    pub free_rank: usize,
    pub torsion: Vec<Int>,
}

impl Cohomology {
    pub fn is_zero(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }
}

/// Cohomology of `0 -> C^{-n} -> ... -> C^0 -> 0` from its differentials.
///
/// `dims[k]` is the rank of `C^{-k}`; `d[k]` maps `C^{-k} -> C^{-k+1}` (`d[0]` unused).
pub fn cohomology(dims: &[usize], d: &[SparseIntMatrix]) -> Vec<Cohomology> {
    let n = dims.len() - 1;
    let ranks: Vec<usize> = (0..=n).map(|k| if k == 0 { 0 } else { rank(&d[k]) }).collect();
    (0..=n)
        .rev()
        .map(|k| {
            let out_rank = ranks[k];
            let (in_rank, torsion) = if k < n {
                let coker = PresentedModule::new((0..dims[k]).collect::<Vec<_>>(), d[k + 1].clone())
                    .expect("rows fit");
                (ranks[k + 1], coker.invariant_factors())
            } else {
                (0, Vec::new())
            };
            Cohomology {
                degree: -(k as i32),
                free_rank: dims[k] - out_rank - in_rank,
                torsion,
            }
        })
        .collect()
}

fn compose_zero(first: &SparseIntMatrix, second: &SparseIntMatrix) -> bool {
    first
        .row_vecs()
        .iter()
        .all(|row| second.left_mul_sparse(row).is_zero())
}

/// `d^2 = 0`, equivariance, Euler characteristic and `H^*(L(r))` concentrated in degree 0 with `H^0 = U_r`.
pub fn cohomology_of_l(engine: &Engine, level: Level) -> Result<Outcome, CoreError> {
    let ctx = engine.ctx();
    let l = build_l(ctx, level);
    let w = level.omega();
    let r = level.value();
    let mut out = Outcome::new();
    out.detail("r", r);
    out.detail("dims", json!(l.dims()));
    for k in 2..=w {
        out.require(format!("d^2 = 0 from degree -{k}"), compose_zero(&l.d[k], &l.d[k - 1]));
    }
    for p in level.primes(ctx) {
        let t = GroupElement::sigma(ctx, level, p)?.multiplier(ctx);
        let act = |x: LSymbol| LSymbol {
            num: scale_index(x.num, t, r),
            g: x.g,
        };
        let mut ok = true;
        for k in 1..=w {
            for x in &l.symbols[k] {
                let lhs = SparseVec::from_pairs(
                    d_symbol(ctx, level, act(*x)).into_iter().map(|(y, c)| (l.index[&y], c)),
                );
                let rhs = SparseVec::from_pairs(
                    d_symbol(ctx, level, *x).into_iter().map(|(y, c)| (l.index[&act(y)], c)),
                );
                ok &= lhs == rhs;
            }
        }
        out.require(format!("d commutes with sigma_{p}"), ok);
    }
    let euler: i64 = l
        .dims()
        .iter()
        .enumerate()
        .map(|(k, n)| if k % 2 == 0 { *n as i64 } else { -(*n as i64) })
        .sum();
    let phi = crate::distribution::totient(ctx, level) as i64;
    out.detail("euler_characteristic", euler);
    out.require("Euler characteristic is phi(r)", euler == phi);
    let h = cohomology(&l.dims(), &l.d);
    out.detail(
        "cohomology",
        json!(h
            .iter()
            .map(|c| json!({"degree": c.degree, "free_rank": c.free_rank, "torsion": ints_json(&c.torsion)}))
            .collect::<Vec<_>>()),
    );
    for c in &h {
        if c.degree != 0 {
            out.require(format!("H^{} = 0", c.degree), c.is_zero());
        }
    }
    // H^0 = L^0 / d L^{-1} against U_r: both are quotients of the free group on [a] = [a,1].
    let u = engine.u(level);
    let d_in_u = w == 0 || l.d[1].row_vecs().iter().all(|row| u.is_zero(row));
    let h0 = PresentedModule::new(
        (0..r).collect::<Vec<_>>(),
        if w == 0 { SparseIntMatrix::zeros(0, r as usize) } else { l.d[1].clone() },
    )?;
    let u_in_d = u.module().relations().row_vecs().iter().all(|row| h0.is_zero(row));
    out.require("coboundaries vanish in U_r", d_in_u);
    out.require("distribution relations are coboundaries", u_in_d);
    out.detail("h0_rank", h0.free_rank());
    Ok(out)
}

/// `s_l` from `L(r)` to `L(r/l)`, on a chain given as symbol coefficients.
pub fn s_ell(
    ctx: &Context,
    level: Level,
    l: u64,
    chain: &[(LSymbol, Int)],
) -> Result<Vec<(LSymbol, Int)>, CoreError> {
    let i = ctx
        .prime_index(l)
        .filter(|i| level.mask() >> i & 1 == 1)
        .ok_or_else(|| CoreError::NotADivisor(format!("{l} does not divide {}", level.value())))?;
    let r = level.value();
    let mut out: Vec<(LSymbol, Int)> = Vec::new();
    for (x, c) in chain {
        if x.g >> i & 1 == 0 {
            continue;
        }
        // a = a0 + b with b in (1/l)Z/Z; since l | g, b = 0 and a0 = a.
        let a0 = rho_index(x.num, l, r);
        debug_assert_eq!(a0 * l, x.num % r);
        out.push((LSymbol { num: a0, g: x.g & !(1 << i) }, sign(bits_below(x.g, i)) * c));
    }
    Ok(merge(out))
}

/// Numerator over `r/l` of the `r/l`-component of `num / r`.
pub fn rho_index(num: u64, l: u64, r: u64) -> u64 {
    let s = r / l;
    if s == 1 {
        return 0;
    }
    scale_index(num % s, inverse_mod(l, s).expect("l prime to r/l"), s)
}

fn merge(mut terms: Vec<(LSymbol, Int)>) -> Vec<(LSymbol, Int)> {
    terms.sort_by_key(|a| a.0);
    let mut out: Vec<(LSymbol, Int)> = Vec::with_capacity(terms.len());
    for (x, c) in terms {
        match out.last_mut() {
            Some((y, acc)) if *y == x => *acc += c,
            _ => out.push((x, c)),
        }
    }
    out.retain(|(_, c)| !c.is_zero());
    out
}

fn d_chain(ctx: &Context, level: Level, chain: &[(LSymbol, Int)]) -> Vec<(LSymbol, Int)> {
    let mut terms = Vec::new();
    for (x, c) in chain {
        for (y, e) in d_symbol(ctx, level, *x) {
            terms.push((y, e * c));
        }
    }
    merge(terms)
}

/// `s_l d = - d s_l` on every generator of `L(r)`.
pub fn s_ell_anticommutes(ctx: &Context, level: Level, l: u64) -> Result<bool, CoreError> {
    let lower = level.without(ctx, l)?;
    let lc = build_l(ctx, level);
    for list in &lc.symbols {
        for x in list {
            let unit = [(*x, Int::one())];
            let lhs = s_ell(ctx, level, l, &d_chain(ctx, level, &unit))?;
            let rhs = d_chain(ctx, lower, &s_ell(ctx, level, l, &unit)?);
            let sum = merge(lhs.into_iter().chain(rhs).collect());
            if !sum.is_empty() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Basis element of `L(r)/L'`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum QBasis {
    /// `[a0, g]` with `l` prime to `g`, a symbol of `L(r/l)`.
    Lower(LSymbol),
    /// `[a, g]` with `l | g`, a symbol of `L(r)`.
    Upper(LSymbol),
}

/// Exactness of `0 -> L(r/l) -> L(r)/L' -> L(r/l)[1] -> 0`, acyclicity of
/// `L(r)/L'` below degree 0, and its connecting map `1 - l Frob_l^{-1}`.
pub fn sigma_sequence_check(engine: &Engine, level: Level, l: u64) -> Result<Outcome, CoreError> {
    let ctx = engine.ctx();
    let lower = level.without(ctx, l)?;
    let li = ctx.prime_index(l).expect("pool prime");
    let (r, s) = (level.value(), lower.value());
    let big = build_l(ctx, level);
    let small = build_l(ctx, lower);
    let w = level.omega();
    let mut out = Outcome::new();
    out.detail("r", r);
    out.detail("l", l);

    // Basis of Q^{-k}: lower symbols then upper symbols.
    let mut basis: Vec<Vec<QBasis>> = vec![Vec::new(); w + 1];
    for k in 0..=w {
        if k < small.symbols.len() {
            basis[k].extend(small.symbols[k].iter().map(|x| QBasis::Lower(*x)));
        }
        basis[k].extend(
            big.symbols[k]
                .iter()
                .filter(|x| x.g >> li & 1 == 1)
                .map(|x| QBasis::Upper(*x)),
        );
    }
    let qindex: Vec<HashMap<QBasis, usize>> = basis
        .iter()
        .map(|b| b.iter().enumerate().map(|(i, x)| (*x, i)).collect())
        .collect();
    // Projection L(r) -> Q.
    let project = |k: usize, chain: &[(LSymbol, Int)]| -> SparseVec {
        SparseVec::from_pairs(chain.iter().map(|(x, c)| {
            let q = if x.g >> li & 1 == 1 {
                QBasis::Upper(*x)
            } else {
                QBasis::Lower(LSymbol { num: rho_index(x.num, l, r), g: x.g })
            };
            (qindex[k][&q], c.clone())
        }))
    };
    let lift = |q: QBasis| -> LSymbol {
        match q {
            QBasis::Lower(x) => LSymbol { num: x.num * l, g: x.g },
            QBasis::Upper(x) => x,
        }
    };

    // L' = span{[a0 + j/l, g] - [a0, g]} lies in ker(projection) with the right rank.
    let mut kernel_ok = true;
    for k in 0..=w {
        let mut gens = Vec::new();
        for x in big.symbols[k].iter().filter(|x| x.g >> li & 1 == 0 && x.num % l == 0) {
            for j in 1..l {
                let other = LSymbol { num: (x.num + j * s) % r, g: x.g };
                let v = SparseVec::from_pairs([(big.index[&other], Int::one()), (big.index[x], -Int::one())]);
                let chain = [(other, Int::one()), (*x, -Int::one())];
                kernel_ok &= project(k, &chain).is_zero();
                // d L' lies in L'.
                if k > 0 {
                    kernel_ok &= project(k - 1, &d_chain(ctx, level, &chain)).is_zero();
                }
                gens.push(v);
            }
        }
        let lp_rank = if gens.is_empty() {
            0
        } else {
            rank(&SparseIntMatrix::from_rows(big.symbols[k].len(), gens)?)
        };
        out.require(
            format!("L(r)/L' has the expected rank in degree -{k}"),
            big.symbols[k].len() - lp_rank == basis[k].len(),
        );
    }
    out.require("L' is the kernel of the projection and d-stable", kernel_ok);

    // Differential of Q.
    let mut dq = vec![SparseIntMatrix::zeros(0, 0)];
    for k in 1..=w {
        let rows = basis[k]
            .iter()
            .map(|q| project(k - 1, &d_symbol(ctx, level, lift(*q))))
            .collect();
        dq.push(SparseIntMatrix::from_rows(basis[k - 1].len(), rows)?);
    }
    for k in 2..=w {
        out.require(format!("dbar^2 = 0 from degree -{k}"), compose_zero(&dq[k], &dq[k - 1]));
    }

    // i commutes with d, sbar anticommutes with d, sbar i = 0, sbar is onto degreewise.
    let mut chain_maps = true;
    for k in 1..small.symbols.len() {
        for x in &small.symbols[k] {
            let via_q = dq[k].row(qindex[k][&QBasis::Lower(*x)]).clone();
            let via_l = SparseVec::from_pairs(
                d_symbol(ctx, lower, *x)
                    .into_iter()
                    .map(|(y, c)| (qindex[k - 1][&QBasis::Lower(y)], c)),
            );
            chain_maps &= via_q == via_l;
        }
    }
    out.require("inclusion is a chain map", chain_maps);
    let sbar = |q: QBasis| -> Vec<(LSymbol, Int)> {
        match q {
            QBasis::Lower(_) => Vec::new(),
            QBasis::Upper(x) => s_ell(ctx, level, l, &[(x, Int::one())]).expect("l | r"),
        }
    };
    let mut anti = true;
    for k in 1..=w {
        for (qi, q) in basis[k].iter().enumerate() {
            let lhs: Vec<(LSymbol, Int)> = dq[k]
                .row(qi)
                .entries()
                .iter()
                .flat_map(|(j, c)| sbar(basis[k - 1][*j]).into_iter().map(move |(y, e)| (y, e * c)))
                .collect();
            let rhs = d_chain(ctx, lower, &sbar(*q));
            anti &= merge(lhs.into_iter().chain(rhs).collect()).is_empty();
        }
    }
    out.require("sbar d = -d sbar", anti);
    let mut exact = true;
    for k in 1..=w {
        let mut hit = vec![0usize; small.symbols[k - 1].len()];
        for q in &basis[k] {
            let img = sbar(*q);
            match q {
                QBasis::Lower(_) => exact &= img.is_empty(),
                QBasis::Upper(_) => {
                    exact &= img.len() == 1 && (img[0].1.is_one() || (-&img[0].1).is_one());
                    if let Some((y, _)) = img.first() {
                        hit[small.index[y]] += 1;
                    }
                }
            }
        }
        exact &= hit.iter().all(|h| *h == 1);
        let below = small.symbols.get(k).map_or(0, |v| v.len());
        exact &= basis[k].len() == below + small.symbols[k - 1].len();
    }
    out.require("Sigma is short exact in every degree", exact);

    let dims: Vec<usize> = basis.iter().map(|b| b.len()).collect();
    let h = cohomology(&dims, &dq);
    for c in &h {
        if c.degree < 0 {
            out.require(format!("H^{}(L/L') = 0", c.degree), c.is_zero());
        }
    }
    let h0 = h.iter().find(|c| c.degree == 0).expect("degree 0");
    let quotient = u_mod_i(engine, level, l)?;
    out.detail("h0_torsion", ints_json(&h0.torsion));
    out.require(
        "H^0(L/L') matches U_r/I_l",
        h0.free_rank == 0 && h0.torsion == quotient.invariant_factors(),
    );

    // Connecting map: dbar [a, l] = [a] - l [Frob_l^{-1} a].
    let finv = inverse_mod(l, s).unwrap_or(0);
    let mut connecting = true;
    let mut images = Vec::new();
    let lmask = 1u32 << li;
    for num in 0..s {
        let q = QBasis::Upper(LSymbol { num: num * l, g: lmask });
        let got = dq[1].row(qindex[1][&q]).clone();
        let fi = scale_index(num, finv, s);
        let expect = SparseVec::from_pairs([
            (qindex[0][&QBasis::Lower(LSymbol { num, g: 0 })], Int::one()),
            (qindex[0][&QBasis::Lower(LSymbol { num: fi, g: 0 })], -Int::from(l)),
        ]);
        connecting &= got == expect;
        images.push(SparseVec::from_pairs([(num as usize, Int::one()), (fi as usize, -Int::from(l))]));
    }
    out.require("connecting map is 1 - l Frob_l^{-1}", connecting);
    let us = engine.u(lower);
    let hom = kolyrec_linalg::ModuleHom::new(us.module(), us.module(), images)?;
    out.require("connecting map injective", hom.is_injective());
    out.require(
        "coker of the connecting map matches U_r/I_l",
        hom.cokernel().invariant_factors() == quotient.invariant_factors(),
    );
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn engine() -> Engine {
        Engine::new(Context::with_default_roots(3, &[7, 13, 19]).unwrap())
    }

    #[test]
    fn level_seven_complex() {
        let e = engine();
        let ctx = e.ctx();
        let lv = ctx.level_of(7).unwrap();
        let l = build_l(ctx, lv);
        assert_eq!(l.dims(), vec![7, 1]);
        let row = l.differential(-1).row(0).clone();
        assert_eq!(row, SparseVec::from_pairs((1..7).map(|j| (j, -Int::one()))));
    }

    #[test]
    fn level_ninety_one_sizes() {
        let e = engine();
        let ctx = e.ctx();
        let l = build_l(ctx, ctx.level_of(91).unwrap());
        assert_eq!(l.dims(), vec![91, 20, 1]);
        let o = cohomology_of_l(&e, ctx.level_of(91).unwrap()).unwrap();
        assert!(o.passed(), "{:?}", o.failures());
        assert_eq!(o.details()["euler_characteristic"], 72);
    }

    #[test]
    fn cohomology_small_levels() {
        let e = engine();
        for r in [1, 7, 13] {
            let o = cohomology_of_l(&e, e.ctx().level_of(r).unwrap()).unwrap();
            assert!(o.passed(), "{r}: {:?}", o.failures());
        }
    }

    #[test]
    fn contraction_examples() {
        let e = engine();
        let ctx = e.ctx();
        let l7 = ctx.level_of(7).unwrap();
        let out = s_ell(ctx, l7, 7, &[(LSymbol { num: 0, g: 1 }, Int::one())]).unwrap();
        assert_eq!(out, vec![(LSymbol { num: 0, g: 0 }, Int::one())]);
        let l91 = ctx.level_of(91).unwrap();
        let out = s_ell(ctx, l91, 7, &[(LSymbol { num: 0, g: 2 }, Int::one())]).unwrap();
        assert!(out.is_empty());
        assert!(s_ell_anticommutes(ctx, l91, 7).unwrap());
        assert!(s_ell_anticommutes(ctx, l91, 13).unwrap());
    }

    #[test]
    fn rho_split() {
        // 20/91 = 1/13 + 1/7: numerator 7 over 91 is 1/13.
        assert_eq!(rho_index(20, 7, 91), 1);
        assert_eq!(rho_index(7, 7, 91), 1);
        assert_eq!(rho_index(13, 7, 91), 0);
    }

    #[test]
    fn sigma_sequence_examples() {
        let e = engine();
        let ctx = e.ctx();
        for (r, l) in [(7, 7), (91, 7), (91, 13)] {
            let o = sigma_sequence_check(&e, ctx.level_of(r).unwrap(), l).unwrap();
            assert!(o.passed(), "{r} {l}: {:?}", o.failures());
        }
    }
}
