//! Invariants `H^0(G_r, U_r/M)`, universal Kolyvagin classes, the operator
//! `D_l` and the universal Kolyvagin recursion.
//!
//! Classes are compared through `U_r`-coordinates reduced mod `M`; `U_r` is
//! free, so these are coordinates of `U_r/M` as a free `Z/M`-module.

use kolyrec_linalg::modular::{mod_row_from_ints, residue};
use kolyrec_linalg::{Int, LeftSolver, ModEchelon, ModRow, SparseVec};
use num_integer::Integer;
use num_traits::{One, Zero};
use serde_json::json;

use crate::context::{
    chain_add, frobenius, scale_index, Context, Fraction, FractionChain, GroupElement, GroupRingElement,
    Level,
};
use crate::distribution::{
    distribution_relation, embed_vector, frob_inverse_index, u_mod_i, universal_euler_x, UModule,
};
use crate::resolution::rho_index;
use crate::{CoreError, Engine, Outcome};

/// Per-prime factor of the derivative product; replaced in negative controls.
pub type DerivativeFn = dyn Fn(&Context, Level, u64) -> Result<GroupRingElement, CoreError> + Sync;

pub fn standard_derivative(ctx: &Context, level: Level, l: u64) -> Result<GroupRingElement, CoreError> {
    GroupRingElement::derivative(ctx, level, l)
}

/// `U_r`-coordinates of `v` reduced mod `m`.
pub fn coords_mod(u: &UModule, v: &SparseVec, m: u64) -> ModRow {
    mod_row_from_ints(u.coordinates(v).iter().enumerate(), m)
}

/// `(sigma - 1) v` on `A(r)` for the unit multiplier `t`.
fn sigma_minus_one(v: &SparseVec, t: u64, r: u64) -> SparseVec {
    let moved = v.reindex(|j| Some(scale_index(j as u64, t, r) as usize));
    moved.add_scaled(&-Int::one(), v)
}

pub struct H0Space {
    level: Level,
    m: u64,
    ncoords: usize,
    basis: Vec<ModRow>,
    echelon: ModEchelon,
    order: Int,
}

impl H0Space {
    /// Kernel of the stacked maps `sigma_l - 1` on `U_r/M`.
    pub fn build(engine: &Engine, level: Level) -> Result<Self, CoreError> {
        let ctx = engine.ctx();
        let m = ctx.modulus();
        let u = engine.u(level);
        let r = level.value();
        let n = u.module().ncoords();
        let sigmas: Vec<u64> = level
            .primes(ctx)
            .iter()
            .map(|l| GroupElement::sigma(ctx, level, *l).map(|g| g.multiplier(ctx)))
            .collect::<Result<_, _>>()?;
        let rows: Vec<ModRow> = (0..n)
            .map(|k| {
                let lift = u.module().coordinate_lift(k);
                let mut row = ModRow::new();
                for (i, t) in sigmas.iter().enumerate() {
                    let c = coords_mod(&u, &sigma_minus_one(&lift, *t, r), m);
                    row.extend(c.into_iter().map(|(j, v)| (i * n + j, v)));
                }
                row
            })
            .collect();
        let solver = LeftSolver::new(m, &rows, sigmas.len() * n);
        let basis = solver.kernel();
        let mut echelon = ModEchelon::new(m, n);
        echelon.extend(basis.iter().cloned());
        let order = solver.kernel_order();
        Ok(Self {
            level,
            m,
            ncoords: n,
            basis,
            echelon,
            order,
        })
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn ncoords(&self) -> usize {
        self.ncoords
    }

    /// Generators of the invariant subgroup, as coordinate rows.
    pub fn basis(&self) -> &[ModRow] {
        &self.basis
    }

    pub fn order(&self) -> &Int {
        &self.order
    }

    /// `k` with `order = M^k`, if any.
    pub fn dimension(&self) -> Option<usize> {
        let m = Int::from(self.m);
        let mut o = self.order.clone();
        let mut k = 0;
        while o > Int::one() {
            let (q, rem) = o.div_rem(&m);
            if !rem.is_zero() {
                return None;
            }
            o = q;
            k += 1;
        }
        Some(k)
    }

    pub fn contains(&self, coords: &[(usize, u64)]) -> bool {
        self.echelon.contains(coords)
    }

    /// Canonical form of a coordinate row modulo the invariants.
    pub fn reduce(&self, coords: &[(usize, u64)]) -> ModRow {
        self.echelon.reduce(coords)
    }
}

/// A class in `H^0(G_r, U_r/M)` with an integral representative over `A(r)`.
#[derive(Clone, Debug)]
pub struct H0Class {
    pub level: Level,
    pub rep: SparseVec,
    pub coords: ModRow,
}

impl H0Class {
    pub fn from_rep(engine: &Engine, level: Level, rep: SparseVec) -> Self {
        let coords = coords_mod(&engine.u(level), &rep, engine.ctx().modulus());
        Self { level, rep, coords }
    }

    pub fn same_class(&self, other: &H0Class) -> bool {
        self.level == other.level && self.coords == other.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_empty()
    }

    /// Representative as fractions with coefficients reduced mod `m`.
    pub fn reduced_chain(&self, m: u64) -> FractionChain {
        let r = self.level.value();
        self.rep
            .entries()
            .iter()
            .map(|(j, c)| (Fraction::from_index(*j as u64, r), Int::from(residue(c, m))))
            .filter(|(_, c)| !c.is_zero())
            .collect()
    }
}

/// Checks `(sigma_l - 1) v in M U_r` for every `l | r`.
pub fn is_invariant(engine: &Engine, level: Level, v: &SparseVec) -> Result<bool, CoreError> {
    let ctx = engine.ctx();
    let u = engine.u(level);
    for l in level.primes(ctx) {
        let t = GroupElement::sigma(ctx, level, l)?.multiplier(ctx);
        if !coords_mod(&u, &sigma_minus_one(v, t, level.value()), ctx.modulus()).is_empty() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `N'_r` built from the given per-prime factors.
pub fn derivative_product(
    ctx: &Context,
    level: Level,
    primes: &[u64],
    factor: &DerivativeFn,
) -> Result<GroupRingElement, CoreError> {
    let mut out = GroupRingElement::one(ctx, level);
    for &l in primes {
        out = out.mul(ctx, &factor(ctx, level, l)?);
    }
    Ok(out)
}

/// `N'_r x_r` as a vector over `A(r)`.
pub fn kolyvagin_representative(
    ctx: &Context,
    level: Level,
    factor: &DerivativeFn,
) -> Result<SparseVec, CoreError> {
    let d = derivative_product(ctx, level, &level.primes(ctx), factor)?;
    let x = universal_euler_x(ctx, level);
    let r = level.value();
    let xv = SparseVec::unit(x.index_at(r).expect("x_r has level r") as usize);
    Ok(d.apply_indexed(ctx, &xv))
}

/// `c_r`, the class of `N'_r x_r`.
pub fn universal_kolyvagin_class(engine: &Engine, level: Level) -> Result<H0Class, CoreError> {
    universal_class_with(engine, level, &standard_derivative)
}

pub fn universal_class_with(
    engine: &Engine,
    level: Level,
    factor: &DerivativeFn,
) -> Result<H0Class, CoreError> {
    let rep = kolyvagin_representative(engine.ctx(), level, factor)?;
    if !is_invariant(engine, level, &rep)? {
        return Err(CoreError::InvarianceViolation(format!(
            "N'_r x_r is not invariant mod M at r = {}",
            level.value()
        )));
    }
    Ok(H0Class::from_rep(engine, level, rep))
}

/// `rho_l`: `[a0 + b] -> [a0]` from `A(r)` to `A(r/l)`.
pub fn rho_ell(ctx: &Context, level: Level, l: u64, v: &SparseVec) -> Result<SparseVec, CoreError> {
    level.without(ctx, l)?;
    let r = level.value();
    Ok(v.reindex(|j| Some(rho_index(j as u64, l, r) as usize)))
}

/// `gamma_p`: `[a] -> [a] - sum_{p b = a} [b]` from `A(r/p)` to `A(r)`.
pub fn gamma_p(ctx: &Context, level: Level, p: u64, v: &SparseVec) -> Result<SparseVec, CoreError> {
    level.without(ctx, p)?;
    let r = level.value();
    let mut acc = SparseVec::new();
    for (j, c) in v.entries() {
        acc = acc.add_scaled(c, &distribution_relation(*j as u64 * p, p, r));
    }
    Ok(acc)
}

/// Solver for `sum_p gamma_p b_p = t mod M` over `A(r)`.
pub struct GammaSolver {
    level: Level,
    /// Unknown `i` is the coefficient of `[j/(r/p)]` in `b_p`, as `(p, j)`.
    vars: Vec<(u64, u64)>,
    rows: Vec<SparseVec>,
    solver: LeftSolver,
}

impl GammaSolver {
    pub fn build(ctx: &Context, level: Level) -> Self {
        Self::build_ordered(ctx, level, false)
    }

    /// With `reversed`, unknowns are eliminated in the opposite order.
    pub fn build_ordered(ctx: &Context, level: Level, reversed: bool) -> Self {
        let r = level.value();
        let mut vars = Vec::new();
        for p in level.primes(ctx) {
            for j in 0..r / p {
                vars.push((p, j));
            }
        }
        if reversed {
            vars.reverse();
        }
        let rows: Vec<SparseVec> = vars
            .iter()
            .map(|&(p, j)| distribution_relation(j * p, p, r))
            .collect();
        let m = ctx.modulus();
        let mrows: Vec<ModRow> = rows
            .iter()
            .map(|v| mod_row_from_ints(v.entries().iter().map(|(j, c)| (*j, c)), m))
            .collect();
        let solver = LeftSolver::new(m, &mrows, r as usize);
        Self {
            level,
            vars,
            rows,
            solver,
        }
    }
}

/// Result of the constructive `D_l` with its verification data.
#[derive(Clone, Debug)]
pub struct DOutput {
    pub class: H0Class,
    /// `(sigma_l - 1) a / M = (l - Frob_l) y / M` modulo `I_l`.
    pub congruence_holds: bool,
    /// The output lies in `H^0` at level `r/l`.
    pub output_invariant: bool,
}

/// `D_l` on a class at level `r`, via `(sigma_l - 1) a = M b + sum_p gamma_p b_p`.
pub fn d_ell(engine: &Engine, class: &H0Class, l: u64) -> Result<DOutput, CoreError> {
    let solver = engine.gamma_solver(class.level)?;
    d_ell_with(engine, class, l, &solver)
}

pub fn d_ell_with(
    engine: &Engine,
    class: &H0Class,
    l: u64,
    gamma: &GammaSolver,
) -> Result<DOutput, CoreError> {
    let ctx = engine.ctx();
    let level = class.level;
    if gamma.level != level {
        return Err(CoreError::LevelMismatch("solver built for another level".into()));
    }
    let lower = level.without(ctx, l)?;
    let (r, s) = (level.value(), lower.value());
    let m = ctx.modulus();
    let mi = Int::from(m);
    let t = GroupElement::sigma(ctx, level, l)?.multiplier(ctx);
    let target = sigma_minus_one(&class.rep, t, r);
    let rhs = mod_row_from_ints(target.entries().iter().map(|(j, c)| (*j, c)), m);
    let x = gamma.solver.solve(&rhs).ok_or_else(|| {
        CoreError::NotInvariant(format!("no solution of the D_{l} system at r = {r}"))
    })?;
    // b = (target - sum gamma_p b_p) / M must be integral.
    let mut rest = target.clone();
    let mut b_ell = Vec::new();
    for &(i, v) in &x {
        let coeff = Int::from(v);
        rest = rest.add_scaled(&-coeff.clone(), &gamma.rows[i]);
        let (p, j) = gamma.vars[i];
        if p == l {
            b_ell.push((frob_inverse_index(j, l, s) as usize, coeff));
        }
    }
    if rest.entries().iter().any(|(_, c)| !(c % &mi).is_zero()) {
        return Err(CoreError::Contradiction(format!(
            "(sigma_{l} - 1) a - sum gamma_p b_p is not divisible by M at r = {r}"
        )));
    }
    let b = SparseVec::from_pairs(rest.entries().iter().map(|(j, c)| (*j, c / &mi)));
    let y = SparseVec::from_pairs(b_ell);
    let out = H0Class::from_rep(engine, lower, y.clone());
    let output_invariant = engine.h0(lower)?.contains(&out.coords);

    // (sigma_l - 1) a / M = b in U_r; (l - Frob_l) y / M is computed in U_{r/l}.
    let us = engine.u(lower);
    let frob_y = y.reindex(|j| Some(scale_index(j as u64, l, s) as usize));
    let ly = y.scale(&Int::from(l)).add_scaled(&-Int::one(), &frob_y);
    let ly_coords = us.coordinates(&ly);
    let mut congruence_holds = ly_coords.iter().all(|c| (c % &mi).is_zero());
    if congruence_holds {
        let q: Vec<Int> = ly_coords.iter().map(|c| c / &mi).collect();
        let ly_over_m = embed_vector(&us.module().from_coordinates(&q), s, r);
        let quotient = u_mod_i(engine, level, l)?;
        congruence_holds = quotient.is_zero(&b.add_scaled(&-Int::one(), &ly_over_m));
    }
    Ok(DOutput {
        class: out,
        congruence_holds,
        output_invariant,
    })
}

/// Vector over `A(r)` of a fraction chain whose levels divide `r`.
fn chain_vector(chain: &FractionChain, r: u64) -> SparseVec {
    SparseVec::from_pairs(
        chain
            .iter()
            .map(|(a, c)| (a.index_at(r).expect("level divides r") as usize, c.clone())),
    )
}

/// The identity
/// `(sigma_l - 1) N'_r x_r / M = ((l-1)/M) N'_{r/l}(x_r - x_{r/l}) + (l - Frob_l) N'_{r/l} x_{r/l} / M`
/// in `U_r`, with both divisions checked.
pub fn recursion_identity(
    engine: &Engine,
    level: Level,
    l: u64,
    factor: &DerivativeFn,
) -> Result<Outcome, CoreError> {
    let ctx = engine.ctx();
    let lower = level.without(ctx, l)?;
    let r = level.value();
    let m = Int::from(ctx.modulus());
    let u = engine.u(level);
    let primes = level.primes(ctx);
    let others: Vec<u64> = primes.iter().copied().filter(|p| *p != l).collect();
    let full = derivative_product(ctx, level, &primes, factor)?;
    let partial = derivative_product(ctx, level, &others, factor)?;
    let xr = universal_euler_x(ctx, level);
    let xs = universal_euler_x(ctx, lower);
    let sigma = GroupRingElement::from_group_element(GroupElement::sigma(ctx, level, l)?);
    let lhs_op = sigma.sub(&GroupRingElement::one(ctx, level)).mul(ctx, &full);
    let lhs = chain_vector(&lhs_op.apply(ctx, &FractionChain::from([(xr, Int::one())]))?, r);
    let mut diff = FractionChain::new();
    chain_add(&mut diff, xr, Int::one());
    chain_add(&mut diff, xs, -Int::one());
    let t2 = chain_vector(&partial.apply(ctx, &diff)?, r);
    let w = partial.apply(ctx, &FractionChain::from([(xs, Int::one())]))?;
    let frob = frobenius(ctx, l, lower)?;
    let mut t3 = FractionChain::new();
    for (a, c) in &w {
        chain_add(&mut t3, *a, c * Int::from(l));
        chain_add(&mut t3, frob.act(ctx, a)?, -c.clone());
    }
    let t3 = chain_vector(&t3, r);
    let (cl, c2, c3) = (u.coordinates(&lhs), u.coordinates(&t2), u.coordinates(&t3));
    let mut out = Outcome::new();
    out.detail("r", r);
    out.detail("l", l);
    let lhs_div = out.require("M divides (sigma_l - 1) N'_r x_r", cl.iter().all(|c| (c % &m).is_zero()));
    let t3_div = out.require(
        "M divides (l - Frob_l) N'_{r/l} x_{r/l}",
        c3.iter().all(|c| (c % &m).is_zero()),
    );
    if lhs_div && t3_div {
        let k = Int::from(l - 1) / &m;
        let ok = cl
            .iter()
            .zip(&c2)
            .zip(&c3)
            .all(|((a, b), c)| a / &m == &k * b + c / &m);
        out.require("identity holds in U_r", ok);
    }
    Ok(out)
}

/// `D_l c_r = c_{r/l}` for every `l | r`, after the integral identity.
pub fn recursion_check_universal(engine: &Engine, level: Level) -> Result<Outcome, CoreError> {
    recursion_check_with(engine, level, &standard_derivative)
}

pub fn recursion_check_with(
    engine: &Engine,
    level: Level,
    factor: &DerivativeFn,
) -> Result<Outcome, CoreError> {
    let ctx = engine.ctx();
    let mut out = Outcome::new();
    out.detail("r", level.value());
    let rep = kolyvagin_representative(ctx, level, factor)?;
    if !out.require("c_r invariant", is_invariant(engine, level, &rep)?) {
        return Ok(out);
    }
    let c = H0Class::from_rep(engine, level, rep);
    for l in level.primes(ctx) {
        out.absorb(&format!("identity_{l}"), recursion_identity(engine, level, l, factor)?);
        let lower = level.without(ctx, l)?;
        let lower_rep = kolyvagin_representative(ctx, lower, factor)?;
        if !out.require(format!("c_(r/{l}) invariant"), is_invariant(engine, lower, &lower_rep)?) {
            continue;
        }
        let expect = H0Class::from_rep(engine, lower, lower_rep);
        match d_ell(engine, &c, l) {
            Ok(d) => {
                out.require(format!("D_{l} congruence"), d.congruence_holds);
                out.require(format!("D_{l} output invariant"), d.output_invariant);
                out.require(format!("D_{l} c_r = c_(r/{l})"), d.class.same_class(&expect));
            }
            Err(e) if e.is_internal() => {
                out.require(format!("D_{l} solvable: {e}"), false);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// `D_{l_1} ... D_{l_n} c_r = c_1` in ascending and descending prime order.
pub fn iterated_recursion_check(engine: &Engine, level: Level) -> Result<Outcome, CoreError> {
    let ctx = engine.ctx();
    let c1 = universal_kolyvagin_class(engine, Level::one())?;
    let mut out = Outcome::new();
    let mut primes = level.primes(ctx);
    for label in ["ascending", "descending"] {
        let mut c = universal_kolyvagin_class(engine, level)?;
        for &l in &primes {
            c = d_ell(engine, &c, l)?.class;
        }
        out.require(format!("{label} order reaches c_1"), c.same_class(&c1));
        primes.reverse();
    }
    Ok(out)
}

/// Lifts a coordinate row to an integral vector over `A(r)`.
pub fn lift_coords(engine: &Engine, level: Level, coords: &[(usize, u64)]) -> SparseVec {
    let u = engine.u(level);
    let mut dense = vec![Int::zero(); u.module().ncoords()];
    for &(k, v) in coords {
        dense[k] = Int::from(v);
    }
    u.module().from_coordinates(&dense)
}

/// Linearity on basis pairs, independence of the lift and the variable order, `D_l(M x) = 0`.
pub fn d_ell_consistency_check(engine: &Engine, level: Level, l: u64) -> Result<Outcome, CoreError> {
    let ctx = engine.ctx();
    let m = ctx.modulus();
    let h0 = engine.h0(level)?;
    let basis: Vec<H0Class> = h0
        .basis()
        .iter()
        .map(|row| H0Class::from_rep(engine, level, lift_coords(engine, level, row)))
        .collect();
    let images: Vec<H0Class> = basis
        .iter()
        .map(|b| d_ell(engine, b, l).map(|d| d.class))
        .collect::<Result<_, _>>()?;
    let lower = level.without(ctx, l)?;
    let mut linear = true;
    for i in 0..basis.len() {
        for j in i..basis.len() {
            let sum = H0Class::from_rep(engine, level, basis[i].rep.add_scaled(&Int::one(), &basis[j].rep));
            let d = d_ell(engine, &sum, l)?.class;
            let expect = H0Class::from_rep(
                engine,
                lower,
                images[i].rep.add_scaled(&Int::one(), &images[j].rep),
            );
            linear &= d.same_class(&expect);
        }
    }
    let mut out = Outcome::new();
    out.detail("r", level.value());
    out.detail("l", l);
    out.detail("basis_size", basis.len());
    out.require("D_l additive on basis pairs", linear);

    let reversed = GammaSolver::build_ordered(ctx, level, true);
    let mut independent = true;
    let rels = engine.u(level).module().relations().clone();
    for (b, img) in basis.iter().zip(&images) {
        independent &= d_ell_with(engine, b, l, &reversed)?.class.same_class(img);
        // Another lift: add M [0] and a relation.
        let mut other = b.rep.add_scaled(&Int::from(m), &SparseVec::unit(0));
        if rels.rows() > 0 {
            other = other.add_scaled(&Int::from(2), rels.row(rels.rows() - 1));
        }
        let other = H0Class::from_rep(engine, level, other);
        independent &= d_ell(engine, &other, l)?.class.same_class(img);
        let scaled = H0Class::from_rep(engine, level, b.rep.scale(&Int::from(m)));
        independent &= d_ell(engine, &scaled, l)?.class.is_zero();
    }
    out.require("D_l independent of lift and variable order; D_l(M x) = 0", independent);
    Ok(out)
}

/// `dim H^0 = 2^omega(r)`.
pub fn h0_dimension_check(engine: &Engine, level: Level) -> Result<Outcome, CoreError> {
    let h0 = engine.h0(level)?;
    let mut out = Outcome::new();
    let expect = 1usize << level.omega();
    out.detail("r", level.value());
    out.detail("dimension", json!(h0.dimension()));
    out.detail("expected", expect);
    out.require("dimension is 2^omega(r)", h0.dimension() == Some(expect));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::perturbed_derivative;

    fn engine() -> Engine {
        Engine::new(Context::with_default_roots(3, &[7, 13, 19]).unwrap())
    }

    #[test]
    fn h0_dimensions() {
        let e = engine();
        for (r, dim) in [(1, 1), (7, 2), (91, 4), (13, 2)] {
            let h = e.h0(e.ctx().level_of(r).unwrap()).unwrap();
            assert_eq!(h.dimension(), Some(dim), "r = {r}");
        }
    }

    #[test]
    fn class_at_seven() {
        let e = engine();
        let l7 = e.ctx().level_of(7).unwrap();
        let c = universal_kolyvagin_class(&e, l7).unwrap();
        let expect = SparseVec::from_pairs([(3, 1), (2, 2), (6, 3), (4, 4), (5, 5)].map(|(j, c)| (j, Int::from(c))));
        assert_eq!(c.rep, expect);
        let reduced: Vec<(String, Int)> =
            c.reduced_chain(3).into_iter().map(|(a, c)| (a.to_string(), c)).collect();
        assert_eq!(
            reduced,
            vec![
                ("2/7".to_string(), Int::from(2)),
                ("3/7".to_string(), Int::from(1)),
                ("4/7".to_string(), Int::from(1)),
                ("5/7".to_string(), Int::from(2)),
            ]
        );
        let c1 = universal_kolyvagin_class(&e, Level::one()).unwrap();
        assert_eq!(c1.rep, SparseVec::unit(0));
        let d = d_ell(&e, &c, 7).unwrap();
        assert!(d.congruence_holds && d.output_invariant);
        assert!(d.class.same_class(&c1));
    }

    #[test]
    fn rho_and_gamma_examples() {
        let e = engine();
        let ctx = e.ctx();
        let l91 = ctx.level_of(91).unwrap();
        // rho_7[20/91] = [1/13]
        assert_eq!(rho_ell(ctx, l91, 7, &SparseVec::unit(20)).unwrap(), SparseVec::unit(1));
        assert_eq!(rho_ell(ctx, l91, 7, &SparseVec::unit(7)).unwrap(), SparseVec::unit(1));
        assert_eq!(rho_ell(ctx, l91, 7, &SparseVec::unit(13)).unwrap(), SparseVec::unit(0));
        let l7 = ctx.level_of(7).unwrap();
        let g = gamma_p(ctx, l7, 7, &SparseVec::unit(0)).unwrap();
        assert!(e.u(l7).is_zero(&g));
        // rho_7 gamma_7 [1/13] = [1/13] - 7 [Frob_7^{-1} 1/13].
        let v = gamma_p(ctx, l91, 7, &SparseVec::unit(1)).unwrap();
        let got = rho_ell(ctx, l91, 7, &v).unwrap();
        let inv = frob_inverse_index(1, 7, 13) as usize;
        assert_eq!(inv, 2); // 7 * 2 = 14 = 1 mod 13
        assert_eq!(got, SparseVec::from_pairs([(1, Int::one()), (inv, Int::from(-7))]));
    }

    #[test]
    fn recursion_small_levels() {
        let e = engine();
        for r in [7, 13, 91] {
            let o = recursion_check_universal(&e, e.ctx().level_of(r).unwrap()).unwrap();
            assert!(o.passed(), "{r}: {:?}", o.failures());
        }
        let o = iterated_recursion_check(&e, e.ctx().level_of(91).unwrap()).unwrap();
        assert!(o.passed());
    }

    #[test]
    fn consistency_of_d() {
        let e = engine();
        let l91 = e.ctx().level_of(91).unwrap();
        for l in [7, 13] {
            let o = d_ell_consistency_check(&e, l91, l).unwrap();
            assert!(o.passed(), "{l}: {:?}", o.failures());
        }
    }

    #[test]
    fn perturbed_derivative_fails() {
        let e = engine();
        let bad = |ctx: &Context, level: Level, l: u64| perturbed_derivative(ctx, level, l);
        let o = recursion_check_with(&e, e.ctx().level_of(7).unwrap(), &bad).unwrap();
        assert!(!o.passed());
    }
}
