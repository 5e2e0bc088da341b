//! `A(r)`, the universal ordinary distribution `U_r`, the subgroups `I_l`
//! and the universal Euler system.
//!
//! Vectors over `A(r)` are [`SparseVec`]s indexed by numerators over `r`:
//! entry `j` is the coefficient of `[j/r]`.

use kolyrec_linalg::{Int, ModuleHom, PresentedModule, SparseVec};
use num_traits::One;
use serde_json::Value;

use crate::context::{frobenius, inverse_mod, scale_index, Context, Fraction, FractionChain, GroupElement, Level};
use crate::{ints_json, CoreError, Engine, Outcome};

/// Euler's totient of a squarefree level.
pub fn totient(ctx: &Context, level: Level) -> u64 {
    level.primes(ctx).iter().map(|p| p - 1).product()
}

/// Numerators `c` over `r` with `l c = a`; requires `l | a`.
pub fn preimages(a: u64, l: u64, r: u64) -> impl Iterator<Item = u64> {
    debug_assert_eq!(a % l, 0);
    let step = r / l;
    (0..l).map(move |k| a / l + k * step)
}

/// `[a] - sum_{l b = a} [b]`, for `a = j/r` with `l | j`.
pub fn distribution_relation(j: u64, l: u64, r: u64) -> SparseVec {
    let mut pairs = vec![(j as usize, Int::one())];
    pairs.extend(preimages(j, l, r).map(|c| (c as usize, -Int::one())));
    SparseVec::from_pairs(pairs)
}

/// Numerators of fractions of level `r/l`, ordered by `(num, den)`.
fn relation_bases(l: u64, r: u64) -> Vec<u64> {
    let mut js: Vec<u64> = (0..r).step_by(l as usize).collect();
    js.sort_by_key(|&j| {
        let f = Fraction::from_index(j, r);
        (f.num(), f.den())
    });
    js
}

/// All distribution relations of level `r`: primes ascending, then `a` by `(num, den)`.
pub fn distribution_relations(ctx: &Context, level: Level) -> Vec<SparseVec> {
    let r = level.value();
    let mut rows = Vec::new();
    for l in level.primes(ctx) {
        for j in relation_bases(l, r) {
            rows.push(distribution_relation(j, l, r));
        }
    }
    rows
}

fn labels(r: u64) -> Vec<Fraction> {
    (0..r).map(|j| Fraction::from_index(j, r)).collect()
}

/// The free group `A(r)`.
pub fn build_a(level: Level) -> PresentedModule<Fraction> {
    PresentedModule::free(labels(level.value()))
}

#[derive(Debug)]
pub struct UModule {
    level: Level,
    module: PresentedModule<Fraction>,
}

pub fn build_u(ctx: &Context, level: Level) -> UModule {
    let rels = distribution_relations(ctx, level);
    UModule {
        level,
        module: PresentedModule::from_relation_rows(labels(level.value()), rels)
            .expect("relations index fractions of level r"),
    }
}

/// `U_r` with the relation at position `drop` omitted (negative control).
pub fn build_u_without(ctx: &Context, level: Level, drop: usize) -> UModule {
    let mut rels = distribution_relations(ctx, level);
    if drop < rels.len() {
        rels.remove(drop);
    }
    UModule {
        level,
        module: PresentedModule::from_relation_rows(labels(level.value()), rels)
            .expect("relations index fractions of level r"),
    }
}

impl UModule {
    pub fn level(&self) -> Level {
        self.level
    }

    pub fn module(&self) -> &PresentedModule<Fraction> {
        &self.module
    }

    pub fn rank(&self) -> usize {
        self.module.free_rank()
    }

    pub fn is_torsion_free(&self) -> bool {
        self.module.is_torsion_free()
    }

    /// Vector of a fraction chain; every fraction must have level dividing `r`.
    pub fn vector(&self, chain: &FractionChain) -> Result<SparseVec, CoreError> {
        let r = self.level.value();
        let mut pairs = Vec::with_capacity(chain.len());
        for (a, c) in chain {
            let j = a.index_at(r).ok_or_else(|| {
                CoreError::LevelMismatch(format!("{a} does not have level dividing {r}"))
            })?;
            pairs.push((j as usize, c.clone()));
        }
        Ok(SparseVec::from_pairs(pairs))
    }

    pub fn fraction_vector(&self, a: &Fraction) -> Result<SparseVec, CoreError> {
        self.vector(&FractionChain::from([(*a, Int::one())]))
    }

    pub fn chain(&self, v: &SparseVec) -> FractionChain {
        let r = self.level.value();
        v.entries()
            .iter()
            .map(|(j, c)| (Fraction::from_index(*j as u64, r), c.clone()))
            .collect()
    }

    pub fn coordinates(&self, v: &SparseVec) -> Vec<Int> {
        self.module.coordinates(v)
    }

    pub fn is_zero(&self, v: &SparseVec) -> bool {
        self.module.is_zero(v)
    }

    pub fn equal(&self, x: &SparseVec, y: &SparseVec) -> bool {
        self.module.equal(x, y)
    }

    /// Checks rank `phi(r)` and freeness.
    pub fn structure_check(&self, ctx: &Context) -> Outcome {
        let mut out = Outcome::new();
        let phi = totient(ctx, self.level);
        out.detail("r", self.level.value());
        out.detail("generators", self.module.ngens());
        out.detail("relations", self.module.relations().rows());
        out.detail("rank", self.rank());
        out.detail("phi", phi);
        out.detail("invariant_factors", ints_json(&self.module.invariant_factors()));
        out.require("rank equals phi(r)", self.rank() as u64 == phi);
        out.require("torsion-free", self.is_torsion_free());
        out
    }
}

/// Reindexes a vector over `A(s)` into `A(r)`.
pub fn embed_vector(v: &SparseVec, s: u64, r: u64) -> SparseVec {
    let k = (r / s) as usize;
    v.reindex(|j| Some(j * k))
}

/// The map `U_s -> U_r` induced by `A(s) ⊂ A(r)`, with injectivity and free cokernel checked.
pub fn embed_u(engine: &Engine, s: Level, r: Level) -> Result<Outcome, CoreError> {
    let ctx = engine.ctx();
    if !s.divides(&r) {
        return Err(CoreError::NotADivisor(format!("{} does not divide {}", s.value(), r.value())));
    }
    let us = engine.u(s);
    let ur = engine.u(r);
    let images: Vec<SparseVec> = (0..s.value())
        .map(|j| SparseVec::unit((j * (r.value() / s.value())) as usize))
        .collect();
    let hom = ModuleHom::new(us.module(), ur.module(), images)?;
    let coker = hom.cokernel();
    let mut out = Outcome::new();
    out.detail("s", s.value());
    out.detail("r", r.value());
    out.detail("cokernel_rank", coker.free_rank());
    out.require("injective", hom.is_injective());
    out.require("cokernel torsion-free", coker.is_torsion_free());
    out.require(
        "cokernel rank is phi(r) - phi(s)",
        coker.free_rank() as u64 == totient(ctx, r) - totient(ctx, s),
    );
    Ok(out)
}

/// Spanning set `{[a + k/l] - [a] : den(a) | r/l, 0 < k < l}` of `I_l` in `A(r)`.
pub fn build_i_ell(ctx: &Context, level: Level, l: u64) -> Result<Vec<SparseVec>, CoreError> {
    if !level.has_prime(ctx, l) {
        return Err(CoreError::NotADivisor(format!("{l} does not divide {}", level.value())));
    }
    let r = level.value();
    let step = r / l;
    let mut gens = Vec::new();
    for base in (0..r).step_by(l as usize) {
        for k in 1..l {
            let other = (base + k * step) % r;
            gens.push(SparseVec::from_pairs([(other as usize, Int::one()), (base as usize, -Int::one())]));
        }
    }
    Ok(gens)
}

/// `U_r / I_l`.
pub fn u_mod_i(engine: &Engine, level: Level, l: u64) -> Result<PresentedModule<Fraction>, CoreError> {
    let gens = build_i_ell(engine.ctx(), level, l)?;
    Ok(engine.u(level).module().quotient(gens)?)
}

/// The full family `{[a] - [b] : a - b in (1/l)Z/Z}` lies in the span of the
/// reduced set, and `(sigma_l - 1) U_r` lies in `I_l`.
pub fn i_ell_check(engine: &Engine, level: Level, l: u64) -> Result<Outcome, CoreError> {
    let ctx = engine.ctx();
    let quotient = u_mod_i(engine, level, l)?;
    let r = level.value();
    let step = r / l;
    let mut out = Outcome::new();
    let mut family = 0usize;
    let mut outside = 0usize;
    for a in 0..r {
        for k in 1..l {
            let b = (a + k * step) % r;
            family += 1;
            let v = SparseVec::from_pairs([(b as usize, Int::one()), (a as usize, -Int::one())]);
            if !quotient.is_zero(&v) {
                outside += 1;
            }
        }
    }
    let t = GroupElement::sigma(ctx, level, l)?.multiplier(ctx);
    let sigma_outside = (0..r)
        .filter(|&a| {
            let v = SparseVec::from_pairs([
                (scale_index(a, t, r) as usize, Int::one()),
                (a as usize, -Int::one()),
            ]);
            !quotient.is_zero(&v)
        })
        .count();
    out.detail("family_size", family);
    out.detail("reduced_size", (r / l) * (l - 1));
    out.require("full family lies in the reduced span", outside == 0);
    out.require("(sigma_l - 1) U_r lies in I_l", sigma_outside == 0);
    Ok(out)
}

/// `x_r = [sum_{p | r} 1/p]`.
pub fn universal_euler_x(ctx: &Context, level: Level) -> Fraction {
    level
        .primes(ctx)
        .iter()
        .fold(Fraction::zero(), |acc, p| acc.add(&Fraction::new(1, *p)))
}

/// `N_l x_r = (Frob_l - 1) x_{r/l}` in `U_r` and `x_r = x_{r/l}` modulo `I_l`.
pub fn euler_relations_check(engine: &Engine, level: Level, l: u64) -> Result<Outcome, CoreError> {
    let ctx = engine.ctx();
    let lower = level.without(ctx, l)?;
    let u = engine.u(level);
    let x = universal_euler_x(ctx, level);
    let y = universal_euler_x(ctx, lower);
    let norm = crate::context::GroupRingElement::norm(ctx, level, l)?;
    let lhs = u.vector(&norm.apply(ctx, &FractionChain::from([(x, Int::one())]))?)?;
    let frob = frobenius(ctx, l, lower)?;
    let fy = frob.act(ctx, &y)?;
    let mut rhs_chain = FractionChain::new();
    crate::context::chain_add(&mut rhs_chain, fy, Int::one());
    crate::context::chain_add(&mut rhs_chain, y, -Int::one());
    let rhs = u.vector(&rhs_chain)?;
    let quotient = u_mod_i(engine, level, l)?;
    let diff = u.fraction_vector(&x)?.add_scaled(&-Int::one(), &u.fraction_vector(&y)?);
    let mut out = Outcome::new();
    out.detail("x_r", x.to_string());
    out.detail("x_r_over_l", y.to_string());
    out.require("N_l x_r = (Frob_l - 1) x_{r/l}", u.equal(&lhs, &rhs));
    out.require("x_r = x_{r/l} mod I_l", quotient.is_zero(&diff));
    Ok(out)
}

/// Images of the generators under `l - Frob_l` on `A(r')`.
pub fn ell_minus_frob_images(ctx: &Context, level: Level, l: u64) -> Result<Vec<SparseVec>, CoreError> {
    frobenius(ctx, l, level)?;
    let r = level.value();
    Ok((0..r)
        .map(|j| {
            SparseVec::from_pairs([
                (j as usize, Int::from(l)),
                (scale_index(j, l, r) as usize, -Int::one()),
            ])
        })
        .collect())
}

/// `(l - Frob_l) x = 0` has no nonzero solution in `U_{r'}`.
pub fn frob_regularity_check(engine: &Engine, level: Level, l: u64) -> Result<Outcome, CoreError> {
    let ctx = engine.ctx();
    let images = ell_minus_frob_images(ctx, level, l)?;
    let u = engine.u(level);
    let hom = ModuleHom::new(u.module(), u.module(), images)?;
    let mut out = Outcome::new();
    out.detail("r", level.value());
    out.detail("l", l);
    out.require("l - Frob_l injective", hom.is_injective());
    Ok(out)
}

/// `0 -> U_{r/l} -> U_{r/l} -> U_r / I_l -> 0` is exact.
pub fn reduction_sequence_check(engine: &Engine, level: Level, l: u64) -> Result<Outcome, CoreError> {
    let ctx = engine.ctx();
    let lower = level.without(ctx, l)?;
    let (r, s) = (level.value(), lower.value());
    let us = engine.u(lower);
    let quotient = u_mod_i(engine, level, l)?;
    let mut out = Outcome::new();
    out.detail("r", r);
    out.detail("l", l);

    let reg = frob_regularity_check(engine, lower, l)?;
    out.absorb("injectivity", reg);

    let f_images = ell_minus_frob_images(ctx, lower, l)?;
    let incl: Vec<SparseVec> = (0..s).map(|j| SparseVec::unit((j * l) as usize)).collect();
    let iota = ModuleHom::new(us.module(), &quotient, incl)?;
    let composite_zero = f_images.iter().all(|v| quotient.is_zero(&iota.apply(v)));
    out.require("composite is zero", composite_zero);
    out.require("U_{r/l} -> U_r/I_l surjective", iota.is_surjective());

    let coker = us.module().quotient(f_images)?;
    let lhs = coker.invariant_factors();
    let rhs = quotient.invariant_factors();
    out.detail("cokernel_invariant_factors", ints_json(&lhs));
    out.detail("quotient_invariant_factors", ints_json(&rhs));
    out.require("cokernel finite", coker.free_rank() == 0);
    out.require("quotient finite", quotient.free_rank() == 0);
    // With the composite zero and the second map onto, equal finite orders give exactness.
    out.require("coker(l - Frob) and U_r/I_l agree", lhs == rhs);
    Ok(out)
}

/// The relation set is permuted by every `sigma_l`.
pub fn relations_stable_check(engine: &Engine, level: Level) -> Result<Outcome, CoreError> {
    let ctx = engine.ctx();
    let u = engine.u(level);
    let r = level.value();
    let mut out = Outcome::new();
    for l in level.primes(ctx) {
        let t = GroupElement::sigma(ctx, level, l)?.multiplier(ctx);
        let ok = u
            .module()
            .relations()
            .row_vecs()
            .iter()
            .all(|rel| u.is_zero(&rel.reindex(|j| Some(scale_index(j as u64, t, r) as usize))));
        out.require(format!("sigma_{l} preserves the relations"), ok);
    }
    Ok(out)
}

/// Compatibility of the embeddings `U_s -> U_t -> U_r`.
pub fn embedding_transitivity(s: u64, t: u64, r: u64) -> bool {
    (0..s).all(|j| {
        let v = SparseVec::unit(j as usize);
        embed_vector(&embed_vector(&v, s, t), t, r) == embed_vector(&v, s, r)
    })
}

/// `Frob_l^{-1}` on numerators over `r'`.
pub fn frob_inverse_index(j: u64, l: u64, r: u64) -> u64 {
    scale_index(j, inverse_mod(l, r).unwrap_or(0), r)
}

pub fn fraction_chain_json(chain: &FractionChain) -> Value {
    Value::Object(
        chain
            .iter()
            .map(|(a, c)| (a.to_string(), crate::int_json(c)))
            .collect(),
    )
}
