//! Modulus, prime pool, cyclic generators, fractions and the group ring of `G_r`.

use std::collections::BTreeMap;
use std::fmt;

use kolyrec_linalg::{Int, SparseVec};
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::CoreError;

/// Largest pool handled; levels are bitmasks and monomials pack 4 bits per prime.
pub const MAX_POOL: usize = 16;

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    acc
}

/// Multiplicative order of `s` modulo the prime `p` (by enumeration).
fn order_mod(s: u64, p: u64) -> u64 {
    let mut x = s % p;
    let mut k = 1;
    while x != 1 {
        x = mul_mod(x, s, p);
        k += 1;
        if k > p {
            return 0;
        }
    }
    k
}

pub fn smallest_primitive_root(p: u64) -> u64 {
    (2..p)
        .find(|&s| order_mod(s, p) == p - 1)
        .expect("a prime has a primitive root")
}

fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (a, m) = (a as i128, m as i128);
    let e = a.extended_gcd(&m);
    (e.gcd == 1).then(|| e.x.rem_euclid(m) as u64)
}

/// The universal data: `M`, the prime pool and a generator of each `(Z/l)^x`.
#[derive(Clone, Debug)]
pub struct Context {
    m: u64,
    primes: Vec<u64>,
    roots: Vec<u64>,
    /// `powers[i][e] = s_i^e mod l_i`.
    powers: Vec<Vec<u64>>,
    /// `dlogs[i][x] = e` with `s_i^e = x mod l_i`; index 0 unused.
    dlogs: Vec<Vec<u64>>,
}

impl Context {
    /// Validates `M` and the pool; missing roots default to the smallest primitive root.
    pub fn new(m: u64, primes: &[u64], roots: &BTreeMap<u64, u64>) -> Result<Self, CoreError> {
        if m < 3 || m.is_multiple_of(2) {
            return Err(CoreError::Admissibility(format!("M = {m} must be odd and at least 3")));
        }
        let mut sorted = primes.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != primes.len() {
            return Err(CoreError::Admissibility("repeated prime in the pool".into()));
        }
        if sorted.len() > MAX_POOL {
            return Err(CoreError::Admissibility(format!(
                "at most {MAX_POOL} primes are supported"
            )));
        }
        for &l in &sorted {
            if l % 2 == 0 || !is_prime(l) {
                return Err(CoreError::Admissibility(format!("{l} is not an odd prime")));
            }
            if l % m != 1 {
                return Err(CoreError::Admissibility(format!("{l} is not 1 mod {m}")));
            }
        }
        if let Some(l) = roots.keys().find(|l| !sorted.contains(l)) {
            return Err(CoreError::Admissibility(format!("root given for {l}, which is not in the pool")));
        }
        let mut chosen = Vec::with_capacity(sorted.len());
        for &l in &sorted {
            let s = match roots.get(&l) {
                Some(&s) => {
                    if s % l == 0 || order_mod(s, l) != l - 1 {
                        return Err(CoreError::NotAGenerator { prime: l, root: s });
                    }
                    s % l
                }
                None => smallest_primitive_root(l),
            };
            chosen.push(s);
        }
        let mut powers = Vec::new();
        let mut dlogs = Vec::new();
        for (&l, &s) in sorted.iter().zip(&chosen) {
            let mut pw = Vec::with_capacity(l as usize - 1);
            let mut dl = vec![0u64; l as usize];
            let mut x = 1u64;
            for e in 0..l - 1 {
                pw.push(x);
                dl[x as usize] = e;
                x = mul_mod(x, s, l);
            }
            powers.push(pw);
            dlogs.push(dl);
        }
        Ok(Self {
            m,
            primes: sorted,
            roots: chosen,
            powers,
            dlogs,
        })
    }

    pub fn with_default_roots(m: u64, primes: &[u64]) -> Result<Self, CoreError> {
        Self::new(m, primes, &BTreeMap::new())
    }

    pub fn modulus(&self) -> u64 {
        self.m
    }

    pub fn modulus_int(&self) -> Int {
        Int::from(self.m)
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn roots(&self) -> BTreeMap<u64, u64> {
        self.primes.iter().copied().zip(self.roots.iter().copied()).collect()
    }

    pub fn root(&self, l: u64) -> Option<u64> {
        self.prime_index(l).map(|i| self.roots[i])
    }

    pub fn prime_index(&self, l: u64) -> Option<usize> {
        self.primes.iter().position(|&p| p == l)
    }

    /// `e` with `s_l^e = x mod l`.
    pub fn dlog(&self, l: u64, x: u64) -> Option<u64> {
        let i = self.prime_index(l)?;
        let x = x % l;
        (x != 0).then(|| self.dlogs[i][x as usize])
    }

    pub fn full_level(&self) -> Level {
        Level::from_mask(self, (1u32 << self.primes.len()) - 1)
    }

    /// Level with the given prime factors.
    pub fn level(&self, primes: &[u64]) -> Result<Level, CoreError> {
        let mut mask = 0u32;
        for &p in primes {
            let i = self
                .prime_index(p)
                .ok_or_else(|| CoreError::InvalidLevel(format!("{p} is not a pool prime")))?;
            mask |= 1 << i;
        }
        Ok(Level::from_mask(self, mask))
    }

    /// Level with value `r`, which must be a squarefree product of pool primes.
    pub fn level_of(&self, r: u64) -> Result<Level, CoreError> {
        let mut rest = r;
        let mut mask = 0u32;
        for (i, &p) in self.primes.iter().enumerate() {
            if rest.is_multiple_of(p) {
                rest /= p;
                mask |= 1 << i;
                if rest.is_multiple_of(p) {
                    return Err(CoreError::InvalidLevel(format!("{r} is not squarefree")));
                }
            }
        }
        if rest != 1 || r == 0 {
            return Err(CoreError::InvalidLevel(format!("{r} is not a product of pool primes")));
        }
        Ok(Level::from_mask(self, mask))
    }

    /// All levels, ordered by number of prime factors and then value.
    pub fn all_levels(&self, max_omega: usize) -> Vec<Level> {
        let mut out: Vec<Level> = (0u32..(1 << self.primes.len()))
            .filter(|m| m.count_ones() as usize <= max_omega)
            .map(|m| Level::from_mask(self, m))
            .collect();
        out.sort_by_key(|l| (l.omega(), l.value()));
        out
    }

    /// `sigma_l^e` as a unit mod `l`.
    pub fn root_power(&self, i: usize, e: u64) -> u64 {
        let l = self.primes[i];
        self.powers[i][(e % (l - 1)) as usize]
    }
}

/// A squarefree product of pool primes, stored as a bitmask over the pool.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Level {
    mask: u32,
    value: u64,
}

impl Level {
    pub fn from_mask(ctx: &Context, mask: u32) -> Self {
        let value = ctx
            .primes
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, p)| *p)
            .product();
        Self { mask, value }
    }

    pub fn one() -> Self {
        Self { mask: 0, value: 1 }
    }

    pub fn mask(&self) -> u32 {
        self.mask
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn omega(&self) -> usize {
        self.mask.count_ones() as usize
    }

    /// Prime factors in ascending order.
    pub fn primes(&self, ctx: &Context) -> Vec<u64> {
        ctx.primes
            .iter()
            .enumerate()
            .filter(|(i, _)| self.mask >> i & 1 == 1)
            .map(|(_, p)| *p)
            .collect()
    }

    /// Pool indices of the prime factors, ascending.
    pub fn prime_indices(&self) -> Vec<usize> {
        (0..32).filter(|i| self.mask >> i & 1 == 1).collect()
    }

    pub fn has_prime(&self, ctx: &Context, l: u64) -> bool {
        ctx.prime_index(l).is_some_and(|i| self.mask >> i & 1 == 1)
    }

    pub fn without(&self, ctx: &Context, l: u64) -> Result<Level, CoreError> {
        match ctx.prime_index(l) {
            Some(i) if self.mask >> i & 1 == 1 => Ok(Level::from_mask(ctx, self.mask & !(1 << i))),
            _ => Err(CoreError::NotADivisor(format!("{l} does not divide {}", self.value))),
        }
    }

    pub fn divides(&self, other: &Level) -> bool {
        self.mask & !other.mask == 0
    }

    /// Divisors in ascending numeric order.
    pub fn divisors(&self, ctx: &Context) -> Vec<Level> {
        let mut out = Vec::new();
        let mut sub = self.mask;
        loop {
            out.push(Level::from_mask(ctx, sub));
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & self.mask;
        }
        out.sort_by_key(|l| l.value);
        out
    }

    /// Multiplier `t mod r` with `t = s_l^{e_l} mod l` for every `l | r`.
    pub fn crt_unit(&self, ctx: &Context, exponent: impl Fn(usize) -> u64) -> u64 {
        let r = self.value;
        if r == 1 {
            return 0;
        }
        let mut t = 0u64;
        for i in self.prime_indices() {
            let l = ctx.primes[i];
            let rest = r / l;
            // Idempotent: 1 mod l, 0 mod rest.
            let basis = mul_mod(rest, inv_mod(rest % l, l).expect("coprime"), r);
            t = (t + mul_mod(basis, ctx.root_power(i, exponent(i)), r)) % r;
        }
        t
    }
}

/// A reduced fraction in `Q/Z` with squarefree denominator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Fraction {
    num: u64,
    den: u64,
}

impl Fraction {
    pub fn zero() -> Self {
        Self { num: 0, den: 1 }
    }

    /// `num/den mod 1`, reduced.
    pub fn new(num: i64, den: u64) -> Self {
        assert!(den > 0, "zero denominator");
        let n = num.rem_euclid(den as i64) as u64;
        let g = n.gcd(&den);
        if n == 0 {
            return Self::zero();
        }
        Self {
            num: n / g,
            den: den / g,
        }
    }

    /// The fraction `index / r`.
    pub fn from_index(index: u64, r: u64) -> Self {
        Self::new((index % r) as i64, r)
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    /// Numerator over `r`; requires `den | r`.
    pub fn index_at(&self, r: u64) -> Option<u64> {
        r.is_multiple_of(self.den).then(|| self.num * (r / self.den))
    }

    /// Membership in `(g/r)Z/Z`.
    pub fn lies_in(&self, g: u64, r: u64) -> bool {
        r.is_multiple_of(g) && (r / g).is_multiple_of(self.den)
    }

    pub fn add(&self, other: &Fraction) -> Fraction {
        let den = self.den.lcm(&other.den);
        let n = self.num * (den / self.den) + other.num * (den / other.den);
        Fraction::new((n % den) as i64, den)
    }

    pub fn sub(&self, other: &Fraction) -> Fraction {
        let den = self.den.lcm(&other.den);
        let n = self.num * (den / self.den) + (den - other.num * (den / other.den));
        Fraction::new((n % den) as i64, den)
    }

    pub fn mul_int(&self, k: u64) -> Fraction {
        Fraction::new(mul_mod(self.num, k % self.den, self.den) as i64, self.den)
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.num == 0 {
            write!(f, "0")
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// An element of `G_r`, as exponents of the chosen generators.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    level: Level,
    /// Exponent per pool index; zero off the level.
    exps: Vec<u64>,
}

impl GroupElement {
    pub fn identity(ctx: &Context, level: Level) -> Self {
        Self {
            level,
            exps: vec![0; ctx.primes.len()],
        }
    }

    /// `sigma_l` in `G_r`.
    pub fn sigma(ctx: &Context, level: Level, l: u64) -> Result<Self, CoreError> {
        Self::sigma_power(ctx, level, l, 1)
    }

    pub fn sigma_power(ctx: &Context, level: Level, l: u64, e: u64) -> Result<Self, CoreError> {
        let i = ctx
            .prime_index(l)
            .filter(|i| level.mask >> i & 1 == 1)
            .ok_or_else(|| CoreError::LevelMismatch(format!("{l} does not divide {}", level.value)))?;
        let mut g = Self::identity(ctx, level);
        g.exps[i] = e % (l - 1);
        Ok(g)
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn exponent(&self, ctx: &Context, l: u64) -> Option<u64> {
        ctx.prime_index(l).map(|i| self.exps[i])
    }

    pub fn is_identity(&self) -> bool {
        self.exps.iter().all(|e| *e == 0)
    }

    pub fn mul(&self, ctx: &Context, other: &GroupElement) -> GroupElement {
        assert_eq!(self.level, other.level, "group elements of different levels");
        let exps = self
            .exps
            .iter()
            .zip(&other.exps)
            .enumerate()
            .map(|(i, (a, b))| (a + b) % (ctx.primes[i] - 1))
            .collect();
        GroupElement {
            level: self.level,
            exps,
        }
    }

    pub fn inverse(&self, ctx: &Context) -> GroupElement {
        let exps = self
            .exps
            .iter()
            .enumerate()
            .map(|(i, e)| (ctx.primes[i] - 1 - e) % (ctx.primes[i] - 1))
            .collect();
        GroupElement {
            level: self.level,
            exps,
        }
    }

    /// Unit `t mod r` by which the element multiplies fractions of level `r`.
    pub fn multiplier(&self, ctx: &Context) -> u64 {
        self.level.crt_unit(ctx, |i| self.exps[i])
    }

    /// Action on a fraction whose denominator divides the level.
    pub fn act(&self, ctx: &Context, a: &Fraction) -> Result<Fraction, CoreError> {
        let r = self.level.value;
        if !r.is_multiple_of(a.den) {
            return Err(CoreError::LevelMismatch(format!(
                "{a} does not have level dividing {r}"
            )));
        }
        Ok(a.mul_int(self.multiplier(ctx) % a.den.max(1)))
    }
}

/// Arithmetic Frobenius at `l` in `G_{r'}`: multiplication by `l`.
pub fn frobenius(ctx: &Context, l: u64, level: Level) -> Result<GroupElement, CoreError> {
    if level.has_prime(ctx, l) {
        return Err(CoreError::DividesLevel(format!("{l} divides {}", level.value)));
    }
    if ctx.prime_index(l).is_none() && !is_prime(l) {
        return Err(CoreError::Admissibility(format!("{l} is not prime")));
    }
    let mut g = GroupElement::identity(ctx, level);
    for i in level.prime_indices() {
        let p = ctx.primes[i];
        g.exps[i] = ctx.dlog(p, l).expect("l is a unit mod p");
    }
    Ok(g)
}

pub fn act(ctx: &Context, g: &GroupElement, a: &Fraction) -> Result<Fraction, CoreError> {
    g.act(ctx, a)
}

/// Sparse formal combination of fractions.
pub type FractionChain = BTreeMap<Fraction, Int>;

pub fn chain_add(chain: &mut FractionChain, a: Fraction, c: Int) {
    if c.is_zero() {
        return;
    }
    let e = chain.entry(a).or_insert_with(Int::zero);
    *e += c;
    if e.is_zero() {
        chain.remove(&a);
    }
}

/// Element of `Z[G_r]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupRingElement {
    level: Level,
    terms: BTreeMap<GroupElement, Int>,
}

impl GroupRingElement {
    pub fn zero(level: Level) -> Self {
        Self {
            level,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(ctx: &Context, level: Level) -> Self {
        Self::from_group_element(GroupElement::identity(ctx, level))
    }

    pub fn from_group_element(g: GroupElement) -> Self {
        let level = g.level;
        let mut terms = BTreeMap::new();
        terms.insert(g, Int::one());
        Self { level, terms }
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn terms(&self) -> &BTreeMap<GroupElement, Int> {
        &self.terms
    }

    pub fn coefficient(&self, g: &GroupElement) -> Int {
        self.terms.get(g).cloned().unwrap_or_else(Int::zero)
    }

    pub fn add_term(&mut self, g: GroupElement, c: Int) {
        assert_eq!(g.level, self.level, "term of a different level");
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(g.clone()).or_insert_with(Int::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&g);
        }
    }

    /// Replaces the coefficient of `g`.
    pub fn with_coefficient(mut self, g: GroupElement, c: Int) -> Self {
        self.terms.remove(&g);
        self.add_term(g, c);
        self
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (g, c) in &other.terms {
            out.add_term(g.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (g, c) in &other.terms {
            out.add_term(g.clone(), -c.clone());
        }
        out
    }

    pub fn scale(&self, k: &Int) -> Self {
        let mut out = Self::zero(self.level);
        for (g, c) in &self.terms {
            out.add_term(g.clone(), c * k);
        }
        out
    }

    pub fn mul(&self, ctx: &Context, other: &Self) -> Self {
        let mut out = Self::zero(self.level);
        for (g, c) in &self.terms {
            for (h, d) in &other.terms {
                out.add_term(g.mul(ctx, h), c * d);
            }
        }
        out
    }

    /// `N_l = sum_{i=0}^{l-2} sigma_l^i`.
    pub fn norm(ctx: &Context, level: Level, l: u64) -> Result<Self, CoreError> {
        let mut out = Self::zero(level);
        for i in 0..l - 1 {
            out.add_term(GroupElement::sigma_power(ctx, level, l, i)?, Int::one());
        }
        Ok(out)
    }

    /// `N'_l = sum_{i=1}^{l-2} i sigma_l^i`.
    pub fn derivative(ctx: &Context, level: Level, l: u64) -> Result<Self, CoreError> {
        let mut out = Self::zero(level);
        for i in 1..l - 1 {
            out.add_term(GroupElement::sigma_power(ctx, level, l, i)?, Int::from(i));
        }
        Ok(out)
    }

    /// `N'_r = prod_{l | r} N'_l`, computed with the supplied per-prime factor.
    pub fn derivative_product_with<F>(ctx: &Context, level: Level, factor: F) -> Result<Self, CoreError>
    where
        F: Fn(&Context, Level, u64) -> Result<Self, CoreError>,
    {
        let mut out = Self::one(ctx, level);
        for l in level.primes(ctx) {
            out = out.mul(ctx, &factor(ctx, level, l)?);
        }
        Ok(out)
    }

    pub fn derivative_product(ctx: &Context, level: Level) -> Result<Self, CoreError> {
        Self::derivative_product_with(ctx, level, Self::derivative)
    }

    /// Linear extension of the action to a fraction chain.
    pub fn apply(&self, ctx: &Context, chain: &FractionChain) -> Result<FractionChain, CoreError> {
        let mut out = FractionChain::new();
        for (g, c) in &self.terms {
            let t = g.multiplier(ctx);
            for (a, k) in chain {
                if !self.level.value.is_multiple_of(a.den) {
                    return Err(CoreError::LevelMismatch(format!(
                        "{a} does not have level dividing {}",
                        self.level.value
                    )));
                }
                chain_add(&mut out, a.mul_int(t), c * k);
            }
        }
        Ok(out)
    }

    /// Action on a vector of `A(r)` indexed by numerators over `r`.
    pub fn apply_indexed(&self, ctx: &Context, v: &SparseVec) -> SparseVec {
        let r = self.level.value;
        let mut pairs = Vec::new();
        for (g, c) in &self.terms {
            let t = g.multiplier(ctx);
            for (a, k) in v.entries() {
                pairs.push((mul_mod(*a as u64, t, r) as usize, c * k));
            }
        }
        SparseVec::from_pairs(pairs)
    }
}

pub fn group_ring_apply(
    ctx: &Context,
    x: &GroupRingElement,
    chain: &FractionChain,
) -> Result<FractionChain, CoreError> {
    x.apply(ctx, chain)
}

/// Checks `N'_l (sigma_l - 1) = (l - 1) - N_l` with the given derivative.
pub fn norm_identity_check_with(
    ctx: &Context,
    l: u64,
    derivative: &GroupRingElement,
) -> Result<bool, CoreError> {
    let level = derivative.level();
    let sigma = GroupRingElement::from_group_element(GroupElement::sigma(ctx, level, l)?);
    let one = GroupRingElement::one(ctx, level);
    let lhs = derivative.mul(ctx, &sigma.sub(&one));
    let rhs = one
        .scale(&Int::from(l - 1))
        .sub(&GroupRingElement::norm(ctx, level, l)?);
    Ok(lhs == rhs)
}

pub fn norm_identity_check(ctx: &Context, l: u64) -> Result<bool, CoreError> {
    let level = ctx.level(&[l])?;
    norm_identity_check_with(ctx, l, &GroupRingElement::derivative(ctx, level, l)?)
}

/// `N'_l` with the coefficient of `sigma_l` set to zero.
pub fn perturbed_derivative(ctx: &Context, level: Level, l: u64) -> Result<GroupRingElement, CoreError> {
    let d = GroupRingElement::derivative(ctx, level, l)?;
    Ok(d.with_coefficient(GroupElement::sigma(ctx, level, l)?, Int::zero()))
}

/// Multiplication by `k` on numerators over `r`.
pub fn scale_index(a: u64, k: u64, r: u64) -> u64 {
    mul_mod(a, k % r, r)
}

/// Inverse of `k` modulo `r`, for `k` prime to `r`.
pub fn inverse_mod(k: u64, r: u64) -> Option<u64> {
    if r == 1 {
        return Some(0);
    }
    inv_mod(k % r, r)
}

pub fn power_mod(b: u64, e: u64, m: u64) -> u64 {
    pow_mod(b, e, m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx3() -> Context {
        Context::with_default_roots(3, &[7, 13, 19]).unwrap()
    }

    #[test]
    fn default_roots_by_exhaustive_order() {
        let ctx = ctx3();
        for (&l, &s) in ctx.roots().iter() {
            // Oracle: s has order l-1 and every smaller candidate does not.
            let ord = |c: u64| (1..l).find(|&k| power_mod(c, k, l) == 1).unwrap();
            assert_eq!(ord(s), l - 1);
            assert!((2..s).all(|c| ord(c) < l - 1));
        }
        assert_eq!(ctx.roots(), BTreeMap::from([(7, 3), (13, 2), (19, 2)]));
    }

    #[test]
    fn admissibility_errors() {
        assert!(matches!(Context::with_default_roots(3, &[5]), Err(CoreError::Admissibility(_))));
        assert!(matches!(Context::with_default_roots(4, &[5]), Err(CoreError::Admissibility(_))));
        assert!(matches!(Context::with_default_roots(3, &[2]), Err(CoreError::Admissibility(_))));
        assert!(matches!(Context::with_default_roots(3, &[25]), Err(CoreError::Admissibility(_))));
        assert!(Context::with_default_roots(5, &[11, 31]).is_ok());
        let bad = BTreeMap::from([(7, 2)]);
        assert!(matches!(Context::new(3, &[7], &bad), Err(CoreError::NotAGenerator { .. })));
        let alt = BTreeMap::from([(7, 5)]);
        assert_eq!(Context::new(3, &[7], &alt).unwrap().root(7), Some(5));
    }

    #[test]
    fn sigma_action_examples() {
        let ctx = ctx3();
        let r = ctx.level_of(91).unwrap();
        let s7 = GroupElement::sigma(&ctx, r, 7).unwrap();
        assert_eq!(s7.act(&ctx, &Fraction::new(1, 7)).unwrap(), Fraction::new(3, 7));
        assert_eq!(s7.act(&ctx, &Fraction::zero()).unwrap(), Fraction::zero());
        assert_eq!(s7.act(&ctx, &Fraction::new(1, 13)).unwrap(), Fraction::new(1, 13));
        assert!(s7.act(&ctx, &Fraction::new(1, 19)).is_err());
    }

    #[test]
    fn frobenius_examples() {
        let ctx = ctx3();
        let l13 = ctx.level_of(13).unwrap();
        let f = frobenius(&ctx, 7, l13).unwrap();
        // Oracle: enumerate powers of 2 mod 13 until 7 appears.
        let e = (0..12).find(|&e| power_mod(2, e, 13) == 7).unwrap();
        assert_eq!(e, 11);
        assert_eq!(f.exponent(&ctx, 13), Some(e));
        assert_eq!(f.act(&ctx, &Fraction::new(1, 13)).unwrap(), Fraction::new(7, 13));
        assert!(frobenius(&ctx, 7, Level::one()).unwrap().is_identity());
        assert!(matches!(frobenius(&ctx, 7, l13).and_then(|_| frobenius(&ctx, 13, l13)), Err(CoreError::DividesLevel(_))));
    }

    #[test]
    fn norm_elements_on_one_seventh() {
        let ctx = ctx3();
        let l7 = ctx.level_of(7).unwrap();
        let chain = FractionChain::from([(Fraction::new(1, 7), Int::one())]);
        let n = GroupRingElement::norm(&ctx, l7, 7).unwrap().apply(&ctx, &chain).unwrap();
        let expect: FractionChain = (1..7).map(|j| (Fraction::new(j, 7), Int::one())).collect();
        assert_eq!(n, expect);
        let d = GroupRingElement::derivative(&ctx, l7, 7).unwrap().apply(&ctx, &chain).unwrap();
        // Powers of 3 mod 7: 3, 2, 6, 4, 5.
        let expect: FractionChain = [(3, 1), (2, 2), (6, 3), (4, 4), (5, 5)]
            .into_iter()
            .map(|(j, c)| (Fraction::new(j, 7), Int::from(c)))
            .collect();
        assert_eq!(d, expect);
        let id = GroupRingElement::one(&ctx, l7).apply(&ctx, &chain).unwrap();
        assert_eq!(id, chain);
    }

    #[test]
    fn norm_identity_and_negative_control() {
        let ctx = ctx3();
        for l in [7, 13, 19] {
            assert!(norm_identity_check(&ctx, l).unwrap());
            let lv = ctx.level(&[l]).unwrap();
            let bad = perturbed_derivative(&ctx, lv, l).unwrap();
            assert!(!norm_identity_check_with(&ctx, l, &bad).unwrap());
        }
    }

    #[test]
    fn divisor_enumeration_is_ascending() {
        let ctx = ctx3();
        let vals: Vec<u64> = ctx.full_level().divisors(&ctx).iter().map(|l| l.value()).collect();
        assert_eq!(vals, vec![1, 7, 13, 19, 91, 133, 247, 1729]);
    }
}
