//! The double complex `K(r)` on symbols `[a, g, h]`, truncated to a window
//! `Omega(h) <= N`, with the differentials `d_l`, `delta_l`, the involution
//! `epsilon`, the shift `Delta_l` and the canonical basis of `H^0`.
//!
//! `g` is a level mask; `h` packs one 4-bit exponent per pool prime, so a
//! window bound is at most 15. `a` is stored as its numerator over `r`.

use std::collections::HashMap;
use std::sync::OnceLock;

use kolyrec_linalg::modular::{add_scaled_row, residue};
use kolyrec_linalg::{DenseMatrix, Int, LeftSolver, ModEchelon, ModRow, SparseVec};
use num_integer::Integer;
use num_traits::One;
use serde_json::{json, Value};

use crate::context::{Context, Fraction, GroupElement, Level};
use crate::distribution::{embed_vector, fraction_chain_json};
use crate::kolyvagin::{coords_mod, d_ell, universal_kolyvagin_class, H0Class};
use crate::{int_json, CoreError, Engine, Outcome};

/// Largest exponent a packed `h` can hold.
pub const MAX_WINDOW: usize = 15;

fn bit(g: u32, i: usize) -> u32 {
    (g >> i) & 1
}

fn hexp(h: u64, i: usize) -> u32 {
    ((h >> (4 * i)) & 15) as u32
}

fn hstep(i: usize) -> u64 {
    1 << (4 * i)
}

fn htotal(h: u64) -> u32 {
    (0..16).map(|i| hexp(h, i)).sum()
}

fn signed(parity: u32, c: i64) -> i64 {
    if parity % 2 == 1 {
        -c
    } else {
        c
    }
}

/// `[a, g, h]` with `a = num / r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KSymbol {
    pub g: u32,
    pub h: u64,
    pub num: u64,
}

impl KSymbol {
    pub fn omega_g(&self) -> usize {
        self.g.count_ones() as usize
    }

    pub fn big_omega_h(&self) -> usize {
        htotal(self.h) as usize
    }

    /// Bidegree `(-omega(g), Omega(h))`, totalled.
    pub fn degree(&self) -> i64 {
        self.big_omega_h() as i64 - self.omega_g() as i64
    }

    /// The symbol `[0, g, g]`.
    pub fn diagonal(g: Level) -> Self {
        let h = g.prime_indices().into_iter().map(hstep).sum();
        Self { g: g.mask(), h, num: 0 }
    }
}

/// Integral chain, sorted by symbol with no zero coefficients.
pub type KChain = Vec<(KSymbol, i64)>;

pub fn normalize(chain: &mut KChain) {
    chain.sort_unstable_by_key(|e| e.0);
    let mut out: KChain = Vec::with_capacity(chain.len());
    for &(s, c) in chain.iter() {
        match out.last_mut() {
            Some(last) if last.0 == s => last.1 += c,
            _ => out.push((s, c)),
        }
    }
    out.retain(|e| e.1 != 0);
    *chain = out;
}

pub fn is_zero_mod(chain: &KChain, m: u64) -> bool {
    chain.iter().all(|(_, c)| c.rem_euclid(m as i64) == 0)
}

/// Operators on symbols. Slots index the level primes in ascending order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KOp {
    D(usize),
    Delta(usize),
    Sigma(usize),
    Shift(usize),
    Eps,
    /// `d_l` without its sign.
    RawD(usize),
    /// `delta_l` without its sign.
    RawDelta(usize),
    /// Drops symbols with `l | h`.
    Project(usize),
}

pub struct KWindow {
    level: Level,
    r: u64,
    m: u64,
    bound: usize,
    pool: Vec<u64>,
    slots: Vec<usize>,
    primes: Vec<u64>,
    sigma: Vec<u64>,
    divisors: Vec<Level>,
    monomials: Vec<Vec<u64>>,
    system: OnceLock<Result<CocycleSystem, CoreError>>,
}

impl KWindow {
    pub fn build(ctx: &Context, level: Level, bound: usize) -> Result<Self, CoreError> {
        if bound < level.omega() + 1 {
            return Err(CoreError::WindowTooSmall(format!(
                "N = {bound} < omega({}) + 1",
                level.value()
            )));
        }
        if bound > MAX_WINDOW {
            return Err(CoreError::WindowTooSmall(format!("N = {bound} exceeds {MAX_WINDOW}")));
        }
        let primes = level.primes(ctx);
        let sigma = primes
            .iter()
            .map(|&l| Ok(GroupElement::sigma(ctx, level, l)?.multiplier(ctx)))
            .collect::<Result<Vec<_>, CoreError>>()?;
        let slots = level.prime_indices();
        let mut monomials = vec![Vec::new(); bound + 1];
        let mut stack = vec![(0usize, 0u64, 0usize)];
        while let Some((k, h, total)) = stack.pop() {
            if k == slots.len() {
                monomials[total].push(h);
                continue;
            }
            for e in 0..=(bound - total) {
                stack.push((k + 1, h + e as u64 * hstep(slots[k]), total + e));
            }
        }
        for v in monomials.iter_mut() {
            v.sort_unstable();
        }
        Ok(Self {
            level,
            r: level.value(),
            m: ctx.modulus(),
            bound,
            pool: ctx.primes().to_vec(),
            slots,
            primes,
            sigma,
            divisors: level.divisors(ctx),
            monomials,
            system: OnceLock::new(),
        })
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn slot_of(&self, l: u64) -> Option<usize> {
        self.primes.iter().position(|&p| p == l)
    }

    fn g_value(&self, g: u32) -> u64 {
        (0..self.pool.len())
            .filter(|&i| bit(g, i) == 1)
            .map(|i| self.pool[i])
            .product()
    }

    /// Whether the symbol belongs to the window.
    pub fn contains(&self, x: &KSymbol) -> bool {
        let gl = self.level.mask();
        x.g & !gl == 0
            && (0..16).all(|i| hexp(x.h, i) == 0 || self.slots.contains(&i))
            && x.big_omega_h() <= self.bound
            && x.num < self.r
            && x.num.is_multiple_of(self.g_value(x.g))
    }

    /// Symbols of total degree `e`, sorted.
    pub fn symbols_of_degree(&self, e: i64) -> Vec<KSymbol> {
        let mut out = Vec::new();
        for g in &self.divisors {
            let w = e + g.omega() as i64;
            if w < 0 || w as usize > self.bound {
                continue;
            }
            let step = g.value() as usize;
            for &h in &self.monomials[w as usize] {
                for num in (0..self.r).step_by(step) {
                    out.push(KSymbol { g: g.mask(), h, num });
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Calls `f` on every symbol of the window.
    pub fn for_each_symbol(&self, mut f: impl FnMut(&KSymbol)) {
        for g in &self.divisors {
            let step = g.value() as usize;
            for level in &self.monomials {
                for &h in level {
                    for num in (0..self.r).step_by(step) {
                        f(&KSymbol { g: g.mask(), h, num });
                    }
                }
            }
        }
    }

    pub fn size(&self) -> usize {
        let per_g: usize = self.monomials.iter().map(|v| v.len()).sum();
        self.divisors
            .iter()
            .map(|g| per_g * (self.r / g.value()) as usize)
            .sum()
    }

    /// `Sum_{l' < l} (ord g + ord h)`.
    fn below(&self, x: &KSymbol, p: usize) -> u32 {
        self.slots[..p]
            .iter()
            .map(|&i| bit(x.g, i) + hexp(x.h, i))
            .sum()
    }

    /// Membership in the subcomplex `S`: not (`a = 0` and `g | h`).
    pub fn in_s(&self, x: &KSymbol) -> bool {
        !(x.num == 0 && self.slots.iter().all(|&i| bit(x.g, i) == 0 || hexp(x.h, i) >= 1))
    }

    pub fn eps_sign(&self, x: &KSymbol) -> i64 {
        let mut parity = 0;
        let mut h_below = 0;
        for &i in &self.slots {
            parity += bit(x.g, i) * h_below;
            h_below += hexp(x.h, i);
        }
        signed(parity, 1)
    }

    pub fn apply_op(&self, op: KOp, x: &KSymbol, c: i64, out: &mut KChain) {
        match op {
            KOp::D(p) => {
                if bit(x.g, self.slots[p]) == 1 {
                    self.apply_op(KOp::RawD(p), x, signed(self.below(x, p), c), out);
                }
            }
            KOp::RawD(p) => {
                let i = self.slots[p];
                if bit(x.g, i) == 0 {
                    return;
                }
                let l = self.primes[p];
                let g = x.g & !(1 << i);
                out.push((KSymbol { g, ..*x }, c));
                let step = self.r / l;
                for k in 0..l {
                    out.push((KSymbol { g, h: x.h, num: x.num / l + k * step }, -c));
                }
            }
            KOp::Delta(p) => {
                let parity = bit(x.g, self.slots[p]) + self.below(x, p);
                self.apply_op(KOp::RawDelta(p), x, signed(parity, c), out);
            }
            KOp::RawDelta(p) => {
                let i = self.slots[p];
                debug_assert!(hexp(x.h, i) < 15);
                let h = x.h + hstep(i);
                let t = self.sigma[p];
                if hexp(x.h, i).is_multiple_of(2) {
                    out.push((KSymbol { h, ..*x }, c));
                    out.push((KSymbol { h, num: x.num * t % self.r, ..*x }, -c));
                } else {
                    let mut a = x.num;
                    for _ in 0..self.primes[p] - 1 {
                        out.push((KSymbol { h, num: a, ..*x }, c));
                        a = a * t % self.r;
                    }
                }
            }
            KOp::Sigma(p) => {
                out.push((KSymbol { num: x.num * self.sigma[p] % self.r, ..*x }, c));
            }
            KOp::Shift(p) => {
                let i = self.slots[p];
                if bit(x.g, i) == 1 && hexp(x.h, i) >= 1 {
                    out.push((KSymbol { g: x.g & !(1 << i), h: x.h - hstep(i), num: x.num }, c));
                }
            }
            KOp::Eps => out.push((*x, self.eps_sign(x) * c)),
            KOp::Project(p) => {
                if hexp(x.h, self.slots[p]) == 0 {
                    out.push((*x, c));
                }
            }
        }
    }

    /// Applies a word of operators; the last one acts first.
    pub fn apply_word(&self, word: &[KOp], chain: &KChain) -> KChain {
        let mut cur = chain.clone();
        for &op in word.iter().rev() {
            let mut next = Vec::with_capacity(cur.len() * 4);
            for (x, c) in &cur {
                self.apply_op(op, x, *c, &mut next);
            }
            normalize(&mut next);
            cur = next;
        }
        cur
    }

    /// `sum_k c_k w_k (x)`.
    fn combo(&self, terms: &[(i64, &[KOp])], x: &KSymbol) -> KChain {
        let start = vec![(*x, 1)];
        let mut out = Vec::new();
        for (c, w) in terms {
            out.extend(self.apply_word(w, &start).into_iter().map(|(s, v)| (s, v * c)));
        }
        normalize(&mut out);
        out
    }

    pub fn d(&self, chain: &KChain) -> KChain {
        self.sum_over_slots(chain, KOp::D, None)
    }

    pub fn delta(&self, chain: &KChain) -> KChain {
        self.sum_over_slots(chain, KOp::Delta, None)
    }

    /// `d + delta`.
    pub fn total(&self, chain: &KChain) -> KChain {
        self.total_without(chain, None)
    }

    /// `d + delta` over the slots other than `skip`, i.e. the differential of `K(r/l)`.
    pub fn total_without(&self, chain: &KChain, skip: Option<usize>) -> KChain {
        let mut out = self.sum_over_slots(chain, KOp::D, skip);
        out.extend(self.sum_over_slots(chain, KOp::Delta, skip));
        normalize(&mut out);
        out
    }

    fn sum_over_slots(&self, chain: &KChain, op: fn(usize) -> KOp, skip: Option<usize>) -> KChain {
        let mut out = Vec::new();
        for p in 0..self.slots.len() {
            if Some(p) == skip {
                continue;
            }
            for (x, c) in chain {
                self.apply_op(op(p), x, *c, &mut out);
            }
        }
        normalize(&mut out);
        out
    }

    pub fn describe(&self, x: &KSymbol) -> String {
        let h: Vec<String> = self
            .slots
            .iter()
            .zip(&self.primes)
            .filter(|(i, _)| hexp(x.h, **i) > 0)
            .map(|(i, l)| match hexp(x.h, *i) {
                1 => l.to_string(),
                e => format!("{l}^{e}"),
            })
            .collect();
        let h = if h.is_empty() { "1".to_string() } else { h.join("*") };
        format!("[{}, {}, {}]", Fraction::from_index(x.num, self.r), self.g_value(x.g), h)
    }

    /// The cocycle solver, built on first use.
    pub fn cocycles(&self, engine: &Engine) -> Result<&CocycleSystem, CoreError> {
        self.system
            .get_or_init(|| CocycleSystem::build(engine, self))
            .as_ref()
            .map_err(Clone::clone)
    }
}

/// Counts of identity instances checked and violated.
#[derive(Default)]
struct Tally {
    entries: Vec<(String, usize, usize, Option<String>)>,
}

impl Tally {
    fn record(&mut self, name: &str, ok: bool, example: impl FnOnce() -> String) {
        let pos = match self.entries.iter().position(|e| e.0 == name) {
            Some(p) => p,
            None => {
                self.entries.push((name.to_string(), 0, 0, None));
                self.entries.len() - 1
            }
        };
        let e = &mut self.entries[pos];
        e.1 += 1;
        if !ok {
            e.2 += 1;
            if e.3.is_none() {
                e.3 = Some(example());
            }
        }
    }

    fn into_outcome(self) -> Outcome {
        let mut out = Outcome::new();
        for (name, checked, failed, example) in self.entries {
            let label = match &example {
                Some(x) => format!("{name} ({failed} violations, e.g. at {x})"),
                None => name.clone(),
            };
            out.require(label, failed == 0);
            out.detail(&name, json!({ "checked": checked, "violations": failed }));
        }
        out
    }
}

/// Anticommutation, squares, totals and `G_r`-equivariance of `d` and `delta`.
///
/// An identity is tested on `x` only when every intermediate symbol stays in the window.
pub fn differential_identity_check(w: &KWindow) -> Outcome {
    use KOp::*;
    let k = w.slots.len();
    let n = w.bound;
    let mut tally = Tally::default();
    w.for_each_symbol(|x| {
        let om = x.big_omega_h();
        let one = vec![(*x, 1)];
        for p in 0..k {
            for q in p..k {
                let dd = if p == q {
                    w.combo(&[(1, &[D(p), D(p)])], x)
                } else {
                    w.combo(&[(1, &[D(p), D(q)]), (1, &[D(q), D(p)])], x)
                };
                tally.record("d anticommute", dd.is_empty(), || w.describe(x));
                if om + 2 <= n {
                    let ee = if p == q {
                        w.combo(&[(1, &[Delta(p), Delta(p)])], x)
                    } else {
                        w.combo(&[(1, &[Delta(p), Delta(q)]), (1, &[Delta(q), Delta(p)])], x)
                    };
                    tally.record("delta anticommute", ee.is_empty(), || w.describe(x));
                }
            }
            for q in 0..k {
                if om < n {
                    let de = w.combo(&[(1, &[D(p), Delta(q)]), (1, &[Delta(q), D(p)])], x);
                    tally.record("d delta anticommute", de.is_empty(), || w.describe(x));
                    let se = w.combo(&[(1, &[Sigma(q), Delta(p)]), (-1, &[Delta(p), Sigma(q)])], x);
                    tally.record("delta equivariant", se.is_empty(), || w.describe(x));
                }
                let sd = w.combo(&[(1, &[Sigma(q), D(p)]), (-1, &[D(p), Sigma(q)])], x);
                tally.record("d equivariant", sd.is_empty(), || w.describe(x));
            }
        }
        tally.record("d^2 = 0", w.d(&w.d(&one)).is_empty(), || w.describe(x));
        if om + 2 <= n {
            tally.record("delta^2 = 0", w.delta(&w.delta(&one)).is_empty(), || w.describe(x));
            tally.record("(d + delta)^2 = 0", w.total(&w.total(&one)).is_empty(), || w.describe(x));
        }
        if om < n {
            let mut s = w.d(&w.delta(&one));
            s.extend(w.delta(&w.d(&one)));
            normalize(&mut s);
            tally.record("d delta + delta d = 0", s.is_empty(), || w.describe(x));
        }
    });
    let mut out = tally.into_outcome();
    out.detail("window_bound", w.bound);
    out.detail("window_symbols", w.size());
    out
}

/// `epsilon` is an involution conjugating `d_l`, `delta_l` to their unsigned forms up to sign.
pub fn epsilon_check(w: &KWindow) -> Outcome {
    use KOp::*;
    let k = w.slots.len();
    let mut tally = Tally::default();
    w.for_each_symbol(|x| {
        let one = vec![(*x, 1)];
        tally.record("epsilon^2 = 1", w.apply_word(&[Eps, Eps], &one) == one, || w.describe(x));
        let ord_g: u32 = w.slots.iter().map(|&i| bit(x.g, i)).sum();
        for p in 0..k {
            let g_below: u32 = w.slots[..p].iter().map(|&i| bit(x.g, i)).sum();
            let h_below: u32 = w.slots[..p].iter().map(|&i| hexp(x.h, i)).sum();
            let lhs = w.apply_word(&[Eps, D(p), Eps], &one);
            let rhs = w.combo(&[(signed(g_below, 1), &[RawD(p)])], x);
            tally.record("epsilon d epsilon", lhs == rhs, || w.describe(x));
            if x.big_omega_h() < w.bound {
                let lhs = w.apply_word(&[Eps, Delta(p), Eps], &one);
                let rhs = w.combo(&[(signed(ord_g + h_below, 1), &[RawDelta(p)])], x);
                tally.record("epsilon delta epsilon", lhs == rhs, || w.describe(x));
            }
        }
    });
    tally.into_outcome()
}

/// Stability of `S` and `d K + delta K` inside `S + M K`.
pub fn s_mask_check(w: &KWindow) -> Outcome {
    use KOp::*;
    let k = w.slots.len();
    let m = w.m;
    let outside_s_zero = |chain: &KChain| {
        chain
            .iter()
            .all(|(s, c)| w.in_s(s) || c.rem_euclid(m as i64) == 0)
    };
    let mut tally = Tally::default();
    w.for_each_symbol(|x| {
        let one = vec![(*x, 1)];
        let room = x.big_omega_h() < w.bound;
        if w.in_s(x) {
            for p in 0..k {
                tally.record("S stable under d", outside_s_zero(&w.apply_word(&[D(p)], &one)), || w.describe(x));
                if room {
                    tally.record("S stable under delta", outside_s_zero(&w.apply_word(&[Delta(p)], &one)), || {
                        w.describe(x)
                    });
                }
                tally.record("S stable under G", outside_s_zero(&w.apply_word(&[Sigma(p)], &one)), || {
                    w.describe(x)
                });
            }
            tally.record("S stable under epsilon", outside_s_zero(&w.apply_word(&[Eps], &one)), || w.describe(x));
        }
        for p in 0..k {
            tally.record("d_l K in S + MK", outside_s_zero(&w.apply_word(&[D(p)], &one)), || w.describe(x));
            if room {
                tally.record("delta_l K in S + MK", outside_s_zero(&w.apply_word(&[Delta(p)], &one)), || {
                    w.describe(x)
                });
            }
        }
        if x.degree() == 0 {
            tally.record("0-chains have Omega(h) = omega(g)", x.big_omega_h() == x.omega_g(), || w.describe(x));
        }
    });
    tally.into_outcome()
}

/// Identities of the shift `Delta_l` against `d`, `delta`, and its image.
///
/// `Delta_l` can leave `K(r/l)` when `l^2 | h`; such hits are counted in
/// `literal_containment_violations`. The projection onto `l`-free `h` is
/// required to be a chain map mod `M` instead.
pub fn shift_identity_check(w: &KWindow) -> Outcome {
    use KOp::*;
    let k = w.slots.len();
    let m = w.m;
    let mut tally = Tally::default();
    let mut literal = 0usize;
    let mut example: Option<String> = None;
    w.for_each_symbol(|x| {
        let one = vec![(*x, 1)];
        let room = x.big_omega_h() < w.bound;
        for p in 0..k {
            for q in (0..k).filter(|&q| q != p) {
                let c = w.combo(&[(1, &[Shift(p), D(q)]), (-1, &[D(q), Shift(p)])], x);
                tally.record("Delta_l d_p = d_p Delta_l", c.is_empty(), || w.describe(x));
                if room {
                    let c = w.combo(&[(1, &[Shift(p), Delta(q)]), (-1, &[Delta(q), Shift(p)])], x);
                    tally.record("Delta_l delta_p = delta_p Delta_l", c.is_empty(), || w.describe(x));
                }
            }
            tally.record("Delta_l d_l = 0", w.apply_word(&[Shift(p), D(p)], &one).is_empty(), || w.describe(x));
            tally.record("d_l Delta_l = 0", w.apply_word(&[D(p), Shift(p)], &one).is_empty(), || w.describe(x));
            if room {
                let c = w.combo(&[(1, &[Delta(p), Shift(p)]), (-1, &[Shift(p), Delta(p)])], x);
                tally.record("delta_l Delta_l = Delta_l delta_l mod M", is_zero_mod(&c, m), || w.describe(x));
                let shifted = w.apply_word(&[Project(p), Shift(p)], &one);
                let lhs = w.total_without(&shifted, Some(p));
                let rhs = w.apply_word(&[Project(p), Shift(p)], &w.total(&one));
                let mut diff = lhs;
                diff.extend(rhs.into_iter().map(|(s, c)| (s, -c)));
                normalize(&mut diff);
                tally.record("projected Delta_l is a chain map mod M", is_zero_mod(&diff, m), || {
                    w.describe(x)
                });
            }
            if let Some((y, _)) = w.apply_word(&[Shift(p)], &one).first() {
                let i = w.slots[p];
                let weak = bit(y.g, i) == 0;
                tally.record("Delta_l removes l from g", weak, || w.describe(x));
                if hexp(y.h, i) > 0 {
                    literal += 1;
                    example.get_or_insert_with(|| format!("Delta_{} {} = {}", w.primes[p], w.describe(x), w.describe(y)));
                }
            }
        }
    });
    let mut out = tally.into_outcome();
    out.detail("literal_containment_violations", literal);
    if let Some(e) = example {
        out.detail("literal_containment_example", e);
    }
    out
}

/// Degree-0 cocycle equations of the window, with the `(0,0)` projection to `U_r/M`.
pub struct CocycleSystem {
    m: u64,
    deg0: Vec<KSymbol>,
    index1: HashMap<KSymbol, usize>,
    nu: usize,
    phi_rows: Vec<ModRow>,
    /// Rows `[(d + delta) x | phi(x)]` over all degree-0 `x`.
    full: LeftSolver,
    /// Rows `(d + delta) x` over degree-0 `x` in `S`.
    restricted: LeftSolver,
    restricted_vars: Vec<usize>,
}

impl CocycleSystem {
    fn build(engine: &Engine, w: &KWindow) -> Result<Self, CoreError> {
        let m = w.m;
        let u = engine.u(w.level);
        let nu = u.module().ncoords();
        let phi_rows: Vec<ModRow> = (0..w.r as usize)
            .map(|a| coords_mod(&u, &SparseVec::unit(a), m))
            .collect();
        let deg0 = w.symbols_of_degree(0);
        let index1: HashMap<KSymbol, usize> = w
            .symbols_of_degree(1)
            .into_iter()
            .enumerate()
            .map(|(i, s)| (s, i))
            .collect();
        let n1 = index1.len();
        let mut full_rows = Vec::with_capacity(deg0.len());
        let mut restricted_rows = Vec::new();
        let mut restricted_vars = Vec::new();
        for (k, x) in deg0.iter().enumerate() {
            let image = w.total(&vec![(*x, 1)]);
            let row = mod_row(&image, &index1, m)?;
            let mut with_phi = row.clone();
            if x.g == 0 && x.h == 0 {
                with_phi.extend(phi_rows[x.num as usize].iter().map(|&(j, v)| (j + n1, v)));
            }
            full_rows.push(with_phi);
            if w.in_s(x) {
                restricted_rows.push(row);
                restricted_vars.push(k);
            }
        }
        let full = LeftSolver::new(m, &full_rows, n1 + nu);
        let restricted = LeftSolver::new(m, &restricted_rows, n1);
        Ok(Self {
            m,
            deg0,
            index1,
            nu,
            phi_rows,
            full,
            restricted,
            restricted_vars,
        })
    }

    pub fn degree0(&self) -> &[KSymbol] {
        &self.deg0
    }

    fn n1(&self) -> usize {
        self.index1.len()
    }

    /// `U_r/M`-coordinates of the `(0,0)`-part.
    pub fn phi(&self, chain: &KChain) -> ModRow {
        let mut acc: ModRow = Vec::new();
        for (x, c) in chain {
            if x.g == 0 && x.h == 0 {
                let c = c.rem_euclid(self.m as i64) as u64;
                acc = add_scaled_row(&acc, c, &self.phi_rows[x.num as usize], self.m);
            }
        }
        acc
    }

    /// The `(0,0)`-part as a vector over `A(r)`, coefficients reduced mod `M`.
    pub fn phi_rep(&self, chain: &KChain) -> SparseVec {
        SparseVec::from_pairs(
            chain
                .iter()
                .filter(|(x, _)| x.g == 0 && x.h == 0)
                .map(|(x, c)| (x.num as usize, Int::from(c.rem_euclid(self.m as i64)))),
        )
    }

    fn chain_of(&self, t: &ModRow, vars: Option<&[usize]>) -> KChain {
        let mut chain: KChain = t
            .iter()
            .map(|&(k, v)| {
                let k = vars.map_or(k, |vs| vs[k]);
                (self.deg0[k], v as i64)
            })
            .collect();
        normalize(&mut chain);
        chain
    }

    /// Generators of `phi(Z^0)` in `U_r/M`.
    pub fn phi_of_cocycles(&self) -> Vec<ModRow> {
        let n1 = self.n1();
        self.full
            .echelon_rows(n1, n1 + self.nu)
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .filter(|&(j, _)| j >= n1 && j < n1 + self.nu)
                    .map(|(j, v)| (j - n1, v))
                    .collect()
            })
            .collect()
    }

    /// Order of the cocycles with vanishing `(0,0)`-part.
    pub fn phi_kernel_order(&self) -> Int {
        self.full.kernel_order()
    }

    /// A degree-0 cocycle mod `M` whose `(0,0)`-part has the given coordinates.
    pub fn lift(&self, coords: &ModRow) -> Option<KChain> {
        let n1 = self.n1();
        let b: ModRow = coords.iter().map(|&(j, v)| (j + n1, v)).collect();
        self.full.solve(&b).map(|t| self.chain_of(&t, None))
    }

    /// `s` supported on `S` with `(d + delta)(seed + s) = 0` mod `M`.
    pub fn complete_in_s(&self, w: &KWindow, seed: &KSymbol) -> Result<Option<KChain>, CoreError> {
        let image = w.total(&vec![(*seed, 1)]);
        let target: ModRow = mod_row(&image, &self.index1, self.m)?
            .into_iter()
            .map(|(j, v)| (j, (self.m - v) % self.m))
            .collect();
        Ok(self
            .restricted
            .solve(&target)
            .map(|t| self.chain_of(&t, Some(&self.restricted_vars))))
    }

    /// Cocycles supported on `S`, as generators.
    pub fn s_cocycles(&self) -> Vec<KChain> {
        self.restricted
            .kernel()
            .iter()
            .map(|t| self.chain_of(t, Some(&self.restricted_vars)))
            .collect()
    }
}

fn mod_row(chain: &KChain, index: &HashMap<KSymbol, usize>, m: u64) -> Result<ModRow, CoreError> {
    let mut row = Vec::with_capacity(chain.len());
    for (x, c) in chain {
        let Some(&j) = index.get(x) else {
            return Err(CoreError::Contradiction(format!("symbol {x:?} outside the window")));
        };
        let v = c.rem_euclid(m as i64) as u64;
        if v != 0 {
            row.push((j, v));
        }
    }
    row.sort_unstable();
    Ok(row)
}

/// `H^0` of the window mod `M` agrees with `H^0(G_r, U_r/M)` through the `(0,0)`-part.
pub fn h0_comparison_check(engine: &Engine, level: Level) -> Result<Outcome, CoreError> {
    let w = engine.window(level)?;
    let sys = w.cocycles(engine)?;
    let h0 = engine.h0(level)?;
    let m = sys.m;
    let mut out = Outcome::new();

    let images = sys.phi_of_cocycles();
    let mut phi_span = ModEchelon::new(m, sys.nu);
    let mut invariant = true;
    for v in images {
        invariant &= h0.contains(&v);
        phi_span.insert(v);
    }
    out.require("phi(Z^0) lies in H^0(U_r/M)", invariant);
    out.require("phi(Z^0) is all of H^0(U_r/M)", phi_span.order() == *h0.order());

    let index0: HashMap<KSymbol, usize> = sys.deg0.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let mut boundaries = ModEchelon::new(m, sys.deg0.len());
    let mut closed = true;
    let mut phi_zero = true;
    for y in w.symbols_of_degree(-1) {
        let image = w.total(&vec![(y, 1)]);
        closed &= is_zero_mod(&w.total(&image), m);
        phi_zero &= sys.phi(&image).is_empty();
        boundaries.insert(mod_row(&image, &index0, m)?);
    }
    out.require("B^0 consists of cocycles", closed);
    out.require("phi vanishes on B^0", phi_zero);
    let kernel = sys.phi_kernel_order();
    out.require("ker(phi) on Z^0 equals B^0", boundaries.order() == kernel);

    let z0 = &kernel * phi_span.order();
    out.detail("degree0_symbols", sys.deg0.len());
    out.detail("degree1_symbols", sys.n1());
    out.detail("cocycles_order", int_json(&z0));
    out.detail("coboundaries_order", int_json(&boundaries.order()));
    out.detail("h0_order", int_json(h0.order()));
    out.detail("h0_dimension", h0.dimension());
    Ok(out)
}

pub struct CanonicalEntry {
    pub g: Level,
    pub class: H0Class,
    /// `[0, g, g] + s` with `s` on `S`.
    pub cocycle: KChain,
}

/// The classes `c-bar_g` for `g | r`, in the order of `Level::divisors`.
pub struct CanonicalBasis {
    level: Level,
    entries: Vec<CanonicalEntry>,
    ambiguous: usize,
}

impl CanonicalBasis {
    pub fn build(engine: &Engine, level: Level) -> Result<Self, CoreError> {
        let ctx = engine.ctx();
        let w = engine.window(level)?;
        let sys = w.cocycles(engine)?;
        let ambiguous = sys
            .s_cocycles()
            .iter()
            .filter(|k| !sys.phi(k).is_empty())
            .count();
        let mut entries = Vec::new();
        for g in level.divisors(ctx) {
            let seed = KSymbol::diagonal(g);
            let Some(mut cocycle) = sys.complete_in_s(&w, &seed)? else {
                return Err(CoreError::NoLift(format!(
                    "no S-correction for [0, {}, {}] at level {}",
                    g.value(),
                    g.value(),
                    level.value()
                )));
            };
            cocycle.push((seed, 1));
            normalize(&mut cocycle);
            let class = H0Class::from_rep(engine, level, sys.phi_rep(&cocycle));
            entries.push(CanonicalEntry { g, class, cocycle });
        }
        Ok(Self { level, entries, ambiguous })
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn entries(&self) -> &[CanonicalEntry] {
        &self.entries
    }

    pub fn get(&self, g: Level) -> Option<&CanonicalEntry> {
        self.entries.iter().find(|e| e.g == g)
    }

    /// Number of `S`-supported cocycle generators with nonzero `(0,0)`-part.
    pub fn ambiguous_generators(&self) -> usize {
        self.ambiguous
    }
}

/// Well-definedness of each `c-bar_g` and that together they form a basis of `H^0`.
pub fn canonical_basis_check(engine: &Engine, level: Level) -> Result<Outcome, CoreError> {
    let m = engine.ctx().modulus();
    let basis = engine.canonical_basis(level)?;
    let h0 = engine.h0(level)?;
    let mut out = Outcome::new();
    out.require("S-corrections determine one class", basis.ambiguous_generators() == 0);
    let rows: Vec<ModRow> = basis.entries().iter().map(|e| e.class.coords.clone()).collect();
    out.require("each c-bar_g is invariant", rows.iter().all(|r| h0.contains(r)));
    let solver = LeftSolver::new(m, &rows, h0.ncoords());
    out.require("c-bar_g are independent", solver.kernel_order().is_one());
    let mut span = ModEchelon::new(m, h0.ncoords());
    span.extend(rows);
    out.require("c-bar_g span H^0", span.order() == *h0.order());
    out.detail("count", basis.entries().len());
    out.detail("ambiguous_generators", basis.ambiguous_generators());
    Ok(out)
}

/// `D_l c-bar_r = c-bar_{r/l}` for each `l | r`.
pub fn canonical_recursion_check(engine: &Engine, level: Level) -> Result<Outcome, CoreError> {
    let ctx = engine.ctx();
    let top = engine.canonical_basis(level)?;
    let entry = top.get(level).ok_or_else(|| CoreError::Contradiction("missing c-bar_r".into()))?;
    let mut out = Outcome::new();
    for l in level.primes(ctx) {
        let lower = level.without(ctx, l)?;
        let below = engine.canonical_basis(lower)?;
        let target = below
            .get(lower)
            .ok_or_else(|| CoreError::Contradiction("missing c-bar_{r/l}".into()))?;
        let image = d_ell(engine, &entry.class, l)?;
        out.require(format!("D_{l} c-bar_r = c-bar_r/{l}"), image.class.same_class(&target.class));
    }
    Ok(out)
}

/// The shift `Delta_l` on lifted cocycles computes `D_l`.
///
/// Tested on the canonical basis and on the embedded universal classes `c_g`.
pub fn shift_equals_d_check(engine: &Engine, level: Level, l: u64) -> Result<Outcome, CoreError> {
    let ctx = engine.ctx();
    let m = ctx.modulus();
    let w = engine.window(level)?;
    let p = w
        .slot_of(l)
        .ok_or_else(|| CoreError::NotADivisor(format!("{l} does not divide {}", level.value())))?;
    let lower = level.without(ctx, l)?;
    let sys = w.cocycles(engine)?;
    let basis = engine.canonical_basis(level)?;
    let u = engine.u(level);

    let mut cases: Vec<(String, H0Class, KChain)> = basis
        .entries()
        .iter()
        .map(|e| (format!("c-bar_{}", e.g.value()), e.class.clone(), e.cocycle.clone()))
        .collect();
    for g in level.divisors(ctx) {
        let c = universal_kolyvagin_class(engine, g)?;
        let rep = embed_vector(&c.rep, g.value(), level.value());
        let class = H0Class::from_rep(engine, level, rep);
        let z = sys
            .lift(&class.coords)
            .ok_or_else(|| CoreError::NoLift(format!("c_{} at level {}", g.value(), level.value())))?;
        cases.push((format!("c_{}", g.value()), class, z));
    }

    let mut out = Outcome::new();
    let mut literal = 0usize;
    for (name, class, z) in &cases {
        out.require(format!("{name}: lift is a cocycle"), is_zero_mod(&w.total(z), m));
        out.require(format!("{name}: lift has the right (0,0)-part"), sys.phi(z) == class.coords);
        let shifted = w.apply_word(&[KOp::Shift(p)], z);
        out.require(format!("{name}: Delta_{l} z is a cocycle"), is_zero_mod(&w.total(&shifted), m));
        literal += shifted
            .iter()
            .filter(|(s, c)| hexp(s.h, w.slots[p]) > 0 && c.rem_euclid(m as i64) != 0)
            .count();
        let y = w.apply_word(&[KOp::Project(p)], &shifted);
        out.require(
            format!("{name}: projected Delta_{l} z is a cocycle of K(r/l)"),
            is_zero_mod(&w.total_without(&y, Some(p)), m),
        );
        let rep = SparseVec::from_pairs(
            y.iter()
                .filter(|(s, _)| s.g == 0 && s.h == 0)
                .map(|(s, c)| ((s.num / l) as usize, Int::from(c.rem_euclid(m as i64)))),
        );
        let shifted_class = H0Class::from_rep(engine, lower, rep);
        let image = d_ell(engine, class, l)?;
        out.require(format!("{name}: Delta_{l} = D_{l}"), image.class.same_class(&shifted_class));
    }
    out.detail("cases", cases.len());
    out.detail("literal_containment_violations", literal);
    out.detail("u_rank", u.rank());
    Ok(out)
}

/// Transition from the canonical basis to the universal classes `c_g`.
pub struct Transition {
    pub divisors: Vec<Level>,
    /// `c_g = sum_{g'} t[g][g'] c-bar_{g'}`, residues mod `M`.
    pub matrix: Vec<Vec<u64>>,
}

pub fn transition_matrix(engine: &Engine, level: Level) -> Result<Option<Transition>, CoreError> {
    let ctx = engine.ctx();
    let m = ctx.modulus();
    let basis = engine.canonical_basis(level)?;
    let h0 = engine.h0(level)?;
    let mut divisors = level.divisors(ctx);
    divisors.sort_by_key(|g| (g.omega(), g.value()));
    let rows: Vec<ModRow> = divisors
        .iter()
        .map(|g| basis.get(*g).map(|e| e.class.coords.clone()))
        .collect::<Option<_>>()
        .ok_or_else(|| CoreError::Contradiction("canonical basis incomplete".into()))?;
    let solver = LeftSolver::new(m, &rows, h0.ncoords());
    let mut matrix = Vec::new();
    for g in &divisors {
        let c = universal_kolyvagin_class(engine, *g)?;
        let rep = embed_vector(&c.rep, g.value(), level.value());
        let coords = H0Class::from_rep(engine, level, rep).coords;
        let Some(t) = solver.solve(&coords) else {
            return Ok(None);
        };
        let mut dense = vec![0u64; divisors.len()];
        for (j, v) in t {
            dense[j] = v;
        }
        matrix.push(dense);
    }
    Ok(Some(Transition { divisors, matrix }))
}

/// `{c_g}` is a basis: the transition matrix is unitriangular for divisibility.
pub fn basis_corollary_check(engine: &Engine, level: Level) -> Result<Outcome, CoreError> {
    let m = engine.ctx().modulus();
    let mut out = Outcome::new();
    let Some(t) = transition_matrix(engine, level)? else {
        out.require("each c_g lies in the span of the canonical basis", false);
        return Ok(out);
    };
    let n = t.divisors.len();
    let mut diag = true;
    let mut support = true;
    for i in 0..n {
        diag &= t.matrix[i][i] == 1 % m;
        for j in 0..n {
            if t.matrix[i][j] != 0 && !t.divisors[j].divides(&t.divisors[i]) {
                support = false;
            }
        }
    }
    out.require("unit diagonal", diag);
    out.require("t[g][g'] nonzero only for g' | g", support);
    let dense = DenseMatrix::from_rows(
        &t.matrix
            .iter()
            .map(|r| r.iter().map(|&v| v as i64).collect())
            .collect::<Vec<Vec<i64>>>(),
    );
    let det = dense.determinant();
    out.require("determinant is a unit mod M", det.gcd(&Int::from(m)).is_one());
    let basis = engine.canonical_basis(level)?;
    let c1 = universal_kolyvagin_class(engine, Level::one())?;
    let c1 = H0Class::from_rep(engine, level, embed_vector(&c1.rep, 1, level.value()));
    let cbar1 = basis.get(Level::one()).map(|e| e.class.clone());
    out.require("c_1 = c-bar_1", cbar1.is_some_and(|c| c.same_class(&c1)));
    out.detail("divisors", t.divisors.iter().map(|g| g.value()).collect::<Vec<_>>());
    out.detail("transition", json!(t.matrix));
    out.detail("determinant_mod_m", residue(&det, m));
    Ok(out)
}

/// Reduced representative of a canonical class, as JSON.
pub fn canonical_class_json(engine: &Engine, level: Level, g: Level) -> Result<Value, CoreError> {
    let basis = engine.canonical_basis(level)?;
    let e = basis
        .get(g)
        .ok_or_else(|| CoreError::NotADivisor(format!("{} does not divide {}", g.value(), level.value())))?;
    Ok(json!({
        "level": level.value(),
        "g": g.value(),
        "representative": fraction_chain_json(&e.class.reduced_chain(engine.ctx().modulus())),
        "coordinates": e.class.coords,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn engine() -> Engine {
        Engine::new(Context::with_default_roots(3, &[7, 13, 19]).unwrap())
    }

    fn lvl(e: &Engine, r: u64) -> Level {
        e.ctx().level_of(r).unwrap()
    }

    #[test]
    fn window_bound_is_enforced() {
        let e = engine();
        let l = lvl(&e, 91);
        assert!(matches!(KWindow::build(e.ctx(), l, 2), Err(CoreError::WindowTooSmall(_))));
        assert!(KWindow::build(e.ctx(), l, 3).is_ok());
    }

    #[test]
    fn window_sizes() {
        let e = engine();
        let w = e.window(lvl(&e, 7)).unwrap();
        // g = 1: h in {1, 7, 49}, 7 values of a; g = 7: same h, a = 0.
        assert_eq!(w.size(), 3 * 7 + 3);
        assert_eq!(w.symbols_of_degree(0).len(), 7 + 1);
        let w = e.window(lvl(&e, 1729)).unwrap();
        assert_eq!(w.symbols_of_degree(0).len(), 3386);
    }

    #[test]
    fn d_and_delta_on_r7() {
        let e = engine();
        let w = e.window(lvl(&e, 7)).unwrap();
        let x = KSymbol { g: 1, h: 1, num: 0 };
        // d_7 [0, 7, 7] = [0, 1, 7] - sum_b [b/7, 1, 7].
        let dx = w.d(&vec![(x, 1)]);
        let nonzero: Vec<_> = dx.iter().map(|(s, c)| (s.num, *c)).collect();
        assert_eq!(nonzero, (1..7).map(|b| (b, -1)).collect::<Vec<_>>());
        // delta_7 [1/7, 1, 1] = [1/7, 1, 7] - [3/7, 1, 7].
        let y = KSymbol { g: 0, h: 0, num: 1 };
        let dy = w.delta(&vec![(y, 1)]);
        assert_eq!(dy, vec![(KSymbol { g: 0, h: 1, num: 1 }, 1), (KSymbol { g: 0, h: 1, num: 3 }, -1)]);
        // Odd exponent: the norm, 6 terms.
        let z = KSymbol { g: 0, h: 1, num: 1 };
        assert_eq!(w.delta(&vec![(z, 1)]).len(), 6);
    }

    #[test]
    fn identities_hold_on_small_windows() {
        let e = engine();
        for r in [7, 13, 91] {
            let w = e.window(lvl(&e, r)).unwrap();
            for (name, o) in [
                ("differentials", differential_identity_check(&w)),
                ("epsilon", epsilon_check(&w)),
                ("mask", s_mask_check(&w)),
                ("shift", shift_identity_check(&w)),
            ] {
                assert!(o.passed(), "{name} at {r}: {:?}", o.failures());
            }
        }
    }

    #[test]
    fn shift_leaves_the_lower_complex_when_l_squared_divides_h() {
        let e = engine();
        let w = e.window(lvl(&e, 91)).unwrap();
        let p = w.slot_of(7).unwrap();
        let h = 2 * hstep(0) + hstep(1);
        let x = KSymbol { g: 0b11, h, num: 0 };
        assert_eq!(x.degree(), 1);
        let y = w.apply_word(&[KOp::Shift(p)], &vec![(x, 1)]);
        assert_eq!(w.describe(&y[0].0), "[0, 13, 7*13]");
        let out = shift_identity_check(&w);
        assert!(out.details()["literal_containment_violations"].as_u64().unwrap() > 0);
    }

    #[test]
    fn h0_comparison_small() {
        let e = engine();
        for r in [1, 7, 13, 91] {
            let o = h0_comparison_check(&e, lvl(&e, r)).unwrap();
            assert!(o.passed(), "{r}: {:?}", o.failures());
        }
    }

    #[test]
    fn canonical_basis_small() {
        let e = engine();
        for r in [7, 91] {
            let l = lvl(&e, r);
            let o = canonical_basis_check(&e, l).unwrap();
            assert!(o.passed(), "{r}: {:?}", o.failures());
            let o = canonical_recursion_check(&e, l).unwrap();
            assert!(o.passed(), "{r}: {:?}", o.failures());
            let o = basis_corollary_check(&e, l).unwrap();
            assert!(o.passed(), "{r}: {:?}", o.failures());
        }
        let b = e.canonical_basis(Level::one()).unwrap();
        assert_eq!(b.entries()[0].class.reduced_chain(3).len(), 1);
    }

    #[test]
    fn shift_computes_d_small() {
        let e = engine();
        let o = shift_equals_d_check(&e, lvl(&e, 7), 7).unwrap();
        assert!(o.passed(), "{:?}", o.failures());
        for l in [7, 13] {
            let o = shift_equals_d_check(&e, lvl(&e, 91), l).unwrap();
            assert!(o.passed(), "{l}: {:?}", o.failures());
        }
    }
}
