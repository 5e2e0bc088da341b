use std::collections::BTreeMap;

use kolyrec_core::context::{frobenius, norm_identity_check, power_mod};
use kolyrec_core::distribution::{embedding_transitivity, i_ell_check, reduction_sequence_check, relations_stable_check};
use kolyrec_core::doublecomplex::{canonical_basis_check, is_zero_mod, normalize, KOp, KSymbol, KWindow};
use kolyrec_core::kolyvagin::{h0_dimension_check, iterated_recursion_check, recursion_check_universal};
use kolyrec_core::{Context, Engine, Fraction, GroupElement, Level};
use proptest::prelude::*;

fn generators(l: u64) -> Vec<u64> {
    (2..l).filter(|&c| (1..l - 1).all(|k| power_mod(c, k, l) != 1)).collect()
}

fn element(ctx: &Context, level: Level, exps: &[u64]) -> GroupElement {
    let mut g = GroupElement::identity(ctx, level);
    for (l, e) in level.primes(ctx).into_iter().zip(exps) {
        g = g.mul(ctx, &GroupElement::sigma_power(ctx, level, l, *e).unwrap());
    }
    g
}

fn pool3() -> Context {
    Context::with_default_roots(3, &[7, 13, 19]).unwrap()
}

#[test]
fn act_is_a_group_action_exhaustively_at_91() {
    let ctx = pool3();
    let level = ctx.level_of(91).unwrap();
    let elems: Vec<GroupElement> = (0..6)
        .flat_map(|i| (0..12).map(move |j| (i, j)))
        .map(|(i, j)| element(&ctx, level, &[i, j]))
        .collect();
    let id = GroupElement::identity(&ctx, level);
    for a in (0..91).map(|j| Fraction::from_index(j, 91)) {
        assert_eq!(id.act(&ctx, &a).unwrap(), a);
        for g in &elems {
            for h in &elems {
                assert_eq!(g.mul(&ctx, h).act(&ctx, &a).unwrap(), g.act(&ctx, &h.act(&ctx, &a).unwrap()).unwrap());
            }
        }
    }
}

#[test]
fn embeddings_compose_for_every_chain_of_divisors() {
    let ctx = pool3();
    let top = ctx.full_level();
    for r in top.divisors(&ctx) {
        for t in r.divisors(&ctx) {
            for s in t.divisors(&ctx) {
                assert!(embedding_transitivity(s.value(), t.value(), r.value()));
            }
        }
    }
}

#[test]
fn verdicts_do_not_depend_on_the_generators() {
    // Two generator choices per prime, every combination.
    for s7 in generators(7).into_iter().take(2) {
        for s13 in generators(13).into_iter().take(2) {
            let roots = BTreeMap::from([(7, s7), (13, s13)]);
            let ctx = Context::new(3, &[7, 13], &roots).unwrap();
            let engine = Engine::new(ctx.clone());
            for r in ctx.all_levels(2) {
                assert!(h0_dimension_check(&engine, r).unwrap().passed());
                assert!(recursion_check_universal(&engine, r).unwrap().passed());
                assert!(iterated_recursion_check(&engine, r).unwrap().passed());
                assert!(canonical_basis_check(&engine, r).unwrap().passed());
                assert!(relations_stable_check(&engine, r).unwrap().passed());
                for l in r.primes(&ctx) {
                    assert!(reduction_sequence_check(&engine, r, l).unwrap().passed());
                    assert!(i_ell_check(&engine, r, l).unwrap().passed());
                }
            }
        }
    }
}

#[test]
fn second_pool_u_structure_and_i_ell() {
    let ctx = Context::with_default_roots(5, &[11, 31]).unwrap();
    let engine = Engine::new(ctx.clone());
    for r in ctx.all_levels(2) {
        assert!(engine.u(r).structure_check(&ctx).passed());
        for l in r.primes(&ctx) {
            assert!(i_ell_check(&engine, r, l).unwrap().passed());
        }
    }
}

fn window_symbol(w: &KWindow, g: u32, e: [u64; 2], num: u64) -> KSymbol {
    // Pool indices 0 and 1 hold 7 and 13.
    let gv = [7u64, 13].iter().enumerate().filter(|(i, _)| g >> i & 1 == 1).map(|(_, p)| p).product::<u64>();
    let x = KSymbol { g, h: e[0] | e[1] << 4, num: (num % (91 / gv)) * gv };
    assert!(w.contains(&x));
    x
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn act_composes(i in 0u64..18, j in 0u64..18, k in 0u64..18, i2 in 0u64..18, j2 in 0u64..18, k2 in 0u64..18, a in 0u64..1729) {
        let ctx = pool3();
        let level = ctx.full_level();
        let g = element(&ctx, level, &[i % 6, j % 12, k]);
        let h = element(&ctx, level, &[i2 % 6, j2 % 12, k2]);
        let a = Fraction::from_index(a, 1729);
        prop_assert_eq!(g.mul(&ctx, &h).act(&ctx, &a).unwrap(), g.act(&ctx, &h.act(&ctx, &a).unwrap()).unwrap());
    }

    #[test]
    fn frobenius_commutes(which in 0usize..3, e1 in 0u64..18, e2 in 0u64..18, a in 0u64..1729) {
        let ctx = pool3();
        let l = ctx.primes()[which];
        let others: Vec<u64> = ctx.primes().iter().copied().filter(|&p| p != l).collect();
        let level = ctx.level(&others).unwrap();
        let r = level.value();
        let f = frobenius(&ctx, l, level).unwrap();
        let g = element(&ctx, level, &[e1 % (others[0] - 1), e2 % (others[1] - 1)]);
        prop_assert_eq!(f.mul(&ctx, &g), g.mul(&ctx, &f));
        let a = Fraction::from_index(a % r, r);
        prop_assert_eq!(f.act(&ctx, &a).unwrap(), Fraction::from_index(a.index_at(r).unwrap() * l % r, r));
    }

    #[test]
    fn norm_identity_for_any_generator(k7 in 0usize..2, k13 in 0usize..4, k19 in 0usize..6) {
        let roots = BTreeMap::from([(7, generators(7)[k7]), (13, generators(13)[k13]), (19, generators(19)[k19])]);
        let ctx = Context::new(3, &[7, 13, 19], &roots).unwrap();
        for &l in ctx.primes() {
            prop_assert!(norm_identity_check(&ctx, l).unwrap());
        }
    }

    #[test]
    fn wide_window_identities(g in 0u32..4, e0 in 0u64..4, e1 in 0u64..3, num in 0u64..91, s7 in 0usize..2) {
        let roots = BTreeMap::from([(7, generators(7)[s7]), (13, 2)]);
        let ctx = Context::new(3, &[7, 13], &roots).unwrap();
        let level = ctx.level_of(91).unwrap();
        let w = KWindow::build(&ctx, level, 9).unwrap();
        let x = window_symbol(&w, g, [e0, e1], num);
        let one = vec![(x, 1)];
        prop_assert!(w.total(&w.total(&one)).is_empty());
        for p in 0..2 {
            for q in 0..2 {
                let mut c = w.apply_word(&[KOp::D(p), KOp::Delta(q)], &one);
                c.extend(w.apply_word(&[KOp::Delta(q), KOp::D(p)], &one));
                normalize(&mut c);
                prop_assert!(c.is_empty());
            }
            let mut c = w.apply_word(&[KOp::Delta(p), KOp::Shift(p)], &one);
            c.extend(w.apply_word(&[KOp::Shift(p), KOp::Delta(p)], &one).into_iter().map(|(s, v)| (s, -v)));
            normalize(&mut c);
            prop_assert!(is_zero_mod(&c, 3));
        }
        let twice = w.apply_word(&[KOp::Eps, KOp::Eps], &one);
        prop_assert_eq!(twice, one);
    }
}
