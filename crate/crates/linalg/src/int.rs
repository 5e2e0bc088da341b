//! Integer helpers on top of `num-bigint`.

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub use num_bigint::BigInt as Int;

/// Extended gcd: returns `(g, x, y)` with `g = gcd(a, b) >= 0` and `x*a + y*b = g`.
pub fn ext_gcd(a: &Int, b: &Int) -> (Int, Int, Int) {
    let (mut old_r, mut r) = (a.clone(), b.clone());
    let (mut old_s, mut s) = (Int::one(), Int::zero());
    let (mut old_t, mut t) = (Int::zero(), Int::one());
    while !r.is_zero() {
        let q = &old_r / &r;
        let next_r = &old_r - &q * &r;
        old_r = std::mem::replace(&mut r, next_r);
        let next_s = &old_s - &q * &s;
        old_s = std::mem::replace(&mut s, next_s);
        let next_t = &old_t - &q * &t;
        old_t = std::mem::replace(&mut t, next_t);
    }
    if old_r.is_negative() {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

/// Least nonnegative residue of `a` modulo `m > 0`.
pub fn modulo(a: &Int, m: &Int) -> Int {
    a.mod_floor(m)
}

pub fn is_unit(a: &Int) -> bool {
    a.abs().is_one()
}

/// Floor division, so that `a - q*b` lies in `[0, |b|)` when `b > 0`.
pub fn floor_div(a: &Int, b: &Int) -> Int {
    a.div_floor(b)
}

pub fn gcd(a: &Int, b: &Int) -> Int {
    a.gcd(b)
}
