//! Multivariate polynomial gcd over the rationals (recursive primitive PRS).

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::coeff::{big_gcd, big_lcm, Q};
use super::poly::{Monomial, Poly};
use super::var::Var;

/// Exact quotient `a / b`, or `None` when `b` does not divide `a`.
pub fn exact_div(a: &Poly, b: &Poly) -> Option<Poly> {
    if b.is_zero() {
        return None;
    }
    if let Some(c) = b.as_constant() {
        return Some(a.scale(&c.recip()));
    }
    let (lm_b, lc_b) = b.lex_leading().cloned()?;
    let mut rem = a.clone();
    let mut quot: Vec<(Monomial, Q)> = Vec::new();
    while !rem.is_zero() {
        let (lm_r, lc_r) = rem.lex_leading().cloned()?;
        let m = lm_r.div(&lm_b)?;
        let c = &lc_r / &lc_b;
        rem = rem.sub(&b.mul_monomial(&m, &c));
        quot.push((m, c));
    }
    Some(Poly::from_terms(quot))
}

fn max_var(a: &Poly, b: &Poly) -> Option<Var> {
    let va = a.vars().into_iter().next_back();
    let vb = b.vars().into_iter().next_back();
    va.max(vb)
}

/// Gcd of the coefficients of `p` viewed as a polynomial in `v`.
fn content_in(p: &Poly, v: Var) -> Poly {
    let mut g = Poly::zero();
    for (_, c) in p.coefficients_in(v) {
        g = gcd(&g, &c);
        if g.as_constant().is_some() && !g.is_zero() {
            return Poly::one();
        }
    }
    g
}

fn prim_part_in(p: &Poly, v: Var) -> Poly {
    let c = content_in(p, v);
    exact_div(p, &c).expect("content divides polynomial")
}

fn leading_coeff_in(p: &Poly, v: Var) -> (u32, Poly) {
    p.coefficients_in(v)
        .into_iter()
        .next_back()
        .unwrap_or((0, Poly::zero()))
}

/// Pseudo-remainder of `a` by `b` in the variable `v`.
fn pseudo_rem(a: &Poly, b: &Poly, v: Var) -> Poly {
    let (db, lb) = leading_coeff_in(b, v);
    let mut r = a.clone();
    loop {
        let (dr, lr) = leading_coeff_in(&r, v);
        if r.is_zero() || dr < db {
            return r;
        }
        // r <- lb * r - lr * v^(dr-db) * b
        let shift = Monomial::power(v, dr - db);
        r = lb.mul(&r).sub(&lr.mul(&b.mul_monomial(&shift, &Q::one())));
    }
}

/// Scales so that the lex-leading coefficient is one.
pub fn monic(p: &Poly) -> Poly {
    match p.lex_leading() {
        Some((_, c)) => p.scale(&c.recip()),
        None => Poly::zero(),
    }
}

/// Greatest common divisor, normalised to be monic; `gcd(0, 0) = 0`.
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return monic(b);
    }
    if b.is_zero() {
        return monic(a);
    }
    if a.as_constant().is_some() || b.as_constant().is_some() {
        return Poly::one();
    }
    if a == b {
        return monic(a);
    }
    let v = match max_var(a, b) {
        Some(v) => v,
        None => return Poly::one(),
    };
    let (da, db) = (a.degree_in(v), b.degree_in(v));
    if da == 0 {
        return gcd(a, &content_in(b, v));
    }
    if db == 0 {
        return gcd(&content_in(a, v), b);
    }
    let (ca, cb) = (content_in(a, v), content_in(b, v));
    let c = gcd(&ca, &cb);
    let pa = exact_div(a, &ca).expect("content divides");
    let pb = exact_div(b, &cb).expect("content divides");
    let (mut f, mut g) = if da >= db { (pa, pb) } else { (pb, pa) };
    loop {
        let r = pseudo_rem(&f, &g, v);
        if r.is_zero() {
            break;
        }
        if r.degree_in(v) == 0 {
            g = Poly::one();
            break;
        }
        f = g;
        g = prim_part_in(&r, v);
    }
    let g = if g.degree_in(v) == 0 {
        Poly::one()
    } else {
        prim_part_in(&g, v)
    };
    monic(&c.mul(&g))
}

/// Factor `k` such that `k * p` has coprime integer coefficients and a
/// positive lex-leading coefficient.
pub fn integer_normaliser(p: &Poly) -> Q {
    if p.is_zero() {
        return Q::one();
    }
    let mut den_lcm = BigInt::one();
    let mut num_gcd = BigInt::zero();
    for (_, c) in p.terms() {
        den_lcm = big_lcm(&den_lcm, &c.denom());
        num_gcd = big_gcd(&num_gcd, &c.numer());
    }
    let k = Q::from_big(num_rational::BigRational::new(den_lcm, num_gcd));
    let lead_negative = p
        .lex_leading()
        .map(|(_, c)| c.is_negative())
        .unwrap_or(false);
    if lead_negative {
        -k
    } else {
        k
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> Poly {
        Poly::var(Var::base(i))
    }

    #[test]
    fn exact_division_roundtrip() {
        let a = x(0).add(&x(1)).mul(&x(0).sub(&x(2)));
        let b = x(0).sub(&x(2));
        assert_eq!(exact_div(&a, &b).unwrap(), x(0).add(&x(1)));
        assert!(exact_div(&x(0), &x(1)).is_none());
    }

    #[test]
    fn gcd_recovers_common_factor() {
        let common = x(0).mul(&x(1)).add(&Poly::constant(Q::from_int(3)));
        let a = common.mul(&x(2).add(&x(0)));
        let b = common.mul(&x(2).sub(&x(1))).mul(&x(0));
        let g = gcd(&a, &b);
        assert_eq!(g, monic(&common));
    }

    #[test]
    fn gcd_of_coprime_is_one() {
        let a = x(0).pow(2).add(&Poly::one());
        let b = x(0).add(&x(1));
        assert!(gcd(&a, &b).is_one());
    }

    #[test]
    fn gcd_univariate_powers() {
        let a = x(0).pow(4).sub(&Poly::one());
        let b = x(0).pow(2).sub(&Poly::one());
        assert_eq!(gcd(&a, &b), b);
    }
}
