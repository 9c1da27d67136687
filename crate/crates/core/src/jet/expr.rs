//! Exact scalar expressions: quotients of polynomials in canonical form.

use std::fmt;

use super::coeff::Q;
use super::gcd::{exact_div, gcd, integer_normaliser};
use super::poly::Poly;
use super::var::Var;

/// Rational function `num / den` over jet coordinates, parameters, opaque
/// atoms and the homotopy parameter.
///
/// The denominator has coprime integer coefficients, a positive lex-leading
/// coefficient and no common factor with the numerator, so two expressions
/// are equal exactly when their representations are identical.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct ScalarExpr {
    num: Poly,
    den: Poly,
}

impl ScalarExpr {
    pub fn zero() -> Self {
        ScalarExpr {
            num: Poly::zero(),
            den: Poly::one(),
        }
    }

    pub fn one() -> Self {
        Self::constant(Q::one())
    }

    pub fn constant(c: Q) -> Self {
        Self::from_poly(Poly::constant(c))
    }

    pub fn int(v: i64) -> Self {
        Self::constant(Q::from_int(v))
    }

    pub fn var(v: Var) -> Self {
        Self::from_poly(Poly::var(v))
    }

    pub fn from_poly(p: Poly) -> Self {
        ScalarExpr {
            num: p,
            den: Poly::one(),
        }
    }

    /// Canonicalises `num / den`. Returns `None` if `den` is zero.
    pub fn ratio(num: Poly, den: Poly) -> Option<Self> {
        if den.is_zero() {
            return None;
        }
        if num.is_zero() {
            return Some(Self::zero());
        }
        if let Some(c) = den.as_constant() {
            return Some(Self::from_poly(num.scale(&c.recip())));
        }
        let g = gcd(&num, &den);
        let (num, den) = if g.as_constant().is_some() {
            (num, den)
        } else {
            (
                exact_div(&num, &g).expect("gcd divides numerator"),
                exact_div(&den, &g).expect("gcd divides denominator"),
            )
        };
        if let Some(c) = den.as_constant() {
            return Some(Self::from_poly(num.scale(&c.recip())));
        }
        let k = integer_normaliser(&den);
        Some(ScalarExpr {
            num: num.scale(&k),
            den: den.scale(&k),
        })
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn as_poly(&self) -> Option<&Poly> {
        self.is_polynomial().then_some(&self.num)
    }

    pub fn as_constant(&self) -> Option<Q> {
        if self.is_polynomial() {
            self.num.as_constant()
        } else {
            None
        }
    }

    /// Every variable appearing in numerator or denominator.
    pub fn vars(&self) -> std::collections::BTreeSet<Var> {
        let mut v = self.num.vars();
        v.extend(self.den.vars());
        v
    }

    pub fn contains_var_where(&self, pred: impl Fn(Var) -> bool + Copy) -> bool {
        self.num.contains_var_where(pred) || self.den.contains_var_where(pred)
    }

    /// Highest jet order among the fiber coordinates present.
    pub fn jet_order(&self) -> usize {
        self.vars().iter().map(|v| v.jet_order()).max().unwrap_or(0)
    }

    pub fn neg(&self) -> Self {
        ScalarExpr {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn scale(&self, k: &Q) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        ScalarExpr {
            num: self.num.scale(k),
            den: self.den.clone(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return other.clone();
        }
        if self.den == other.den {
            let num = self.num.add(&other.num);
            if self.den.is_one() {
                return Self::from_poly(num);
            }
            return Self::ratio(num, self.den.clone()).expect("nonzero denominator");
        }
        let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
        Self::ratio(num, self.den.mul(&other.den)).expect("nonzero denominator")
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        if self.den.is_one() && other.den.is_one() {
            return Self::from_poly(self.num.mul(&other.num));
        }
        Self::ratio(self.num.mul(&other.num), self.den.mul(&other.den))
            .expect("nonzero denominator")
    }

    pub fn mul_poly(&self, p: &Poly) -> Self {
        if self.den.is_one() {
            Self::from_poly(self.num.mul(p))
        } else {
            self.mul(&Self::from_poly(p.clone()))
        }
    }

    /// `self / other`, or `None` when `other` is zero.
    pub fn div(&self, other: &Self) -> Option<Self> {
        if other.is_zero() {
            return None;
        }
        Self::ratio(self.num.mul(&other.den), self.den.mul(&other.num))
    }

    /// Integer power; negative exponents require a nonzero base.
    pub fn pow(&self, e: i32) -> Option<Self> {
        if e >= 0 {
            let e = e as u32;
            return Some(ScalarExpr {
                num: self.num.pow(e),
                den: self.den.pow(e),
            })
            .map(|s| if s.num.is_zero() { Self::zero() } else { s });
        }
        Self::one().div(&self.pow(-e)?)
    }

    /// Explicit partial derivative in `v`, ignoring any dependence hidden in
    /// opaque atoms.
    pub fn explicit_derivative(&self, v: Var) -> Self {
        let dn = self.num.derivative(v);
        if self.den.is_one() {
            return Self::from_poly(dn);
        }
        let dd = self.den.derivative(v);
        if dd.is_zero() {
            return Self::ratio(dn, self.den.clone()).expect("nonzero denominator");
        }
        let num = dn.mul(&self.den).sub(&self.num.mul(&dd));
        Self::ratio(num, self.den.pow(2)).expect("nonzero denominator")
    }

    /// Substitutes variables by expressions; unmapped variables are kept.
    pub fn substitute(&self, f: &dyn Fn(Var) -> Option<ScalarExpr>) -> Self {
        let all_poly = self
            .vars()
            .into_iter()
            .all(|v| f(v).map(|e| e.is_polynomial()).unwrap_or(true));
        if all_poly {
            let g = |v: Var| f(v).map(|e| e.num);
            let num = self.num.substitute(&g);
            if self.den.is_one() {
                return Self::from_poly(num);
            }
            let den = self.den.substitute(&g);
            return Self::ratio(num, den).unwrap_or_else(Self::zero);
        }
        let num = substitute_rational(&self.num, f);
        let den = substitute_rational(&self.den, f);
        num.div(&den).unwrap_or_else(Self::zero)
    }

    /// Maps every numerator and denominator term through `f`.
    pub fn map_polys(&self, f: impl Fn(&Poly) -> Poly) -> Self {
        let num = f(&self.num);
        if self.den.is_one() {
            return Self::from_poly(num);
        }
        Self::ratio(num, f(&self.den)).unwrap_or_else(Self::zero)
    }

    /// Numeric evaluation.
    pub fn eval_with<T, F>(
        &self,
        value: &mut F,
        from_q: &dyn Fn(&Q) -> T,
    ) -> Result<T, crate::JetError>
    where
        T: Clone
            + std::ops::Add<Output = T>
            + std::ops::Mul<Output = T>
            + std::ops::Div<Output = T>
            + PartialEq,
        F: FnMut(Var) -> Result<T, crate::JetError>,
    {
        let n = self.num.eval_with(value, from_q)?;
        if self.den.is_one() {
            return Ok(n);
        }
        let d = self.den.eval_with(value, from_q)?;
        if d == from_q(&Q::zero()) {
            return Err(crate::JetError::DivisionByZero);
        }
        Ok(n / d)
    }
}

fn substitute_rational(p: &Poly, f: &dyn Fn(Var) -> Option<ScalarExpr>) -> ScalarExpr {
    let mut acc = ScalarExpr::zero();
    for (m, c) in p.terms() {
        let mut t = ScalarExpr::constant(c.clone());
        for &(v, e) in m.factors() {
            let base = f(v).unwrap_or_else(|| ScalarExpr::var(v));
            t = t.mul(&base.pow(e as i32).expect("nonnegative power"));
        }
        acc = acc.add(&t);
    }
    acc
}

impl From<Q> for ScalarExpr {
    fn from(c: Q) -> Self {
        ScalarExpr::constant(c)
    }
}

impl From<Poly> for ScalarExpr {
    fn from(p: Poly) -> Self {
        ScalarExpr::from_poly(p)
    }
}

impl fmt::Debug for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{:?}", self.num)
        } else {
            write!(f, "({:?})/({:?})", self.num, self.den)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> ScalarExpr {
        ScalarExpr::var(Var::base(i))
    }

    #[test]
    fn quotient_cancels_common_factors() {
        let a = x(0).mul(&x(1)).add(&x(1));
        let b = x(1).mul(&x(1));
        let q = a.div(&b).unwrap();
        let expected = x(0).add(&ScalarExpr::one()).div(&x(1)).unwrap();
        assert_eq!(q, expected);
    }

    #[test]
    fn sum_of_fractions_is_canonical() {
        // 1/x + 1/y == (x + y)/(x y)
        let lhs = ScalarExpr::one()
            .div(&x(0))
            .unwrap()
            .add(&ScalarExpr::one().div(&x(1)).unwrap());
        let rhs = x(0).add(&x(1)).div(&x(0).mul(&x(1))).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn denominator_sign_is_fixed() {
        let a = ScalarExpr::one().div(&x(0).neg()).unwrap();
        let b = ScalarExpr::one().div(&x(0)).unwrap().neg();
        assert_eq!(a, b);
        assert!(!a.den().lex_leading().unwrap().1.is_negative());
    }

    #[test]
    fn quotient_rule() {
        let e = ScalarExpr::one().div(&x(0)).unwrap();
        let d = e.explicit_derivative(Var::base(0));
        assert_eq!(d, ScalarExpr::int(-1).div(&x(0).mul(&x(0))).unwrap());
    }
}
