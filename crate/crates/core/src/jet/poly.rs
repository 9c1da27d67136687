//! Sparse multivariate polynomials with exact rational coefficients.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;

use smallvec::SmallVec;

use super::coeff::Q;
use super::var::Var;

/// Power product `Π v^e`, stored sorted by variable with positive exponents.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Monomial(SmallVec<[(Var, u32); 4]>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(SmallVec::new())
    }

    pub fn var(v: Var) -> Self {
        Self::power(v, 1)
    }

    pub fn power(v: Var, e: u32) -> Self {
        let mut m = SmallVec::new();
        if e > 0 {
            m.push((v, e));
        }
        Monomial(m)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(Var, u32)] {
        &self.0
    }

    pub fn degree_in(&self, v: Var) -> u32 {
        self.0
            .binary_search_by(|(w, _)| w.cmp(&v))
            .map(|k| self.0[k].1)
            .unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = SmallVec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out: SmallVec<[(Var, u32); 4]> = SmallVec::new();
        let mut j = 0;
        for &(v, e) in self.0.iter() {
            if j < other.0.len() && other.0[j].0 == v {
                let f = other.0[j].1;
                if f > e {
                    return None;
                }
                if e > f {
                    out.push((v, e - f));
                }
                j += 1;
            } else if j < other.0.len() && other.0[j].0 < v {
                return None;
            } else {
                out.push((v, e));
            }
        }
        if j < other.0.len() {
            return None;
        }
        Some(Monomial(out))
    }

    /// Removes variable `v`, returning its exponent and the remaining factors.
    pub fn split_off(&self, v: Var) -> (u32, Monomial) {
        let mut rest = self.0.clone();
        match rest.binary_search_by(|(w, _)| w.cmp(&v)) {
            Ok(k) => {
                let e = rest.remove(k).1;
                (e, Monomial(rest))
            }
            Err(_) => (0, Monomial(rest)),
        }
    }

    /// Partial derivative of the monomial: exponent and reduced monomial.
    pub fn derivative(&self, v: Var) -> Option<(u32, Monomial)> {
        let k = self.0.binary_search_by(|(w, _)| w.cmp(&v)).ok()?;
        let mut rest = self.0.clone();
        let e = rest[k].1;
        if e == 1 {
            rest.remove(k);
        } else {
            rest[k].1 -= 1;
        }
        Some((e, Monomial(rest)))
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.0.iter().map(|(v, _)| *v)
    }

    /// Lexicographic comparison with larger variables more significant.
    pub fn lex_cmp(&self, other: &Monomial) -> Ordering {
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (a.len(), b.len());
        while i > 0 && j > 0 {
            let (va, ea) = a[i - 1];
            let (vb, eb) = b[j - 1];
            match va.cmp(&vb) {
                Ordering::Greater => return Ordering::Greater,
                Ordering::Less => return Ordering::Less,
                Ordering::Equal => match ea.cmp(&eb) {
                    Ordering::Equal => {
                        i -= 1;
                        j -= 1;
                    }
                    o => return o,
                },
            }
        }
        (i > 0).cmp(&(j > 0))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(v, e)| {
                if *e == 1 {
                    format!("{v:?}")
                } else {
                    format!("{v:?}^{e}")
                }
            })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// Multivariate polynomial; terms sorted by monomial, no zero coefficients.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: Vec<(Monomial, Q)>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Q::one())
    }

    pub fn constant(c: Q) -> Self {
        if c.is_zero() {
            Self::zero()
        } else {
            Poly {
                terms: vec![(Monomial::one(), c)],
            }
        }
    }

    pub fn var(v: Var) -> Self {
        Poly {
            terms: vec![(Monomial::var(v), Q::one())],
        }
    }

    pub fn monomial(m: Monomial, c: Q) -> Self {
        if c.is_zero() {
            Self::zero()
        } else {
            Poly {
                terms: vec![(m, c)],
            }
        }
    }

    /// Collects arbitrary terms, merging duplicates and dropping zeros.
    pub fn from_terms<I: IntoIterator<Item = (Monomial, Q)>>(terms: I) -> Self {
        let mut acc: HashMap<Monomial, Q> = HashMap::new();
        for (m, c) in terms {
            if c.is_zero() {
                continue;
            }
            match acc.get_mut(&m) {
                Some(e) => *e += &c,
                None => {
                    acc.insert(m, c);
                }
            }
        }
        let mut terms: Vec<(Monomial, Q)> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        Poly { terms }
    }

    pub fn terms(&self) -> &[(Monomial, Q)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<Q> {
        match self.terms.as_slice() {
            [] => Some(Q::zero()),
            [(m, c)] if m.is_one() => Some(c.clone()),
            _ => None,
        }
    }

    pub fn is_one(&self) -> bool {
        matches!(self.terms.as_slice(), [(m, c)] if m.is_one() && c.is_one())
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.terms.iter().flat_map(|(m, _)| m.vars()).collect()
    }

    pub fn contains_var_where(&self, pred: impl Fn(Var) -> bool) -> bool {
        self.terms.iter().any(|(m, _)| m.vars().any(&pred))
    }

    pub fn degree_in(&self, v: Var) -> u32 {
        self.terms
            .iter()
            .map(|(m, _)| m.degree_in(v))
            .max()
            .unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|(m, _)| m.total_degree())
            .max()
            .unwrap_or(0)
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }

    pub fn scale(&self, k: &Q) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let (a, b) = (&self.terms, &other.terms);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let c = &a[i].1 + &b[j].1;
                    if !c.is_zero() {
                        out.push((a[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Poly { terms: out }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        if let Some(c) = self.as_constant() {
            return other.scale(&c);
        }
        if let Some(c) = other.as_constant() {
            return self.scale(&c);
        }
        let mut acc: HashMap<Monomial, Q> = HashMap::with_capacity(self.len() * other.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = ma.mul(mb);
                let c = ca * cb;
                match acc.get_mut(&m) {
                    Some(e) => *e += &c,
                    None => {
                        acc.insert(m, c);
                    }
                }
            }
        }
        let mut terms: Vec<(Monomial, Q)> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        Poly { terms }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &Q) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly::from_terms(self.terms.iter().map(|(mm, cc)| (mm.mul(m), cc * c)))
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Explicit partial derivative with respect to `v`.
    pub fn derivative(&self, v: Var) -> Poly {
        Poly::from_terms(self.terms.iter().filter_map(|(m, c)| {
            m.derivative(v)
                .map(|(e, rest)| (rest, c * &Q::from_int(e as i64)))
        }))
    }

    /// Replaces variables by polynomials; variables mapped to `None` are kept.
    pub fn substitute(&self, f: &dyn Fn(Var) -> Option<Poly>) -> Poly {
        let mut cache: HashMap<(Var, u32), Poly> = HashMap::new();
        let mut out = Poly::zero();
        let mut pieces: Vec<Poly> = Vec::new();
        for (m, c) in &self.terms {
            let mut kept = Monomial::one();
            let mut term = Poly::constant(c.clone());
            for &(v, e) in m.factors() {
                match f(v) {
                    Some(p) => {
                        let pe = cache.entry((v, e)).or_insert_with(|| p.pow(e)).clone();
                        term = term.mul(&pe);
                    }
                    None => kept = kept.mul(&Monomial::power(v, e)),
                }
                if term.is_zero() {
                    break;
                }
            }
            if !term.is_zero() {
                pieces.push(term.mul_monomial(&kept, &Q::one()));
            }
            if pieces.len() > 64 {
                let merged = Poly::sum(pieces.drain(..));
                out = out.add(&merged);
            }
        }
        out.add(&Poly::sum(pieces))
    }

    pub fn sum<I: IntoIterator<Item = Poly>>(polys: I) -> Poly {
        Poly::from_terms(polys.into_iter().flat_map(|p| p.terms))
    }

    /// Coefficients with respect to `v`: pairs `(exponent, coefficient)`.
    pub fn coefficients_in(&self, v: Var) -> Vec<(u32, Poly)> {
        let mut by_exp: std::collections::BTreeMap<u32, Vec<(Monomial, Q)>> = Default::default();
        for (m, c) in &self.terms {
            let (e, rest) = m.split_off(v);
            by_exp.entry(e).or_default().push((rest, c.clone()));
        }
        by_exp
            .into_iter()
            .map(|(e, ts)| (e, Poly::from_terms(ts)))
            .collect()
    }

    /// Maps each monomial to a new (monomial, factor) pair.
    pub fn map_terms(&self, f: impl Fn(&Monomial, &Q) -> (Monomial, Q)) -> Poly {
        Poly::from_terms(self.terms.iter().map(|(m, c)| f(m, c)))
    }

    /// Leading term under [`Monomial::lex_cmp`].
    pub fn lex_leading(&self) -> Option<&(Monomial, Q)> {
        self.terms.iter().max_by(|a, b| a.0.lex_cmp(&b.0))
    }

    /// Evaluates with numeric values for each variable.
    pub fn eval_with<T, F>(
        &self,
        value: &mut F,
        from_q: &dyn Fn(&Q) -> T,
    ) -> Result<T, crate::JetError>
    where
        T: Clone + std::ops::Add<Output = T> + std::ops::Mul<Output = T>,
        F: FnMut(Var) -> Result<T, crate::JetError>,
    {
        let mut acc = from_q(&Q::zero());
        for (m, c) in &self.terms {
            let mut t = from_q(c);
            for &(v, e) in m.factors() {
                let x = value(v)?;
                for _ in 0..e {
                    t = t * x.clone();
                }
            }
            acc = acc + t;
        }
        Ok(acc)
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| format!("{c}*{m:?}"))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}
