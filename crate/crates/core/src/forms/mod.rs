//! Differential forms on jet spaces in the contact basis.
//!
//! Forms are stored over the basis `dx^i`, `ω^σ_J` where
//! `ω^σ_J = dy^σ_J − y^σ_{Jj} dx^j`. Factors `dy^σ_J` supplied by callers are
//! rewritten into this basis on construction, so contact degree is a
//! per-term count and `h`, `p_k` are grading operations. The `order` field
//! records the ambient jet order; [`DiffForm::effective_order`] computes the
//! smallest order on which the form is defined.

mod exterior;
mod pullback;
mod render;
mod vector_field;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use smallvec::SmallVec;

use crate::jet::{Chart, FieldId, MultiIndex, ScalarExpr, Var, Q};

pub use render::{factor_to_string, form_to_json, form_to_latex, form_to_text};
pub use vector_field::{interior_product, lie_derivative, ProlongedField, VectorFieldSpec};

/// Basis one-forms. `DyTop` only appears transiently (input or order-basis
/// output); canonical forms hold `Dx` and `Contact` factors.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum BasisOneForm {
    Dx(usize),
    Contact(FieldId, MultiIndex),
    DyTop(FieldId, MultiIndex),
}

impl BasisOneForm {
    pub fn is_contact(&self) -> bool {
        !matches!(self, BasisOneForm::Dx(_))
    }
}

/// Strictly increasing list of basis one-forms.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FormMonomial(SmallVec<[BasisOneForm; 6]>);

impl FormMonomial {
    pub fn one() -> Self {
        FormMonomial(SmallVec::new())
    }

    /// Sorts factors, returning the permutation sign, or `None` if a factor
    /// repeats.
    pub fn from_factors(factors: &[BasisOneForm]) -> Option<(i8, FormMonomial)> {
        let mut v: SmallVec<[BasisOneForm; 6]> = factors.iter().copied().collect();
        let mut sign = 1i8;
        // insertion sort counting transpositions
        for k in 1..v.len() {
            let mut p = k;
            while p > 0 && v[p - 1] > v[p] {
                v.swap(p - 1, p);
                sign = -sign;
                p -= 1;
            }
            if p > 0 && v[p - 1] == v[p] {
                return None;
            }
        }
        Some((sign, FormMonomial(v)))
    }

    pub fn factors(&self) -> &[BasisOneForm] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn contact_degree(&self) -> usize {
        self.0.iter().filter(|f| f.is_contact()).count()
    }

    /// Wedge with sign; `None` when a factor repeats.
    pub fn wedge(&self, other: &FormMonomial) -> Option<(i8, FormMonomial)> {
        let mut sign = 1i8;
        for b in &other.0 {
            let mut greater = 0usize;
            for a in &self.0 {
                if a == b {
                    return None;
                }
                if a > b {
                    greater += 1;
                }
            }
            if greater % 2 == 1 {
                sign = -sign;
            }
        }
        let mut v: SmallVec<[BasisOneForm; 6]> =
            self.0.iter().chain(other.0.iter()).copied().collect();
        v.sort_unstable();
        Some((sign, FormMonomial(v)))
    }

    /// Base indices of the `dx` factors.
    pub fn dx_indices(&self) -> Vec<usize> {
        self.0
            .iter()
            .filter_map(|f| match f {
                BasisOneForm::Dx(i) => Some(*i),
                _ => None,
            })
            .collect()
    }

    pub fn contact_factors(&self) -> Vec<BasisOneForm> {
        self.0.iter().copied().filter(|f| f.is_contact()).collect()
    }
}

impl fmt::Debug for FormMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|b| match b {
                BasisOneForm::Dx(i) => format!("dx{i}"),
                BasisOneForm::Contact(s, j) => format!("w{s}[{j}]"),
                BasisOneForm::DyTop(s, j) => format!("dy{s}[{j}]"),
            })
            .collect();
        write!(f, "{}", parts.join("^"))
    }
}

/// A differential form of fixed degree.
#[derive(Clone)]
pub struct DiffForm {
    chart: Chart,
    degree: usize,
    order: usize,
    terms: BTreeMap<FormMonomial, ScalarExpr>,
}

impl PartialEq for DiffForm {
    fn eq(&self, other: &Self) -> bool {
        self.degree == other.degree && self.terms == other.terms
    }
}

impl fmt::Debug for DiffForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DiffForm(deg {}, ord {}) ", self.degree, self.order)?;
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c:?}) {m:?}")?;
        }
        Ok(())
    }
}

fn dy_expansion(field: FieldId, j: &MultiIndex, n: usize) -> Vec<(BasisOneForm, ScalarExpr)> {
    let mut out = vec![(BasisOneForm::Contact(field, *j), ScalarExpr::one())];
    for i in 0..n {
        if let Some(k) = j.with(i) {
            out.push((BasisOneForm::Dx(i), ScalarExpr::var(Var::fiber(field, k))));
        }
    }
    out
}

impl DiffForm {
    pub fn zero(chart: &Chart, degree: usize, order: usize) -> Self {
        DiffForm {
            chart: Arc::clone(chart),
            degree,
            order,
            terms: BTreeMap::new(),
        }
    }

    /// Builds a form from arbitrary factor lists; factors are sorted with
    /// sign and `dy` factors are expanded into the contact basis.
    pub fn from_terms<I>(chart: &Chart, degree: usize, order: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<BasisOneForm>, ScalarExpr)>,
    {
        let mut out = Self::zero(chart, degree, order);
        for (factors, c) in terms {
            assert_eq!(factors.len(), degree, "factor count does not match degree");
            out.add_factors(&factors, c);
        }
        out
    }

    fn add_factors(&mut self, factors: &[BasisOneForm], c: ScalarExpr) {
        if c.is_zero() {
            return;
        }
        if let Some(pos) = factors
            .iter()
            .position(|f| matches!(f, BasisOneForm::DyTop(..)))
        {
            let BasisOneForm::DyTop(s, j) = factors[pos] else {
                unreachable!()
            };
            for (b, w) in dy_expansion(s, &j, self.chart.n()) {
                let mut fs = factors.to_vec();
                fs[pos] = b;
                self.add_factors(&fs, c.mul(&w));
            }
            return;
        }
        if let Some((sign, m)) = FormMonomial::from_factors(factors) {
            let c = if sign < 0 { c.neg() } else { c };
            self.add_term(m, c);
        }
    }

    /// Adds `c` to the coefficient of an already-canonical monomial.
    pub(crate) fn add_term(&mut self, m: FormMonomial, c: ScalarExpr) {
        if c.is_zero() {
            return;
        }
        debug_assert_eq!(m.degree(), self.degree);
        match self.terms.get_mut(&m) {
            Some(e) => {
                *e = e.add(&c);
                if e.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    /// Function as a 0-form.
    pub fn scalar(chart: &Chart, f: ScalarExpr) -> Self {
        let order = f.jet_order();
        let mut out = Self::zero(chart, 0, order);
        out.add_term(FormMonomial::one(), f);
        out
    }

    fn single(chart: &Chart, b: BasisOneForm, order: usize) -> Self {
        Self::from_terms(chart, 1, order, [(vec![b], ScalarExpr::one())])
    }

    pub fn dx(chart: &Chart, i: usize) -> Self {
        Self::single(chart, BasisOneForm::Dx(i), 0)
    }

    /// Contact form `ω^σ_J`.
    pub fn contact(chart: &Chart, field: FieldId, j: MultiIndex) -> Self {
        Self::single(chart, BasisOneForm::Contact(field, j), j.len() + 1)
    }

    /// `dy^σ_J`, expressed in the contact basis.
    pub fn dy(chart: &Chart, field: FieldId, j: MultiIndex) -> Self {
        Self::single(chart, BasisOneForm::DyTop(field, j), j.len())
    }

    /// Volume form `dx^0 ∧ ... ∧ dx^{n-1}`.
    pub fn volume(chart: &Chart) -> Self {
        let n = chart.n();
        Self::from_terms(
            chart,
            n,
            0,
            [((0..n).map(BasisOneForm::Dx).collect(), ScalarExpr::one())],
        )
    }

    /// `ω_{i1...ik} = i_{∂ik} ... i_{∂i1} ω_0`.
    pub fn omega_multi(chart: &Chart, indices: &[usize]) -> Self {
        let mut out = Self::volume(chart);
        for &i in indices {
            out = out.contract_dx(i);
        }
        out
    }

    /// `ω_i = i_{∂i} ω_0`.
    pub fn omega_i(chart: &Chart, i: usize) -> Self {
        Self::omega_multi(chart, &[i])
    }

    /// Contraction with the coordinate field `∂/∂x^i` (contact factors are
    /// annihilated).
    pub fn contract_dx(&self, i: usize) -> Self {
        let mut out = Self::zero(&self.chart, self.degree.saturating_sub(1), self.order);
        for (m, c) in &self.terms {
            for (p, f) in m.factors().iter().enumerate() {
                if *f == BasisOneForm::Dx(i) {
                    let mut fs: Vec<BasisOneForm> = m.factors().to_vec();
                    fs.remove(p);
                    let c = if p % 2 == 1 { c.neg() } else { c.clone() };
                    out.add_term(FormMonomial(fs.into_iter().collect()), c);
                }
            }
        }
        out
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Ambient jet order.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn with_order(mut self, order: usize) -> Self {
        self.order = order;
        self
    }

    pub fn terms(&self) -> impl Iterator<Item = (&FormMonomial, &ScalarExpr)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of a monomial given as (unsorted) factors, sign included.
    pub fn coefficient(&self, factors: &[BasisOneForm]) -> ScalarExpr {
        match FormMonomial::from_factors(factors) {
            Some((sign, m)) => {
                let c = self.terms.get(&m).cloned().unwrap_or_else(ScalarExpr::zero);
                if sign < 0 {
                    c.neg()
                } else {
                    c
                }
            }
            None => ScalarExpr::zero(),
        }
    }

    /// Coefficient of a horizontal top form: `f` in `f ω_0`.
    pub fn volume_coefficient(&self) -> ScalarExpr {
        let n = self.chart.n();
        self.coefficient(&(0..n).map(BasisOneForm::Dx).collect::<Vec<_>>())
    }

    fn check_compatible(&self, other: &DiffForm) {
        assert_eq!(
            self.degree, other.degree,
            "adding forms of different degree"
        );
    }

    pub fn add(&self, other: &DiffForm) -> DiffForm {
        self.check_compatible(other);
        let mut out = self.clone();
        out.order = self.order.max(other.order);
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &DiffForm) -> DiffForm {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> DiffForm {
        self.map_coefficients_unchecked(|c| c.neg())
    }

    pub fn scale(&self, k: &Q) -> DiffForm {
        self.map_coefficients_unchecked(|c| c.scale(k))
    }

    /// Multiplies every coefficient by a function.
    pub fn mul_scalar(&self, f: &ScalarExpr) -> DiffForm {
        let mut out = self.map_coefficients_unchecked(|c| c.mul(f));
        out.order = out.order.max(f.jet_order());
        out
    }

    fn map_coefficients_unchecked(&self, f: impl Fn(&ScalarExpr) -> ScalarExpr) -> DiffForm {
        let mut out = Self::zero(&self.chart, self.degree, self.order);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    /// Applies a fallible map to every coefficient.
    pub fn try_map_coefficients<E>(
        &self,
        f: impl Fn(&ScalarExpr) -> Result<ScalarExpr, E>,
    ) -> Result<DiffForm, E> {
        let mut out = Self::zero(&self.chart, self.degree, self.order);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c)?);
        }
        Ok(out)
    }

    pub fn wedge(&self, other: &DiffForm) -> DiffForm {
        let mut out = Self::zero(
            &self.chart,
            self.degree + other.degree,
            self.order.max(other.order),
        );
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if let Some((sign, m)) = ma.wedge(mb) {
                    let c = ca.mul(cb);
                    out.add_term(m, if sign < 0 { c.neg() } else { c });
                }
            }
        }
        out
    }

    /// Terms with exactly `k` contact factors.
    pub fn contact_part(&self, k: usize) -> DiffForm {
        let mut out = Self::zero(&self.chart, self.degree, self.order + 1);
        for (m, c) in &self.terms {
            if m.contact_degree() == k {
                out.add_term(m.clone(), c.clone());
            }
        }
        out
    }

    /// Horizontal part `hρ`.
    pub fn horizontal(&self) -> DiffForm {
        self.contact_part(0)
    }

    /// `[p_0 ρ, p_1 ρ, ..., p_k ρ]` with `k` the degree.
    pub fn split_contact(&self) -> Vec<DiffForm> {
        (0..=self.degree).map(|k| self.contact_part(k)).collect()
    }

    /// Largest number of contact factors in any term.
    pub fn max_contact_degree(&self) -> usize {
        self.terms
            .keys()
            .map(|m| m.contact_degree())
            .max()
            .unwrap_or(0)
    }

    /// Contact degrees present, ascending.
    pub fn contact_degrees(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.terms.keys().map(|m| m.contact_degree()).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Largest `|J|` among contact factors, if any.
    pub fn max_contact_index(&self) -> Option<usize> {
        self.terms
            .keys()
            .flat_map(|m| m.factors().iter())
            .filter_map(|f| match f {
                BasisOneForm::Contact(_, j) | BasisOneForm::DyTop(_, j) => Some(j.len()),
                _ => None,
            })
            .max()
    }

    /// Largest jet order of any coefficient.
    pub fn coefficient_order(&self) -> usize {
        self.terms
            .values()
            .map(|c| c.jet_order())
            .max()
            .unwrap_or(0)
    }

    /// Substitutes variables in every coefficient.
    pub fn substitute(&self, f: &dyn Fn(Var) -> Option<ScalarExpr>) -> DiffForm {
        self.map_coefficients_unchecked(|c| c.substitute(f))
    }

    /// The first term, for diagnostics.
    pub fn first_term(&self) -> Option<(&FormMonomial, &ScalarExpr)> {
        self.terms.iter().next()
    }
}
