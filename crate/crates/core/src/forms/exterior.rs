use std::collections::BTreeMap;

use super::{BasisOneForm, DiffForm, FormMonomial};
use crate::jet::calculus::{coordinate_dependencies, partial_var};
use crate::jet::{ChartSpec, Monomial, Poly, ScalarExpr, Var, VarKind, Q};
use crate::JetError;

fn overflow(chart: &ChartSpec, v: Var) -> JetError {
    JetError::OrderOverflow {
        coordinate: chart.var_name(v),
        max: chart.max_order(),
    }
}

fn raised(
    chart: &ChartSpec,
    field: usize,
    j: &crate::jet::MultiIndex,
    i: usize,
) -> Result<Var, JetError> {
    let v = Var::fiber(field, *j);
    if j.len() >= chart.max_order() {
        return Err(overflow(chart, v));
    }
    Ok(Var::fiber(
        field,
        j.with(i).ok_or_else(|| overflow(chart, v))?,
    ))
}

/// `df` as a list of `(one-form, coefficient)` pairs.
pub(crate) fn differential(
    chart: &ChartSpec,
    f: &ScalarExpr,
) -> Result<Vec<(BasisOneForm, ScalarExpr)>, JetError> {
    let n = chart.n();
    let mut dx: Vec<ScalarExpr> = vec![ScalarExpr::zero(); n];
    let mut out = Vec::new();
    if f.is_polynomial() && !f.contains_var_where(|v| v.is_atom()) {
        // one pass over the terms for all partials
        let mut partials: BTreeMap<Var, Vec<(Monomial, Q)>> = BTreeMap::new();
        for (m, c) in f.num().terms() {
            for &(v, e) in m.factors() {
                if v.is_base() || v.is_fiber() {
                    let (_, rest) = m.derivative(v).expect("factor present");
                    partials
                        .entry(v)
                        .or_default()
                        .push((rest, c * &Q::from_int(e as i64)));
                }
            }
        }
        let mut dx_terms: Vec<Vec<(Monomial, Q)>> = vec![Vec::new(); n];
        for (v, terms) in partials {
            match v.kind() {
                VarKind::Base(i) => dx_terms[i].extend(terms),
                VarKind::Fiber(s, j) => {
                    let p = Poly::from_terms(terms.iter().cloned());
                    if p.is_zero() {
                        continue;
                    }
                    for (i, slot) in dx_terms.iter_mut().enumerate() {
                        let w = Monomial::var(raised(chart, s, &j, i)?);
                        slot.extend(p.terms().iter().map(|(m, c)| (m.mul(&w), c.clone())));
                    }
                    out.push((BasisOneForm::Contact(s, j), ScalarExpr::from_poly(p)));
                }
                _ => {}
            }
        }
        for (i, terms) in dx_terms.into_iter().enumerate() {
            dx[i] = ScalarExpr::from_poly(Poly::from_terms(terms));
        }
    } else {
        for v in coordinate_dependencies(chart, f) {
            let p = partial_var(chart, f, v);
            if p.is_zero() {
                continue;
            }
            match v.kind() {
                VarKind::Base(i) => dx[i] = dx[i].add(&p),
                VarKind::Fiber(s, j) => {
                    for (i, slot) in dx.iter_mut().enumerate() {
                        *slot = slot.add(&p.mul(&ScalarExpr::var(raised(chart, s, &j, i)?)));
                    }
                    out.push((BasisOneForm::Contact(s, j), p));
                }
                _ => {}
            }
        }
    }
    for (i, c) in dx.into_iter().enumerate() {
        if !c.is_zero() {
            out.push((BasisOneForm::Dx(i), c));
        }
    }
    Ok(out)
}

impl DiffForm {
    /// Exterior derivative; the ambient order grows by one.
    pub fn d(&self) -> Result<DiffForm, JetError> {
        let chart = self.chart.clone();
        let n = chart.n();
        let mut out = DiffForm::zero(&chart, self.degree + 1, self.order + 1);
        for (m, c) in &self.terms {
            for (b, g) in differential(&chart, c)? {
                let single = FormMonomial::from_factors(&[b]).expect("single factor").1;
                if let Some((sign, mm)) = single.wedge(m) {
                    out.add_term(mm, if sign < 0 { g.neg() } else { g });
                }
            }
            // d ω_J = Σ_j dx^j ∧ ω_{Jj}
            for (p, f) in m.factors().iter().enumerate() {
                let BasisOneForm::Contact(s, j) = *f else {
                    continue;
                };
                for i in 0..n {
                    let k = raised(&chart, s, &j, i)?.as_fiber().expect("fiber").1;
                    let mut fs: Vec<BasisOneForm> = m.factors()[..p].to_vec();
                    fs.push(BasisOneForm::Dx(i));
                    fs.push(BasisOneForm::Contact(s, k));
                    fs.extend_from_slice(&m.factors()[p + 1..]);
                    if let Some((sign, mm)) = FormMonomial::from_factors(&fs) {
                        let neg = (sign < 0) != (p % 2 == 1);
                        out.add_term(mm, if neg { c.neg() } else { c.clone() });
                    }
                }
            }
        }
        Ok(out)
    }

    /// Rewrites into the basis of `J^s`: `dx^i`, `ω^σ_J` with `|J| < s` and
    /// `dy^σ_J` with `|J| = s`. Requires `s` to bound every contact index.
    pub fn to_order_basis(&self, s: usize) -> Vec<(Vec<BasisOneForm>, ScalarExpr)> {
        let n = self.chart.n();
        let mut acc: BTreeMap<FormMonomial, ScalarExpr> = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut partial: Vec<(Vec<BasisOneForm>, ScalarExpr)> = vec![(Vec::new(), c.clone())];
            for f in m.factors() {
                let options: Vec<(BasisOneForm, ScalarExpr)> = match *f {
                    BasisOneForm::Contact(sig, j) if j.len() == s => {
                        let mut o = vec![(BasisOneForm::DyTop(sig, j), ScalarExpr::one())];
                        for i in 0..n {
                            if let Some(k) = j.with(i) {
                                o.push((
                                    BasisOneForm::Dx(i),
                                    ScalarExpr::var(Var::fiber(sig, k)).neg(),
                                ));
                            }
                        }
                        o
                    }
                    other => vec![(other, ScalarExpr::one())],
                };
                let mut next = Vec::new();
                for (fs, cc) in &partial {
                    for (b, w) in &options {
                        if fs.contains(b) {
                            continue;
                        }
                        let mut g = fs.clone();
                        g.push(*b);
                        next.push((g, cc.mul(w)));
                    }
                }
                partial = next;
            }
            for (fs, cc) in partial {
                if let Some((sign, mm)) = FormMonomial::from_factors(&fs) {
                    let cc = if sign < 0 { cc.neg() } else { cc };
                    let e = acc.entry(mm).or_insert_with(ScalarExpr::zero);
                    *e = e.add(&cc);
                }
            }
        }
        acc.into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(m, c)| (m.factors().to_vec(), c))
            .collect()
    }

    /// Smallest `s` such that the form is defined on `J^s`.
    pub fn effective_order(&self) -> usize {
        let (lower, upper) = match self.max_contact_index() {
            Some(k) => (k, (k + 1).max(self.coefficient_order())),
            None => (0, self.coefficient_order()),
        };
        for s in lower..upper {
            let ok = self
                .to_order_basis(s)
                .iter()
                .all(|(_, c)| c.jet_order() <= s);
            if ok {
                return s;
            }
        }
        upper
    }
}
