//! Partial and total derivatives, fiber scaling and `t`-integration.

use std::collections::BTreeSet;

use super::chart::ChartSpec;
use super::coeff::Q;
use super::expr::ScalarExpr;
use super::multi_index::MultiIndex;
use super::poly::{Monomial, Poly};
use super::var::{JetCoordinate, Var, VarKind};
use crate::JetError;

/// Formal partial derivative `∂e/∂c`, each sorted multi-index being one
/// independent variable. Dependence through opaque atoms is followed by the
/// chain rule.
pub fn partial_derivative(
    chart: &ChartSpec,
    e: &ScalarExpr,
    c: JetCoordinate,
) -> Result<ScalarExpr, JetError> {
    chart.validate_coordinate(c).map_err(|err| match err {
        JetError::OrderOverflow { .. } => err,
        _ => JetError::UnknownCoordinate(format!("{c:?}")),
    })?;
    Ok(partial_var(chart, e, Var::from(c)))
}

/// Partial derivative with respect to any variable, atoms included.
pub(crate) fn partial_var(chart: &ChartSpec, e: &ScalarExpr, v: Var) -> ScalarExpr {
    let mut out = e.explicit_derivative(v);
    if v.is_atom() || v.is_param() || v.is_t() {
        return out;
    }
    for a in e.vars().into_iter().filter(|a| a.is_atom()) {
        let sym = match a.atom_symbol().and_then(|s| chart.symbol(s)) {
            Some(s) => s,
            None => continue,
        };
        let idx = a.atom_indices();
        if !sym.rule.dependencies(&idx).contains(&v) {
            continue;
        }
        let inner = sym.rule.derivative(&idx, v);
        if inner.is_zero() {
            continue;
        }
        out = out.add(&e.explicit_derivative(a).mul(&inner));
    }
    out
}

/// Jet coordinates an expression depends on, including through atoms.
pub fn coordinate_dependencies(chart: &ChartSpec, e: &ScalarExpr) -> BTreeSet<Var> {
    let mut out = BTreeSet::new();
    for v in e.vars() {
        if v.is_base() || v.is_fiber() {
            out.insert(v);
        } else if let Some(sym) = v.atom_symbol().and_then(|s| chart.symbol(s)) {
            out.extend(sym.rule.dependencies(&v.atom_indices()));
        }
    }
    out
}

fn raise(chart: &ChartSpec, v: Var, i: usize) -> Result<Var, JetError> {
    let (s, j) = v.as_fiber().expect("fiber variable");
    let overflow = || JetError::OrderOverflow {
        coordinate: chart.var_name(v),
        max: chart.max_order(),
    };
    if j.len() >= chart.max_order() {
        return Err(overflow());
    }
    let k = j.with(i).ok_or_else(overflow)?;
    Ok(Var::fiber(s, k))
}

/// Total derivative of a polynomial free of opaque atoms.
fn total_derivative_poly(chart: &ChartSpec, p: &Poly, i: usize) -> Result<Poly, JetError> {
    let mut terms: Vec<(Monomial, Q)> = Vec::new();
    for (m, c) in p.terms() {
        for &(v, e) in m.factors() {
            let step = match v.kind() {
                VarKind::Base(b) if b == i => None,
                VarKind::Fiber(..) => Some(raise(chart, v, i)?),
                _ => continue,
            };
            let (_, rest) = m.derivative(v).expect("factor present");
            let coeff = c * &Q::from_int(e as i64);
            let mono = match step {
                None => rest,
                Some(w) => rest.mul(&Monomial::var(w)),
            };
            terms.push((mono, coeff));
        }
    }
    Ok(Poly::from_terms(terms))
}

/// Total derivative `d_i e`.
pub fn total_derivative(
    chart: &ChartSpec,
    e: &ScalarExpr,
    i: usize,
) -> Result<ScalarExpr, JetError> {
    if i >= chart.n() {
        return Err(JetError::UnknownCoordinate(format!("base index {i}")));
    }
    if e.is_polynomial() && !e.contains_var_where(|v| v.is_atom()) {
        return Ok(ScalarExpr::from_poly(total_derivative_poly(
            chart,
            e.num(),
            i,
        )?));
    }
    let mut out = ScalarExpr::zero();
    for c in coordinate_dependencies(chart, e) {
        let d = partial_var(chart, e, c);
        if d.is_zero() {
            continue;
        }
        match c.kind() {
            VarKind::Base(b) if b == i => out = out.add(&d),
            VarKind::Fiber(..) => out = out.add(&d.mul(&ScalarExpr::var(raise(chart, c, i)?))),
            _ => {}
        }
    }
    Ok(out)
}

/// Iterated total derivative `d_J e`.
pub fn total_derivative_multi(
    chart: &ChartSpec,
    e: &ScalarExpr,
    j: &MultiIndex,
) -> Result<ScalarExpr, JetError> {
    let mut out = e.clone();
    for i in j.iter() {
        if out.is_zero() {
            break;
        }
        out = total_derivative(chart, &out, i)?;
    }
    Ok(out)
}

fn scaling_weight(chart: &ChartSpec, m: &Monomial) -> Result<i64, JetError> {
    let mut w = 0i64;
    for &(v, e) in m.factors() {
        let per = match v.kind() {
            VarKind::Fiber(..) => 1,
            VarKind::Atom(s) => {
                let sym = chart
                    .symbol(s)
                    .ok_or_else(|| JetError::UnknownCoordinate(format!("{v:?}")))?;
                sym.rule
                    .scaling_degree()
                    .ok_or_else(|| JetError::NotFiberScalable(chart.var_name(v)))?
                    as i64
            }
            _ => 0,
        };
        w += per * e as i64;
    }
    Ok(w)
}

/// Multiplies each term by `t^weight`, shifted so all powers are
/// non-negative; returns the shift.
fn scale_poly(chart: &ChartSpec, p: &Poly) -> Result<(Poly, i64), JetError> {
    let weights: Vec<i64> = p
        .terms()
        .iter()
        .map(|(m, _)| scaling_weight(chart, m))
        .collect::<Result<_, _>>()?;
    let low = weights.iter().copied().min().unwrap_or(0).min(0);
    let t = Var::homotopy_t();
    let out = Poly::from_terms(
        p.terms()
            .iter()
            .zip(&weights)
            .map(|((m, c), &w)| (m.mul(&Monomial::power(t, (w - low) as u32)), c.clone())),
    );
    Ok((out, low))
}

/// Pullback by the fiber scaling `y^σ_J -> t y^σ_J`.
pub fn fiber_scale(chart: &ChartSpec, e: &ScalarExpr) -> Result<ScalarExpr, JetError> {
    let (num, a) = scale_poly(chart, e.num())?;
    if e.is_polynomial() && a == 0 {
        return Ok(ScalarExpr::from_poly(num));
    }
    let (den, b) = scale_poly(chart, e.den())?;
    let shift = a - b;
    let t = Var::homotopy_t();
    let (num, den) = if shift >= 0 {
        (
            num.mul_monomial(&Monomial::power(t, shift as u32), &Q::one()),
            den,
        )
    } else {
        (
            num,
            den.mul_monomial(&Monomial::power(t, (-shift) as u32), &Q::one()),
        )
    };
    Ok(ScalarExpr::ratio(num, den).expect("nonzero denominator"))
}

/// Exact integral over `t ∈ [0, 1]` of an expression polynomial in `t`.
pub fn integrate_t01(e: &ScalarExpr) -> Result<ScalarExpr, JetError> {
    let t = Var::homotopy_t();
    if e.den().degree_in(t) > 0 {
        return Err(JetError::NonPolynomialT);
    }
    let num = e.num().map_terms(|m, c| {
        let (k, rest) = m.split_off(t);
        (rest, c / &Q::from_int(k as i64 + 1))
    });
    if e.is_polynomial() {
        return Ok(ScalarExpr::from_poly(num));
    }
    Ok(ScalarExpr::ratio(num, e.den().clone()).expect("nonzero denominator"))
}
