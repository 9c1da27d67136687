use super::{Lagrangian, SourceForm};
use crate::forms::{BasisOneForm, DiffForm, FormMonomial};
use crate::jet::{fiber_scale, integrate_t01, MultiIndex, ScalarExpr, Var};
use crate::JetError;

/// Fibered homotopy operator `Iρ = ∫_0^1 ρ^(0)(t) dt`, where
/// `χ*ρ = dt ∧ ρ^(0) + ρ'` under `y^σ_J ↦ t y^σ_J`.
pub fn homotopy_operator(rho: &DiffForm) -> Result<DiffForm, JetError> {
    let chart = rho.chart();
    let t = ScalarExpr::var(Var::homotopy_t());
    let mut out = DiffForm::zero(chart, rho.degree().saturating_sub(1), rho.order());
    if rho.degree() == 0 {
        return Ok(out);
    }
    for (m, c) in rho.terms() {
        let k = m.contact_degree();
        if k == 0 {
            continue;
        }
        let scaled = fiber_scale(chart, c)?;
        let scaled = if k > 1 {
            scaled.mul(&t.pow(k as i32 - 1).expect("positive power"))
        } else {
            scaled
        };
        let integrated = integrate_t01(&scaled)?;
        if integrated.is_zero() {
            continue;
        }
        // χ*ω_J = t ω_J + y_J dt; pulling dt to the front past p factors
        for (p, f) in m.factors().iter().enumerate() {
            let BasisOneForm::Contact(s, j) = *f else {
                continue;
            };
            let mut coeff = integrated.mul(&ScalarExpr::var(Var::fiber(s, j)));
            if p % 2 == 1 {
                coeff = coeff.neg();
            }
            let rest: Vec<BasisOneForm> = m
                .factors()
                .iter()
                .enumerate()
                .filter(|(q, _)| *q != p)
                .map(|(_, b)| *b)
                .collect();
            out.add_term(
                FormMonomial::from_factors(&rest)
                    .expect("distinct factors")
                    .1,
                coeff,
            );
        }
    }
    Ok(out)
}

/// Vainberg–Tonti Lagrangian `𝓛 = y^σ ∫_0^1 ε_σ(x, t y) dt`.
pub fn vainberg_tonti(source: &SourceForm) -> Result<Lagrangian, JetError> {
    let chart = source.chart();
    let mut density = ScalarExpr::zero();
    for (s, e) in source.components().iter().enumerate() {
        if e.is_zero() {
            continue;
        }
        let integral = integrate_t01(&fiber_scale(chart, e)?)?;
        density = density.add(&integral.mul(&ScalarExpr::var(Var::fiber(s, MultiIndex::EMPTY))));
    }
    Ok(Lagrangian::new(chart, density))
}
