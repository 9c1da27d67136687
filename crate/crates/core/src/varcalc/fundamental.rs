use super::{Lagrangian, LepageKind, LepageResult, Provenance};
use crate::forms::DiffForm;
use crate::jet::calculus::partial_var;
use crate::jet::{Chart, MultiIndex, ScalarExpr, Var, Q};
use crate::JetError;

/// Fundamental Lepage equivalent of a first-order Lagrangian,
/// `Σ_k 1/(k!)² ∂^k𝓛/∂y^{σ1}_{i1}..∂y^{σk}_{ik} ω^{σ1}∧..∧ω^{σk}∧ω_{i1..ik}`.
///
/// The tuple sum is taken over sets of pairs with increasing fields and
/// distinct base indices, which absorbs one factor of `k!`.
pub fn fundamental_lepage(lagrangian: &Lagrangian) -> Result<LepageResult, JetError> {
    if lagrangian.order() > 1 {
        return Err(JetError::FundamentalOrder(lagrangian.order()));
    }
    let chart = lagrangian.chart();
    let mut form = lagrangian.form();
    extend(
        chart,
        lagrangian.density(),
        0,
        &mut Vec::new(),
        &mut Vec::new(),
        &mut form,
    );
    let order = if form.max_contact_degree() > 0 {
        1
    } else {
        lagrangian.order()
    };
    Ok(LepageResult {
        form: form.with_order(order),
        kind: LepageKind::Fundamental,
        provenance: Provenance::default(),
    })
}

/// Adds every term extending the current pairs `(fields, indices)` by a
/// pair whose field is at least `first`.
fn extend(
    chart: &Chart,
    derivative: &ScalarExpr,
    first: usize,
    fields: &mut Vec<usize>,
    indices: &mut Vec<usize>,
    out: &mut DiffForm,
) {
    let n = chart.n();
    for s in first..chart.m() {
        for i in 0..n {
            if indices.contains(&i) {
                continue;
            }
            let next = partial_var(chart, derivative, Var::fiber(s, MultiIndex::single(i)));
            if next.is_zero() {
                continue;
            }
            fields.push(s);
            indices.push(i);
            let k = fields.len();
            let mut piece = DiffForm::omega_multi(chart, indices)
                .mul_scalar(&next.scale(&Q::factorial(k as u32).recip()));
            for &f in fields.iter().rev() {
                piece = DiffForm::contact(chart, f, MultiIndex::EMPTY).wedge(&piece);
            }
            *out = out.add(&piece);
            if k < n {
                extend(chart, &next, s + 1, fields, indices, out);
            }
            fields.pop();
            indices.pop();
        }
    }
}
