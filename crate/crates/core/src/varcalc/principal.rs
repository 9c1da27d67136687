use std::collections::{BTreeMap, HashMap};

use super::{Lagrangian, LepageKind, LepageResult, Provenance};
use crate::forms::DiffForm;
use crate::jet::calculus::{coordinate_dependencies, partial_var};
use crate::jet::{total_derivative, ChartSpec, FieldId, MultiIndex, ScalarExpr};
use crate::JetError;

/// `d_P f` for every requested `P`, sharing prefixes.
fn derivatives_along(
    chart: &ChartSpec,
    f: &ScalarExpr,
    cache: &mut HashMap<MultiIndex, ScalarExpr>,
    p: &MultiIndex,
) -> Result<ScalarExpr, JetError> {
    if let Some(v) = cache.get(p) {
        return Ok(v.clone());
    }
    let value = if p.is_empty() {
        f.clone()
    } else {
        let last = *p.entries().last().expect("nonempty") as usize;
        let parent = p.without(last).expect("contains last");
        let inner = derivatives_along(chart, f, cache, &parent)?;
        if inner.is_zero() {
            inner
        } else {
            total_derivative(chart, &inner, last)?
        }
    };
    cache.insert(*p, value.clone());
    Ok(value)
}

/// Coefficients `C^{σ,i}_J` of `ω^σ_J ∧ ω_i` in the principal Lepage
/// equivalent.
pub(crate) fn principal_coefficients(
    lagrangian: &Lagrangian,
) -> Result<BTreeMap<(FieldId, MultiIndex, usize), ScalarExpr>, JetError> {
    let chart = lagrangian.chart();
    let density = lagrangian.density();
    let mut coeffs: BTreeMap<(FieldId, MultiIndex, usize), ScalarExpr> = BTreeMap::new();
    for v in coordinate_dependencies(chart, density) {
        let Some((s, k)) = v.as_fiber() else { continue };
        if k.is_empty() {
            continue;
        }
        let partial = partial_var(chart, density, v);
        if partial.is_zero() {
            continue;
        }
        // tuple derivative: the symmetric partial shared among N(K) orderings
        let weighted = partial.scale(&k.permutation_count().recip());
        let mut cache = HashMap::new();
        for i in k.distinct() {
            let rest = k.without(i).expect("contains i");
            for j in rest.sub_multisets() {
                let p = rest.difference(&j).expect("sub-multiset");
                let dp = derivatives_along(chart, &weighted, &mut cache, &p)?;
                if dp.is_zero() {
                    continue;
                }
                let mut w = &j.permutation_count() * &p.permutation_count();
                if p.len() % 2 == 1 {
                    w = -w;
                }
                let e = coeffs.entry((s, j, i)).or_insert_with(ScalarExpr::zero);
                *e = e.add(&dp.scale(&w));
            }
        }
    }
    coeffs.retain(|_, c| !c.is_zero());
    Ok(coeffs)
}

/// Principal Lepage equivalent `Θ_λ = 𝓛ω_0 + Σ C^{σ,i}_J ω^σ_J ∧ ω_i`.
pub fn principal_lepage(lagrangian: &Lagrangian) -> Result<LepageResult, JetError> {
    let form = principal_form(lagrangian)?;
    Ok(LepageResult {
        form,
        kind: LepageKind::Principal,
        provenance: Provenance::default(),
    })
}

pub(crate) fn principal_form(lagrangian: &Lagrangian) -> Result<DiffForm, JetError> {
    let chart = lagrangian.chart();
    let mut form = lagrangian.form();
    for ((s, j, i), c) in principal_coefficients(lagrangian)? {
        let piece = DiffForm::contact(chart, s, j)
            .wedge(&DiffForm::omega_i(chart, i))
            .mul_scalar(&c);
        form = form.add(&piece);
    }
    let r = lagrangian.order();
    let order = form.effective_order();
    let bound = if r == 0 {
        0
    } else if lagrangian.affine_in_top_order() {
        2 * r - 2
    } else {
        2 * r - 1
    };
    debug_assert!(
        order <= bound,
        "principal Lepage order {order} exceeds {bound}"
    );
    Ok(form.with_order(order))
}
