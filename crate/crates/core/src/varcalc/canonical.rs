use super::principal::principal_form;
use super::{
    euler_lagrange, homotopy_operator, vainberg_tonti, Lagrangian, LepageKind, LepageResult,
    Provenance, SourceForm,
};
use crate::forms::{BasisOneForm, DiffForm};
use crate::jet::calculus::partial_var;
use crate::jet::{MultiIndex, ScalarExpr, Var, Q};
use crate::JetError;

/// Pieces of `λ = λ_VT + h dα` together with the principal form they come
/// from.
#[derive(Clone, Debug)]
pub struct CanonicalSplit {
    /// `Θ_λ`.
    pub theta: DiffForm,
    /// `𝓔_λ`.
    pub euler_lagrange: SourceForm,
    /// `λ_VT = I𝓔_λ`.
    pub lagrangian_vt: Lagrangian,
    /// `IΘ_λ`; the exact piece below differs from its differential only by a
    /// form on the base.
    pub alpha: DiffForm,
    /// `dα = dIΘ_λ + 0*Θ_λ`.
    pub d_alpha: DiffForm,
}

impl CanonicalSplit {
    /// `λ_VT + h dα`, which reproduces `λ`.
    pub fn reassembled(&self) -> Lagrangian {
        let h = Lagrangian::new(
            self.lagrangian_vt.chart(),
            self.d_alpha.horizontal().volume_coefficient(),
        );
        self.lagrangian_vt.add(&h)
    }
}

pub fn canonical_split(lagrangian: &Lagrangian) -> Result<CanonicalSplit, JetError> {
    let theta = principal_form(lagrangian)?;
    let el = euler_lagrange(lagrangian)?;
    let lagrangian_vt = vainberg_tonti(&el)?.with_order(el.order());
    let alpha = homotopy_operator(&theta)?;
    let base_part = theta.pullback_zero_section()?;
    let d_alpha = alpha.d()?.add(&base_part);
    Ok(CanonicalSplit {
        theta,
        euler_lagrange: el,
        lagrangian_vt,
        alpha,
        d_alpha,
    })
}

/// Canonical Lepage equivalent `Φ_λ = Θ_{λ_VT} + dα`.
pub fn canonical_lepage(lagrangian: &Lagrangian) -> Result<LepageResult, JetError> {
    canonical_from_split(canonical_split(lagrangian)?)
}

pub(crate) fn canonical_from_split(split: CanonicalSplit) -> Result<LepageResult, JetError> {
    let theta_vt = principal_form(&split.lagrangian_vt)?;
    let form = theta_vt.add(&split.d_alpha);
    let order = form.effective_order();
    Ok(LepageResult {
        form: form.with_order(order),
        kind: LepageKind::Canonical,
        provenance: Provenance {
            lagrangian_vt: Some(split.lagrangian_vt),
            reduced_lagrangian: None,
            alpha: Some(split.alpha),
            d_alpha: Some(split.d_alpha),
        },
    })
}

/// The first-order correction `ν` with `Φ_λ = Θ_λ + p_1 dν`.
#[derive(Clone, Debug)]
pub struct NuCheck {
    /// Components `α^i` of `α = α^i ω_i`.
    pub alpha_components: Vec<ScalarExpr>,
    pub nu: DiffForm,
    pub p1_d_nu: DiffForm,
    /// `Φ_λ − Θ_λ − p_1 dν`; zero when the relation holds.
    pub residual: DiffForm,
    pub canonical: DiffForm,
    pub principal: DiffForm,
}

impl NuCheck {
    pub fn holds(&self) -> bool {
        self.residual.is_zero()
    }
}

/// Components `α^i` of a horizontal `(n-1)`-form `α^i ω_i`.
pub fn horizontal_components(alpha: &DiffForm) -> Vec<ScalarExpr> {
    let n = alpha.chart().n();
    (0..n)
        .map(|i| {
            let factors: Vec<BasisOneForm> =
                (0..n).filter(|&k| k != i).map(BasisOneForm::Dx).collect();
            let c = alpha.coefficient(&factors);
            if i % 2 == 1 {
                c.neg()
            } else {
                c
            }
        })
        .collect()
}

/// `ν = ¼ (∂α^j/∂y^σ_i − ∂α^i/∂y^σ_j) ω^σ ∧ ω_{ij}` for a first-order
/// Lagrangian, with the relation to the principal form checked.
pub fn first_order_nu(lagrangian: &Lagrangian) -> Result<NuCheck, JetError> {
    if lagrangian.order() > 1 {
        return Err(JetError::InvalidArgument(format!(
            "first-order correction needs a first-order Lagrangian (got order {})",
            lagrangian.order()
        )));
    }
    let chart = lagrangian.chart().clone();
    let n = chart.n();
    let split = canonical_split(lagrangian)?;
    let principal = split.theta.clone();
    let alpha_components = horizontal_components(&split.alpha);
    let canonical = canonical_from_split(split)?.form;
    let quarter = Q::new(1, 4);
    let mut nu = DiffForm::zero(&chart, n.saturating_sub(1), 1);
    for s in 0..chart.m() {
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let a = partial_var(
                    &chart,
                    &alpha_components[j],
                    Var::fiber(s, MultiIndex::single(i)),
                );
                let b = partial_var(
                    &chart,
                    &alpha_components[i],
                    Var::fiber(s, MultiIndex::single(j)),
                );
                let c = a.sub(&b).scale(&quarter);
                if c.is_zero() {
                    continue;
                }
                let piece = DiffForm::contact(&chart, s, MultiIndex::EMPTY)
                    .wedge(&DiffForm::omega_multi(&chart, &[i, j]))
                    .mul_scalar(&c);
                nu = nu.add(&piece);
            }
        }
    }
    let p1_d_nu = nu.d()?.contact_part(1);
    let residual = canonical.sub(&principal).sub(&p1_d_nu);
    Ok(NuCheck {
        alpha_components,
        nu,
        p1_d_nu,
        residual,
        canonical,
        principal,
    })
}
