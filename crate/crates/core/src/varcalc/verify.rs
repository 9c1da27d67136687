use super::{euler_lagrange, Lagrangian, SourceForm};
use crate::forms::{BasisOneForm, DiffForm};
use crate::jet::{MultiIndex, ScalarExpr};
use crate::JetError;

/// Result of checking the two Lepage conditions for an `n`-form.
#[derive(Clone, Debug)]
pub struct LepageReport {
    /// `hθ − λ`.
    pub horizontal_residual: DiffForm,
    /// `p_1 dθ`.
    pub one_contact_differential: DiffForm,
    /// Coefficients of `ω^σ ∧ ω_0` in `p_1 dθ`.
    pub extracted: SourceForm,
    /// Terms of `p_1 dθ` carrying `ω^σ_J` with `|J| > 0`.
    pub non_source_part: DiffForm,
    pub euler_lagrange: SourceForm,
    /// Extracted source form minus `𝓔_λ`.
    pub source_residual: SourceForm,
    /// Contact degrees present in `θ`.
    pub contact_degrees: Vec<usize>,
}

impl LepageReport {
    pub fn horizontal_ok(&self) -> bool {
        self.horizontal_residual.is_zero()
    }

    pub fn source_form_ok(&self) -> bool {
        self.non_source_part.is_zero()
    }

    pub fn matches_euler_lagrange(&self) -> bool {
        self.source_residual.is_zero()
    }

    pub fn passed(&self) -> bool {
        self.horizontal_ok() && self.source_form_ok() && self.matches_euler_lagrange()
    }
}

/// Splits a 1-contact `(n+1)`-form into its `ω^σ ∧ ω_0` coefficients and
/// the remaining terms.
pub fn extract_source_form(form: &DiffForm) -> (SourceForm, DiffForm) {
    let chart = form.chart();
    let n = chart.n();
    let mut components = vec![ScalarExpr::zero(); chart.m()];
    let mut rest = DiffForm::zero(chart, form.degree(), form.order());
    for (m, c) in form.terms() {
        let contact = m.contact_factors();
        let source = match contact.as_slice() {
            [BasisOneForm::Contact(s, j)] if j.is_empty() && m.dx_indices().len() == n => Some(*s),
            _ => None,
        };
        match source {
            Some(s) => {
                let mut factors = vec![BasisOneForm::Contact(s, MultiIndex::EMPTY)];
                factors.extend((0..n).map(BasisOneForm::Dx));
                components[s] = form.coefficient(&factors);
            }
            None => rest.add_term(m.clone(), c.clone()),
        }
    }
    let source = SourceForm::new(chart, components).expect("one component per field");
    (source, rest)
}

/// Checks `hθ = λ` and that `p_1 dθ` is a source form equal to `𝓔_λ`.
pub fn verify_lepage_conditions(
    theta: &DiffForm,
    lagrangian: &Lagrangian,
) -> Result<LepageReport, JetError> {
    let n = lagrangian.chart().n();
    if theta.degree() != n {
        return Err(JetError::InvalidArgument(format!(
            "a Lepage form has degree {n}, got {}",
            theta.degree()
        )));
    }
    let horizontal_residual = theta.horizontal().sub(&lagrangian.form());
    let one_contact_differential = theta.d()?.contact_part(1);
    let (extracted, non_source_part) = extract_source_form(&one_contact_differential);
    let el = euler_lagrange(lagrangian)?;
    let source_residual = extracted.sub(&el);
    Ok(LepageReport {
        horizontal_residual,
        one_contact_differential,
        extracted,
        non_source_part,
        euler_lagrange: el,
        source_residual,
        contact_degrees: theta.contact_degrees(),
    })
}
