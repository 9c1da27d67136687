use super::LepageResult;
use crate::forms::{interior_product, DiffForm, VectorFieldSpec};
use crate::JetError;

/// Noether current `h i_{JΞ} θ` of a Lepage form.
pub fn noether_current(
    theta: &LepageResult,
    field: &VectorFieldSpec,
) -> Result<DiffForm, JetError> {
    let r = theta.form.max_contact_index().unwrap_or(0);
    let prolonged = field.prolong(r)?;
    Ok(interior_product(&prolonged, &theta.form)?.horizontal())
}
