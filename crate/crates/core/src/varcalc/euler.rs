use super::{Lagrangian, SourceForm};
use crate::jet::calculus::{coordinate_dependencies, partial_var};
use crate::jet::{total_derivative_multi, ScalarExpr};
use crate::JetError;

/// Euler–Lagrange expressions `𝓔_σ = Σ_K (-1)^|K| d_K ∂𝓛/∂y^σ_K`, one term
/// per sorted multi-index `K`.
pub fn euler_lagrange(lagrangian: &Lagrangian) -> Result<SourceForm, JetError> {
    let chart = lagrangian.chart();
    let density = lagrangian.density();
    let mut components = vec![ScalarExpr::zero(); chart.m()];
    for v in coordinate_dependencies(chart, density) {
        let Some((s, k)) = v.as_fiber() else { continue };
        let p = partial_var(chart, density, v);
        if p.is_zero() {
            continue;
        }
        let term = total_derivative_multi(chart, &p, &k)?;
        components[s] = if k.len() % 2 == 0 {
            components[s].add(&term)
        } else {
            components[s].sub(&term)
        };
    }
    SourceForm::new(chart, components)
}
