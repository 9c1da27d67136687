use super::principal::principal_form;
use super::{Lagrangian, LepageKind, LepageResult, Provenance};
use crate::forms::DiffForm;
use crate::geomver::numeric_zero_check;
use crate::jet::{expr_to_string, ScalarExpr};
use crate::JetError;

/// Seed and sample count of the numeric fallback used when the residual
/// involves opaque atoms.
const SPLIT_SEED: u64 = 0x5eed;
const SPLIT_POINTS: usize = 12;
const SPLIT_TOLERANCE: f64 = 1e-9;

/// Outcome of checking `λ = λ' + h dα`.
#[derive(Clone, Debug)]
pub struct SplitCheck {
    /// `λ − λ' − h dα` as a density.
    pub residual: ScalarExpr,
    /// Largest relative numeric residual when the symbolic residual could
    /// not be reduced to zero because of opaque atoms.
    pub numeric_residual: Option<f64>,
}

impl SplitCheck {
    pub fn holds(&self) -> bool {
        match self.numeric_residual {
            Some(r) => r <= SPLIT_TOLERANCE,
            None => self.residual.is_zero(),
        }
    }
}

/// Checks that `h dα = λ − λ'`.
pub fn check_split(
    lagrangian: &Lagrangian,
    reduced: &Lagrangian,
    alpha: &DiffForm,
) -> Result<SplitCheck, JetError> {
    let n = lagrangian.chart().n();
    if alpha.degree() + 1 != n {
        return Err(JetError::InvalidArgument(format!(
            "α must be an {}-form, got degree {}",
            n - 1,
            alpha.degree()
        )));
    }
    let h_d_alpha = alpha.d()?.horizontal().volume_coefficient();
    let residual = lagrangian.density().sub(reduced.density()).sub(&h_d_alpha);
    let numeric_residual = if !residual.is_zero() && residual.contains_var_where(|v| v.is_atom()) {
        let parts = [
            lagrangian.density().clone(),
            reduced.density().clone(),
            h_d_alpha,
        ];
        Some(numeric_zero_check(
            lagrangian.chart(),
            &residual,
            &parts,
            SPLIT_SEED,
            SPLIT_POINTS,
        )?)
    } else {
        None
    };
    Ok(SplitCheck {
        residual,
        numeric_residual,
    })
}

/// Reduced Lepage equivalent `φ_λ = Θ_{λ'} + dα` for a split
/// `λ = λ' + h dα`.
pub fn reduced_lepage(
    lagrangian: &Lagrangian,
    reduced: &Lagrangian,
    alpha: &DiffForm,
) -> Result<LepageResult, JetError> {
    let check = check_split(lagrangian, reduced, alpha)?;
    if !check.holds() {
        let shown = match check.numeric_residual {
            Some(r) => format!(
                "{} (numeric {r:e})",
                expr_to_string(lagrangian.chart(), &check.residual)
            ),
            None => expr_to_string(lagrangian.chart(), &check.residual),
        };
        return Err(JetError::InvalidSplit(shown));
    }
    let d_alpha = alpha.d()?;
    let form = principal_form(reduced)?.add(&d_alpha);
    let order = form.effective_order();
    Ok(LepageResult {
        form: form.with_order(order),
        kind: LepageKind::Reduced,
        provenance: Provenance {
            lagrangian_vt: None,
            reduced_lagrangian: Some(reduced.clone()),
            alpha: Some(alpha.clone()),
            d_alpha: Some(d_alpha),
        },
    })
}
