use super::DiffForm;
use crate::jet::{ScalarExpr, Var};
use crate::JetError;

impl DiffForm {
    /// Pullback by the zero section `y^σ_J = 0`: contact factors vanish and
    /// coefficients are evaluated at zero fiber values.
    pub fn pullback_zero_section(&self) -> Result<DiffForm, JetError> {
        let mut out = DiffForm::zero(self.chart(), self.degree(), 0);
        for (m, c) in self.terms() {
            if m.contact_degree() > 0 {
                continue;
            }
            if let Some(a) = c.vars().into_iter().find(|v| v.is_atom()) {
                return Err(JetError::ZeroSectionDomain(self.chart().var_name(a)));
            }
            let zero = |v: Var| v.is_fiber().then(ScalarExpr::zero);
            let num = c.num().substitute(&|v| zero(v).map(|e| e.num().clone()));
            let den = c.den().substitute(&|v| zero(v).map(|e| e.num().clone()));
            let value = ScalarExpr::ratio(num, den).ok_or_else(|| {
                JetError::ZeroSectionDomain(
                    "coefficient denominator vanishes at the zero section".into(),
                )
            })?;
            out.add_term(m.clone(), value);
        }
        Ok(out)
    }

    /// Pullback by a vertical shift `y^σ ↦ y^σ + f^σ(x)` of the
    /// coefficients. Contact forms are invariant under such maps, so only
    /// coefficients change; `shift` supplies the image of each fiber
    /// coordinate.
    pub fn pullback_vertical_shift(&self, shift: &dyn Fn(Var) -> Option<ScalarExpr>) -> DiffForm {
        self.substitute(shift)
    }
}
