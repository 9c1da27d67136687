use std::collections::BTreeMap;

use super::{BasisOneForm, DiffForm, FormMonomial};
use crate::jet::{total_derivative, Chart, FieldId, MultiIndex, ScalarExpr, Var};
use crate::JetError;

/// Projectable vector field `ξ^i ∂_i + Ξ^σ ∂_σ` on the fibered chart.
#[derive(Clone, Debug)]
pub struct VectorFieldSpec {
    chart: Chart,
    xi: Vec<ScalarExpr>,
    vertical: Vec<ScalarExpr>,
}

impl VectorFieldSpec {
    /// `xi` may depend on base coordinates and parameters only; `vertical`
    /// additionally on the undifferentiated fields.
    pub fn new(
        chart: &Chart,
        xi: Vec<ScalarExpr>,
        vertical: Vec<ScalarExpr>,
    ) -> Result<Self, JetError> {
        if xi.len() != chart.n() || vertical.len() != chart.m() {
            return Err(JetError::InvalidArgument(format!(
                "vector field needs {} base and {} fiber components",
                chart.n(),
                chart.m()
            )));
        }
        for (i, c) in xi.iter().enumerate() {
            if c.contains_var_where(|v| !(v.is_base() || v.is_param())) {
                return Err(JetError::InvalidArgument(format!(
                    "base component {i} must depend on base coordinates only"
                )));
            }
        }
        for (s, c) in vertical.iter().enumerate() {
            if c.contains_var_where(|v| {
                !(v.is_base() || v.is_param() || (v.is_fiber() && v.jet_order() == 0))
            }) {
                return Err(JetError::InvalidArgument(format!(
                    "fiber component {s} must be a function of x and y"
                )));
            }
        }
        Ok(VectorFieldSpec {
            chart: chart.clone(),
            xi,
            vertical,
        })
    }

    /// `∂/∂x^i`.
    pub fn translation(chart: &Chart, i: usize) -> Self {
        let mut xi = vec![ScalarExpr::zero(); chart.n()];
        xi[i] = ScalarExpr::one();
        Self::new(chart, xi, vec![ScalarExpr::zero(); chart.m()]).expect("valid translation")
    }

    pub fn xi(&self) -> &[ScalarExpr] {
        &self.xi
    }

    pub fn vertical(&self) -> &[ScalarExpr] {
        &self.vertical
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    /// Jet prolongation up to order `r`.
    pub fn prolong(&self, r: usize) -> Result<ProlongedField, JetError> {
        let chart = &self.chart;
        let mut characteristic: BTreeMap<(FieldId, MultiIndex), ScalarExpr> = BTreeMap::new();
        for s in 0..chart.m() {
            // Q^σ = Ξ^σ − ξ^i y^σ_i
            let mut q = self.vertical[s].clone();
            for (i, xi) in self.xi.iter().enumerate() {
                if !xi.is_zero() {
                    q = q.sub(&xi.mul(&ScalarExpr::var(Var::fiber(s, MultiIndex::single(i)))));
                }
            }
            characteristic.insert((s, MultiIndex::EMPTY), q);
            for k in 1..=r {
                for j in MultiIndex::all_of_length(chart.n(), k) {
                    let last = *j.entries().last().expect("nonempty") as usize;
                    let parent = j.without(last).expect("contains last");
                    let base = characteristic[&(s, parent)].clone();
                    let d = total_derivative(chart, &base, last)?;
                    characteristic.insert((s, j), d);
                }
            }
        }
        Ok(ProlongedField {
            chart: chart.clone(),
            xi: self.xi.clone(),
            characteristic,
            order: r,
        })
    }
}

/// Prolonged vector field `J^rΞ`, stored through the characteristic
/// derivatives `d_J(Ξ^σ − ξ^i y^σ_i)`.
#[derive(Clone, Debug)]
pub struct ProlongedField {
    chart: Chart,
    xi: Vec<ScalarExpr>,
    characteristic: BTreeMap<(FieldId, MultiIndex), ScalarExpr>,
    order: usize,
}

impl ProlongedField {
    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Component `Ξ^σ_J = d_J(Ξ^σ − ξ^i y^σ_i) + ξ^i y^σ_{Ji}`.
    pub fn component(&self, field: FieldId, j: &MultiIndex) -> Option<ScalarExpr> {
        let mut c = self.characteristic.get(&(field, *j))?.clone();
        for (i, xi) in self.xi.iter().enumerate() {
            if !xi.is_zero() {
                let k = j.with(i)?;
                c = c.add(&xi.mul(&ScalarExpr::var(Var::fiber(field, k))));
            }
        }
        Some(c)
    }

    /// Value of a basis one-form on the field.
    pub fn pair(&self, b: &BasisOneForm) -> Result<ScalarExpr, JetError> {
        match b {
            BasisOneForm::Dx(i) => Ok(self.xi[*i].clone()),
            // ω^σ_J(Ξ) = Ξ^σ_J − y^σ_{Jj} ξ^j
            BasisOneForm::Contact(s, j) => {
                self.characteristic.get(&(*s, *j)).cloned().ok_or_else(|| {
                    JetError::InvalidArgument(format!(
                        "prolongation of order {} too low for |J| = {}",
                        self.order,
                        j.len()
                    ))
                })
            }
            BasisOneForm::DyTop(s, j) => self.component(*s, j).ok_or_else(|| {
                JetError::InvalidArgument(format!(
                    "prolongation of order {} too low for |J| = {}",
                    self.order,
                    j.len()
                ))
            }),
        }
    }
}

/// Interior product `i_Ξ ρ`.
pub fn interior_product(field: &ProlongedField, rho: &DiffForm) -> Result<DiffForm, JetError> {
    let mut out = DiffForm::zero(rho.chart(), rho.degree().saturating_sub(1), rho.order());
    for (m, c) in rho.terms() {
        for (p, b) in m.factors().iter().enumerate() {
            let v = field.pair(b)?;
            if v.is_zero() {
                continue;
            }
            let rest: Vec<BasisOneForm> = m
                .factors()
                .iter()
                .enumerate()
                .filter(|(q, _)| *q != p)
                .map(|(_, f)| *f)
                .collect();
            let coeff = c.mul(&v);
            let coeff = if p % 2 == 1 { coeff.neg() } else { coeff };
            out.add_term(FormMonomial(rest.into_iter().collect()), coeff);
        }
    }
    Ok(out)
}

/// Lie derivative `i_Ξ dρ + d i_Ξ ρ` along the prolonged field.
pub fn lie_derivative(field: &VectorFieldSpec, rho: &DiffForm) -> Result<DiffForm, JetError> {
    let d_rho = rho.d()?;
    let r = rho
        .max_contact_index()
        .max(d_rho.max_contact_index())
        .unwrap_or(0);
    let pf = field.prolong(r)?;
    let a = interior_product(&pf, &d_rho)?;
    let b = interior_product(&pf, rho)?.d()?;
    Ok(a.add(&b))
}
