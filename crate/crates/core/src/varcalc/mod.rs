//! Variational operators: Euler–Lagrange forms, Lepage equivalents, the
//! fibered homotopy operator and Noether currents.

mod canonical;
mod euler;
mod fundamental;
mod homotopy;
mod noether;
mod principal;
mod reduced;
mod verify;

use crate::forms::{BasisOneForm, DiffForm};
use crate::jet::calculus::coordinate_dependencies;
use crate::jet::{Chart, FieldId, MultiIndex, ScalarExpr};
use crate::JetError;

pub use canonical::{
    canonical_lepage, canonical_split, first_order_nu, horizontal_components, CanonicalSplit,
    NuCheck,
};
pub use euler::euler_lagrange;
pub use fundamental::fundamental_lepage;
pub use homotopy::{homotopy_operator, vainberg_tonti};
pub use noether::noether_current;
pub use principal::principal_lepage;
pub use reduced::{check_split, reduced_lepage, SplitCheck};
pub use verify::{extract_source_form, verify_lepage_conditions, LepageReport};

/// Horizontal top form `𝓛 ω_0` of order `r`.
#[derive(Clone, Debug)]
pub struct Lagrangian {
    chart: Chart,
    density: ScalarExpr,
    order: usize,
}

impl Lagrangian {
    /// Lagrangian whose order is the highest jet order it depends on.
    pub fn new(chart: &Chart, density: ScalarExpr) -> Self {
        let order = coordinate_dependencies(chart, &density)
            .iter()
            .map(|v| v.jet_order())
            .max()
            .unwrap_or(0);
        Lagrangian {
            chart: chart.clone(),
            density,
            order,
        }
    }

    /// Declares a larger order than the one detected.
    pub fn with_order(mut self, r: usize) -> Self {
        self.order = self.order.max(r);
        self
    }

    pub fn zero(chart: &Chart) -> Self {
        Self::new(chart, ScalarExpr::zero())
    }

    /// Reads `f` from a horizontal top form `f ω_0`.
    pub fn from_form(form: &DiffForm) -> Result<Self, JetError> {
        let n = form.chart().n();
        if form.degree() != n || form.max_contact_degree() > 0 {
            return Err(JetError::InvalidArgument(
                "a Lagrangian is a horizontal n-form".into(),
            ));
        }
        Ok(Self::new(form.chart(), form.volume_coefficient()))
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn density(&self) -> &ScalarExpr {
        &self.density
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn form(&self) -> DiffForm {
        DiffForm::volume(&self.chart)
            .mul_scalar(&self.density)
            .with_order(self.order)
    }

    pub fn add(&self, other: &Lagrangian) -> Lagrangian {
        Self::new(&self.chart, self.density.add(&other.density))
            .with_order(self.order.max(other.order))
    }

    pub fn scale(&self, k: &crate::jet::Q) -> Lagrangian {
        Self::new(&self.chart, self.density.scale(k)).with_order(self.order)
    }

    /// True when the density is affine in the coordinates of order `r`.
    pub fn affine_in_top_order(&self) -> bool {
        let r = self.order;
        if r == 0 {
            return true;
        }
        let top: Vec<_> = coordinate_dependencies(&self.chart, &self.density)
            .into_iter()
            .filter(|v| v.is_fiber() && v.jet_order() == r)
            .collect();
        if self.density.contains_var_where(|v| v.is_atom()) {
            return top.is_empty();
        }
        let num = self.density.num();
        num.terms().iter().all(|(m, _)| {
            m.factors()
                .iter()
                .filter(|(v, _)| top.contains(v))
                .map(|(_, e)| *e)
                .sum::<u32>()
                <= 1
        }) && self.density.den().vars().iter().all(|v| !top.contains(v))
    }
}

impl PartialEq for Lagrangian {
    fn eq(&self, other: &Self) -> bool {
        self.density == other.density
    }
}

/// Source form `ε_σ ω^σ ∧ ω_0`.
#[derive(Clone, Debug)]
pub struct SourceForm {
    chart: Chart,
    components: Vec<ScalarExpr>,
}

impl SourceForm {
    pub fn new(chart: &Chart, components: Vec<ScalarExpr>) -> Result<Self, JetError> {
        if components.len() != chart.m() {
            return Err(JetError::InvalidArgument(format!(
                "source form needs {} components, got {}",
                chart.m(),
                components.len()
            )));
        }
        Ok(SourceForm {
            chart: chart.clone(),
            components,
        })
    }

    pub fn zero(chart: &Chart) -> Self {
        SourceForm {
            chart: chart.clone(),
            components: vec![ScalarExpr::zero(); chart.m()],
        }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn components(&self) -> &[ScalarExpr] {
        &self.components
    }

    pub fn component(&self, field: FieldId) -> &ScalarExpr {
        &self.components[field]
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.is_zero())
    }

    pub fn order(&self) -> usize {
        self.components
            .iter()
            .flat_map(|c| coordinate_dependencies(&self.chart, c))
            .map(|v| v.jet_order())
            .max()
            .unwrap_or(0)
    }

    pub fn sub(&self, other: &SourceForm) -> SourceForm {
        SourceForm {
            chart: self.chart.clone(),
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }

    /// `Σ ε_σ ω^σ ∧ ω_0` as an `(n+1)`-form.
    pub fn to_form(&self) -> DiffForm {
        let n = self.chart.n();
        let mut out = DiffForm::zero(&self.chart, n + 1, self.order());
        for (s, c) in self.components.iter().enumerate() {
            let mut factors = vec![BasisOneForm::Contact(s, MultiIndex::EMPTY)];
            factors.extend((0..n).map(BasisOneForm::Dx));
            out = out.add(&DiffForm::from_terms(
                &self.chart,
                n + 1,
                0,
                [(factors, c.clone())],
            ));
        }
        out
    }
}

impl PartialEq for SourceForm {
    fn eq(&self, other: &Self) -> bool {
        self.components == other.components
    }
}

/// Which Lepage equivalent a result holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LepageKind {
    Principal,
    Fundamental,
    Canonical,
    Reduced,
}

impl LepageKind {
    pub fn name(&self) -> &'static str {
        match self {
            LepageKind::Principal => "principal",
            LepageKind::Fundamental => "fundamental",
            LepageKind::Canonical => "canonical",
            LepageKind::Reduced => "reduced",
        }
    }
}

impl std::str::FromStr for LepageKind {
    type Err = JetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "principal" => Ok(LepageKind::Principal),
            "fundamental" => Ok(LepageKind::Fundamental),
            "canonical" => Ok(LepageKind::Canonical),
            "reduced" => Ok(LepageKind::Reduced),
            other => Err(JetError::InvalidArgument(format!(
                "unknown Lepage kind `{other}`"
            ))),
        }
    }
}

/// Pieces a Lepage equivalent was assembled from.
#[derive(Clone, Debug, Default)]
pub struct Provenance {
    /// Vainberg–Tonti Lagrangian (canonical).
    pub lagrangian_vt: Option<Lagrangian>,
    /// Reduced Lagrangian (reduced).
    pub reduced_lagrangian: Option<Lagrangian>,
    /// The `(n-1)`-form `α` (canonical: `IΘ_λ`; reduced: as supplied).
    pub alpha: Option<DiffForm>,
    /// The exact piece `dα`.
    pub d_alpha: Option<DiffForm>,
}

/// A Lepage equivalent together with how it was built.
#[derive(Clone, Debug)]
pub struct LepageResult {
    pub form: DiffForm,
    pub kind: LepageKind,
    pub provenance: Provenance,
}
