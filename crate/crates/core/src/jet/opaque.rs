//! Opaque symbols: atoms with registered derivative rules and numeric hooks.

use std::fmt;

use nalgebra::DMatrix;

use super::coeff::Q;
use super::expr::ScalarExpr;
use super::var::{FieldId, SymbolId, Var};
use crate::JetError;

/// Behaviour of an opaque symbol.
pub trait OpaqueRule: Send + Sync + fmt::Debug {
    /// Short constructor name, e.g. `inverse`.
    fn kind(&self) -> &'static str;

    /// Jet coordinates the atom with these indices depends on.
    fn dependencies(&self, indices: &[usize]) -> Vec<Var>;

    /// Partial derivative of the atom with respect to `wrt`.
    fn derivative(&self, indices: &[usize], wrt: Var) -> ScalarExpr;

    /// Homogeneity degree under fiber scaling `y -> t y`, if any.
    fn scaling_degree(&self) -> Option<i32>;

    /// Numeric value given numeric values of the dependencies.
    fn evaluate(
        &self,
        indices: &[usize],
        value: &mut dyn FnMut(Var) -> Result<f64, JetError>,
    ) -> Result<f64, JetError>;

    /// Field family the symbol is built from.
    fn argument(&self) -> &MetricFamily;
}

/// A symmetric square family of fields `g_{ab}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricFamily {
    fields: Vec<Vec<FieldId>>,
}

impl MetricFamily {
    pub(crate) fn new(fields: Vec<Vec<FieldId>>) -> Self {
        MetricFamily { fields }
    }

    pub fn dim(&self) -> usize {
        self.fields.len()
    }

    pub fn field(&self, a: usize, b: usize) -> FieldId {
        self.fields[a][b]
    }

    /// Position `(p, q)` with `p <= q` of a metric component.
    pub fn position(&self, f: FieldId) -> Option<(usize, usize)> {
        for p in 0..self.dim() {
            for q in p..self.dim() {
                if self.fields[p][q] == f {
                    return Some((p, q));
                }
            }
        }
        None
    }

    fn component(&self, wrt: Var) -> Option<(usize, usize)> {
        let (f, j) = wrt.as_fiber()?;
        if !j.is_empty() {
            return None;
        }
        self.position(f)
    }

    fn all_components(&self) -> Vec<Var> {
        let mut out = Vec::new();
        for p in 0..self.dim() {
            for q in p..self.dim() {
                out.push(Var::field(self.fields[p][q]));
            }
        }
        out
    }

    /// Numeric matrix of the family at given field values.
    pub fn numeric(
        &self,
        value: &mut dyn FnMut(Var) -> Result<f64, JetError>,
    ) -> Result<DMatrix<f64>, JetError> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for p in 0..d {
            for q in p..d {
                let v = value(Var::field(self.fields[p][q]))?;
                m[(p, q)] = v;
                m[(q, p)] = v;
            }
        }
        Ok(m)
    }
}

fn sorted_atom(symbol: SymbolId, a: usize, b: usize) -> Var {
    Var::atom(symbol, &[a.min(b), a.max(b)])
}

/// Components `g^{ab}` of the inverse of a metric family.
#[derive(Debug)]
pub struct InverseMetric {
    metric: MetricFamily,
    id: SymbolId,
}

impl InverseMetric {
    pub fn new(metric: MetricFamily, id: SymbolId) -> Self {
        InverseMetric { metric, id }
    }

    fn g(&self, a: usize, b: usize) -> ScalarExpr {
        ScalarExpr::var(sorted_atom(self.id, a, b))
    }
}

impl OpaqueRule for InverseMetric {
    fn kind(&self) -> &'static str {
        "inverse"
    }

    fn dependencies(&self, _indices: &[usize]) -> Vec<Var> {
        self.metric.all_components()
    }

    fn derivative(&self, indices: &[usize], wrt: Var) -> ScalarExpr {
        let Some((p, q)) = self.metric.component(wrt) else {
            return ScalarExpr::zero();
        };
        let (a, b) = (indices[0], indices[1]);
        let mut d = self.g(a, p).mul(&self.g(q, b));
        if p != q {
            d = d.add(&self.g(a, q).mul(&self.g(p, b)));
        }
        d.neg()
    }

    fn scaling_degree(&self) -> Option<i32> {
        Some(-1)
    }

    fn evaluate(
        &self,
        indices: &[usize],
        value: &mut dyn FnMut(Var) -> Result<f64, JetError>,
    ) -> Result<f64, JetError> {
        let m = self.metric.numeric(value)?;
        let inv = m.try_inverse().ok_or_else(|| JetError::Degenerate {
            symbol: "inverse".into(),
            reason: "singular metric".into(),
        })?;
        Ok(inv[(indices[0], indices[1])])
    }

    fn argument(&self) -> &MetricFamily {
        &self.metric
    }
}

/// The volume factor `sqrt|det g|`.
#[derive(Debug)]
pub struct SqrtAbsDet {
    metric: MetricFamily,
    inverse: SymbolId,
    id: SymbolId,
}

impl SqrtAbsDet {
    pub fn new(metric: MetricFamily, inverse: SymbolId, id: SymbolId) -> Self {
        SqrtAbsDet {
            metric,
            inverse,
            id,
        }
    }
}

impl OpaqueRule for SqrtAbsDet {
    fn kind(&self) -> &'static str {
        "sqrt_abs_det"
    }

    fn dependencies(&self, _indices: &[usize]) -> Vec<Var> {
        self.metric.all_components()
    }

    fn derivative(&self, _indices: &[usize], wrt: Var) -> ScalarExpr {
        let Some((p, q)) = self.metric.component(wrt) else {
            return ScalarExpr::zero();
        };
        let vol = ScalarExpr::var(Var::atom(self.id, &[]));
        let ginv = ScalarExpr::var(sorted_atom(self.inverse, p, q));
        let d = vol.mul(&ginv);
        if p == q {
            d.scale(&Q::new(1, 2))
        } else {
            d
        }
    }

    fn scaling_degree(&self) -> Option<i32> {
        let d = self.metric.dim();
        (d % 2 == 0).then_some((d / 2) as i32)
    }

    fn evaluate(
        &self,
        _indices: &[usize],
        value: &mut dyn FnMut(Var) -> Result<f64, JetError>,
    ) -> Result<f64, JetError> {
        let det = self.metric.numeric(value)?.determinant();
        if det == 0.0 || !det.is_finite() {
            return Err(JetError::Degenerate {
                symbol: "sqrt_abs_det".into(),
                reason: "singular metric".into(),
            });
        }
        Ok(det.abs().sqrt())
    }

    fn argument(&self) -> &MetricFamily {
        &self.metric
    }
}
