use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use super::multi_index::{MultiIndex, MAX_BASE_DIM, MAX_JET_ORDER};
use super::opaque::{InverseMetric, MetricFamily, OpaqueRule, SqrtAbsDet};
use super::var::{FieldId, JetCoordinate, SymbolId, Var, VarKind};
use crate::JetError;

/// Default bound on the jet order of any coordinate.
pub const DEFAULT_MAX_ORDER: usize = 8;

/// A registered opaque symbol such as an inverse metric component.
#[derive(Clone)]
pub struct OpaqueSymbol {
    pub name: String,
    pub arity: usize,
    pub symmetric: bool,
    pub rule: Arc<dyn OpaqueRule>,
}

impl fmt::Debug for OpaqueSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.name, self.arity)
    }
}

/// Fibered chart `(x^i, y^σ)` together with its parameters, opaque symbols
/// and jet-order bound.
#[derive(Clone, Debug)]
pub struct ChartSpec {
    base_names: Vec<String>,
    field_names: Vec<String>,
    params: Vec<String>,
    symbols: Vec<OpaqueSymbol>,
    max_order: usize,
}

/// Shared handle to an immutable chart.
pub type Chart = Arc<ChartSpec>;

impl ChartSpec {
    pub fn new<S: Into<String>>(
        base_names: impl IntoIterator<Item = S>,
        field_names: impl IntoIterator<Item = S>,
    ) -> Result<Self, JetError> {
        let spec = ChartSpec {
            base_names: base_names.into_iter().map(Into::into).collect(),
            field_names: field_names.into_iter().map(Into::into).collect(),
            params: Vec::new(),
            symbols: Vec::new(),
            max_order: DEFAULT_MAX_ORDER,
        };
        if spec.base_names.is_empty() {
            return Err(JetError::InvalidChart(
                "base dimension must be at least 1".into(),
            ));
        }
        if spec.base_names.len() > MAX_BASE_DIM {
            return Err(JetError::InvalidChart(format!(
                "base dimension {} exceeds {MAX_BASE_DIM}",
                spec.base_names.len()
            )));
        }
        if spec.field_names.is_empty() {
            return Err(JetError::InvalidChart(
                "at least one field is required".into(),
            ));
        }
        if spec.field_names.len() > 256 {
            return Err(JetError::InvalidChart("too many fields".into()));
        }
        spec.check_distinct()?;
        Ok(spec)
    }

    /// Convenience chart with generated names `x0..`, `y0..`.
    pub fn numbered(n: usize, m: usize) -> Self {
        let base: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
        let fields: Vec<String> = (0..m).map(|s| format!("y{s}")).collect();
        Self::new(base, fields).expect("valid numbered chart")
    }

    pub fn with_params<S: Into<String>>(
        mut self,
        params: impl IntoIterator<Item = S>,
    ) -> Result<Self, JetError> {
        self.params.extend(params.into_iter().map(Into::into));
        self.check_distinct()?;
        Ok(self)
    }

    pub fn with_max_order(mut self, k: usize) -> Result<Self, JetError> {
        if k == 0 || k > MAX_JET_ORDER {
            return Err(JetError::InvalidChart(format!(
                "max order must be in 1..={MAX_JET_ORDER}, got {k}"
            )));
        }
        self.max_order = k;
        Ok(self)
    }

    fn check_distinct(&self) -> Result<(), JetError> {
        let mut seen = HashSet::new();
        let names = self
            .base_names
            .iter()
            .chain(&self.field_names)
            .chain(&self.params)
            .chain(self.symbols.iter().map(|s| &s.name));
        for name in names {
            if !seen.insert(name.as_str()) {
                return Err(JetError::InvalidChart(format!(
                    "duplicate identifier `{name}`"
                )));
            }
        }
        Ok(())
    }

    fn push_symbol(&mut self, sym: OpaqueSymbol) -> Result<SymbolId, JetError> {
        if self.symbols.len() >= 256 {
            return Err(JetError::InvalidChart("too many opaque symbols".into()));
        }
        self.symbols.push(sym);
        if let Err(e) = self.check_distinct() {
            self.symbols.pop();
            return Err(e);
        }
        Ok(self.symbols.len() - 1)
    }

    /// Metric family view of the fields `g[a][b]`, which must be symmetric.
    pub fn metric_family(&self, fields: Vec<Vec<FieldId>>) -> Result<MetricFamily, JetError> {
        let d = fields.len();
        for (a, row) in fields.iter().enumerate() {
            if row.len() != d {
                return Err(JetError::InvalidChart(
                    "metric family must be square".into(),
                ));
            }
            for (b, &f) in row.iter().enumerate() {
                if f >= self.m() {
                    return Err(JetError::InvalidChart(format!(
                        "metric entry {a},{b} is not a field"
                    )));
                }
                if fields[b][a] != f {
                    return Err(JetError::InvalidChart(
                        "metric family must be symmetric".into(),
                    ));
                }
            }
        }
        Ok(MetricFamily::new(fields))
    }

    /// Registers the inverse of a symmetric metric family as `name[a,b]`.
    pub fn register_inverse(
        &mut self,
        name: &str,
        metric: MetricFamily,
    ) -> Result<SymbolId, JetError> {
        let id = self.symbols.len();
        self.push_symbol(OpaqueSymbol {
            name: name.to_string(),
            arity: 2,
            symmetric: true,
            rule: Arc::new(InverseMetric::new(metric, id)),
        })
    }

    /// Registers `sqrt|det g|`; `inverse` must be the inverse of the same family.
    pub fn register_sqrt_abs_det(
        &mut self,
        name: &str,
        metric: MetricFamily,
        inverse: SymbolId,
    ) -> Result<SymbolId, JetError> {
        let id = self.symbols.len();
        self.push_symbol(OpaqueSymbol {
            name: name.to_string(),
            arity: 0,
            symmetric: false,
            rule: Arc::new(SqrtAbsDet::new(metric, inverse, id)),
        })
    }

    pub fn n(&self) -> usize {
        self.base_names.len()
    }

    pub fn m(&self) -> usize {
        self.field_names.len()
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn base_names(&self) -> &[String] {
        &self.base_names
    }

    pub fn field_names(&self) -> &[String] {
        &self.field_names
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }

    pub fn symbols(&self) -> &[OpaqueSymbol] {
        &self.symbols
    }

    pub fn symbol(&self, id: SymbolId) -> Option<&OpaqueSymbol> {
        self.symbols.get(id)
    }

    pub fn find_base(&self, name: &str) -> Option<usize> {
        self.base_names.iter().position(|s| s == name)
    }

    pub fn find_field(&self, name: &str) -> Option<FieldId> {
        self.field_names.iter().position(|s| s == name)
    }

    pub fn find_param(&self, name: &str) -> Option<usize> {
        self.params.iter().position(|s| s == name)
    }

    pub fn find_symbol(&self, name: &str) -> Option<SymbolId> {
        self.symbols.iter().position(|s| s.name == name)
    }

    /// Atom variable for a symbol, sorting indices of symmetric symbols.
    pub fn atom(&self, symbol: SymbolId, indices: &[usize]) -> Result<Var, JetError> {
        let sym = self
            .symbols
            .get(symbol)
            .ok_or_else(|| JetError::UnknownCoordinate(format!("symbol #{symbol}")))?;
        if indices.len() != sym.arity {
            return Err(JetError::InvalidChart(format!(
                "{} expects {} indices, got {}",
                sym.name,
                sym.arity,
                indices.len()
            )));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= MAX_BASE_DIM) {
            return Err(JetError::InvalidChart(format!(
                "{} index {bad} out of range",
                sym.name
            )));
        }
        let mut idx = indices.to_vec();
        if sym.symmetric {
            idx.sort_unstable();
        }
        Ok(Var::atom(symbol, &idx))
    }

    /// Fiber variable `y^σ_J`, checked against the chart.
    pub fn fiber(&self, field: FieldId, j: MultiIndex) -> Result<Var, JetError> {
        let v = Var::fiber(field, j);
        self.validate(v)?;
        Ok(v)
    }

    /// Checks that a variable belongs to this chart and respects the order
    /// bound.
    pub fn validate(&self, v: Var) -> Result<(), JetError> {
        match v.kind() {
            VarKind::Base(i) if i < self.n() => Ok(()),
            VarKind::Fiber(s, j) if s < self.m() && j.iter().all(|i| i < self.n()) => {
                if j.len() > self.max_order {
                    Err(JetError::OrderOverflow {
                        coordinate: self.var_name(v),
                        max: self.max_order,
                    })
                } else {
                    Ok(())
                }
            }
            VarKind::Param(p) if p < self.params.len() => Ok(()),
            VarKind::Atom(s) if s < self.symbols.len() => Ok(()),
            VarKind::HomotopyT => Ok(()),
            _ => Err(JetError::UnknownCoordinate(format!("{v:?}"))),
        }
    }

    pub fn validate_coordinate(&self, c: JetCoordinate) -> Result<(), JetError> {
        self.validate(Var::from(c))
    }

    /// Canonical textual name used in expression strings.
    pub fn var_name(&self, v: Var) -> String {
        match v.kind() {
            VarKind::Base(i) => self
                .base_names
                .get(i)
                .cloned()
                .unwrap_or_else(|| format!("x?{i}")),
            VarKind::Fiber(s, j) => {
                let name = self
                    .field_names
                    .get(s)
                    .cloned()
                    .unwrap_or_else(|| format!("y?{s}"));
                if j.is_empty() {
                    name
                } else {
                    format!("D({name},{j})")
                }
            }
            VarKind::Param(p) => self
                .params
                .get(p)
                .cloned()
                .unwrap_or_else(|| format!("p?{p}")),
            VarKind::Atom(s) => {
                let name = self
                    .symbols
                    .get(s)
                    .map(|x| x.name.clone())
                    .unwrap_or_else(|| format!("a?{s}"));
                let idx = v.atom_indices();
                if idx.is_empty() {
                    name
                } else {
                    let parts: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
                    format!("{name}[{}]", parts.join(","))
                }
            }
            VarKind::HomotopyT => "t".to_string(),
        }
    }

    /// All jet coordinates of order at most `k`, in canonical order.
    pub fn coordinates_up_to(&self, k: usize) -> Vec<Var> {
        let mut out: Vec<Var> = (0..self.n()).map(Var::base).collect();
        for s in 0..self.m() {
            for j in MultiIndex::all_up_to(self.n(), k) {
                out.push(Var::fiber(s, j));
            }
        }
        out
    }

    pub fn into_shared(self) -> Chart {
        Arc::new(self)
    }
}
