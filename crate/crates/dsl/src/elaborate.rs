//! Turns a parsed problem file into a chart, a Lagrangian and the optional
//! reduced inputs: families become scalar fields, sums are expanded and
//! let-bindings are inlined.

use std::collections::{BTreeMap, HashMap, HashSet};

use jetforms_core::forms::DiffForm;
use jetforms_core::jet::{
    total_derivative, Chart, ChartSpec, FieldId, MultiIndex, ScalarExpr, Var, MAX_JET_ORDER, Q,
};
use jetforms_core::varcalc::Lagrangian;
use num_rational::BigRational;

use crate::ast::*;
use crate::error::{DslError, ErrorKind, Pos};
use crate::parser::{parse, parse_expr};

const MAX_EXPONENT: i32 = 64;

/// Constant tensor with explicit rational components; zeros are not stored.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstantTensor {
    dims: Vec<usize>,
    entries: BTreeMap<Vec<usize>, Q>,
}

impl ConstantTensor {
    fn from_value(name: &Name, v: &ConstValue) -> Result<Self, DslError> {
        let mut entries = BTreeMap::new();
        let dims = match v {
            ConstValue::Scalar(q) => {
                entries.insert(Vec::new(), q.clone());
                Vec::new()
            }
            ConstValue::Diag(d) => {
                for (i, q) in d.iter().enumerate() {
                    entries.insert(vec![i, i], q.clone());
                }
                vec![d.len(), d.len()]
            }
            ConstValue::Array(_) => {
                let dims = array_dims(v);
                collect_array(name, v, &dims, &mut Vec::new(), &mut entries)?;
                dims
            }
        };
        entries.retain(|_, q| !q.is_zero());
        Ok(ConstantTensor { dims, entries })
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Number of stored (nonzero) components.
    pub fn nonzero_count(&self) -> usize {
        self.entries.len()
    }

    /// Component value, or `None` when an index is out of range.
    pub fn get(&self, index: &[usize]) -> Option<Q> {
        if index.len() != self.dims.len() || index.iter().zip(&self.dims).any(|(i, d)| i >= d) {
            return None;
        }
        Some(self.entries.get(index).cloned().unwrap_or_else(Q::zero))
    }
}

fn array_dims(v: &ConstValue) -> Vec<usize> {
    match v {
        ConstValue::Array(items) => {
            let mut d = vec![items.len()];
            if let Some(first) = items.first() {
                d.extend(array_dims(first));
            }
            d
        }
        _ => Vec::new(),
    }
}

fn collect_array(
    name: &Name,
    v: &ConstValue,
    dims: &[usize],
    at: &mut Vec<usize>,
    out: &mut BTreeMap<Vec<usize>, Q>,
) -> Result<(), DslError> {
    let ragged = || {
        DslError::new(
            ErrorKind::DimensionMismatch,
            name.pos,
            format!("constant `{}` is not rectangular", name.text),
        )
    };
    match (v, dims.split_first()) {
        (ConstValue::Scalar(q), None) => {
            out.insert(at.clone(), q.clone());
            Ok(())
        }
        (ConstValue::Array(items), Some((&d, rest))) if items.len() == d => {
            for (k, item) in items.iter().enumerate() {
                at.push(k);
                collect_array(name, item, rest, at, out)?;
                at.pop();
            }
            Ok(())
        }
        _ => Err(ragged()),
    }
}

#[derive(Clone, Debug)]
struct Family {
    dims: Vec<usize>,
    symmetric: bool,
    ids: BTreeMap<Vec<usize>, FieldId>,
}

impl Family {
    fn field(&self, index: &[usize]) -> Option<FieldId> {
        let mut k = index.to_vec();
        if self.symmetric {
            k.sort_unstable();
        }
        self.ids.get(&k).copied()
    }
}

/// Names visible to expressions beyond what the chart itself declares.
#[derive(Clone, Debug, Default)]
struct Scope {
    constants: HashMap<String, ConstantTensor>,
    families: HashMap<String, Family>,
    lets: HashMap<String, LetBinding>,
}

/// Reduced Lagrangian and the `(n-1)`-form `α` of a `reduced` block.
#[derive(Clone, Debug)]
pub struct ReducedInputs {
    pub lagrangian: Lagrangian,
    pub alpha: DiffForm,
}

/// An elaborated problem.
#[derive(Clone, Debug)]
pub struct Problem {
    pub file: ProblemFile,
    pub chart: Chart,
    /// Order bound declared in the chart block.
    pub declared_order: usize,
    pub lagrangian: Lagrangian,
    pub reduced: Option<ReducedInputs>,
    scope: Scope,
}

impl Problem {
    pub fn constant(&self, name: &str) -> Option<&ConstantTensor> {
        self.scope.constants.get(name)
    }

    /// Elaborates a standalone expression against this problem's
    /// declarations.
    pub fn expression(&self, text: &str) -> Result<ScalarExpr, DslError> {
        let e = parse_expr(text)?;
        Elaborator::new(&self.chart, &self.scope, self.chart.max_order()).eval(&e, &mut Vec::new())
    }
}

/// Parses and elaborates; the chart admits jet coordinates up to
/// `max(max_order, declared order)`.
pub fn load(text: &str, max_order: usize) -> Result<Problem, DslError> {
    elaborate(parse(text)?, max_order)
}

/// Reads a canonical expression string over an existing chart.
pub fn expr_from_str(chart: &Chart, text: &str) -> Result<ScalarExpr, DslError> {
    let e = parse_expr(text)?;
    let scope = Scope::default();
    Elaborator::new(chart, &scope, chart.max_order()).eval(&e, &mut Vec::new())
}

fn declaration(pos: Pos, msg: impl Into<String>) -> DslError {
    DslError::new(ErrorKind::Declaration, pos, msg)
}

pub fn elaborate(file: ProblemFile, max_order: usize) -> Result<Problem, DslError> {
    let c = &file.chart;
    if c.base.is_empty() {
        return Err(declaration(c.pos, "chart declares no base coordinates"));
    }
    if c.fields.is_empty() {
        return Err(declaration(c.pos, "chart declares no fields"));
    }
    if c.order > MAX_JET_ORDER {
        return Err(declaration(
            c.pos,
            format!("declared order {} exceeds {MAX_JET_ORDER}", c.order),
        ));
    }
    let mut seen: HashSet<String> = HashSet::new();
    let mut claim = |n: &Name| -> Result<(), DslError> {
        if seen.insert(n.text.clone()) {
            Ok(())
        } else {
            Err(declaration(
                n.pos,
                format!("`{}` is declared twice", n.text),
            ))
        }
    };
    let mut scope = Scope::default();
    let mut field_names = Vec::new();
    for b in &c.base {
        claim(b)?;
    }
    for f in &file.params {
        claim(f)?;
    }
    for f in &c.fields {
        claim(&f.name)?;
        if f.shape.is_empty() {
            field_names.push(f.name.text.clone());
            continue;
        }
        if f.shape.contains(&0) {
            return Err(declaration(
                f.name.pos,
                format!("family `{}` has an empty dimension", f.name.text),
            ));
        }
        if f.symmetric && f.shape.iter().any(|d| *d != f.shape[0]) {
            return Err(declaration(
                f.name.pos,
                format!(
                    "symmetric family `{}` must have equal dimensions",
                    f.name.text
                ),
            ));
        }
        let total: usize = f.shape.iter().product();
        if total > 256 {
            return Err(declaration(
                f.name.pos,
                format!("family `{}` is too large", f.name.text),
            ));
        }
        let mut ids = BTreeMap::new();
        for flat in 0..total {
            let mut index = Vec::with_capacity(f.shape.len());
            let mut rest = flat;
            for d in f.shape.iter().rev() {
                index.push(rest % d);
                rest /= d;
            }
            index.reverse();
            if f.symmetric && index.windows(2).any(|w| w[0] > w[1]) {
                continue;
            }
            let parts: Vec<String> = index.iter().map(|i| i.to_string()).collect();
            let expanded = format!("{}_{}", f.name.text, parts.join("_"));
            claim(&Name {
                text: expanded.clone(),
                pos: f.name.pos,
            })?;
            ids.insert(index, field_names.len());
            field_names.push(expanded);
        }
        scope.families.insert(
            f.name.text.clone(),
            Family {
                dims: f.shape.clone(),
                symmetric: f.symmetric,
                ids,
            },
        );
    }
    let engine = |e| DslError::engine(c.pos, e);
    let bound = max_order.max(c.order).clamp(1, MAX_JET_ORDER);
    let mut spec = ChartSpec::new(c.base.iter().map(|b| b.text.clone()), field_names)
        .map_err(engine)?
        .with_params(file.params.iter().map(|p| p.text.clone()))
        .map_err(engine)?
        .with_max_order(bound)
        .map_err(engine)?;
    for g in &c.metrics {
        let fam = scope.families.get(&g.text).ok_or_else(|| {
            DslError::new(
                ErrorKind::UndeclaredIdentifier,
                g.pos,
                format!("undeclared identifier `{}`", g.text),
            )
        })?;
        if !fam.symmetric || fam.dims.len() != 2 {
            return Err(declaration(
                g.pos,
                format!("metric `{}` must be a symmetric rank-2 family", g.text),
            ));
        }
        let d = fam.dims[0];
        let rows: Vec<Vec<FieldId>> = (0..d)
            .map(|a| {
                (0..d)
                    .map(|b| fam.field(&[a, b]).expect("complete family"))
                    .collect()
            })
            .collect();
        let family = spec
            .metric_family(rows)
            .map_err(|e| DslError::engine(g.pos, e))?;
        let inverse_name = format!("{}_inv", g.text);
        let volume_name = format!("sqrtdet{}", g.text);
        for name in [&inverse_name, &volume_name] {
            claim(&Name {
                text: name.clone(),
                pos: g.pos,
            })?;
        }
        let inv = spec
            .register_inverse(&inverse_name, family.clone())
            .map_err(|e| DslError::engine(g.pos, e))?;
        spec.register_sqrt_abs_det(&volume_name, family, inv)
            .map_err(|e| DslError::engine(g.pos, e))?;
    }
    for k in &file.constants {
        claim(&k.name)?;
        scope.constants.insert(
            k.name.text.clone(),
            ConstantTensor::from_value(&k.name, &k.value)?,
        );
    }
    for l in &file.lets {
        claim(&l.name)?;
        let mut idx = HashSet::new();
        for i in &l.indices {
            if !idx.insert(&i.text) {
                return Err(declaration(i.pos, format!("index `{}` repeats", i.text)));
            }
        }
        scope.lets.insert(l.name.text.clone(), l.clone());
    }
    let chart = spec.into_shared();

    let mut el = Elaborator::new(&chart, &scope, c.order);
    let density = el.eval(&file.lagrangian, &mut Vec::new())?;
    let lagrangian = Lagrangian::new(&chart, density);
    let reduced = match &file.reduced {
        None => None,
        Some(r) => {
            let density = el.eval(&r.lagrangian, &mut Vec::new())?;
            let n = chart.n();
            let mut components = Vec::with_capacity(n);
            for i in 0..n {
                let mut env = vec![(r.alpha_index.text.clone(), i)];
                components.push(el.eval(&r.alpha, &mut env)?);
            }
            let order = components.iter().map(|a| a.jet_order()).max().unwrap_or(0);
            let mut alpha = DiffForm::zero(&chart, n - 1, order);
            for (i, a) in components.iter().enumerate() {
                alpha = alpha.add(&DiffForm::omega_i(&chart, i).mul_scalar(a));
            }
            Some(ReducedInputs {
                lagrangian: Lagrangian::new(&chart, density),
                alpha,
            })
        }
    };
    Ok(Problem {
        declared_order: c.order,
        chart,
        lagrangian,
        reduced,
        scope,
        file,
    })
}

type Env = Vec<(String, usize)>;

struct Elaborator<'a> {
    chart: &'a Chart,
    scope: &'a Scope,
    order: usize,
    memo: HashMap<(String, Vec<usize>), ScalarExpr>,
    active: HashSet<String>,
}

impl<'a> Elaborator<'a> {
    fn new(chart: &'a Chart, scope: &'a Scope, order: usize) -> Self {
        Elaborator {
            chart,
            scope,
            order,
            memo: HashMap::new(),
            active: HashSet::new(),
        }
    }

    fn undeclared(pos: Pos, name: &str) -> DslError {
        DslError::new(
            ErrorKind::UndeclaredIdentifier,
            pos,
            format!("undeclared identifier `{name}`"),
        )
    }

    fn out_of_range(pos: Pos, what: &str, k: usize, bound: usize) -> DslError {
        DslError::new(
            ErrorKind::IndexOutOfRange,
            pos,
            format!("index out of range: {what} index {k} must be below {bound}"),
        )
    }

    fn arity(pos: Pos, name: &str, want: usize, got: usize) -> DslError {
        DslError::new(
            ErrorKind::DimensionMismatch,
            pos,
            format!("`{name}` takes {want} indices, got {got}"),
        )
    }

    fn index(&self, ix: &IndexArg, env: &Env) -> Result<usize, DslError> {
        match ix {
            IndexArg::Lit(k, _) => Ok(*k),
            IndexArg::Name(n) => {
                if let Some((_, v)) = env.iter().rev().find(|(b, _)| *b == n.text) {
                    return Ok(*v);
                }
                self.chart
                    .find_base(&n.text)
                    .ok_or_else(|| Self::undeclared(n.pos, &n.text))
            }
        }
    }

    fn indices(&self, ix: &[IndexArg], env: &Env) -> Result<Vec<usize>, DslError> {
        ix.iter().map(|a| self.index(a, env)).collect()
    }

    fn base_indices(&self, ix: &[IndexArg], env: &Env, what: &str) -> Result<Vec<usize>, DslError> {
        let n = self.chart.n();
        let mut out = Vec::with_capacity(ix.len());
        for a in ix {
            let k = self.index(a, env)?;
            if k >= n {
                return Err(Self::out_of_range(a.pos(), what, k, n));
            }
            out.push(k);
        }
        Ok(out)
    }

    /// Field named by `phi`, `A_0` or `A[j]`.
    fn field_ref(&self, target: &Expr, env: &Env) -> Result<Option<FieldId>, DslError> {
        let ExprKind::Ref(name, ix) = &target.kind else {
            return Ok(None);
        };
        if env.iter().any(|(b, _)| b == name) || self.scope.lets.contains_key(name) {
            return Ok(None);
        }
        if let Some(fam) = self.scope.families.get(name) {
            if ix.len() != fam.dims.len() {
                return Err(Self::arity(target.pos, name, fam.dims.len(), ix.len()));
            }
            let mut k = Vec::with_capacity(ix.len());
            for (a, d) in ix.iter().zip(&fam.dims) {
                let v = self.index(a, env)?;
                if v >= *d {
                    return Err(Self::out_of_range(a.pos(), name, v, *d));
                }
                k.push(v);
            }
            return Ok(fam.field(&k));
        }
        match self.chart.find_field(name) {
            Some(f) if ix.is_empty() => Ok(Some(f)),
            Some(_) => Err(Self::arity(target.pos, name, 0, ix.len())),
            None => Ok(None),
        }
    }

    fn check_order(&self, pos: Pos, k: usize) -> Result<(), DslError> {
        if k > self.order {
            return Err(DslError::new(
                ErrorKind::OrderOverflow,
                pos,
                format!(
                    "derivative order beyond declared max ({k} > {})",
                    self.order
                ),
            ));
        }
        Ok(())
    }

    fn eval(&mut self, e: &Expr, env: &mut Env) -> Result<ScalarExpr, DslError> {
        match &e.kind {
            ExprKind::Int(v) => Ok(ScalarExpr::constant(Q::from_big(
                BigRational::from_integer(v.clone()),
            ))),
            ExprKind::Ref(name, ix) => self.reference(e.pos, name, ix, env),
            ExprKind::Deriv(target, ix) => {
                let field = self.field_ref(target, env)?.ok_or_else(|| {
                    DslError::new(
                        ErrorKind::DimensionMismatch,
                        target.pos,
                        "D applies to a field; use dtot for expressions",
                    )
                })?;
                self.check_order(e.pos, ix.len())?;
                let j = self.base_indices(ix, env, "derivative")?;
                Ok(ScalarExpr::var(Var::fiber(field, MultiIndex::new(&j))))
            }
            ExprKind::TotalDeriv(target, ix) => {
                let mut v = self.eval(target, env)?;
                for i in self.base_indices(ix, env, "derivative")? {
                    v = total_derivative(self.chart, &v, i)
                        .map_err(|err| DslError::engine(e.pos, err))?;
                }
                self.check_order(e.pos, v.jet_order())?;
                Ok(v)
            }
            ExprKind::Sum(binders, body) => {
                let n = self.chart.n();
                let k = binders.len();
                let mut acc = ScalarExpr::zero();
                let mut counter = vec![0usize; k];
                loop {
                    for (b, v) in binders.iter().zip(&counter) {
                        env.push((b.text.clone(), *v));
                    }
                    let term = self.eval(body, env);
                    env.truncate(env.len() - k);
                    acc = acc.add(&term?);
                    // odometer over 0..n in each binder
                    let mut p = k;
                    loop {
                        if p == 0 {
                            return Ok(acc);
                        }
                        p -= 1;
                        counter[p] += 1;
                        if counter[p] < n {
                            break;
                        }
                        counter[p] = 0;
                    }
                }
            }
            ExprKind::Neg(x) => Ok(self.eval(x, env)?.neg()),
            ExprKind::Add(a, b) => Ok(self.eval(a, env)?.add(&self.eval(b, env)?)),
            ExprKind::Sub(a, b) => Ok(self.eval(a, env)?.sub(&self.eval(b, env)?)),
            ExprKind::Mul(a, b) => Ok(self.eval(a, env)?.mul(&self.eval(b, env)?)),
            ExprKind::Div(a, b) => {
                let num = self.eval(a, env)?;
                let den = self.eval(b, env)?;
                num.div(&den)
                    .ok_or_else(|| DslError::new(ErrorKind::Engine, e.pos, "division by zero"))
            }
            ExprKind::Pow(b, k) => {
                if k.abs() > MAX_EXPONENT {
                    return Err(DslError::new(
                        ErrorKind::Engine,
                        e.pos,
                        format!("exponent {k} exceeds {MAX_EXPONENT}"),
                    ));
                }
                self.eval(b, env)?
                    .pow(*k)
                    .ok_or_else(|| DslError::new(ErrorKind::Engine, e.pos, "division by zero"))
            }
        }
    }

    fn reference(
        &mut self,
        pos: Pos,
        name: &str,
        ix: &[IndexArg],
        env: &mut Env,
    ) -> Result<ScalarExpr, DslError> {
        if env.iter().any(|(b, _)| b == name) {
            return Err(DslError::new(
                ErrorKind::DimensionMismatch,
                pos,
                format!("index `{name}` used as a value"),
            ));
        }
        let scope = self.scope;
        if let Some(l) = scope.lets.get(name) {
            if ix.len() != l.indices.len() {
                return Err(Self::arity(pos, name, l.indices.len(), ix.len()));
            }
            let args = self.indices(ix, env)?;
            let key = (name.to_string(), args.clone());
            if let Some(v) = self.memo.get(&key) {
                return Ok(v.clone());
            }
            if !self.active.insert(name.to_string()) {
                return Err(DslError::new(
                    ErrorKind::Declaration,
                    pos,
                    format!("`{name}` is defined in terms of itself"),
                ));
            }
            let mut inner: Env = l.indices.iter().map(|i| i.text.clone()).zip(args).collect();
            let v = self.eval(&l.body, &mut inner);
            self.active.remove(name);
            let v = v?;
            self.memo.insert(key, v.clone());
            return Ok(v);
        }
        if let Some(t) = scope.constants.get(name) {
            if ix.len() != t.rank() {
                return Err(Self::arity(pos, name, t.rank(), ix.len()));
            }
            let k = self.indices(ix, env)?;
            for (a, (v, d)) in ix.iter().zip(k.iter().zip(t.dims())) {
                if v >= d {
                    return Err(Self::out_of_range(a.pos(), name, *v, *d));
                }
            }
            return Ok(ScalarExpr::constant(t.get(&k).expect("checked range")));
        }
        if let Some(p) = self.chart.find_param(name) {
            if !ix.is_empty() {
                return Err(Self::arity(pos, name, 0, ix.len()));
            }
            return Ok(ScalarExpr::var(Var::param(p)));
        }
        let target = Expr::new(ExprKind::Ref(name.to_string(), ix.to_vec()), pos);
        if let Some(f) = self.field_ref(&target, env)? {
            return Ok(ScalarExpr::var(Var::fiber(f, MultiIndex::EMPTY)));
        }
        if let Some(s) = self.chart.find_symbol(name) {
            let arity = self.chart.symbol(s).expect("found").arity;
            if ix.len() != arity {
                return Err(Self::arity(pos, name, arity, ix.len()));
            }
            let k = self.base_indices(ix, env, name)?;
            let v = self
                .chart
                .atom(s, &k)
                .map_err(|err| DslError::engine(pos, err))?;
            return Ok(ScalarExpr::var(v));
        }
        if let Some(i) = self.chart.find_base(name) {
            if !ix.is_empty() {
                return Err(Self::arity(pos, name, 0, ix.len()));
            }
            return Ok(ScalarExpr::var(Var::base(i)));
        }
        Err(Self::undeclared(pos, name))
    }
}
