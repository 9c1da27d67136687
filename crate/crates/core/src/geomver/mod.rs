//! Numeric verification: jet points, tangent vectors, test sections and
//! the Hilbert-example suite.

mod hilbert;
mod section;

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::forms::{BasisOneForm, DiffForm};
use crate::jet::calculus::coordinate_dependencies;
use crate::jet::{Chart, FieldId, MultiIndex, ScalarExpr, Var, Q};
use crate::JetError;

pub use hilbert::{hilbert_numeric_suite, HilbertProblem, HilbertReport};
pub use section::{
    finite_difference_check, first_variation_residual, section_pullback_check, SectionSpec,
};

/// Rejection threshold for sampled metrics.
pub const MIN_METRIC_DET: f64 = 1e-3;

/// Number type used for evaluation: exact rationals or floats.
pub trait Number:
    Clone
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_q(q: &Q) -> Self;
    /// Value of an opaque atom; exact arithmetic cannot represent them.
    fn from_atom(x: f64) -> Option<Self>;
    fn zero() -> Self {
        Self::from_q(&Q::zero())
    }
    fn to_f64(&self) -> f64;
}

impl Number for Q {
    fn from_q(q: &Q) -> Self {
        q.clone()
    }

    fn from_atom(_: f64) -> Option<Self> {
        None
    }

    fn to_f64(&self) -> f64 {
        Q::to_f64(self)
    }
}

impl Number for f64 {
    fn from_q(q: &Q) -> Self {
        q.to_f64()
    }

    fn from_atom(x: f64) -> Option<Self> {
        Some(x)
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

/// Numeric values of jet coordinates and parameters at a point, with the
/// opaque atoms evaluated through their hooks.
#[derive(Clone, Debug)]
pub struct JetPoint {
    chart: Chart,
    values: BTreeMap<Var, Q>,
    atoms: BTreeMap<Var, f64>,
}

impl JetPoint {
    /// Point with the given coordinate and parameter values. Every atom of
    /// the chart is evaluated; degenerate inputs are an error.
    pub fn new(chart: &Chart, values: BTreeMap<Var, Q>) -> Result<Self, JetError> {
        let mut atoms = BTreeMap::new();
        for (id, sym) in chart.symbols().iter().enumerate() {
            let dim = sym.rule.argument().dim();
            for idx in index_tuples(sym.arity, dim, sym.symmetric) {
                let atom = Var::atom(id, &idx);
                let mut lookup = |v: Var| {
                    values
                        .get(&v)
                        .map(|q| q.to_f64())
                        .ok_or_else(|| JetError::MissingAssignment(chart.var_name(v)))
                };
                let x = sym.rule.evaluate(&idx, &mut lookup)?;
                atoms.insert(atom, x);
            }
        }
        Ok(JetPoint {
            chart: chart.clone(),
            values,
            atoms,
        })
    }

    /// Random point with coordinates up to jet order `order`, entries in
    /// `[-2, 2]`. Metric families are resampled until `|det g|` clears
    /// [`MIN_METRIC_DET`]; the number of rejections is returned.
    pub fn random(
        chart: &Chart,
        order: usize,
        rng: &mut impl Rng,
    ) -> Result<(Self, usize), JetError> {
        let mut rejected = 0;
        loop {
            let mut values = BTreeMap::new();
            for i in 0..chart.n() {
                values.insert(Var::base(i), random_q(rng, 2, 64));
            }
            for p in 0..chart.params().len() {
                values.insert(Var::param(p), random_q(rng, 2, 64));
            }
            for v in chart.coordinates_up_to(order) {
                if v.is_fiber() {
                    values.insert(v, random_q(rng, 2, 64));
                }
            }
            let singular = chart.symbols().iter().any(|sym| {
                let mut lookup = |v: Var| Ok(values.get(&v).map_or(0.0, |q| q.to_f64()));
                match sym.rule.argument().numeric(&mut lookup) {
                    Ok(m) => m.determinant().abs() < MIN_METRIC_DET,
                    Err(_) => true,
                }
            });
            if singular {
                rejected += 1;
                continue;
            }
            match JetPoint::new(chart, values) {
                Ok(p) => return Ok((p, rejected)),
                Err(JetError::Degenerate { .. }) => rejected += 1,
                Err(e) => return Err(e),
            }
        }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn values(&self) -> &BTreeMap<Var, Q> {
        &self.values
    }

    pub fn value(&self, v: Var) -> Result<Q, JetError> {
        self.values
            .get(&v)
            .cloned()
            .ok_or_else(|| JetError::MissingAssignment(self.chart.var_name(v)))
    }

    /// Value of any variable as `T`; atoms need a float type.
    pub fn get<T: Number>(&self, v: Var) -> Result<T, JetError> {
        if v.is_atom() {
            let x = self
                .atoms
                .get(&v)
                .ok_or_else(|| JetError::MissingAssignment(self.chart.var_name(v)))?;
            return T::from_atom(*x).ok_or_else(|| {
                JetError::InvalidArgument(format!(
                    "{} needs floating-point evaluation",
                    self.chart.var_name(v)
                ))
            });
        }
        Ok(T::from_q(&self.value(v)?))
    }

    pub fn eval<T: Number>(&self, e: &ScalarExpr) -> Result<T, JetError> {
        e.eval_with(&mut |v| self.get::<T>(v), &|q| T::from_q(q))
    }

    pub fn eval_exact(&self, e: &ScalarExpr) -> Result<Q, JetError> {
        self.eval::<Q>(e)
    }

    pub fn eval_f64(&self, e: &ScalarExpr) -> Result<f64, JetError> {
        self.eval::<f64>(e)
    }

    /// Sum of absolute values of the numerator terms over the absolute
    /// denominator: the scale against which float cancellation is judged.
    pub fn magnitude(&self, e: &ScalarExpr) -> Result<f64, JetError> {
        let mut acc = 0.0;
        for (m, c) in e.num().terms() {
            let mut t = c.to_f64().abs();
            for &(v, k) in m.factors() {
                t *= self.get::<f64>(v)?.abs().powi(k as i32);
            }
            acc += t;
        }
        let den = self
            .eval_f64(&ScalarExpr::from_poly(e.den().clone()))?
            .abs();
        Ok(acc / den)
    }
}

fn random_q(rng: &mut impl Rng, bound: i64, den: i64) -> Q {
    Q::new(rng.gen_range(-bound * den..=bound * den), den)
}

fn index_tuples(arity: usize, dim: usize, symmetric: bool) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..arity {
        let mut next = Vec::new();
        for t in &out {
            let start = if symmetric {
                t.last().copied().unwrap_or(0)
            } else {
                0
            };
            for i in start..dim {
                let mut u = t.clone();
                u.push(i);
                next.push(u);
            }
        }
        out = next;
    }
    out
}

/// Tangent vector at a jet point in coordinate components; absent
/// components are zero.
#[derive(Clone, Debug)]
pub struct TangentVector<T> {
    pub base: Vec<T>,
    pub fiber: BTreeMap<(FieldId, MultiIndex), T>,
}

impl<T: Number> TangentVector<T> {
    pub fn zero(n: usize) -> Self {
        TangentVector {
            base: vec![T::zero(); n],
            fiber: BTreeMap::new(),
        }
    }

    fn fiber_component(&self, s: FieldId, j: &MultiIndex) -> T {
        self.fiber.get(&(s, *j)).cloned().unwrap_or_else(T::zero)
    }
}

impl TangentVector<f64> {
    /// Random vector with fiber components up to order `order`, entries in
    /// `[-1, 1]`.
    pub fn random(chart: &Chart, order: usize, rng: &mut impl Rng) -> Self {
        let base = (0..chart.n()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut fiber = BTreeMap::new();
        for v in chart.coordinates_up_to(order) {
            if let Some(key) = v.as_fiber() {
                fiber.insert(key, rng.gen_range(-1.0..1.0));
            }
        }
        TangentVector { base, fiber }
    }
}

impl TangentVector<Q> {
    pub fn random_rational(chart: &Chart, order: usize, rng: &mut impl Rng) -> Self {
        let base = (0..chart.n()).map(|_| random_q(rng, 1, 16)).collect();
        let mut fiber = BTreeMap::new();
        for v in chart.coordinates_up_to(order) {
            if let Some(key) = v.as_fiber() {
                fiber.insert(key, random_q(rng, 1, 16));
            }
        }
        TangentVector { base, fiber }
    }
}

fn one_form_value<T: Number>(
    p: &JetPoint,
    b: &BasisOneForm,
    v: &TangentVector<T>,
) -> Result<T, JetError> {
    match *b {
        BasisOneForm::Dx(i) => Ok(v.base[i].clone()),
        BasisOneForm::DyTop(s, j) => Ok(v.fiber_component(s, &j)),
        // ω^σ_J(v) = v^σ_J − y^σ_{Jj} v^j
        BasisOneForm::Contact(s, j) => {
            let mut acc = v.fiber_component(s, &j);
            for (i, vi) in v.base.iter().enumerate() {
                if *vi == T::zero() {
                    continue;
                }
                let k = j
                    .with(i)
                    .ok_or_else(|| JetError::MissingAssignment(format!("index {j}+{i}")))?;
                acc = acc - p.get::<T>(Var::fiber(s, k))? * vi.clone();
            }
            Ok(acc)
        }
    }
}

fn determinant<T: Number>(rows: &[Vec<T>]) -> T {
    fn rec<T: Number>(rows: &[Vec<T>], col: usize, used: &mut Vec<bool>) -> T {
        let k = rows.len();
        if col == k {
            return T::from_q(&Q::one());
        }
        let mut acc = T::zero();
        let mut sign = true;
        for r in 0..k {
            if used[r] {
                continue;
            }
            let entry = rows[r][col].clone();
            if entry != T::zero() {
                used[r] = true;
                let minor = rec(rows, col + 1, used);
                used[r] = false;
                let t = entry * minor;
                acc = if sign { acc + t } else { acc - t };
            }
            sign = !sign;
        }
        acc
    }
    rec(rows, 0, &mut vec![false; rows.len()])
}

/// `ρ(v_1, ..., v_k)` at a jet point.
pub fn eval_form<T: Number>(
    rho: &DiffForm,
    p: &JetPoint,
    vectors: &[TangentVector<T>],
) -> Result<T, JetError> {
    Ok(eval_form_with_magnitude(rho, p, vectors)?.0)
}

/// Value together with the sum of absolute term contributions.
pub fn eval_form_with_magnitude<T: Number>(
    rho: &DiffForm,
    p: &JetPoint,
    vectors: &[TangentVector<T>],
) -> Result<(T, f64), JetError> {
    if vectors.len() != rho.degree() {
        return Err(JetError::InvalidArgument(format!(
            "form of degree {} evaluated on {} vectors",
            rho.degree(),
            vectors.len()
        )));
    }
    let mut cache: BTreeMap<BasisOneForm, Vec<T>> = BTreeMap::new();
    let mut total = T::zero();
    let mut magnitude = 0.0;
    for (m, c) in rho.terms() {
        let mut rows = Vec::with_capacity(m.degree());
        for b in m.factors() {
            if !cache.contains_key(b) {
                let vals = vectors
                    .iter()
                    .map(|v| one_form_value(p, b, v))
                    .collect::<Result<Vec<_>, _>>()?;
                cache.insert(*b, vals);
            }
            rows.push(cache[b].clone());
        }
        let det = determinant(&rows);
        if det == T::zero() {
            continue;
        }
        let coeff: T = p.eval(c)?;
        let term = coeff * det.clone();
        magnitude += p.magnitude(c)? * det.to_f64().abs();
        total = total + term;
    }
    Ok((total, magnitude))
}

/// Largest relative value of `residual` over random points, relative to
/// the magnitude of the residual terms and of the related `parts`.
pub fn numeric_zero_check(
    chart: &Chart,
    residual: &ScalarExpr,
    parts: &[ScalarExpr],
    seed: u64,
    points: usize,
) -> Result<f64, JetError> {
    let order = std::iter::once(residual)
        .chain(parts)
        .flat_map(|e| coordinate_dependencies(chart, e))
        .map(|v| v.jet_order())
        .max()
        .unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..points {
        let (p, _) = JetPoint::random(chart, order, &mut rng)?;
        let value = p.eval_f64(residual)?;
        let mut scale = p.magnitude(residual)?.max(1.0);
        for e in parts {
            scale = scale.max(p.magnitude(e)?);
        }
        worst = worst.max(value.abs() / scale);
    }
    Ok(worst)
}

/// One failed check in a numeric suite.
#[derive(Clone, Debug)]
pub struct SuiteFailure {
    pub trial: usize,
    pub check: String,
    pub residual: f64,
}

/// Result of evaluating forms that should vanish at random points.
#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub trials: usize,
    pub max_residual: f64,
    pub failures: Vec<SuiteFailure>,
}

impl SuiteReport {
    pub fn new(suite: &str, seed: u64, trials: usize) -> Self {
        SuiteReport {
            suite: suite.to_string(),
            seed,
            trials,
            max_residual: 0.0,
            failures: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "suite": self.suite,
            "seed": self.seed,
            "trials": self.trials,
            "max_residual": self.max_residual,
            "failures": self.failures.iter().map(|f| json!({
                "trial": f.trial,
                "check": f.check,
                "residual": f.residual,
            })).collect::<Vec<_>>(),
        })
    }

    /// Evaluates each named form on random tangent vectors at `trials`
    /// random points. Forms without opaque atoms are evaluated exactly and
    /// must vanish; otherwise the relative residual must stay within
    /// `tolerance`.
    pub fn check_forms(
        &mut self,
        forms: &[(&str, &DiffForm)],
        tolerance: f64,
    ) -> Result<(), JetError> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        for trial in 0..self.trials {
            for (name, rho) in forms {
                let chart = rho.chart();
                let order = required_order(rho);
                let (p, _) = JetPoint::random(chart, order, &mut rng)?;
                let exact = !rho
                    .terms()
                    .any(|(_, c)| c.contains_var_where(|v| v.is_atom()));
                let residual = if exact {
                    let vs: Vec<_> = (0..rho.degree())
                        .map(|_| TangentVector::random_rational(chart, order, &mut rng))
                        .collect();
                    eval_form::<Q>(rho, &p, &vs)?.to_f64().abs()
                } else {
                    let vs: Vec<_> = (0..rho.degree())
                        .map(|_| TangentVector::random(chart, order, &mut rng))
                        .collect();
                    let (value, magnitude) = eval_form_with_magnitude::<f64>(rho, &p, &vs)?;
                    value.abs() / magnitude.max(1.0)
                };
                self.max_residual = self.max_residual.max(residual);
                let failed = if exact {
                    residual != 0.0
                } else {
                    !(residual <= tolerance)
                };
                if failed {
                    self.failures.push(SuiteFailure {
                        trial,
                        check: name.to_string(),
                        residual,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Jet order a point needs to evaluate `rho` on arbitrary vectors.
pub fn required_order(rho: &DiffForm) -> usize {
    let contact = rho.max_contact_index().map_or(0, |k| k + 1);
    contact.max(rho.coefficient_order())
}

#[cfg(test)]
mod tests;
