use std::collections::BTreeMap;

use rand::Rng;

use super::{eval_form, required_order, JetPoint, Number, TangentVector};
use crate::forms::{interior_product, lie_derivative, DiffForm, VectorFieldSpec};
use crate::jet::{total_derivative, Chart, Monomial, MultiIndex, Poly, ScalarExpr, Var, Q};
use crate::varcalc::Lagrangian;
use crate::JetError;

/// Polynomial section `x ↦ (x, y^σ(x))` with fixed parameter values.
#[derive(Clone, Debug)]
pub struct SectionSpec {
    chart: Chart,
    components: Vec<Poly>,
    params: Vec<Q>,
}

impl SectionSpec {
    /// Each component must be a polynomial in the base coordinates.
    pub fn new(chart: &Chart, components: Vec<Poly>, params: Vec<Q>) -> Result<Self, JetError> {
        if components.len() != chart.m() || params.len() != chart.params().len() {
            return Err(JetError::InvalidArgument(
                "section needs one polynomial per field and a value per parameter".into(),
            ));
        }
        if components
            .iter()
            .any(|p| p.vars().iter().any(|v| !v.is_base()))
        {
            return Err(JetError::InvalidArgument(
                "section components must depend on base coordinates only".into(),
            ));
        }
        Ok(SectionSpec {
            chart: chart.clone(),
            components,
            params,
        })
    }

    /// Random section of total degree `degree` with small rational
    /// coefficients.
    pub fn random(chart: &Chart, degree: usize, rng: &mut impl Rng) -> Self {
        let n = chart.n();
        let mut components = Vec::with_capacity(chart.m());
        for _ in 0..chart.m() {
            let mut terms = Vec::new();
            for k in 0..=degree {
                for j in MultiIndex::all_of_length(n, k) {
                    if k > 1 && !rng.gen_bool(0.6) {
                        continue;
                    }
                    let mut m = Monomial::one();
                    for i in j.iter() {
                        m = m.mul(&Monomial::var(Var::base(i)));
                    }
                    terms.push((m, Q::new(rng.gen_range(-6..=6), rng.gen_range(1..=4))));
                }
            }
            components.push(Poly::from_terms(terms));
        }
        let params = (0..chart.params().len())
            .map(|_| Q::new(rng.gen_range(1..=6), rng.gen_range(1..=3)))
            .collect();
        SectionSpec {
            chart: chart.clone(),
            components,
            params,
        }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn components(&self) -> &[Poly] {
        &self.components
    }

    /// `J^order γ(x)`.
    pub fn jet_point(&self, x: &[Q], order: usize) -> Result<JetPoint, JetError> {
        let n = self.chart.n();
        if x.len() != n {
            return Err(JetError::InvalidArgument(format!(
                "base point needs {n} coordinates"
            )));
        }
        let mut values = BTreeMap::new();
        for (i, xi) in x.iter().enumerate() {
            values.insert(Var::base(i), xi.clone());
        }
        for (p, v) in self.params.iter().enumerate() {
            values.insert(Var::param(p), v.clone());
        }
        let mut at_x = |v: Var| -> Result<Q, JetError> {
            Ok(v.as_base().map_or_else(Q::zero, |i| x[i].clone()))
        };
        for (s, poly) in self.components.iter().enumerate() {
            for j in MultiIndex::all_up_to(n, order) {
                let mut d = poly.clone();
                for i in j.iter() {
                    d = d.derivative(Var::base(i));
                }
                values.insert(Var::fiber(s, j), d.eval_with(&mut at_x, &|q| q.clone())?);
            }
        }
        JetPoint::new(&self.chart, values)
    }

    /// Tangent vector of `J^order γ` along `∂/∂x^i` at `p`.
    fn prolonged_direction<T: Number>(
        &self,
        p: &JetPoint,
        i: usize,
        order: usize,
    ) -> Result<TangentVector<T>, JetError> {
        let n = self.chart.n();
        let mut v = TangentVector::<T>::zero(n);
        v.base[i] = T::from_q(&Q::one());
        for s in 0..self.chart.m() {
            for j in MultiIndex::all_up_to(n, order) {
                let k = j.with(i).expect("within bounds");
                v.fiber.insert((s, j), p.get::<T>(Var::fiber(s, k))?);
            }
        }
        Ok(v)
    }

    /// `(J γ*ρ)` on `∂_{i1}, ..., ∂_{ik}` at `x`.
    pub fn pullback_value<T: Number>(
        &self,
        rho: &DiffForm,
        x: &[Q],
        directions: &[usize],
    ) -> Result<T, JetError> {
        let order = required_order(rho);
        let p = self.jet_point(x, order + 1)?;
        let vectors = directions
            .iter()
            .map(|&i| self.prolonged_direction::<T>(&p, i, order))
            .collect::<Result<Vec<_>, _>>()?;
        eval_form(rho, &p, &vectors)
    }

    /// `f(J γ(x))`.
    pub fn compose<T: Number>(&self, f: &ScalarExpr, x: &[Q]) -> Result<T, JetError> {
        let p = self.jet_point(x, f.jet_order())?;
        p.eval(f)
    }
}

/// Largest `|J γ*ρ − J γ*λ|` on `(∂_1, ..., ∂_n)` over the given points,
/// in exact arithmetic.
pub fn section_pullback_check(
    rho: &DiffForm,
    lagrangian: &Lagrangian,
    section: &SectionSpec,
    points: &[Vec<Q>],
) -> Result<Q, JetError> {
    let n = section.chart().n();
    let all: Vec<usize> = (0..n).collect();
    let lambda = lagrangian.form();
    let mut worst = Q::zero();
    for x in points {
        let a: Q = section.pullback_value(rho, x, &all)?;
        let b: Q = section.pullback_value(&lambda, x, &all)?;
        let diff = (a - b).abs();
        if diff > worst {
            worst = diff;
        }
    }
    Ok(worst)
}

/// `|((f∘Jγ)(x + h e_i) − (f∘Jγ)(x − h e_i)) / 2h − (d_i f)∘Jγ(x)|`.
pub fn finite_difference_check(
    f: &ScalarExpr,
    section: &SectionSpec,
    i: usize,
    x: &[Q],
    h: &Q,
) -> Result<f64, JetError> {
    let chart = section.chart();
    let needs_float = f.contains_var_where(|v| v.is_atom());
    let shifted = |sign: i64| {
        let mut y = x.to_vec();
        y[i] = &y[i] + &(h * &Q::from_int(sign));
        y
    };
    let df = total_derivative(chart, f, i)?;
    if needs_float {
        let up: f64 = section.compose(f, &shifted(1))?;
        let down: f64 = section.compose(f, &shifted(-1))?;
        let centre: f64 = section.compose(&df, x)?;
        return Ok(((up - down) / (2.0 * h.to_f64()) - centre).abs());
    }
    let up: Q = section.compose(f, &shifted(1))?;
    let down: Q = section.compose(f, &shifted(-1))?;
    let centre: Q = section.compose(&df, x)?;
    let two_h = h * &Q::from_int(2);
    Ok(((up - down) / two_h - centre).abs().to_f64())
}

/// Residual of the first variation formula at `x`:
/// `Jγ*(L_{JΞ}λ) − Jγ*(i_{JΞ}dθ) − d Jγ*(i_{JΞ}θ)` on `(∂_1, ..., ∂_n)`,
/// the last term by central differences with step `h`.
pub fn first_variation_residual(
    theta: &DiffForm,
    lagrangian: &Lagrangian,
    field: &VectorFieldSpec,
    section: &SectionSpec,
    x: &[Q],
    h: &Q,
) -> Result<f64, JetError> {
    let n = section.chart().n();
    let all: Vec<usize> = (0..n).collect();
    let lie = lie_derivative(field, &lagrangian.form())?;
    let d_theta = theta.d()?;
    let r = d_theta
        .max_contact_index()
        .unwrap_or(0)
        .max(theta.max_contact_index().unwrap_or(0));
    let prolonged = field.prolong(r)?;
    let i_d_theta = interior_product(&prolonged, &d_theta)?;
    let i_theta = interior_product(&prolonged, theta)?;
    let lhs: Q = section.pullback_value(&lie, x, &all)?;
    let first: Q = section.pullback_value(&i_d_theta, x, &all)?;
    let mut divergence = Q::zero();
    for i in 0..n {
        let others: Vec<usize> = (0..n).filter(|&k| k != i).collect();
        let mut up = x.to_vec();
        up[i] = &up[i] + h;
        let mut down = x.to_vec();
        down[i] = &down[i] - h;
        let a: Q = section.pullback_value(&i_theta, &up, &others)?;
        let b: Q = section.pullback_value(&i_theta, &down, &others)?;
        let slope = (a - b) / (h * &Q::from_int(2));
        // d(c dx^0..î..) = (−1)^i ∂_i c ω_0
        divergence = if i % 2 == 0 {
            divergence + slope
        } else {
            divergence - slope
        };
    }
    Ok((lhs - first - divergence).abs().to_f64())
}
