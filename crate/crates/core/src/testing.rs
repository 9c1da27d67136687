//! Seeded random generators for property tests and numeric checks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::forms::{BasisOneForm, DiffForm};
use crate::jet::{Chart, ChartSpec, Monomial, MultiIndex, Poly, ScalarExpr, Var, Q};

/// Random expressions and forms over a fixed chart.
pub struct Generator {
    rng: ChaCha8Rng,
    chart: Chart,
}

impl Generator {
    pub fn new(chart: &Chart, seed: u64) -> Self {
        Generator {
            rng: ChaCha8Rng::seed_from_u64(seed),
            chart: chart.clone(),
        }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// Small nonzero rational.
    pub fn coeff(&mut self) -> Q {
        loop {
            let n = self.rng.gen_range(-4i64..=4);
            if n != 0 {
                let d = self.rng.gen_range(1i64..=3);
                return Q::new(n, d);
            }
        }
    }

    /// Random base or fiber coordinate with `|J| <= max_order`.
    pub fn coordinate(&mut self, max_order: usize, base_weight: f64) -> Var {
        let n = self.chart.n();
        if self.rng.gen_bool(base_weight) {
            return Var::base(self.rng.gen_range(0..n));
        }
        let s = self.rng.gen_range(0..self.chart.m());
        let k = self.rng.gen_range(0..=max_order);
        let idx: Vec<usize> = (0..k).map(|_| self.rng.gen_range(0..n)).collect();
        Var::fiber(s, MultiIndex::new(&idx))
    }

    /// Random polynomial in base and fiber coordinates.
    pub fn poly(&mut self, max_order: usize, max_degree: usize, max_terms: usize) -> Poly {
        let terms = self.rng.gen_range(1..=max_terms.max(1));
        let mut out = Vec::with_capacity(terms);
        for _ in 0..terms {
            let deg = self.rng.gen_range(0..=max_degree);
            let mut m = Monomial::one();
            for _ in 0..deg {
                let v = self.coordinate(max_order, 0.25);
                m = m.mul(&Monomial::var(v));
            }
            out.push((m, self.coeff()));
        }
        Poly::from_terms(out)
    }

    pub fn expr(&mut self, max_order: usize, max_degree: usize, max_terms: usize) -> ScalarExpr {
        ScalarExpr::from_poly(self.poly(max_order, max_degree, max_terms))
    }

    /// Random basis one-form; contact factors have `|J| < max_order` when
    /// `max_order > 0`.
    pub fn basis_one_form(&mut self, max_order: usize) -> BasisOneForm {
        let n = self.chart.n();
        if max_order == 0 || self.rng.gen_bool(0.5) {
            return BasisOneForm::Dx(self.rng.gen_range(0..n));
        }
        let s = self.rng.gen_range(0..self.chart.m());
        let k = self.rng.gen_range(0..max_order);
        let idx: Vec<usize> = (0..k).map(|_| self.rng.gen_range(0..n)).collect();
        BasisOneForm::Contact(s, MultiIndex::new(&idx))
    }

    /// Random form of the given degree whose coefficients have order at
    /// most `max_order`.
    pub fn form(&mut self, degree: usize, max_order: usize, max_terms: usize) -> DiffForm {
        let terms = self.rng.gen_range(1..=max_terms.max(1));
        let mut list = Vec::new();
        for _ in 0..terms {
            let mut factors = Vec::with_capacity(degree);
            let mut guard = 0;
            while factors.len() < degree && guard < 64 {
                let b = self.basis_one_form(max_order);
                if !factors.contains(&b) {
                    factors.push(b);
                }
                guard += 1;
            }
            if factors.len() < degree {
                continue;
            }
            let c = self.expr(max_order, 2, 3);
            list.push((factors, c));
        }
        DiffForm::from_terms(&self.chart, degree, max_order, list)
    }

    /// Random horizontal `(n-1)`-form `α^i ω_i` with polynomial coefficients.
    pub fn horizontal_n_minus_1(
        &mut self,
        max_order: usize,
        max_degree: usize,
        max_terms: usize,
    ) -> DiffForm {
        let n = self.chart.n();
        let mut out = DiffForm::zero(&self.chart, n - 1, max_order);
        for i in 0..n {
            let a = self.expr(max_order, max_degree, max_terms);
            out = out.add(&DiffForm::omega_i(&self.chart, i).mul_scalar(&a));
        }
        out
    }

    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        items.choose(&mut self.rng).expect("nonempty")
    }
}

/// Chart with generated names and a generous order bound.
pub fn numbered_chart(n: usize, m: usize) -> Chart {
    ChartSpec::numbered(n, m)
        .with_max_order(8)
        .expect("valid order")
        .into_shared()
}
