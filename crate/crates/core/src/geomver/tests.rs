use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::forms::VectorFieldSpec;
use crate::jet::{Monomial, Poly};
use crate::testing::{numbered_chart, Generator};
use crate::varcalc::{principal_lepage, reduced_lepage, Lagrangian};

fn y(s: usize, j: &[usize]) -> ScalarExpr {
    ScalarExpr::var(Var::fiber(s, MultiIndex::new(j)))
}

fn unit(n: usize, i: usize) -> TangentVector<Q> {
    let mut v = TangentVector::zero(n);
    v.base[i] = Q::one();
    v
}

#[test]
fn volume_form_on_coordinate_vectors() {
    let c = numbered_chart(3, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (p, _) = JetPoint::random(&c, 1, &mut rng).unwrap();
    let vs: Vec<_> = (0..3).map(|i| unit(3, i)).collect();
    assert_eq!(eval_form(&DiffForm::volume(&c), &p, &vs).unwrap(), Q::one());
}

#[test]
fn contact_form_kills_holonomic_lift() {
    let c = numbered_chart(2, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (p, _) = JetPoint::random(&c, 2, &mut rng).unwrap();
    let w = DiffForm::contact(&c, 0, MultiIndex::EMPTY);
    let mut vertical = TangentVector::<Q>::zero(2);
    vertical.fiber.insert((0, MultiIndex::EMPTY), Q::one());
    assert_eq!(eval_form(&w, &p, &[vertical]).unwrap(), Q::one());
    let mut lift = unit(2, 1);
    lift.fiber.insert(
        (0, MultiIndex::EMPTY),
        p.value(Var::fiber(0, MultiIndex::single(1))).unwrap(),
    );
    assert_eq!(eval_form(&w, &p, &[lift]).unwrap(), Q::zero());
}

#[test]
fn evaluation_is_antisymmetric() {
    let c = numbered_chart(2, 2);
    let mut g = Generator::new(&c, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let rho = g.form(2, 2, 4);
        let (p, _) = JetPoint::random(&c, required_order(&rho), &mut rng).unwrap();
        let a = TangentVector::random_rational(&c, 2, &mut rng);
        let b = TangentVector::random_rational(&c, 2, &mut rng);
        let ab = eval_form(&rho, &p, &[a.clone(), b.clone()]).unwrap();
        let ba = eval_form(&rho, &p, &[b, a]).unwrap();
        assert_eq!(ab, -ba);
    }
}

#[test]
fn principal_form_pulls_back_to_lagrangian() {
    let c = numbered_chart(2, 1);
    let mut g = Generator::new(&c, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..5 {
        let lag = Lagrangian::new(&c, g.expr(2, 3, 3));
        let theta = principal_lepage(&lag).unwrap().form;
        let section = SectionSpec::random(&c, 4, &mut rng);
        let points: Vec<Vec<Q>> = (0..5)
            .map(|k| vec![Q::new(k, 3), Q::new(1 - k, 2)])
            .collect();
        assert_eq!(
            section_pullback_check(&theta, &lag, &section, &points).unwrap(),
            Q::zero()
        );
    }
    // perturbing the horizontal coefficient is detected
    let lag = Lagrangian::new(&c, y(0, &[0]).mul(&y(0, &[0])));
    let bad = principal_lepage(&lag)
        .unwrap()
        .form
        .add(&DiffForm::volume(&c));
    let section = SectionSpec::random(&c, 3, &mut rng);
    assert!(
        section_pullback_check(&bad, &lag, &section, &[vec![Q::one(), Q::zero()]]).unwrap()
            > Q::zero()
    );
}

#[test]
fn finite_difference_of_cubic_section() {
    let c = numbered_chart(1, 1);
    let x = Var::base(0);
    let cube = Poly::from_terms([(Monomial::power(x, 3), Q::one())]);
    let section = SectionSpec::new(&c, vec![cube], vec![]).unwrap();
    let f = y(0, &[]).mul(&y(0, &[]));
    let at = [Q::one()];
    let coarse = finite_difference_check(&f, &section, 0, &at, &Q::new(1, 1000)).unwrap();
    let fine = finite_difference_check(&f, &section, 0, &at, &Q::new(1, 2000)).unwrap();
    assert!(coarse < 1e-4);
    assert!(
        (coarse / fine - 4.0).abs() < 0.01,
        "ratio {}",
        coarse / fine
    );
    let constant = ScalarExpr::int(3);
    assert_eq!(
        finite_difference_check(&constant, &section, 0, &at, &Q::new(1, 1000)).unwrap(),
        0.0
    );
}

#[test]
fn first_variation_formula_holds_numerically() {
    let c = numbered_chart(2, 1);
    // 𝓛 = ½(y_0² − y_1²) − y²
    let density = y(0, &[0])
        .mul(&y(0, &[0]))
        .sub(&y(0, &[1]).mul(&y(0, &[1])))
        .scale(&Q::new(1, 2))
        .sub(&y(0, &[]).mul(&y(0, &[])));
    let lag = Lagrangian::new(&c, density);
    let theta = principal_lepage(&lag).unwrap().form;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let scaling = VectorFieldSpec::new(&c, vec![ScalarExpr::zero(); 2], vec![y(0, &[])]).unwrap();
    let translation = VectorFieldSpec::translation(&c, 0);
    for field in [scaling, translation] {
        for _ in 0..3 {
            let section = SectionSpec::random(&c, 4, &mut rng);
            let x = [Q::new(1, 3), Q::new(-1, 2)];
            // central differences: the residual shrinks like h²
            let coarse =
                first_variation_residual(&theta, &lag, &field, &section, &x, &Q::new(1, 1000))
                    .unwrap();
            let fine =
                first_variation_residual(&theta, &lag, &field, &section, &x, &Q::new(1, 2000))
                    .unwrap();
            assert!(
                fine < 1e-4 && (coarse / fine - 4.0).abs() < 0.1,
                "residuals {coarse} {fine}"
            );
        }
    }
}

#[test]
fn hilbert_identities_at_minkowski_point() {
    let problem = HilbertProblem::new(4).unwrap();
    let mut values = BTreeMap::new();
    for i in 0..4 {
        values.insert(Var::base(i), Q::zero());
    }
    for v in problem.chart.coordinates_up_to(3) {
        if let Some((f, j)) = v.as_fiber() {
            let (a, b) = problem.metric.position(f).unwrap();
            let entry = match (j.is_empty(), a == b, a) {
                (true, true, 0) => Q::one(),
                (true, true, _) => Q::from_int(-1),
                _ => Q::zero(),
            };
            values.insert(v, entry);
        }
    }
    let p = JetPoint::new(&problem.chart, values).unwrap();
    for r in 0..4 {
        assert_eq!(
            p.eval_f64(&problem.reduced_derivative(0, 1, r)).unwrap(),
            0.0
        );
    }
    let theta = principal_lepage(&problem.lagrangian).unwrap().form;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let vs: Vec<_> = (0..4)
        .map(|_| TangentVector::random(&problem.chart, 3, &mut rng))
        .collect();
    let lhs = eval_form(&theta, &p, &vs).unwrap();
    let rhs = eval_form(&principal_lepage(&problem.reduced).unwrap().form, &p, &vs).unwrap()
        + eval_form(&problem.alpha.d().unwrap(), &p, &vs).unwrap();
    assert_eq!(lhs - rhs, 0.0);
}

#[test]
fn hilbert_suite_in_two_dimensions() {
    let report = hilbert_numeric_suite(2, 7, 20).unwrap();
    assert!(report.passed(), "{}", report.to_json());
    assert_eq!(report.to_json()["suite"], "hilbert");
}

#[test]
fn hilbert_relation_needs_exact_piece() {
    let problem = HilbertProblem::new(2).unwrap();
    let theta = principal_lepage(&problem.lagrangian).unwrap().form;
    let reduced = principal_lepage(&problem.reduced).unwrap().form;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (p, _) = JetPoint::random(&problem.chart, 3, &mut rng).unwrap();
    let vs: Vec<_> = (0..2)
        .map(|_| TangentVector::random(&problem.chart, 3, &mut rng))
        .collect();
    let gap = eval_form(&theta, &p, &vs).unwrap() - eval_form(&reduced, &p, &vs).unwrap();
    assert!(gap.abs() > 1e-6);
}

#[test]
fn hilbert_reduced_lepage_checks_split_numerically() {
    let problem = HilbertProblem::new(2).unwrap();
    let phi = reduced_lepage(&problem.lagrangian, &problem.reduced, &problem.alpha).unwrap();
    assert_eq!(phi.form.degree(), 2);
    let wrong = problem.alpha.scale(&Q::new(1, 2));
    let err = reduced_lepage(&problem.lagrangian, &problem.reduced, &wrong).unwrap_err();
    assert!(matches!(err, JetError::InvalidSplit(_)));
}
