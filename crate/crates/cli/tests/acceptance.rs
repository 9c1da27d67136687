//! Acceptance suite: one line per criterion, non-zero exit on any failure.

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;

use jetforms_core::forms::{form_to_text, DiffForm};
use jetforms_core::geomver::{
    eval_form, eval_form_with_magnitude, finite_difference_check, required_order,
    section_pullback_check, JetPoint, SectionSpec, TangentVector,
};
use jetforms_core::jet::{
    partial_derivative, Chart, JetCoordinate, MultiIndex, ScalarExpr, Var, Q,
};
use jetforms_core::testing::{numbered_chart, Generator};
use jetforms_core::varcalc::{
    canonical_lepage, canonical_split, euler_lagrange, extract_source_form, first_order_nu,
    fundamental_lepage, homotopy_operator, principal_lepage, reduced_lepage,
    verify_lepage_conditions, Lagrangian, SourceForm,
};
use jetforms_dsl::{load, Problem};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn engine<T>(r: Result<T, impl std::fmt::Display>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

/// Pairs of forms shown equal symbolically, re-evaluated numerically by the
/// last criterion.
#[derive(Default)]
struct Recorded {
    pairs: Vec<(String, DiffForm, DiffForm)>,
    lepage: Vec<(DiffForm, Lagrangian)>,
}

impl Recorded {
    fn pair(&mut self, label: impl Into<String>, lhs: &DiffForm, rhs: &DiffForm) {
        self.pairs.push((label.into(), lhs.clone(), rhs.clone()));
    }
}

fn problem_text(name: &str) -> Result<String, String> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../problems")
        .join(name);
    fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))
}

fn problem(name: &str) -> Result<Problem, String> {
    engine(load(&problem_text(name)?, 8))
}

fn eta(i: usize) -> Q {
    if i == 0 {
        Q::one()
    } else {
        Q::from_int(-1)
    }
}

fn y(s: usize, j: &[usize]) -> ScalarExpr {
    ScalarExpr::var(Var::fiber(s, MultiIndex::new(j)))
}

fn contact(c: &Chart, s: usize, j: &[usize]) -> DiffForm {
    DiffForm::contact(c, s, MultiIndex::new(j))
}

fn scalar_form(c: &Chart, e: &ScalarExpr) -> DiffForm {
    DiffForm::scalar(c, e.clone())
}

fn horizontal(c: &Chart, components: &[ScalarExpr]) -> DiffForm {
    components
        .iter()
        .enumerate()
        .fold(DiffForm::zero(c, c.n() - 1, 0), |acc, (i, a)| {
            acc.add(&DiffForm::omega_i(c, i).mul_scalar(a))
        })
}

fn trivial(c: &Chart, alpha: &DiffForm) -> Result<Lagrangian, String> {
    Ok(Lagrangian::new(
        c,
        engine(alpha.d())?.horizontal().volume_coefficient(),
    ))
}

fn klein_gordon(rec: &mut Recorded) -> Outcome {
    let p = problem("kg.jf")?;
    let c = &p.chart;
    let lag = &p.lagrangian;
    let m2 = ScalarExpr::var(Var::param(0));
    let phi = y(0, &[]);
    let box_phi = (0..4).fold(ScalarExpr::zero(), |acc, i| {
        acc.add(&y(0, &[i, i]).scale(&eta(i)))
    });

    // 𝓔 = −(η^{ij}φ_{ij} + m²φ)
    let el = engine(euler_lagrange(lag))?;
    let expected_el = engine(SourceForm::new(c, vec![box_phi.add(&m2.mul(&phi)).neg()]))?;
    ensure!(el == expected_el, "Euler-Lagrange form differs");

    // 𝓛_VT = −½(η^{ij}φφ_{ij} + m²φ²)
    let split = engine(canonical_split(lag))?;
    let half = Q::new(1, 2);
    let vt = phi
        .mul(&box_phi)
        .add(&m2.mul(&phi).mul(&phi))
        .scale(&half)
        .neg();
    ensure!(
        split.lagrangian_vt.density() == &vt,
        "Vainberg-Tonti Lagrangian differs"
    );

    // α^i = ½η^{ij}φφ_j, compared through dα
    let alpha: Vec<ScalarExpr> = (0..4)
        .map(|i| phi.mul(&y(0, &[i])).scale(&(&eta(i) * &half)))
        .collect();
    let d_alpha = engine(horizontal(c, &alpha).d())?;
    ensure!(split.d_alpha == d_alpha, "dα differs");
    ensure!(split.reassembled() == *lag, "split does not reassemble");

    let nu = engine(first_order_nu(lag))?;
    ensure!(nu.nu.is_zero() && nu.holds(), "ν does not vanish");

    // Φ = Θ = 𝓛ω₀ + η^{ij}φ_j ω ∧ ω_i
    let mut expected = lag.form();
    for i in 0..4 {
        expected = expected.add(
            &contact(c, 0, &[])
                .wedge(&DiffForm::omega_i(c, i))
                .mul_scalar(&y(0, &[i]).scale(&eta(i))),
        );
    }
    let theta = engine(principal_lepage(lag))?.form;
    let phi_form = engine(canonical_lepage(lag))?.form;
    ensure!(theta == expected, "principal form differs");
    ensure!(phi_form == expected, "canonical form differs");

    rec.pair("kg: euler-lagrange", &el.to_form(), &expected_el.to_form());
    rec.pair(
        "kg: vainberg-tonti",
        &split.lagrangian_vt.form(),
        &scalar_form(c, &vt).wedge(&DiffForm::volume(c)),
    );
    rec.pair("kg: d alpha", &split.d_alpha, &d_alpha);
    rec.pair("kg: canonical", &phi_form, &expected);
    rec.lepage.push((phi_form, lag.clone()));
    Ok("E, L_VT, α, dα, ν, Φ = Θ exact".into())
}

struct Maxwell {
    chart: Chart,
}

impl Maxwell {
    fn a(&self, k: usize) -> ScalarExpr {
        y(k, &[])
    }

    /// `A^k`
    fn a_up(&self, k: usize) -> ScalarExpr {
        y(k, &[]).scale(&eta(k))
    }

    /// `F_{ij} = A_{j,i} − A_{i,j}`
    fn f_low(&self, i: usize, j: usize) -> ScalarExpr {
        y(j, &[i]).sub(&y(i, &[j]))
    }

    fn f_up(&self, i: usize, j: usize) -> ScalarExpr {
        self.f_low(i, j).scale(&(&eta(i) * &eta(j)))
    }

    /// `d_i F^{ij}` summed over `i`
    fn div_f(&self, j: usize) -> ScalarExpr {
        (0..4).fold(ScalarExpr::zero(), |acc, i| {
            acc.add(
                &y(j, &[i, i])
                    .sub(&y(i, &[i, j]))
                    .scale(&(&eta(i) * &eta(j))),
            )
        })
    }

    fn w(&self, k: usize, j: &[usize]) -> DiffForm {
        contact(&self.chart, k, j)
    }

    fn om(&self, i: usize) -> DiffForm {
        DiffForm::omega_i(&self.chart, i)
    }

    fn eta_q(i: usize, j: usize) -> Q {
        if i == j {
            eta(i)
        } else {
            Q::zero()
        }
    }
}

fn electromagnetic(rec: &mut Recorded) -> Outcome {
    let p = problem("em.jf")?;
    let c = p.chart.clone();
    let lag = &p.lagrangian;
    let em = Maxwell { chart: c.clone() };
    let four = Q::from_int(4);

    for i in 0..4 {
        for j in 0..4 {
            let got = engine(partial_derivative(
                &c,
                lag.density(),
                JetCoordinate::Fiber(j, MultiIndex::single(i)),
            ))?;
            ensure!(got == em.f_up(i, j).scale(&four), "∂L/∂A_{j},{i} differs");
        }
    }

    let mut theta_expected = lag.form();
    for i in 0..4 {
        for k in 0..4 {
            theta_expected = theta_expected.add(
                &em.w(k, &[])
                    .wedge(&em.om(i))
                    .mul_scalar(&em.f_up(i, k).scale(&four)),
            );
        }
    }
    let theta = engine(principal_lepage(lag))?.form;
    ensure!(theta == theta_expected, "principal form differs");

    let split = engine(canonical_split(lag))?;
    let vt = (0..4).fold(ScalarExpr::zero(), |acc, j| {
        acc.add(&em.a(j).mul(&em.div_f(j)).scale(&Q::from_int(-2)))
    });
    ensure!(
        split.lagrangian_vt.density() == &vt,
        "Vainberg-Tonti Lagrangian differs"
    );

    let alpha: Vec<ScalarExpr> = (0..4)
        .map(|i| {
            (0..4).fold(ScalarExpr::zero(), |acc, l| {
                acc.add(&em.a(l).mul(&em.f_up(i, l)).scale(&Q::from_int(2)))
            })
        })
        .collect();
    let alpha_form = horizontal(&c, &alpha);
    ensure!(split.alpha == alpha_form, "α differs");
    let d_alpha = engine(alpha_form.d())?;
    ensure!(split.d_alpha == d_alpha, "dα differs");

    // p₁dν = (A^{i,k} − A^j_{,j}η^{ik}) ω̃_k∧ω_i + (A^iη^{jk} − A^jη^{ik}) ω̃_{k,j}∧ω_i
    let trace = (0..4).fold(ScalarExpr::zero(), |acc, j| {
        acc.add(&y(j, &[j]).scale(&eta(j)))
    });
    let mut p1_d_nu = DiffForm::zero(&c, 4, 2);
    for i in 0..4 {
        for k in 0..4 {
            let a_ik = y(i, &[k]).scale(&(&eta(i) * &eta(k)));
            let first = a_ik.sub(&trace.scale(&Maxwell::eta_q(i, k)));
            p1_d_nu = p1_d_nu.add(&em.w(k, &[]).wedge(&em.om(i)).mul_scalar(&first));
            for j in 0..4 {
                let second = em
                    .a_up(i)
                    .scale(&Maxwell::eta_q(j, k))
                    .sub(&em.a_up(j).scale(&Maxwell::eta_q(i, k)));
                p1_d_nu = p1_d_nu.add(&em.w(k, &[j]).wedge(&em.om(i)).mul_scalar(&second));
            }
        }
    }
    let nu = engine(first_order_nu(lag))?;
    ensure!(nu.p1_d_nu == p1_d_nu, "p₁dν differs");
    ensure!(nu.holds(), "Φ ≠ Θ + p₁dν");

    let phi_form = engine(canonical_lepage(lag))?.form;
    let phi_expected = theta_expected.add(&p1_d_nu);
    ensure!(phi_form == phi_expected, "canonical form differs");

    // dΦ = 𝓔 + 2(2η^{jk}η^{il} − η^{ij}η^{kl} − η^{ik}η^{jl}) ω̃_{j,l}∧ω̃_k∧ω_i
    let el = engine(euler_lagrange(lag))?;
    let expected_el: Vec<ScalarExpr> = (0..4)
        .map(|j| em.div_f(j).scale(&Q::from_int(-4)))
        .collect();
    ensure!(
        el == engine(SourceForm::new(&c, expected_el))?,
        "Euler-Lagrange form differs"
    );
    let mut d_phi_expected = el.to_form();
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    let e = |a: usize, b: usize| Maxwell::eta_q(a, b);
                    let coeff = &(&(&Q::from_int(2) * &(&e(j, k) * &e(i, l)))
                        - &(&e(i, j) * &e(k, l)))
                        - &(&e(i, k) * &e(j, l));
                    if coeff.is_zero() {
                        continue;
                    }
                    let piece = em.w(j, &[l]).wedge(&em.w(k, &[])).wedge(&em.om(i));
                    d_phi_expected = d_phi_expected.add(&piece.scale(&(&coeff * &Q::from_int(2))));
                }
            }
        }
    }
    let d_phi = engine(phi_form.d())?;
    ensure!(d_phi == d_phi_expected, "dΦ differs");

    let gauge = gauge_check()?;

    rec.pair("em: principal", &theta, &theta_expected);
    rec.pair(
        "em: vainberg-tonti",
        &split.lagrangian_vt.form(),
        &DiffForm::volume(&c).mul_scalar(&vt),
    );
    rec.pair("em: d alpha", &split.d_alpha, &d_alpha);
    rec.pair("em: p1 d nu", &nu.p1_d_nu, &p1_d_nu);
    rec.pair("em: canonical", &phi_form, &phi_expected);
    rec.pair("em: d canonical", &d_phi, &d_phi_expected);
    rec.lepage.push((phi_form, lag.clone()));
    rec.lepage.push((theta, lag.clone()));
    Ok(format!("∂L/∂A, Θ, L_VT, α, dα, p₁dν, Φ, dΦ exact; {gauge}"))
}

/// `A_i ↦ A_i + ∂_i f` with `f(x)` carried by an extra field whose jets
/// stand for the derivatives of `f`. Contact forms are unchanged by the
/// substitution, so only coefficients move.
fn gauge_check() -> Outcome {
    let src = problem_text("em.jf")?.replacen("fields A[4]", "fields A[4], f", 1);
    let g = engine(load(&src, 8))?;
    let c = &g.chart;
    let f = engine(c.find_field("f").ok_or("no gauge field"))?;
    let shift = |v: Var| -> Option<ScalarExpr> {
        let (s, j) = v.as_fiber()?;
        if s == f {
            return None;
        }
        Some(ScalarExpr::var(v).add(&ScalarExpr::var(Var::fiber(f, j.with(s)?))))
    };
    let theta = engine(principal_lepage(&g.lagrangian))?.form;
    let phi = engine(canonical_lepage(&g.lagrangian))?.form;
    let d_phi = engine(phi.d())?;
    ensure!(
        g.lagrangian.form().substitute(&shift) == g.lagrangian.form(),
        "Lagrangian not gauge invariant"
    );
    ensure!(theta.substitute(&shift) == theta, "Θ not gauge invariant");
    ensure!(
        phi.substitute(&shift) != phi,
        "Φ unexpectedly gauge invariant"
    );
    ensure!(d_phi.substitute(&shift) == d_phi, "dΦ not gauge invariant");
    Ok("gauge: Θ, dΦ invariant, Φ not".into())
}

fn jet_index(c: &Chart, a: usize, b: usize) -> Result<usize, String> {
    let (a, b) = (a.min(b), a.max(b));
    c.find_field(&format!("g_{a}_{b}"))
        .ok_or_else(|| format!("no metric component g_{a}_{b}"))
}

/// `Γ^{rpq} − g^{qr}Γ^{kp}_k + ½g^{pq}(Γ^{jr}_j − Γ^{rj}_j)` with
/// `Γ_{abc} = ½(g_{ab,c} + g_{ac,b} − g_{bc,a})`, indices `[p][q][r]`.
fn hilbert_oracle(g: &DMatrix<f64>, dg: &[Vec<Vec<f64>>]) -> Vec<Vec<Vec<f64>>> {
    let n = g.nrows();
    let gi = g.clone().try_inverse().expect("nondegenerate");
    let low = |a: usize, b: usize, c: usize| 0.5 * (dg[a][b][c] + dg[a][c][b] - dg[b][c][a]);
    let up = |r: usize, p: usize, q: usize| {
        let mut s = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    s += gi[(r, a)] * gi[(p, b)] * gi[(q, c)] * low(a, b, c);
                }
            }
        }
        s
    };
    // first/third and second/third contractions of Γ^{ab}_c
    let tr13 = |p: usize| {
        (0..n)
            .map(|k| (0..n).map(|c| up(k, p, c) * g[(c, k)]).sum::<f64>())
            .sum::<f64>()
    };
    let tr23 = |p: usize| {
        (0..n)
            .map(|k| (0..n).map(|c| up(p, k, c) * g[(c, k)]).sum::<f64>())
            .sum::<f64>()
    };
    let t13: Vec<f64> = (0..n).map(tr13).collect();
    let t23: Vec<f64> = (0..n).map(tr23).collect();
    let mut out = vec![vec![vec![0.0; n]; n]; n];
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                out[p][q][r] =
                    up(r, p, q) - gi[(q, r)] * t13[p] + 0.5 * gi[(p, q)] * (t13[r] - t23[r]);
            }
        }
    }
    out
}

const HILBERT_TOLERANCE: f64 = 1e-9;

fn hilbert(rec: &mut Recorded) -> Outcome {
    let p = problem("hilbert.jf")?;
    let c = &p.chart;
    let n = c.n();
    let reduced = p
        .reduced
        .as_ref()
        .ok_or("hilbert.jf has no reduced block")?;
    let theta = engine(principal_lepage(&p.lagrangian))?.form;
    let theta_reduced = engine(principal_lepage(&reduced.lagrangian))?.form;
    let d_alpha = engine(reduced.alpha.d())?;
    let order = required_order(&theta)
        .max(required_order(&theta_reduced))
        .max(required_order(&d_alpha));

    let mut derivatives = Vec::new();
    for a in 0..n {
        for b in a..n {
            for r in 0..n {
                let s = jet_index(c, a, b)?;
                let e = engine(partial_derivative(
                    c,
                    reduced.lagrangian.density(),
                    JetCoordinate::Fiber(s, MultiIndex::single(r)),
                ))?;
                derivatives.push(((a, b, r), e));
            }
        }
    }

    let mut gen = Generator::new(c, 0x4b1);
    let (mut worst_a, mut worst_b) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let (pt, _) = engine(JetPoint::random(c, order, gen.rng()))?;
        let val = |v: Var| pt.value(v).map(|q| q.to_f64()).map_err(|e| e.to_string());
        let mut g = DMatrix::zeros(n, n);
        let mut dg = vec![vec![vec![0.0; n]; n]; n];
        for a in 0..n {
            for b in 0..n {
                let s = jet_index(c, a, b)?;
                g[(a, b)] = val(Var::field(s))?;
                for k in 0..n {
                    dg[a][b][k] = val(Var::fiber(s, MultiIndex::single(k)))?;
                }
            }
        }
        let vol = g.determinant().abs().sqrt();
        let x = hilbert_oracle(&g, &dg);
        for ((a, b, r), e) in &derivatives {
            let got = engine(pt.eval_f64(e))?;
            // one coordinate per unordered pair: both orderings contribute
            let want = if a == b {
                vol * x[*a][*a][*r]
            } else {
                vol * (x[*a][*b][*r] + x[*b][*a][*r])
            };
            let scale = engine(pt.magnitude(e))?.max(want.abs()).max(1.0);
            worst_a = worst_a.max((got - want).abs() / scale);
        }
        let vs: Vec<TangentVector<f64>> = (0..n)
            .map(|_| TangentVector::random(c, order, gen.rng()))
            .collect();
        let (t, mt) = engine(eval_form_with_magnitude(&theta, &pt, &vs))?;
        let (u, mu) = engine(eval_form_with_magnitude(&theta_reduced, &pt, &vs))?;
        let (w, mw) = engine(eval_form_with_magnitude(&d_alpha, &pt, &vs))?;
        worst_b = worst_b.max((t - u - w).abs() / (mt + mu + mw).max(1.0));
    }
    ensure!(
        worst_a <= HILBERT_TOLERANCE,
        "reduced derivative residual {worst_a:e}"
    );
    ensure!(
        worst_b <= HILBERT_TOLERANCE,
        "Θ relation residual {worst_b:e}"
    );
    rec.pair(
        "hilbert: theta relation",
        &theta,
        &theta_reduced.add(&d_alpha),
    );
    Ok(format!(
        "50 points, derivative {worst_a:.1e}, Θ relation {worst_b:.1e}"
    ))
}

const SHAPES: [(usize, usize); 6] = [(1, 1), (1, 2), (2, 1), (2, 2), (3, 1), (3, 2)];

fn closure_canonical(rec: &mut Recorded) -> Outcome {
    let mut nonzero = 0;
    for case in 0..100 {
        let (n, m) = SHAPES[case % SHAPES.len()];
        let c = numbered_chart(n, m);
        let mut g = Generator::new(&c, 1000 + case as u64);
        let alpha = g.horizontal_n_minus_1(1, 3, 3);
        let lag = trivial(&c, &alpha)?;
        nonzero += usize::from(!lag.density().is_zero());
        let phi = engine(canonical_lepage(&lag))?.form;
        let d_phi = engine(phi.d())?;
        ensure!(d_phi.is_zero(), "case {case} (n={n}, m={m}): dΦ ≠ 0");
        if case % 10 == 0 {
            rec.pair(
                format!("closure {case}: horizontal part"),
                &phi.horizontal(),
                &lag.form(),
            );
        }
    }
    let mut controls = 0;
    let mut seed = 0;
    while controls < 10 {
        let (n, m) = SHAPES[controls % SHAPES.len()];
        let c = numbered_chart(n, m);
        let mut g = Generator::new(&c, 5000 + seed);
        seed += 1;
        let lag = Lagrangian::new(&c, g.expr(1, 3, 4));
        let el = engine(euler_lagrange(&lag))?;
        if el.is_zero() {
            continue;
        }
        let d_phi = engine(engine(canonical_lepage(&lag))?.form.d())?;
        ensure!(
            !d_phi.is_zero(),
            "control {controls}: dΦ = 0 for a dynamical Lagrangian"
        );
        let (source, rest) = extract_source_form(&d_phi.contact_part(1));
        ensure!(
            source == el && rest.is_zero(),
            "control {controls}: p₁dΦ ≠ E"
        );
        rec.pair(
            format!("closure control {controls}: p1 dΦ"),
            &d_phi.contact_part(1),
            &el.to_form(),
        );
        controls += 1;
    }
    ensure!(
        nonzero >= 90,
        "only {nonzero} of 100 trivial Lagrangians are non-zero"
    );
    Ok(format!(
        "100 trivial Lagrangians ({nonzero} non-zero) closed, 10 controls not"
    ))
}

fn closure_fundamental(rec: &mut Recorded) -> Outcome {
    let c = numbered_chart(2, 2);
    // det ∂(u,v)/∂(x,y)
    let det = y(0, &[0])
        .mul(&y(1, &[1]))
        .sub(&y(0, &[1]).mul(&y(1, &[0])));
    let lag = Lagrangian::new(&c, det);
    ensure!(
        engine(euler_lagrange(&lag))?.is_zero(),
        "determinant Lagrangian is not null"
    );
    let rho = engine(fundamental_lepage(&lag))?.form;
    ensure!(engine(rho.d())?.is_zero(), "determinant Lagrangian: dρ ≠ 0");
    ensure!(
        rho.max_contact_degree() == 2,
        "determinant Lagrangian: ρ should be 2-contact"
    );
    rec.pair("fundamental: determinant", &rho.horizontal(), &lag.form());

    let mut nonzero = 0;
    for case in 0..49 {
        let (n, m) = SHAPES[case % SHAPES.len()];
        let c = numbered_chart(n, m);
        let mut g = Generator::new(&c, 2000 + case as u64);
        let alpha = g.horizontal_n_minus_1(0, 3, 3);
        let lag = trivial(&c, &alpha)?;
        nonzero += usize::from(!lag.density().is_zero());
        ensure!(lag.order() <= 1, "case {case}: not first order");
        let rho = engine(fundamental_lepage(&lag))?.form;
        ensure!(
            engine(rho.d())?.is_zero(),
            "case {case} (n={n}, m={m}): dρ ≠ 0"
        );
        if case % 10 == 0 {
            rec.pair(
                format!("fundamental {case}: horizontal part"),
                &rho.horizontal(),
                &lag.form(),
            );
        }
    }
    ensure!(
        nonzero >= 45,
        "only {nonzero} of 49 random trivial Lagrangians are non-zero"
    );
    Ok(format!(
        "50 first-order trivial Lagrangians ({} non-zero) closed, determinant included",
        nonzero + 1
    ))
}

fn homotopy(rec: &mut Recorded) -> Outcome {
    for case in 0..100 {
        let (n, m) = SHAPES[case % SHAPES.len()];
        let c = numbered_chart(n, m);
        let mut g = Generator::new(&c, 3000 + case as u64);
        let deg = (case / SHAPES.len()) % (n + 1);
        let rho = g.form(deg, 2, 3);
        let i_rho = engine(homotopy_operator(&rho))?;
        let mut rebuilt = engine(homotopy_operator(&engine(rho.d())?))?
            .add(&engine(rho.pullback_zero_section())?);
        if deg > 0 {
            rebuilt = rebuilt.add(&engine(i_rho.d())?);
        }
        ensure!(rebuilt == rho, "case {case}: ρ ≠ Idρ + dIρ + π*0*ρ");
        ensure!(
            engine(homotopy_operator(&rho.horizontal()))?.is_zero(),
            "case {case}: Ihρ ≠ 0"
        );
        for k in 1..=deg {
            let lhs = engine(homotopy_operator(&rho.contact_part(k)))?;
            ensure!(
                lhs == i_rho.contact_part(k - 1),
                "case {case}: Ip_{k}ρ ≠ p_{}Iρ",
                k - 1
            );
        }
        if case % 5 == 0 {
            rec.pair(format!("homotopy {case}"), &rebuilt, &rho);
        }
    }
    Ok("100 forms: identity, Ih = 0, I p_k = p_(k-1) I".into())
}

fn lepage_conditions(rec: &mut Recorded) -> Outcome {
    let mut fundamental = 0;
    for case in 0..100 {
        let (n, m) = SHAPES[case % SHAPES.len()];
        let c = numbered_chart(n, m);
        let mut g = Generator::new(&c, 4000 + case as u64);
        let r = 1 + case % 2;
        let lag = Lagrangian::new(&c, g.expr(r, 3, 4));
        let beta = g.horizontal_n_minus_1(1, 2, 2);
        let h_d_beta = trivial(&c, &beta)?;
        let reduced = Lagrangian::new(&c, lag.density().sub(h_d_beta.density()));
        let mut forms = vec![
            ("principal", engine(principal_lepage(&lag))?.form),
            ("canonical", engine(canonical_lepage(&lag))?.form),
            (
                "reduced",
                engine(reduced_lepage(&lag, &reduced, &beta))?.form,
            ),
        ];
        if lag.order() <= 1 {
            forms.push(("fundamental", engine(fundamental_lepage(&lag))?.form));
            fundamental += 1;
        }
        for (kind, theta) in forms {
            let report = engine(verify_lepage_conditions(&theta, &lag))?;
            ensure!(report.horizontal_ok(), "case {case} {kind}: hθ ≠ λ");
            ensure!(
                report.source_form_ok(),
                "case {case} {kind}: p₁dθ is not a source form"
            );
            ensure!(
                report.matches_euler_lagrange(),
                "case {case} {kind}: source form ≠ E"
            );
            if case % 10 == 0 {
                rec.pair(
                    format!("lepage {case} {kind}: h"),
                    &theta.horizontal(),
                    &lag.form(),
                );
                rec.lepage.push((theta, lag.clone()));
            }
        }
    }
    Ok(format!("100 Lagrangians, principal/canonical/reduced on all, fundamental on {fundamental} first-order"))
}

/// Lagrangian affine in the order-`r` coordinates.
fn affine(g: &mut Generator, r: usize) -> ScalarExpr {
    let c = g.chart().clone();
    let mut e = g.expr(r - 1, 3, 3);
    for _ in 0..2 {
        let s = g.rng_index(c.m());
        let j: Vec<usize> = (0..r).map(|_| g.rng_index(c.n())).collect();
        e = e.add(&g.expr(r - 1, 2, 2).mul(&y(s, &j)));
    }
    e
}

trait Pick {
    fn rng_index(&mut self, bound: usize) -> usize;
}

impl Pick for Generator {
    fn rng_index(&mut self, bound: usize) -> usize {
        let items: Vec<usize> = (0..bound).collect();
        *self.pick(&items)
    }
}

fn order_bounds(rec: &mut Recorded) -> Outcome {
    let mut checked = 0;
    for case in 0..30 {
        let (n, m) = SHAPES[case % SHAPES.len()];
        let c = numbered_chart(n, m);
        let mut g = Generator::new(&c, 6000 + case as u64);
        let r = 1 + case % 2;
        for (is_affine, density) in [(false, g.expr(r, 3, 4)), (true, affine(&mut g, r))] {
            let lag = Lagrangian::new(&c, density).with_order(r);
            ensure!(
                !is_affine || lag.affine_in_top_order(),
                "case {case}: generator not affine"
            );
            let theta = engine(principal_lepage(&lag))?.form;
            let bound = if lag.affine_in_top_order() {
                2 * r - 2
            } else {
                2 * r - 1
            };
            let got = theta.effective_order();
            ensure!(
                got <= bound,
                "case {case}: ord Θ = {got} > {bound} (r = {r})"
            );
            let phi = engine(canonical_lepage(&lag))?.form;
            let got = phi.effective_order();
            ensure!(
                got <= 4 * r - 2,
                "case {case}: ord Φ = {got} > {} (r = {r})",
                4 * r - 2
            );
            checked += 1;
        }
    }

    // Θ = L dt + ∂L/∂q̇^σ (dq^σ − q̇^σ dt)
    let c = numbered_chart(1, 2);
    let t = ScalarExpr::var(Var::base(0));
    let l = y(0, &[0])
        .mul(&y(0, &[0]))
        .add(&y(1, &[0]).mul(&y(1, &[0])))
        .scale(&Q::new(1, 2))
        .add(&t.mul(&y(0, &[])).mul(&y(1, &[0])))
        .sub(&y(0, &[]).mul(&y(0, &[])).mul(&y(1, &[])));
    let lag = Lagrangian::new(&c, l.clone());
    let dt = DiffForm::dx(&c, 0);
    let mut expected = dt.mul_scalar(&l);
    for s in 0..2 {
        let momentum = engine(partial_derivative(
            &c,
            &l,
            JetCoordinate::Fiber(s, MultiIndex::single(0)),
        ))?;
        let dq = DiffForm::dy(&c, s, MultiIndex::EMPTY).sub(&dt.mul_scalar(&y(s, &[0])));
        expected = expected.add(&dq.mul_scalar(&momentum));
    }
    let theta = engine(principal_lepage(&lag))?.form;
    ensure!(theta == expected, "mechanics Θ differs");
    let text = form_to_text(&theta);
    ensure!(
        text == form_to_text(&expected),
        "mechanics Θ renders differently"
    );
    let tokens = "(x0*y0*D(y1,0) - y0^2*y1 + 1/2*D(y0,0)^2 + 1/2*D(y1,0)^2) * omega0\n+ D(y0,0) * w[y0;]\n+ (x0*y0 + D(y1,0)) * w[y1;]";
    ensure!(text == tokens, "mechanics Θ text:\n{text}");
    ensure!(
        theta.effective_order() == 1,
        "mechanics Θ is not first order"
    );
    rec.pair("mechanics", &theta, &expected);
    Ok(format!(
        "{checked} Lagrangians within 2r-1 / 2r-2 / 4r-2; mechanics Θ token-exact"
    ))
}

fn linearity(rec: &mut Recorded) -> Outcome {
    let two = Q::from_int(2);
    let three = Q::from_int(3);
    for case in 0..20 {
        let (n, m) = SHAPES[case % SHAPES.len()];
        let c = numbered_chart(n, m);
        let mut g = Generator::new(&c, 7000 + case as u64);
        let r = 1 + case % 2;
        let l1 = Lagrangian::new(&c, g.expr(r, 3, 3));
        let l2 = Lagrangian::new(&c, g.expr(r, 3, 3));
        let combined = l1.scale(&two).add(&l2.scale(&three));
        let lhs = engine(canonical_lepage(&combined))?.form;
        let rhs = engine(canonical_lepage(&l1))?
            .form
            .scale(&two)
            .add(&engine(canonical_lepage(&l2))?.form.scale(&three));
        ensure!(lhs == rhs, "case {case}: Φ not linear");

        let alpha = g.horizontal_n_minus_1(1, 2, 3);
        let shifted = l1.add(&trivial(&c, &alpha)?);
        let d1 = engine(engine(canonical_lepage(&l1))?.form.d())?;
        let d2 = engine(engine(canonical_lepage(&shifted))?.form.d())?;
        ensure!(d1 == d2, "case {case}: dΦ differs for λ and λ + hdα");
        if case % 4 == 0 {
            rec.pair(format!("linearity {case}"), &lhs, &rhs);
            rec.pair(format!("equivalence {case}"), &d1, &d2);
        }
    }
    Ok("20 pairs linear; dΦ equal under λ ↦ λ + hdα".into())
}

const POINTS: usize = 10;

fn numeric(rec: &mut Recorded) -> Outcome {
    let mut gen = Generator::new(&numbered_chart(1, 1), 0xacce);
    let (mut exact, mut opaque, mut worst) = (0, 0, 0.0f64);
    for (label, lhs, rhs) in &rec.pairs {
        let c = lhs.chart();
        let atoms = [lhs, rhs].iter().any(|f| {
            f.terms()
                .any(|(_, e)| e.contains_var_where(|v| v.is_atom()))
        });
        let order = required_order(lhs).max(required_order(rhs));
        for _ in 0..POINTS {
            let (pt, _) = engine(JetPoint::random(c, order, gen.rng()))?;
            if atoms {
                let vs: Vec<_> = (0..lhs.degree())
                    .map(|_| TangentVector::random(c, order, gen.rng()))
                    .collect();
                let (a, ma) = engine(eval_form_with_magnitude::<f64>(lhs, &pt, &vs))?;
                let (b, mb) = engine(eval_form_with_magnitude::<f64>(rhs, &pt, &vs))?;
                let r = (a - b).abs() / (ma + mb).max(1.0);
                worst = worst.max(r);
                ensure!(r <= 1e-9, "{label}: relative residual {r:e}");
            } else {
                let vs: Vec<_> = (0..lhs.degree())
                    .map(|_| TangentVector::random_rational(c, order, gen.rng()))
                    .collect();
                let a: Q = engine(eval_form(lhs, &pt, &vs))?;
                let b: Q = engine(eval_form(rhs, &pt, &vs))?;
                ensure!(a == b, "{label}: {a} ≠ {b}");
            }
        }
        if atoms {
            opaque += 1;
        } else {
            exact += 1;
        }
    }

    // pullback along prolonged sections: Jγ*θ = Jγ*λ
    let mut sections = 0;
    for (theta, lag) in &rec.lepage {
        if theta
            .terms()
            .any(|(_, e)| e.contains_var_where(|v| v.is_atom()))
        {
            continue;
        }
        let c = theta.chart();
        let section = SectionSpec::random(c, 3, gen.rng());
        let points: Vec<Vec<Q>> = (0..POINTS)
            .map(|k| {
                (0..c.n())
                    .map(|i| Q::new((k as i64 * 7 + i as i64 * 3) % 11 - 5, 3))
                    .collect()
            })
            .collect();
        let gap = engine(section_pullback_check(theta, lag, &section, &points))?;
        ensure!(gap.is_zero(), "section pullback differs by {gap}");
        sections += 1;
    }

    // central differences of d_i f along sections converge as h²
    let mut converging = 0;
    for case in 0..20 {
        let (n, m) = SHAPES[case % SHAPES.len()];
        let c = numbered_chart(n, m);
        let mut g = Generator::new(&c, 8000 + case as u64);
        let f = g.expr(2, 3, 4);
        let section = SectionSpec::random(&c, 4, g.rng());
        let x: Vec<Q> = (0..n).map(|i| Q::new(i as i64 + 1, 3)).collect();
        let i = case % n;
        let coarse = engine(finite_difference_check(
            &f,
            &section,
            i,
            &x,
            &Q::new(1, 200),
        ))?;
        let fine = engine(finite_difference_check(
            &f,
            &section,
            i,
            &x,
            &Q::new(1, 400),
        ))?;
        if coarse == 0.0 && fine == 0.0 {
            continue;
        }
        let ratio = coarse / fine;
        ensure!(
            (ratio - 4.0).abs() < 0.1,
            "case {case}: error ratio {ratio} (coarse {coarse:e}, fine {fine:e})"
        );
        converging += 1;
    }
    ensure!(
        converging >= 10,
        "only {converging} non-trivial finite-difference cases"
    );
    Ok(format!(
        "{exact} exact + {opaque} opaque pairs at {POINTS} points (worst {worst:.1e}); {sections} section pullbacks; {converging} O(h²) cases"
    ))
}

struct Criterion {
    name: &'static str,
    limit: Option<Duration>,
    run: fn(&mut Recorded) -> Outcome,
}

fn main() {
    let criteria = [
        Criterion {
            name: "Klein-Gordon suite",
            limit: Some(Duration::from_secs(5)),
            run: klein_gordon,
        },
        Criterion {
            name: "electromagnetic suite",
            limit: Some(Duration::from_secs(30)),
            run: electromagnetic,
        },
        Criterion {
            name: "Hilbert suite (numeric)",
            limit: Some(Duration::from_secs(60)),
            run: hilbert,
        },
        Criterion {
            name: "closure, canonical",
            limit: None,
            run: closure_canonical,
        },
        Criterion {
            name: "closure, fundamental",
            limit: None,
            run: closure_fundamental,
        },
        Criterion {
            name: "homotopy identity",
            limit: None,
            run: homotopy,
        },
        Criterion {
            name: "Lepage conditions",
            limit: None,
            run: lepage_conditions,
        },
        Criterion {
            name: "order bounds",
            limit: None,
            run: order_bounds,
        },
        Criterion {
            name: "linearity",
            limit: None,
            run: linearity,
        },
        Criterion {
            name: "numeric cross-checks",
            limit: None,
            run: numeric,
        },
    ];
    let mut rec = Recorded::default();
    let mut failed = 0;
    for (k, c) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = match catch_unwind(AssertUnwindSafe(|| (c.run)(&mut rec))) {
            Ok(r) => r,
            Err(e) => Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into())),
        };
        let elapsed = start.elapsed();
        let outcome = match (outcome, c.limit) {
            (Ok(_), Some(limit)) if elapsed > limit => {
                Err(format!("took {elapsed:.1?}, limit {limit:?}"))
            }
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => println!(
                "criterion {:>2} {:<24} PASS ({elapsed:.2?}) {detail}",
                k + 1,
                c.name
            ),
            Err(why) => {
                failed += 1;
                println!(
                    "criterion {:>2} {:<24} FAIL ({elapsed:.2?}) {why}",
                    k + 1,
                    c.name
                );
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
