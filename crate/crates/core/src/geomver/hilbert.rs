use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::{eval_form_with_magnitude, required_order, JetPoint, SuiteFailure, TangentVector};
use crate::forms::DiffForm;
use crate::jet::calculus::partial_var;
use crate::jet::{
    total_derivative, Chart, ChartSpec, MetricFamily, MultiIndex, ScalarExpr, SymbolId, Var, Q,
};
use crate::varcalc::{principal_lepage, Lagrangian};
use crate::JetError;

/// Relative tolerance of the Hilbert suite.
pub const HILBERT_TOLERANCE: f64 = 1e-9;

/// The Hilbert Lagrangian `R sqrt|det g| ω_0` on a chart with metric fields
/// `g_a_b (a <= b)`, its first-order reduced Lagrangian and the form `α`
/// with `λ = λ' + h dα`.
#[derive(Clone, Debug)]
pub struct HilbertProblem {
    pub chart: Chart,
    pub metric: MetricFamily,
    pub inverse: SymbolId,
    pub volume: SymbolId,
    pub lagrangian: Lagrangian,
    pub reduced: Lagrangian,
    pub alpha: DiffForm,
}

struct Connection {
    /// `Γ^i_{jk}`
    mixed: Vec<Vec<Vec<ScalarExpr>>>,
    /// `Γ^l_{il}`
    trace: Vec<ScalarExpr>,
}

impl HilbertProblem {
    pub fn new(n: usize) -> Result<Self, JetError> {
        let base: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
        let mut fields = Vec::new();
        let mut ids = vec![vec![0; n]; n];
        for a in 0..n {
            for b in a..n {
                ids[a][b] = fields.len();
                ids[b][a] = fields.len();
                fields.push(format!("g_{a}_{b}"));
            }
        }
        let mut spec = ChartSpec::new(base, fields)?;
        let metric = spec.metric_family(ids)?;
        let inverse = spec.register_inverse("g_inv", metric.clone())?;
        let volume = spec.register_sqrt_abs_det("sqrtdetg", metric.clone(), inverse)?;
        let chart = spec.into_shared();

        let ginv = |a: usize, b: usize| -> Result<ScalarExpr, JetError> {
            Ok(ScalarExpr::var(chart.atom(inverse, &[a, b])?))
        };
        let vol = ScalarExpr::var(chart.atom(volume, &[])?);
        let conn = connection(&chart, &metric, &ginv)?;

        // R_{jk} = d_iΓ^i_{jk} − d_kΓ^i_{ji} + Γ^i_{jk}Γ^l_{il} − Γ^l_{ji}Γ^i_{kl}
        let mut scalar = ScalarExpr::zero();
        let mut quadratic = ScalarExpr::zero();
        for j in 0..n {
            for k in 0..n {
                let mut second = ScalarExpr::zero();
                for i in 0..n {
                    second = second.add(&total_derivative(&chart, &conn.mixed[i][j][k], i)?);
                }
                second = second.sub(&total_derivative(&chart, &conn.trace[j], k)?);
                let mut squares = ScalarExpr::zero();
                for i in 0..n {
                    squares = squares.add(&conn.mixed[i][j][k].mul(&conn.trace[i]));
                    for l in 0..n {
                        squares = squares.sub(&conn.mixed[l][j][i].mul(&conn.mixed[i][k][l]));
                    }
                }
                let g = ginv(j, k)?;
                scalar = scalar.add(&g.mul(&second.add(&squares)));
                // λ' uses the opposite sign of the same quadratic terms
                quadratic = quadratic.sub(&g.mul(&squares));
            }
        }
        let lagrangian = Lagrangian::new(&chart, scalar.mul(&vol));
        let reduced = Lagrangian::new(&chart, quadratic.mul(&vol));

        // α^i = (g^{jk}Γ^i_{jk} − g^{il}Γ^k_{lk}) sqrt|det g|
        let mut alpha = DiffForm::zero(&chart, n - 1, 1);
        for i in 0..n {
            let mut a = ScalarExpr::zero();
            for j in 0..n {
                for k in 0..n {
                    a = a.add(&ginv(j, k)?.mul(&conn.mixed[i][j][k]));
                }
                a = a.sub(&ginv(i, j)?.mul(&conn.trace[j]));
            }
            alpha = alpha.add(&DiffForm::omega_i(&chart, i).mul_scalar(&a.mul(&vol)));
        }
        Ok(HilbertProblem {
            chart,
            metric,
            inverse,
            volume,
            lagrangian,
            reduced,
            alpha,
        })
    }

    pub fn n(&self) -> usize {
        self.chart.n()
    }

    /// Symmetric partial `∂𝓛'/∂g_{pq,r}` for `p <= q`.
    pub fn reduced_derivative(&self, p: usize, q: usize, r: usize) -> ScalarExpr {
        let v = Var::fiber(self.metric.field(p, q), MultiIndex::single(r));
        partial_var(&self.chart, self.reduced.density(), v)
    }
}

fn connection(
    chart: &Chart,
    metric: &MetricFamily,
    ginv: &dyn Fn(usize, usize) -> Result<ScalarExpr, JetError>,
) -> Result<Connection, JetError> {
    let n = chart.n();
    let half = Q::new(1, 2);
    let dg = |a: usize, b: usize, c: usize| {
        ScalarExpr::var(Var::fiber(metric.field(a, b), MultiIndex::single(c)))
    };
    let mut lower = vec![vec![vec![ScalarExpr::zero(); n]; n]; n];
    for l in 0..n {
        for j in 0..n {
            for k in 0..n {
                lower[l][j][k] = dg(l, j, k).add(&dg(l, k, j)).sub(&dg(j, k, l)).scale(&half);
            }
        }
    }
    let mut mixed = vec![vec![vec![ScalarExpr::zero(); n]; n]; n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut acc = ScalarExpr::zero();
                for l in 0..n {
                    acc = acc.add(&ginv(i, l)?.mul(&lower[l][j][k]));
                }
                mixed[i][j][k] = acc;
            }
        }
    }
    let trace = (0..n)
        .map(|i| (0..n).fold(ScalarExpr::zero(), |acc, l| acc.add(&mixed[l][i][l])))
        .collect();
    Ok(Connection { mixed, trace })
}

/// Report of the Hilbert suite.
#[derive(Clone, Debug)]
pub struct HilbertReport {
    pub seed: u64,
    pub trials: usize,
    pub n: usize,
    /// Largest residual of the reduced-Lagrangian derivative check.
    pub derivative_residual: f64,
    /// Largest residual of `Θ_{λ_g} − Θ_{λ'_g} − dα`.
    pub theta_residual: f64,
    /// Sampled metrics rejected as near-singular.
    pub resampled: usize,
    pub failures: Vec<SuiteFailure>,
}

impl HilbertReport {
    pub fn max_residual(&self) -> f64 {
        self.derivative_residual.max(self.theta_residual)
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "suite": "hilbert",
            "seed": self.seed,
            "trials": self.trials,
            "n": self.n,
            "max_residual": self.max_residual(),
            "derivative_residual": self.derivative_residual,
            "theta_residual": self.theta_residual,
            "resampled": self.resampled,
            "failures": self.failures.iter().map(|f| json!({
                "trial": f.trial,
                "check": f.check,
                "residual": f.residual,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Closed form of `∂(𝓛'/sqrt|det g|)/∂g_{pq,r}` with `g_{pq}` and `g_{qp}`
/// treated as independent:
/// `Γ^{rpq} − g^{qr}Γ^{kp}_k + ½ g^{pq}(Γ^{jr}_j − Γ^{rj}_j)`.
fn closed_form(ginv: &DMatrix<f64>, dg: &[Vec<Vec<f64>>]) -> Vec<Vec<Vec<f64>>> {
    let n = ginv.nrows();
    let low = |a: usize, b: usize, c: usize| 0.5 * (dg[a][b][c] + dg[a][c][b] - dg[b][c][a]);
    let mut lower = vec![vec![vec![0.0; n]; n]; n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                lower[a][b][c] = low(a, b, c);
            }
        }
    }
    let mut upper = vec![vec![vec![0.0; n]; n]; n];
    for r in 0..n {
        for p in 0..n {
            for q in 0..n {
                let mut acc = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        for c in 0..n {
                            acc += ginv[(r, a)] * ginv[(p, b)] * ginv[(q, c)] * lower[a][b][c];
                        }
                    }
                }
                upper[r][p][q] = acc;
            }
        }
    }
    // Γ^{kp}_k = g^{ph} g^{ka} Γ_{ahk}, Γ^{rj}_j = g^{ra} g^{jk} Γ_{ajk}
    let mut trace_up = vec![0.0; n];
    let mut trace_in = vec![0.0; n];
    for p in 0..n {
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    trace_up[p] += ginv[(p, b)] * ginv[(c, a)] * lower[a][b][c];
                    trace_in[p] += ginv[(p, a)] * ginv[(b, c)] * lower[a][b][c];
                }
            }
        }
    }
    let mut out = vec![vec![vec![0.0; n]; n]; n];
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                out[p][q][r] = upper[r][p][q] - ginv[(q, r)] * trace_up[p]
                    + 0.5 * ginv[(p, q)] * (trace_up[r] - trace_in[r]);
            }
        }
    }
    out
}

/// Numeric discharge of the Hilbert identities at random metric jet points:
/// the derivative of the reduced Lagrangian against its closed form, and
/// `Θ_{λ_g} = Θ_{λ'_g} + dα` on random vectors.
pub fn hilbert_numeric_suite(
    n: usize,
    seed: u64,
    trials: usize,
) -> Result<HilbertReport, JetError> {
    let problem = HilbertProblem::new(n)?;
    let theta = principal_lepage(&problem.lagrangian)?.form;
    let theta_reduced = principal_lepage(&problem.reduced)?.form;
    let d_alpha = problem.alpha.d()?;
    let order = required_order(&theta)
        .max(required_order(&theta_reduced))
        .max(required_order(&d_alpha));
    let derivatives: Vec<((usize, usize, usize), ScalarExpr)> = (0..n)
        .flat_map(|p| (p..n).flat_map(move |q| (0..n).map(move |r| (p, q, r))))
        .map(|(p, q, r)| ((p, q, r), problem.reduced_derivative(p, q, r)))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = HilbertReport {
        seed,
        trials,
        n,
        derivative_residual: 0.0,
        theta_residual: 0.0,
        resampled: 0,
        failures: Vec::new(),
    };
    for trial in 0..trials {
        let (point, rejected) = JetPoint::random(&problem.chart, order, &mut rng)?;
        report.resampled += rejected;
        let (a, b) = trial_residuals(
            &problem,
            &derivatives,
            (&theta, &theta_reduced, &d_alpha),
            &point,
            order,
            &mut rng,
        )?;
        report.derivative_residual = report.derivative_residual.max(a);
        report.theta_residual = report.theta_residual.max(b);
        for (check, r) in [("reduced_derivative", a), ("theta_relation", b)] {
            if !(r <= HILBERT_TOLERANCE) {
                report.failures.push(SuiteFailure {
                    trial,
                    check: check.into(),
                    residual: r,
                });
            }
        }
    }
    Ok(report)
}

fn trial_residuals(
    problem: &HilbertProblem,
    derivatives: &[((usize, usize, usize), ScalarExpr)],
    forms: (&DiffForm, &DiffForm, &DiffForm),
    point: &JetPoint,
    order: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(f64, f64), JetError> {
    let n = problem.n();
    let mut metric = DMatrix::zeros(n, n);
    let mut dg = vec![vec![vec![0.0; n]; n]; n];
    for a in 0..n {
        for b in 0..n {
            let f = problem.metric.field(a, b);
            metric[(a, b)] = point.value(Var::field(f))?.to_f64();
            for c in 0..n {
                dg[a][b][c] = point.value(Var::fiber(f, MultiIndex::single(c)))?.to_f64();
            }
        }
    }
    let ginv = metric
        .clone()
        .try_inverse()
        .ok_or_else(|| JetError::Degenerate {
            symbol: "metric".into(),
            reason: "singular sample".into(),
        })?;
    let vol = metric.determinant().abs().sqrt();
    let expected = closed_form(&ginv, &dg);
    let mut worst_a: f64 = 0.0;
    for &((p, q, r), ref e) in derivatives {
        let got = point.eval_f64(e)?;
        let want = if p == q {
            vol * expected[p][p][r]
        } else {
            vol * (expected[p][q][r] + expected[q][p][r])
        };
        let scale = point.magnitude(e)?.max(want.abs()).max(1.0);
        worst_a = worst_a.max((got - want).abs() / scale);
    }

    let (theta, theta_reduced, d_alpha) = forms;
    let vectors: Vec<TangentVector<f64>> = (0..n)
        .map(|_| TangentVector::random(&problem.chart, order, rng))
        .collect();
    let (x, mx) = eval_form_with_magnitude(theta, point, &vectors)?;
    let (y, my) = eval_form_with_magnitude(theta_reduced, point, &vectors)?;
    let (z, mz) = eval_form_with_magnitude(d_alpha, point, &vectors)?;
    let worst_b = (x - y - z).abs() / (mx + my + mz).max(1.0);
    Ok((worst_a, worst_b))
}
