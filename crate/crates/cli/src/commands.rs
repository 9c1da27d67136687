use std::fmt;
use std::fs;

use jetforms_core::forms::{DiffForm, VectorFieldSpec};
use jetforms_core::geomver::SuiteReport;
use jetforms_core::jet::ScalarExpr;
use jetforms_core::varcalc::{
    canonical_lepage, canonical_split, euler_lagrange, fundamental_lepage, homotopy_operator,
    noether_current, principal_lepage, reduced_lepage, verify_lepage_conditions, LepageKind,
    LepageResult,
};
use jetforms_core::JetError;
use jetforms_dsl::{load, DslError, Problem};
use serde_json::{json, Value};

use crate::output::{render, residual_excerpt, Item};
use crate::{CheckArgs, Cli, Command, Format, Kind};

/// Relative tolerance for residuals that involve opaque symbols.
const NUMERIC_TOLERANCE: f64 = 1e-9;

/// Trials used when a symbolic residual involves opaque symbols and no
/// `--numeric` count was given.
const FALLBACK_TRIALS: usize = 12;

#[derive(Debug)]
pub enum CliError {
    Io(String),
    Input(DslError),
    Engine(JetError),
    Usage(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(s) | CliError::Usage(s) => write!(f, "{s}"),
            CliError::Input(e) => write!(f, "{e}"),
            CliError::Engine(e) => write!(f, "{e}"),
        }
    }
}

impl From<JetError> for CliError {
    fn from(e: JetError) -> Self {
        CliError::Engine(e)
    }
}

pub struct Outcome {
    pub text: String,
    pub passed: bool,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, passed: true }
    }
}

fn read_problem(cli: &Cli, path: &std::path::Path) -> Result<Problem, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    load(&text, cli.max_order).map_err(|e| {
        CliError::Input(DslError {
            message: format!("{}: {}", path.display(), e.message),
            ..e
        })
    })
}

fn lepage(problem: &Problem, kind: LepageKind) -> Result<LepageResult, CliError> {
    let l = &problem.lagrangian;
    Ok(match kind {
        LepageKind::Principal => principal_lepage(l)?,
        LepageKind::Fundamental => fundamental_lepage(l)?,
        LepageKind::Canonical => canonical_lepage(l)?,
        LepageKind::Reduced => {
            let r = problem
                .reduced
                .as_ref()
                .ok_or_else(|| CliError::Usage("the problem file has no `reduced` block".into()))?;
            reduced_lepage(l, &r.lagrangian, &r.alpha)?
        }
    })
}

fn lepage_label(kind: LepageKind) -> &'static str {
    match kind {
        LepageKind::Principal => "\\Theta_{\\lambda}",
        LepageKind::Fundamental => "\\rho_{\\lambda}",
        LepageKind::Canonical => "\\Phi_{\\lambda}",
        LepageKind::Reduced => "\\varphi_{\\lambda}",
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::El { file } => {
            let p = read_problem(cli, file)?;
            let e = euler_lagrange(&p.lagrangian)?;
            Ok(Outcome::ok(render(
                cli.format,
                &[("source_form", "", Item::Source(e))],
            )))
        }
        Command::Lepage { kind, file } => {
            let p = read_problem(cli, file)?;
            let kind = LepageKind::from(*kind);
            let theta = lepage(&p, kind)?;
            Ok(Outcome::ok(render(
                cli.format,
                &[(kind.name(), lepage_label(kind), Item::Form(theta.form))],
            )))
        }
        Command::Vt { file } => {
            let p = read_problem(cli, file)?;
            let split = canonical_split(&p.lagrangian)?;
            Ok(Outcome::ok(render(
                cli.format,
                &[(
                    "lagrangian_vt",
                    "\\lambda_{VT}",
                    Item::Form(split.lagrangian_vt.form()),
                )],
            )))
        }
        Command::Split { file } => {
            let p = read_problem(cli, file)?;
            let split = canonical_split(&p.lagrangian)?;
            let passed = split.reassembled() == p.lagrangian;
            let mut text = render(
                cli.format,
                &[
                    (
                        "lagrangian_vt",
                        "\\lambda_{VT}",
                        Item::Form(split.lagrangian_vt.form()),
                    ),
                    ("alpha", "\\alpha", Item::Form(split.alpha.clone())),
                    ("d_alpha", "d\\alpha", Item::Form(split.d_alpha.clone())),
                ],
            );
            if !passed {
                text.push_str(
                    "\nverification failed: lambda_vt + h d(alpha) differs from the Lagrangian",
                );
            }
            Ok(Outcome { text, passed })
        }
        Command::Check(args) => check(cli, args),
        Command::Noether { xi, kind, file } => {
            let p = read_problem(cli, file)?;
            let field = vector_field(&p, xi)?;
            let theta = lepage(&p, LepageKind::from(*kind))?;
            let current = noether_current(&theta, &field)?;
            Ok(Outcome::ok(render(
                cli.format,
                &[("current", "J", Item::Form(current))],
            )))
        }
    }
}

/// Parses `name=expr; ...` into a projectable vector field.
fn vector_field(p: &Problem, spec: &str) -> Result<VectorFieldSpec, CliError> {
    let chart = &p.chart;
    let mut xi = vec![ScalarExpr::zero(); chart.n()];
    let mut vertical = vec![ScalarExpr::zero(); chart.m()];
    for part in spec.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, expr) = part.split_once('=').ok_or_else(|| {
            CliError::Usage(format!(
                "--xi component `{part}` is not of the form name=expr"
            ))
        })?;
        let name = name.trim();
        let value = p
            .expression(expr)
            .map_err(|e| CliError::Usage(format!("--xi component `{name}`: {e}")))?;
        if let Some(i) = chart.find_base(name) {
            xi[i] = value;
        } else if let Some(s) = chart.find_field(name) {
            vertical[s] = value;
        } else {
            return Err(CliError::Usage(format!(
                "--xi names `{name}`, which is neither a base coordinate nor a field"
            )));
        }
    }
    VectorFieldSpec::new(chart, xi, vertical).map_err(|e| CliError::Usage(format!("--xi: {e}")))
}

fn has_atoms(rho: &DiffForm) -> bool {
    rho.terms()
        .any(|(_, c)| c.contains_var_where(|v| v.is_atom()))
}

/// One residual that should vanish.
struct Residual {
    name: String,
    form: DiffForm,
}

/// Decides each residual symbolically, falling back to (or adding) numeric
/// evaluation, and renders the report.
fn conclude(
    cli: &Cli,
    args: &CheckArgs,
    check: &str,
    residuals: Vec<Residual>,
    extra: Value,
) -> Result<Outcome, CliError> {
    let mut symbolic = Vec::new();
    let mut numeric_needed: Vec<&Residual> = Vec::new();
    for r in &residuals {
        let zero = r.form.is_zero();
        if !zero && has_atoms(&r.form) {
            numeric_needed.push(r);
        }
        symbolic.push((r, zero));
    }
    let trials = args.numeric.unwrap_or(if numeric_needed.is_empty() {
        0
    } else {
        FALLBACK_TRIALS
    });
    let report = if trials > 0 {
        let mut report = SuiteReport::new(check, args.seed, trials);
        let forms: Vec<(&str, &DiffForm)> = residuals
            .iter()
            .map(|r| (r.name.as_str(), &r.form))
            .collect();
        report.check_forms(&forms, NUMERIC_TOLERANCE)?;
        Some(report)
    } else {
        None
    };
    let numeric_failed = |name: &str| {
        report
            .as_ref()
            .is_some_and(|rep| rep.failures.iter().any(|f| f.check == name))
    };
    let mut passed = true;
    let mut lines = Vec::new();
    let mut entries = Vec::new();
    for (r, zero) in &symbolic {
        let ok =
            (*zero || numeric_needed.iter().any(|n| n.name == r.name)) && !numeric_failed(&r.name);
        passed &= ok;
        let status = match (ok, zero) {
            (true, true) => "ok".to_string(),
            (true, false) => "ok (numerically)".to_string(),
            (false, _) => format!(
                "FAILED, residual {}",
                residual_excerpt(&r.form, cli.verbose)
            ),
        };
        lines.push(format!("{}: {status}", r.name));
        entries.push(json!({
            "name": r.name,
            "passed": ok,
            "symbolic_zero": zero,
            "first_term": if *zero { Value::Null } else { Value::String(residual_excerpt(&r.form, cli.verbose)) },
        }));
    }
    if let Some(rep) = &report {
        lines.push(format!(
            "numeric: {} trials, seed {}, max residual {:e}, {} failures",
            rep.trials,
            rep.seed,
            rep.max_residual,
            rep.failures.len()
        ));
    }
    let text = match cli.format {
        Format::Json => {
            let mut v = json!({
                "check": check,
                "passed": passed,
                "residuals": entries,
                "numeric": report.as_ref().map(|r| r.to_json()),
            });
            if let (Value::Object(map), Value::Object(more)) = (&mut v, extra) {
                map.extend(more);
            }
            serde_json::to_string_pretty(&v).expect("serializable")
        }
        _ => {
            let mut head = format!(
                "check {check}: {}",
                if passed { "passed" } else { "FAILED" }
            );
            if let Value::Object(more) = extra {
                for (k, v) in more {
                    head.push_str(&format!(", {k} {v}"));
                }
            }
            std::iter::once(head)
                .chain(lines)
                .collect::<Vec<_>>()
                .join("\n")
        }
    };
    Ok(Outcome { text, passed })
}

fn check(cli: &Cli, args: &CheckArgs) -> Result<Outcome, CliError> {
    let p = read_problem(cli, &args.file)?;
    if args.lepage {
        let kinds: Vec<LepageKind> = match args.kind {
            Some(k) => vec![k.into()],
            None => {
                let mut v = vec![LepageKind::Principal];
                if p.lagrangian.order() <= 1 {
                    v.push(LepageKind::Fundamental);
                }
                v.push(LepageKind::Canonical);
                if p.reduced.is_some() {
                    v.push(LepageKind::Reduced);
                }
                v
            }
        };
        let mut residuals = Vec::new();
        let mut degrees = serde_json::Map::new();
        for kind in kinds {
            let theta = lepage(&p, kind)?;
            let report = verify_lepage_conditions(&theta.form, &p.lagrangian)?;
            degrees.insert(kind.name().into(), json!(report.contact_degrees));
            residuals.push(Residual {
                name: format!("{} horizontal part", kind.name()),
                form: report.horizontal_residual,
            });
            residuals.push(Residual {
                name: format!("{} non-source part of p1 d", kind.name()),
                form: report.non_source_part,
            });
            residuals.push(Residual {
                name: format!("{} source form minus Euler-Lagrange", kind.name()),
                form: report.source_residual.to_form(),
            });
        }
        return conclude(
            cli,
            args,
            "lepage",
            residuals,
            json!({ "contact_degrees": degrees }),
        );
    }
    let kind: LepageKind = args.kind.unwrap_or(Kind::Canonical).into();
    let theta = lepage(&p, kind)?;
    if args.closure {
        let trivial = euler_lagrange(&p.lagrangian)?.is_zero();
        let d_theta = theta.form.d()?;
        let residuals = vec![Residual {
            name: format!("d of {}", kind.name()),
            form: d_theta,
        }];
        return conclude(
            cli,
            args,
            "closure",
            residuals,
            json!({ "kind": kind.name(), "trivial": trivial }),
        );
    }
    let mut residuals = Vec::new();
    for (name, rho) in [
        ("lagrangian", p.lagrangian.form()),
        (kind.name(), theta.form),
    ] {
        let mut rebuilt = homotopy_operator(&rho.d()?)?.add(&rho.pullback_zero_section()?);
        if rho.degree() > 0 {
            rebuilt = rebuilt.add(&homotopy_operator(&rho)?.d()?);
        }
        residuals.push(Residual {
            name: format!("{name}: rho - (I d rho + d I rho + zero-section pullback)"),
            form: rho.sub(&rebuilt),
        });
        residuals.push(Residual {
            name: format!("{name}: I h rho"),
            form: homotopy_operator(&rho.horizontal())?,
        });
    }
    conclude(
        cli,
        args,
        "homotopy",
        residuals,
        json!({ "kind": kind.name() }),
    )
}
