use serde_json::{json, Value};

use super::{BasisOneForm, DiffForm, FormMonomial};
use crate::jet::print::latex_identifier;
use crate::jet::{expr_to_latex, expr_to_string, ChartSpec, ScalarExpr};

/// JSON factor token: `dx[i]`, `w[field;J]` or `dy[field;J]`.
pub fn factor_to_string(chart: &ChartSpec, b: &BasisOneForm) -> String {
    match b {
        BasisOneForm::Dx(i) => format!("dx[{i}]"),
        BasisOneForm::Contact(s, j) => format!("w[{};{j}]", chart.field_names()[*s]),
        BasisOneForm::DyTop(s, j) => format!("dy[{};{j}]", chart.field_names()[*s]),
    }
}

pub fn form_to_json(rho: &DiffForm) -> Value {
    let chart = rho.chart();
    let terms: Vec<Value> = rho
        .terms()
        .map(|(m, c)| {
            json!({
                "coeff": expr_to_string(chart, c),
                "factors": m.factors().iter().map(|b| factor_to_string(chart, b)).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({
        "order": rho.order(),
        "degree": rho.degree(),
        "terms": terms,
    })
}

/// Horizontal factor of a term after moving contact factors to the front.
enum Horizontal {
    None,
    Volume,
    Omega(Vec<usize>),
    Plain(Vec<usize>),
}

/// Splits `dx^I ∧ Θ` into `sign · Θ ∧ (horizontal part)`.
fn decompose(n: usize, m: &FormMonomial) -> (bool, Vec<BasisOneForm>, Horizontal) {
    let dx = m.dx_indices();
    let contact = m.contact_factors();
    let mut negative = (dx.len() * contact.len()) % 2 == 1;
    let missing: Vec<usize> = (0..n).filter(|i| !dx.contains(i)).collect();
    let h = match (dx.len(), missing.as_slice()) {
        (0, _) => Horizontal::None,
        (k, []) if k == n => Horizontal::Volume,
        (_, [i]) => {
            negative ^= i % 2 == 1;
            Horizontal::Omega(vec![*i])
        }
        (_, [i, j]) => {
            negative ^= (i + j + 1) % 2 == 1;
            Horizontal::Omega(vec![*i, *j])
        }
        _ => Horizontal::Plain(dx),
    };
    (negative, contact, h)
}

fn needs_parens(c: &ScalarExpr) -> bool {
    c.num().len() > 1 || !c.is_polynomial()
}

pub fn form_to_text(rho: &DiffForm) -> String {
    let chart = rho.chart();
    if rho.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (k, (m, c)) in rho.terms().enumerate() {
        let (negative, contact, h) = decompose(chart.n(), m);
        let mut c = if negative { c.neg() } else { c.clone() };
        // a single negative term is written with a leading minus sign
        let minus = !needs_parens(&c)
            && c.num()
                .terms()
                .first()
                .is_some_and(|(_, q)| q.is_negative());
        if minus {
            c = c.neg();
        }
        match (k, minus) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str("\n- "),
            (_, false) => out.push_str("\n+ "),
        }
        let mut factors: Vec<String> = contact.iter().map(|b| factor_to_string(chart, b)).collect();
        match h {
            Horizontal::None => {}
            Horizontal::Volume => factors.push("omega0".into()),
            Horizontal::Omega(ix) => factors.push(format!(
                "omega_({})",
                ix.iter()
                    .map(|i| i.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            )),
            Horizontal::Plain(ix) => factors.extend(ix.iter().map(|i| format!("dx[{i}]"))),
        }
        let coeff = expr_to_string(chart, &c);
        let coeff = if needs_parens(&c) {
            format!("({coeff})")
        } else {
            coeff
        };
        if factors.is_empty() {
            out.push_str(&coeff);
        } else {
            out.push_str(&format!("{coeff} * {}", factors.join(" ^ ")));
        }
    }
    out
}

fn contact_latex(chart: &ChartSpec, b: &BasisOneForm) -> String {
    let (s, j, head) = match b {
        BasisOneForm::Contact(s, j) => (*s, *j, "\\omega"),
        BasisOneForm::DyTop(s, j) => (*s, *j, "dy"),
        BasisOneForm::Dx(i) => return format!("dx^{{{i}}}"),
    };
    let (name, sub) = latex_identifier(&chart.field_names()[s]);
    let name = match sub {
        Some(k) => format!("{name}_{{{k}}}"),
        None => name,
    };
    let jtxt: String = j.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("");
    if j.is_empty() {
        format!("{head}^{{{name}}}")
    } else {
        format!("{head}^{{{name}}}_{{{jtxt}}}")
    }
}

pub fn form_to_latex(rho: &DiffForm) -> String {
    let chart = rho.chart();
    if rho.is_zero() {
        return "0".to_string();
    }
    let mut parts = Vec::new();
    for (k, (m, c)) in rho.terms().enumerate() {
        let (negative, contact, h) = decompose(chart.n(), m);
        let c = if negative { c.neg() } else { c.clone() };
        let mut factors: Vec<String> = contact.iter().map(|b| contact_latex(chart, b)).collect();
        match h {
            Horizontal::None => {}
            Horizontal::Volume => factors.push("\\omega_{\\mathrm{vol}}".into()),
            Horizontal::Omega(ix) => factors.push(format!(
                "\\omega_{{{}}}",
                ix.iter()
                    .map(|i| i.to_string())
                    .collect::<Vec<_>>()
                    .join("")
            )),
            Horizontal::Plain(ix) => factors.extend(ix.iter().map(|i| format!("dx^{{{i}}}"))),
        }
        let mut coeff = expr_to_latex(chart, &c);
        if needs_parens(&c) {
            coeff = format!("\\left({coeff}\\right)");
        }
        let body = if factors.is_empty() {
            coeff
        } else if c.is_one() {
            factors.join(" \\wedge ")
        } else {
            format!("{coeff} \\, {}", factors.join(" \\wedge "))
        };
        if k > 0 && !body.starts_with('-') {
            parts.push(format!("+ {body}"));
        } else {
            parts.push(body);
        }
    }
    parts.join(" ")
}
