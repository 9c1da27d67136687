//! Canonical text and LaTeX rendering of scalar expressions.

use super::chart::ChartSpec;
use super::coeff::Q;
use super::expr::ScalarExpr;
use super::poly::{Monomial, Poly};
use super::var::{Var, VarKind};

/// Canonical expression string, re-parseable by the problem-file grammar.
pub fn expr_to_string(chart: &ChartSpec, e: &ScalarExpr) -> String {
    let num = poly_to_string(chart, e.num());
    if e.is_polynomial() {
        return num;
    }
    format!("({num})/({})", poly_to_string(chart, e.den()))
}

fn monomial_text(chart: &ChartSpec, m: &Monomial) -> String {
    let parts: Vec<String> = m
        .factors()
        .iter()
        .map(|&(v, e)| {
            let name = chart.var_name(v);
            if e == 1 {
                name
            } else {
                format!("{name}^{e}")
            }
        })
        .collect();
    parts.join("*")
}

pub fn poly_to_string(chart: &ChartSpec, p: &Poly) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (k, (m, c)) in p.terms().iter().enumerate() {
        let neg = c.is_negative();
        let abs = c.abs();
        if k == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        if m.is_one() {
            out.push_str(&abs.to_string());
        } else if abs.is_one() {
            out.push_str(&monomial_text(chart, m));
        } else {
            out.push_str(&format!("{abs}*{}", monomial_text(chart, m)));
        }
    }
    out
}

const GREEK: &[&str] = &[
    "alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta", "iota", "kappa",
    "lambda", "mu", "nu", "xi", "pi", "rho", "sigma", "tau", "upsilon", "phi", "chi", "psi",
    "omega", "Gamma", "Delta", "Theta", "Lambda", "Xi", "Pi", "Sigma", "Phi", "Psi", "Omega",
];

/// LaTeX for an identifier: greek names become macros, a trailing `_k`
/// suffix becomes a subscript, anything else is set upright.
pub fn latex_identifier(name: &str) -> (String, Option<String>) {
    let (head, sub) = match name.split_once('_') {
        Some((h, s)) if !h.is_empty() && !s.is_empty() => (h, Some(s.replace('_', ""))),
        _ => (name, None),
    };
    let head = if GREEK.contains(&head) {
        format!("\\{head}")
    } else if head.chars().count() == 1 {
        head.to_string()
    } else {
        format!("\\mathrm{{{}}}", head.replace('_', "\\_"))
    };
    (head, sub)
}

fn var_latex(chart: &ChartSpec, v: Var) -> String {
    match v.kind() {
        VarKind::Base(i) => latex_identifier(&chart.base_names()[i]).0,
        VarKind::Fiber(s, j) => {
            let (head, sub) = latex_identifier(&chart.field_names()[s]);
            let jtxt: String = j.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("");
            match (sub, j.is_empty()) {
                (None, true) => head,
                (Some(s), true) => format!("{head}_{{{s}}}"),
                (None, false) => format!("{head}_{{{jtxt}}}"),
                (Some(s), false) => format!("{head}_{{{s},{jtxt}}}"),
            }
        }
        VarKind::Param(p) => {
            let (head, sub) = latex_identifier(&chart.params()[p]);
            match sub {
                Some(s) => format!("{head}_{{{s}}}"),
                None => head,
            }
        }
        VarKind::Atom(s) => {
            let name = chart.symbol(s).map(|x| x.name.as_str()).unwrap_or("?");
            let head = format!("\\mathrm{{{}}}", name.replace('_', "\\_"));
            let idx = v.atom_indices();
            if idx.is_empty() {
                head
            } else {
                let t: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
                format!("{head}^{{{}}}", t.join(""))
            }
        }
        VarKind::HomotopyT => "t".to_string(),
    }
}

fn q_latex(c: &Q) -> String {
    if c.is_integer() {
        c.to_string()
    } else {
        format!("\\frac{{{}}}{{{}}}", c.numer(), c.denom())
    }
}

pub fn poly_to_latex(chart: &ChartSpec, p: &Poly) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (k, (m, c)) in p.terms().iter().enumerate() {
        let neg = c.is_negative();
        let abs = c.abs();
        if k == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let vars: Vec<String> = m
            .factors()
            .iter()
            .map(|&(v, e)| {
                let base = var_latex(chart, v);
                if e == 1 {
                    base
                } else {
                    format!("{{{base}}}^{{{e}}}")
                }
            })
            .collect();
        if m.is_one() {
            out.push_str(&q_latex(&abs));
        } else if abs.is_one() {
            out.push_str(&vars.join(" "));
        } else {
            out.push_str(&format!("{} {}", q_latex(&abs), vars.join(" ")));
        }
    }
    out
}

pub fn expr_to_latex(chart: &ChartSpec, e: &ScalarExpr) -> String {
    let num = poly_to_latex(chart, e.num());
    if e.is_polynomial() {
        return num;
    }
    format!("\\frac{{{num}}}{{{}}}", poly_to_latex(chart, e.den()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::MultiIndex;

    #[test]
    fn text_form() {
        let c = ChartSpec::new(["t", "x"], ["phi"])
            .unwrap()
            .with_params(["m2"])
            .unwrap();
        let phi = ScalarExpr::var(Var::field(0));
        let phi0 = ScalarExpr::var(Var::fiber(0, MultiIndex::single(0)));
        let m2 = ScalarExpr::var(Var::param(0));
        let e = phi0
            .mul(&phi0)
            .scale(&Q::new(1, 2))
            .sub(&m2.mul(&phi).mul(&phi).scale(&Q::new(1, 2)));
        let s = expr_to_string(&c, &e);
        assert!(s.contains("1/2*D(phi,0)^2"), "{s}");
        assert!(
            s.contains("- 1/2*phi^2*m2") || s.starts_with("-1/2*phi^2*m2"),
            "{s}"
        );
    }

    #[test]
    fn latex_identifiers() {
        assert_eq!(latex_identifier("phi").0, "\\phi");
        assert_eq!(
            latex_identifier("A_3"),
            ("A".to_string(), Some("3".to_string()))
        );
        assert_eq!(latex_identifier("m2").0, "\\mathrm{m2}");
    }
}
