//! Pretty-printer producing text that reparses to the same tree.

use std::fmt::Write;

use crate::ast::*;

fn precedence(e: &Expr) -> u8 {
    match e.kind {
        ExprKind::Add(..) | ExprKind::Sub(..) => 1,
        ExprKind::Mul(..) | ExprKind::Div(..) => 2,
        ExprKind::Neg(_) => 3,
        ExprKind::Pow(..) => 4,
        _ => 5,
    }
}

fn index_text(ix: &[IndexArg]) -> String {
    ix.iter()
        .map(|a| match a {
            IndexArg::Lit(k, _) => k.to_string(),
            IndexArg::Name(n) => n.text.clone(),
        })
        .collect::<Vec<_>>()
        .join(",")
}

fn wrap(out: &mut String, e: &Expr, parens: bool) {
    if parens {
        out.push('(');
        write_expr(out, e);
        out.push(')');
    } else {
        write_expr(out, e);
    }
}

fn write_binary(out: &mut String, a: &Expr, op: &str, b: &Expr, level: u8) {
    wrap(out, a, precedence(a) < level);
    out.push_str(op);
    wrap(out, b, precedence(b) <= level);
}

fn write_expr(out: &mut String, e: &Expr) {
    match &e.kind {
        ExprKind::Int(v) => write!(out, "{v}").unwrap(),
        ExprKind::Ref(name, ix) => {
            out.push_str(name);
            if !ix.is_empty() {
                write!(out, "[{}]", index_text(ix)).unwrap();
            }
        }
        ExprKind::Deriv(t, ix) | ExprKind::TotalDeriv(t, ix) => {
            out.push_str(if matches!(e.kind, ExprKind::Deriv(..)) {
                "D("
            } else {
                "dtot("
            });
            write_expr(out, t);
            if !ix.is_empty() {
                write!(out, ", {}", index_text(ix).replace(',', ", ")).unwrap();
            }
            out.push(')');
        }
        ExprKind::Sum(binders, body) => {
            let names: Vec<&str> = binders.iter().map(|b| b.text.as_str()).collect();
            write!(out, "sum({}){{ ", names.join(",")).unwrap();
            write_expr(out, body);
            out.push_str(" }");
        }
        ExprKind::Neg(x) => {
            out.push('-');
            wrap(out, x, precedence(x) < 3);
        }
        ExprKind::Add(a, b) => write_binary(out, a, " + ", b, 1),
        ExprKind::Sub(a, b) => write_binary(out, a, " - ", b, 1),
        ExprKind::Mul(a, b) => write_binary(out, a, "*", b, 2),
        ExprKind::Div(a, b) => write_binary(out, a, "/", b, 2),
        ExprKind::Pow(b, k) => {
            wrap(out, b, precedence(b) < 5);
            write!(out, "^{k}").unwrap();
        }
    }
}

pub fn print_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e);
    out
}

fn const_text(v: &ConstValue) -> String {
    match v {
        ConstValue::Scalar(q) => q.to_string(),
        ConstValue::Diag(d) => format!(
            "diag({})",
            d.iter()
                .map(|q| q.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        ),
        ConstValue::Array(items) => format!(
            "[{}]",
            items.iter().map(const_text).collect::<Vec<_>>().join(", ")
        ),
    }
}

fn joined(names: &[Name]) -> String {
    names
        .iter()
        .map(|n| n.text.as_str())
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn print_file(pf: &ProblemFile) -> String {
    let mut out = String::new();
    let c = &pf.chart;
    out.push_str("chart {\n");
    if !c.base.is_empty() {
        writeln!(out, "  base {}", joined(&c.base)).unwrap();
    }
    if !c.fields.is_empty() {
        let fields: Vec<String> = c
            .fields
            .iter()
            .map(|f| {
                let mut s = f.name.text.clone();
                if !f.shape.is_empty() {
                    let dims: Vec<String> = f.shape.iter().map(|d| d.to_string()).collect();
                    write!(s, "[{}]", dims.join(",")).unwrap();
                    if f.symmetric {
                        s.push_str(" sym");
                    }
                }
                s
            })
            .collect();
        writeln!(out, "  fields {}", fields.join(", ")).unwrap();
    }
    writeln!(out, "  order {}", c.order).unwrap();
    if !c.metrics.is_empty() {
        writeln!(out, "  metric {}", joined(&c.metrics)).unwrap();
    }
    out.push_str("}\n");
    if !pf.constants.is_empty() {
        out.push_str("constants {\n");
        for k in &pf.constants {
            writeln!(out, "  {} = {}", k.name.text, const_text(&k.value)).unwrap();
        }
        out.push_str("}\n");
    }
    if !pf.params.is_empty() {
        writeln!(out, "params {{ {} }}", joined(&pf.params)).unwrap();
    }
    for l in &pf.lets {
        out.push_str("let ");
        out.push_str(&l.name.text);
        if !l.indices.is_empty() {
            let ix: Vec<&str> = l.indices.iter().map(|n| n.text.as_str()).collect();
            write!(out, "[{}]", ix.join(",")).unwrap();
        }
        writeln!(out, " := {}", print_expr(&l.body)).unwrap();
    }
    writeln!(out, "lagrangian {{\n  {}\n}}", print_expr(&pf.lagrangian)).unwrap();
    if let Some(r) = &pf.reduced {
        out.push_str("reduced {\n");
        writeln!(out, "  lagrangian {{ {} }}", print_expr(&r.lagrangian)).unwrap();
        writeln!(
            out,
            "  alpha[{}] := {}",
            r.alpha_index.text,
            print_expr(&r.alpha)
        )
        .unwrap();
        out.push_str("}\n");
    }
    out
}
