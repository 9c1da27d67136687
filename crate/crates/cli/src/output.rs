//! Rendering of engine results in the three output formats.

use jetforms_core::forms::{form_to_json, form_to_latex, form_to_text, DiffForm};
use jetforms_core::jet::print::latex_identifier;
use jetforms_core::jet::{expr_to_latex, expr_to_string};
use jetforms_core::varcalc::SourceForm;
use serde_json::{json, Map, Value};

use crate::Format;

/// A named piece of output: a form, a source form or a scalar.
pub enum Item {
    Form(DiffForm),
    Source(SourceForm),
}

pub fn latex_name(name: &str) -> String {
    match latex_identifier(name) {
        (head, Some(sub)) => format!("{head}_{{{sub}}}"),
        (head, None) => head,
    }
}

fn source_json(e: &SourceForm) -> Value {
    let chart = e.chart();
    let mut map = Map::new();
    for (s, c) in e.components().iter().enumerate() {
        map.insert(
            chart.field_names()[s].clone(),
            Value::String(expr_to_string(chart, c)),
        );
    }
    Value::Object(map)
}

fn item_json(item: &Item) -> Value {
    match item {
        Item::Form(f) => form_to_json(f),
        Item::Source(e) => source_json(e),
    }
}

fn item_text(item: &Item) -> String {
    match item {
        Item::Form(f) => form_to_text(f),
        Item::Source(e) => {
            let chart = e.chart();
            e.components()
                .iter()
                .enumerate()
                .map(|(s, c)| {
                    format!(
                        "E[{}] = {}",
                        chart.field_names()[s],
                        expr_to_string(chart, c)
                    )
                })
                .collect::<Vec<_>>()
                .join("\n")
        }
    }
}

fn item_latex(latex_label: &str, item: &Item) -> String {
    match item {
        Item::Form(f) => format!("{latex_label} = {}", form_to_latex(f)),
        Item::Source(e) => {
            let chart = e.chart();
            e.components()
                .iter()
                .enumerate()
                .map(|(s, c)| {
                    format!(
                        "\\mathcal{{E}}_{{{}}} = {}",
                        latex_name(&chart.field_names()[s]),
                        expr_to_latex(chart, c)
                    )
                })
                .collect::<Vec<_>>()
                .join("\n")
        }
    }
}

/// Renders `(json key, LaTeX label, item)` triples. A single item is
/// emitted bare in JSON; several become an object keyed by name.
pub fn render(format: Format, items: &[(&str, &str, Item)]) -> String {
    match format {
        Format::Json => {
            let value = if let [(key, _, item)] = items {
                match item {
                    Item::Source(_) => json!({ *key: item_json(item) }),
                    Item::Form(_) => item_json(item),
                }
            } else {
                let mut map = Map::new();
                for (key, _, item) in items {
                    map.insert(key.to_string(), item_json(item));
                }
                Value::Object(map)
            };
            serde_json::to_string_pretty(&value).expect("serializable")
        }
        Format::Text => {
            if let [(_, _, item)] = items {
                return item_text(item);
            }
            items
                .iter()
                .map(|(key, _, item)| {
                    format!("{key} =\n  {}", item_text(item).replace('\n', "\n  "))
                })
                .collect::<Vec<_>>()
                .join("\n")
        }
        Format::Latex => items
            .iter()
            .map(|(_, label, item)| item_latex(label, item))
            .collect::<Vec<_>>()
            .join("\n"),
    }
}

/// First term of a nonzero residual, or all of it when `verbose`.
pub fn residual_excerpt(rho: &DiffForm, verbose: bool) -> String {
    if verbose {
        return form_to_text(rho);
    }
    match rho.first_term() {
        None => "0".to_string(),
        Some((m, c)) => {
            let single = DiffForm::from_terms(
                rho.chart(),
                rho.degree(),
                rho.order(),
                [(m.factors().to_vec(), c.clone())],
            );
            let more = rho.len() - 1;
            if more > 0 {
                format!(
                    "{} (+{more} more terms; --verbose shows all)",
                    form_to_text(&single)
                )
            } else {
                form_to_text(&single)
            }
        }
    }
}
