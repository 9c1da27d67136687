//! Reading forms and source forms back from their JSON rendering.

use serde_json::Value;

use jetforms_core::forms::{BasisOneForm, DiffForm};
use jetforms_core::jet::{Chart, MultiIndex, ScalarExpr};
use jetforms_core::varcalc::SourceForm;

use crate::elaborate::expr_from_str;
use crate::error::{DslError, ErrorKind, Pos};

fn bad(msg: impl Into<String>) -> DslError {
    DslError::new(ErrorKind::Syntax, Pos::default(), msg)
}

fn coefficient(chart: &Chart, text: &str) -> Result<ScalarExpr, DslError> {
    expr_from_str(chart, text).map_err(|e| bad(format!("coefficient `{text}`: {e}")))
}

fn multi_index(chart: &Chart, text: &str) -> Result<MultiIndex, DslError> {
    if text.is_empty() {
        return Ok(MultiIndex::EMPTY);
    }
    let mut idx = Vec::new();
    for part in text.split(',') {
        let i: usize = part
            .trim()
            .parse()
            .map_err(|_| bad(format!("bad multi-index `{text}`")))?;
        if i >= chart.n() {
            return Err(bad(format!("multi-index entry {i} out of range")));
        }
        idx.push(i);
    }
    if idx.len() > chart.max_order() {
        return Err(bad(format!("multi-index `{text}` exceeds the chart order")));
    }
    Ok(MultiIndex::new(&idx))
}

/// Parses a factor token `dx[i]`, `w[field;J]` or `dy[field;J]`.
pub fn factor_from_str(chart: &Chart, token: &str) -> Result<BasisOneForm, DslError> {
    let (head, rest) = token
        .split_once('[')
        .ok_or_else(|| bad(format!("bad factor `{token}`")))?;
    let inner = rest
        .strip_suffix(']')
        .ok_or_else(|| bad(format!("bad factor `{token}`")))?;
    if head == "dx" {
        let i: usize = inner
            .parse()
            .map_err(|_| bad(format!("bad factor `{token}`")))?;
        if i >= chart.n() {
            return Err(bad(format!("factor `{token}` out of range")));
        }
        return Ok(BasisOneForm::Dx(i));
    }
    let (field, j) = inner
        .split_once(';')
        .ok_or_else(|| bad(format!("bad factor `{token}`")))?;
    let s = chart
        .find_field(field)
        .ok_or_else(|| bad(format!("unknown field `{field}`")))?;
    let j = multi_index(chart, j)?;
    match head {
        "w" => Ok(BasisOneForm::Contact(s, j)),
        "dy" => Ok(BasisOneForm::DyTop(s, j)),
        _ => Err(bad(format!("bad factor `{token}`"))),
    }
}

/// Inverse of `form_to_json`.
pub fn form_from_json(chart: &Chart, v: &Value) -> Result<DiffForm, DslError> {
    let degree = v["degree"]
        .as_u64()
        .ok_or_else(|| bad("missing `degree`"))? as usize;
    let order = v["order"].as_u64().ok_or_else(|| bad("missing `order`"))? as usize;
    let terms = v["terms"]
        .as_array()
        .ok_or_else(|| bad("missing `terms`"))?;
    let mut list = Vec::with_capacity(terms.len());
    for t in terms {
        let coeff = t["coeff"]
            .as_str()
            .ok_or_else(|| bad("term without `coeff`"))?;
        let factors = t["factors"]
            .as_array()
            .ok_or_else(|| bad("term without `factors`"))?;
        if factors.len() != degree {
            return Err(bad(format!(
                "term has {} factors, degree is {degree}",
                factors.len()
            )));
        }
        let factors = factors
            .iter()
            .map(|f| {
                f.as_str()
                    .ok_or_else(|| bad("factor is not a string"))
                    .and_then(|s| factor_from_str(chart, s))
            })
            .collect::<Result<Vec<_>, _>>()?;
        list.push((factors, coefficient(chart, coeff)?));
    }
    Ok(DiffForm::from_terms(chart, degree, order, list))
}

/// Reads `{"source_form": {"<field>": "<expr>", ...}}`; missing fields are zero.
pub fn source_form_from_json(chart: &Chart, v: &Value) -> Result<SourceForm, DslError> {
    let map = v["source_form"]
        .as_object()
        .ok_or_else(|| bad("missing `source_form` object"))?;
    let mut components = vec![ScalarExpr::zero(); chart.m()];
    for (name, text) in map {
        let s = chart
            .find_field(name)
            .ok_or_else(|| bad(format!("unknown field `{name}`")))?;
        let text = text
            .as_str()
            .ok_or_else(|| bad(format!("component `{name}` is not a string")))?;
        components[s] = coefficient(chart, text)?;
    }
    SourceForm::new(chart, components).map_err(|e| bad(e.to_string()))
}
