//! Problem-file language for jetforms.
//!
//! A problem file declares a chart (base coordinates, scalar fields or field
//! families, an order bound and optional metric families), rational constant
//! tensors, parameters, let-bindings and a Lagrangian density written with
//! explicit `sum(i,j){ ... }` binders. [`load`] parses and elaborates it into
//! engine objects.
//!
//! ```text
//! chart {
//!   base t, x, y, z
//!   fields phi
//!   order 1
//! }
//! constants { eta = diag(1, -1, -1, -1) }
//! params { m2 }
//! lagrangian {
//!   1/2*sum(i,j){ eta[i,j]*D(phi,i)*D(phi,j) } - 1/2*m2*phi^2
//! }
//! ```

pub mod ast;
mod elaborate;
mod error;
mod json;
mod lexer;
mod parser;
mod print;

pub use elaborate::{elaborate, expr_from_str, load, ConstantTensor, Problem, ReducedInputs};
pub use error::{DslError, ErrorKind, Pos};
pub use json::{factor_from_str, form_from_json, source_form_from_json};
pub use parser::{parse, parse_expr, RESERVED};
pub use print::{print_expr, print_file};
