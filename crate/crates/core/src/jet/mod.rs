//! Chart bookkeeping and the exact scalar expression engine.

pub mod calculus;
pub mod chart;
pub mod coeff;
pub mod expr;
pub mod gcd;
pub mod multi_index;
pub mod opaque;
pub mod poly;
pub mod print;
pub mod var;

pub use calculus::{
    coordinate_dependencies, fiber_scale, integrate_t01, partial_derivative, total_derivative,
    total_derivative_multi,
};
pub use chart::{Chart, ChartSpec, OpaqueSymbol, DEFAULT_MAX_ORDER};
pub use coeff::Q;
pub use expr::ScalarExpr;
pub use multi_index::{MultiIndex, MAX_BASE_DIM, MAX_JET_ORDER};
pub use opaque::{MetricFamily, OpaqueRule};
pub use poly::{Monomial, Poly};
pub use print::{expr_to_latex, expr_to_string};
pub use var::{FieldId, JetCoordinate, SymbolId, Var, VarKind};
