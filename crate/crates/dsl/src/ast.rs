//! Syntax tree of a problem file.

use num_bigint::BigInt;

use jetforms_core::jet::Q;

use crate::error::Pos;

#[derive(Clone, Debug, PartialEq)]
pub struct Name {
    pub text: String,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemFile {
    pub chart: ChartBlock,
    pub constants: Vec<ConstantDecl>,
    pub params: Vec<Name>,
    pub lets: Vec<LetBinding>,
    pub lagrangian: Expr,
    pub reduced: Option<ReducedBlock>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChartBlock {
    pub pos: Pos,
    pub base: Vec<Name>,
    pub fields: Vec<FieldDecl>,
    /// Highest derivative order allowed in expressions.
    pub order: usize,
    /// Symmetric families that get an inverse and a volume symbol.
    pub metrics: Vec<Name>,
}

/// `phi`, `A[4]` or `g[4,4] sym`.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldDecl {
    pub name: Name,
    pub shape: Vec<usize>,
    pub symmetric: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstantDecl {
    pub name: Name,
    pub value: ConstValue,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ConstValue {
    Scalar(Q),
    Diag(Vec<Q>),
    Array(Vec<ConstValue>),
}

/// `let name[i,j] := body`; the body sees only the listed indices.
#[derive(Clone, Debug, PartialEq)]
pub struct LetBinding {
    pub name: Name,
    pub indices: Vec<Name>,
    pub body: Expr,
}

/// Inputs for the reduced Lepage equivalent: `λ'` and the components of
/// `α = α^i ω_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedBlock {
    pub pos: Pos,
    pub lagrangian: Expr,
    pub alpha_index: Name,
    pub alpha: Expr,
}

#[derive(Clone, Debug, PartialEq)]
pub enum IndexArg {
    Lit(usize, Pos),
    Name(Name),
}

impl IndexArg {
    pub fn pos(&self) -> Pos {
        match self {
            IndexArg::Lit(_, p) => *p,
            IndexArg::Name(n) => n.pos,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Int(BigInt),
    /// Identifier, optionally with component indices.
    Ref(String, Vec<IndexArg>),
    /// `D(field, i, ...)`; the target must be a field reference.
    Deriv(Box<Expr>, Vec<IndexArg>),
    /// `dtot(expr, i, ...)`: total derivative of an arbitrary expression.
    TotalDeriv(Box<Expr>, Vec<IndexArg>),
    Sum(Vec<Name>, Box<Expr>),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
}

impl Expr {
    pub fn new(kind: ExprKind, pos: Pos) -> Self {
        Expr { kind, pos }
    }
}
