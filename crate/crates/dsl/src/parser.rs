//! Recursive-descent parser for problem files.
//!
//! ```text
//! file       := item*
//! item       := "chart" "{" chart_stmt* "}" | "constants" "{" constant* "}"
//!             | "params" "{" name ("," name)* "}" | "let" binding
//!             | "lagrangian" "{" expr "}" | "reduced" "{" reduced_stmt* "}"
//! chart_stmt := "base" names | "fields" field ("," field)* | "order" INT | "metric" names
//! field      := name ("[" INT ("," INT)* "]" "sym"?)?
//! constant   := name "=" ("diag" "(" rational,+ ")" | array | rational)
//! binding    := name ("[" names "]")? ":=" expr
//! reduced_stmt := "lagrangian" "{" expr "}" | "alpha" "[" name "]" ":=" expr
//! expr       := term (("+" | "-") term)*
//! term       := unary (("*" | "/") unary)*
//! unary      := "-" unary | power
//! power      := primary ("^" "-"? INT)?
//! primary    := INT | "(" expr ")" | "sum" "(" names ")" "{" expr "}"
//!             | ("D" | "dtot") "(" expr ("," index)* ")" | name ("[" index,+ "]")?
//! ```
//! Semicolons between statements are optional.

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use jetforms_core::jet::Q;
use num_rational::BigRational;

use crate::ast::*;
use crate::error::{DslError, ErrorKind, Pos};
use crate::lexer::{tokenize, Tok, Token};

/// Words that cannot name declarations.
pub const RESERVED: &[&str] = &["sum", "D", "dtot", "diag", "let", "sym"];

const MAX_DEPTH: usize = 200;

const PRIMARY_START: &[&str] = &[
    "number",
    "identifier",
    "`(`",
    "`-`",
    "`sum`",
    "`D`",
    "`dtot`",
];

pub fn parse(text: &str) -> Result<ProblemFile, DslError> {
    let mut p = Parser::new(text)?;
    p.file()
}

/// Parses a standalone expression.
pub fn parse_expr(text: &str) -> Result<Expr, DslError> {
    let mut p = Parser::new(text)?;
    let e = p.expr()?;
    p.expect_eof()?;
    Ok(e)
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
    depth: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self, DslError> {
        Ok(Parser {
            tokens: tokenize(text)?,
            at: 0,
            depth: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.tokens[self.at].tok
    }

    fn pos(&self) -> Pos {
        self.tokens[self.at].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.at].clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn unexpected(&self, expected: &[&str]) -> DslError {
        DslError::syntax(
            self.pos(),
            format!("unexpected {}", self.peek().describe()),
            expected,
        )
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<Pos, DslError> {
        if self.peek() == &tok {
            Ok(self.bump().pos)
        } else {
            let want = format!("`{}`", tok.symbol());
            Err(self.unexpected(&[want.as_str()]))
        }
    }

    fn expect_eof(&mut self) -> Result<(), DslError> {
        if self.peek() == &Tok::Eof {
            Ok(())
        } else {
            Err(self.unexpected(&["end of input", "operator"]))
        }
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == w)
    }

    fn skip_semis(&mut self) {
        while self.eat(&Tok::Semi) {}
    }

    fn name(&mut self) -> Result<Name, DslError> {
        match self.peek().clone() {
            Tok::Ident(text) => {
                let pos = self.bump().pos;
                Ok(Name { text, pos })
            }
            _ => Err(self.unexpected(&["identifier"])),
        }
    }

    /// A name that introduces a declaration.
    fn declared_name(&mut self) -> Result<Name, DslError> {
        let n = self.name()?;
        if RESERVED.contains(&n.text.as_str()) {
            return Err(DslError::new(
                ErrorKind::Declaration,
                n.pos,
                format!("`{}` is a reserved word", n.text),
            ));
        }
        Ok(n)
    }

    fn names(&mut self, declared: bool) -> Result<Vec<Name>, DslError> {
        let mut out = vec![if declared {
            self.declared_name()?
        } else {
            self.name()?
        }];
        while self.eat(&Tok::Comma) {
            out.push(if declared {
                self.declared_name()?
            } else {
                self.name()?
            });
        }
        Ok(out)
    }

    fn usize_lit(&mut self) -> Result<(usize, Pos), DslError> {
        match self.peek().clone() {
            Tok::Int(v) => {
                let pos = self.bump().pos;
                let k = v.to_usize().ok_or_else(|| {
                    DslError::new(ErrorKind::IndexOutOfRange, pos, format!("{v} is too large"))
                })?;
                Ok((k, pos))
            }
            _ => Err(self.unexpected(&["number"])),
        }
    }

    fn file(&mut self) -> Result<ProblemFile, DslError> {
        let mut chart = None;
        let mut constants = None;
        let mut params = None;
        let mut lets = Vec::new();
        let mut lagrangian = None;
        let mut reduced = None;
        loop {
            self.skip_semis();
            let pos = self.pos();
            let word = match self.peek() {
                Tok::Eof => break,
                Tok::Ident(w) => w.clone(),
                _ => {
                    return Err(self.unexpected(&[
                        "`chart`",
                        "`constants`",
                        "`params`",
                        "`let`",
                        "`lagrangian`",
                        "`reduced`",
                    ]))
                }
            };
            let duplicate = || {
                DslError::new(
                    ErrorKind::Declaration,
                    pos,
                    format!("duplicate `{word}` block"),
                )
            };
            match word.as_str() {
                "chart" => {
                    self.bump();
                    if chart.is_some() {
                        return Err(duplicate());
                    }
                    chart = Some(self.chart(pos)?);
                }
                "constants" => {
                    self.bump();
                    if constants.is_some() {
                        return Err(duplicate());
                    }
                    constants = Some(self.constants()?);
                }
                "params" => {
                    self.bump();
                    if params.is_some() {
                        return Err(duplicate());
                    }
                    self.expect(Tok::LBrace)?;
                    let list = if self.peek() == &Tok::RBrace {
                        Vec::new()
                    } else {
                        self.names(true)?
                    };
                    self.expect(Tok::RBrace)?;
                    params = Some(list);
                }
                "let" => {
                    self.bump();
                    lets.push(self.binding()?);
                }
                "lagrangian" => {
                    self.bump();
                    if lagrangian.is_some() {
                        return Err(duplicate());
                    }
                    lagrangian = Some(self.braced_expr()?);
                }
                "reduced" => {
                    self.bump();
                    if reduced.is_some() {
                        return Err(duplicate());
                    }
                    reduced = Some(self.reduced(pos)?);
                }
                _ => {
                    return Err(self.unexpected(&[
                        "`chart`",
                        "`constants`",
                        "`params`",
                        "`let`",
                        "`lagrangian`",
                        "`reduced`",
                    ]))
                }
            }
        }
        let end = self.pos();
        let chart =
            chart.ok_or_else(|| DslError::syntax(end, "missing `chart` block", &["`chart`"]))?;
        let lagrangian = lagrangian.ok_or_else(|| {
            DslError::syntax(end, "missing `lagrangian` block", &["`lagrangian`"])
        })?;
        Ok(ProblemFile {
            chart,
            constants: constants.unwrap_or_default(),
            params: params.unwrap_or_default(),
            lets,
            lagrangian,
            reduced,
        })
    }

    fn chart(&mut self, pos: Pos) -> Result<ChartBlock, DslError> {
        self.expect(Tok::LBrace)?;
        let mut block = ChartBlock {
            pos,
            base: Vec::new(),
            fields: Vec::new(),
            order: 1,
            metrics: Vec::new(),
        };
        let expected = ["`base`", "`fields`", "`order`", "`metric`", "`}`"];
        loop {
            self.skip_semis();
            if self.eat(&Tok::RBrace) {
                break;
            }
            let word = match self.peek() {
                Tok::Ident(w) => w.clone(),
                _ => return Err(self.unexpected(&expected)),
            };
            match word.as_str() {
                "base" => {
                    self.bump();
                    block.base.extend(self.names(true)?);
                }
                "fields" => {
                    self.bump();
                    block.fields.push(self.field()?);
                    while self.eat(&Tok::Comma) {
                        block.fields.push(self.field()?);
                    }
                }
                "order" => {
                    self.bump();
                    block.order = self.usize_lit()?.0;
                }
                "metric" => {
                    self.bump();
                    block.metrics.extend(self.names(false)?);
                }
                _ => return Err(self.unexpected(&expected)),
            }
        }
        Ok(block)
    }

    fn field(&mut self) -> Result<FieldDecl, DslError> {
        let name = self.declared_name()?;
        let mut shape = Vec::new();
        let mut symmetric = false;
        if self.eat(&Tok::LBracket) {
            shape.push(self.usize_lit()?.0);
            while self.eat(&Tok::Comma) {
                shape.push(self.usize_lit()?.0);
            }
            self.expect(Tok::RBracket)?;
            if self.is_word("sym") {
                self.bump();
                symmetric = true;
            }
        }
        Ok(FieldDecl {
            name,
            shape,
            symmetric,
        })
    }

    fn constants(&mut self) -> Result<Vec<ConstantDecl>, DslError> {
        self.expect(Tok::LBrace)?;
        let mut out = Vec::new();
        loop {
            self.skip_semis();
            if self.eat(&Tok::RBrace) {
                break;
            }
            let name = self.declared_name()?;
            self.expect(Tok::Equals)?;
            let value = if self.is_word("diag") {
                self.bump();
                self.expect(Tok::LParen)?;
                let mut entries = vec![self.rational()?];
                while self.eat(&Tok::Comma) {
                    entries.push(self.rational()?);
                }
                self.expect(Tok::RParen)?;
                ConstValue::Diag(entries)
            } else {
                self.const_value(0)?
            };
            out.push(ConstantDecl { name, value });
        }
        Ok(out)
    }

    fn const_value(&mut self, depth: usize) -> Result<ConstValue, DslError> {
        if depth > MAX_DEPTH {
            return Err(DslError::syntax(
                self.pos(),
                "constant nested too deeply",
                &[],
            ));
        }
        if self.eat(&Tok::LBracket) {
            let mut items = vec![self.const_value(depth + 1)?];
            while self.eat(&Tok::Comma) {
                items.push(self.const_value(depth + 1)?);
            }
            self.expect(Tok::RBracket)?;
            return Ok(ConstValue::Array(items));
        }
        Ok(ConstValue::Scalar(self.rational()?))
    }

    fn rational(&mut self) -> Result<Q, DslError> {
        let negative = self.eat(&Tok::Minus);
        let num = match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                v
            }
            _ => return Err(self.unexpected(&["number", "`-`", "`[`", "`diag`"])),
        };
        let den = if self.eat(&Tok::Slash) {
            let pos = self.pos();
            match self.peek().clone() {
                Tok::Int(v) if v != BigInt::from(0) => {
                    self.bump();
                    v
                }
                Tok::Int(_) => return Err(DslError::syntax(pos, "zero denominator", &[])),
                _ => return Err(self.unexpected(&["number"])),
            }
        } else {
            BigInt::from(1)
        };
        let q = Q::from_big(BigRational::new(num, den));
        Ok(if negative { -q } else { q })
    }

    fn binding(&mut self) -> Result<LetBinding, DslError> {
        let name = self.declared_name()?;
        let mut indices = Vec::new();
        if self.eat(&Tok::LBracket) {
            indices = self.names(true)?;
            self.expect(Tok::RBracket)?;
        }
        self.expect(Tok::Define)?;
        let body = self.expr()?;
        Ok(LetBinding {
            name,
            indices,
            body,
        })
    }

    fn braced_expr(&mut self) -> Result<Expr, DslError> {
        self.expect(Tok::LBrace)?;
        let e = self.expr()?;
        if self.peek() != &Tok::RBrace {
            return Err(self.unexpected(&["`}`", "operator"]));
        }
        self.bump();
        Ok(e)
    }

    fn reduced(&mut self, pos: Pos) -> Result<ReducedBlock, DslError> {
        self.expect(Tok::LBrace)?;
        let mut lagrangian = None;
        let mut alpha = None;
        let expected = ["`lagrangian`", "`alpha`", "`}`"];
        loop {
            self.skip_semis();
            if self.eat(&Tok::RBrace) {
                break;
            }
            if self.is_word("lagrangian") && lagrangian.is_none() {
                self.bump();
                lagrangian = Some(self.braced_expr()?);
            } else if self.is_word("alpha") && alpha.is_none() {
                self.bump();
                self.expect(Tok::LBracket)?;
                let index = self.declared_name()?;
                self.expect(Tok::RBracket)?;
                self.expect(Tok::Define)?;
                alpha = Some((index, self.expr()?));
            } else {
                return Err(self.unexpected(&expected));
            }
        }
        let end = self.tokens[self.at.saturating_sub(1)].pos;
        let lagrangian = lagrangian.ok_or_else(|| {
            DslError::syntax(end, "reduced block needs `lagrangian`", &["`lagrangian`"])
        })?;
        let (alpha_index, alpha) = alpha.ok_or_else(|| {
            DslError::syntax(end, "reduced block needs `alpha[i] := ...`", &["`alpha`"])
        })?;
        Ok(ReducedBlock {
            pos,
            lagrangian,
            alpha_index,
            alpha,
        })
    }

    fn enter(&mut self) -> Result<(), DslError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(DslError::syntax(
                self.pos(),
                "expression nested too deeply",
                &[],
            ));
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr, DslError> {
        self.enter()?;
        let mut left = self.term()?;
        loop {
            let pos = self.pos();
            let kind: fn(Box<Expr>, Box<Expr>) -> ExprKind = match self.peek() {
                Tok::Plus => ExprKind::Add,
                Tok::Minus => ExprKind::Sub,
                _ => break,
            };
            self.bump();
            let right = self.term()?;
            left = Expr::new(kind(Box::new(left), Box::new(right)), pos);
        }
        self.depth -= 1;
        Ok(left)
    }

    fn term(&mut self) -> Result<Expr, DslError> {
        let mut left = self.unary()?;
        loop {
            let pos = self.pos();
            let kind: fn(Box<Expr>, Box<Expr>) -> ExprKind = match self.peek() {
                Tok::Star => ExprKind::Mul,
                Tok::Slash => ExprKind::Div,
                _ => break,
            };
            self.bump();
            let right = self.unary()?;
            left = Expr::new(kind(Box::new(left), Box::new(right)), pos);
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Expr, DslError> {
        if self.peek() == &Tok::Minus {
            let pos = self.bump().pos;
            self.enter()?;
            let inner = self.unary()?;
            self.depth -= 1;
            return Ok(Expr::new(ExprKind::Neg(Box::new(inner)), pos));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, DslError> {
        let base = self.primary()?;
        if self.peek() != &Tok::Caret {
            return Ok(base);
        }
        let pos = self.bump().pos;
        let negative = self.eat(&Tok::Minus);
        let epos = self.pos();
        let e = match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                v.to_i32().ok_or_else(|| {
                    DslError::syntax(epos, format!("exponent {v} is too large"), &[])
                })?
            }
            _ => return Err(self.unexpected(&["integer exponent"])),
        };
        if self.peek() == &Tok::Caret {
            return Err(DslError::syntax(
                self.pos(),
                "chained `^` needs parentheses",
                &[],
            ));
        }
        Ok(Expr::new(
            ExprKind::Pow(Box::new(base), if negative { -e } else { e }),
            pos,
        ))
    }

    fn index(&mut self) -> Result<IndexArg, DslError> {
        match self.peek().clone() {
            Tok::Int(_) => {
                let (k, pos) = self.usize_lit()?;
                Ok(IndexArg::Lit(k, pos))
            }
            Tok::Ident(_) => Ok(IndexArg::Name(self.name()?)),
            _ => Err(self.unexpected(&["index (number or identifier)"])),
        }
    }

    fn derivative_args(&mut self) -> Result<(Expr, Vec<IndexArg>), DslError> {
        self.expect(Tok::LParen)?;
        let target = self.expr()?;
        let mut indices = Vec::new();
        while self.eat(&Tok::Comma) {
            indices.push(self.index()?);
        }
        if self.peek() != &Tok::RParen {
            return Err(self.unexpected(&["`,`", "`)`"]));
        }
        self.bump();
        Ok((target, indices))
    }

    fn primary(&mut self) -> Result<Expr, DslError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(Expr::new(ExprKind::Int(v), pos))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                if self.peek() != &Tok::RParen {
                    return Err(self.unexpected(&["`)`", "operator"]));
                }
                self.bump();
                Ok(e)
            }
            Tok::Ident(w) if w == "sum" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let binders = self.names(true)?;
                self.expect(Tok::RParen)?;
                self.expect(Tok::LBrace)?;
                let body = self.expr()?;
                if self.peek() != &Tok::RBrace {
                    return Err(self.unexpected(&["`}`", "operator"]));
                }
                self.bump();
                Ok(Expr::new(ExprKind::Sum(binders, Box::new(body)), pos))
            }
            Tok::Ident(w) if w == "D" || w == "dtot" => {
                self.bump();
                let (target, indices) = self.derivative_args()?;
                let kind = if w == "D" {
                    ExprKind::Deriv(Box::new(target), indices)
                } else {
                    ExprKind::TotalDeriv(Box::new(target), indices)
                };
                Ok(Expr::new(kind, pos))
            }
            Tok::Ident(w) => {
                if RESERVED.contains(&w.as_str()) {
                    return Err(DslError::syntax(
                        pos,
                        format!("`{w}` cannot appear here"),
                        PRIMARY_START,
                    ));
                }
                self.bump();
                if self.peek() == &Tok::LParen {
                    return Err(DslError::syntax(
                        self.pos(),
                        format!("`{w}` is not a function"),
                        &["operator"],
                    ));
                }
                let mut indices = Vec::new();
                if self.eat(&Tok::LBracket) {
                    indices.push(self.index()?);
                    while self.eat(&Tok::Comma) {
                        indices.push(self.index()?);
                    }
                    self.expect(Tok::RBracket)?;
                }
                Ok(Expr::new(ExprKind::Ref(w, indices), pos))
            }
            _ => Err(self.unexpected(PRIMARY_START)),
        }
    }
}
