//! Lexer and recursive-descent parser for the concrete syntax.
//!
//! ```text
//! program  ::= stmt+
//! stmt     ::= "skip" ";"
//!            | IDENT ":=" aexpr ";"
//!            | IDENT ":=" "&" IDENT ";"
//!            | IDENT ":=" "*" IDENT ";"
//!            | "*" IDENT ":=" aexpr ";"
//!            | "if" "(" bexpr ")" "@" PROB block "else" block
//!            | "while" "(" bexpr ")" "@" NAT block
//!            | "par" block block+
//!            | "parif" arm+            arm ::= "(" bexpr "@" PROB ")" block
//!            | "parfor" "@" NAT block
//! block    ::= "{" stmt* "}"
//! ```
//!
//! Arithmetic and boolean expressions share one precedence climber
//! (`||` < `&&` < `!` < `==`,`<=` < `+`,`-` < `*`) and are sorted into
//! [`AExpr`] / [`BExpr`] as they are reduced, so a leading `(` needs no
//! backtracking.

use thiserror::Error;

use super::ast::{AExpr, ArithOp, BExpr, BoolOp, CmpOp, ParArm, Program, Span, Stmt, StmtKind, VarName};
use crate::prob::{Prob, ProbError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: u32,
    pub column: u32,
    pub message: String,
}

impl ParseError {
    fn at(span: Span, message: impl Into<String>) -> ParseError {
        ParseError {
            line: span.line,
            column: span.column,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Nat(String),
    Decimal(String),
    Skip,
    If,
    Else,
    While,
    Par,
    ParIf,
    ParFor,
    True,
    False,
    Assign,
    Amp,
    Star,
    Semi,
    LParen,
    RParen,
    LBrace,
    RBrace,
    At,
    Plus,
    Minus,
    EqEq,
    Le,
    Bang,
    AndAnd,
    OrOr,
    Slash,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Nat(s) | Tok::Decimal(s) => format!("number `{s}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::Skip => "skip",
            Tok::If => "if",
            Tok::Else => "else",
            Tok::While => "while",
            Tok::Par => "par",
            Tok::ParIf => "parif",
            Tok::ParFor => "parfor",
            Tok::True => "true",
            Tok::False => "false",
            Tok::Assign => ":=",
            Tok::Amp => "&",
            Tok::Star => "*",
            Tok::Semi => ";",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::At => "@",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::EqEq => "==",
            Tok::Le => "<=",
            Tok::Bang => "!",
            Tok::AndAnd => "&&",
            Tok::OrOr => "||",
            Tok::Slash => "/",
            Tok::Ident(_) | Tok::Nat(_) | Tok::Decimal(_) | Tok::Eof => "",
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Span)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    let mut line = 1u32;
    let mut column = 1u32;

    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, column };
        if c == '\n' {
            i += 1;
            line += 1;
            column = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            column += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }

        let start = i;
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            match word.as_str() {
                "skip" => Tok::Skip,
                "if" => Tok::If,
                "else" => Tok::Else,
                "while" => Tok::While,
                "par" => Tok::Par,
                "parif" => Tok::ParIf,
                "parfor" => Tok::ParFor,
                "true" => Tok::True,
                "false" => Tok::False,
                _ => Tok::Ident(word),
            }
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                Tok::Decimal(chars[start..i].iter().collect())
            } else {
                Tok::Nat(chars[start..i].iter().collect())
            }
        } else {
            let next = chars.get(i + 1).copied();
            let (tok, len) = match (c, next) {
                (':', Some('=')) => (Tok::Assign, 2),
                ('=', Some('=')) => (Tok::EqEq, 2),
                ('<', Some('=')) => (Tok::Le, 2),
                ('&', Some('&')) => (Tok::AndAnd, 2),
                ('|', Some('|')) => (Tok::OrOr, 2),
                ('&', _) => (Tok::Amp, 1),
                ('*', _) => (Tok::Star, 1),
                (';', _) => (Tok::Semi, 1),
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                ('{', _) => (Tok::LBrace, 1),
                ('}', _) => (Tok::RBrace, 1),
                ('@', _) => (Tok::At, 1),
                ('+', _) => (Tok::Plus, 1),
                ('-', _) => (Tok::Minus, 1),
                ('!', _) => (Tok::Bang, 1),
                ('/', _) => (Tok::Slash, 1),
                _ => return Err(ParseError::at(span, format!("unexpected character `{c}`"))),
            };
            i += len;
            tok
        };
        column += (i - start) as u32;
        toks.push((tok, span));
    }
    toks.push((Tok::Eof, Span { line, column }));
    Ok(toks)
}

/// A partially classified expression.
enum Expr {
    A(AExpr),
    B(BExpr),
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
}

/// Parses program text. Labels are assigned in preorder (source order).
pub fn parse(text: &str) -> Result<Program, ParseError> {
    let mut parser = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let mut stmts = Vec::new();
    while *parser.peek() != Tok::Eof {
        stmts.push(parser.stmt()?);
    }
    if stmts.is_empty() {
        return Err(ParseError::at(parser.span(), "expected at least one statement"));
    }
    Ok(Program::new(Stmt::seq(stmts)))
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        ParseError::at(
            self.span(),
            format!("expected {expected}, found {}", self.peek().describe()),
        )
    }

    fn expect(&mut self, tok: Tok) -> Result<Span, ParseError> {
        if *self.peek() == tok {
            Ok(self.bump().1)
        } else {
            Err(self.unexpected(&format!("`{}`", tok.text())))
        }
    }

    fn ident(&mut self) -> Result<VarName, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok(VarName::new(name).expect("lexer only produces valid identifiers"))
            }
            _ => Err(self.unexpected("an identifier")),
        }
    }

    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        let span = self.span();
        let kind = match self.peek().clone() {
            Tok::Skip => {
                self.bump();
                self.expect(Tok::Semi)?;
                StmtKind::Skip
            }
            Tok::Star => {
                self.bump();
                let pointer = self.ident()?;
                self.expect(Tok::Assign)?;
                let value = self.aexpr()?;
                self.expect(Tok::Semi)?;
                StmtKind::Store { pointer, value }
            }
            Tok::Ident(_) => {
                let target = self.ident()?;
                self.expect(Tok::Assign)?;
                let kind = match self.peek() {
                    Tok::Amp => {
                        self.bump();
                        StmtKind::AddrOf {
                            target,
                            source: self.ident()?,
                        }
                    }
                    Tok::Star => {
                        self.bump();
                        StmtKind::Load {
                            target,
                            pointer: self.ident()?,
                        }
                    }
                    _ => StmtKind::Assign {
                        target,
                        value: self.aexpr()?,
                    },
                };
                self.expect(Tok::Semi)?;
                kind
            }
            Tok::If => {
                self.bump();
                self.expect(Tok::LParen)?;
                let cond = self.bexpr()?;
                self.expect(Tok::RParen)?;
                self.expect(Tok::At)?;
                let p_true = self.prob()?;
                let then_branch = Box::new(self.block()?);
                self.expect(Tok::Else)?;
                let else_branch = Box::new(self.block()?);
                StmtKind::If {
                    cond,
                    p_true,
                    then_branch,
                    else_branch,
                }
            }
            Tok::While => {
                self.bump();
                self.expect(Tok::LParen)?;
                let cond = self.bexpr()?;
                self.expect(Tok::RParen)?;
                self.expect(Tok::At)?;
                let trip_bound = self.nat("loop trip bound")?;
                let body = Box::new(self.block()?);
                StmtKind::While {
                    cond,
                    trip_bound,
                    body,
                }
            }
            Tok::Par => {
                self.bump();
                let mut threads = vec![self.block()?];
                while *self.peek() == Tok::LBrace {
                    threads.push(self.block()?);
                }
                StmtKind::Par(threads)
            }
            Tok::ParIf => {
                self.bump();
                let mut arms = Vec::new();
                while *self.peek() == Tok::LParen || arms.is_empty() {
                    self.expect(Tok::LParen)?;
                    let cond = self.bexpr()?;
                    self.expect(Tok::At)?;
                    let prob = self.prob()?;
                    self.expect(Tok::RParen)?;
                    let body = self.block()?;
                    arms.push(ParArm { cond, prob, body });
                }
                StmtKind::ParIf(arms)
            }
            Tok::ParFor => {
                self.bump();
                self.expect(Tok::At)?;
                let count_span = self.span();
                let count = self.nat("parfor count")?;
                if count == 0 {
                    return Err(ParseError::at(count_span, "parfor count must be at least 1"));
                }
                let body = Box::new(self.block()?);
                StmtKind::ParFor { count, body }
            }
            _ => return Err(self.unexpected("a statement")),
        };
        Ok(Stmt::with_span(kind, span))
    }

    fn block(&mut self) -> Result<Stmt, ParseError> {
        let open = self.expect(Tok::LBrace)?;
        let mut stmts = Vec::new();
        while *self.peek() != Tok::RBrace {
            if *self.peek() == Tok::Eof {
                return Err(self.unexpected("`}`"));
            }
            stmts.push(self.stmt()?);
        }
        self.bump();
        if stmts.is_empty() {
            return Ok(Stmt::with_span(StmtKind::Skip, open));
        }
        Ok(Stmt::seq(stmts))
    }

    fn nat(&mut self, what: &str) -> Result<u64, ParseError> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Nat(digits) => {
                self.bump();
                digits
                    .parse()
                    .map_err(|_| ParseError::at(span, format!("{what} `{digits}` is too large")))
            }
            Tok::Minus => Err(ParseError::at(
                span,
                format!("{what} must be a non-negative integer"),
            )),
            _ => Err(self.unexpected(&format!("{what} (a non-negative integer)"))),
        }
    }

    fn prob(&mut self) -> Result<Prob, ParseError> {
        let span = self.span();
        let literal = match self.peek().clone() {
            Tok::Decimal(text) => {
                self.bump();
                text
            }
            Tok::Nat(num) => {
                self.bump();
                if *self.peek() == Tok::Slash {
                    self.bump();
                    match self.peek().clone() {
                        Tok::Nat(den) => {
                            self.bump();
                            format!("{num}/{den}")
                        }
                        _ => return Err(self.unexpected("a denominator")),
                    }
                } else {
                    num
                }
            }
            Tok::Minus => {
                return Err(ParseError::at(span, "probability literal must lie in [0, 1]"));
            }
            _ => return Err(self.unexpected("a probability literal")),
        };
        Prob::parse_literal(&literal).map_err(|e| {
            let message = match e {
                ProbError::OutOfRange(lit) => {
                    format!("probability literal `{lit}` is outside [0, 1]")
                }
                other => other.to_string(),
            };
            ParseError::at(span, message)
        })
    }

    fn aexpr(&mut self) -> Result<AExpr, ParseError> {
        let span = self.span();
        match self.expr()? {
            Expr::A(e) => Ok(e),
            Expr::B(_) => Err(ParseError::at(span, "expected an arithmetic expression, found a boolean one")),
        }
    }

    fn bexpr(&mut self) -> Result<BExpr, ParseError> {
        let span = self.span();
        match self.expr()? {
            Expr::B(b) => Ok(b),
            Expr::A(_) => Err(ParseError::at(span, "expected a boolean expression, found an arithmetic one")),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.or_expr()
    }

    fn as_bool(&self, e: Expr, span: Span, op: &str) -> Result<BExpr, ParseError> {
        match e {
            Expr::B(b) => Ok(b),
            Expr::A(_) => Err(ParseError::at(span, format!("operand of `{op}` must be boolean"))),
        }
    }

    fn as_arith(&self, e: Expr, span: Span, op: &str) -> Result<AExpr, ParseError> {
        match e {
            Expr::A(a) => Ok(a),
            Expr::B(_) => Err(ParseError::at(span, format!("operand of `{op}` must be arithmetic"))),
        }
    }

    fn or_expr(&mut self) -> Result<Expr, ParseError> {
        let span = self.span();
        let mut lhs = self.and_expr()?;
        while *self.peek() == Tok::OrOr {
            self.bump();
            let rspan = self.span();
            let rhs = self.and_expr()?;
            let l = self.as_bool(lhs, span, "||")?;
            let r = self.as_bool(rhs, rspan, "||")?;
            lhs = Expr::B(BExpr::Logic(Box::new(l), BoolOp::Or, Box::new(r)));
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Expr, ParseError> {
        let span = self.span();
        let mut lhs = self.not_expr()?;
        while *self.peek() == Tok::AndAnd {
            self.bump();
            let rspan = self.span();
            let rhs = self.not_expr()?;
            let l = self.as_bool(lhs, span, "&&")?;
            let r = self.as_bool(rhs, rspan, "&&")?;
            lhs = Expr::B(BExpr::Logic(Box::new(l), BoolOp::And, Box::new(r)));
        }
        Ok(lhs)
    }

    fn not_expr(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Bang {
            let span = self.bump().1;
            let inner = self.not_expr()?;
            let b = self.as_bool(inner, span, "!")?;
            return Ok(Expr::B(BExpr::Not(Box::new(b))));
        }
        self.cmp_expr()
    }

    fn cmp_expr(&mut self) -> Result<Expr, ParseError> {
        let span = self.span();
        let lhs = self.sum_expr()?;
        let op = match self.peek() {
            Tok::EqEq => CmpOp::Eq,
            Tok::Le => CmpOp::Le,
            _ => return Ok(lhs),
        };
        let sym = if op == CmpOp::Eq { "==" } else { "<=" };
        self.bump();
        let rspan = self.span();
        let rhs = self.sum_expr()?;
        let l = self.as_arith(lhs, span, sym)?;
        let r = self.as_arith(rhs, rspan, sym)?;
        Ok(Expr::B(BExpr::Cmp(l, op, r)))
    }

    fn sum_expr(&mut self) -> Result<Expr, ParseError> {
        let span = self.span();
        let mut lhs = self.prod_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => ArithOp::Add,
                Tok::Minus => ArithOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rspan = self.span();
            let rhs = self.prod_expr()?;
            let l = self.as_arith(lhs, span, op.symbol())?;
            let r = self.as_arith(rhs, rspan, op.symbol())?;
            lhs = Expr::A(AExpr::bin(l, op, r));
        }
    }

    fn prod_expr(&mut self) -> Result<Expr, ParseError> {
        let span = self.span();
        let mut lhs = self.atom()?;
        while *self.peek() == Tok::Star {
            self.bump();
            let rspan = self.span();
            let rhs = self.atom()?;
            let l = self.as_arith(lhs, span, "*")?;
            let r = self.as_arith(rhs, rspan, "*")?;
            lhs = Expr::A(AExpr::bin(l, ArithOp::Mul, r));
        }
        Ok(lhs)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Nat(digits) => {
                self.bump();
                let n = digits.parse().map_err(|_| {
                    ParseError::at(span, format!("integer literal `{digits}` is too large"))
                })?;
                Ok(Expr::A(AExpr::Num(n)))
            }
            Tok::Ident(_) => Ok(Expr::A(AExpr::Var(self.ident()?))),
            Tok::True => {
                self.bump();
                Ok(Expr::B(BExpr::True))
            }
            Tok::False => {
                self.bump();
                Ok(Expr::B(BExpr::False))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Amp => Err(ParseError::at(
                span,
                "`&` may only appear as `x := &y`, not inside expressions",
            )),
            _ => Err(self.unexpected("an expression")),
        }
    }
}
