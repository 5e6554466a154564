//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := unary (('*' | '/') unary)*
//! unary    := ('+' | '-') unary | power
//! power    := primary ('^' exponent)?
//! exponent := ('+' | '-')? power          // must fold to an integer
//! primary  := number | symbol | jet | func '(' expr ')' | '(' expr ')'
//! jet      := 'p' digits '^(' digits ')'  // no whitespace inside
//! ```

use thiserror::Error;

use super::{Dims, Expr, Func, Scope, Symbol};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character `{0}`")]
    UnexpectedChar(char),
    #[error("unexpected {found}, expected {expected}")]
    UnexpectedToken { found: String, expected: &'static str },
    #[error("malformed number `{0}`")]
    BadNumber(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("index of `{0}` is out of range")]
    IndexOutOfRange(String),
    #[error("jet order {order} of `p{func}` is above m = {m}")]
    JetOrderAboveM { func: usize, order: usize, m: usize },
    #[error("symbol `{0}` is not allowed in this input")]
    SymbolNotAllowed(String),
    #[error("exponent must be an integer constant")]
    NonIntegerExponent,
    #[error("division by the literal constant zero")]
    DivisionByLiteralZero,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {kind}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Jet(usize, usize),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number `{v}`"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Jet(j, q) => format!("`p{j}^({q})`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Pos {
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |kind, line, column| ParseError { kind, line, column };
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column: col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            c if c.is_ascii_digit() || c == '.' => {
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        while j < chars.len() && chars[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let lexeme: String = chars[start..i].iter().collect();
                let v = lexeme
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| err(ParseErrorKind::BadNumber(lexeme.clone()), line, col))?;
                col += i - start;
                out.push((Tok::Num(v), pos));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let ident: String = chars[start..i].iter().collect();
                // `p<j>^(<q>)` is a single jet token.
                if let Some(func) = ident.strip_prefix('p').and_then(digits) {
                    if chars.get(i) == Some(&'^') && chars.get(i + 1) == Some(&'(') {
                        let mut j = i + 2;
                        while j < chars.len() && chars[j].is_ascii_digit() {
                            j += 1;
                        }
                        if j > i + 2 && chars.get(j) == Some(&')') {
                            let order: String = chars[i + 2..j].iter().collect();
                            let order = order
                                .parse::<usize>()
                                .map_err(|_| err(ParseErrorKind::BadNumber(order.clone()), line, col))?;
                            i = j + 1;
                            col += i - start;
                            out.push((Tok::Jet(func, order), pos));
                            continue;
                        }
                    }
                }
                col += i - start;
                out.push((Tok::Ident(ident), pos));
                continue;
            }
            other => return Err(err(ParseErrorKind::UnexpectedChar(other), line, col)),
        };
        i += 1;
        col += 1;
        out.push((tok, pos));
    }
    out.push((Tok::End, Pos { line, column: col }));
    Ok(out)
}

fn digits(s: &str) -> Option<usize> {
    if !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) {
        s.parse().ok()
    } else {
        None
    }
}

type Builder = fn(usize) -> Symbol;

/// Maps an identifier to a symbol without range checks.
pub(crate) fn symbol_of(ident: &str) -> Option<Symbol> {
    if ident == "t" {
        return Some(Symbol::Time);
    }
    let prefixes: [(&str, Builder); 7] = [
        ("psi", |i| if i == 0 { Symbol::Costate0 } else { Symbol::Costate(i) }),
        ("ddp", |j| Symbol::jet(j, 2)),
        ("dp", |j| Symbol::jet(j, 1)),
        ("du", Symbol::ControlDot),
        ("x", Symbol::State),
        ("u", Symbol::Control),
        ("p", |j| Symbol::jet(j, 0)),
    ];
    prefixes
        .iter()
        .find_map(|(prefix, make)| ident.strip_prefix(prefix).and_then(digits).map(make))
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    dims: Dims,
    scope: Scope,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error_at(&self, pos: Pos, kind: ParseErrorKind) -> ParseError {
        ParseError { kind, line: pos.line, column: pos.column }
    }

    fn unexpected(&self, expected: &'static str) -> ParseError {
        self.error_at(self.pos(), ParseErrorKind::UnexpectedToken { found: self.peek().describe(), expected })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    terms.push(self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    terms.push(Expr::neg(self.term()?));
                }
                _ => break,
            }
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { Expr::sum(terms) })
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    let rhs = self.unary()?;
                    acc = Expr::mul(acc, rhs);
                }
                Tok::Slash => {
                    self.bump();
                    let pos = self.pos();
                    let rhs = self.unary()?;
                    if rhs.is_const_zero() {
                        return Err(self.error_at(pos, ParseErrorKind::DivisionByLiteralZero));
                    }
                    acc = Expr::quot(acc, rhs);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(Expr::neg(self.unary()?))
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let pos = self.pos();
        let exponent = match self.peek() {
            Tok::Minus => {
                self.bump();
                Expr::neg(self.power()?)
            }
            Tok::Plus => {
                self.bump();
                self.power()?
            }
            _ => self.power()?,
        };
        let n = exponent
            .as_const()
            .filter(|v| v.fract() == 0.0 && v.abs() <= i32::MAX as f64)
            .ok_or_else(|| self.error_at(pos, ParseErrorKind::NonIntegerExponent))?;
        Ok(Expr::pow(base, n as i32))
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(v) => Ok(Expr::Const(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Tok::Jet(func, order) => self.resolve(Symbol::jet(func, order), &format!("p{func}^({order})"), pos),
            Tok::Ident(name) => {
                if let Some(func) = Func::from_name(&name) {
                    if *self.peek() != Tok::LParen {
                        return Err(self.unexpected("`(` after function name"));
                    }
                    self.bump();
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    return Ok(Expr::apply(func, arg));
                }
                let sym = symbol_of(&name)
                    .ok_or_else(|| self.error_at(pos, ParseErrorKind::UnknownSymbol(name.clone())))?;
                self.resolve(sym, &name, pos)
            }
            other => {
                self.at -= usize::from(other != Tok::End);
                Err(self.unexpected("an operand"))
            }
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        if *self.peek() == Tok::RParen {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected("`)`"))
        }
    }

    fn resolve(&self, sym: Symbol, name: &str, pos: Pos) -> Result<Expr, ParseError> {
        if !self.scope.allows(sym.kind()) {
            return Err(self.error_at(pos, ParseErrorKind::SymbolNotAllowed(name.to_string())));
        }
        if let Symbol::Jet { func, order } = sym {
            if (1..=self.dims.k).contains(&func) && order > self.dims.m {
                return Err(self.error_at(pos, ParseErrorKind::JetOrderAboveM { func, order, m: self.dims.m }));
            }
        }
        if !self.dims.contains(sym) {
            return Err(self.error_at(pos, ParseErrorKind::IndexOutOfRange(name.to_string())));
        }
        Ok(Expr::Var(sym))
    }
}

/// Parses `text` in the context `dims`, accepting every user-writable symbol.
pub fn parse(text: &str, dims: Dims) -> Result<Expr, ParseError> {
    parse_in(text, dims, Scope::ALL)
}

/// Parses `text`, rejecting symbols whose kind `scope` does not allow.
pub fn parse_in(text: &str, dims: Dims, scope: Scope) -> Result<Expr, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, at: 0, dims, scope };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected("an operator or end of input"));
    }
    Ok(e)
}
