//! Lexer and recursive-descent parser.
//!
//! ```text
//! program := decl* stmt*
//! decl    := "real" IDENT "=" ( "[" NUM "," NUM "]" | expr ) ";"
//! stmt    := IDENT "=" expr ";"
//!          | "if" "(" cond ")" body ("else" body)?
//!          | "while" "(" cond ")" body
//! body    := "{" stmt* "}" | stmt
//! cond    := expr ("=="|"!="|"<="|"<"|">="|">") expr
//! expr    := expr ("+"|"-") term | term
//! term    := term "*" factor | term "/" NUM | factor
//! factor  := NUM | IDENT | "(" expr ")" | "-" factor
//! ```
//!
//! Range bounds may carry a sign. Comments are `/* ... */` and `// ...`.

use std::collections::HashSet;
use std::fmt;

use num::Zero;

use crate::ast::{CmpOp, Cond, Decl, DeclInit, Expr, Number, Pos, Program, Stmt, StmtKind};
use crate::scalar::{Rational, Scalar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DiagnosticKind {
    Lexical,
    Syntax,
    Undeclared,
    ZeroDivisor,
    Range,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub pos: Pos,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.pos, self.message)
    }
}

impl std::error::Error for Diagnostic {}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Real,
    If,
    Else,
    While,
    Assign,
    Cmp(CmpOp),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(n) => write!(f, "number `{n}`"),
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Real => f.write_str("`real`"),
            Tok::If => f.write_str("`if`"),
            Tok::Else => f.write_str("`else`"),
            Tok::While => f.write_str("`while`"),
            Tok::Assign => f.write_str("`=`"),
            Tok::Cmp(op) => write!(f, "`{}`", op.symbol()),
            Tok::Plus => f.write_str("`+`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Slash => f.write_str("`/`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, Diagnostic> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, n: usize| {
        for _ in 0..n {
            if chars[*i] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        let next = chars.get(i + 1).copied();
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, 1);
            continue;
        }
        if c == '/' && next == Some('/') {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut col, 1);
            }
            continue;
        }
        if c == '/' && next == Some('*') {
            advance(&mut i, &mut line, &mut col, 2);
            loop {
                if i + 1 >= chars.len() {
                    return Err(Diagnostic { kind: DiagnosticKind::Lexical, pos, message: "unterminated comment".into() });
                }
                if chars[i] == '*' && chars[i + 1] == '/' {
                    advance(&mut i, &mut line, &mut col, 2);
                    break;
                }
                advance(&mut i, &mut line, &mut col, 1);
            }
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && next.is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_digit() || chars[j] == '.') {
                j += 1;
            }
            if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                let mut k = j + 1;
                if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                    k += 1;
                }
                if k < chars.len() && chars[k].is_ascii_digit() {
                    while k < chars.len() && chars[k].is_ascii_digit() {
                        k += 1;
                    }
                    j = k;
                }
            }
            let text: String = chars[start..j].iter().collect();
            if Rational::from_decimal(&text).is_none() {
                return Err(Diagnostic { kind: DiagnosticKind::Lexical, pos, message: format!("malformed number `{text}`") });
            }
            advance(&mut i, &mut line, &mut col, j - start);
            out.push((Tok::Num(text), pos));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            let mut j = i;
            while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            let word: String = chars[start..j].iter().collect();
            advance(&mut i, &mut line, &mut col, j - start);
            out.push((
                match word.as_str() {
                    "real" => Tok::Real,
                    "if" => Tok::If,
                    "else" => Tok::Else,
                    "while" => Tok::While,
                    _ => Tok::Ident(word),
                },
                pos,
            ));
            continue;
        }
        let (tok, len) = match (c, next) {
            ('=', Some('=')) => (Tok::Cmp(CmpOp::Eq), 2),
            ('!', Some('=')) => (Tok::Cmp(CmpOp::Ne), 2),
            ('<', Some('=')) => (Tok::Cmp(CmpOp::Le), 2),
            ('>', Some('=')) => (Tok::Cmp(CmpOp::Ge), 2),
            ('<', _) => (Tok::Cmp(CmpOp::Lt), 1),
            ('>', _) => (Tok::Cmp(CmpOp::Gt), 1),
            ('=', _) => (Tok::Assign, 1),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) => (Tok::Minus, 1),
            ('*', _) => (Tok::Star, 1),
            ('/', _) => (Tok::Slash, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('[', _) => (Tok::LBracket, 1),
            (']', _) => (Tok::RBracket, 1),
            ('{', _) => (Tok::LBrace, 1),
            ('}', _) => (Tok::RBrace, 1),
            (',', _) => (Tok::Comma, 1),
            (';', _) => (Tok::Semi, 1),
            _ => {
                return Err(Diagnostic { kind: DiagnosticKind::Lexical, pos, message: format!("unexpected character `{c}`") })
            }
        };
        advance(&mut i, &mut line, &mut col, len);
        out.push((tok, pos));
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    declared: HashSet<String>,
}

type PResult<T> = Result<T, Diagnostic>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn syntax<T>(&self, expected: &str) -> PResult<T> {
        Err(Diagnostic {
            kind: DiagnosticKind::Syntax,
            pos: self.pos(),
            message: format!("expected {expected}, found {}", self.peek()),
        })
    }

    fn expect(&mut self, tok: Tok) -> PResult<Pos> {
        if *self.peek() == tok {
            Ok(self.bump().1)
        } else {
            self.syntax(&tok.to_string())
        }
    }

    fn ident(&mut self) -> PResult<(String, Pos)> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let pos = self.bump().1;
                Ok((name, pos))
            }
            _ => self.syntax("identifier"),
        }
    }

    fn use_var(&self, name: &str, pos: Pos) -> PResult<()> {
        if self.declared.contains(name) {
            Ok(())
        } else {
            Err(Diagnostic { kind: DiagnosticKind::Undeclared, pos, message: format!("undeclared variable `{name}`") })
        }
    }

    fn program(&mut self) -> PResult<Program> {
        let mut program = Program::default();
        while *self.peek() == Tok::Real {
            program.decls.push(self.decl()?);
        }
        while *self.peek() != Tok::Eof {
            program.stmts.push(self.stmt()?);
        }
        Ok(program)
    }

    fn signed_number(&mut self) -> PResult<Number> {
        let negative = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        match self.peek().clone() {
            Tok::Num(text) => {
                self.bump();
                Ok(Number(if negative { format!("-{text}") } else { text }))
            }
            _ => self.syntax("number"),
        }
    }

    fn decl(&mut self) -> PResult<Decl> {
        let pos = self.expect(Tok::Real)?;
        let (name, name_pos) = self.ident()?;
        if self.declared.contains(&name) {
            return Err(Diagnostic {
                kind: DiagnosticKind::Syntax,
                pos: name_pos,
                message: format!("`{name}` declared twice"),
            });
        }
        self.expect(Tok::Assign)?;
        let init = if *self.peek() == Tok::LBracket {
            let open = self.bump().1;
            let lo = self.signed_number()?;
            self.expect(Tok::Comma)?;
            let hi = self.signed_number()?;
            self.expect(Tok::RBracket)?;
            let (l, h): (Rational, Rational) = (lo.value(), hi.value());
            if l > h {
                return Err(Diagnostic {
                    kind: DiagnosticKind::Range,
                    pos: open,
                    message: format!("empty range [{lo}, {hi}]"),
                });
            }
            DeclInit::Range(lo, hi)
        } else {
            DeclInit::Expr(self.expr()?)
        };
        self.expect(Tok::Semi)?;
        self.declared.insert(name.clone());
        Ok(Decl { name, init, pos })
    }

    fn body(&mut self) -> PResult<Vec<Stmt>> {
        if *self.peek() == Tok::LBrace {
            self.bump();
            let mut stmts = Vec::new();
            while *self.peek() != Tok::RBrace {
                if *self.peek() == Tok::Eof {
                    return self.syntax("`}`");
                }
                stmts.push(self.stmt()?);
            }
            self.bump();
            Ok(stmts)
        } else {
            Ok(vec![self.stmt()?])
        }
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::If => {
                self.bump();
                self.expect(Tok::LParen)?;
                let cond = self.cond()?;
                self.expect(Tok::RParen)?;
                let then = self.body()?;
                let otherwise = if *self.peek() == Tok::Else {
                    self.bump();
                    self.body()?
                } else {
                    Vec::new()
                };
                Ok(Stmt { kind: StmtKind::If(cond, then, otherwise), pos })
            }
            Tok::While => {
                self.bump();
                self.expect(Tok::LParen)?;
                let cond = self.cond()?;
                self.expect(Tok::RParen)?;
                let body = self.body()?;
                Ok(Stmt { kind: StmtKind::While(cond, body), pos })
            }
            Tok::Ident(_) => {
                let (name, name_pos) = self.ident()?;
                self.use_var(&name, name_pos)?;
                self.expect(Tok::Assign)?;
                let e = self.expr()?;
                self.expect(Tok::Semi)?;
                Ok(Stmt { kind: StmtKind::Assign(name, e), pos })
            }
            Tok::Real => Err(Diagnostic {
                kind: DiagnosticKind::Syntax,
                pos,
                message: "declarations must precede statements".into(),
            }),
            _ => self.syntax("statement"),
        }
    }

    fn cond(&mut self) -> PResult<Cond> {
        let lhs = self.expr()?;
        let op = match self.peek() {
            Tok::Cmp(op) => *op,
            _ => return self.syntax("comparison"),
        };
        self.bump();
        let rhs = self.expr()?;
        Ok(Cond { lhs, op, rhs })
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut e = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    e = Expr::add(e, self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    e = Expr::sub(e, self.term()?);
                }
                _ => return Ok(e),
            }
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut e = self.factor()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    e = Expr::mul(e, self.factor()?);
                }
                Tok::Slash => {
                    self.bump();
                    let pos = self.pos();
                    let Tok::Num(text) = self.peek().clone() else {
                        return self.syntax("number after `/`");
                    };
                    self.bump();
                    let n = Number(text);
                    if n.value::<Rational>().is_zero() {
                        return Err(Diagnostic { kind: DiagnosticKind::ZeroDivisor, pos, message: "division by zero".into() });
                    }
                    e = Expr::DivConst(Box::new(e), n);
                }
                _ => return Ok(e),
            }
        }
    }

    fn factor(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            Tok::Num(text) => {
                self.bump();
                Ok(Expr::Const(Number(text)))
            }
            Tok::Ident(name) => {
                let pos = self.bump().1;
                self.use_var(&name, pos)?;
                Ok(Expr::Var(name))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Minus => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.factor()?)))
            }
            _ => self.syntax("expression"),
        }
    }
}

pub fn parse(src: &str) -> Result<Program, Diagnostic> {
    let toks = lex(src)?;
    Parser { toks, at: 0, declared: HashSet::new() }.program()
}
