//! Syntax tree of the analyzed language.

use std::fmt;

use crate::interval::Interval;
use crate::scalar::{Rational, Scalar};

/// Numeric literal, kept as written so exact scalars can parse it exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct Number(pub String);

impl Number {
    pub fn value<S: Scalar>(&self) -> S {
        S::from_decimal(&self.0).expect("literal validated by the lexer")
    }

    pub fn as_f64(&self) -> f64 {
        self.0.parse().expect("literal validated by the lexer")
    }

    /// Smallest interval of `S` holding the literal's exact value.
    pub fn enclosure<S: Scalar>(&self) -> Interval<S> {
        let v: S = self.value();
        if S::EXACT {
            return Interval::point(v);
        }
        let exact: Rational = self.value();
        let approx = Rational::of_f64(v.to_f64_lossy());
        if approx == exact {
            Interval::point(v)
        } else if approx < exact {
            Interval { lo: v.clone(), hi: v.round_up() }
        } else {
            Interval { lo: v.clone().round_down(), hi: v }
        }
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Line and column, both 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(Number),
    Var(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    /// Division by a non-zero literal.
    DivConst(Box<Expr>, Number),
}

impl Expr {
    pub fn var(name: &str) -> Self {
        Expr::Var(name.to_string())
    }

    pub fn num(text: &str) -> Self {
        Expr::Const(Number(text.to_string()))
    }

    pub fn add(a: Expr, b: Expr) -> Self {
        Expr::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Expr, b: Expr) -> Self {
        Expr::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Expr, b: Expr) -> Self {
        Expr::Mul(Box::new(a), Box::new(b))
    }

    /// Evaluates over reals given variable values.
    pub fn eval_f64(&self, lookup: &impl Fn(&str) -> f64) -> f64 {
        match self {
            Expr::Const(n) => n.as_f64(),
            Expr::Var(v) => lookup(v),
            Expr::Neg(e) => -e.eval_f64(lookup),
            Expr::Add(a, b) => a.eval_f64(lookup) + b.eval_f64(lookup),
            Expr::Sub(a, b) => a.eval_f64(lookup) - b.eval_f64(lookup),
            Expr::Mul(a, b) => a.eval_f64(lookup) * b.eval_f64(lookup),
            Expr::DivConst(a, n) => a.eval_f64(lookup) / n.as_f64(),
        }
    }

    pub fn variables(&self, out: &mut Vec<String>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => out.push(v.clone()),
            Expr::Neg(e) | Expr::DivConst(e, _) => e.variables(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.variables(out);
                b.variables(out);
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(n) => write!(f, "{n}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Neg(e) => write!(f, "-({e})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::DivConst(a, n) => write!(f, "({a} / {n})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    /// Relation of the else branch.
    pub fn negate(self) -> CmpOp {
        match self {
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Ge => CmpOp::Lt,
        }
    }

    pub fn holds(self, a: f64, b: f64) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cond {
    pub lhs: Expr,
    pub op: CmpOp,
    pub rhs: Expr,
}

impl Cond {
    pub fn negate(&self) -> Cond {
        Cond { lhs: self.lhs.clone(), op: self.op.negate(), rhs: self.rhs.clone() }
    }
}

impl fmt::Display for Cond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.op.symbol(), self.rhs)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DeclInit {
    Range(Number, Number),
    Expr(Expr),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decl {
    pub name: String,
    pub init: DeclInit,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StmtKind {
    Assign(String, Expr),
    If(Cond, Vec<Stmt>, Vec<Stmt>),
    While(Cond, Vec<Stmt>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Program {
    pub decls: Vec<Decl>,
    pub stmts: Vec<Stmt>,
}

impl Program {
    /// Declarations with a range initializer, i.e. the program inputs.
    pub fn inputs(&self) -> impl Iterator<Item = (&str, &Number, &Number)> {
        self.decls.iter().filter_map(|d| match &d.init {
            DeclInit::Range(lo, hi) => Some((d.name.as_str(), lo, hi)),
            DeclInit::Expr(_) => None,
        })
    }
}
