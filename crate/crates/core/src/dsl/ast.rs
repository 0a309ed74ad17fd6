//! Untyped syntax tree produced by the parser. Every node carries the
//! line/column of its source snippet so later stages can point at code.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub fn new(line: u32, col: u32) -> Self {
        Span { line, col }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Program section, which fixes binding visibility and write permissions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SectionKind {
    InitialBelief,
    Extrinsic,
    Precondition,
    Dynamics,
    SpecialStateCondition,
    AmExpression,
}

impl SectionKind {
    /// Expression-only sections hold a single boolean/value expression
    /// rather than a statement list.
    pub fn is_expression(self) -> bool {
        matches!(
            self,
            SectionKind::SpecialStateCondition | SectionKind::AmExpression
        )
    }
}

impl fmt::Display for SectionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            SectionKind::InitialBelief => "initial-belief",
            SectionKind::Extrinsic => "extrinsic",
            SectionKind::Precondition => "precondition",
            SectionKind::Dynamics => "dynamics",
            SectionKind::SpecialStateCondition => "special-state-condition",
            SectionKind::AmExpression => "am-expression",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub section: SectionKind,
    pub body: ProgramBody,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProgramBody {
    Statements(Vec<Stmt>),
    Expression(Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    Assign {
        target: PathExpr,
        value: Expr,
        span: Span,
    },
    If {
        cond: Expr,
        then_branch: Box<Stmt>,
        else_branch: Option<Box<Stmt>>,
        span: Span,
    },
    While {
        cond: Expr,
        body: Box<Stmt>,
        span: Span,
    },
    Block {
        stmts: Vec<Stmt>,
        span: Span,
    },
}

impl Stmt {
    pub fn span(&self) -> Span {
        match self {
            Stmt::Assign { span, .. }
            | Stmt::If { span, .. }
            | Stmt::While { span, .. }
            | Stmt::Block { span, .. } => *span,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnOp {
    Not,
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    And,
    Or,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
    Div,
    Rem,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::And => "&&",
            BinOp::Or => "||",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Lit {
    Bool(bool),
    Int(i64),
    Real(f64),
    Str(String),
}

/// A dotted/indexed path such as `state_.board[i]` or `oDesiredLocation.x`.
/// A bare identifier is a path with no segments; the typechecker decides
/// whether it is a variable, a parameter, a local, or an enum symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct PathExpr {
    pub root: String,
    pub segments: Vec<PathSeg>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PathSeg {
    Field(String),
    Index(Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Lit(Lit, Span),
    Path(PathExpr),
    Unary {
        op: UnOp,
        operand: Box<Expr>,
        span: Span,
    },
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
        span: Span,
    },
    Ternary {
        cond: Box<Expr>,
        then_val: Box<Expr>,
        else_val: Box<Expr>,
        span: Span,
    },
    Call {
        /// Dotted callee name, e.g. `["AOS", "Bernoulli"]` or `["sqrt"]`.
        name: Vec<String>,
        args: Vec<Expr>,
        span: Span,
    },
}

impl Expr {
    pub fn span(&self) -> Span {
        match self {
            Expr::Lit(_, span) => *span,
            Expr::Path(p) => p.span,
            Expr::Unary { span, .. }
            | Expr::Binary { span, .. }
            | Expr::Ternary { span, .. }
            | Expr::Call { span, .. } => *span,
        }
    }
}

// ---------------------------------------------------------------------------
// Pretty printer. `print(parse(s))` must reparse to an equal tree; we
// parenthesize every compound subexpression rather than track precedence.
// ---------------------------------------------------------------------------

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.body {
            ProgramBody::Expression(e) => write!(f, "{e}"),
            ProgramBody::Statements(stmts) => {
                for (i, s) in stmts.iter().enumerate() {
                    if i > 0 {
                        writeln!(f)?;
                    }
                    write!(f, "{s}")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Stmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stmt::Assign { target, value, .. } => write!(f, "{target} = {value};"),
            Stmt::If {
                cond,
                then_branch,
                else_branch,
                ..
            } => {
                write!(f, "if ({cond}) {then_branch}")?;
                if let Some(e) = else_branch {
                    write!(f, " else {e}")?;
                }
                Ok(())
            }
            Stmt::While { cond, body, .. } => write!(f, "while ({cond}) {body}"),
            Stmt::Block { stmts, .. } => {
                write!(f, "{{ ")?;
                for s in stmts {
                    write!(f, "{s} ")?;
                }
                write!(f, "}}")
            }
        }
    }
}

impl fmt::Display for PathExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.root)?;
        for seg in &self.segments {
            match seg {
                PathSeg::Field(name) => write!(f, ".{name}")?,
                PathSeg::Index(e) => write!(f, "[{e}]")?,
            }
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Lit(Lit::Bool(b), _) => write!(f, "{b}"),
            Expr::Lit(Lit::Int(i), _) => write!(f, "{i}"),
            Expr::Lit(Lit::Real(r), _) => {
                if r.fract() == 0.0 && r.is_finite() && r.abs() < 1e15 {
                    write!(f, "{r:.1}")
                } else {
                    write!(f, "{r}")
                }
            }
            Expr::Lit(Lit::Str(s), _) => write!(f, "{s:?}"),
            Expr::Path(p) => write!(f, "{p}"),
            Expr::Unary { op, operand, .. } => {
                let sym = match op {
                    UnOp::Not => "!",
                    UnOp::Neg => "-",
                };
                write!(f, "{sym}({operand})")
            }
            Expr::Binary { op, lhs, rhs, .. } => {
                write!(f, "({lhs} {} {rhs})", op.symbol())
            }
            Expr::Ternary {
                cond,
                then_val,
                else_val,
                ..
            } => write!(f, "({cond} ? {then_val} : {else_val})"),
            Expr::Call { name, args, .. } => {
                write!(f, "{}(", name.join("."))?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}
