//! Resolves every path to a binding class and slot offsets, enforces the
//! per-section write-permission table, and fixes operator/builtin typing.
//!
//! Binding classes: the three state copies, skill parameters, the special
//! variables (`__meetPrecondition`, `__reward`, `__moduleResponse`),
//! abstraction-map locals, the skill-output placeholder `__input`, and
//! program-local temporaries (an undeclared bare identifier first assigned
//! in a statement section declares a scratch variable for that code block).

use std::sync::atomic::AtomicBool;

use super::ast::*;
use super::CheckError;
use crate::types::{EnumId, Scalar, StateLayout, Ty, TypeTable};

/// Internal storage root a path resolves against at execution time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Root {
    /// State before the step (`state`).
    Prev,
    /// State after extrinsic changes (`state_`); also the build target of
    /// initial-belief programs.
    Mid,
    /// Next state (`state__`); also the state special-state conditions read.
    Next,
    Param(u16),
    Local(u16),
    Temp(u16),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecialVar {
    MeetPrecondition,
    Reward,
    ModuleResponse,
}

#[derive(Debug, Clone)]
pub struct ParamDecl {
    pub name: String,
    pub ty: Ty,
}

#[derive(Debug, Clone)]
pub struct LocalDecl {
    pub name: String,
    pub ty: Ty,
}

/// Name scope a program is checked against.
pub struct Scope<'a> {
    pub types: &'a TypeTable,
    pub layout: &'a StateLayout,
    pub params: &'a [ParamDecl],
    pub locals: &'a [LocalDecl],
    /// Response enum of the skill under check (GSDL/AM sections).
    pub responses: Option<EnumId>,
}

impl<'a> Scope<'a> {
    pub fn environment(types: &'a TypeTable, layout: &'a StateLayout) -> Self {
        Scope {
            types,
            layout,
            params: &[],
            locals: &[],
            responses: None,
        }
    }
}

// ---------------------------------------------------------------------------
// Typed tree
// ---------------------------------------------------------------------------

#[derive(Debug)]
pub struct TypedProgram {
    pub section: SectionKind,
    /// Where this program came from, e.g. `navigate.gsdl NextStateAssignments[2]`.
    pub label: String,
    pub source: String,
    pub body: TBody,
    /// Types of program-local temporaries, indexed by `Root::Temp`.
    pub temps: Vec<Ty>,
}

#[derive(Debug)]
pub enum TBody {
    Statements(Vec<TStmt>),
    Expression(TExpr),
}

#[derive(Debug)]
pub enum TStmt {
    Assign {
        target: TPath,
        value: TExpr,
    },
    If {
        cond: TExpr,
        then_branch: Vec<TStmt>,
        else_branch: Vec<TStmt>,
    },
    While {
        cond: TExpr,
        body: Vec<TStmt>,
        span: Span,
    },
}

#[derive(Debug)]
pub struct TPath {
    pub kind: TPathKind,
    pub ty: Ty,
    pub span: Span,
}

#[derive(Debug)]
pub enum TPathKind {
    Slots {
        root: Root,
        base: usize,
        steps: Vec<TPathStep>,
    },
    Special(SpecialVar),
    /// Dynamic traversal of the `__input` value by field name / index.
    Input { segs: Vec<TInputSeg> },
}

#[derive(Debug)]
pub enum TPathStep {
    Offset(usize),
    Index {
        idx: Box<TExpr>,
        stride: usize,
        len: usize,
    },
}

#[derive(Debug)]
pub enum TInputSeg {
    Field(String),
    Index(Box<TExpr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NumKind {
    Int,
    Real,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpKind {
    Int,
    Real,
    Bool,
    Str,
    Enum,
    /// Both operands dynamically typed; kinds checked at runtime.
    Dyn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    Bernoulli,
    UniformInt,
    UniformReal,
    Sqrt,
    Pow,
    AbsInt,
    AbsReal,
    MinInt,
    MinReal,
    MaxInt,
    MaxReal,
    Floor,
    Contains,
}

impl Builtin {
    pub fn is_stochastic(self) -> bool {
        matches!(
            self,
            Builtin::Bernoulli | Builtin::UniformInt | Builtin::UniformReal
        )
    }
}

#[derive(Debug)]
pub enum TExpr {
    Const(Scalar),
    /// A bare enum symbol, which keeps its declaring enum for type checks.
    EnumConst { id: EnumId, idx: u32 },
    Read(TPath),
    IntToReal(Box<TExpr>),
    /// Runtime conversion of a dynamically typed value to a scalar kind.
    FromAny { expect: Ty, inner: Box<TExpr>, span: Span },
    Not(Box<TExpr>),
    Neg(Box<TExpr>, NumKind),
    And(Box<TExpr>, Box<TExpr>),
    Or(Box<TExpr>, Box<TExpr>),
    Cmp {
        op: CmpOp,
        kind: CmpKind,
        lhs: Box<TExpr>,
        rhs: Box<TExpr>,
        span: Span,
    },
    Arith {
        op: ArithOp,
        kind: NumKind,
        lhs: Box<TExpr>,
        rhs: Box<TExpr>,
        span: Span,
    },
    Ternary {
        cond: Box<TExpr>,
        then_val: Box<TExpr>,
        else_val: Box<TExpr>,
    },
    Call {
        builtin: Builtin,
        args: Vec<TExpr>,
        span: Span,
        /// One-shot latch for the out-of-range Bernoulli diagnostic.
        clamp_warned: AtomicBool,
    },
}

impl TExpr {
    pub fn ty(&self, temps: &[Ty]) -> Ty {
        match self {
            TExpr::Const(s) => match s {
                Scalar::Bool(_) => Ty::Bool,
                Scalar::Int(_) => Ty::Int,
                Scalar::Real(_) => Ty::Real,
                Scalar::Str(_) => Ty::Str,
                Scalar::Enum(_) => Ty::Any,
            },
            TExpr::EnumConst { id, .. } => Ty::Enum(*id),
            TExpr::Read(p) => p.ty.clone(),
            TExpr::IntToReal(_) => Ty::Real,
            TExpr::FromAny { expect, .. } => expect.clone(),
            TExpr::Not(_) => Ty::Bool,
            TExpr::Neg(_, NumKind::Int) => Ty::Int,
            TExpr::Neg(_, NumKind::Real) => Ty::Real,
            TExpr::And(_, _) | TExpr::Or(_, _) => Ty::Bool,
            TExpr::Cmp { .. } => Ty::Bool,
            TExpr::Arith { kind, .. } => match kind {
                NumKind::Int => Ty::Int,
                NumKind::Real => Ty::Real,
            },
            TExpr::Ternary { then_val, .. } => then_val.ty(temps),
            TExpr::Call { builtin, .. } => match builtin {
                Builtin::Bernoulli | Builtin::Contains => Ty::Bool,
                Builtin::UniformInt | Builtin::AbsInt | Builtin::MinInt | Builtin::MaxInt => {
                    Ty::Int
                }
                _ => Ty::Real,
            },
        }
    }
}

// ---------------------------------------------------------------------------
// Section permission table
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SurfaceRoot {
    StatePrev,
    StateMid,
    StateNext,
    MeetPrecondition,
    Reward,
    ModuleResponse,
    Input,
}

fn readable(section: SectionKind, root: SurfaceRoot) -> bool {
    use SectionKind::*;
    use SurfaceRoot::*;
    match (section, root) {
        (InitialBelief, StatePrev) => true,
        (Extrinsic, StatePrev | StateMid) => true,
        (Precondition, StatePrev | StateMid | MeetPrecondition) => true,
        (Dynamics, StatePrev | StateMid | StateNext | MeetPrecondition | Reward) => true,
        (SpecialStateCondition, StatePrev) => true, // reads the resulting state
        (AmExpression, Input) => true,
        _ => false,
    }
}

fn writable(section: SectionKind, root: SurfaceRoot) -> bool {
    use SectionKind::*;
    use SurfaceRoot::*;
    match (section, root) {
        (InitialBelief, StatePrev) => true,
        (Extrinsic, StateMid) => true,
        (Precondition, MeetPrecondition) => true,
        (Dynamics, StateNext | Reward | ModuleResponse) => true,
        _ => false,
    }
}

fn params_in_scope(section: SectionKind) -> bool {
    matches!(
        section,
        SectionKind::Precondition | SectionKind::Dynamics | SectionKind::AmExpression
    )
}

/// The storage root the surface name `state` maps to in this section: the
/// build target during initial-belief sampling, the resulting state in
/// special-state conditions, the pre-step state otherwise.
fn state_root_for(section: SectionKind) -> Root {
    match section {
        SectionKind::InitialBelief => Root::Mid,
        SectionKind::SpecialStateCondition => Root::Next,
        _ => Root::Prev,
    }
}

// ---------------------------------------------------------------------------
// Checker
// ---------------------------------------------------------------------------

struct TempVar {
    name: String,
    ty: Ty,
}

struct Checker<'a> {
    scope: &'a Scope<'a>,
    section: SectionKind,
    temps: Vec<TempVar>,
}

#[derive(Clone, Copy, PartialEq)]
enum Mode {
    Read,
    Write,
}

pub fn typecheck(
    program: &Program,
    scope: &Scope<'_>,
    label: &str,
    source: &str,
) -> Result<TypedProgram, CheckError> {
    let mut checker = Checker {
        scope,
        section: program.section,
        temps: Vec::new(),
    };
    let body = match &program.body {
        ProgramBody::Statements(stmts) => TBody::Statements(checker.stmts(stmts)?),
        ProgramBody::Expression(expr) => TBody::Expression(checker.expr(expr)?),
    };
    Ok(TypedProgram {
        section: program.section,
        label: label.to_string(),
        source: source.to_string(),
        body,
        temps: checker.temps.into_iter().map(|t| t.ty).collect(),
    })
}

impl<'a> Checker<'a> {
    fn stmts(&mut self, stmts: &[Stmt]) -> Result<Vec<TStmt>, CheckError> {
        let mut out = Vec::with_capacity(stmts.len());
        for s in stmts {
            self.stmt(s, &mut out)?;
        }
        Ok(out)
    }

    fn stmt(&mut self, stmt: &Stmt, out: &mut Vec<TStmt>) -> Result<(), CheckError> {
        match stmt {
            Stmt::Block { stmts, .. } => {
                for s in stmts {
                    self.stmt(s, out)?;
                }
                Ok(())
            }
            Stmt::Assign { target, value, .. } => {
                let tvalue = self.expr(value)?;
                let value_ty = tvalue.ty(&self.temp_tys());
                let tpath = self.resolve_path(target, Mode::Write, Some(&value_ty))?;
                let coerced = self.coerce_assign(tvalue, &value_ty, &tpath.ty, target.span)?;
                out.push(TStmt::Assign {
                    target: tpath,
                    value: coerced,
                });
                Ok(())
            }
            Stmt::If {
                cond,
                then_branch,
                else_branch,
                ..
            } => {
                let tcond = self.bool_expr(cond)?;
                let mut tthen = Vec::new();
                self.stmt(then_branch, &mut tthen)?;
                let mut telse = Vec::new();
                if let Some(e) = else_branch {
                    self.stmt(e, &mut telse)?;
                }
                out.push(TStmt::If {
                    cond: tcond,
                    then_branch: tthen,
                    else_branch: telse,
                });
                Ok(())
            }
            Stmt::While { cond, body, span } => {
                let tcond = self.bool_expr(cond)?;
                let mut tbody = Vec::new();
                self.stmt(body, &mut tbody)?;
                out.push(TStmt::While {
                    cond: tcond,
                    body: tbody,
                    span: *span,
                });
                Ok(())
            }
        }
    }

    fn temp_tys(&self) -> Vec<Ty> {
        self.temps.iter().map(|t| t.ty.clone()).collect()
    }

    fn bool_expr(&mut self, e: &Expr) -> Result<TExpr, CheckError> {
        let te = self.expr(e)?;
        let ty = te.ty(&self.temp_tys());
        match ty {
            Ty::Bool => Ok(te),
            Ty::Any => Ok(TExpr::FromAny {
                expect: Ty::Bool,
                inner: Box::new(te),
                span: e.span(),
            }),
            other => Err(CheckError::Type {
                span: e.span(),
                msg: format!(
                    "condition must be bool, got {}",
                    self.scope.types.display_ty(&other)
                ),
            }),
        }
    }

    fn coerce_assign(
        &self,
        value: TExpr,
        value_ty: &Ty,
        target_ty: &Ty,
        span: Span,
    ) -> Result<TExpr, CheckError> {
        match (target_ty, value_ty) {
            (t, v) if t == v => Ok(value),
            (Ty::Real, Ty::Int) => Ok(TExpr::IntToReal(Box::new(value))),
            (t, Ty::Any) => Ok(TExpr::FromAny {
                expect: t.clone(),
                inner: Box::new(value),
                span,
            }),
            (t, v) => Err(CheckError::Type {
                span,
                msg: format!(
                    "cannot assign {} to {}",
                    self.scope.types.display_ty(v),
                    self.scope.types.display_ty(t)
                ),
            }),
        }
    }

    // -- path resolution ----------------------------------------------------

    fn resolve_path(
        &mut self,
        path: &PathExpr,
        mode: Mode,
        assign_ty: Option<&Ty>,
    ) -> Result<TPath, CheckError> {
        let span = path.span;
        let root = path.root.as_str();

        // Special variables.
        let special = match root {
            "__meetPrecondition" => Some((SurfaceRoot::MeetPrecondition, SpecialVar::MeetPrecondition, Ty::Bool)),
            "__reward" => Some((SurfaceRoot::Reward, SpecialVar::Reward, Ty::Real)),
            "__moduleResponse" => {
                let ty = self
                    .scope
                    .responses
                    .map(Ty::Enum)
                    .unwrap_or(Ty::Any);
                Some((SurfaceRoot::ModuleResponse, SpecialVar::ModuleResponse, ty))
            }
            _ => None,
        };
        if let Some((surface, var, ty)) = special {
            self.check_root_mode(surface, mode, root, span)?;
            if !path.segments.is_empty() {
                return Err(CheckError::Type {
                    span,
                    msg: format!("`{root}` has no fields"),
                });
            }
            return Ok(TPath {
                kind: TPathKind::Special(var),
                ty,
                span,
            });
        }

        // `__input`: dynamic skill-output value.
        if root == "__input" {
            self.check_root_mode(SurfaceRoot::Input, mode, root, span)?;
            let mut segs = Vec::new();
            for seg in &path.segments {
                match seg {
                    PathSeg::Field(f) => segs.push(TInputSeg::Field(f.clone())),
                    PathSeg::Index(e) => {
                        let te = self.int_index_expr(e)?;
                        segs.push(TInputSeg::Index(Box::new(te)));
                    }
                }
            }
            return Ok(TPath {
                kind: TPathKind::Input { segs },
                ty: Ty::Any,
                span,
            });
        }

        // State copies.
        let state_root = match root {
            "state" => Some((SurfaceRoot::StatePrev, state_root_for(self.section))),
            "state_" => Some((SurfaceRoot::StateMid, Root::Mid)),
            "state__" => Some((SurfaceRoot::StateNext, Root::Next)),
            _ => None,
        };
        if let Some((surface, storage)) = state_root {
            self.check_root_mode(surface, mode, root, span)?;
            return self.resolve_state_path(storage, path, span);
        }

        // Skill parameters.
        if params_in_scope(self.section) {
            if let Some(idx) = self.scope.params.iter().position(|p| p.name == *root) {
                if mode == Mode::Write {
                    return Err(CheckError::Write {
                        span,
                        msg: format!("parameter `{root}` is read-only"),
                    });
                }
                let ty = self.scope.params[idx].ty.clone();
                return self.resolve_typed_segments(Root::Param(idx as u16), 0, ty, path, span);
            }
        }

        // Abstraction-map locals.
        if self.section == SectionKind::AmExpression {
            if let Some(idx) = self.scope.locals.iter().position(|l| l.name == *root) {
                if mode == Mode::Write {
                    return Err(CheckError::Write {
                        span,
                        msg: format!("local `{root}` cannot be assigned here"),
                    });
                }
                let ty = self.scope.locals[idx].ty.clone();
                return self.resolve_typed_segments(Root::Local(idx as u16), 0, ty, path, span);
            }
        }

        // Program temporaries (statement sections only).
        if !self.section.is_expression() {
            if let Some(idx) = self.temps.iter().position(|t| t.name == *root) {
                let ty = self.temps[idx].ty.clone();
                if !path.segments.is_empty() {
                    return Err(CheckError::Type {
                        span,
                        msg: format!("temporary `{root}` is scalar and has no fields"),
                    });
                }
                return Ok(TPath {
                    kind: TPathKind::Slots {
                        root: Root::Temp(idx as u16),
                        base: 0,
                        steps: Vec::new(),
                    },
                    ty,
                    span,
                });
            }
            if mode == Mode::Write && path.segments.is_empty() {
                // First assignment declares a scratch variable.
                let ty = assign_ty.cloned().unwrap_or(Ty::Any);
                let ty = if ty == Ty::Any { Ty::Int } else { ty };
                if !ty.is_scalar() {
                    return Err(CheckError::Type {
                        span,
                        msg: "temporaries must hold scalar values".into(),
                    });
                }
                let idx = self.temps.len();
                self.temps.push(TempVar {
                    name: root.to_string(),
                    ty: ty.clone(),
                });
                return Ok(TPath {
                    kind: TPathKind::Slots {
                        root: Root::Temp(idx as u16),
                        base: 0,
                        steps: Vec::new(),
                    },
                    ty,
                    span,
                });
            }
        }

        Err(CheckError::Bind {
            span,
            msg: format!("unknown name `{root}` in {} section", self.section),
        })
    }

    fn check_root_mode(
        &self,
        surface: SurfaceRoot,
        mode: Mode,
        name: &str,
        span: Span,
    ) -> Result<(), CheckError> {
        match mode {
            Mode::Read => {
                if !readable(self.section, surface) {
                    Err(CheckError::Bind {
                        span,
                        msg: format!("`{name}` is not readable in {} section", self.section),
                    })
                } else {
                    Ok(())
                }
            }
            Mode::Write => {
                if !writable(self.section, surface) {
                    Err(CheckError::Write {
                        span,
                        msg: format!("`{name}` is not writable in {} section", self.section),
                    })
                } else {
                    Ok(())
                }
            }
        }
    }

    fn resolve_state_path(
        &mut self,
        storage: Root,
        path: &PathExpr,
        span: Span,
    ) -> Result<TPath, CheckError> {
        let mut segs = path.segments.iter();
        let first = segs.next().ok_or_else(|| CheckError::Type {
            span,
            msg: "state copies cannot be used as whole values; name a variable".into(),
        })?;
        let var_name = match first {
            PathSeg::Field(f) => f,
            PathSeg::Index(_) => {
                return Err(CheckError::Type {
                    span,
                    msg: "state copies are indexed by variable name".into(),
                })
            }
        };
        let var = self.scope.layout.var(var_name).ok_or_else(|| CheckError::Bind {
            span,
            msg: format!("unknown state variable `{var_name}`"),
        })?;
        let rest = PathExpr {
            root: String::new(),
            segments: segs.cloned().collect(),
            span,
        };
        self.resolve_typed_segments(storage, var.offset, var.ty.clone(), &rest, span)
    }

    /// Walks `path.segments` from a value of type `ty` at `base`.
    fn resolve_typed_segments(
        &mut self,
        root: Root,
        base: usize,
        ty: Ty,
        path: &PathExpr,
        span: Span,
    ) -> Result<TPath, CheckError> {
        let mut steps: Vec<TPathStep> = Vec::new();
        let mut offset = base;
        let mut cur = ty;
        for seg in &path.segments {
            match seg {
                PathSeg::Field(fname) => match cur {
                    Ty::Record(rec) => {
                        let (foff, fty) =
                            self.scope.types.field_offset(rec, fname).ok_or_else(|| {
                                CheckError::Bind {
                                    span,
                                    msg: format!(
                                        "record `{}` has no field `{fname}`",
                                        self.scope.types.record_decl(rec).name
                                    ),
                                }
                            })?;
                        if steps.is_empty() {
                            offset += foff;
                        } else {
                            push_offset(&mut steps, foff);
                        }
                        cur = fty;
                    }
                    other => {
                        return Err(CheckError::Type {
                            span,
                            msg: format!(
                                "{} has no field `{fname}`",
                                self.scope.types.display_ty(&other)
                            ),
                        })
                    }
                },
                PathSeg::Index(idx_expr) => match cur {
                    Ty::Array(elem, len) => {
                        let stride = self.scope.types.flat_size(&elem);
                        let tidx = self.int_index_expr(idx_expr)?;
                        steps.push(TPathStep::Index {
                            idx: Box::new(tidx),
                            stride,
                            len,
                        });
                        cur = *elem;
                    }
                    other => {
                        return Err(CheckError::Type {
                            span,
                            msg: format!(
                                "{} cannot be indexed",
                                self.scope.types.display_ty(&other)
                            ),
                        })
                    }
                },
            }
        }
        if !cur.is_scalar() {
            return Err(CheckError::Type {
                span,
                msg: format!(
                    "compound value of type {} cannot be used directly; name a scalar field",
                    self.scope.types.display_ty(&cur)
                ),
            });
        }
        Ok(TPath {
            kind: TPathKind::Slots {
                root,
                base: offset,
                steps,
            },
            ty: cur,
            span,
        })
    }

    fn int_index_expr(&mut self, e: &Expr) -> Result<TExpr, CheckError> {
        let te = self.expr(e)?;
        match te.ty(&self.temp_tys()) {
            Ty::Int => Ok(te),
            Ty::Any => Ok(TExpr::FromAny {
                expect: Ty::Int,
                inner: Box::new(te),
                span: e.span(),
            }),
            other => Err(CheckError::Type {
                span: e.span(),
                msg: format!(
                    "array index must be int, got {}",
                    self.scope.types.display_ty(&other)
                ),
            }),
        }
    }

    // -- expressions ----------------------------------------------------------

    fn expr(&mut self, e: &Expr) -> Result<TExpr, CheckError> {
        match e {
            Expr::Lit(lit, _) => Ok(TExpr::Const(match lit {
                Lit::Bool(b) => Scalar::Bool(*b),
                Lit::Int(i) => Scalar::Int(*i),
                Lit::Real(r) => Scalar::Real(*r),
                Lit::Str(s) => Scalar::Str(std::sync::Arc::from(s.as_str())),
            })),
            Expr::Path(p) => self.path_read(p),
            Expr::Unary { op, operand, span } => {
                let inner = self.expr(operand)?;
                let ty = inner.ty(&self.temp_tys());
                match op {
                    UnOp::Not => match ty {
                        Ty::Bool => Ok(TExpr::Not(Box::new(inner))),
                        Ty::Any => Ok(TExpr::Not(Box::new(TExpr::FromAny {
                            expect: Ty::Bool,
                            inner: Box::new(inner),
                            span: *span,
                        }))),
                        other => Err(CheckError::Type {
                            span: *span,
                            msg: format!(
                                "`!` needs bool, got {}",
                                self.scope.types.display_ty(&other)
                            ),
                        }),
                    },
                    UnOp::Neg => match ty {
                        Ty::Int => Ok(TExpr::Neg(Box::new(inner), NumKind::Int)),
                        Ty::Real => Ok(TExpr::Neg(Box::new(inner), NumKind::Real)),
                        Ty::Any => Ok(TExpr::Neg(
                            Box::new(TExpr::FromAny {
                                expect: Ty::Real,
                                inner: Box::new(inner),
                                span: *span,
                            }),
                            NumKind::Real,
                        )),
                        other => Err(CheckError::Type {
                            span: *span,
                            msg: format!(
                                "`-` needs a number, got {}",
                                self.scope.types.display_ty(&other)
                            ),
                        }),
                    },
                }
            }
            Expr::Binary { op, lhs, rhs, span } => self.binary(*op, lhs, rhs, *span),
            Expr::Ternary {
                cond,
                then_val,
                else_val,
                span,
            } => {
                let tcond = self.bool_expr(cond)?;
                let tthen = self.expr(then_val)?;
                let telse = self.expr(else_val)?;
                let ty_t = tthen.ty(&self.temp_tys());
                let ty_e = telse.ty(&self.temp_tys());
                let (tthen, telse) = self.unify_branches(tthen, ty_t, telse, ty_e, *span)?;
                Ok(TExpr::Ternary {
                    cond: Box::new(tcond),
                    then_val: Box::new(tthen),
                    else_val: Box::new(telse),
                })
            }
            Expr::Call { name, args, span } => self.call(name, args, *span),
        }
    }

    fn path_read(&mut self, p: &PathExpr) -> Result<TExpr, CheckError> {
        // A bare identifier may be an enum symbol rather than a variable.
        if p.segments.is_empty() {
            if let Some(sym) = self.resolve_symbol(&p.root) {
                return Ok(sym);
            }
        }
        let tpath = self.resolve_path(p, Mode::Read, None)?;
        Ok(TExpr::Read(tpath))
    }

    /// Bare-identifier fallback: skill response symbols (when in skill
    /// scope), then environment enum symbols. Variables shadow symbols, so
    /// this is only consulted when no binding matched — see `path_read`
    /// callers ordering.
    fn resolve_symbol(&self, name: &str) -> Option<TExpr> {
        // Variables take priority; check bindings first.
        if name == "state"
            || name == "state_"
            || name == "state__"
            || name.starts_with("__")
            || self.scope.params.iter().any(|p| p.name == name)
            || self.scope.locals.iter().any(|l| l.name == name)
            || self.temps.iter().any(|t| t.name == name)
        {
            return None;
        }
        if let Some(resp) = self.scope.responses {
            let decl = self.scope.types.enum_decl(resp);
            if let Some(idx) = decl.symbols.iter().position(|s| s == name) {
                return Some(TExpr::EnumConst {
                    id: resp,
                    idx: idx as u32,
                });
            }
        }
        self.scope
            .types
            .lookup_symbol(name)
            .map(|(id, idx)| TExpr::EnumConst { id, idx })
    }

    fn binary(&mut self, op: BinOp, lhs: &Expr, rhs: &Expr, span: Span) -> Result<TExpr, CheckError> {
        let tl = self.expr(lhs)?;
        let tr = self.expr(rhs)?;
        let ty_l = tl.ty(&self.temp_tys());
        let ty_r = tr.ty(&self.temp_tys());
        let types = self.scope.types;
        let type_err = |msg: String| CheckError::Type { span, msg };

        match op {
            BinOp::And | BinOp::Or => {
                let bl = self.to_bool(tl, &ty_l, span)?;
                let br = self.to_bool(tr, &ty_r, span)?;
                Ok(if op == BinOp::And {
                    TExpr::And(Box::new(bl), Box::new(br))
                } else {
                    TExpr::Or(Box::new(bl), Box::new(br))
                })
            }
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                let cop = match op {
                    BinOp::Eq => CmpOp::Eq,
                    BinOp::Ne => CmpOp::Ne,
                    BinOp::Lt => CmpOp::Lt,
                    BinOp::Le => CmpOp::Le,
                    BinOp::Gt => CmpOp::Gt,
                    BinOp::Ge => CmpOp::Ge,
                    _ => unreachable!(),
                };
                let equality = matches!(cop, CmpOp::Eq | CmpOp::Ne);
                let (kind, tl, tr) = match (&ty_l, &ty_r) {
                    (Ty::Int, Ty::Int) => (CmpKind::Int, tl, tr),
                    (Ty::Real, Ty::Real) => (CmpKind::Real, tl, tr),
                    (Ty::Int, Ty::Real) => (CmpKind::Real, TExpr::IntToReal(Box::new(tl)), tr),
                    (Ty::Real, Ty::Int) => (CmpKind::Real, tl, TExpr::IntToReal(Box::new(tr))),
                    (Ty::Bool, Ty::Bool) if equality => (CmpKind::Bool, tl, tr),
                    (Ty::Str, Ty::Str) if equality => (CmpKind::Str, tl, tr),
                    (Ty::Enum(a), Ty::Enum(b)) if equality => {
                        if a != b {
                            return Err(type_err(format!(
                                "cannot compare values of `{}` and `{}`",
                                types.enum_decl(*a).name,
                                types.enum_decl(*b).name
                            )));
                        }
                        (CmpKind::Enum, tl, tr)
                    }
                    // Unqualified enum constants carry type Any; allow
                    // comparing them against a typed enum operand.
                    (Ty::Enum(_), Ty::Any) if equality => (
                        CmpKind::Enum,
                        tl,
                        TExpr::FromAny {
                            expect: ty_l.clone(),
                            inner: Box::new(tr),
                            span,
                        },
                    ),
                    (Ty::Any, Ty::Enum(_)) if equality => (
                        CmpKind::Enum,
                        TExpr::FromAny {
                            expect: ty_r.clone(),
                            inner: Box::new(tl),
                            span,
                        },
                        tr,
                    ),
                    (Ty::Any, Ty::Any) => (CmpKind::Dyn, tl, tr),
                    (Ty::Any, other) if other.is_scalar() => {
                        let kind = cmp_kind_of(other, equality, span)?;
                        (kind, coerce_any_side(tl, other, span, equality)?, tr)
                    }
                    (other, Ty::Any) if other.is_scalar() => {
                        let kind = cmp_kind_of(other, equality, span)?;
                        (kind, tl, coerce_any_side(tr, other, span, equality)?)
                    }
                    (a, b) => {
                        return Err(type_err(format!(
                            "`{}` cannot compare {} with {}",
                            op_symbol(op),
                            types.display_ty(a),
                            types.display_ty(b)
                        )))
                    }
                };
                if !equality && !matches!(kind, CmpKind::Int | CmpKind::Real | CmpKind::Dyn) {
                    return Err(type_err(format!(
                        "`{}` needs numeric operands",
                        op_symbol(op)
                    )));
                }
                Ok(TExpr::Cmp {
                    op: cop,
                    kind,
                    lhs: Box::new(tl),
                    rhs: Box::new(tr),
                    span,
                })
            }
            BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Rem => {
                let aop = match op {
                    BinOp::Add => ArithOp::Add,
                    BinOp::Sub => ArithOp::Sub,
                    BinOp::Mul => ArithOp::Mul,
                    BinOp::Div => ArithOp::Div,
                    BinOp::Rem => ArithOp::Rem,
                    _ => unreachable!(),
                };
                let (kind, tl, tr) = match (&ty_l, &ty_r) {
                    (Ty::Int, Ty::Int) => (NumKind::Int, tl, tr),
                    (Ty::Real, Ty::Real) => (NumKind::Real, tl, tr),
                    (Ty::Int, Ty::Real) => (NumKind::Real, TExpr::IntToReal(Box::new(tl)), tr),
                    (Ty::Real, Ty::Int) => (NumKind::Real, tl, TExpr::IntToReal(Box::new(tr))),
                    (Ty::Any, other) if other.is_numeric() => {
                        let kind = if *other == Ty::Int { Ty::Int } else { Ty::Real };
                        let tl = TExpr::FromAny {
                            expect: kind.clone(),
                            inner: Box::new(tl),
                            span,
                        };
                        let nk = if kind == Ty::Int { NumKind::Int } else { NumKind::Real };
                        let tr = if kind == Ty::Real && ty_r == Ty::Int {
                            TExpr::IntToReal(Box::new(tr))
                        } else if ty_r == Ty::Any {
                            TExpr::FromAny { expect: kind, inner: Box::new(tr), span }
                        } else {
                            tr
                        };
                        (nk, tl, tr)
                    }
                    (other, Ty::Any) if other.is_numeric() => {
                        let kind = if *other == Ty::Int { Ty::Int } else { Ty::Real };
                        let nk = if kind == Ty::Int { NumKind::Int } else { NumKind::Real };
                        let tr = TExpr::FromAny {
                            expect: kind,
                            inner: Box::new(tr),
                            span,
                        };
                        (nk, tl, tr)
                    }
                    (a, b) => {
                        return Err(type_err(format!(
                            "`{}` needs numeric operands, got {} and {}",
                            op_symbol(op),
                            types.display_ty(a),
                            types.display_ty(b)
                        )))
                    }
                };
                if aop == ArithOp::Rem && kind != NumKind::Int {
                    return Err(type_err("`%` is defined for int operands only".into()));
                }
                Ok(TExpr::Arith {
                    op: aop,
                    kind,
                    lhs: Box::new(tl),
                    rhs: Box::new(tr),
                    span,
                })
            }
        }
    }

    fn to_bool(&self, e: TExpr, ty: &Ty, span: Span) -> Result<TExpr, CheckError> {
        match ty {
            Ty::Bool => Ok(e),
            Ty::Any => Ok(TExpr::FromAny {
                expect: Ty::Bool,
                inner: Box::new(e),
                span,
            }),
            other => Err(CheckError::Type {
                span,
                msg: format!(
                    "logical operator needs bool, got {}",
                    self.scope.types.display_ty(other)
                ),
            }),
        }
    }

    fn unify_branches(
        &self,
        t: TExpr,
        ty_t: Ty,
        e: TExpr,
        ty_e: Ty,
        span: Span,
    ) -> Result<(TExpr, TExpr), CheckError> {
        if ty_t == ty_e {
            return Ok((t, e));
        }
        match (&ty_t, &ty_e) {
            (Ty::Int, Ty::Real) => Ok((TExpr::IntToReal(Box::new(t)), e)),
            (Ty::Real, Ty::Int) => Ok((t, TExpr::IntToReal(Box::new(e)))),
            (Ty::Any, other) if other.is_scalar() => Ok((
                TExpr::FromAny {
                    expect: other.clone(),
                    inner: Box::new(t),
                    span,
                },
                e,
            )),
            (other, Ty::Any) if other.is_scalar() => Ok((
                t,
                TExpr::FromAny {
                    expect: other.clone(),
                    inner: Box::new(e),
                    span,
                },
            )),
            (a, b) => Err(CheckError::Type {
                span,
                msg: format!(
                    "ternary branches have incompatible types {} and {}",
                    self.scope.types.display_ty(a),
                    self.scope.types.display_ty(b)
                ),
            }),
        }
    }

    fn call(&mut self, name: &[String], args: &[Expr], span: Span) -> Result<TExpr, CheckError> {
        let joined = name.join(".");
        let mut targs = Vec::with_capacity(args.len());
        for a in args {
            targs.push(self.expr(a)?);
        }
        let tys: Vec<Ty> = targs.iter().map(|t| t.ty(&self.temp_tys())).collect();

        let numeric_pick = |tys: &[Ty]| -> NumKind {
            if tys.iter().all(|t| *t == Ty::Int) {
                NumKind::Int
            } else {
                NumKind::Real
            }
        };

        let builtin = match joined.as_str() {
            "AOS.Bernoulli" => Builtin::Bernoulli,
            "AOS.UniformInt" => Builtin::UniformInt,
            "AOS.UniformReal" => Builtin::UniformReal,
            "sqrt" => Builtin::Sqrt,
            "pow" => Builtin::Pow,
            "abs" => match numeric_pick(&tys) {
                NumKind::Int => Builtin::AbsInt,
                NumKind::Real => Builtin::AbsReal,
            },
            "min" => match numeric_pick(&tys) {
                NumKind::Int => Builtin::MinInt,
                NumKind::Real => Builtin::MinReal,
            },
            "max" => match numeric_pick(&tys) {
                NumKind::Int => Builtin::MaxInt,
                NumKind::Real => Builtin::MaxReal,
            },
            "floor" => Builtin::Floor,
            "contains" => Builtin::Contains,
            other => {
                return Err(CheckError::Bind {
                    span,
                    msg: format!("unknown function `{other}`"),
                })
            }
        };

        let sig: &[Ty] = match builtin {
            Builtin::Bernoulli | Builtin::Sqrt | Builtin::Floor | Builtin::AbsReal => &[Ty::Real],
            Builtin::AbsInt => &[Ty::Int],
            Builtin::UniformInt | Builtin::MinInt | Builtin::MaxInt => &[Ty::Int, Ty::Int],
            Builtin::UniformReal | Builtin::Pow | Builtin::MinReal | Builtin::MaxReal => {
                &[Ty::Real, Ty::Real]
            }
            Builtin::Contains => &[Ty::Str, Ty::Str],
        };
        if tys.len() != sig.len() {
            return Err(CheckError::Type {
                span,
                msg: format!(
                    "`{joined}` expects {} argument(s), got {}",
                    sig.len(),
                    tys.len()
                ),
            });
        }
        let mut fixed = Vec::with_capacity(targs.len());
        for ((arg, got), want) in targs.into_iter().zip(tys.iter()).zip(sig.iter()) {
            let coerced = match (want, got) {
                (w, g) if w == g => arg,
                (Ty::Real, Ty::Int) => TExpr::IntToReal(Box::new(arg)),
                (w, Ty::Any) => TExpr::FromAny {
                    expect: w.clone(),
                    inner: Box::new(arg),
                    span,
                },
                (w, g) => {
                    return Err(CheckError::Type {
                        span,
                        msg: format!(
                            "`{joined}` argument expects {}, got {}",
                            self.scope.types.display_ty(w),
                            self.scope.types.display_ty(g)
                        ),
                    })
                }
            };
            fixed.push(coerced);
        }
        Ok(TExpr::Call {
            builtin,
            args: fixed,
            span,
            clamp_warned: AtomicBool::new(false),
        })
    }
}

fn coerce_any_side(e: TExpr, other: &Ty, span: Span, equality: bool) -> Result<TExpr, CheckError> {
    if !equality && !other.is_numeric() {
        return Err(CheckError::Type {
            span,
            msg: "ordering comparison needs numeric operands".into(),
        });
    }
    Ok(TExpr::FromAny {
        expect: other.clone(),
        inner: Box::new(e),
        span,
    })
}

fn cmp_kind_of(ty: &Ty, equality: bool, span: Span) -> Result<CmpKind, CheckError> {
    match ty {
        Ty::Int => Ok(CmpKind::Int),
        Ty::Real => Ok(CmpKind::Real),
        Ty::Bool if equality => Ok(CmpKind::Bool),
        Ty::Str if equality => Ok(CmpKind::Str),
        Ty::Enum(_) if equality => Ok(CmpKind::Enum),
        _ => Err(CheckError::Type {
            span,
            msg: "ordering comparison needs numeric operands".into(),
        }),
    }
}

fn op_symbol(op: BinOp) -> &'static str {
    op.symbol()
}

fn push_offset(steps: &mut Vec<TPathStep>, off: usize) {
    if off == 0 {
        return;
    }
    if let Some(TPathStep::Offset(o)) = steps.last_mut() {
        *o += off;
    } else {
        steps.push(TPathStep::Offset(off));
    }
}
