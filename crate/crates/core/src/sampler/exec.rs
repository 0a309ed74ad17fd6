//! Interpreter for typed programs. The same evaluator serves the seeded
//! sampling semantics and the exact enumeration semantics; only the
//! [`RandomSource`] behind the stochastic builtins differs.

use std::sync::atomic::Ordering;

use crate::dsl::ast::Span;
use crate::dsl::typecheck::*;
use crate::types::{Scalar, Ty, TypeTable};

use thiserror::Error;

/// Iteration cap per `while` execution; exceeding it is a diagnosable fault
/// rather than nontermination.
pub const LOOP_CAP: u64 = 10_000;

#[derive(Debug, Clone, Error)]
pub enum EvalError {
    #[error("evaluation fault in {label} at {span}: {msg}")]
    Fault {
        label: String,
        span: Span,
        msg: String,
    },
    #[error("loop iteration cap exceeded in {label} at {span}")]
    LoopCap { label: String, span: Span },
    #[error("dynamics of {label} finished without assigning __moduleResponse")]
    ObservationUnset { label: String },
    #[error("builtin `{name}` is not supported under enumeration ({label} at {span})")]
    UnsupportedBuiltin {
        label: String,
        span: Span,
        name: String,
    },
    /// Internal marker: the enumeration pruned this branch. Never escapes
    /// the enumerator.
    #[error("branch pruned")]
    Pruned,
}

/// Outcome of a stochastic builtin request.
pub enum SourceError {
    Unsupported,
    Pruned,
}

/// Behind every stochastic builtin: a seeded generator when sampling, a
/// branch enumerator when computing exact distributions.
pub trait RandomSource {
    fn bernoulli(&mut self, p: f64) -> Result<bool, SourceError>;
    fn uniform_int(&mut self, lo: i64, hi: i64) -> Result<i64, SourceError>;
    fn uniform_real(&mut self, lo: f64, hi: f64) -> Result<f64, SourceError>;
}

/// Variable storage for one program execution. Unused roots may be empty.
pub struct ExecEnv<'a> {
    /// `state` (pre-step copy).
    pub prev: &'a [Scalar],
    /// `state_` (after extrinsic changes); build target of initial-belief
    /// programs.
    pub mid: &'a mut [Scalar],
    /// `state__` (next state); the state special conditions read.
    pub next: &'a mut [Scalar],
    /// Flattened value per skill parameter.
    pub params: &'a [Vec<Scalar>],
    /// Flattened value per abstraction-map local.
    pub locals: &'a [Vec<Scalar>],
    /// Dynamic skill output (`__input`).
    pub input: Option<&'a serde_json::Value>,
    pub meet_precondition: bool,
    pub reward: f64,
    pub module_response: Option<u32>,
    temps: Vec<Scalar>,
}

impl<'a> ExecEnv<'a> {
    pub fn new(
        prev: &'a [Scalar],
        mid: &'a mut [Scalar],
        next: &'a mut [Scalar],
        params: &'a [Vec<Scalar>],
    ) -> Self {
        ExecEnv {
            prev,
            mid,
            next,
            params,
            locals: &[],
            input: None,
            meet_precondition: true,
            reward: 0.0,
            module_response: None,
            temps: Vec::new(),
        }
    }

    pub fn for_am(
        locals: &'a [Vec<Scalar>],
        params: &'a [Vec<Scalar>],
        input: Option<&'a serde_json::Value>,
    ) -> Self {
        ExecEnv {
            prev: &[],
            mid: &mut [],
            next: &mut [],
            params,
            locals,
            input,
            meet_precondition: true,
            reward: 0.0,
            module_response: None,
            temps: Vec::new(),
        }
    }
}

/// Executes a statement program against the environment.
pub fn exec_program(
    program: &TypedProgram,
    types: &TypeTable,
    env: &mut ExecEnv<'_>,
    src: &mut dyn RandomSource,
) -> Result<(), EvalError> {
    env.temps.clear();
    for ty in &program.temps {
        let mut buf = Vec::with_capacity(1);
        types.default_slots(ty, &mut buf);
        env.temps.push(buf.pop().unwrap());
    }
    match &program.body {
        TBody::Statements(stmts) => exec_stmts(stmts, program, env, src),
        TBody::Expression(_) => Err(EvalError::Fault {
            label: program.label.clone(),
            span: Span::new(0, 0),
            msg: "expression program executed as statements".into(),
        }),
    }
}

/// Evaluates an expression program (special-state condition, AM expression).
pub fn eval_condition(
    program: &TypedProgram,
    env: &mut ExecEnv<'_>,
    src: &mut dyn RandomSource,
) -> Result<Scalar, EvalError> {
    match &program.body {
        TBody::Expression(e) => eval_expr(e, program, env, src),
        TBody::Statements(_) => Err(EvalError::Fault {
            label: program.label.clone(),
            span: Span::new(0, 0),
            msg: "statement program evaluated as expression".into(),
        }),
    }
}

fn exec_stmts(
    stmts: &[TStmt],
    program: &TypedProgram,
    env: &mut ExecEnv<'_>,
    src: &mut dyn RandomSource,
) -> Result<(), EvalError> {
    for stmt in stmts {
        match stmt {
            TStmt::Assign { target, value } => {
                let v = eval_expr(value, program, env, src)?;
                write_path(target, v, program, env, src)?;
            }
            TStmt::If {
                cond,
                then_branch,
                else_branch,
            } => {
                if expect_bool(eval_expr(cond, program, env, src)?) {
                    exec_stmts(then_branch, program, env, src)?;
                } else {
                    exec_stmts(else_branch, program, env, src)?;
                }
            }
            TStmt::While { cond, body, span } => {
                let mut iterations = 0u64;
                while expect_bool(eval_expr(cond, program, env, src)?) {
                    iterations += 1;
                    if iterations > LOOP_CAP {
                        return Err(EvalError::LoopCap {
                            label: program.label.clone(),
                            span: *span,
                        });
                    }
                    exec_stmts(body, program, env, src)?;
                }
            }
        }
    }
    Ok(())
}

#[inline]
fn expect_bool(s: Scalar) -> bool {
    match s {
        Scalar::Bool(b) => b,
        // unreachable by construction: conditions are bool-typed
        _ => false,
    }
}

fn fault(program: &TypedProgram, span: Span, msg: impl Into<String>) -> EvalError {
    EvalError::Fault {
        label: program.label.clone(),
        span,
        msg: msg.into(),
    }
}

fn resolve_slot(
    root: Root,
    base: usize,
    steps: &[TPathStep],
    span: Span,
    program: &TypedProgram,
    env: &mut ExecEnv<'_>,
    src: &mut dyn RandomSource,
) -> Result<usize, EvalError> {
    let mut off = base;
    for step in steps {
        match step {
            TPathStep::Offset(o) => off += o,
            TPathStep::Index { idx, stride, len } => {
                let v = eval_expr(idx, program, env, src)?;
                let i = match v {
                    Scalar::Int(i) => i,
                    other => {
                        return Err(fault(
                            program,
                            span,
                            format!("array index must be int, got {}", other.kind_name()),
                        ))
                    }
                };
                if i < 0 || (i as usize) >= *len {
                    return Err(fault(
                        program,
                        span,
                        format!("index {i} out of bounds for array of length {len}"),
                    ));
                }
                off += (i as usize) * stride;
            }
        }
    }
    let _ = root;
    Ok(off)
}

fn read_slots<'e>(env: &'e ExecEnv<'_>, root: Root) -> &'e [Scalar] {
    match root {
        Root::Prev => env.prev,
        Root::Mid => env.mid,
        Root::Next => env.next,
        Root::Param(i) => &env.params[i as usize],
        Root::Local(i) => &env.locals[i as usize],
        Root::Temp(_) => &env.temps,
    }
}

fn read_path(
    path: &TPath,
    program: &TypedProgram,
    env: &mut ExecEnv<'_>,
    src: &mut dyn RandomSource,
) -> Result<Scalar, EvalError> {
    match &path.kind {
        TPathKind::Slots { root, base, steps } => {
            let slot = resolve_slot(*root, *base, steps, path.span, program, env, src)?;
            let slots = match root {
                Root::Temp(i) => return Ok(env.temps[*i as usize].clone()),
                _ => read_slots(env, *root),
            };
            slots.get(slot).cloned().ok_or_else(|| {
                fault(program, path.span, format!("slot {slot} out of range"))
            })
        }
        TPathKind::Special(var) => match var {
            SpecialVar::MeetPrecondition => Ok(Scalar::Bool(env.meet_precondition)),
            SpecialVar::Reward => Ok(Scalar::Real(env.reward)),
            SpecialVar::ModuleResponse => match env.module_response {
                Some(idx) => Ok(Scalar::Enum(idx)),
                None => Err(fault(
                    program,
                    path.span,
                    "__moduleResponse read before assignment",
                )),
            },
        },
        TPathKind::Input { segs } => {
            // `env.input` is a shared reference whose lifetime is the env's
            // type parameter, so copying it out leaves env free to re-borrow.
            let mut cur = match env.input {
                Some(v) => v,
                None => {
                    return Err(fault(program, path.span, "`__input` is not available here"))
                }
            };
            for seg in segs {
                match seg {
                    TInputSeg::Field(name) => {
                        cur = cur.get(name.as_str()).ok_or_else(|| {
                            fault(
                                program,
                                path.span,
                                format!("skill output has no field `{name}`"),
                            )
                        })?;
                    }
                    TInputSeg::Index(idx) => {
                        let v = eval_expr(idx, program, env, src)?;
                        let i = match v {
                            Scalar::Int(i) if i >= 0 => i as usize,
                            other => {
                                return Err(fault(
                                    program,
                                    path.span,
                                    format!("bad index {other} into skill output"),
                                ))
                            }
                        };
                        cur = cur.get(i).ok_or_else(|| {
                            fault(program, path.span, format!("index {i} out of range"))
                        })?;
                    }
                }
            }
            json_to_scalar(cur).ok_or_else(|| {
                fault(
                    program,
                    path.span,
                    "skill output path does not name a scalar value",
                )
            })
        }
    }
}

pub fn json_to_scalar(v: &serde_json::Value) -> Option<Scalar> {
    use serde_json::Value as J;
    match v {
        J::Bool(b) => Some(Scalar::Bool(*b)),
        J::Number(n) => {
            if let Some(i) = n.as_i64() {
                Some(Scalar::Int(i))
            } else {
                n.as_f64().map(Scalar::Real)
            }
        }
        J::String(s) => Some(Scalar::Str(std::sync::Arc::from(s.as_str()))),
        _ => None,
    }
}

fn write_path(
    path: &TPath,
    value: Scalar,
    program: &TypedProgram,
    env: &mut ExecEnv<'_>,
    src: &mut dyn RandomSource,
) -> Result<(), EvalError> {
    match &path.kind {
        TPathKind::Slots { root, base, steps } => {
            let slot = resolve_slot(*root, *base, steps, path.span, program, env, src)?;
            let cell = match root {
                Root::Mid => env.mid.get_mut(slot),
                Root::Next => env.next.get_mut(slot),
                Root::Temp(i) => env.temps.get_mut(*i as usize),
                // read-only roots are rejected by the typechecker
                _ => None,
            };
            match cell {
                Some(c) => {
                    *c = value;
                    Ok(())
                }
                None => Err(fault(program, path.span, "write target out of range")),
            }
        }
        TPathKind::Special(var) => {
            match var {
                SpecialVar::MeetPrecondition => match value {
                    Scalar::Bool(b) => env.meet_precondition = b,
                    _ => unreachable!("typechecked"),
                },
                SpecialVar::Reward => match value {
                    Scalar::Real(r) => env.reward = r,
                    Scalar::Int(i) => env.reward = i as f64,
                    _ => unreachable!("typechecked"),
                },
                SpecialVar::ModuleResponse => match value {
                    Scalar::Enum(i) => env.module_response = Some(i),
                    _ => unreachable!("typechecked"),
                },
            }
            Ok(())
        }
        TPathKind::Input { .. } => Err(fault(program, path.span, "`__input` is read-only")),
    }
}

pub fn eval_expr(
    expr: &TExpr,
    program: &TypedProgram,
    env: &mut ExecEnv<'_>,
    src: &mut dyn RandomSource,
) -> Result<Scalar, EvalError> {
    match expr {
        TExpr::Const(s) => Ok(s.clone()),
        TExpr::EnumConst { idx, .. } => Ok(Scalar::Enum(*idx)),
        TExpr::Read(path) => read_path(path, program, env, src),
        TExpr::IntToReal(inner) => match eval_expr(inner, program, env, src)? {
            Scalar::Int(i) => Ok(Scalar::Real(i as f64)),
            other => Ok(other),
        },
        TExpr::FromAny { expect, inner, span } => {
            let v = eval_expr(inner, program, env, src)?;
            coerce_scalar(v, expect).map_err(|msg| fault(program, *span, msg))
        }
        TExpr::Not(inner) => match eval_expr(inner, program, env, src)? {
            Scalar::Bool(b) => Ok(Scalar::Bool(!b)),
            _ => unreachable!("typechecked"),
        },
        TExpr::Neg(inner, kind) => {
            let v = eval_expr(inner, program, env, src)?;
            match (kind, v) {
                (NumKind::Int, Scalar::Int(i)) => i
                    .checked_neg()
                    .map(Scalar::Int)
                    .ok_or_else(|| fault(program, Span::new(0, 0), "integer overflow in negation")),
                (NumKind::Real, Scalar::Real(r)) => Ok(Scalar::Real(-r)),
                (NumKind::Real, Scalar::Int(i)) => Ok(Scalar::Real(-(i as f64))),
                _ => unreachable!("typechecked"),
            }
        }
        TExpr::And(lhs, rhs) => {
            // short-circuit keeps stochastic calls on untaken sides unevaluated
            if expect_bool(eval_expr(lhs, program, env, src)?) {
                eval_expr(rhs, program, env, src)
            } else {
                Ok(Scalar::Bool(false))
            }
        }
        TExpr::Or(lhs, rhs) => {
            if expect_bool(eval_expr(lhs, program, env, src)?) {
                Ok(Scalar::Bool(true))
            } else {
                eval_expr(rhs, program, env, src)
            }
        }
        TExpr::Cmp {
            op,
            kind,
            lhs,
            rhs,
            span,
        } => {
            let a = eval_expr(lhs, program, env, src)?;
            let b = eval_expr(rhs, program, env, src)?;
            compare(*op, *kind, a, b).map(Scalar::Bool).map_err(|msg| fault(program, *span, msg))
        }
        TExpr::Arith {
            op,
            kind,
            lhs,
            rhs,
            span,
        } => {
            let a = eval_expr(lhs, program, env, src)?;
            let b = eval_expr(rhs, program, env, src)?;
            arith(*op, *kind, a, b).map_err(|msg| fault(program, *span, msg))
        }
        TExpr::Ternary {
            cond,
            then_val,
            else_val,
        } => {
            if expect_bool(eval_expr(cond, program, env, src)?) {
                eval_expr(then_val, program, env, src)
            } else {
                eval_expr(else_val, program, env, src)
            }
        }
        TExpr::Call {
            builtin,
            args,
            span,
            clamp_warned,
        } => eval_call(*builtin, args, *span, clamp_warned, program, env, src),
    }
}

fn coerce_scalar(v: Scalar, expect: &Ty) -> Result<Scalar, String> {
    match (expect, &v) {
        (Ty::Bool, Scalar::Bool(_))
        | (Ty::Int, Scalar::Int(_))
        | (Ty::Real, Scalar::Real(_))
        | (Ty::Str, Scalar::Str(_))
        | (Ty::Enum(_), Scalar::Enum(_))
        | (Ty::Any, _) => Ok(v),
        (Ty::Real, Scalar::Int(i)) => Ok(Scalar::Real(*i as f64)),
        (want, got) => Err(format!(
            "expected {}, got {} value",
            match want {
                Ty::Bool => "bool",
                Ty::Int => "int",
                Ty::Real => "real",
                Ty::Str => "string",
                Ty::Enum(_) => "enum",
                _ => "scalar",
            },
            got.kind_name()
        )),
    }
}

fn compare(op: CmpOp, kind: CmpKind, a: Scalar, b: Scalar) -> Result<bool, String> {
    use std::cmp::Ordering::*;
    let ord = match (kind, &a, &b) {
        (CmpKind::Int, Scalar::Int(x), Scalar::Int(y)) => x.cmp(y),
        (CmpKind::Real, Scalar::Real(x), Scalar::Real(y)) => {
            return cmp_f64(op, *x, *y);
        }
        (CmpKind::Bool, Scalar::Bool(x), Scalar::Bool(y)) => {
            return match op {
                CmpOp::Eq => Ok(x == y),
                CmpOp::Ne => Ok(x != y),
                _ => Err("bool supports == and != only".into()),
            };
        }
        (CmpKind::Str, Scalar::Str(x), Scalar::Str(y)) => {
            return match op {
                CmpOp::Eq => Ok(x == y),
                CmpOp::Ne => Ok(x != y),
                _ => Err("string supports == and != only".into()),
            };
        }
        (CmpKind::Enum, Scalar::Enum(x), Scalar::Enum(y)) => {
            return match op {
                CmpOp::Eq => Ok(x == y),
                CmpOp::Ne => Ok(x != y),
                _ => Err("enum supports == and != only".into()),
            };
        }
        (CmpKind::Dyn, a, b) => return dyn_compare(op, a, b),
        (_, a, b) => {
            return Err(format!(
                "cannot compare {} with {}",
                a.kind_name(),
                b.kind_name()
            ))
        }
    };
    Ok(match op {
        CmpOp::Eq => ord == Equal,
        CmpOp::Ne => ord != Equal,
        CmpOp::Lt => ord == Less,
        CmpOp::Le => ord != Greater,
        CmpOp::Gt => ord == Greater,
        CmpOp::Ge => ord != Less,
    })
}

fn cmp_f64(op: CmpOp, x: f64, y: f64) -> Result<bool, String> {
    Ok(match op {
        CmpOp::Eq => x == y,
        CmpOp::Ne => x != y,
        CmpOp::Lt => x < y,
        CmpOp::Le => x <= y,
        CmpOp::Gt => x > y,
        CmpOp::Ge => x >= y,
    })
}

fn dyn_compare(op: CmpOp, a: &Scalar, b: &Scalar) -> Result<bool, String> {
    match (a, b) {
        (Scalar::Int(x), Scalar::Int(y)) => {
            compare(op, CmpKind::Int, Scalar::Int(*x), Scalar::Int(*y))
        }
        (Scalar::Real(_), Scalar::Real(_))
        | (Scalar::Int(_), Scalar::Real(_))
        | (Scalar::Real(_), Scalar::Int(_)) => {
            let x = scalar_f64(a);
            let y = scalar_f64(b);
            cmp_f64(op, x, y)
        }
        (Scalar::Bool(x), Scalar::Bool(y)) => {
            compare(op, CmpKind::Bool, Scalar::Bool(*x), Scalar::Bool(*y))
        }
        (Scalar::Str(x), Scalar::Str(y)) => {
            compare(op, CmpKind::Str, Scalar::Str(x.clone()), Scalar::Str(y.clone()))
        }
        (Scalar::Enum(x), Scalar::Enum(y)) => {
            compare(op, CmpKind::Enum, Scalar::Enum(*x), Scalar::Enum(*y))
        }
        (a, b) => Err(format!(
            "cannot compare {} with {}",
            a.kind_name(),
            b.kind_name()
        )),
    }
}

fn scalar_f64(s: &Scalar) -> f64 {
    match s {
        Scalar::Int(i) => *i as f64,
        Scalar::Real(r) => *r,
        _ => f64::NAN,
    }
}

fn arith(op: ArithOp, kind: NumKind, a: Scalar, b: Scalar) -> Result<Scalar, String> {
    match kind {
        NumKind::Int => {
            let (x, y) = match (&a, &b) {
                (Scalar::Int(x), Scalar::Int(y)) => (*x, *y),
                _ => return Err("integer operation on non-integers".into()),
            };
            let r = match op {
                ArithOp::Add => x.checked_add(y),
                ArithOp::Sub => x.checked_sub(y),
                ArithOp::Mul => x.checked_mul(y),
                ArithOp::Div => {
                    if y == 0 {
                        return Err("division by zero".into());
                    }
                    x.checked_div(y)
                }
                ArithOp::Rem => {
                    if y == 0 {
                        return Err("modulo by zero".into());
                    }
                    x.checked_rem(y)
                }
            };
            r.map(Scalar::Int).ok_or_else(|| "integer overflow".into())
        }
        NumKind::Real => {
            let x = scalar_f64(&a);
            let y = scalar_f64(&b);
            let r = match op {
                ArithOp::Add => x + y,
                ArithOp::Sub => x - y,
                ArithOp::Mul => x * y,
                ArithOp::Div => {
                    if y == 0.0 {
                        return Err("division by zero".into());
                    }
                    x / y
                }
                ArithOp::Rem => return Err("`%` needs int operands".into()),
            };
            if r.is_nan() {
                return Err("arithmetic produced NaN".into());
            }
            Ok(Scalar::Real(r))
        }
    }
}

fn eval_call(
    builtin: Builtin,
    args: &[TExpr],
    span: Span,
    clamp_warned: &std::sync::atomic::AtomicBool,
    program: &TypedProgram,
    env: &mut ExecEnv<'_>,
    src: &mut dyn RandomSource,
) -> Result<Scalar, EvalError> {
    let src_err = |e: SourceError, name: &str| match e {
        SourceError::Unsupported => EvalError::UnsupportedBuiltin {
            label: program.label.clone(),
            span,
            name: name.to_string(),
        },
        SourceError::Pruned => EvalError::Pruned,
    };

    macro_rules! arg {
        ($i:expr) => {
            eval_expr(&args[$i], program, env, src)?
        };
    }

    match builtin {
        Builtin::Bernoulli => {
            let p = match arg!(0) {
                Scalar::Real(p) => p,
                _ => unreachable!("typechecked"),
            };
            let clamped = p.clamp(0.0, 1.0);
            if clamped != p && !clamp_warned.swap(true, Ordering::Relaxed) {
                eprintln!(
                    "warning: AOS.Bernoulli({p}) out of [0,1], clamped to {clamped} ({} at {span})",
                    program.label
                );
            }
            src.bernoulli(clamped)
                .map(Scalar::Bool)
                .map_err(|e| src_err(e, "AOS.Bernoulli"))
        }
        Builtin::UniformInt => {
            let lo = match arg!(0) {
                Scalar::Int(v) => v,
                _ => unreachable!("typechecked"),
            };
            let hi = match arg!(1) {
                Scalar::Int(v) => v,
                _ => unreachable!("typechecked"),
            };
            if lo > hi {
                return Err(fault(
                    program,
                    span,
                    format!("AOS.UniformInt bounds reversed: {lo} > {hi}"),
                ));
            }
            src.uniform_int(lo, hi)
                .map(Scalar::Int)
                .map_err(|e| src_err(e, "AOS.UniformInt"))
        }
        Builtin::UniformReal => {
            let lo = match arg!(0) {
                Scalar::Real(v) => v,
                _ => unreachable!("typechecked"),
            };
            let hi = match arg!(1) {
                Scalar::Real(v) => v,
                _ => unreachable!("typechecked"),
            };
            if lo > hi {
                return Err(fault(
                    program,
                    span,
                    format!("AOS.UniformReal bounds reversed: {lo} > {hi}"),
                ));
            }
            src.uniform_real(lo, hi)
                .map(Scalar::Real)
                .map_err(|e| src_err(e, "AOS.UniformReal"))
        }
        Builtin::Sqrt => {
            let x = real_arg(arg!(0));
            if x < 0.0 {
                return Err(fault(program, span, format!("sqrt of negative value {x}")));
            }
            Ok(Scalar::Real(x.sqrt()))
        }
        Builtin::Pow => {
            let x = real_arg(arg!(0));
            let y = real_arg(arg!(1));
            let r = x.powf(y);
            if r.is_nan() {
                return Err(fault(program, span, format!("pow({x}, {y}) is undefined")));
            }
            Ok(Scalar::Real(r))
        }
        Builtin::AbsInt => match arg!(0) {
            Scalar::Int(i) => i
                .checked_abs()
                .map(Scalar::Int)
                .ok_or_else(|| fault(program, span, "integer overflow in abs")),
            _ => unreachable!("typechecked"),
        },
        Builtin::AbsReal => Ok(Scalar::Real(real_arg(arg!(0)).abs())),
        Builtin::MinInt => match (arg!(0), arg!(1)) {
            (Scalar::Int(a), Scalar::Int(b)) => Ok(Scalar::Int(a.min(b))),
            _ => unreachable!("typechecked"),
        },
        Builtin::MinReal => {
            let a = real_arg(arg!(0));
            let b = real_arg(arg!(1));
            Ok(Scalar::Real(a.min(b)))
        }
        Builtin::MaxInt => match (arg!(0), arg!(1)) {
            (Scalar::Int(a), Scalar::Int(b)) => Ok(Scalar::Int(a.max(b))),
            _ => unreachable!("typechecked"),
        },
        Builtin::MaxReal => {
            let a = real_arg(arg!(0));
            let b = real_arg(arg!(1));
            Ok(Scalar::Real(a.max(b)))
        }
        Builtin::Floor => Ok(Scalar::Real(real_arg(arg!(0)).floor())),
        Builtin::Contains => match (arg!(0), arg!(1)) {
            (Scalar::Str(h), Scalar::Str(n)) => Ok(Scalar::Bool(h.contains(n.as_ref()))),
            _ => unreachable!("typechecked"),
        },
    }
}

#[inline]
fn real_arg(s: Scalar) -> f64 {
    match s {
        Scalar::Real(r) => r,
        Scalar::Int(i) => i as f64,
        _ => f64::NAN,
    }
}
