//! Front-end for the embedded generative-model language.
//!
//! One small imperative language serves every program section: initial
//! belief, extrinsic changes, preconditions, dynamics, special-state
//! conditions, and abstraction-map expressions. Statement sections hold
//! assignments, `if`/`else`, blocks, and `while`; condition sections hold a
//! single expression. The grammar is documented in `docs/dsl.md`.

pub mod ast;
mod lexer;
mod parser;
pub mod typecheck;

pub use ast::{Program, ProgramBody, SectionKind, Span};
pub use parser::parse_program;
pub use typecheck::{
    typecheck, Builtin, LocalDecl, ParamDecl, Root, Scope, SpecialVar, TBody, TExpr, TPath,
    TPathKind, TPathStep, TInputSeg, TStmt, TypedProgram,
};

use thiserror::Error;

/// Parse failure with position and the token classes that were acceptable.
#[derive(Debug, Clone, Error)]
#[error("syntax error at {span}: {message}{}", expected_list(.expected))]
pub struct SyntaxError {
    pub span: Span,
    pub message: String,
    pub expected: Vec<String>,
}

impl SyntaxError {
    pub fn new(span: Span, message: impl Into<String>, expected: &[&str]) -> Self {
        SyntaxError {
            span,
            message: message.into(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }
}

fn expected_list(expected: &[String]) -> String {
    if expected.is_empty() {
        String::new()
    } else {
        format!(" (expected {})", expected.join(" or "))
    }
}

/// Typecheck failure classes: type mismatch, unknown binding, or a write
/// the section does not permit.
#[derive(Debug, Clone, Error)]
pub enum CheckError {
    #[error("type error at {span}: {msg}")]
    Type { span: Span, msg: String },
    #[error("unknown binding at {span}: {msg}")]
    Bind { span: Span, msg: String },
    #[error("write error at {span}: {msg}")]
    Write { span: Span, msg: String },
}

impl CheckError {
    pub fn span(&self) -> Span {
        match self {
            CheckError::Type { span, .. }
            | CheckError::Bind { span, .. }
            | CheckError::Write { span, .. } => *span,
        }
    }
}

/// Structural copy of a program with all spans zeroed, for tree-equality
/// checks that should ignore source positions.
pub fn strip_spans(p: &Program) -> Program {
    use ast::*;
    fn zero() -> Span {
        Span::new(0, 0)
    }
    fn expr(e: &Expr) -> Expr {
        match e {
            Expr::Lit(l, _) => Expr::Lit(l.clone(), zero()),
            Expr::Path(p) => Expr::Path(path(p)),
            Expr::Unary { op, operand, .. } => Expr::Unary {
                op: *op,
                operand: Box::new(expr(operand)),
                span: zero(),
            },
            Expr::Binary { op, lhs, rhs, .. } => Expr::Binary {
                op: *op,
                lhs: Box::new(expr(lhs)),
                rhs: Box::new(expr(rhs)),
                span: zero(),
            },
            Expr::Ternary {
                cond,
                then_val,
                else_val,
                ..
            } => Expr::Ternary {
                cond: Box::new(expr(cond)),
                then_val: Box::new(expr(then_val)),
                else_val: Box::new(expr(else_val)),
                span: zero(),
            },
            Expr::Call { name, args, .. } => Expr::Call {
                name: name.clone(),
                args: args.iter().map(expr).collect(),
                span: zero(),
            },
        }
    }
    fn path(p: &PathExpr) -> PathExpr {
        PathExpr {
            root: p.root.clone(),
            segments: p
                .segments
                .iter()
                .map(|s| match s {
                    PathSeg::Field(f) => PathSeg::Field(f.clone()),
                    PathSeg::Index(e) => PathSeg::Index(expr(e)),
                })
                .collect(),
            span: zero(),
        }
    }
    fn stmt(s: &Stmt) -> Stmt {
        match s {
            Stmt::Assign { target, value, .. } => Stmt::Assign {
                target: path(target),
                value: expr(value),
                span: zero(),
            },
            Stmt::If {
                cond,
                then_branch,
                else_branch,
                ..
            } => Stmt::If {
                cond: expr(cond),
                then_branch: Box::new(stmt(then_branch)),
                else_branch: else_branch.as_ref().map(|e| Box::new(stmt(e))),
                span: zero(),
            },
            Stmt::While { cond, body, .. } => Stmt::While {
                cond: expr(cond),
                body: Box::new(stmt(body)),
                span: zero(),
            },
            Stmt::Block { stmts, .. } => Stmt::Block {
                stmts: stmts.iter().map(stmt).collect(),
                span: zero(),
            },
        }
    }
    Program {
        section: p.section,
        body: match &p.body {
            ProgramBody::Statements(s) => ProgramBody::Statements(s.iter().map(stmt).collect()),
            ProgramBody::Expression(e) => ProgramBody::Expression(expr(e)),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::typecheck::*;
    use super::*;
    use crate::types::{EnumDecl, RecordDecl, StateLayout, Ty, TypeTable};

    fn test_scope() -> (TypeTable, StateLayout, Vec<ParamDecl>, Vec<LocalDecl>) {
        let mut types = TypeTable::new();
        let cell = types
            .add_enum(EnumDecl {
                name: "tCell".into(),
                symbols: vec!["eEmpty".into(), "eX".into(), "eO".into()],
            })
            .unwrap();
        let loc = types
            .add_record(RecordDecl {
                name: "tLocation".into(),
                fields: vec![
                    ("discrete".into(), Ty::Int),
                    ("x".into(), Ty::Real),
                    ("y".into(), Ty::Real),
                ],
            })
            .unwrap();
        let layout = StateLayout::build(
            &types,
            &[
                ("robotLocation".into(), Ty::Record(loc)),
                ("board".into(), Ty::Array(Box::new(Ty::Enum(cell)), 9)),
                ("flag".into(), Ty::Bool),
                ("count".into(), Ty::Int),
                ("name".into(), Ty::Str),
            ],
        )
        .unwrap();
        let params = vec![ParamDecl {
            name: "oDesiredLocation".into(),
            ty: Ty::Record(loc),
        }];
        let locals = vec![
            LocalDecl {
                name: "skillSuccess".into(),
                ty: Ty::Bool,
            },
            LocalDecl {
                name: "nav_to_x".into(),
                ty: Ty::Real,
            },
        ];
        (types, layout, params, locals)
    }

    fn check_in(
        source: &str,
        section: SectionKind,
        with_responses: bool,
    ) -> Result<TypedProgram, String> {
        let (types, layout, params, locals) = test_scope();
        let mut types = types;
        let responses = if with_responses {
            Some(types.add_anonymous_enum(
                "navigate responses".into(),
                vec!["eSuccess".into(), "eFailed".into()],
            ))
        } else {
            None
        };
        let program =
            parse_program(source, section).map_err(|e| format!("syntax: {e}"))?;
        let scope = Scope {
            types: &types,
            layout: &layout,
            params: &params,
            locals: &locals,
            responses,
        };
        typecheck(&program, &scope, "test", source).map_err(|e| e.to_string())
    }

    #[test]
    fn checks_listing_snippets() {
        check_in(
            "__meetPrecondition= oDesiredLocation.discrete != state.robotLocation.discrete;",
            SectionKind::Precondition,
            true,
        )
        .unwrap();
        check_in(
            "state__.robotLocation.discrete = !__meetPrecondition || AOS.Bernoulli(0.1) ? -1 : oDesiredLocation.discrete;",
            SectionKind::Dynamics,
            true,
        )
        .unwrap();
        check_in(
            "__reward = state_.robotLocation.discrete == -1 ? -5 : -(sqrt(pow(state.robotLocation.x-oDesiredLocation.x,2.0)+pow(state.robotLocation.y-oDesiredLocation.y,2.0)))*10;",
            SectionKind::Dynamics,
            true,
        )
        .unwrap();
        check_in(
            "__moduleResponse = (state__.robotLocation.discrete == -1 && AOS.Bernoulli(0.8)) ? eFailed : eSuccess;",
            SectionKind::Dynamics,
            true,
        )
        .unwrap();
    }

    #[test]
    fn reward_expression_is_real_typed() {
        let tp = check_in(
            "__reward = -(sqrt(pow(2.0, 2.0)))*10;",
            SectionKind::Dynamics,
            true,
        )
        .unwrap();
        match &tp.body {
            TBody::Statements(stmts) => match &stmts[0] {
                TStmt::Assign { value, .. } => {
                    assert_eq!(value.ty(&tp.temps), Ty::Real);
                }
                other => panic!("unexpected {other:?}"),
            },
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dynamics_cannot_write_prev_state() {
        let err = check_in("state.count = 1;", SectionKind::Dynamics, true).unwrap_err();
        assert!(err.starts_with("write error"), "{err}");
    }

    #[test]
    fn bernoulli_rejects_string_argument() {
        let err = check_in(
            "state__.flag = AOS.Bernoulli(\"x\");",
            SectionKind::Dynamics,
            true,
        )
        .unwrap_err();
        assert!(err.starts_with("type error"), "{err}");
    }

    #[test]
    fn rejection_loop_with_temporary() {
        let tp = check_in(
            "i = AOS.UniformInt(0,8); while (state_.board[i] != eEmpty) i = AOS.UniformInt(0,8); state_.board[i] = eX;",
            SectionKind::Extrinsic,
            false,
        )
        .unwrap();
        assert_eq!(tp.temps, vec![Ty::Int]);
    }

    #[test]
    fn temp_read_before_assignment_is_unknown() {
        let err = check_in("state_.count = j;", SectionKind::Extrinsic, false).unwrap_err();
        assert!(err.starts_with("unknown binding"), "{err}");
    }

    #[test]
    fn int_widens_to_real_never_reverse() {
        check_in("state_.robotLocation.x = 3;", SectionKind::Extrinsic, false).unwrap();
        let err = check_in("state_.count = 3.5;", SectionKind::Extrinsic, false).unwrap_err();
        assert!(err.starts_with("type error"), "{err}");
    }

    #[test]
    fn enum_comparisons_are_type_strict() {
        check_in(
            "state_.flag = state.board[0] == eEmpty;",
            SectionKind::Extrinsic,
            false,
        )
        .unwrap();
        let err = check_in(
            "state_.flag = state.board[0] == eSuccess;",
            SectionKind::Extrinsic,
            true,
        )
        .unwrap_err();
        assert!(err.contains("cannot compare"), "{err}");
    }

    #[test]
    fn modulo_int_only() {
        check_in("state_.count = state.count % 3;", SectionKind::Extrinsic, false).unwrap();
        let err = check_in(
            "state_.robotLocation.x = state.robotLocation.x % 2.0;",
            SectionKind::Extrinsic,
            false,
        )
        .unwrap_err();
        assert!(err.contains("%"), "{err}");
    }

    #[test]
    fn am_expression_reads_locals_and_input_only() {
        check_in("skillSuccess && true", SectionKind::AmExpression, true).unwrap();
        check_in(
            "contains(__input.data, \"success\")",
            SectionKind::AmExpression,
            true,
        )
        .unwrap();
        check_in("oDesiredLocation.x > 0.0", SectionKind::AmExpression, true).unwrap();
        let err = check_in("state.count == 0", SectionKind::AmExpression, true).unwrap_err();
        assert!(err.starts_with("unknown binding"), "{err}");
    }

    #[test]
    fn special_condition_reads_resulting_state_as_state() {
        let tp = check_in(
            "!state.flag && state.count == 3",
            SectionKind::SpecialStateCondition,
            false,
        )
        .unwrap();
        match &tp.body {
            TBody::Expression(e) => {
                fn has_next_root(e: &TExpr) -> bool {
                    match e {
                        TExpr::Read(TPath {
                            kind: TPathKind::Slots { root, .. },
                            ..
                        }) => *root == Root::Next,
                        TExpr::Not(i) => has_next_root(i),
                        TExpr::And(a, b) => has_next_root(a) || has_next_root(b),
                        TExpr::Cmp { lhs, rhs, .. } => has_next_root(lhs) || has_next_root(rhs),
                        _ => false,
                    }
                }
                assert!(has_next_root(e));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    // Exhaustive accept/reject over (section, surface root, read|write).
    #[test]
    fn permission_table_is_enforced() {
        use SectionKind::*;
        // Read probes park the value in a bool sink that is always writable
        // in its section; the sink choice itself is covered by write probes.
        let statement_sections = [InitialBelief, Extrinsic, Precondition, Dynamics];

        // (root, readable sections, writable sections, read expr, write stmt value)
        let read_ok = |section: SectionKind, root: &str| -> bool {
            match root {
                "state" => true,
                "state_" => matches!(section, Extrinsic | Precondition | Dynamics),
                "state__" => matches!(section, Dynamics),
                "__meetPrecondition" => matches!(section, Precondition | Dynamics),
                "__reward" => matches!(section, Dynamics),
                "__moduleResponse" => false,
                "oDesiredLocation" => matches!(section, Precondition | Dynamics),
                _ => unreachable!(),
            }
        };
        let write_ok = |section: SectionKind, root: &str| -> bool {
            match root {
                "state" => matches!(section, InitialBelief),
                "state_" => matches!(section, Extrinsic),
                "state__" => matches!(section, Dynamics),
                "__meetPrecondition" => matches!(section, Precondition),
                "__reward" => matches!(section, Dynamics),
                "__moduleResponse" => matches!(section, Dynamics),
                "oDesiredLocation" => false,
                _ => unreachable!(),
            }
        };

        for section in statement_sections {
            for root in [
                "state",
                "state_",
                "state__",
                "__meetPrecondition",
                "__reward",
                "__moduleResponse",
                "oDesiredLocation",
            ] {
                let read_src = match root {
                    "state" | "state_" | "state__" => {
                        // bool-typed sinks differ; compare to keep types simple
                        format!("{} = {root}.count == 0;", bool_sink(section))
                    }
                    "__meetPrecondition" => format!("{} = __meetPrecondition;", bool_sink(section)),
                    "__reward" => format!("{} = __reward > 0.0;", bool_sink(section)),
                    "__moduleResponse" => {
                        format!("{} = __moduleResponse == eSuccess;", bool_sink(section))
                    }
                    "oDesiredLocation" => {
                        format!("{} = oDesiredLocation.discrete == 0;", bool_sink(section))
                    }
                    _ => unreachable!(),
                };
                let res = check_in(&read_src, section, true);
                assert_eq!(
                    res.is_ok(),
                    read_ok(section, root),
                    "read of {root} in {section}: {res:?}"
                );
                if res.is_err() {
                    let msg = res.unwrap_err();
                    // the probe's own sink is always writable, so failures
                    // must be read-side bind errors
                    assert!(
                        msg.starts_with("unknown binding"),
                        "read of {root} in {section}: {msg}"
                    );
                }

                let write_src = match root {
                    "state" => "state.count = 0;".to_string(),
                    "state_" => "state_.count = 0;".to_string(),
                    "state__" => "state__.count = 0;".to_string(),
                    "__meetPrecondition" => "__meetPrecondition = true;".to_string(),
                    "__reward" => "__reward = 1.0;".to_string(),
                    "__moduleResponse" => "__moduleResponse = eSuccess;".to_string(),
                    "oDesiredLocation" => "oDesiredLocation.x = 1.0;".to_string(),
                };
                let res = check_in(&write_src, section, true);
                assert_eq!(
                    res.is_ok(),
                    write_ok(section, root),
                    "write of {root} in {section}: {res:?}"
                );
                if res.is_err() {
                    let msg = res.unwrap_err();
                    assert!(
                        msg.starts_with("write error"),
                        "write of {root} in {section}: {msg}"
                    );
                }
            }
        }

        fn bool_sink(section: SectionKind) -> &'static str {
            match section {
                InitialBelief => "state.flag",
                Extrinsic => "state_.flag",
                Precondition => "__meetPrecondition",
                Dynamics => "state__.flag",
                _ => unreachable!(),
            }
        }
    }
}
