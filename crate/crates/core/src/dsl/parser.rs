//! Recursive-descent parser. Statement sections parse a statement list;
//! condition/expression sections parse a single expression.

use super::ast::*;
use super::lexer::{lex, SpannedTok, Tok};
use super::SyntaxError;

pub fn parse_program(source: &str, section: SectionKind) -> Result<Program, SyntaxError> {
    let toks = lex(source)?;
    let mut p = Parser { toks, pos: 0 };
    let body = if section.is_expression() {
        let expr = p.expr()?;
        p.expect_eof()?;
        ProgramBody::Expression(expr)
    } else {
        let mut stmts = Vec::new();
        while !p.at(&Tok::Eof) {
            stmts.push(p.stmt()?);
        }
        ProgramBody::Statements(stmts)
    };
    Ok(Program { section, body })
}

struct Parser {
    toks: Vec<SpannedTok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn at(&self, t: &Tok) -> bool {
        self.peek() == t
    }

    fn bump(&mut self) -> SpannedTok {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.at(t) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> Result<SpannedTok, SyntaxError> {
        if self.at(&t) {
            Ok(self.bump())
        } else {
            Err(self.err_expected(&[t.describe()]))
        }
    }

    fn expect_eof(&mut self) -> Result<(), SyntaxError> {
        if self.at(&Tok::Eof) {
            Ok(())
        } else {
            Err(self.err_expected(&["end of input".into()]))
        }
    }

    fn err_expected(&self, expected: &[String]) -> SyntaxError {
        SyntaxError {
            span: self.span(),
            message: format!("found {}", self.peek().describe()),
            expected: expected.to_vec(),
        }
    }

    fn stmt(&mut self) -> Result<Stmt, SyntaxError> {
        let span = self.span();
        match self.peek() {
            Tok::LBrace => {
                self.bump();
                let mut stmts = Vec::new();
                while !self.at(&Tok::RBrace) {
                    if self.at(&Tok::Eof) {
                        return Err(self.err_expected(&["`}`".into()]));
                    }
                    stmts.push(self.stmt()?);
                }
                self.bump();
                Ok(Stmt::Block { stmts, span })
            }
            Tok::Semi => {
                self.bump();
                Ok(Stmt::Block {
                    stmts: Vec::new(),
                    span,
                })
            }
            Tok::KwIf => {
                self.bump();
                self.expect(Tok::LParen)?;
                let cond = self.expr()?;
                self.expect(Tok::RParen)?;
                let then_branch = Box::new(self.stmt()?);
                let else_branch = if self.eat(&Tok::KwElse) {
                    Some(Box::new(self.stmt()?))
                } else {
                    None
                };
                Ok(Stmt::If {
                    cond,
                    then_branch,
                    else_branch,
                    span,
                })
            }
            Tok::KwWhile => {
                self.bump();
                self.expect(Tok::LParen)?;
                let cond = self.expr()?;
                self.expect(Tok::RParen)?;
                let body = Box::new(self.stmt()?);
                Ok(Stmt::While { cond, body, span })
            }
            Tok::Ident(_) => {
                let target = self.path()?;
                if self.at(&Tok::Assign) {
                    self.bump();
                } else {
                    return Err(self.err_expected(&["`=`".into()]));
                }
                let value = self.expr()?;
                self.expect(Tok::Semi)?;
                Ok(Stmt::Assign {
                    target,
                    value,
                    span,
                })
            }
            _ => Err(self.err_expected(&[
                "statement (assignment, `if`, `while`, block, or `;`)".into()
            ])),
        }
    }

    fn path(&mut self) -> Result<PathExpr, SyntaxError> {
        let span = self.span();
        let root = match self.bump().tok {
            Tok::Ident(s) => s,
            _ => {
                return Err(SyntaxError {
                    span,
                    message: "expected identifier".into(),
                    expected: vec!["identifier".into()],
                })
            }
        };
        let mut segments = Vec::new();
        loop {
            if self.at(&Tok::Dot) {
                self.bump();
                let field = match self.bump() {
                    SpannedTok {
                        tok: Tok::Ident(s), ..
                    } => s,
                    other => {
                        return Err(SyntaxError {
                            span: other.span,
                            message: format!("found {}", other.tok.describe()),
                            expected: vec!["field name".into()],
                        })
                    }
                };
                segments.push(PathSeg::Field(field));
            } else if self.at(&Tok::LBracket) {
                self.bump();
                let idx = self.expr()?;
                self.expect(Tok::RBracket)?;
                segments.push(PathSeg::Index(idx));
            } else {
                break;
            }
        }
        Ok(PathExpr {
            root,
            segments,
            span,
        })
    }

    // expr := or ('?' expr ':' expr)?   (right-associative ternary)
    fn expr(&mut self) -> Result<Expr, SyntaxError> {
        let span = self.span();
        let cond = self.or_expr()?;
        if self.eat(&Tok::Question) {
            let then_val = self.expr()?;
            self.expect(Tok::Colon)?;
            let else_val = self.expr()?;
            Ok(Expr::Ternary {
                cond: Box::new(cond),
                then_val: Box::new(then_val),
                else_val: Box::new(else_val),
                span,
            })
        } else {
            Ok(cond)
        }
    }

    fn or_expr(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.and_expr()?;
        while self.at(&Tok::OrOr) {
            let span = self.span();
            self.bump();
            let rhs = self.and_expr()?;
            lhs = Expr::Binary {
                op: BinOp::Or,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                span,
            };
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.eq_expr()?;
        while self.at(&Tok::AndAnd) {
            let span = self.span();
            self.bump();
            let rhs = self.eq_expr()?;
            lhs = Expr::Binary {
                op: BinOp::And,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                span,
            };
        }
        Ok(lhs)
    }

    fn eq_expr(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.rel_expr()?;
        loop {
            let op = match self.peek() {
                Tok::EqEq => BinOp::Eq,
                Tok::NotEq => BinOp::Ne,
                _ => break,
            };
            let span = self.span();
            self.bump();
            let rhs = self.rel_expr()?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                span,
            };
        }
        Ok(lhs)
    }

    fn rel_expr(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.add_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Lt => BinOp::Lt,
                Tok::Le => BinOp::Le,
                Tok::Gt => BinOp::Gt,
                Tok::Ge => BinOp::Ge,
                _ => break,
            };
            let span = self.span();
            self.bump();
            let rhs = self.add_expr()?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                span,
            };
        }
        Ok(lhs)
    }

    fn add_expr(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.mul_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            let span = self.span();
            self.bump();
            let rhs = self.mul_expr()?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                span,
            };
        }
        Ok(lhs)
    }

    fn mul_expr(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.unary_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                Tok::Percent => BinOp::Rem,
                _ => break,
            };
            let span = self.span();
            self.bump();
            let rhs = self.unary_expr()?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                span,
            };
        }
        Ok(lhs)
    }

    fn unary_expr(&mut self) -> Result<Expr, SyntaxError> {
        let span = self.span();
        match self.peek() {
            Tok::Not => {
                self.bump();
                let operand = self.unary_expr()?;
                Ok(Expr::Unary {
                    op: UnOp::Not,
                    operand: Box::new(operand),
                    span,
                })
            }
            Tok::Minus => {
                self.bump();
                let operand = self.unary_expr()?;
                Ok(Expr::Unary {
                    op: UnOp::Neg,
                    operand: Box::new(operand),
                    span,
                })
            }
            _ => self.primary_expr(),
        }
    }

    fn primary_expr(&mut self) -> Result<Expr, SyntaxError> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(Expr::Lit(Lit::Int(v), span))
            }
            Tok::Real(v) => {
                self.bump();
                Ok(Expr::Lit(Lit::Real(v), span))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Expr::Lit(Lit::Str(s), span))
            }
            Tok::KwTrue => {
                self.bump();
                Ok(Expr::Lit(Lit::Bool(true), span))
            }
            Tok::KwFalse => {
                self.bump();
                Ok(Expr::Lit(Lit::Bool(false), span))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Ident(_) => {
                // Lookahead for call syntax: a dotted name followed by `(`.
                if self.is_call_ahead() {
                    let mut name = Vec::new();
                    loop {
                        match self.bump().tok {
                            Tok::Ident(s) => name.push(s),
                            _ => unreachable!("validated by is_call_ahead"),
                        }
                        if self.at(&Tok::Dot) && matches!(self.peek2(), Tok::Ident(_)) {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    self.expect(Tok::LParen)?;
                    let mut args = Vec::new();
                    if !self.at(&Tok::RParen) {
                        loop {
                            args.push(self.expr()?);
                            if !self.eat(&Tok::Comma) {
                                break;
                            }
                        }
                    }
                    self.expect(Tok::RParen)?;
                    Ok(Expr::Call { name, args, span })
                } else {
                    Ok(Expr::Path(self.path()?))
                }
            }
            _ => Err(self.err_expected(&["expression".into()])),
        }
    }

    /// True when the tokens ahead form `ident (.ident)* (`.
    fn is_call_ahead(&self) -> bool {
        let mut i = self.pos;
        loop {
            match &self.toks[i].tok {
                Tok::Ident(_) => i += 1,
                _ => return false,
            }
            match &self.toks[i].tok {
                Tok::LParen => return true,
                Tok::Dot => match &self.toks[i + 1].tok {
                    Tok::Ident(_) => i += 1,
                    _ => return false,
                },
                _ => return false,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stmts(src: &str) -> Vec<Stmt> {
        match parse_program(src, SectionKind::Dynamics).unwrap().body {
            ProgramBody::Statements(s) => s,
            _ => unreachable!(),
        }
    }

    #[test]
    fn parses_precondition_assignment() {
        let s = stmts(
            "__meetPrecondition= oDesiredLocation.discrete != state.robotLocation.discrete;",
        );
        assert_eq!(s.len(), 1);
        match &s[0] {
            Stmt::Assign { target, value, .. } => {
                assert_eq!(target.root, "__meetPrecondition");
                assert!(matches!(value, Expr::Binary { op: BinOp::Ne, .. }));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_source_is_empty_program() {
        assert!(stmts("").is_empty());
        assert!(stmts("   \n  ").is_empty());
    }

    #[test]
    fn parses_rejection_loop() {
        let s = stmts("while (board[i] != eEmpty) i = AOS.UniformInt(0,8);");
        match &s[0] {
            Stmt::While { cond, body, .. } => {
                assert!(matches!(cond, Expr::Binary { op: BinOp::Ne, .. }));
                match body.as_ref() {
                    Stmt::Assign { value, .. } => match value {
                        Expr::Call { name, args, .. } => {
                            assert_eq!(name, &vec!["AOS".to_string(), "UniformInt".to_string()]);
                            assert_eq!(args.len(), 2);
                        }
                        other => panic!("unexpected {other:?}"),
                    },
                    other => panic!("unexpected {other:?}"),
                }
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ternary_is_right_associative() {
        let s = stmts("x = a ? 1 : b ? 2 : 3;");
        match &s[0] {
            Stmt::Assign { value, .. } => match value {
                Expr::Ternary { else_val, .. } => {
                    assert!(matches!(else_val.as_ref(), Expr::Ternary { .. }));
                }
                other => panic!("unexpected {other:?}"),
            },
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn precedence_or_over_ternary() {
        // `!a || b ? c : d` groups as `(!a || b) ? c : d`
        let s = stmts("x = !__meetPrecondition || AOS.Bernoulli(0.1) ? -1 : o.discrete;");
        match &s[0] {
            Stmt::Assign { value, .. } => match value {
                Expr::Ternary { cond, .. } => {
                    assert!(matches!(cond.as_ref(), Expr::Binary { op: BinOp::Or, .. }))
                }
                other => panic!("unexpected {other:?}"),
            },
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn expression_sections_parse_single_expr() {
        let p = parse_program(
            "!state.v1.visited && state.v2.visited",
            SectionKind::SpecialStateCondition,
        )
        .unwrap();
        assert!(matches!(p.body, ProgramBody::Expression(_)));
        assert!(parse_program("a = 1;", SectionKind::SpecialStateCondition).is_err());
        assert!(parse_program("", SectionKind::AmExpression).is_err());
    }

    #[test]
    fn syntax_errors_carry_position_and_expectation() {
        let err = parse_program("x = 1 +;", SectionKind::Dynamics).unwrap_err();
        assert_eq!(err.span.line, 1);
        assert_eq!(err.span.col, 8);
        assert!(!err.expected.is_empty());
        let err = parse_program("if (true) x = 1; else", SectionKind::Dynamics).unwrap_err();
        assert!(err.message.contains("end of input"));
    }

    #[test]
    fn print_reparse_identity() {
        let sources = [
            "state.robotLocation.discrete = AOS.Bernoulli(0.5) ? 1 : (AOS.Bernoulli(0.2) ? 2 : 3);",
            "if (AOS.Bernoulli(0.05)) state_.robotLocation.discrete = -1;",
            "__reward = state_.robotLocation.discrete == -1 ? -5 : -(sqrt(pow(state.robotLocation.x-oDesiredLocation.x,2.0)+pow(state.robotLocation.y-oDesiredLocation.y,2.0)))*10;",
            "while (state_.board[i] != eEmpty) { i = AOS.UniformInt(0, 8); }",
            "x = a % 2 == 0 && !done || s == \"go\";",
        ];
        for src in sources {
            let t1 = parse_program(src, SectionKind::Dynamics).unwrap();
            let printed = t1.to_string();
            let t2 = parse_program(&printed, SectionKind::Dynamics).unwrap();
            assert_eq!(
                super::super::strip_spans(&t1),
                super::super::strip_spans(&t2),
                "print/reparse mismatch for `{src}` printed as `{printed}`"
            );
        }
    }
}
