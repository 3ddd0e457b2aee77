//! Recursive-descent parser assigning operator numbers as it goes.

use super::ast::*;
use super::lexer::{Token, TokenKind};
use super::SourceError;

const MODIFIERS: [&str; 5] = ["public", "private", "protected", "static", "final"];
const FOREIGN_STATEMENTS: [&str; 9] = [
    "for", "return", "do", "switch", "try", "throw", "break", "continue", "assert",
];

/// Parses a token stream into an [`ApiUnitModel`].
///
/// Operators are numbered sequentially per body in the order they complete:
/// plain operators where they appear, `if`/`while` at their closing brace.
pub fn parse_unit(tokens: &[Token]) -> Result<ApiUnitModel, SourceError> {
    let mut p = Parser { tokens, pos: 0, counter: 0 };
    let unit = p.unit()?;
    debug_assert!(unit.constructor.numbering_is_valid());
    debug_assert!(unit.methods.iter().all(|m| m.body.numbering_is_valid()));
    Ok(unit)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    counter: usize,
}

impl<'a> Parser<'a> {
    fn unit(&mut self) -> Result<ApiUnitModel, SourceError> {
        self.expect(&TokenKind::KwClass, "expected `class`")?;
        let name = self.ident("class name")?;
        if self.accept(&TokenKind::KwImplements) {
            self.ident("interface name")?;
            while self.accept(&TokenKind::Comma) {
                self.ident("interface name")?;
            }
        }
        self.expect(&TokenKind::LBrace, "expected `{` after class header")?;

        let mut fields: Vec<FieldDecl> = Vec::new();
        let mut declared_types: Vec<(String, String)> = Vec::new();
        let mut constructor: Option<StatementTree> = None;
        let mut methods: Vec<MethodModel> = Vec::new();

        while !self.accept(&TokenKind::RBrace) {
            self.skip_modifiers();
            let first = self.ident("member declaration")?;
            if first == name && self.peek_is(&TokenKind::LParen) {
                // constructor
                self.expect(&TokenKind::LParen, "expected `(`")?;
                self.expect(&TokenKind::RParen, "constructor takes no parameters")?;
                self.expect(&TokenKind::LBrace, "expected `{`")?;
                self.counter = 0;
                let body = self.block()?;
                if constructor.is_some() {
                    return Err(self.err_here("duplicate constructor"));
                }
                constructor = Some(body);
                continue;
            }
            // `first` is a type name; generics are allowed but not nested.
            self.skip_generics()?;
            let member = self.ident("member name")?;
            if self.accept(&TokenKind::Semi) {
                declared_types.push((member, first));
                continue;
            }
            self.expect(&TokenKind::LParen, "expected `(` or `;` after member name")?;
            let mut params = Vec::new();
            if !self.peek_is(&TokenKind::RParen) {
                loop {
                    let _ty = self.ident("parameter type")?;
                    self.skip_generics()?;
                    params.push(self.ident("parameter name")?);
                    if !self.accept(&TokenKind::Comma) {
                        break;
                    }
                }
            }
            self.expect(&TokenKind::RParen, "expected `)`")?;
            self.expect(&TokenKind::LBrace, "expected `{`")?;
            self.counter = 0;
            let body = self.block()?;
            methods.push(MethodModel { name: member, params, body });
        }

        if self.pos < self.tokens.len() {
            return Err(self.err_here("trailing tokens after class body"));
        }
        let constructor = constructor
            .ok_or_else(|| self.err_at(1, "unit needs a constructor initializing its fields"))?;

        // Resolve collection kinds: a concrete declared type is a hint, the
        // constructor's `new` expression wins.
        let mut ctor_kinds: Vec<(String, String)> = Vec::new();
        constructor.for_each_op(&mut |op| {
            if op.op == "construct" {
                if let Some(Arg::Ident(kind)) = op.args.first() {
                    ctor_kinds.push((op.receiver.clone(), kind.clone()));
                }
            }
        });
        for (fname, declared) in declared_types {
            let kind = ctor_kinds
                .iter()
                .find(|(f, _)| *f == fname)
                .map(|(_, k)| k.clone())
                .unwrap_or(declared);
            fields.push(FieldDecl { name: fname, kind });
        }

        // The `new` expression's kind was only a resolution hint; strip it.
        let mut constructor = constructor;
        strip_construct_args(&mut constructor);
        for m in &mut methods {
            strip_construct_args(&mut m.body);
        }

        let unit = ApiUnitModel { name, fields, constructor, methods };
        self.check_symbols(&unit)?;
        Ok(unit)
    }

    fn block(&mut self) -> Result<StatementTree, SourceError> {
        let mut stmts = Vec::new();
        while !self.accept(&TokenKind::RBrace) {
            stmts.push(self.statement()?);
        }
        Ok(StatementTree::Seq(stmts))
    }

    fn statement(&mut self) -> Result<StatementTree, SourceError> {
        let line = self.here_line();
        match self.peek_kind() {
            Some(TokenKind::KwIf) => {
                self.pos += 1;
                self.expect(&TokenKind::LParen, "expected `(` after `if`")?;
                let cond = self.condition()?;
                self.expect(&TokenKind::RParen, "expected `)`")?;
                self.expect(&TokenKind::LBrace, "if branch needs braces")?;
                let then_branch = self.block()?;
                let else_branch = if self.accept(&TokenKind::KwElse) {
                    if self.peek_is(&TokenKind::KwIf) {
                        return Err(SourceError::Unsupported {
                            line: self.here_line(),
                            construct: "`else if` chain (use a nested block)".to_string(),
                        });
                    }
                    self.expect(&TokenKind::LBrace, "else branch needs braces")?;
                    self.block()?
                } else {
                    StatementTree::empty()
                };
                self.counter += 1;
                Ok(StatementTree::If {
                    cond,
                    then_branch: Box::new(then_branch),
                    else_branch: Box::new(else_branch),
                    index: self.counter,
                    line,
                })
            }
            Some(TokenKind::KwWhile) => {
                self.pos += 1;
                self.expect(&TokenKind::LParen, "expected `(` after `while`")?;
                let cond = self.condition()?;
                self.expect(&TokenKind::RParen, "expected `)`")?;
                self.expect(&TokenKind::LBrace, "while body needs braces")?;
                let body = self.block()?;
                self.counter += 1;
                Ok(StatementTree::While {
                    cond,
                    body: Box::new(body),
                    index: self.counter,
                    line,
                })
            }
            Some(TokenKind::Ident(word)) => {
                if FOREIGN_STATEMENTS.contains(&word.as_str()) {
                    return Err(SourceError::Unsupported {
                        line,
                        construct: format!("`{word}` statement"),
                    });
                }
                let receiver = self.ident("statement")?;
                if self.accept(&TokenKind::Assign) {
                    self.expect(&TokenKind::KwNew, "only `field = new Kind<>();` assignments")?;
                    let kind = self.ident("collection kind")?;
                    self.skip_generics()?;
                    self.expect(&TokenKind::LParen, "expected `()`")?;
                    self.expect(&TokenKind::RParen, "constructor call takes no arguments")?;
                    self.expect(&TokenKind::Semi, "expected `;`")?;
                    self.counter += 1;
                    return Ok(StatementTree::Op(PlainOp {
                        receiver,
                        op: "construct".to_string(),
                        // the kind rides along until field kinds are resolved
                        args: vec![Arg::Ident(kind)],
                        index: self.counter,
                        line,
                    }));
                }
                self.expect(&TokenKind::Dot, "expected `.` or `=` after identifier")?;
                let op = self.ident("operation name")?;
                self.expect(&TokenKind::LParen, "expected `(`")?;
                let mut args = Vec::new();
                if !self.peek_is(&TokenKind::RParen) {
                    loop {
                        args.push(self.operand()?);
                        if !self.accept(&TokenKind::Comma) {
                            break;
                        }
                    }
                }
                self.expect(&TokenKind::RParen, "expected `)`")?;
                self.expect(&TokenKind::Semi, "expected `;`")?;
                self.counter += 1;
                Ok(StatementTree::Op(PlainOp { receiver, op, args, index: self.counter, line }))
            }
            Some(other) => Err(SourceError::Unsupported {
                line,
                construct: format!("statement starting with {other:?}"),
            }),
            None => Err(self.err_here("unexpected end of input inside a body")),
        }
    }

    fn condition(&mut self) -> Result<ConditionExpr, SourceError> {
        let mut lhs = self.condition_and()?;
        while self.accept(&TokenKind::OrOr) {
            let rhs = self.condition_and()?;
            lhs = ConditionExpr::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn condition_and(&mut self) -> Result<ConditionExpr, SourceError> {
        let mut lhs = self.condition_unary()?;
        while self.accept(&TokenKind::AndAnd) {
            let rhs = self.condition_unary()?;
            lhs = ConditionExpr::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn condition_unary(&mut self) -> Result<ConditionExpr, SourceError> {
        if self.accept(&TokenKind::Bang) {
            let inner = self.condition_unary()?;
            return Ok(ConditionExpr::Not(Box::new(inner)));
        }
        if self.accept(&TokenKind::LParen) {
            let inner = self.condition()?;
            self.expect(&TokenKind::RParen, "expected `)`")?;
            return Ok(inner);
        }
        self.condition_atom()
    }

    fn condition_atom(&mut self) -> Result<ConditionExpr, SourceError> {
        let line = self.here_line();
        // `recv.contains(x)` / `recv.isEmpty()` need a two-token lookahead.
        if matches!(self.peek_kind(), Some(TokenKind::Ident(_)))
            && self.tokens.get(self.pos + 1).map(|t| &t.kind) == Some(&TokenKind::Dot)
        {
            let recv = self.ident("collection")?;
            self.pos += 1; // the dot
            let call = self.ident("predicate call")?;
            self.expect(&TokenKind::LParen, "expected `(`")?;
            return match call.as_str() {
                "contains" => {
                    let v = self.operand()?;
                    self.expect(&TokenKind::RParen, "expected `)`")?;
                    Ok(ConditionExpr::Contains(recv, v))
                }
                "isEmpty" => {
                    self.expect(&TokenKind::RParen, "isEmpty takes no arguments")?;
                    Ok(ConditionExpr::IsEmpty(recv))
                }
                other => Err(SourceError::Unsupported {
                    line,
                    construct: format!("method call `{other}` in a condition"),
                }),
            };
        }
        let lhs = self.operand()?;
        let negated = match self.peek_kind() {
            Some(TokenKind::EqEq) => false,
            Some(TokenKind::Neq) => true,
            _ => return Err(self.err_here("expected `==` or `!=` in condition")),
        };
        self.pos += 1;
        let rhs = self.operand()?;
        Ok(if negated {
            ConditionExpr::ValueNeq(lhs, rhs)
        } else {
            ConditionExpr::ValueEq(lhs, rhs)
        })
    }

    fn operand(&mut self) -> Result<Arg, SourceError> {
        match self.peek_kind().cloned() {
            Some(TokenKind::Ident(s)) => {
                if self.tokens.get(self.pos + 1).map(|t| &t.kind) == Some(&TokenKind::Dot) {
                    return Err(SourceError::Unsupported {
                        line: self.here_line(),
                        construct: "nested call as an operand".to_string(),
                    });
                }
                self.pos += 1;
                Ok(Arg::Ident(s))
            }
            Some(TokenKind::KwNull) => {
                self.pos += 1;
                Ok(Arg::Null)
            }
            Some(TokenKind::StrLit(s)) => {
                self.pos += 1;
                Ok(Arg::Str(s))
            }
            _ => Err(self.err_here("expected an identifier, `null`, or a string literal")),
        }
    }

    /// Post-parse symbol discipline: parameters must not shadow fields,
    /// receivers must be declared fields, and every identifier operand must
    /// name a field or a parameter of the enclosing method.
    fn check_symbols(&self, unit: &ApiUnitModel) -> Result<(), SourceError> {
        let field_names: Vec<&str> = unit.fields.iter().map(|f| f.name.as_str()).collect();
        let check_body = |body: &StatementTree, params: &[String]| {
            let mut err = None;
            let known = |name: &str| {
                field_names.contains(&name) || params.iter().any(|p| p == name)
            };
            body.for_each_op(&mut |op| {
                if err.is_some() {
                    return;
                }
                if !field_names.contains(&op.receiver.as_str()) {
                    err = Some(SourceError::Parse {
                        line: op.line,
                        msg: format!("receiver `{}` is not a declared field", op.receiver),
                    });
                    return;
                }
                for a in &op.args {
                    if let Arg::Ident(name) = a {
                        if !known(name) {
                            err = Some(SourceError::Parse {
                                line: op.line,
                                msg: format!("unknown identifier `{name}`"),
                            });
                        }
                    }
                }
            });
            if let Some(e) = err {
                return Err(e);
            }
            check_conditions(body, &known)
        };
        check_body(&unit.constructor, &[])?;
        for m in &unit.methods {
            for p in &m.params {
                if field_names.contains(&p.as_str()) {
                    return Err(SourceError::Parse {
                        line: 1,
                        msg: format!("parameter `{p}` of `{}` shadows a field", m.name),
                    });
                }
            }
            check_body(&m.body, &m.params)?;
        }
        Ok(())
    }

    fn skip_modifiers(&mut self) {
        while let Some(TokenKind::Ident(w)) = self.peek_kind() {
            if MODIFIERS.contains(&w.as_str()) {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn skip_generics(&mut self) -> Result<(), SourceError> {
        if !self.accept(&TokenKind::Lt) {
            return Ok(());
        }
        if self.accept(&TokenKind::Gt) {
            return Ok(());
        }
        loop {
            self.ident("type argument")?;
            if self.accept(&TokenKind::Gt) {
                return Ok(());
            }
            self.expect(&TokenKind::Comma, "expected `,` or `>` in type arguments")?;
        }
    }

    fn peek_kind(&self) -> Option<&TokenKind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn peek_is(&self, kind: &TokenKind) -> bool {
        self.peek_kind() == Some(kind)
    }

    fn accept(&mut self, kind: &TokenKind) -> bool {
        if self.peek_is(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: &TokenKind, msg: &str) -> Result<(), SourceError> {
        if self.accept(kind) {
            Ok(())
        } else {
            Err(self.err_here(msg))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, SourceError> {
        match self.peek_kind().cloned() {
            Some(TokenKind::Ident(s)) => {
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.err_here(&format!("expected {what}"))),
        }
    }

    fn here_line(&self) -> u32 {
        self.tokens
            .get(self.pos)
            .or_else(|| self.tokens.last())
            .map(|t| t.line)
            .unwrap_or(1)
    }

    fn err_here(&self, msg: &str) -> SourceError {
        self.err_at(self.here_line(), msg)
    }

    fn err_at(&self, line: u32, msg: &str) -> SourceError {
        SourceError::Parse { line, msg: msg.to_string() }
    }
}

fn check_conditions(
    stmt: &StatementTree,
    known: &impl Fn(&str) -> bool,
) -> Result<(), SourceError> {
    match stmt {
        StatementTree::Seq(children) => {
            for c in children {
                check_conditions(c, known)?;
            }
            Ok(())
        }
        StatementTree::Op(_) => Ok(()),
        StatementTree::If { cond, then_branch, else_branch, line, .. } => {
            check_condition_symbols(cond, known, *line)?;
            check_conditions(then_branch, known)?;
            check_conditions(else_branch, known)
        }
        StatementTree::While { cond, body, line, .. } => {
            check_condition_symbols(cond, known, *line)?;
            check_conditions(body, known)
        }
    }
}

fn check_condition_symbols(
    cond: &ConditionExpr,
    known: &impl Fn(&str) -> bool,
    line: u32,
) -> Result<(), SourceError> {
    let check_arg = |a: &Arg| -> Result<(), SourceError> {
        if let Arg::Ident(name) = a {
            if !known(name) {
                return Err(SourceError::Parse {
                    line,
                    msg: format!("unknown identifier `{name}`"),
                });
            }
        }
        Ok(())
    };
    match cond {
        ConditionExpr::ValueEq(a, b) | ConditionExpr::ValueNeq(a, b) => {
            check_arg(a)?;
            check_arg(b)
        }
        ConditionExpr::Contains(c, v) => {
            if !known(c) {
                return Err(SourceError::Parse {
                    line,
                    msg: format!("unknown identifier `{c}`"),
                });
            }
            check_arg(v)
        }
        ConditionExpr::IsEmpty(c) => {
            if known(c) {
                Ok(())
            } else {
                Err(SourceError::Parse {
                    line,
                    msg: format!("unknown identifier `{c}`"),
                })
            }
        }
        ConditionExpr::Not(x) => check_condition_symbols(x, known, line),
        ConditionExpr::And(a, b) | ConditionExpr::Or(a, b) => {
            check_condition_symbols(a, known, line)?;
            check_condition_symbols(b, known, line)
        }
    }
}

/// Removes the kind hint stored on `construct` operators during parsing.
fn strip_construct_args(stmt: &mut StatementTree) {
    match stmt {
        StatementTree::Seq(children) => children.iter_mut().for_each(strip_construct_args),
        StatementTree::Op(op) => {
            if op.op == "construct" {
                op.args.clear();
            }
        }
        StatementTree::If { then_branch, else_branch, .. } => {
            strip_construct_args(then_branch);
            strip_construct_args(else_branch);
        }
        StatementTree::While { body, .. } => strip_construct_args(body),
    }
}
