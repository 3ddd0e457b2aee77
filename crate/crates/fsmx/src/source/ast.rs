//! The API unit model: fields, constructor, methods, and numbered statements.

use std::fmt::Write as _;

/// A parsed source unit. The constructor body and every method body are
/// statement trees whose operators are numbered 1..=n in source order, with
/// branching statements numbered at their closing brace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiUnitModel {
    pub name: String,
    pub fields: Vec<FieldDecl>,
    pub constructor: StatementTree,
    pub methods: Vec<MethodModel>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldDecl {
    pub name: String,
    /// Collection kind name (`HashSet`, `TreeSet`, ...). Taken from the
    /// constructor's `new` expression when the declared type is an interface;
    /// configuration may override it afterwards.
    pub kind: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodModel {
    pub name: String,
    pub params: Vec<String>,
    pub body: StatementTree,
}

/// An operand: a named symbol, the `null` literal, or a string literal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Arg {
    Ident(String),
    Null,
    Str(String),
}

impl Arg {
    /// The symbol name an operand denotes. String literals keep their quotes
    /// so they cannot collide with identifiers.
    pub fn symbol(&self) -> String {
        match self {
            Arg::Ident(s) => s.clone(),
            Arg::Null => "null".to_string(),
            Arg::Str(s) => format!("\"{s}\""),
        }
    }

    fn render(&self) -> String {
        match self {
            Arg::Ident(s) => s.clone(),
            Arg::Null => "null".to_string(),
            Arg::Str(s) => format!("\"{s}\""),
        }
    }
}

/// A single non-branching operator: a collection method invocation or a
/// field construction (`op == "construct"`, no arguments).
#[derive(Debug, Clone, Eq)]
pub struct PlainOp {
    pub receiver: String,
    pub op: String,
    pub args: Vec<Arg>,
    pub index: usize,
    pub line: u32,
}

impl PartialEq for PlainOp {
    // Source line positions are diagnostics, not structure.
    fn eq(&self, other: &Self) -> bool {
        self.receiver == other.receiver
            && self.op == other.op
            && self.args == other.args
            && self.index == other.index
    }
}

#[derive(Debug, Clone, Eq)]
pub enum StatementTree {
    Seq(Vec<StatementTree>),
    Op(PlainOp),
    If {
        cond: ConditionExpr,
        then_branch: Box<StatementTree>,
        else_branch: Box<StatementTree>,
        index: usize,
        line: u32,
    },
    While {
        cond: ConditionExpr,
        body: Box<StatementTree>,
        index: usize,
        line: u32,
    },
}

impl PartialEq for StatementTree {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (StatementTree::Seq(a), StatementTree::Seq(b)) => a == b,
            (StatementTree::Op(a), StatementTree::Op(b)) => a == b,
            (
                StatementTree::If {
                    cond: c1,
                    then_branch: t1,
                    else_branch: e1,
                    index: i1,
                    ..
                },
                StatementTree::If {
                    cond: c2,
                    then_branch: t2,
                    else_branch: e2,
                    index: i2,
                    ..
                },
            ) => c1 == c2 && t1 == t2 && e1 == e2 && i1 == i2,
            (
                StatementTree::While {
                    cond: c1,
                    body: b1,
                    index: i1,
                    ..
                },
                StatementTree::While {
                    cond: c2,
                    body: b2,
                    index: i2,
                    ..
                },
            ) => c1 == c2 && b1 == b2 && i1 == i2,
            _ => false,
        }
    }
}

/// A side-effect-free branching condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConditionExpr {
    ValueEq(Arg, Arg),
    ValueNeq(Arg, Arg),
    Contains(String, Arg),
    IsEmpty(String),
    Not(Box<ConditionExpr>),
    And(Box<ConditionExpr>, Box<ConditionExpr>),
    Or(Box<ConditionExpr>, Box<ConditionExpr>),
}

impl StatementTree {
    pub fn empty() -> Self {
        StatementTree::Seq(Vec::new())
    }

    /// Index of the operator whose completion marks the end of this subtree:
    /// the final child of a sequence, or the statement's own index. `None`
    /// for an empty sequence (the subtree spans no operators).
    pub fn last_index(&self) -> Option<usize> {
        match self {
            StatementTree::Seq(children) => children.last().and_then(|c| c.last_index()),
            StatementTree::Op(op) => Some(op.index),
            StatementTree::If { index, .. } | StatementTree::While { index, .. } => Some(*index),
        }
    }

    /// Total number of operators, branching statements included.
    pub fn op_count(&self) -> usize {
        match self {
            StatementTree::Seq(children) => children.iter().map(|c| c.op_count()).sum(),
            StatementTree::Op(_) => 1,
            StatementTree::If {
                then_branch,
                else_branch,
                ..
            } => 1 + then_branch.op_count() + else_branch.op_count(),
            StatementTree::While { body, .. } => 1 + body.op_count(),
        }
    }

    /// Visits every plain operator, including those inside loop bodies.
    pub fn for_each_op(&self, f: &mut impl FnMut(&PlainOp)) {
        match self {
            StatementTree::Seq(children) => {
                for c in children {
                    c.for_each_op(f);
                }
            }
            StatementTree::Op(op) => f(op),
            StatementTree::If {
                then_branch,
                else_branch,
                ..
            } => {
                then_branch.for_each_op(f);
                else_branch.for_each_op(f);
            }
            StatementTree::While { body, .. } => body.for_each_op(f),
        }
    }

    /// Steps that are the target of an encoded plain operator. Operators
    /// inside `while` bodies are skipped: loop bodies are not encoded.
    pub fn encoded_op_steps(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_encoded_ops(&mut out);
        out.sort_unstable();
        out
    }

    fn collect_encoded_ops(&self, out: &mut Vec<usize>) {
        match self {
            StatementTree::Seq(children) => {
                for c in children {
                    c.collect_encoded_ops(out);
                }
            }
            StatementTree::Op(op) => out.push(op.index),
            StatementTree::If {
                then_branch,
                else_branch,
                ..
            } => {
                then_branch.collect_encoded_ops(out);
                else_branch.collect_encoded_ops(out);
            }
            StatementTree::While { .. } => {}
        }
    }

    /// Checks the numbering discipline: indices form a permutation of 1..=n
    /// and every branching statement's index exceeds all indices inside it.
    pub fn numbering_is_valid(&self) -> bool {
        let mut indices = Vec::new();
        if !self.collect_indices(&mut indices) {
            return false;
        }
        let n = indices.len();
        let mut sorted = indices;
        sorted.sort_unstable();
        sorted.iter().copied().eq(1..=n)
    }

    fn collect_indices(&self, out: &mut Vec<usize>) -> bool {
        match self {
            StatementTree::Seq(children) => children.iter().all(|c| c.collect_indices(out)),
            StatementTree::Op(op) => {
                out.push(op.index);
                true
            }
            StatementTree::If {
                then_branch,
                else_branch,
                index,
                ..
            } => {
                let mut inner = Vec::new();
                if !then_branch.collect_indices(&mut inner)
                    || !else_branch.collect_indices(&mut inner)
                {
                    return false;
                }
                let ok = inner.iter().all(|i| i < index);
                out.extend(inner);
                out.push(*index);
                ok
            }
            StatementTree::While { body, index, .. } => {
                let mut inner = Vec::new();
                if !body.collect_indices(&mut inner) {
                    return false;
                }
                let ok = inner.iter().all(|i| i < index);
                out.extend(inner);
                out.push(*index);
                ok
            }
        }
    }
}

impl ConditionExpr {
    fn render(&self) -> String {
        match self {
            ConditionExpr::ValueEq(a, b) => format!("{} == {}", a.render(), b.render()),
            ConditionExpr::ValueNeq(a, b) => format!("{} != {}", a.render(), b.render()),
            ConditionExpr::Contains(c, v) => format!("{c}.contains({})", v.render()),
            ConditionExpr::IsEmpty(c) => format!("{c}.isEmpty()"),
            ConditionExpr::Not(x) => format!("!({})", x.render()),
            ConditionExpr::And(a, b) => format!("({} && {})", a.render(), b.render()),
            ConditionExpr::Or(a, b) => format!("({} || {})", a.render(), b.render()),
        }
    }
}

impl ApiUnitModel {
    pub fn field(&self, name: &str) -> Option<&FieldDecl> {
        self.fields.iter().find(|f| f.name == name)
    }

    pub fn method(&self, name: &str) -> Option<&MethodModel> {
        self.methods.iter().find(|m| m.name == name)
    }

    /// Renders the model back to canonical source text. Reparsing the output
    /// yields a structurally identical model, numbering included.
    pub fn to_source(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "class {} {{", self.name);
        for f in &self.fields {
            let _ = writeln!(s, "    private {}<String> {};", f.kind, f.name);
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "    public {}() {{", self.name);
        self.render_block(&self.constructor, 2, &mut s);
        let _ = writeln!(s, "    }}");
        for m in &self.methods {
            let params = m
                .params
                .iter()
                .map(|p| format!("String {p}"))
                .collect::<Vec<_>>()
                .join(", ");
            let _ = writeln!(s);
            let _ = writeln!(s, "    public void {}({params}) {{", m.name);
            self.render_block(&m.body, 2, &mut s);
            let _ = writeln!(s, "    }}");
        }
        let _ = writeln!(s, "}}");
        s
    }

    fn render_block(&self, stmt: &StatementTree, depth: usize, out: &mut String) {
        let pad = "    ".repeat(depth);
        match stmt {
            StatementTree::Seq(children) => {
                for c in children {
                    self.render_block(c, depth, out);
                }
            }
            StatementTree::Op(op) => {
                if op.op == "construct" {
                    let kind = self
                        .field(&op.receiver)
                        .map(|f| f.kind.as_str())
                        .unwrap_or("HashSet");
                    let _ = writeln!(out, "{pad}{} = new {kind}<>();", op.receiver);
                } else {
                    let args = op
                        .args
                        .iter()
                        .map(Arg::render)
                        .collect::<Vec<_>>()
                        .join(", ");
                    let _ = writeln!(out, "{pad}{}.{}({args});", op.receiver, op.op);
                }
            }
            StatementTree::If {
                cond,
                then_branch,
                else_branch,
                ..
            } => {
                let _ = writeln!(out, "{pad}if ({}) {{", cond.render());
                self.render_block(then_branch, depth + 1, out);
                let _ = writeln!(out, "{pad}}} else {{");
                self.render_block(else_branch, depth + 1, out);
                let _ = writeln!(out, "{pad}}}");
            }
            StatementTree::While { cond, body, .. } => {
                let _ = writeln!(out, "{pad}while ({}) {{", cond.render());
                self.render_block(body, depth + 1, out);
                let _ = writeln!(out, "{pad}}}");
            }
        }
    }
}
