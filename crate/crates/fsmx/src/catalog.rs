//! The operation catalog: per collection kind, what each operation does to
//! the predicates that mention its receiver and arguments.
//!
//! An entry is a formula over formal symbols. `c` names the receiver, `v1`,
//! `v2`, ... name the value arguments in order, and any other symbol is either
//! a required constant (substituted for itself) or a free template symbol that
//! gets instantiated over every value of the context. Primed atoms speak about
//! the step after the operation, unprimed atoms about the step before.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::formula::Formula;
use crate::predicate::{Context, Predicate, StepAtom};
use crate::source::{ApiUnitModel, PlainOp};

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("no semantics for `{kind}.{op}` taking {arity} value argument(s)")]
    UnknownOperation { kind: String, op: String, arity: usize },
    #[error("operation `{op}` needs the constant `{constant}` in its context")]
    MissingConstant { op: String, constant: String },
    #[error("receiver `{0}` is not a collection symbol in this context")]
    BadReceiver(String),
    #[error("argument `{0}` is not a value symbol in this context")]
    BadArgument(String),
    #[error("receiver `{0}` is not a declared field")]
    UnknownField(String),
    #[error("catalog entry `{kind}.{op}`: {detail}")]
    BadEntry { kind: String, op: String, detail: String },
    #[error("formula `{text}`: {msg}")]
    Parse { text: String, msg: String },
    #[error("reading catalog extension: {0}")]
    Io(#[from] std::io::Error),
    #[error("catalog extension is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// Semantics of one operation on one collection kind.
#[derive(Debug, Clone)]
pub struct OpSemantics {
    pub kind: String,
    pub op: String,
    /// Number of value arguments the operation takes.
    pub value_params: usize,
    /// Step formula over formal symbols.
    pub formula: Formula<StepAtom>,
    /// Constant symbols the formula references; each must be a value of the
    /// context the operation is expanded in.
    pub constants: Vec<String>,
    /// When set and `exc` is part of the universe, the expansion carries the
    /// exception flag through unchanged. Distinct from mentioning `exc` in the
    /// formula: a passthrough alone does not make a unit exception-aware.
    pub exc_passthrough: bool,
}

impl OpSemantics {
    /// Whether the entry's own formula talks about the exception flag.
    pub fn mentions_exc(&self) -> bool {
        self.formula
            .vars()
            .iter()
            .any(|a| matches!(a, StepAtom::Cur(Predicate::Exc) | StepAtom::Next(Predicate::Exc)))
    }
}

/// An operation expanded against a concrete context: the formula over real
/// predicates plus the set of predicates whose next-step value it constrains.
/// Predicates outside `touched` are to be framed by the encoder.
#[derive(Debug, Clone)]
pub struct ExpandedOp {
    pub formula: Formula<StepAtom>,
    pub touched: BTreeSet<Predicate>,
}

/// What the catalog knows about a whole unit: whether any used entry is
/// exception-aware and which constants the used entries require.
#[derive(Debug, Clone, Default)]
pub struct UnitCatalogInfo {
    pub include_exc: bool,
    pub constants: BTreeSet<String>,
}

#[derive(Debug, Clone)]
pub struct Catalog {
    entries: BTreeMap<(String, String), OpSemantics>,
    aliases: BTreeMap<String, String>,
}

const NULL_GUARDED_MUTATOR: &str = "(eq(v1,null) -> (exc' \
     & (contains(c,v1)' <-> contains(c,v1)) \
     & (empty(c)' <-> empty(c)))) \
     & (!eq(v1,null) -> ({BODY} & (exc' <-> exc)))";

impl Catalog {
    /// The built-in table: `HashSet` (also serving `LinkedHashSet`) and
    /// `TreeSet`, each with `construct`, `add`, `remove`, and `clear`.
    pub fn builtin() -> Catalog {
        // (kind, op, value arity, formula, constants, exception passthrough)
        type Row<'a> = (&'a str, &'a str, usize, String, Vec<&'a str>, bool);
        let treeset = |body: &str| NULL_GUARDED_MUTATOR.replace("{BODY}", body);
        let rows: Vec<Row> = vec![
            ("HashSet", "construct", 0, "empty(c)'".to_string(), vec![], true),
            ("HashSet", "add", 1, "contains(c,v1)' & !empty(c)'".to_string(), vec![], false),
            (
                "HashSet",
                "remove",
                1,
                "!contains(c,v1)' & (empty(c) -> empty(c)')".to_string(),
                vec![],
                false,
            ),
            ("HashSet", "clear", 0, "empty(c)' & !contains(c,v1)'".to_string(), vec![], false),
            ("TreeSet", "construct", 0, "empty(c)'".to_string(), vec![], true),
            (
                "TreeSet",
                "add",
                1,
                treeset("contains(c,v1)' & !empty(c)'"),
                vec!["null"],
                false,
            ),
            (
                "TreeSet",
                "remove",
                1,
                treeset("!contains(c,v1)' & (empty(c) -> empty(c)')"),
                vec!["null"],
                false,
            ),
            ("TreeSet", "clear", 0, "empty(c)' & !contains(c,v1)'".to_string(), vec![], false),
        ];
        let mut entries = BTreeMap::new();
        for (kind, op, value_params, text, constants, exc_passthrough) in rows {
            let formula = parse_step_formula(&text).expect("built-in catalog entry");
            entries.insert(
                (kind.to_string(), op.to_string()),
                OpSemantics {
                    kind: kind.to_string(),
                    op: op.to_string(),
                    value_params,
                    formula,
                    constants: constants.into_iter().map(String::from).collect(),
                    exc_passthrough,
                },
            );
        }
        let aliases =
            BTreeMap::from([("LinkedHashSet".to_string(), "HashSet".to_string())]);
        Catalog { entries, aliases }
    }

    /// Canonical name for a collection kind (resolves aliases).
    pub fn resolve_kind<'a>(&'a self, kind: &'a str) -> &'a str {
        self.aliases.get(kind).map(String::as_str).unwrap_or(kind)
    }

    pub fn lookup(&self, kind: &str, op: &str) -> Option<&OpSemantics> {
        let canonical = self.resolve_kind(kind);
        self.entries.get(&(canonical.to_string(), op.to_string()))
    }

    /// Looks an operation up and checks its arity.
    pub fn entry_for(&self, kind: &str, op: &PlainOp) -> Result<&OpSemantics, CatalogError> {
        let unknown = || CatalogError::UnknownOperation {
            kind: self.resolve_kind(kind).to_string(),
            op: op.op.clone(),
            arity: op.args.len(),
        };
        let entry = self.lookup(kind, &op.op).ok_or_else(unknown)?;
        if entry.value_params != op.args.len() {
            return Err(unknown());
        }
        Ok(entry)
    }

    /// Scans every operation of a unit, verifying the catalog covers it, and
    /// reports whether the unit is exception-aware and which constants its
    /// contexts must provide.
    pub fn unit_info(&self, unit: &ApiUnitModel) -> Result<UnitCatalogInfo, CatalogError> {
        let mut ops: Vec<(String, PlainOp)> = Vec::new();
        let mut missing_field = None;
        let mut collect = |body: &crate::source::StatementTree| {
            body.for_each_op(&mut |op| {
                match unit.field(&op.receiver) {
                    Some(f) => ops.push((f.kind.clone(), op.clone())),
                    None => missing_field = Some(op.receiver.clone()),
                }
            });
        };
        collect(&unit.constructor);
        for m in &unit.methods {
            collect(&m.body);
        }
        if let Some(name) = missing_field {
            return Err(CatalogError::UnknownField(name));
        }
        let mut info = UnitCatalogInfo::default();
        for (kind, op) in &ops {
            let entry = self.entry_for(kind, op)?;
            info.include_exc |= entry.mentions_exc();
            info.constants.extend(entry.constants.iter().cloned());
        }
        Ok(info)
    }

    /// Expands an operation against a context: substitutes receiver and
    /// arguments for the formals, instantiates free template symbols over all
    /// context values, and derives the touched-predicate set.
    pub fn expand(
        &self,
        kind: &str,
        op: &PlainOp,
        ctx: &Context,
        include_exc: bool,
    ) -> Result<ExpandedOp, CatalogError> {
        let entry = self.entry_for(kind, op)?;
        if !ctx.has_collection(&op.receiver) {
            return Err(CatalogError::BadReceiver(op.receiver.clone()));
        }
        let mut subst: BTreeMap<String, String> = BTreeMap::new();
        subst.insert("c".to_string(), op.receiver.clone());
        for (k, arg) in op.args.iter().enumerate() {
            let sym = arg.symbol();
            if !ctx.has_value(&sym) {
                return Err(CatalogError::BadArgument(sym));
            }
            subst.insert(format!("v{}", k + 1), sym);
        }
        for constant in &entry.constants {
            if !ctx.has_value(constant) {
                return Err(CatalogError::MissingConstant {
                    op: op.op.clone(),
                    constant: constant.clone(),
                });
            }
            subst.insert(constant.clone(), constant.clone());
        }

        let mut base = entry.formula.clone();
        if entry.exc_passthrough && include_exc {
            base = Formula::and(vec![
                base,
                Formula::iff(
                    Formula::var(StepAtom::Next(Predicate::Exc)),
                    Formula::var(StepAtom::Cur(Predicate::Exc)),
                ),
            ]);
        }

        let values: Vec<String> = ctx.value_names().map(String::from).collect();
        let mut parts: Vec<Formula<StepAtom>> = Vec::new();
        for conjunct in base.into_conjuncts() {
            let mut free: BTreeSet<String> = BTreeSet::new();
            conjunct.for_each_var(&mut |atom| {
                for s in atom.predicate().symbols() {
                    if !subst.contains_key(s) {
                        free.insert(s.to_string());
                    }
                }
            });
            let free: Vec<String> = free.into_iter().collect();
            for assignment in assignments(&free, &values) {
                let mut full = subst.clone();
                full.extend(
                    free.iter().cloned().zip(assignment.iter().map(|v| v.to_string())),
                );
                let instance = substitute(&conjunct, &full, ctx)
                    .map_err(|detail| CatalogError::BadEntry {
                        kind: entry.kind.clone(),
                        op: entry.op.clone(),
                        detail,
                    })?
                    .fold_constants();
                if instance != Formula::Const(true) {
                    parts.push(instance);
                }
            }
        }
        let formula = Formula::and(parts);
        let mut touched = BTreeSet::new();
        formula.for_each_var(&mut |atom| {
            if let StepAtom::Next(p) = atom {
                touched.insert(p.clone());
            }
        });
        Ok(ExpandedOp { formula, touched })
    }

    /// Merges entries from a JSON extension file, overriding built-ins with
    /// the same kind and operation name.
    pub fn load_extension(&mut self, path: &Path) -> Result<(), CatalogError> {
        let text = std::fs::read_to_string(path)?;
        let file: ExtensionFile = serde_json::from_str(&text)?;
        for e in file.entries {
            let formula = parse_step_formula(&e.formula)?;
            self.entries.insert(
                (e.kind.clone(), e.op.clone()),
                OpSemantics {
                    kind: e.kind,
                    op: e.op,
                    value_params: e.value_params,
                    formula,
                    constants: e.constants,
                    exc_passthrough: e.exc_passthrough,
                },
            );
        }
        Ok(())
    }
}

#[derive(Deserialize)]
struct ExtensionFile {
    entries: Vec<ExtensionEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExtensionEntry {
    kind: String,
    op: String,
    #[serde(default)]
    value_params: usize,
    formula: String,
    #[serde(default)]
    constants: Vec<String>,
    #[serde(default)]
    exc_passthrough: bool,
}

/// All ways of assigning the given free symbols to context values, in
/// lexicographic order. No free symbols yields the single empty assignment;
/// free symbols with no values to draw from yields none.
fn assignments<'a>(free: &[String], values: &'a [String]) -> Vec<Vec<&'a str>> {
    let mut out: Vec<Vec<&str>> = vec![Vec::new()];
    for _ in free {
        let mut next = Vec::new();
        for prefix in &out {
            for v in values {
                let mut row = prefix.clone();
                row.push(v.as_str());
                next.push(row);
            }
        }
        out = next;
    }
    out
}

/// Rewrites every atom under the substitution, deciding equality sorts from
/// the substituted symbols and validating sorts against the context.
fn substitute(
    f: &Formula<StepAtom>,
    subst: &BTreeMap<String, String>,
    ctx: &Context,
) -> Result<Formula<StepAtom>, String> {
    let mut err: Option<String> = None;
    let mapped = f.map(&mut |atom| {
        let (pred, next) = match atom {
            StepAtom::Cur(p) => (p, false),
            StepAtom::Next(p) => (p, true),
        };
        let lookup = |s: &str| subst.get(s).cloned().unwrap_or_else(|| s.to_string());
        let rebuilt: Result<Option<Predicate>, String> = match pred {
            Predicate::Exc => Ok(Some(Predicate::Exc)),
            Predicate::Empty(c) => {
                let c = lookup(c);
                if ctx.has_collection(&c) {
                    Ok(Some(Predicate::empty(&c)))
                } else {
                    Err(format!("`empty({c})`: `{c}` is not a collection"))
                }
            }
            Predicate::Contains(c, v) => {
                let c = lookup(c);
                let v = lookup(v);
                if !ctx.has_collection(&c) {
                    Err(format!("`contains({c},{v})`: `{c}` is not a collection"))
                } else if !ctx.has_value(&v) {
                    Err(format!("`contains({c},{v})`: `{v}` is not a value"))
                } else {
                    Ok(Some(Predicate::contains(&c, &v)))
                }
            }
            Predicate::EqV(a, b) | Predicate::EqC(a, b) => {
                let a = lookup(a);
                let b = lookup(b);
                if ctx.has_value(&a) && ctx.has_value(&b) {
                    Ok(Predicate::eq_values(&a, &b))
                } else if ctx.has_collection(&a) && ctx.has_collection(&b) {
                    Ok(Predicate::eq_collections(&a, &b))
                } else {
                    Err(format!("`eq({a},{b})` mixes sorts or names unknown symbols"))
                }
            }
        };
        match rebuilt {
            Ok(Some(p)) => Formula::var(if next { StepAtom::Next(p) } else { StepAtom::Cur(p) }),
            Ok(None) => Formula::Const(true),
            Err(e) => {
                err.get_or_insert(e);
                Formula::Const(true)
            }
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(mapped),
    }
}

/// Parses the textual step-formula grammar used by catalog entries: the atoms
/// `eq(a,b)`, `contains(c,v)`, `empty(c)`, and `exc`, each optionally primed;
/// the constants `true` and `false`; `!`, `&`, `|`, `->`, `<->`, parentheses.
pub fn parse_step_formula(text: &str) -> Result<Formula<StepAtom>, CatalogError> {
    let err = |msg: &str| CatalogError::Parse { text: text.to_string(), msg: msg.to_string() };
    let tokens = lex_formula(text).map_err(|m| err(&m))?;
    let mut p = FormulaParser { tokens, pos: 0 };
    let f = p.iff().map_err(|m| err(&m))?;
    if p.pos != p.tokens.len() {
        return Err(err("trailing input"));
    }
    Ok(f)
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum FTok {
    Ident(String),
    Prime,
    LPar,
    RPar,
    Comma,
    And,
    Or,
    Not,
    Arrow,
    DArrow,
}

impl fmt::Display for FTok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FTok::Ident(s) => write!(f, "`{s}`"),
            FTok::Prime => write!(f, "`'`"),
            FTok::LPar => write!(f, "`(`"),
            FTok::RPar => write!(f, "`)`"),
            FTok::Comma => write!(f, "`,`"),
            FTok::And => write!(f, "`&`"),
            FTok::Or => write!(f, "`|`"),
            FTok::Not => write!(f, "`!`"),
            FTok::Arrow => write!(f, "`->`"),
            FTok::DArrow => write!(f, "`<->`"),
        }
    }
}

fn lex_formula(text: &str) -> Result<Vec<FTok>, String> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '(' => {
                out.push(FTok::LPar);
                i += 1;
            }
            ')' => {
                out.push(FTok::RPar);
                i += 1;
            }
            ',' => {
                out.push(FTok::Comma);
                i += 1;
            }
            '\'' => {
                out.push(FTok::Prime);
                i += 1;
            }
            '&' => {
                out.push(FTok::And);
                i += 1;
            }
            '|' => {
                out.push(FTok::Or);
                i += 1;
            }
            '!' => {
                out.push(FTok::Not);
                i += 1;
            }
            '-' => {
                if chars.get(i + 1) == Some(&'>') {
                    out.push(FTok::Arrow);
                    i += 2;
                } else {
                    return Err("`-` must start `->`".to_string());
                }
            }
            '<' => {
                if chars.get(i + 1) == Some(&'-') && chars.get(i + 2) == Some(&'>') {
                    out.push(FTok::DArrow);
                    i += 3;
                } else {
                    return Err("`<` must start `<->`".to_string());
                }
            }
            c if c.is_ascii_alphanumeric() || c == '_' || c == '"' => {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '"')
                {
                    i += 1;
                }
                out.push(FTok::Ident(chars[start..i].iter().collect()));
            }
            other => return Err(format!("unexpected character `{other}`")),
        }
    }
    Ok(out)
}

struct FormulaParser {
    tokens: Vec<FTok>,
    pos: usize,
}

impl FormulaParser {
    fn iff(&mut self) -> Result<Formula<StepAtom>, String> {
        let mut lhs = self.implies()?;
        while self.accept(&FTok::DArrow) {
            let rhs = self.implies()?;
            lhs = Formula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> Result<Formula<StepAtom>, String> {
        let lhs = self.or()?;
        if self.accept(&FTok::Arrow) {
            let rhs = self.implies()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula<StepAtom>, String> {
        let mut parts = vec![self.and()?];
        while self.accept(&FTok::Or) {
            parts.push(self.and()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::Or(parts) })
    }

    fn and(&mut self) -> Result<Formula<StepAtom>, String> {
        let mut parts = vec![self.unary()?];
        while self.accept(&FTok::And) {
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::And(parts) })
    }

    fn unary(&mut self) -> Result<Formula<StepAtom>, String> {
        if self.accept(&FTok::Not) {
            return Ok(Formula::not(self.unary()?));
        }
        if self.accept(&FTok::LPar) {
            let inner = self.iff()?;
            self.expect(&FTok::RPar)?;
            return Ok(inner);
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Formula<StepAtom>, String> {
        let name = self.ident()?;
        match name.as_str() {
            "true" => return Ok(Formula::Const(true)),
            "false" => return Ok(Formula::Const(false)),
            _ => {}
        }
        let pred = match name.as_str() {
            "exc" => Predicate::Exc,
            "empty" => {
                self.expect(&FTok::LPar)?;
                let c = self.ident()?;
                self.expect(&FTok::RPar)?;
                Predicate::empty(&c)
            }
            "contains" => {
                self.expect(&FTok::LPar)?;
                let c = self.ident()?;
                self.expect(&FTok::Comma)?;
                let v = self.ident()?;
                self.expect(&FTok::RPar)?;
                Predicate::contains(&c, &v)
            }
            "eq" => {
                self.expect(&FTok::LPar)?;
                let a = self.ident()?;
                self.expect(&FTok::Comma)?;
                let b = self.ident()?;
                self.expect(&FTok::RPar)?;
                Predicate::eq_values(&a, &b)
                    .ok_or_else(|| "eq needs two distinct symbols".to_string())?
            }
            other => return Err(format!("unknown atom `{other}`")),
        };
        Ok(Formula::var(if self.accept(&FTok::Prime) {
            StepAtom::Next(pred)
        } else {
            StepAtom::Cur(pred)
        }))
    }

    fn ident(&mut self) -> Result<String, String> {
        match self.tokens.get(self.pos) {
            Some(FTok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            Some(other) => Err(format!("expected an identifier, found {other}")),
            None => Err("expected an identifier, found end of input".to_string()),
        }
    }

    fn accept(&mut self, tok: &FTok) -> bool {
        if self.tokens.get(self.pos) == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &FTok) -> Result<(), String> {
        if self.accept(tok) {
            Ok(())
        } else {
            match self.tokens.get(self.pos) {
                Some(other) => Err(format!("expected {tok}, found {other}")),
                None => Err(format!("expected {tok}, found end of input")),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predicate::SymbolKind;
    use crate::source::Arg;

    fn ctx() -> Context {
        let mut c = Context::default();
        c.add_collection("idSet", SymbolKind::State).unwrap();
        c.add_value("idMain", SymbolKind::Indeterminacy).unwrap();
        c.add_value("idOpt", SymbolKind::Indeterminacy).unwrap();
        c
    }

    fn treeset_ctx() -> Context {
        let mut c = ctx();
        c.add_value("null", SymbolKind::State).unwrap();
        c
    }

    fn call(receiver: &str, op: &str, args: Vec<Arg>) -> PlainOp {
        PlainOp { receiver: receiver.into(), op: op.into(), args, index: 1, line: 1 }
    }

    fn cur(p: Predicate) -> Formula<StepAtom> {
        Formula::var(StepAtom::Cur(p))
    }

    fn next(p: Predicate) -> Formula<StepAtom> {
        Formula::var(StepAtom::Next(p))
    }

    #[test]
    fn hashset_add_touches_only_its_argument() {
        let cat = Catalog::builtin();
        let op = call("idSet", "add", vec![Arg::Ident("idMain".into())]);
        let exp = cat.expand("HashSet", &op, &ctx(), false).unwrap();
        assert_eq!(
            exp.touched,
            BTreeSet::from([
                Predicate::contains("idSet", "idMain"),
                Predicate::empty("idSet"),
            ])
        );
        let expected = Formula::and(vec![
            next(Predicate::contains("idSet", "idMain")),
            Formula::not(next(Predicate::empty("idSet"))),
        ]);
        assert_eq!(exp.formula, expected);
    }

    #[test]
    fn clear_instantiates_its_template_symbol_over_all_values() {
        let cat = Catalog::builtin();
        let op = call("idSet", "clear", vec![]);
        let exp = cat.expand("HashSet", &op, &ctx(), false).unwrap();
        assert_eq!(
            exp.touched,
            BTreeSet::from([
                Predicate::contains("idSet", "idMain"),
                Predicate::contains("idSet", "idOpt"),
                Predicate::empty("idSet"),
            ])
        );
    }

    #[test]
    fn treeset_add_of_null_collapses_to_the_exception_branch() {
        let cat = Catalog::builtin();
        let op = call("idSet", "add", vec![Arg::Null]);
        let exp = cat.expand("TreeSet", &op, &treeset_ctx(), true).unwrap();
        let freeze = |p: Predicate| Formula::iff(next(p.clone()), cur(p));
        let expected = Formula::and(vec![
            next(Predicate::Exc),
            freeze(Predicate::contains("idSet", "null")),
            freeze(Predicate::empty("idSet")),
        ]);
        assert_eq!(exp.formula, expected);
    }

    #[test]
    fn treeset_add_needs_the_null_constant() {
        let cat = Catalog::builtin();
        let op = call("idSet", "add", vec![Arg::Ident("idMain".into())]);
        match cat.expand("TreeSet", &op, &ctx(), true) {
            Err(CatalogError::MissingConstant { constant, .. }) => assert_eq!(constant, "null"),
            other => panic!("expected missing-constant error, got {other:?}"),
        }
    }

    #[test]
    fn construct_passthrough_depends_on_the_universe() {
        let cat = Catalog::builtin();
        let op = call("idSet", "construct", vec![]);
        let without = cat.expand("HashSet", &op, &ctx(), false).unwrap();
        assert!(!without.touched.contains(&Predicate::Exc));
        let with = cat.expand("HashSet", &op, &ctx(), true).unwrap();
        assert!(with.touched.contains(&Predicate::Exc));
        assert!(!cat.lookup("HashSet", "construct").unwrap().mentions_exc());
        assert!(cat.lookup("TreeSet", "add").unwrap().mentions_exc());
    }

    #[test]
    fn linked_hash_set_aliases_to_hash_set() {
        let cat = Catalog::builtin();
        let op = call("idSet", "add", vec![Arg::Ident("idOpt".into())]);
        let a = cat.expand("LinkedHashSet", &op, &ctx(), false).unwrap();
        let b = cat.expand("HashSet", &op, &ctx(), false).unwrap();
        assert_eq!(a.formula, b.formula);
    }

    #[test]
    fn unknown_operation_reports_kind_and_arity() {
        let cat = Catalog::builtin();
        let op = call("idSet", "addAll", vec![Arg::Ident("idMain".into())]);
        match cat.expand("HashSet", &op, &ctx(), false) {
            Err(CatalogError::UnknownOperation { kind, op, arity }) => {
                assert_eq!((kind.as_str(), op.as_str(), arity), ("HashSet", "addAll", 1));
            }
            other => panic!("expected unknown-operation error, got {other:?}"),
        }
    }

    #[test]
    fn formula_parser_handles_precedence_and_rejects_junk() {
        let f = parse_step_formula("!empty(c) & exc' -> eq(a,b) | empty(c)'").unwrap();
        match f {
            Formula::Implies(lhs, rhs) => {
                assert!(matches!(*lhs, Formula::And(_)));
                assert!(matches!(*rhs, Formula::Or(_)));
            }
            other => panic!("expected implication at the top, got {other}"),
        }
        assert!(parse_step_formula("empty(c) &").is_err());
        assert!(parse_step_formula("eq(a,a)").is_err());
        assert!(parse_step_formula("foo(c)").is_err());
    }

    #[test]
    fn extension_overrides_builtin() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ext.json");
        std::fs::write(
            &path,
            r#"{"entries":[{"kind":"HashSet","op":"add","value_params":1,
                "formula":"contains(c,v1)'"}]}"#,
        )
        .unwrap();
        let mut cat = Catalog::builtin();
        cat.load_extension(&path).unwrap();
        let op = call("idSet", "add", vec![Arg::Ident("idMain".into())]);
        let exp = cat.expand("HashSet", &op, &ctx(), false).unwrap();
        assert_eq!(exp.touched, BTreeSet::from([Predicate::contains("idSet", "idMain")]));
    }
}
