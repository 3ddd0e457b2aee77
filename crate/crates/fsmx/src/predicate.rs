//! Predicates over collection and value symbols, contexts, and the axioms
//! connecting them.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::Formula;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SymbolError {
    #[error("unknown symbol `{0}`")]
    Unknown(String),
    #[error("symbol `{0}` declared twice")]
    Duplicate(String),
    #[error("cannot parse predicate `{input}`: {reason}")]
    BadPredicate { input: String, reason: String },
}

/// Whether a symbol's interpretation is fixed by the abstract state (fields,
/// constants) or free per method invocation (parameters).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SymbolKind {
    State,
    Indeterminacy,
}

/// The pair of symbol sets an analysis ranges over: collection symbols and
/// value symbols, each tagged state or indeterminacy.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Context {
    collections: Vec<(String, SymbolKind)>,
    values: Vec<(String, SymbolKind)>,
}

impl Context {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_collection(&mut self, name: &str, kind: SymbolKind) -> Result<(), SymbolError> {
        if self.has_symbol(name) {
            return Err(SymbolError::Duplicate(name.to_string()));
        }
        self.collections.push((name.to_string(), kind));
        self.collections.sort();
        Ok(())
    }

    pub fn add_value(&mut self, name: &str, kind: SymbolKind) -> Result<(), SymbolError> {
        if self.has_symbol(name) {
            return Err(SymbolError::Duplicate(name.to_string()));
        }
        self.values.push((name.to_string(), kind));
        self.values.sort();
        Ok(())
    }

    pub fn has_symbol(&self, name: &str) -> bool {
        self.collections.iter().any(|(n, _)| n == name)
            || self.values.iter().any(|(n, _)| n == name)
    }

    pub fn has_collection(&self, name: &str) -> bool {
        self.collections.iter().any(|(n, _)| n == name)
    }

    pub fn has_value(&self, name: &str) -> bool {
        self.values.iter().any(|(n, _)| n == name)
    }

    pub fn collection_names(&self) -> impl Iterator<Item = &str> {
        self.collections.iter().map(|(n, _)| n.as_str())
    }

    pub fn value_names(&self) -> impl Iterator<Item = &str> {
        self.values.iter().map(|(n, _)| n.as_str())
    }

    /// `true` when `name` is a state symbol. Unknown symbols are reported as
    /// indeterminate rather than an error; callers validate membership first.
    pub fn is_state_symbol(&self, name: &str) -> bool {
        self.collections
            .iter()
            .chain(self.values.iter())
            .any(|(n, k)| n == name && *k == SymbolKind::State)
    }
}

/// An atomic observation about the modeled object. `eq` arguments are kept in
/// lexicographic order so the two orientations denote the same predicate.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Predicate {
    /// Equality of two distinct value symbols.
    EqV(String, String),
    /// Equality of two distinct collection symbols.
    EqC(String, String),
    /// Membership of a value in a collection.
    Contains(String, String),
    /// Emptiness of a collection.
    Empty(String),
    /// An exception has been observed.
    Exc,
}

impl Predicate {
    /// Canonical value equality; `None` when both names coincide (the
    /// predicate would be trivially true and is not representable).
    pub fn eq_values(a: &str, b: &str) -> Option<Predicate> {
        match a.cmp(b) {
            std::cmp::Ordering::Less => Some(Predicate::EqV(a.to_string(), b.to_string())),
            std::cmp::Ordering::Greater => Some(Predicate::EqV(b.to_string(), a.to_string())),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn eq_collections(a: &str, b: &str) -> Option<Predicate> {
        match a.cmp(b) {
            std::cmp::Ordering::Less => Some(Predicate::EqC(a.to_string(), b.to_string())),
            std::cmp::Ordering::Greater => Some(Predicate::EqC(b.to_string(), a.to_string())),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn contains(c: &str, v: &str) -> Predicate {
        Predicate::Contains(c.to_string(), v.to_string())
    }

    pub fn empty(c: &str) -> Predicate {
        Predicate::Empty(c.to_string())
    }

    pub fn symbols(&self) -> Vec<&str> {
        match self {
            Predicate::EqV(a, b) | Predicate::EqC(a, b) | Predicate::Contains(a, b) => {
                vec![a, b]
            }
            Predicate::Empty(c) => vec![c],
            Predicate::Exc => vec![],
        }
    }

    /// A predicate is a state predicate iff every symbol it mentions is a
    /// state symbol; `Exc` mentions none and is always state.
    pub fn is_state(&self, ctx: &Context) -> bool {
        self.symbols().iter().all(|s| ctx.is_state_symbol(s))
    }

    pub fn is_equality(&self) -> bool {
        matches!(self, Predicate::EqV(..) | Predicate::EqC(..))
    }

    /// Parses the textual form produced by `Display`: `exc`, `empty(c)`,
    /// `contains(c,v)`, `eq(a,b)`.
    pub fn parse(input: &str) -> Result<Predicate, SymbolError> {
        let bad = |reason: &str| SymbolError::BadPredicate {
            input: input.to_string(),
            reason: reason.to_string(),
        };
        let s = input.trim();
        if s == "exc" {
            return Ok(Predicate::Exc);
        }
        let open = s.find('(').ok_or_else(|| bad("expected `name(...)`"))?;
        if !s.ends_with(')') {
            return Err(bad("missing closing parenthesis"));
        }
        let name = &s[..open];
        let args: Vec<&str> = s[open + 1..s.len() - 1]
            .split(',')
            .map(str::trim)
            .filter(|a| !a.is_empty())
            .collect();
        match (name, args.as_slice()) {
            ("empty", [c]) => Ok(Predicate::empty(c)),
            ("contains", [c, v]) => Ok(Predicate::contains(c, v)),
            ("eq", [a, b]) => {
                Predicate::eq_values(a, b).ok_or_else(|| bad("eq needs two distinct symbols"))
            }
            ("empty" | "contains" | "eq", _) => Err(bad("wrong number of arguments")),
            _ => Err(bad("unknown predicate name")),
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::EqV(a, b) | Predicate::EqC(a, b) => write!(f, "eq({a},{b})"),
            Predicate::Contains(c, v) => write!(f, "contains({c},{v})"),
            Predicate::Empty(c) => write!(f, "empty({c})"),
            Predicate::Exc => write!(f, "exc"),
        }
    }
}

/// All predicates expressible over a context: equality on unordered pairs of
/// distinct symbols of the same sort, containment for every collection/value
/// pair, emptiness per collection, plus `exc` when requested.
pub fn predicate_universe(ctx: &Context, include_exc: bool) -> BTreeSet<Predicate> {
    let mut out = BTreeSet::new();
    let values: Vec<&str> = ctx.value_names().collect();
    let collections: Vec<&str> = ctx.collection_names().collect();
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            out.extend(Predicate::eq_values(a, b));
        }
    }
    for (i, a) in collections.iter().enumerate() {
        for b in &collections[i + 1..] {
            out.extend(Predicate::eq_collections(a, b));
        }
    }
    for c in &collections {
        for v in &values {
            out.insert(Predicate::contains(c, v));
        }
    }
    for c in &collections {
        out.insert(Predicate::empty(c));
    }
    if include_exc {
        out.insert(Predicate::Exc);
    }
    out
}

/// The individual axiom instances for a context, in deterministic order:
///
/// * `eq(v1,v2) -> (contains(c,v1) <-> contains(c,v2))` for every collection
///   and unordered pair of distinct values,
/// * `eq(c1,c2) -> (contains(c1,v) <-> contains(c2,v))` for every unordered
///   pair of distinct collections and every value,
/// * `empty(c) -> !contains(c,v)` for every collection/value pair.
pub fn axiom_instances(ctx: &Context) -> Vec<Formula<Predicate>> {
    let values: Vec<&str> = ctx.value_names().collect();
    let collections: Vec<&str> = ctx.collection_names().collect();
    let mut out = Vec::new();
    for c in &collections {
        for (i, a) in values.iter().enumerate() {
            for b in &values[i + 1..] {
                let eq = Predicate::eq_values(a, b).expect("distinct");
                out.push(Formula::implies(
                    Formula::var(eq),
                    Formula::iff(
                        Formula::var(Predicate::contains(c, a)),
                        Formula::var(Predicate::contains(c, b)),
                    ),
                ));
            }
        }
    }
    for (i, c1) in collections.iter().enumerate() {
        for c2 in &collections[i + 1..] {
            for v in &values {
                let eq = Predicate::eq_collections(c1, c2).expect("distinct");
                out.push(Formula::implies(
                    Formula::var(eq),
                    Formula::iff(
                        Formula::var(Predicate::contains(c1, v)),
                        Formula::var(Predicate::contains(c2, v)),
                    ),
                ));
            }
        }
    }
    for c in &collections {
        for v in &values {
            out.push(Formula::implies(
                Formula::var(Predicate::empty(c)),
                Formula::not(Formula::var(Predicate::contains(c, v))),
            ));
        }
    }
    out
}

/// Conjunction of all axiom instances; `Const(true)` for contexts too small
/// to instantiate any.
pub fn instantiate_axioms(ctx: &Context) -> Formula<Predicate> {
    Formula::and(axiom_instances(ctx))
}

/// An atom of a transition formula: a predicate observed either before
/// (`Cur`) or after (`Next`, the primed form) an operator application.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StepAtom {
    Cur(Predicate),
    Next(Predicate),
}

impl StepAtom {
    pub fn predicate(&self) -> &Predicate {
        match self {
            StepAtom::Cur(p) | StepAtom::Next(p) => p,
        }
    }
}

impl fmt::Display for StepAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepAtom::Cur(p) => write!(f, "{p}"),
            StepAtom::Next(p) => write!(f, "{p}'"),
        }
    }
}

/// A predicate pinned to a step of a method body: the valuation of `pred`
/// after operator `step` (step 0 is the method entry).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IndexedVar {
    pub pred: Predicate,
    pub step: usize,
}

impl IndexedVar {
    pub fn new(pred: Predicate, step: usize) -> Self {
        IndexedVar { pred, step }
    }
}

impl fmt::Display for IndexedVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.pred, self.step)
    }
}

/// Indexes a transition formula between steps `i` and `j`: unprimed atoms
/// move to step `i`, primed atoms to step `j`. Structure is preserved.
pub fn index_formula(f: &Formula<StepAtom>, i: usize, j: usize) -> Formula<IndexedVar> {
    debug_assert!(i <= j, "indexing runs forward");
    f.map(&mut |atom| match atom {
        StepAtom::Cur(p) => Formula::Var(IndexedVar::new(p.clone(), i)),
        StepAtom::Next(p) => Formula::Var(IndexedVar::new(p.clone(), j)),
    })
}

/// Indexes an unprimed formula at a single step.
pub fn index_at(f: &Formula<Predicate>, step: usize) -> Formula<IndexedVar> {
    f.map(&mut |p| Formula::Var(IndexedVar::new(p.clone(), step)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(colls: &[&str], values: &[(&str, SymbolKind)]) -> Context {
        let mut c = Context::new();
        for name in colls {
            c.add_collection(name, SymbolKind::State).unwrap();
        }
        for (name, kind) in values {
            c.add_value(name, *kind).unwrap();
        }
        c
    }

    #[test]
    fn eq_is_canonical() {
        assert_eq!(
            Predicate::eq_values("b", "a"),
            Predicate::eq_values("a", "b")
        );
        assert_eq!(Predicate::eq_values("x", "x"), None);
    }

    #[test]
    fn universe_for_single_collection_and_value() {
        let ctx = ctx(&["idSet"], &[("id", SymbolKind::Indeterminacy)]);
        let p = predicate_universe(&ctx, false);
        assert_eq!(
            p,
            BTreeSet::from([
                Predicate::contains("idSet", "id"),
                Predicate::empty("idSet"),
            ])
        );
    }

    #[test]
    fn universe_of_treeset_running_context() {
        let ctx = ctx(
            &["idSet"],
            &[
                ("idMain", SymbolKind::Indeterminacy),
                ("idOpt", SymbolKind::Indeterminacy),
                ("null", SymbolKind::State),
            ],
        );
        let p = predicate_universe(&ctx, true);
        assert_eq!(p.len(), 8);
        assert!(p.contains(&Predicate::Exc));
        assert!(p.contains(&Predicate::eq_values("idOpt", "null").unwrap()));
        assert!(p.contains(&Predicate::eq_values("idMain", "null").unwrap()));
        assert_eq!(p.iter().filter(|q| q.is_equality()).count(), 3);
    }

    #[test]
    fn state_partition_follows_symbols() {
        let ctx = ctx(
            &["idSet"],
            &[
                ("id", SymbolKind::Indeterminacy),
                ("null", SymbolKind::State),
            ],
        );
        assert!(Predicate::empty("idSet").is_state(&ctx));
        assert!(Predicate::contains("idSet", "null").is_state(&ctx));
        assert!(!Predicate::contains("idSet", "id").is_state(&ctx));
        assert!(!Predicate::eq_values("id", "null").unwrap().is_state(&ctx));
        assert!(Predicate::Exc.is_state(&ctx));
    }

    #[test]
    fn axioms_for_one_collection_two_values() {
        let ctx = ctx(
            &["c"],
            &[
                ("v1", SymbolKind::Indeterminacy),
                ("v2", SymbolKind::Indeterminacy),
            ],
        );
        let inst = axiom_instances(&ctx);
        // one same-value instance plus an emptiness instance per value
        assert_eq!(inst.len(), 3);
        let all = instantiate_axioms(&ctx);
        // empty(c) & contains(c,v1) violates the emptiness axiom
        let violating = |p: &Predicate| match p {
            Predicate::Empty(_) => true,
            Predicate::Contains(_, v) => v == "v1",
            Predicate::EqV(..) => false,
            _ => false,
        };
        assert!(!all.eval(&violating));
    }

    #[test]
    fn axioms_of_trivial_context_are_true() {
        let ctx = ctx(&["c"], &[]);
        assert_eq!(instantiate_axioms(&ctx), Formula::Const(true));
    }

    #[test]
    fn single_value_context_gets_only_emptiness_axiom() {
        let ctx = ctx(&["c"], &[("v", SymbolKind::Indeterminacy)]);
        let inst = axiom_instances(&ctx);
        assert_eq!(inst.len(), 1);
        assert_eq!(
            inst[0],
            Formula::implies(
                Formula::var(Predicate::empty("c")),
                Formula::not(Formula::var(Predicate::contains("c", "v"))),
            )
        );
    }

    #[test]
    fn indexing_is_a_homomorphism() {
        let f = Formula::and(vec![
            Formula::var(StepAtom::Cur(Predicate::empty("c"))),
            Formula::not(Formula::var(StepAtom::Next(Predicate::empty("c")))),
        ]);
        let g = index_formula(&f, 2, 3);
        assert_eq!(f.connective_count(), g.connective_count());
        assert_eq!(
            g.vars(),
            BTreeSet::from([
                IndexedVar::new(Predicate::empty("c"), 2),
                IndexedVar::new(Predicate::empty("c"), 3),
            ])
        );
    }

    #[test]
    fn predicate_text_round_trips() {
        for p in [
            Predicate::Exc,
            Predicate::empty("idSet"),
            Predicate::contains("idSet", "null"),
            Predicate::eq_values("idMain", "idOpt").unwrap(),
        ] {
            assert_eq!(Predicate::parse(&p.to_string()).unwrap(), p);
        }
        assert!(Predicate::parse("eq(x,x)").is_err());
        assert!(Predicate::parse("member(c,v)").is_err());
    }
}
