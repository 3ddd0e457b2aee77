//! Boolean formulas, generic over the atom type.

use std::collections::BTreeSet;
use std::fmt;

/// A propositional formula with atoms of type `V`.
///
/// `And`/`Or` are n-ary; an empty `And` is the constant true and an empty `Or`
/// the constant false. The smart constructors below collapse those cases, but
/// the variants can be built directly when exact structure matters.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula<V> {
    Const(bool),
    Var(V),
    Not(Box<Formula<V>>),
    And(Vec<Formula<V>>),
    Or(Vec<Formula<V>>),
    Implies(Box<Formula<V>>, Box<Formula<V>>),
    Iff(Box<Formula<V>>, Box<Formula<V>>),
}

impl<V> Formula<V> {
    pub fn var(v: V) -> Self {
        Formula::Var(v)
    }

    /// Conjunction; empty input yields `Const(true)`, a single element is
    /// returned unwrapped.
    pub fn and(mut parts: Vec<Self>) -> Self {
        match parts.len() {
            0 => Formula::Const(true),
            1 => parts.pop().unwrap(),
            _ => Formula::And(parts),
        }
    }

    /// Disjunction; empty input yields `Const(false)`.
    pub fn or(mut parts: Vec<Self>) -> Self {
        match parts.len() {
            0 => Formula::Const(false),
            1 => parts.pop().unwrap(),
            _ => Formula::Or(parts),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Self) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn implies(a: Self, b: Self) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Self, b: Self) -> Self {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    /// Structure-preserving atom translation: every connective maps to the
    /// same connective, so shape and connective count are unchanged.
    pub fn map<W>(&self, f: &mut impl FnMut(&V) -> Formula<W>) -> Formula<W> {
        match self {
            Formula::Const(b) => Formula::Const(*b),
            Formula::Var(v) => f(v),
            Formula::Not(x) => Formula::Not(Box::new(x.map(f))),
            Formula::And(xs) => Formula::And(xs.iter().map(|x| x.map(f)).collect()),
            Formula::Or(xs) => Formula::Or(xs.iter().map(|x| x.map(f)).collect()),
            Formula::Implies(a, b) => Formula::Implies(Box::new(a.map(f)), Box::new(b.map(f))),
            Formula::Iff(a, b) => Formula::Iff(Box::new(a.map(f)), Box::new(b.map(f))),
        }
    }

    pub fn for_each_var(&self, f: &mut impl FnMut(&V)) {
        match self {
            Formula::Const(_) => {}
            Formula::Var(v) => f(v),
            Formula::Not(x) => x.for_each_var(f),
            Formula::And(xs) | Formula::Or(xs) => {
                for x in xs {
                    x.for_each_var(f);
                }
            }
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.for_each_var(f);
                b.for_each_var(f);
            }
        }
    }

    pub fn vars(&self) -> BTreeSet<V>
    where
        V: Ord + Clone,
    {
        let mut out = BTreeSet::new();
        self.for_each_var(&mut |v| {
            out.insert(v.clone());
        });
        out
    }

    pub fn eval(&self, assign: &impl Fn(&V) -> bool) -> bool {
        match self {
            Formula::Const(b) => *b,
            Formula::Var(v) => assign(v),
            Formula::Not(x) => !x.eval(assign),
            Formula::And(xs) => xs.iter().all(|x| x.eval(assign)),
            Formula::Or(xs) => xs.iter().any(|x| x.eval(assign)),
            Formula::Implies(a, b) => !a.eval(assign) || b.eval(assign),
            Formula::Iff(a, b) => a.eval(assign) == b.eval(assign),
        }
    }

    /// Number of connective nodes (`Not`, `And`, `Or`, `Implies`, `Iff`).
    pub fn connective_count(&self) -> usize {
        match self {
            Formula::Const(_) | Formula::Var(_) => 0,
            Formula::Not(x) => 1 + x.connective_count(),
            Formula::And(xs) | Formula::Or(xs) => {
                1 + xs.iter().map(|x| x.connective_count()).sum::<usize>()
            }
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                1 + a.connective_count() + b.connective_count()
            }
        }
    }

    /// Flattens nested top-level conjunctions into a list of conjuncts.
    pub fn into_conjuncts(self) -> Vec<Self> {
        match self {
            Formula::And(xs) => xs.into_iter().flat_map(|x| x.into_conjuncts()).collect(),
            Formula::Const(true) => Vec::new(),
            other => vec![other],
        }
    }

    /// Constant folding. Removes `Const` leaves where possible; the result is
    /// logically equivalent over the remaining atoms but not structure
    /// preserving.
    pub fn fold_constants(&self) -> Self
    where
        V: Clone,
    {
        match self {
            Formula::Const(b) => Formula::Const(*b),
            Formula::Var(v) => Formula::Var(v.clone()),
            Formula::Not(x) => match x.fold_constants() {
                Formula::Const(b) => Formula::Const(!b),
                f => Formula::Not(Box::new(f)),
            },
            Formula::And(xs) => {
                let mut parts = Vec::new();
                for x in xs {
                    match x.fold_constants() {
                        Formula::Const(true) => {}
                        Formula::Const(false) => return Formula::Const(false),
                        f => parts.push(f),
                    }
                }
                Formula::and(parts)
            }
            Formula::Or(xs) => {
                let mut parts = Vec::new();
                for x in xs {
                    match x.fold_constants() {
                        Formula::Const(false) => {}
                        Formula::Const(true) => return Formula::Const(true),
                        f => parts.push(f),
                    }
                }
                Formula::or(parts)
            }
            Formula::Implies(a, b) => match (a.fold_constants(), b.fold_constants()) {
                (Formula::Const(false), _) => Formula::Const(true),
                (Formula::Const(true), fb) => fb,
                (_, Formula::Const(true)) => Formula::Const(true),
                (fa, Formula::Const(false)) => Formula::Not(Box::new(fa)),
                (fa, fb) => Formula::Implies(Box::new(fa), Box::new(fb)),
            },
            Formula::Iff(a, b) => match (a.fold_constants(), b.fold_constants()) {
                (Formula::Const(x), Formula::Const(y)) => Formula::Const(x == y),
                (Formula::Const(true), fb) => fb,
                (fb, Formula::Const(true)) => fb,
                (Formula::Const(false), fb) => Formula::Not(Box::new(fb)),
                (fb, Formula::Const(false)) => Formula::Not(Box::new(fb)),
                (fa, fb) => Formula::Iff(Box::new(fa), Box::new(fb)),
            },
        }
    }
}

impl<V: fmt::Display> fmt::Display for Formula<V> {
    /// SMT-like prefix rendering, used by the debug dumps.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Const(true) => write!(f, "true"),
            Formula::Const(false) => write!(f, "false"),
            Formula::Var(v) => write!(f, "{v}"),
            Formula::Not(x) => write!(f, "(not {x})"),
            Formula::And(xs) => write_list(f, "and", xs),
            Formula::Or(xs) => write_list(f, "or", xs),
            Formula::Implies(a, b) => write!(f, "(=> {a} {b})"),
            Formula::Iff(a, b) => write!(f, "(= {a} {b})"),
        }
    }
}

fn write_list<V: fmt::Display>(
    f: &mut fmt::Formatter<'_>,
    op: &str,
    xs: &[Formula<V>],
) -> fmt::Result {
    write!(f, "({op}")?;
    for x in xs {
        write!(f, " {x}")?;
    }
    write!(f, ")")
}
